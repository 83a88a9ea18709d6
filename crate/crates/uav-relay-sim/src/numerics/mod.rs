//! Complex linear algebra and deterministic sampling.
//!
//! Everything downstream (channels, precoders, the power allocator) is built
//! on [`ComplexMatrix`], the Jacobi [`svd`], and the reproducible
//! [`SeededRng`]. No external numerical backend is used.
//!
//! ```
//! use uav_relay_sim::numerics::{ComplexMatrix, svd};
//!
//! let a = ComplexMatrix::diag(&[3.0, 2.0]);
//! let d = svd(&a).unwrap();
//! assert!((d.sigma[0] - 3.0).abs() < 1e-12);
//! assert!((d.sigma[1] - 2.0).abs() < 1e-12);
//! ```

mod matrix;
mod rng;
mod svd;

pub use matrix::ComplexMatrix;
pub use rng::{complex_gaussian, SeededRng};
pub use svd::{pseudo_inverse, svd, SvdResult};
