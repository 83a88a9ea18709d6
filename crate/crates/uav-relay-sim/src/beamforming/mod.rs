//! Beamforming and power control.
//!
//! Three pieces: the iterative WMMSE precoder for the direct GBS links, the
//! zero-forcing relay construction that diagonalizes the end-to-end
//! GBS-relay-user channel through SVDs, and the closed-form KKT power
//! allocation across the relay antennas.
//!
//! ```
//! use uav_relay_sim::beamforming::{optimal_relay_power};
//! use uav_relay_sim::numerics::ComplexMatrix;
//!
//! // Symmetric per-antenna cost: the budget splits evenly.
//! let u2 = ComplexMatrix::identity(2);
//! let alloc = optimal_relay_power(&u2, &[1.0, 1.0], 4.0, 10.0).unwrap();
//! assert!((alloc.lambda_r_opt[0] - alloc.lambda_r_opt[1]).abs() < 1e-9);
//! ```

mod allocation;
mod wmmse;
mod zf;

pub use allocation::{
    lambda_interior, optimal_relay_power, taylor_relay_power, PowerAllocation, RootFormula,
};
pub use wmmse::{sum_rate, wmmse_precoder, wmmse_precoder_with_trace};
pub use zf::{relay_power_closed_form, relay_power_usage, zf_construct, ZfConstruction};
