use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::ComplexMatrix;

/// Deterministic random source.
///
/// Backed by the ChaCha stream cipher with 8 rounds, seeded from a 64-bit
/// value. Identical seeds produce bit-identical streams on every platform.
/// Sub-generators for parallel workers are derived with SplitMix64 so that
/// streams never overlap.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

/// SplitMix64 finalizer, used for seed derivation only.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for the given stream id.
    pub fn derive(&self, stream: u64) -> SeededRng {
        SeededRng::new(splitmix64(self.seed ^ splitmix64(stream)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform sample in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        // 53 random bits, the full precision of an f64 mantissa.
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn gen_index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Standard normal via Box-Muller. Two uniforms per pair of samples; the
    /// second sample is cached.
    pub fn standard_normal(&mut self) -> f64 {
        // Cached pair member, if any.
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u1 = self.uniform();
            if u1 <= f64::MIN_POSITIVE {
                continue;
            }
            let u2 = self.uniform();
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            self.spare = Some(r * theta.sin());
            return r * theta.cos();
        }
    }

    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.standard_normal()
    }
}

/// Matrix of i.i.d. circularly symmetric complex Gaussian entries with the
/// given per-entry variance (real and imaginary parts each carry half).
pub fn complex_gaussian(
    rows: usize,
    cols: usize,
    variance: f64,
    rng: &mut SeededRng,
) -> ComplexMatrix {
    assert!(variance > 0.0, "variance must be positive");
    let s = (variance / 2.0).sqrt();
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(s * rng.standard_normal(), s * rng.standard_normal())
    })
}
