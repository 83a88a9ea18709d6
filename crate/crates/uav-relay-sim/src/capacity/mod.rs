//! SINR, capacity and secrecy-capacity evaluation.
//!
//! Capacities are `log2(1 + SINR)` under unit-variance noise; per-user
//! secrecy is the clamped difference between the legitimate capacity and the
//! worst (largest) eavesdropper capacity on the same beam.
//!
//! ```
//! use uav_relay_sim::capacity::{secrecy_summary, LinkRates};
//!
//! let slot = |c: f64| LinkRates::from_parts(vec![c], vec![0.0]);
//! let direct = vec![slot(1.0), slot(3.0)];
//! let relay = vec![slot(0.0), slot(0.0)];
//! let s = secrecy_summary(&direct, &relay).unwrap();
//! assert!((s.c_total - 2.0).abs() < 1e-12);
//! ```

use crate::error::{Result, SimError};
use crate::numerics::ComplexMatrix;

/// Per-user rates for one link type in one time slot.
#[derive(Clone, Debug, Default)]
pub struct LinkRates {
    pub sinr_per_user: Vec<f64>,
    pub capacity_per_user: Vec<f64>,
    /// Worst-case (maximum over eavesdroppers) capacity per beam.
    pub eve_capacity_per_user: Vec<f64>,
    /// `max(capacity - eve_capacity, 0)` per user.
    pub secrecy_per_user: Vec<f64>,
}

impl LinkRates {
    fn from_sinr(sinr: Vec<f64>, eve_capacity: Vec<f64>) -> Self {
        let capacity: Vec<f64> = sinr.iter().map(|&g| (1.0 + g).log2()).collect();
        let secrecy: Vec<f64> = capacity
            .iter()
            .zip(&eve_capacity)
            .map(|(&c, &e)| (c - e).max(0.0))
            .collect();
        Self {
            sinr_per_user: sinr,
            capacity_per_user: capacity,
            eve_capacity_per_user: eve_capacity,
            secrecy_per_user: secrecy,
        }
    }

    /// Build directly from capacities (test/composition helper).
    pub fn from_parts(capacity: Vec<f64>, eve_capacity: Vec<f64>) -> Self {
        let sinr: Vec<f64> = capacity.iter().map(|&c| 2f64.powf(c) - 1.0).collect();
        let secrecy: Vec<f64> = capacity
            .iter()
            .zip(&eve_capacity)
            .map(|(&c, &e)| (c - e).max(0.0))
            .collect();
        Self {
            sinr_per_user: sinr,
            capacity_per_user: capacity,
            eve_capacity_per_user: eve_capacity,
            secrecy_per_user: secrecy,
        }
    }

    pub fn sum_capacity(&self) -> f64 {
        self.capacity_per_user.iter().sum()
    }

    pub fn sum_secrecy(&self) -> f64 {
        self.secrecy_per_user.iter().sum()
    }

    /// Scale every rate by a factor in [0, 1], e.g. a TDMA overhead factor
    /// for the two-phase relay schedule. SINRs are left untouched.
    pub fn scaled(&self, factor: f64) -> LinkRates {
        let cap: Vec<f64> = self.capacity_per_user.iter().map(|c| c * factor).collect();
        let eve: Vec<f64> = self
            .eve_capacity_per_user
            .iter()
            .map(|c| c * factor)
            .collect();
        let secrecy: Vec<f64> = cap
            .iter()
            .zip(&eve)
            .map(|(&c, &e)| (c - e).max(0.0))
            .collect();
        LinkRates {
            sinr_per_user: self.sinr_per_user.clone(),
            capacity_per_user: cap,
            eve_capacity_per_user: eve,
            secrecy_per_user: secrecy,
        }
    }
}

/// Time-averaged secrecy totals over a horizon.
#[derive(Clone, Debug)]
pub struct SecrecySummary {
    /// Average sum secrecy of the directly served users.
    pub c_sec_b: f64,
    /// Average sum secrecy of the relay-served users.
    pub c_sec_r: f64,
    /// `c_sec_b + c_sec_r`.
    pub c_total: f64,
    /// Per-slot totals (slot index, direct + relay sum secrecy).
    pub per_slot_trace: Vec<(usize, f64)>,
}

/// Direct-link SINRs and eavesdropper capacities for precoder `w_bk`
/// (columns are per-user beams).
pub fn direct_link_rates(
    h0: &ComplexMatrix,
    h0e: &ComplexMatrix,
    w_bk: &ComplexMatrix,
) -> Result<LinkRates> {
    let k = h0.rows();
    if w_bk.cols() != k || w_bk.rows() != h0.cols() {
        return Err(SimError::Dimension(format!(
            "direct_link_rates: precoder {}x{} does not match channel {}x{}",
            w_bk.rows(),
            w_bk.cols(),
            h0.rows(),
            h0.cols()
        )));
    }
    if h0e.rows() > 0 && h0e.cols() != h0.cols() {
        return Err(SimError::Dimension(
            "direct_link_rates: eavesdropper channel width mismatch".into(),
        ));
    }
    let hw = h0 * w_bk; // (user, beam)
    let sinr: Vec<f64> = (0..k).map(|uk| beam_sinr(&hw, uk, uk, 0.0)).collect();

    let eve_caps = eve_capacities(h0e, w_bk, None);
    Ok(LinkRates::from_sinr(sinr, eve_caps))
}

/// Relay-link SINRs per the amplify-and-forward model: the effective channel
/// is `H2 W_r H1 W_br` and each user also sees amplified relay noise
/// `||h_{2,k} W_r||^2`.
pub fn relay_link_rates(
    h2: &ComplexMatrix,
    h2e: &ComplexMatrix,
    w_r: &ComplexMatrix,
    h1: &ComplexMatrix,
    w_br: &ComplexMatrix,
) -> Result<LinkRates> {
    let k = h2.rows();
    if w_br.cols() != k {
        return Err(SimError::Dimension(format!(
            "relay_link_rates: {} beams for {} users",
            w_br.cols(),
            k
        )));
    }
    if h1.cols() != w_br.rows() || h2.cols() != w_r.rows() || w_r.cols() != h1.rows() {
        return Err(SimError::Dimension(
            "relay_link_rates: inconsistent chain dimensions".into(),
        ));
    }
    let h2wr = h2 * w_r;
    let eff = &h2wr * &(h1 * w_br); // (user, beam)
    let sinr: Vec<f64> = (0..k)
        .map(|uk| {
            let amp_noise: f64 = (0..h2wr.cols()).map(|j| h2wr[(uk, j)].norm_sqr()).sum();
            beam_sinr(&eff, uk, uk, amp_noise)
        })
        .collect();

    let eve_caps = eve_capacities_relay(h2e, w_r, h1, w_br, k);
    Ok(LinkRates::from_sinr(sinr, eve_caps))
}

/// SINR of beam `beam` at receiver row `row` of a (receiver, beam) product
/// matrix, with extra noise power added to the unit floor.
fn beam_sinr(products: &ComplexMatrix, row: usize, beam: usize, extra_noise: f64) -> f64 {
    let sig = products[(row, beam)].norm_sqr();
    let interf: f64 = (0..products.cols())
        .filter(|&i| i != beam)
        .map(|i| products[(row, i)].norm_sqr())
        .sum();
    sig / (interf + extra_noise + 1.0)
}

/// Worst-case eavesdropper capacity per beam for a plain product channel.
fn eve_capacities(
    he: &ComplexMatrix,
    w: &ComplexMatrix,
    extra_noise_per_eve: Option<&[f64]>,
) -> Vec<f64> {
    let beams = w.cols();
    if he.rows() == 0 {
        return vec![0.0; beams];
    }
    let prod = he * w; // (eve, beam)
    (0..beams)
        .map(|b| {
            (0..he.rows())
                .map(|e| {
                    let extra = extra_noise_per_eve.map_or(0.0, |v| v[e]);
                    (1.0 + beam_sinr(&prod, e, b, extra)).log2()
                })
                .fold(0.0f64, f64::max)
        })
        .collect()
}

fn eve_capacities_relay(
    h2e: &ComplexMatrix,
    w_r: &ComplexMatrix,
    h1: &ComplexMatrix,
    w_br: &ComplexMatrix,
    beams: usize,
) -> Vec<f64> {
    if h2e.rows() == 0 {
        return vec![0.0; beams];
    }
    let h2ewr = h2e * w_r;
    let eff = &h2ewr * &(h1 * w_br);
    let amp_noise: Vec<f64> = (0..h2e.rows())
        .map(|e| (0..h2ewr.cols()).map(|j| h2ewr[(e, j)].norm_sqr()).sum())
        .collect();
    (0..beams)
        .map(|b| {
            (0..h2e.rows())
                .map(|e| (1.0 + beam_sinr(&eff, e, b, amp_noise[e])).log2())
                .fold(0.0f64, f64::max)
        })
        .collect()
}

/// Time-averaged sum secrecy over matched per-slot rate sequences.
pub fn secrecy_summary(direct: &[LinkRates], relay: &[LinkRates]) -> Result<SecrecySummary> {
    if direct.is_empty() || direct.len() != relay.len() {
        return Err(SimError::Domain(format!(
            "secrecy_summary: need equal non-zero horizons, got {} and {}",
            direct.len(),
            relay.len()
        )));
    }
    let t = direct.len() as f64;
    let c_sec_b = direct.iter().map(LinkRates::sum_secrecy).sum::<f64>() / t;
    let c_sec_r = relay.iter().map(LinkRates::sum_secrecy).sum::<f64>() / t;
    let per_slot_trace = direct
        .iter()
        .zip(relay)
        .enumerate()
        .map(|(i, (d, r))| (i, d.sum_secrecy() + r.sum_secrecy()))
        .collect();
    Ok(SecrecySummary {
        c_sec_b,
        c_sec_r,
        c_total: c_sec_b + c_sec_r,
        per_slot_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::zf_construct;
    use crate::numerics::{complex_gaussian, ComplexMatrix, SeededRng};
    use num_complex::Complex64;

    #[test]
    fn single_user_no_interference() {
        // h*w = 2 -> SINR 4, capacity log2(5).
        let h0 = ComplexMatrix::from_real(1, 1, &[2.0]);
        let w = ComplexMatrix::from_real(1, 1, &[1.0]);
        let r = direct_link_rates(&h0, &ComplexMatrix::zeros(0, 1), &w).unwrap();
        assert!((r.sinr_per_user[0] - 4.0).abs() < 1e-12);
        assert!((r.capacity_per_user[0] - 5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_beams_unit_gain() {
        let h0 = ComplexMatrix::identity(2);
        let w = ComplexMatrix::identity(2);
        let r = direct_link_rates(&h0, &ComplexMatrix::zeros(0, 2), &w).unwrap();
        for k in 0..2 {
            assert!((r.sinr_per_user[k] - 1.0).abs() < 1e-12);
            assert!((r.capacity_per_user[k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_matches_scalar_oracle() {
        let mut rng = SeededRng::new(51);
        let h0 = complex_gaussian(2, 4, 1.0, &mut rng);
        let h0e = complex_gaussian(1, 4, 1.0, &mut rng);
        let w = complex_gaussian(4, 2, 1.0, &mut rng);
        let r = direct_link_rates(&h0, &h0e, &w).unwrap();
        // Scalar, term-by-term recomputation.
        for k in 0..2 {
            let dot = |row: &ComplexMatrix, col: usize| -> Complex64 {
                (0..4).map(|j| row[(0, j)] * w[(j, col)]).sum()
            };
            let hk = h0.row(k);
            let sig = dot(&hk, k).norm_sqr();
            let mut interf = 0.0;
            for i in 0..2 {
                if i != k {
                    interf += dot(&hk, i).norm_sqr();
                }
            }
            let gamma = sig / (interf + 1.0);
            assert!((r.sinr_per_user[k] - gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn relay_rates_on_zf_match_collapsed_form() {
        let mut rng = SeededRng::new(52);
        let h1 = complex_gaussian(2, 4, 1.0, &mut rng);
        let h2 = complex_gaussian(2, 2, 1.0, &mut rng);
        let zf = zf_construct(&h1, &h2, &[1.0, 1.0]).unwrap();
        let r = relay_link_rates(&h2, &ComplexMatrix::zeros(0, 2), &zf.w_r, &h1, &zf.w_br)
            .unwrap();
        for k in 0..2 {
            assert!((r.sinr_per_user[k] - 0.5).abs() < 1e-9);
            assert!((r.capacity_per_user[k] - 1.5f64.log2()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_relay_precoder_zero_rates() {
        let mut rng = SeededRng::new(53);
        let h1 = complex_gaussian(2, 4, 1.0, &mut rng);
        let h2 = complex_gaussian(2, 2, 1.0, &mut rng);
        let w_br = complex_gaussian(4, 2, 1.0, &mut rng);
        let r = relay_link_rates(
            &h2,
            &ComplexMatrix::zeros(0, 2),
            &ComplexMatrix::zeros(2, 2),
            &h1,
            &w_br,
        )
        .unwrap();
        assert!(r.sinr_per_user.iter().all(|&g| g == 0.0));
        assert!(r.capacity_per_user.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn relay_matches_scalar_oracle() {
        let mut rng = SeededRng::new(54);
        let h1 = complex_gaussian(3, 4, 1.0, &mut rng);
        let h2 = complex_gaussian(2, 3, 1.0, &mut rng);
        let h2e = complex_gaussian(1, 3, 1.0, &mut rng);
        let w_r = complex_gaussian(3, 3, 1.0, &mut rng);
        let w_br = complex_gaussian(4, 2, 1.0, &mut rng);
        let r = relay_link_rates(&h2, &h2e, &w_r, &h1, &w_br).unwrap();
        let chain = &(&h2 * &w_r) * &(&h1 * &w_br);
        let h2wr = &h2 * &w_r;
        for k in 0..2 {
            let sig = chain[(k, k)].norm_sqr();
            let mut interf = 0.0;
            for i in 0..2 {
                if i != k {
                    interf += chain[(k, i)].norm_sqr();
                }
            }
            let amp: f64 = (0..3).map(|j| h2wr[(k, j)].norm_sqr()).sum();
            let gamma = sig / (interf + amp + 1.0);
            assert!((r.sinr_per_user[k] - gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_rotation_leaves_sinr_unchanged() {
        let mut rng = SeededRng::new(55);
        let h0 = complex_gaussian(3, 4, 1.0, &mut rng);
        let h0e = complex_gaussian(1, 4, 1.0, &mut rng);
        let w = complex_gaussian(4, 3, 1.0, &mut rng);
        let rot = Complex64::from_polar(1.0, 1.234);
        let w_rot = w.scale(rot);
        let a = direct_link_rates(&h0, &h0e, &w).unwrap();
        let b = direct_link_rates(&h0, &h0e, &w_rot).unwrap();
        for k in 0..3 {
            assert!((a.sinr_per_user[k] - b.sinr_per_user[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn secrecy_clamp_behaviour() {
        // Eve stronger everywhere -> zero; eve silent -> full capacity.
        let strong_eve = LinkRates::from_parts(vec![1.0, 2.0], vec![5.0, 5.0]);
        assert_eq!(strong_eve.sum_secrecy(), 0.0);
        let silent_eve = LinkRates::from_parts(vec![1.0, 2.0], vec![0.0, 0.0]);
        assert_eq!(silent_eve.sum_secrecy(), 3.0);
    }

    #[test]
    fn summary_averages_slots() {
        let d1 = LinkRates::from_parts(vec![1.0], vec![0.0]);
        let d2 = LinkRates::from_parts(vec![3.0], vec![0.0]);
        let r0 = LinkRates::from_parts(vec![0.0], vec![0.0]);
        let s = secrecy_summary(&[d1, d2], &[r0.clone(), r0]).unwrap();
        assert!((s.c_total - 2.0).abs() < 1e-12);
        assert_eq!(s.per_slot_trace.len(), 2);
    }

    #[test]
    fn empty_horizon_rejected() {
        assert!(secrecy_summary(&[], &[]).is_err());
    }

    #[test]
    fn relay_capacity_below_one_under_zf() {
        // Collapsed-SINR bound: SINR = l^2/(l^2+1) < 1 so capacity < 1 bit/s/Hz.
        let mut rng = SeededRng::new(56);
        for _ in 0..20 {
            let h1 = complex_gaussian(2, 4, 1.0, &mut rng);
            let h2 = complex_gaussian(2, 2, 1.0, &mut rng);
            let lam = [rng.uniform_range(0.0, 10.0), rng.uniform_range(0.0, 10.0)];
            let zf = zf_construct(&h1, &h2, &lam).unwrap();
            let r = relay_link_rates(&h2, &ComplexMatrix::zeros(0, 2), &zf.w_r, &h1, &zf.w_br)
                .unwrap();
            for &c in &r.capacity_per_user {
                assert!(c < 1.0);
            }
        }
    }
}
