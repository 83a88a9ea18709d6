use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::numerics::ComplexMatrix;

/// WMMSE precoder for the direct GBS downlink, returning the M x K_b
/// precoding matrix (one column per user).
///
/// Alternates three closed-form blocks until the sum rate stops moving:
/// MMSE receive scalars, MSE-inverse weights, and the regularized transmit
/// update `(H^H Q^H F Q H + Tr(F Q Q^H)/P * I)^-1 H^H Q^H F`. Noise is unit
/// variance at every user. The final precoder is scaled down if it exceeds
/// the power budget.
pub fn wmmse_precoder(
    h0: &ComplexMatrix,
    p_b_max: f64,
    max_iters: usize,
    tol: f64,
) -> Result<ComplexMatrix> {
    Ok(wmmse_precoder_with_trace(h0, p_b_max, max_iters, tol)?.0)
}

/// Same as [`wmmse_precoder`] but also returns the sum rate after every
/// iteration, for monotonicity audits.
pub fn wmmse_precoder_with_trace(
    h0: &ComplexMatrix,
    p_b_max: f64,
    max_iters: usize,
    tol: f64,
) -> Result<(ComplexMatrix, Vec<f64>)> {
    let k = h0.rows();
    let m = h0.cols();
    if k > m {
        return Err(SimError::Dimension(format!(
            "wmmse: {k} users cannot be served by {m} antennas"
        )));
    }
    if p_b_max <= 0.0 {
        return Err(SimError::Domain("wmmse: power budget must be positive".into()));
    }
    if !h0.is_finite() {
        return Err(SimError::Domain("wmmse: channel has non-finite entries".into()));
    }
    let h_norm = h0.frobenius_norm();
    if h_norm == 0.0 {
        return Ok((ComplexMatrix::zeros(m, k), vec![0.0]));
    }

    // Matched-filter start scaled to the budget.
    let mut w = h0.hermitian();
    let p0 = w.frobenius_norm().powi(2);
    w = w.scale_real((p_b_max / p0).sqrt());

    let mut rates = Vec::with_capacity(max_iters + 1);
    rates.push(sum_rate(h0, &w));

    for _ in 0..max_iters {
        // Receive scalars and weights.
        let hw = h0 * &w; // K x K, entry (k, i) = h_k w_i
        let mut q = vec![Complex64::new(0.0, 0.0); k];
        let mut f = vec![0.0f64; k];
        for uk in 0..k {
            let total: f64 = (0..k).map(|i| hw[(uk, i)].norm_sqr()).sum::<f64>() + 1.0;
            let sig = hw[(uk, uk)];
            q[uk] = sig.conj() / total;
            let mse = (1.0 - sig.norm_sqr() / total).max(1e-14);
            f[uk] = 1.0 / mse;
        }

        // Transmit update: W(mu) = (H^H Q^H F Q H + mu I)^-1 H^H Q^H F with
        // the multiplier pinned by the power budget. mu = 0 when the
        // unconstrained minimizer already fits; otherwise ||W(mu)||^2 = P,
        // found by bisection (the norm is strictly decreasing in mu).
        let qh = ComplexMatrix::from_fn(k, m, |i, j| h0[(i, j)] * q[i]); // Q * H
        let fqh = ComplexMatrix::from_fn(k, m, |i, j| qh[(i, j)] * f[i]); // F Q H
        let a0 = &qh.hermitian() * &fqh; // H^H Q^H F Q H
        // B = H^H Q^H F, column k = f_k q_k^* h_k^H.
        let b = ComplexMatrix::from_fn(m, k, |i, j| h0[(j, i)].conj() * q[j].conj() * f[j]);
        let solve_mu = |mu: f64| -> Result<ComplexMatrix> {
            let mut a = a0.clone();
            for i in 0..m {
                a[(i, i)] += Complex64::new(mu, 0.0);
            }
            a.solve(&b)
        };
        let unconstrained = solve_mu(0.0);
        w = match unconstrained {
            Ok(cand) if cand.frobenius_norm().powi(2) <= p_b_max => cand,
            _ => {
                // ||W(mu)||^2 <= ||B||_F^2 / mu^2, so this upper end is
                // guaranteed under budget.
                let mut hi = b.frobenius_norm() / p_b_max.sqrt();
                let mut lo = 0.0;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    match solve_mu(mid) {
                        Ok(cand) if cand.frobenius_norm().powi(2) > p_b_max => lo = mid,
                        Ok(_) => hi = mid,
                        Err(_) => lo = mid,
                    }
                }
                solve_mu(hi)?
            }
        };

        let rate = sum_rate(h0, &w);
        let delta = rate - *rates.last().unwrap();
        rates.push(rate);
        if delta.abs() < tol {
            break;
        }
    }

    let used = w.frobenius_norm().powi(2);
    if used > p_b_max {
        w = w.scale_real((p_b_max / used).sqrt());
    }
    Ok((w, rates))
}

/// Sum of `log2(1 + SINR_k)` for precoder columns under unit noise.
pub fn sum_rate(h0: &ComplexMatrix, w: &ComplexMatrix) -> f64 {
    let k = h0.rows();
    let hw = h0 * w;
    let mut rate = 0.0;
    for uk in 0..k {
        let sig = hw[(uk, uk)].norm_sqr();
        let interf: f64 = (0..k)
            .filter(|&i| i != uk)
            .map(|i| hw[(uk, i)].norm_sqr())
            .sum();
        rate += (1.0 + sig / (interf + 1.0)).log2();
    }
    rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{complex_gaussian, SeededRng};

    #[test]
    fn single_user_matches_maximum_ratio() {
        let mut rng = SeededRng::new(41);
        let h = complex_gaussian(1, 4, 1.0, &mut rng);
        let p = 4.0;
        let w = wmmse_precoder(&h, p, 500, 1e-13).unwrap();
        // Analytic optimum: sqrt(P) h^H / ||h||.
        let oracle = h.hermitian().scale_real(p.sqrt() / h.frobenius_norm());
        let diff = (&w - &oracle).frobenius_norm();
        assert!(diff < 1e-6, "difference from MRT {diff}");
    }

    #[test]
    fn dead_channel_gives_zero_precoder() {
        let h = ComplexMatrix::zeros(2, 4);
        let (w, rates) = wmmse_precoder_with_trace(&h, 1.0, 50, 1e-8).unwrap();
        assert!(w.frobenius_norm() == 0.0);
        assert_eq!(rates, vec![0.0]);
    }

    #[test]
    fn sum_rate_monotone_per_iteration() {
        let mut rng = SeededRng::new(42);
        for _ in 0..100 {
            let k = 2 + rng.gen_index(3);
            let m = k + rng.gen_index(4);
            let h = complex_gaussian(k, m, 1.0, &mut rng);
            let p = rng.uniform_range(0.5, 50.0);
            let (_, rates) = wmmse_precoder_with_trace(&h, p, 60, 1e-10).unwrap();
            for pair in rates.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-9,
                    "rate decreased: {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn power_budget_respected() {
        let mut rng = SeededRng::new(43);
        for _ in 0..20 {
            let h = complex_gaussian(3, 5, 1.0, &mut rng);
            let p = 2.5;
            let w = wmmse_precoder(&h, p, 100, 1e-9).unwrap();
            assert!(w.frobenius_norm().powi(2) <= p + 1e-9);
        }
    }

    #[test]
    fn too_many_users_rejected() {
        let h = ComplexMatrix::zeros(5, 3);
        assert!(wmmse_precoder(&h, 1.0, 10, 1e-6).is_err());
    }
}
