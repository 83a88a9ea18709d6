use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Result, SimError};

/// Thin singular value decomposition `A = U * diag(sigma) * V^H`.
///
/// `u` is rows x k and `v` is cols x k with k = min(rows, cols); both have
/// orthonormal columns. Singular values are sorted descending. The phase
/// ambiguity of each singular pair is fixed by making the largest-magnitude
/// entry of the left singular vector real and positive, so decompositions are
/// deterministic.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl SvdResult {
    /// `U * diag(sigma) * V^H`, for residual checks.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.sigma.len();
        let us = ComplexMatrix::from_fn(self.u.rows(), k, |i, j| {
            self.u[(i, j)] * self.sigma[j]
        });
        &us * &self.v.hermitian()
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    /// Truncate to the leading `k` singular triples.
    pub fn truncate(&self, k: usize) -> SvdResult {
        SvdResult {
            u: self.u.first_cols(k),
            sigma: self.sigma[..k].to_vec(),
            v: self.v.first_cols(k),
        }
    }
}

const MAX_SWEEPS: usize = 64;
const OFF_TOL: f64 = 1e-14;

/// Thin SVD by one-sided Jacobi rotations on the columns.
///
/// Each rotation orthogonalizes one column pair exactly; sweeps repeat until
/// every pair is orthogonal to relative tolerance 1e-14. Quadratic
/// convergence makes this reliable for the small matrices used here.
pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(SimError::Domain("svd input has non-finite entries".into()));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Err(SimError::Dimension("svd requires a non-empty matrix".into()));
    }
    if a.rows() < a.cols() {
        // Work on the conjugate transpose and swap factors.
        let t = svd(&a.hermitian())?;
        return Ok(fix_phases(SvdResult {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        }));
    }

    let m = a.rows();
    let n = a.cols();
    let mut b = a.clone();
    let mut v = ComplexMatrix::identity(n);

    // Columns whose norm collapses to rounding noise (rank-deficient
    // inputs) are treated as zero; rotating them forever would chase noise.
    let fro2 = a.frobenius_norm().powi(2);
    let negligible = fro2 * 1e-28;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    alpha += bp.norm_sqr();
                    beta += bq.norm_sqr();
                    gamma += bp.conj() * bq;
                }
                let g = gamma.norm();
                if g <= OFF_TOL * (alpha * beta).sqrt()
                    || g == 0.0
                    || alpha <= negligible
                    || beta <= negligible
                {
                    continue;
                }
                rotated = true;
                let tau = (beta - alpha) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let phase = gamma / g;
                let sp = s * phase;
                let spc = s * phase.conj();
                for i in 0..m {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = c * bp - spc * bq;
                    b[(i, q)] = sp * bp + c * bq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - spc * vq;
                    v[(i, q)] = sp * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SimError::Numerical(format!(
            "jacobi svd did not converge within {MAX_SWEEPS} sweeps for a {m}x{n} matrix"
        )));
    }

    // Column norms are the singular values.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());

    let mut u = ComplexMatrix::zeros(m, n);
    let mut vv = ComplexMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    let scale = norms.iter().cloned().fold(0.0_f64, f64::max);
    let rank_tol = scale * 1e-15 * (m.max(n) as f64);
    for (dst, &src) in order.iter().enumerate() {
        sigma.push(norms[src]);
        for i in 0..n {
            vv[(i, dst)] = v[(i, src)];
        }
        if norms[src] > rank_tol && norms[src] > 0.0 {
            for i in 0..m {
                u[(i, dst)] = b[(i, src)] / norms[src];
            }
        }
    }
    complete_null_columns(&mut u, &sigma, rank_tol);

    Ok(fix_phases(SvdResult { u, sigma, v: vv }))
}

/// Replace left singular vectors of (numerically) zero singular values with an
/// orthonormal completion so U always has orthonormal columns.
fn complete_null_columns(u: &mut ComplexMatrix, sigma: &[f64], rank_tol: f64) {
    let m = u.rows();
    let k = u.cols();
    for j in 0..k {
        if sigma[j] > rank_tol && sigma[j] > 0.0 {
            continue;
        }
        // Gram-Schmidt a standard basis vector against all other columns.
        'basis: for e in 0..m {
            let mut cand = vec![Complex64::new(0.0, 0.0); m];
            cand[e] = Complex64::new(1.0, 0.0);
            for jj in 0..k {
                if jj == j {
                    continue;
                }
                let proj: Complex64 = (0..m).map(|i| u[(i, jj)].conj() * cand[i]).sum();
                for i in 0..m {
                    let uc = u[(i, jj)];
                    cand[i] -= proj * uc;
                }
            }
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for i in 0..m {
                    u[(i, j)] = cand[i] / norm;
                }
                break 'basis;
            }
        }
    }
}

fn fix_phases(mut r: SvdResult) -> SvdResult {
    let m = r.u.rows();
    let n = r.v.rows();
    for j in 0..r.sigma.len() {
        let mut best = 0usize;
        let mut best_mag = 0.0;
        for i in 0..m {
            let mag = r.u[(i, j)].norm();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        if best_mag == 0.0 {
            continue;
        }
        let z = r.u[(best, j)];
        let rot = (z / z.norm()).conj();
        for i in 0..m {
            let v = r.u[(i, j)];
            r.u[(i, j)] = v * rot;
        }
        for i in 0..n {
            let v = r.v[(i, j)];
            r.v[(i, j)] = v * rot;
        }
    }
    r
}

/// Moore-Penrose pseudo-inverse through the SVD.
pub fn pseudo_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = svd(a)?;
    let scale = d.sigma.first().copied().unwrap_or(0.0);
    let tol = scale * 1e-13 * (a.rows().max(a.cols()) as f64);
    let k = d.sigma.len();
    let vs = ComplexMatrix::from_fn(d.v.rows(), k, |i, j| {
        if d.sigma[j] > tol {
            d.v[(i, j)] / d.sigma[j]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(&vs * &d.u.hermitian())
}
