use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::numerics::{svd, ComplexMatrix, SvdResult};

const RANK_TOL: f64 = 1e-10;

/// Zero-forcing beamforming matrices for the relay path.
///
/// `w_br` precodes the GBS transmission toward the relay-served users and
/// `w_r` is the relay's amplify-and-forward matrix. Together they satisfy
/// two identities (up to numerical tolerance):
///
/// * end-to-end: `H2 * W_r * H1 * W_br = diag(lambda_r)`,
/// * noise shaping: `H2 * W_r = diag(lambda_r)` (rectangular when N > K_r),
///
/// so each user k sees `lambda_k * s_k + lambda_k * n1_k + n2_k` and the
/// relay SINR collapses to `lambda_k^2 / (lambda_k^2 + 1)`.
#[derive(Clone, Debug)]
pub struct ZfConstruction {
    /// GBS precoder toward the relay, M x K_r.
    pub w_br: ComplexMatrix,
    /// Relay precoder, N x N.
    pub w_r: ComplexMatrix,
    /// GBS-side factor: Sigma_g^-1 * U_g^H * U_2, K_r x K_r.
    pub lambda_b: ComplexMatrix,
    /// Relay-side factor: Sigma_2^-1 * U_2^H * U_g, K_r x K_r.
    pub lambda_r_hat: ComplexMatrix,
    /// Per-user amplification, the diagonal of Lambda_r.
    pub lambda_r: Vec<f64>,
    /// Left singular vectors of H2 (K_r x K_r), kept for the power constants.
    pub u2: ComplexMatrix,
    /// Singular values of H2, descending.
    pub sigma2: Vec<f64>,
}

fn check_rank(d: &SvdResult, k: usize, name: &str) -> Result<()> {
    let smin = d.sigma.get(k - 1).copied().unwrap_or(0.0);
    if smin <= RANK_TOL {
        return Err(SimError::Infeasible {
            channel: name.to_string(),
            sigma_min: smin,
        });
    }
    Ok(())
}

/// Build the ZF relay beamforming matrices for amplification levels
/// `lambda_r`.
///
/// `h1` is the N x M GBS-to-relay channel and `h2` the K_r x N relay-to-user
/// channel. Requires rank K_r in `h2` and in the K_r receive dimensions of
/// `h1` that the relay forwards (its top rows); checked through singular
/// values.
pub fn zf_construct(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    lambda_r: &[f64],
) -> Result<ZfConstruction> {
    let k = h2.rows();
    let n = h2.cols();
    let m = h1.cols();
    if h1.rows() != n {
        return Err(SimError::Dimension(format!(
            "zf_construct: H1 is {}x{} but H2 expects N = {}",
            h1.rows(),
            m,
            n
        )));
    }
    if lambda_r.len() != k {
        return Err(SimError::Dimension(format!(
            "zf_construct: {} amplification levels for {} users",
            lambda_r.len(),
            k
        )));
    }
    if k > n || k > m {
        return Err(SimError::Dimension(format!(
            "zf_construct: K_r = {k} exceeds antenna counts (N = {n}, M = {m})"
        )));
    }
    if lambda_r.iter().any(|&l| l < 0.0) {
        return Err(SimError::Domain(
            "zf_construct: negative amplification level".into(),
        ));
    }

    let d2 = svd(h2)?;
    check_rank(&d2, k, "H2")?;
    let d1 = svd(h1)?;
    check_rank(&d1, k, "H1")?;

    // The noise-shaping identity forces the relay to pass exactly K_r receive
    // dimensions; the construction inverts the top K_r rows of H1.
    let g = h1.row_slice(0, k);
    let dg = svd(&g)?;
    check_rank(&dg, k, "H1 (forwarded rows)")?;

    let u2 = d2.u.first_cols(k);
    let sigma2 = d2.sigma[..k].to_vec();
    let v2 = d2.v.first_cols(k);
    let ug = dg.u.first_cols(k);
    let vg = dg.v.first_cols(k);

    // Lambda_b = Sigma_g^-1 U_g^H U_2 so that U_g Sigma_g Lambda_b U_2^H = I.
    let ugh_u2 = &ug.hermitian() * &u2;
    let lambda_b = ComplexMatrix::from_fn(k, k, |i, j| ugh_u2[(i, j)] / dg.sigma[i]);
    let w_br = &vg * &(&lambda_b * &u2.hermitian());

    // Lambda_r_hat = Sigma_2^-1 U_2^H U_g so that U_2 Sigma_2 Lambda_r_hat U_g^H = I.
    let u2h_ug = &u2.hermitian() * &ug;
    let lambda_r_hat = ComplexMatrix::from_fn(k, k, |i, j| u2h_ug[(i, j)] / sigma2[i]);
    let d_rect = ComplexMatrix::diag_rect(k, n, lambda_r);
    let w_r = &(&v2 * &lambda_r_hat) * &(&ug.hermitian() * &d_rect);

    Ok(ZfConstruction {
        w_br,
        w_r,
        lambda_b,
        lambda_r_hat,
        lambda_r: lambda_r.to_vec(),
        u2,
        sigma2,
    })
}

/// Exact relay transmit power `Tr(W_r (H1 W_br W_br^H H1^H + I) W_r^H)`:
/// amplified signal plus amplified relay-input noise.
pub fn relay_power_usage(
    w_r: &ComplexMatrix,
    h1: &ComplexMatrix,
    w_br: &ComplexMatrix,
) -> f64 {
    let h1wbr = h1 * w_br;
    let signal = &h1wbr * &h1wbr.hermitian();
    let inner = &signal + &ComplexMatrix::identity(signal.rows());
    let total = &(w_r * &inner) * &w_r.hermitian();
    total.trace().re
}

/// Closed-form relay power `2 * sum_mn |U2(m,n)|^2 sigma_n^-2 lambda_m^2`;
/// exact when N = K_r, an approximation otherwise.
pub fn relay_power_closed_form(u2: &ComplexMatrix, sigma2: &[f64], lambda_r: &[f64]) -> f64 {
    let k = lambda_r.len();
    let mut acc = 0.0;
    for m in 0..k {
        for n in 0..sigma2.len() {
            acc += u2[(m, n)].norm_sqr() / (sigma2[n] * sigma2[n]) * lambda_r[m] * lambda_r[m];
        }
    }
    2.0 * acc
}

#[allow(dead_code)]
fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}
