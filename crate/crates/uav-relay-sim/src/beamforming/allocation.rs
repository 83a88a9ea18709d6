use crate::error::{Result, SimError};
use crate::numerics::ComplexMatrix;

const LN2: f64 = std::f64::consts::LN_2;

/// Which closed-form root to use for the interior amplification level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootFormula {
    /// Root of the KKT stationarity condition
    /// `(2 t + 1)(t + 1) = 1 / (2 alpha1 F ln 2)` with `t = lambda^2`:
    /// `t = (sqrt(1 + 8 c) - 3) / 4`, `c = 1 / (2 alpha1 F ln 2)`.
    /// This is the root the allocator uses; its KKT residual vanishes.
    Stationarity,
    /// The printed closed form with `2 / (alpha1 F ln 2)` inside the square
    /// root. Kept for comparison; it does not zero the stationarity residual.
    PrintedForm,
}

/// Interior amplification level for multiplier `alpha1` and power constant
/// `f`. Negative results mean the antenna should be switched off.
pub fn lambda_interior(alpha1: f64, f: f64, formula: RootFormula) -> f64 {
    let t = match formula {
        RootFormula::Stationarity => {
            let c = 1.0 / (2.0 * alpha1 * f * LN2);
            ((1.0 + 8.0 * c).sqrt() - 3.0) / 4.0
        }
        RootFormula::PrintedForm => {
            ((1.0 + 2.0 / (alpha1 * f * LN2)).sqrt() - 3.0) / 4.0
        }
    };
    if t <= 0.0 {
        t
    } else {
        t.sqrt()
    }
}

/// Taylor-simplified squared amplification `1 / (4 f1 F ln 2) - 0.5`.
/// May be negative; the caller clamps. Accurate in the small-multiplier
/// regime where the exact root is large.
pub fn taylor_relay_power(f1: f64, f_l: f64) -> f64 {
    1.0 / (4.0 * f1 * f_l * LN2) - 0.5
}

/// Result of the relay power optimization.
#[derive(Clone, Debug)]
pub struct PowerAllocation {
    /// Optimal amplification per antenna, each in [0, lambda_r_max].
    pub lambda_r_opt: Vec<f64>,
    /// Lagrange multiplier of the total power constraint (0 when the
    /// per-antenna caps absorb the whole budget).
    pub alpha1: f64,
    /// Per-antenna power constants `F_l = sum_n |U2(l,n)|^2 sigma_n^-2`.
    pub f_constants: Vec<f64>,
    /// Power consumed by the allocation, `2 * sum F_l lambda_l^2`.
    pub total_power: f64,
    /// True when the budget was too small for any antenna to switch on.
    pub all_zero: bool,
    /// True when every antenna sits at lambda_r_max.
    pub saturated: bool,
}

impl PowerAllocation {
    /// Objective value `sum log2(1 + lambda^2 / (lambda^2 + 1))`.
    pub fn objective(&self) -> f64 {
        objective(&self.lambda_r_opt)
    }
}

pub(crate) fn objective(lambda: &[f64]) -> f64 {
    lambda
        .iter()
        .map(|&l| {
            let t = l * l;
            (1.0 + t / (t + 1.0)).log2()
        })
        .sum()
}

fn power_of(f: &[f64], lambda: &[f64]) -> f64 {
    2.0 * f
        .iter()
        .zip(lambda)
        .map(|(&fl, &l)| fl * l * l)
        .sum::<f64>()
}

fn clamped_levels(f: &[f64], alpha1: f64, lambda_max: f64) -> Vec<f64> {
    f.iter()
        .map(|&fl| {
            let l = lambda_interior(alpha1, fl, RootFormula::Stationarity);
            l.clamp(0.0, lambda_max)
        })
        .collect()
}

/// Per-antenna power constants from the left singular vectors and singular
/// values of the relay-to-user channel.
pub fn power_constants(u2: &ComplexMatrix, sigma2: &[f64]) -> Vec<f64> {
    (0..u2.rows())
        .map(|l| {
            (0..sigma2.len())
                .map(|n| u2[(l, n)].norm_sqr() / (sigma2[n] * sigma2[n]))
                .sum()
        })
        .collect()
}

const BRACKET_LO: f64 = 1e-12;
const BRACKET_HI: f64 = 1e12;
const MAX_BISECT: usize = 200;

/// Water-filling style relay power allocation.
///
/// Maximizes `sum log2(1 + lambda^2/(lambda^2+1))` subject to
/// `2 sum F_l lambda_l^2 <= p_r_max` and `0 <= lambda_l <= lambda_r_max`.
/// The total power is strictly decreasing in the multiplier `alpha1`, so a
/// bisection pins it down exactly; each trial evaluates the closed-form
/// interior root clamped to the box.
pub fn optimal_relay_power(
    u2: &ComplexMatrix,
    sigma2: &[f64],
    p_r_max: f64,
    lambda_r_max: f64,
) -> Result<PowerAllocation> {
    if p_r_max <= 0.0 {
        return Err(SimError::Domain("p_r_max must be positive".into()));
    }
    if lambda_r_max <= 0.0 {
        return Err(SimError::Domain("lambda_r_max must be positive".into()));
    }
    if sigma2.iter().any(|&s| s <= 0.0) {
        return Err(SimError::Domain(
            "singular values must be positive for the power constants".into(),
        ));
    }
    let f = power_constants(u2, sigma2);
    let k = f.len();

    // Whole box feasible: every antenna takes the cap and the power
    // constraint is slack, so its multiplier is zero.
    let cap_levels = vec![lambda_r_max; k];
    if power_of(&f, &cap_levels) <= p_r_max {
        let total = power_of(&f, &cap_levels);
        return Ok(PowerAllocation {
            lambda_r_opt: cap_levels,
            alpha1: 0.0,
            f_constants: f,
            total_power: total,
            all_zero: false,
            saturated: true,
        });
    }

    let mut lo = BRACKET_LO;
    let mut hi = BRACKET_HI;
    let mut lambda = clamped_levels(&f, hi, lambda_r_max);
    if power_of(&f, &lambda) > p_r_max {
        return Err(SimError::Numerical(
            "relay power bisection bracket exhausted at the upper end".into(),
        ));
    }
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        lambda = clamped_levels(&f, mid, lambda_r_max);
        let p = power_of(&f, &lambda);
        if ((p - p_r_max) / p_r_max).abs() < 1e-10 {
            lo = mid;
            break;
        }
        if p > p_r_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha1 = lo;
    lambda = clamped_levels(&f, alpha1, lambda_r_max);
    let mut total = power_of(&f, &lambda);
    if total > p_r_max {
        // The multiplier's floating-point resolution can leave a residual
        // overshoot (severe only for vanishing budgets); project back onto
        // the constraint.
        let shrink = (p_r_max / total).sqrt();
        for l in &mut lambda {
            *l *= shrink;
        }
        total = power_of(&f, &lambda);
    }
    let all_zero = lambda.iter().all(|&l| l < 1e-12);
    let saturated = lambda.iter().all(|&l| (l - lambda_r_max).abs() < 1e-12);
    Ok(PowerAllocation {
        lambda_r_opt: lambda,
        alpha1,
        f_constants: f,
        total_power: total,
        all_zero,
        saturated,
    })
}
