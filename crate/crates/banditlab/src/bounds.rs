//! Confidence radii: Hoeffding, the empirical Bernstein maximal inequality
//! (tight and simplified forms), the empirical variance upper bound and the
//! Maurer–Pontil refinement.
//!
//! All radii are pure functions of the sample count, the horizon, the
//! confidence parameter and the empirical moments; callers own the
//! statistics.

use thiserror::Error;

/// Variance slack tolerated before `V̄ > 1/4` is treated as a caller bug.
/// Running-sum variance can overshoot the true range by a few ulps.
const VAR_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("empirical variance {0} outside [0, 1/4] for [0,1]-valued data")]
    VarianceOutOfRange(f64),
    #[error("confidence parameter {0} outside (0, 1)")]
    ConfidenceOutOfRange(f64),
    #[error("sample count {got} below required minimum {min}")]
    SampleCountTooSmall { got: u64, min: u64 },
    #[error("query requires 1 <= t <= n, got t={t}, n={n}")]
    BadTimeIndices { t: u64, n: u64 },
}

/// Inputs of the uniform-over-time empirical Bernstein bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceQuery {
    /// Current sample count, `1 <= t <= n`.
    pub t: u64,
    /// Horizon over which the bound must hold uniformly.
    pub n: u64,
    /// Failure probability in `(0, 1)`.
    pub eps: f64,
    /// Empirical mean `X̄_t`.
    pub mean: f64,
    /// Empirical variance `V̄_t`, in `[0, 1/4]` after clamping.
    pub var: f64,
}

impl ConfidenceQuery {
    pub fn new(t: u64, n: u64, eps: f64, mean: f64, var: f64) -> Result<Self, BoundsError> {
        if t < 1 || t > n {
            return Err(BoundsError::BadTimeIndices { t, n });
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(BoundsError::ConfidenceOutOfRange(eps));
        }
        let var = clamp_variance(var)?;
        Ok(ConfidenceQuery {
            t,
            n,
            eps,
            mean,
            var,
        })
    }

    /// `ℓ_t = n log(2/ε) / t²` (one-sided form).
    pub fn ell(&self) -> f64 {
        self.n as f64 * (2.0 / self.eps).ln() / (self.t as f64 * self.t as f64)
    }

    /// `ℓ̃_t = n log(3/ε) / t²` (two-sided form).
    pub fn ell_twosided(&self) -> f64 {
        self.n as f64 * (3.0 / self.eps).ln() / (self.t as f64 * self.t as f64)
    }
}

/// Clamps float noise above `1/4` (or below `0`) back into range; larger
/// excursions signal a caller bug and are rejected.
pub fn clamp_variance(var: f64) -> Result<f64, BoundsError> {
    if var > 0.25 {
        if var <= 0.25 + VAR_SLACK {
            return Ok(0.25);
        }
        return Err(BoundsError::VarianceOutOfRange(var));
    }
    if var < 0.0 {
        if var >= -VAR_SLACK {
            return Ok(0.0);
        }
        return Err(BoundsError::VarianceOutOfRange(var));
    }
    Ok(var)
}

/// Hoeffding radius `sqrt(log(1/ε) / (2s))`; `s = 0` returns `+∞` so that an
/// unexplored option always looks best.
pub fn hoeffding_radius(s: u64, eps: f64) -> f64 {
    if s == 0 {
        return f64::INFINITY;
    }
    ((1.0 / eps).ln() / (2.0 * s as f64)).sqrt()
}

/// Radius `min( sqrt(2ℓ(V̄+ℓ)) + ℓ(1/3 + sqrt(1−3V̄)), sqrt(ℓ/2) )` shared by
/// both maximal-inequality forms and by the stopping rule's inner loop.
///
/// `var` must already be in `[0, 1/4]`.
pub fn bernstein_radius_with_ell(ell: f64, var: f64) -> f64 {
    debug_assert!((0.0..=0.25).contains(&var));
    let tight = (2.0 * ell * (var + ell)).sqrt() + ell * (1.0 / 3.0 + (1.0 - 3.0 * var).sqrt());
    tight.min((ell / 2.0).sqrt())
}

/// One-sided empirical Bernstein radius (the `ℓ_t` form).
pub fn emp_bernstein_radius_onesided(q: &ConfidenceQuery) -> f64 {
    bernstein_radius_with_ell(q.ell(), q.var)
}

/// Two-sided empirical Bernstein radius (the `ℓ̃_t` form).
pub fn emp_bernstein_radius_twosided(q: &ConfidenceQuery) -> f64 {
    bernstein_radius_with_ell(q.ell_twosided(), q.var)
}

/// The simplified (looser) two-sided radius
/// `sqrt(2n V̄ log(3/ε)/t²) + 3n log(3/ε)/t²`.
pub fn emp_bernstein_radius_simplified(q: &ConfidenceQuery) -> f64 {
    let l = q.ell_twosided();
    (2.0 * q.var * l).sqrt() + 3.0 * l
}

/// Upper confidence bound on the true variance, holding uniformly over
/// `t <= n` with probability at least `1 − ε`.
pub fn emp_variance_upper_bound(q: &ConfidenceQuery) -> f64 {
    let l = q.ell_twosided();
    let root = (q.var + l).sqrt() + (l / 2.0 * (1.0 - 3.0 * q.var)).sqrt();
    root * root
}

/// Maurer–Pontil radius at fixed `t >= 2` from the unbiased variance
/// estimate `V̄'_t = t/(t−1) V̄_t`.
pub fn maurer_pontil_radius(t: u64, eps: f64, unbiased_var: f64) -> Result<f64, BoundsError> {
    if t < 2 {
        return Err(BoundsError::SampleCountTooSmall { got: t, min: 2 });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(BoundsError::ConfidenceOutOfRange(eps));
    }
    let l = (3.0 / eps).ln();
    let t = t as f64;
    Ok((2.0 * l / t * (unbiased_var + l / (2.0 * (t - 1.0)))).sqrt() + 4.0 * l / (3.0 * (t - 1.0)))
}

/// Bound `V(1 − 3V)` on the fourth central moment of a `[0,1]`-valued
/// variable with variance `V`; an equality for Bernoulli distributions.
pub fn fourth_moment_bound(var: f64) -> f64 {
    debug_assert!((0.0..=0.25).contains(&var));
    var * (1.0 - 3.0 * var)
}
