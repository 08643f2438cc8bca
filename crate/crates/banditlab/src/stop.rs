//! Adaptive stopping and racing built on the empirical Bernstein bound.
//!
//! [`ebgstop`] samples an unknown distribution until its mean is known to a
//! relative error `δ` with probability at least `1 − ε`, using a geometric
//! time grid. [`race`] eliminates options whose confidence interval falls
//! below another option's.

use crate::bounds::{bernstein_radius_with_ell, clamp_variance, hoeffding_radius};
use crate::env::{ArmModel, ArmStatistics};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StopError {
    #[error("sample {value} outside the declared support [{low}, {high}]")]
    SampleOutOfSupport { value: f64, low: f64, high: f64 },
    #[error("stream ended after {0} samples before the stopping rule fired")]
    StreamExhausted(u64),
    #[error("no stop within the {0}-sample cutoff (is the mean zero?)")]
    MaxSamplesExceeded(u64),
    #[error("invalid config: {0}")]
    BadConfig(&'static str),
}

/// Parameters of the geometric-grid stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    /// Relative error target.
    pub delta: f64,
    /// Failure probability.
    pub eps: f64,
    /// Grid exponent `q > 0`.
    pub q: f64,
    /// First grid point `t_1 >= 1`.
    pub t1: u64,
    /// Grid ratio `α > 1`; `t_k = ceil(α t_{k-1})`.
    pub alpha: f64,
    /// Left end of the width-one support `[a, a+1]` the data must lie in.
    pub support_shift: f64,
    /// Hard cutoff; a zero-mean stream never stops on its own.
    pub max_samples: Option<u64>,
}

impl StoppingConfig {
    /// Default grid parameters: `q = 0.1`, `t_1 = 20`, `α = 1.1`.
    pub fn new(delta: f64, eps: f64) -> Self {
        StoppingConfig {
            delta,
            eps,
            q: 0.1,
            t1: 20,
            alpha: 1.1,
            support_shift: 0.0,
            max_samples: None,
        }
    }

    /// Union-bound constant `c = 3 / (ε t_1^q (1 − α^{−q}))`.
    pub fn union_constant(&self) -> f64 {
        3.0 / (self.eps * (self.t1 as f64).powf(self.q) * (1.0 - self.alpha.powf(-self.q)))
    }

    fn validate(&self) -> Result<(), StopError> {
        if !(self.delta > 0.0) {
            return Err(StopError::BadConfig("delta must be positive"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(StopError::BadConfig("eps must be in (0, 1)"));
        }
        if !(self.q > 0.0) {
            return Err(StopError::BadConfig("q must be positive"));
        }
        if self.t1 < 1 {
            return Err(StopError::BadConfig("t1 must be at least 1"));
        }
        if !(self.alpha > 1.0) {
            return Err(StopError::BadConfig("alpha must exceed 1"));
        }
        Ok(())
    }
}

/// One row of the confidence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub mean: f64,
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Result of a stopped run.
#[derive(Debug, Clone)]
pub struct EbgOutcome {
    /// Mean estimate `sign(X̄_T) ((1+δ)LB + (1−δ)UB) / 2`.
    pub estimate: f64,
    /// Number of samples consumed.
    pub stopping_time: u64,
    /// Present when `record_trace` was requested.
    pub trace: Vec<TraceRow>,
}

/// Runs the stopping rule against `next`, which yields samples until the
/// stream is exhausted. Guarantees `P(|μ̂ − μ| <= δ|μ|) >= 1 − ε` for i.i.d.
/// samples supported on `[a, a+1]`.
///
/// The loop keeps sampling while `(1+δ)LB < (1−δ)UB`: LB and UB start at 0
/// and `+∞`, rise and fall monotonically, and the first time the guard fails
/// the estimate is returned.
pub fn ebgstop<F>(
    mut next: F,
    cfg: &StoppingConfig,
    record_trace: bool,
) -> Result<EbgOutcome, StopError>
where
    F: FnMut() -> Option<f64>,
{
    cfg.validate()?;
    let c = cfg.union_constant();
    let (low, high) = (cfg.support_shift, cfg.support_shift + 1.0);
    let mut stats = ArmStatistics::new();
    let mut lb = 0.0f64;
    let mut ub = f64::INFINITY;
    let mut trace = Vec::new();

    let mut draw = |stats: &mut ArmStatistics| -> Result<(), StopError> {
        let t = stats.pulls();
        let value = next().ok_or(StopError::StreamExhausted(t))?;
        if value < low - 1e-12 || value > high + 1e-12 {
            return Err(StopError::SampleOutOfSupport { value, low, high });
        }
        stats.push(value);
        Ok(())
    };

    // warm-up: t = 1 .. t1 - 1
    for _ in 1..cfg.t1 {
        draw(&mut stats)?;
    }

    let mut t_k = cfg.t1;
    loop {
        let t_next = ((cfg.alpha * t_k as f64).ceil() as u64).max(t_k + 1);
        let log_term = (c * (t_k as f64).powf(cfg.q)).ln();
        for t in t_k..t_next {
            if let Some(cap) = cfg.max_samples {
                if t > cap {
                    return Err(StopError::MaxSamplesExceeded(cap));
                }
            }
            draw(&mut stats)?;
            debug_assert_eq!(stats.pulls(), t);
            let mean = stats.mean();
            let var = clamp_variance(stats.variance())
                .map_err(|_| StopError::BadConfig("variance outside [0, 1/4]"))?;
            let ell = t_next as f64 / (t as f64 * t as f64) * log_term;
            let radius = bernstein_radius_with_ell(ell, var);
            lb = lb.max(mean.abs() - radius);
            ub = ub.min(mean.abs() + radius);
            if record_trace {
                trace.push(TraceRow {
                    t,
                    mean,
                    radius,
                    lower: lb,
                    upper: ub,
                });
            }
            if (1.0 + cfg.delta) * lb >= (1.0 - cfg.delta) * ub {
                let estimate =
                    mean.signum() * ((1.0 + cfg.delta) * lb + (1.0 - cfg.delta) * ub) / 2.0;
                return Ok(EbgOutcome {
                    estimate,
                    stopping_time: t,
                    trace,
                });
            }
        }
        t_k = t_next;
    }
}

/// Convenience wrapper: stop on a synthetic arm model.
pub fn ebgstop_model<R: Rng + ?Sized>(
    model: &ArmModel,
    cfg: &StoppingConfig,
    rng: &mut R,
) -> Result<EbgOutcome, StopError> {
    ebgstop(|| Some(model.sample(rng)), cfg, false)
}

/// Confidence-radius family used by the race.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaceRadius {
    Hoeffding,
    EmpiricalBernstein,
}

/// Race outcome: the surviving option set and the sampling effort.
#[derive(Debug, Clone)]
pub struct RaceOutcome {
    pub survivors: Vec<usize>,
    pub samples_used: u64,
    /// `1 − samples / (K n)`.
    pub work_saved: f64,
}

/// Races `options` with per-option budget `n`: round-robin over survivors,
/// recomputing per-option confidence intervals at level `ε/(nK)` after each
/// sample and discarding options whose upper bound falls below another's
/// lower bound. Stops at one survivor or when the budget is exhausted.
pub fn race<R: Rng + ?Sized>(
    options: &[ArmModel],
    eps: f64,
    n: u64,
    radius: RaceRadius,
    rng: &mut R,
) -> RaceOutcome {
    let k = options.len();
    assert!(k >= 2, "race needs at least two options");
    let per_test = eps / (n as f64 * k as f64);
    let mut stats = vec![ArmStatistics::new(); k];
    let mut alive = vec![true; k];
    let mut alive_count = k;
    let mut samples = 0u64;

    let ci = |st: &ArmStatistics| -> (f64, f64) {
        let r = match radius {
            RaceRadius::Hoeffding => hoeffding_radius(st.pulls(), per_test),
            RaceRadius::EmpiricalBernstein => {
                if st.pulls() == 0 {
                    f64::INFINITY
                } else {
                    let var = clamp_variance(st.variance()).unwrap_or(0.25);
                    let ell = (3.0 / per_test).ln() / st.pulls() as f64;
                    bernstein_radius_with_ell(ell, var)
                }
            }
        };
        (st.mean() - r, st.mean() + r)
    };

    'outer: loop {
        for i in 0..k {
            if !alive[i] || alive_count == 1 {
                continue;
            }
            if stats[i].pulls() >= n {
                // every survivor reaches the budget in the same sweep
                break 'outer;
            }
            stats[i].push(options[i].sample(rng));
            samples += 1;

            let intervals: Vec<(usize, (f64, f64))> = (0..k)
                .filter(|&j| alive[j])
                .map(|j| (j, ci(&stats[j])))
                .collect();
            let best_lower = intervals
                .iter()
                .map(|&(_, (lo, _))| lo)
                .fold(f64::NEG_INFINITY, f64::max);
            for &(j, (_, up)) in &intervals {
                if up < best_lower {
                    alive[j] = false;
                    alive_count -= 1;
                }
            }
        }
        if alive_count == 1 {
            break;
        }
        if (0..k).filter(|&i| alive[i]).all(|i| stats[i].pulls() >= n) {
            break;
        }
    }

    RaceOutcome {
        survivors: (0..k).filter(|&i| alive[i]).collect(),
        samples_used: samples,
        work_saved: 1.0 - samples as f64 / (k as f64 * n as f64),
    }
}
