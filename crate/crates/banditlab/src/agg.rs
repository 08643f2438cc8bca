//! Model-selection aggregation over a finite dictionary of prediction
//! functions: the progressive mixture rule (PM), the progressive indirect
//! mixture rule (PIM), the empirical star estimator and the
//! sequential-to-batch conversion.
//!
//! A prediction function is identified by its evaluations: the dictionary
//! stores `G[i][j] = g_j(X_i)` on the sample, and predictors consume the
//! vector `(g_1(x), …, g_d(x))` at a query point.

use rand::Rng;
use thiserror::Error;

/// Grid resolution of the PIM feasible-set computation.
const PIM_GRID: usize = 1001;
/// Bisection refinements of the binding grid cells.
const PIM_REFINE: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum AggError {
    #[error("dictionary needs at least one function")]
    EmptyDictionary,
    #[error("evaluation row {row} has {got} entries, expected {expected}")]
    RaggedEvaluations {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("output count {outputs} does not match evaluation rows {rows}")]
    LengthMismatch { outputs: usize, rows: usize },
    #[error("|{0}| exceeds the declared bound")]
    BoundViolated(f64),
    #[error("PIM feasible set is empty at sample index {0}")]
    Fail(usize),
}

/// Evaluation matrix of `d` reference functions on `n` sample points, with
/// outputs and the uniform bound `B` on outputs and function values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    d: usize,
    evals: Vec<Vec<f64>>,
    outputs: Vec<f64>,
    bound: f64,
}

impl Dictionary {
    pub fn new(
        d: usize,
        evals: Vec<Vec<f64>>,
        outputs: Vec<f64>,
        bound: f64,
    ) -> Result<Self, AggError> {
        if d == 0 {
            return Err(AggError::EmptyDictionary);
        }
        if evals.len() != outputs.len() {
            return Err(AggError::LengthMismatch {
                outputs: outputs.len(),
                rows: evals.len(),
            });
        }
        for (row, r) in evals.iter().enumerate() {
            if r.len() != d {
                return Err(AggError::RaggedEvaluations {
                    row,
                    got: r.len(),
                    expected: d,
                });
            }
            for &v in r {
                if v.abs() > bound + 1e-12 {
                    return Err(AggError::BoundViolated(v));
                }
            }
        }
        for &y in &outputs {
            if y.abs() > bound + 1e-12 {
                return Err(AggError::BoundViolated(y));
            }
        }
        Ok(Dictionary {
            d,
            evals,
            outputs,
            bound,
        })
    }

    /// Dictionary of `d` constant functions, evaluated trivially.
    pub fn of_constants(values: &[f64], outputs: Vec<f64>, bound: f64) -> Result<Self, AggError> {
        let evals = outputs.iter().map(|_| values.to_vec()).collect();
        Dictionary::new(values.len(), evals, outputs, bound)
    }

    /// Parses `y, g_1(x), …, g_d(x)` rows.
    pub fn from_csv(text: &str, bound: f64) -> Result<Self, AggError> {
        let mut evals = Vec::new();
        let mut outputs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| AggError::EmptyDictionary)
                })
                .collect::<Result<_, _>>()?;
            if fields.len() < 2 {
                return Err(AggError::EmptyDictionary);
            }
            outputs.push(fields[0]);
            evals.push(fields[1..].to_vec());
        }
        let d = evals.first().map(|r| r.len()).unwrap_or(0);
        Dictionary::new(d, evals, outputs, bound)
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn evals(&self) -> &[Vec<f64>] {
        &self.evals
    }

    /// Empirical risk `r(g_j) = (1/n) Σ_i (Y_i − g_j(X_i))²`.
    pub fn empirical_risk(&self, j: usize) -> f64 {
        let n = self.len().max(1);
        self.evals
            .iter()
            .zip(&self.outputs)
            .map(|(row, &y)| (y - row[j]).powi(2))
            .sum::<f64>()
            / n as f64
    }

    /// Cumulative losses `Σ_i(g_j)` after each prefix `i = 0..=n`, per
    /// function: entry `[i][j]` is the loss of `g_j` on the first `i` pairs.
    fn cumulative_losses(&self) -> Vec<Vec<f64>> {
        let d = self.dimension();
        let mut table = Vec::with_capacity(self.len() + 1);
        let mut acc = vec![0.0; d];
        table.push(acc.clone());
        for (row, &y) in self.evals.iter().zip(&self.outputs) {
            for (j, a) in acc.iter_mut().enumerate() {
                *a += (y - row[j]).powi(2);
            }
            table.push(acc.clone());
        }
        table
    }
}

/// Gibbs weights `w_j ∝ exp(−λ Σ(g_j))` under the uniform prior, computed
/// with a max shift (λΣ can reach the order of λ·4n).
pub fn gibbs_weights(lambda: f64, cumulative_losses: &[f64]) -> Vec<f64> {
    let min = cumulative_losses
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = cumulative_losses
        .iter()
        .map(|&l| (-lambda * (l - min)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
    w
}

fn warn_lambda(dict: &Dictionary, lambda: f64) {
    let cap = 1.0 / (8.0 * dict.bound() * dict.bound());
    if lambda > cap + 1e-12 {
        log::warn!("PM guarantee needs lambda <= 1/(8B^2) = {cap}, got {lambda}");
    }
}

/// Progressive mixture prediction at a query point:
/// `(1/(n+1)) Σ_{i=0}^n Σ_j g_j(x) w_j^{(i)}` with Gibbs weights over the
/// cumulative losses of each prefix (`Σ_0 ≡ 0`).
pub fn pm_predict(dict: &Dictionary, lambda: f64, query_evals: &[f64]) -> f64 {
    warn_lambda(dict, lambda);
    let prefixes = dict.cumulative_losses();
    let mut total = 0.0;
    for losses in &prefixes {
        let w = gibbs_weights(lambda, losses);
        total += w
            .iter()
            .zip(query_evals)
            .map(|(wj, gj)| wj * gj)
            .sum::<f64>();
    }
    total / prefixes.len() as f64
}

/// Generalized posterior loss `A(y) = −(1/λ) log Σ_j w_j exp(−λ (y−v_j)²)`
/// for posterior weights `w` over predicted values `v`.
fn pim_a(lambda: f64, weights: &[f64], values: &[f64], y: f64) -> f64 {
    // max-shifted log-sum-exp over −λ(y − v_j)²
    let terms: Vec<f64> = values.iter().map(|&v| -lambda * (y - v).powi(2)).collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = weights
        .iter()
        .zip(&terms)
        .map(|(&w, &t)| w * (t - max).exp())
        .sum();
    -(max + sum.ln()) / lambda
}

/// Feasible interval `∩_{y ∈ [−B, B]} [y − √A(y), y + √A(y)]` for one
/// posterior, or `None` when empty. The grid argmax/argmin cells are refined
/// by bisection on the interval endpoints.
fn pim_feasible_interval(
    lambda: f64,
    weights: &[f64],
    values: &[f64],
    bound: f64,
) -> Option<(f64, f64)> {
    let a = |y: f64| pim_a(lambda, weights, values, y);
    let low_end = |y: f64| y - a(y).max(0.0).sqrt();
    let high_end = |y: f64| y + a(y).max(0.0).sqrt();

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut lo_at = -bound;
    let mut hi_at = -bound;
    for idx in 0..PIM_GRID {
        let y = -bound + 2.0 * bound * idx as f64 / (PIM_GRID - 1) as f64;
        let l = low_end(y);
        let h = high_end(y);
        if l > lo {
            lo = l;
            lo_at = y;
        }
        if h < hi {
            hi = h;
            hi_at = y;
        }
    }
    // refine the binding y's inside their neighboring grid cells
    let cell = 2.0 * bound / (PIM_GRID - 1) as f64;
    lo = refine_extremum(&low_end, lo_at, cell, bound, true).max(lo);
    hi = refine_extremum(&high_end, hi_at, cell, bound, false).min(hi);
    if lo <= hi + 1e-12 {
        Some((lo.min(hi), hi.max(lo)))
    } else {
        None
    }
}

/// Ternary-search refinement of `f` around `center ± cell`, maximizing when
/// `maximize` and minimizing otherwise.
fn refine_extremum<F: Fn(f64) -> f64>(
    f: &F,
    center: f64,
    cell: f64,
    bound: f64,
    maximize: bool,
) -> f64 {
    let mut a = (center - cell).max(-bound);
    let mut b = (center + cell).min(bound);
    for _ in 0..PIM_REFINE {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        let better = if maximize {
            f(m1) > f(m2)
        } else {
            f(m1) < f(m2)
        };
        if better {
            b = m2;
        } else {
            a = m1;
        }
    }
    f(0.5 * (a + b))
}

/// Progressive indirect mixture prediction at a query point: the mean over
/// prefixes of the feasible-interval midpoints. Fails when some prefix has an
/// empty feasible set.
pub fn pim_predict(dict: &Dictionary, lambda: f64, query_evals: &[f64]) -> Result<f64, AggError> {
    let prefixes = dict.cumulative_losses();
    let bound = dict.bound();
    let mut total = 0.0;
    for (i, losses) in prefixes.iter().enumerate() {
        let w = gibbs_weights(lambda, losses);
        let (lo, hi) =
            pim_feasible_interval(lambda, &w, query_evals, bound).ok_or(AggError::Fail(i))?;
        total += 0.5 * (lo + hi);
    }
    Ok(total / prefixes.len() as f64)
}

/// The empirical star predictor: the convex combination
/// `α g_{j*} + (1−α) g_{k*}` minimizing the empirical risk over all segments
/// joining the empirical risk minimizer `g_{j*}` to every other function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarPredictor {
    /// Empirical risk minimizer index `j*`.
    pub base: usize,
    /// Partner index `k*`.
    pub partner: usize,
    /// Weight of the base function.
    pub alpha: f64,
    /// Empirical risk attained.
    pub risk: f64,
}

impl StarPredictor {
    pub fn predict(&self, query_evals: &[f64]) -> f64 {
        self.alpha * query_evals[self.base] + (1.0 - self.alpha) * query_evals[self.partner]
    }
}

/// Fits the empirical star estimator. Needs no knowledge of the bound `B`.
pub fn empirical_star(dict: &Dictionary) -> Result<StarPredictor, AggError> {
    let d = dict.dimension();
    if d == 0 {
        return Err(AggError::EmptyDictionary);
    }
    let risks: Vec<f64> = (0..d).map(|j| dict.empirical_risk(j)).collect();
    let mut erm = 0;
    for j in 1..d {
        if risks[j] < risks[erm] {
            erm = j;
        }
    }
    let n = dict.len().max(1) as f64;
    let mut best = StarPredictor {
        base: erm,
        partner: erm,
        alpha: 1.0,
        risk: risks[erm],
    };
    for k in 0..d {
        if k == erm {
            continue;
        }
        // r(α u + (1−α) v) is quadratic in α: minimize in closed form.
        let mut num = 0.0;
        let mut den = 0.0;
        for (row, &y) in dict.evals().iter().zip(dict.outputs()) {
            let u = row[erm];
            let v = row[k];
            num += (y - v) * (u - v);
            den += (u - v) * (u - v);
        }
        // degenerate segment: g_{j*} and g_k agree on the sample
        let alpha = if den == 0.0 {
            1.0
        } else {
            (num / den).clamp(0.0, 1.0)
        };
        let mut risk = 0.0;
        for (row, &y) in dict.evals().iter().zip(dict.outputs()) {
            let p = alpha * row[erm] + (1.0 - alpha) * row[k];
            risk += (y - p).powi(2);
        }
        risk /= n;
        if risk < best.risk {
            best = StarPredictor {
                base: erm,
                partner: k,
                alpha,
                risk,
            };
        }
    }
    Ok(best)
}

/// How a sequential learner becomes a batch predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchifyMode {
    /// Train on a uniformly drawn prefix `Z_1^i`, `i ∈ {0..n}`.
    UniformPrefixDraw,
    /// Average the `n + 1` prefix predictions (for convex losses).
    CesaroAverage,
}

/// Converts the prefix-trained predictors of a sequential algorithm into a
/// single batch predictor. `fit_prefix(i)` must return the predictor trained
/// on the first `i` sample points.
pub fn batchify<P, F, R>(
    fit_prefix: F,
    n: usize,
    mode: BatchifyMode,
    rng: &mut R,
) -> Box<dyn Fn(&[f64]) -> f64>
where
    F: Fn(usize) -> P,
    P: Fn(&[f64]) -> f64 + 'static,
    R: Rng + ?Sized,
{
    match mode {
        BatchifyMode::UniformPrefixDraw => {
            let i = rng.gen_range(0..=n);
            let predictor = fit_prefix(i);
            Box::new(move |x| predictor(x))
        }
        BatchifyMode::CesaroAverage => {
            let predictors: Vec<P> = (0..=n).map(fit_prefix).collect();
            Box::new(move |x| {
                predictors.iter().map(|p| p(x)).sum::<f64>() / predictors.len() as f64
            })
        }
    }
}

/// A prefix view of a dictionary: the first `i` sample points.
pub fn prefix_dictionary(dict: &Dictionary, i: usize) -> Dictionary {
    Dictionary {
        d: dict.d,
        evals: dict.evals[..i].to_vec(),
        outputs: dict.outputs[..i].to_vec(),
        bound: dict.bound,
    }
}
