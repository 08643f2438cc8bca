//! Adversarial prediction: the implicitly normalized forecaster (INF) with
//! exponential and polynomial potentials, the EXP3 family, label-efficient
//! and high-probability estimators, and switching-regret accounting.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Residual tolerance of the normalization equation `Σ ψ(x_i − C) = 1`.
const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum AdvError {
    #[error("psi parameters invalid: {0}")]
    BadPsi(&'static str),
    #[error("normalization root not bracketed; psi violates its conditions")]
    RootNotBracketed,
    #[error("estimator {estimator} expects {expected} reward feedback")]
    FeedbackMismatch {
        estimator: &'static str,
        expected: &'static str,
    },
    #[error("reward {0} outside [0, 1]")]
    RewardOutOfRange(f64),
}

/// Potential `ψ: (−∞, 0) → (0, ∞)`, increasing, with `ψ'/ψ` nondecreasing,
/// `lim_{u→−∞} ψ(u) < 1/K` and `lim_{u→0⁻} ψ(u) >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PsiFunction {
    /// `ψ(u) = exp(η u) + γ/K`; recovers exponentially weighted forecasters.
    Exponential { eta: f64, gamma: f64, k: usize },
    /// `ψ(u) = (η/(−u))^q + γ/K` with `q > 1`.
    Polynomial {
        eta: f64,
        q: f64,
        gamma: f64,
        k: usize,
    },
}

impl PsiFunction {
    pub fn exponential(eta: f64, gamma: f64, k: usize) -> Result<Self, AdvError> {
        if !(eta > 0.0) {
            return Err(AdvError::BadPsi("eta must be positive"));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(AdvError::BadPsi("gamma must lie in [0, 1)"));
        }
        Ok(PsiFunction::Exponential { eta, gamma, k })
    }

    pub fn polynomial(eta: f64, q: f64, gamma: f64, k: usize) -> Result<Self, AdvError> {
        if !(eta > 0.0) {
            return Err(AdvError::BadPsi("eta must be positive"));
        }
        if !(q > 1.0) {
            return Err(AdvError::BadPsi("q must exceed 1"));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(AdvError::BadPsi("gamma must lie in [0, 1)"));
        }
        Ok(PsiFunction::Polynomial { eta, q, gamma, k })
    }

    pub fn arms(&self) -> usize {
        match *self {
            PsiFunction::Exponential { k, .. } | PsiFunction::Polynomial { k, .. } => k,
        }
    }

    /// `ψ(u)` for `u < 0`.
    pub fn eval(&self, u: f64) -> f64 {
        debug_assert!(u < 0.0);
        match *self {
            PsiFunction::Exponential { eta, gamma, k } => (eta * u).exp() + gamma / k as f64,
            PsiFunction::Polynomial { eta, q, gamma, k } => (eta / -u).powf(q) + gamma / k as f64,
        }
    }

    /// `ψ'(u)` for `u < 0`.
    pub fn derivative(&self, u: f64) -> f64 {
        debug_assert!(u < 0.0);
        match *self {
            PsiFunction::Exponential { eta, .. } => eta * (eta * u).exp(),
            PsiFunction::Polynomial { eta, q, .. } => q * eta.powf(q) * (-u).powf(-q - 1.0),
        }
    }

    /// Closed-form inverse on the range of `ψ`; `p` must exceed the floor
    /// `γ/K`.
    pub fn inverse(&self, p: f64) -> f64 {
        match *self {
            PsiFunction::Exponential { eta, gamma, k } => (p - gamma / k as f64).ln() / eta,
            PsiFunction::Polynomial { eta, q, gamma, k } => {
                -eta * (p - gamma / k as f64).powf(-1.0 / q)
            }
        }
    }
}

/// The constant `C(x)` solving `Σ_i ψ(x_i − C) = 1`, found inside the
/// bracket `max_i x_i < C <= max_i x_i − ψ^{-1}(1/K)`.
///
/// The exponential family has the closed form
/// `C = (1/η) log( Σ exp(η x_i) / (1 − γ) )`; the polynomial family is
/// solved by bisection followed by a Newton polish to `|Σψ − 1| <= 1e-12`.
pub fn normalization_constant(x: &[f64], psi: &PsiFunction) -> Result<f64, AdvError> {
    let k = x.len();
    debug_assert_eq!(k, psi.arms());
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    if let PsiFunction::Exponential { eta, gamma, .. } = *psi {
        let sum: f64 = x.iter().map(|&xi| (eta * (xi - max)).exp()).sum();
        return Ok(max + (sum / (1.0 - gamma)).ln() / eta);
    }

    let mut lo = max;
    let mut hi = max - psi.inverse(1.0 / k as f64);
    if !(hi > lo) {
        return Err(AdvError::RootNotBracketed);
    }
    let residual = |c: f64| -> f64 { x.iter().map(|&xi| psi.eval(xi - c)).sum::<f64>() - 1.0 };
    // Σψ(x_i − C) decreases strictly in C: residual >= 0 near lo, <= 0 at hi.
    if residual(hi) > 0.0 {
        return Err(AdvError::RootNotBracketed);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    let mut c = 0.5 * (lo + hi);
    for _ in 0..8 {
        let r = residual(c);
        if r.abs() <= NORM_TOL {
            break;
        }
        let slope: f64 = x.iter().map(|&xi| -psi.derivative(xi - c)).sum();
        let step = r / slope;
        let candidate = c - step;
        if candidate > max && candidate.is_finite() {
            c = candidate;
        } else {
            break;
        }
    }
    Ok(c)
}

/// How rewards are turned into gain estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorKind {
    /// `g̃_i = (g/p_i) 1{I = i}`.
    RewardMagnifying,
    /// `g̃_i = 1 − ((1−g)/p_i) 1{I = i}`.
    LossMagnifying,
    /// `g̃_i = (g/p_i) 1{I = i} + β/p_i`.
    Tracking { beta: f64 },
    /// `g̃_i = g(1 + β g/p_i)/p_i · 1{I = i}`.
    TightlyBiased { beta: f64 },
    /// Full-information game: `g̃_i = (g_i/δ) Z_t`, at most `budget` queries.
    LabelEfficient { delta: f64, budget: u64 },
    /// Bandit label-efficient game: `g̃_i = (g/p_i) 1{I = i} (Z_t/δ)`.
    LeBandit { delta: f64, budget: u64 },
}

impl EstimatorKind {
    /// Label-efficient estimator with the standard query rate `δ = 3m/(4n)`.
    pub fn label_efficient(m: u64, n: u64) -> Self {
        EstimatorKind::LabelEfficient {
            delta: 3.0 * m as f64 / (4.0 * n as f64),
            budget: m,
        }
    }

    pub fn le_bandit(m: u64, n: u64) -> Self {
        EstimatorKind::LeBandit {
            delta: 3.0 * m as f64 / (4.0 * n as f64),
            budget: m,
        }
    }

    /// Tightly biased estimator with the default bias `β = 1/sqrt(nK)`.
    pub fn tightly_biased_default(n: u64, k: usize) -> Self {
        EstimatorKind::TightlyBiased {
            beta: 1.0 / (n as f64 * k as f64).sqrt(),
        }
    }
}

/// Reward feedback for one round.
#[derive(Debug, Clone, Copy)]
pub enum RoundRewards<'a> {
    /// Only the drawn arm's reward (bandit feedback).
    Own(f64),
    /// The whole reward vector (full-information feedback).
    Full(&'a [f64]),
}

/// Cumulative gain estimates and the sampling distribution they induce.
#[derive(Debug, Clone)]
pub struct EstimatedGains {
    /// `G̃_i,t`.
    pub gains: Vec<f64>,
    /// `p_{t+1}`; uniform before the first update.
    pub probs: Vec<f64>,
    /// Last normalization constant `C_t`; `NaN` before the first update.
    pub norm_constant: f64,
}

impl EstimatedGains {
    fn new(k: usize) -> Self {
        EstimatedGains {
            gains: vec![0.0; k],
            probs: vec![1.0 / k as f64; k],
            norm_constant: f64::NAN,
        }
    }
}

/// The implicitly normalized forecaster.
#[derive(Debug, Clone)]
pub struct InfForecaster {
    psi: PsiFunction,
    estimator: EstimatorKind,
    state: EstimatedGains,
    queries_used: u64,
}

impl InfForecaster {
    pub fn new(psi: PsiFunction, estimator: EstimatorKind) -> Self {
        let k = psi.arms();
        InfForecaster {
            psi,
            estimator,
            state: EstimatedGains::new(k),
            queries_used: 0,
        }
    }

    pub fn arms(&self) -> usize {
        self.psi.arms()
    }

    pub fn psi(&self) -> &PsiFunction {
        &self.psi
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.state.probs
    }

    pub fn state(&self) -> &EstimatedGains {
        &self.state
    }

    pub fn queries_used(&self) -> u64 {
        self.queries_used
    }

    pub fn draw_arm<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_from(&self.state.probs, rng)
    }

    /// Steps the forecaster: builds the gain estimate for the round, folds it
    /// into `G̃`, recomputes `C` and the sampling distribution.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        drawn: usize,
        rewards: RoundRewards<'_>,
        rng: &mut R,
    ) -> Result<(), AdvError> {
        let estimate = build_estimate(
            self.estimator,
            drawn,
            rewards,
            &self.state.probs,
            &mut self.queries_used,
            rng,
        )?;
        for (g, e) in self.state.gains.iter_mut().zip(&estimate) {
            *g += e;
        }
        let c = normalization_constant(&self.state.gains, &self.psi)?;
        self.state.norm_constant = c;
        for (p, &g) in self.state.probs.iter_mut().zip(&self.state.gains) {
            *p = self.psi.eval(g - c);
        }
        Ok(())
    }
}

fn build_estimate<R: Rng + ?Sized>(
    estimator: EstimatorKind,
    drawn: usize,
    rewards: RoundRewards<'_>,
    probs: &[f64],
    queries_used: &mut u64,
    rng: &mut R,
) -> Result<Vec<f64>, AdvError> {
    let k = probs.len();
    let own = |r: &RoundRewards| -> Result<f64, AdvError> {
        let g = match *r {
            RoundRewards::Own(g) => g,
            RoundRewards::Full(v) => v[drawn],
        };
        if !(0.0..=1.0).contains(&g) {
            return Err(AdvError::RewardOutOfRange(g));
        }
        Ok(g)
    };
    let mut est = vec![0.0; k];
    match estimator {
        EstimatorKind::RewardMagnifying => {
            est[drawn] = own(&rewards)? / probs[drawn];
        }
        EstimatorKind::LossMagnifying => {
            let g = own(&rewards)?;
            for e in est.iter_mut() {
                *e = 1.0;
            }
            est[drawn] = 1.0 - (1.0 - g) / probs[drawn];
        }
        EstimatorKind::Tracking { beta } => {
            let g = own(&rewards)?;
            for (i, e) in est.iter_mut().enumerate() {
                *e = beta / probs[i];
            }
            est[drawn] += g / probs[drawn];
        }
        EstimatorKind::TightlyBiased { beta } => {
            let g = own(&rewards)?;
            est[drawn] = g * (1.0 + beta * g / probs[drawn]) / probs[drawn];
        }
        EstimatorKind::LabelEfficient { delta, budget } => {
            let full = match rewards {
                RoundRewards::Full(v) => v,
                RoundRewards::Own(_) => {
                    return Err(AdvError::FeedbackMismatch {
                        estimator: "label_efficient",
                        expected: "full-vector",
                    })
                }
            };
            // never query past the budget
            if *queries_used < budget && rng.gen::<f64>() < delta {
                *queries_used += 1;
                for (e, &g) in est.iter_mut().zip(full) {
                    *e = g / delta;
                }
            }
        }
        EstimatorKind::LeBandit { delta, budget } => {
            let g = own(&rewards)?;
            if *queries_used < budget && rng.gen::<f64>() < delta {
                *queries_used += 1;
                est[drawn] = g / (probs[drawn] * delta);
            }
        }
    }
    Ok(est)
}

/// EXP3: exponentially weighted averages with uniform exploration mixing.
#[derive(Debug, Clone)]
pub struct Exp3Forecaster {
    eta: f64,
    gamma: f64,
    estimator: EstimatorKind,
    gains: Vec<f64>,
    probs: Vec<f64>,
    constraint_ok: bool,
}

impl Exp3Forecaster {
    pub fn new(k: usize, eta: f64, gamma: f64, estimator: EstimatorKind) -> Self {
        // the regret guarantee requires 4ηK <= 5γ
        let constraint_ok = 4.0 * eta * k as f64 <= 5.0 * gamma + 1e-15;
        if !constraint_ok {
            log::warn!("EXP3 constraint 4ηK <= 5γ violated (eta={eta}, gamma={gamma}, K={k})");
        }
        Exp3Forecaster {
            eta,
            gamma,
            estimator,
            gains: vec![0.0; k],
            probs: vec![1.0 / k as f64; k],
            constraint_ok,
        }
    }

    /// Theorem defaults `η = sqrt(5 log K / (4nK))`,
    /// `γ = min(sqrt(4K log K / (5n)), 1)`.
    pub fn with_defaults(k: usize, n: u64, estimator: EstimatorKind) -> Self {
        let (eta, gamma) = exp3_defaults(k, n);
        Self::new(k, eta, gamma, estimator)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Whether `4ηK <= 5γ` held at construction.
    pub fn constraint_ok(&self) -> bool {
        self.constraint_ok
    }

    pub fn draw_arm<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_from(&self.probs, rng)
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        drawn: usize,
        rewards: RoundRewards<'_>,
        rng: &mut R,
    ) -> Result<(), AdvError> {
        let mut unused = 0;
        let estimate = build_estimate(
            self.estimator,
            drawn,
            rewards,
            &self.probs,
            &mut unused,
            rng,
        )?;
        for (g, e) in self.gains.iter_mut().zip(&estimate) {
            *g += e;
        }
        let k = self.gains.len() as f64;
        let max = self.gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = self
            .gains
            .iter()
            .map(|&g| (self.eta * (g - max)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        for (p, w) in self.probs.iter_mut().zip(&weights) {
            *p = self.gamma / k + (1.0 - self.gamma) * w / total;
        }
        Ok(())
    }
}

/// `(η, γ)` of the reward-magnifying EXP3 regret theorem.
pub fn exp3_defaults(k: usize, n: u64) -> (f64, f64) {
    let k = k as f64;
    let n = n as f64;
    let eta = (5.0 * k.ln() / (4.0 * n * k)).sqrt();
    let gamma = (4.0 * k * k.ln() / (5.0 * n)).sqrt().min(1.0);
    (eta, gamma)
}

/// Expected-regret bound `sqrt(16/5 · nK log K)` of the same theorem.
pub fn exp3_regret_bound(k: usize, n: u64) -> f64 {
    (16.0 / 5.0 * n as f64 * k as f64 * (k as f64).ln()).sqrt()
}

/// INF tuned for the bandit game: `ψ(x) = (3√n/(−x))² + 1/√(nK)` with
/// reward-magnifying estimates; satisfies `E R_n <= 11 sqrt(nK)`.
pub fn inf_bandit_default(n: u64, k: usize) -> Result<InfForecaster, AdvError> {
    let psi = psi_bandit_poly(n, k)?;
    Ok(InfForecaster::new(psi, EstimatorKind::RewardMagnifying))
}

/// High-probability variant: same `ψ`, estimates biased by
/// `β/p_i` with `β = 1/√(nK)`.
pub fn inf_bandit_high_prob(n: u64, k: usize) -> Result<InfForecaster, AdvError> {
    let psi = psi_bandit_poly(n, k)?;
    let beta = 1.0 / ((n as f64 * k as f64).sqrt());
    Ok(InfForecaster::new(psi, EstimatorKind::Tracking { beta }))
}

fn psi_bandit_poly(n: u64, k: usize) -> Result<PsiFunction, AdvError> {
    // additive floor 1/sqrt(nK) expressed as gamma/K
    let gamma = (k as f64 / n as f64).sqrt();
    PsiFunction::polynomial(3.0 * (n as f64).sqrt(), 2.0, gamma, k)
}

/// INF for the label-efficient (full information) game:
/// `ψ(x) = exp(√(m log K)/n · x)`, no exploration floor.
pub fn inf_label_efficient_default(n: u64, k: usize, m: u64) -> Result<InfForecaster, AdvError> {
    let eta = (m as f64 * (k as f64).ln()).sqrt() / n as f64;
    let psi = PsiFunction::exponential(eta, 0.0, k)?;
    Ok(InfForecaster::new(
        psi,
        EstimatorKind::label_efficient(m, n),
    ))
}

/// INF for the label-efficient bandit game:
/// `ψ(x) = (3n/(−√m x))² + 1/√(nK)`.
pub fn inf_le_bandit_default(n: u64, k: usize, m: u64) -> Result<InfForecaster, AdvError> {
    let gamma = (k as f64 / n as f64).sqrt();
    let psi = PsiFunction::polynomial(3.0 * n as f64 / (m as f64).sqrt(), 2.0, gamma, k)?;
    Ok(InfForecaster::new(psi, EstimatorKind::le_bandit(m, n)))
}

/// Parameters of the switching-regret (tracking) forecaster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingParams {
    pub gamma: f64,
    pub eta: f64,
    pub beta: f64,
    /// `S̃ = S log(enK/S) + log(2K)` with `S log(enK/S) = 0` at `S = 0`.
    pub s_tilde: f64,
}

/// Tuning of the tracking theorem: `γ = min(1/2, sqrt(K S̃/n))`,
/// `η = sqrt(S̃/(20nK))`, `β = 2 sqrt(S̃/(nK))`, exponential `ψ`.
pub fn tracking_defaults(n: u64, k: usize, switches: u64) -> TrackingParams {
    let nf = n as f64;
    let kf = k as f64;
    let s = switches as f64;
    let s_tilde = if switches == 0 {
        (2.0 * kf).ln()
    } else {
        s * (std::f64::consts::E * nf * kf / s).ln() + (2.0 * kf).ln()
    };
    TrackingParams {
        gamma: (kf * s_tilde / nf).sqrt().min(0.5),
        eta: (s_tilde / (20.0 * nf * kf)).sqrt(),
        beta: 2.0 * (s_tilde / (nf * kf)).sqrt(),
        s_tilde,
    }
}

/// Tracking forecaster: exponential-ψ INF with the biased estimates above.
pub fn tracking_forecaster(n: u64, k: usize, switches: u64) -> Result<InfForecaster, AdvError> {
    let p = tracking_defaults(n, k, switches);
    let psi = PsiFunction::exponential(p.eta, p.gamma, k)?;
    Ok(InfForecaster::new(
        psi,
        EstimatorKind::Tracking { beta: p.beta },
    ))
}

/// Regret of the played `actions` against the best switching strategy using
/// at most `switches` switches, by dynamic programming over
/// (round, arm, switches used).
pub fn switching_regret(matrix: &[Vec<f64>], actions: &[usize], switches: usize) -> f64 {
    assert!(!matrix.is_empty());
    let n = actions.len().min(matrix.len());
    let k = matrix[0].len();
    let s_max = switches.min(n.saturating_sub(1));
    // best[i][s]: max gain over strategies ending at arm i having used s switches
    let mut best = vec![vec![f64::NEG_INFINITY; s_max + 1]; k];
    for i in 0..k {
        for s in 0..=s_max {
            best[i][s] = matrix[0][i];
        }
    }
    for t in 1..n {
        let mut next = vec![vec![f64::NEG_INFINITY; s_max + 1]; k];
        for i in 0..k {
            for s in 0..=s_max {
                let mut v = best[i][s];
                if s > 0 {
                    for j in 0..k {
                        if j != i {
                            v = v.max(best[j][s - 1]);
                        }
                    }
                }
                next[i][s] = v + matrix[t][i];
            }
        }
        best = next;
    }
    let best_gain = best
        .iter()
        .flat_map(|row| row.iter())
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let obtained: f64 = actions
        .iter()
        .take(n)
        .enumerate()
        .map(|(t, &a)| matrix[t][a])
        .sum();
    best_gain - obtained
}

/// Draws an index from a probability vector by inverse CDF walk.
pub fn sample_from<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
