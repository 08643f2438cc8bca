//! Reward environments, per-arm statistics and regret accounting.
//!
//! Every policy in this crate plays against an [`EnvironmentSpec`]: either a
//! stochastic K-tuple of [`ArmModel`]s or an adversarial reward matrix with
//! entries in `[0, 1]`. A [`RegretLedger`] records the play so that
//! pseudo-regret and regret can be computed after the fact.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("value {0} outside [0, 1]")]
    ValueOutOfRange(f64),
    #[error("finite-support probabilities sum to {0}, expected 1")]
    ProbabilitiesDoNotSumToOne(f64),
    #[error("environment needs at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("adversarial matrix row {row} has {got} entries, expected {expected}")]
    RaggedMatrix {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("adversarial matrix must have at least one row")]
    EmptyMatrix,
    #[error("operation requires a stochastic environment")]
    NotStochastic,
    #[error("operation requires an adversarial environment")]
    NotAdversarial,
    #[error("uniform support requires low <= high, got [{0}, {1}]")]
    InvertedSupport(f64, f64),
}

/// A reward distribution on `[0, 1]` with closed-form mean and variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArmModel {
    Bernoulli {
        p: f64,
    },
    Dirac {
        value: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    /// Finite support given as `(value, probability)` pairs.
    FiniteSupport {
        support: Vec<(f64, f64)>,
    },
}

impl ArmModel {
    pub fn bernoulli(p: f64) -> Result<Self, EnvError> {
        check_unit(p)?;
        Ok(ArmModel::Bernoulli { p })
    }

    pub fn dirac(value: f64) -> Result<Self, EnvError> {
        check_unit(value)?;
        Ok(ArmModel::Dirac { value })
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self, EnvError> {
        check_unit(low)?;
        check_unit(high)?;
        if low > high {
            return Err(EnvError::InvertedSupport(low, high));
        }
        Ok(ArmModel::Uniform { low, high })
    }

    pub fn finite_support(support: Vec<(f64, f64)>) -> Result<Self, EnvError> {
        let mut total = 0.0;
        for &(v, p) in &support {
            check_unit(v)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(EnvError::ValueOutOfRange(p));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(EnvError::ProbabilitiesDoNotSumToOne(total));
        }
        Ok(ArmModel::FiniteSupport { support })
    }

    /// Exact mean of the distribution.
    pub fn mean(&self) -> f64 {
        match self {
            ArmModel::Bernoulli { p } => *p,
            ArmModel::Dirac { value } => *value,
            ArmModel::Uniform { low, high } => 0.5 * (low + high),
            ArmModel::FiniteSupport { support } => support.iter().map(|&(v, p)| v * p).sum(),
        }
    }

    /// Exact variance of the distribution.
    pub fn variance(&self) -> f64 {
        match self {
            ArmModel::Bernoulli { p } => p * (1.0 - p),
            ArmModel::Dirac { .. } => 0.0,
            ArmModel::Uniform { low, high } => (high - low).powi(2) / 12.0,
            ArmModel::FiniteSupport { support } => {
                let m = self.mean();
                support.iter().map(|&(v, p)| p * (v - m).powi(2)).sum()
            }
        }
    }

    /// Draws one reward. Deterministic given the state of `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ArmModel::Bernoulli { p } => {
                if rng.gen::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            ArmModel::Dirac { value } => *value,
            ArmModel::Uniform { low, high } => low + (high - low) * rng.gen::<f64>(),
            ArmModel::FiniteSupport { support } => {
                let u = rng.gen::<f64>();
                let mut acc = 0.0;
                for &(v, p) in support {
                    acc += p;
                    if u < acc {
                        return v;
                    }
                }
                // u landed in the rounding slack past the last cumulative step
                support.last().map(|&(v, _)| v).unwrap_or(0.0)
            }
        }
    }
}

/// A bandit environment: stochastic arms or an oblivious adversarial matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentSpec {
    Stochastic {
        arms: Vec<ArmModel>,
    },
    /// `matrix[t][i]` is the reward of arm `i` at round `t + 1`.
    Adversarial {
        matrix: Vec<Vec<f64>>,
    },
}

impl EnvironmentSpec {
    pub fn stochastic(arms: Vec<ArmModel>) -> Result<Self, EnvError> {
        if arms.len() < 2 {
            return Err(EnvError::TooFewArms(arms.len()));
        }
        Ok(EnvironmentSpec::Stochastic { arms })
    }

    pub fn adversarial(matrix: Vec<Vec<f64>>) -> Result<Self, EnvError> {
        let first = matrix.first().ok_or(EnvError::EmptyMatrix)?;
        let k = first.len();
        if k < 2 {
            return Err(EnvError::TooFewArms(k));
        }
        for (row, entries) in matrix.iter().enumerate() {
            if entries.len() != k {
                return Err(EnvError::RaggedMatrix {
                    row,
                    got: entries.len(),
                    expected: k,
                });
            }
            for &g in entries {
                check_unit(g)?;
            }
        }
        Ok(EnvironmentSpec::Adversarial { matrix })
    }

    /// Loads an adversarial matrix from CSV text (n rows, K comma-separated
    /// columns, values in `[0, 1]`).
    pub fn adversarial_from_csv(text: &str) -> Result<Self, EnvError> {
        let mut matrix = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>().map_err(|_| EnvError::EmptyMatrix))
                .collect::<Result<_, _>>()?;
            matrix.push(row);
        }
        Self::adversarial(matrix)
    }

    pub fn arm_count(&self) -> usize {
        match self {
            EnvironmentSpec::Stochastic { arms } => arms.len(),
            EnvironmentSpec::Adversarial { matrix } => matrix[0].len(),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, EnvironmentSpec::Stochastic { .. })
    }

    pub fn arms(&self) -> Result<&[ArmModel], EnvError> {
        match self {
            EnvironmentSpec::Stochastic { arms } => Ok(arms),
            EnvironmentSpec::Adversarial { .. } => Err(EnvError::NotStochastic),
        }
    }

    pub fn matrix(&self) -> Result<&[Vec<f64>], EnvError> {
        match self {
            EnvironmentSpec::Adversarial { matrix } => Ok(matrix),
            EnvironmentSpec::Stochastic { .. } => Err(EnvError::NotAdversarial),
        }
    }

    pub fn means(&self) -> Result<Vec<f64>, EnvError> {
        Ok(self.arms()?.iter().map(ArmModel::mean).collect())
    }

    /// Suboptimality gaps `Δ_i = max_j μ_j − μ_i`. At least one entry is zero.
    pub fn gaps(&self) -> Result<Vec<f64>, EnvError> {
        let means = self.means()?;
        let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(means.iter().map(|&m| best - m).collect())
    }

    /// Index of an optimal arm (lowest index on ties).
    pub fn best_arm(&self) -> Result<usize, EnvError> {
        let means = self.means()?;
        Ok(argmax(&means))
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Running pull count, reward sum and squared-reward sum for one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ArmStatistics {
    pulls: u64,
    sum: f64,
    sum_sq: f64,
}

impl ArmStatistics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, reward: f64) {
        self.pulls += 1;
        self.sum += reward;
        self.sum_sq += reward * reward;
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    /// Empirical mean; zero before the first pull.
    pub fn mean(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.sum / self.pulls as f64
        }
    }

    /// Biased empirical variance `(1/s) Σ (X_j − X̄)²`, clamped at zero.
    pub fn variance(&self) -> f64 {
        if self.pulls == 0 {
            return 0.0;
        }
        let m = self.mean();
        (self.sum_sq / self.pulls as f64 - m * m).max(0.0)
    }

    /// Unbiased variance `s/(s−1) · V̄`; zero below two pulls.
    pub fn unbiased_variance(&self) -> f64 {
        if self.pulls < 2 {
            return 0.0;
        }
        self.variance() * self.pulls as f64 / (self.pulls - 1) as f64
    }
}

/// Per-round record of a play-out against an environment.
///
/// For stochastic runs the realized rewards of each arm are kept in pull
/// order; the rewards of rounds an arm did not play are only drawn when the
/// regret (rather than the pseudo-regret) is requested.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    env: EnvironmentSpec,
    choices: Vec<usize>,
    rewards: Vec<f64>,
    /// Stochastic runs only: realized rewards per arm, in pull order.
    per_arm: Vec<Vec<f64>>,
}

impl RegretLedger {
    pub fn new(env: EnvironmentSpec) -> Self {
        let k = env.arm_count();
        RegretLedger {
            env,
            choices: Vec::new(),
            rewards: Vec::new(),
            per_arm: vec![Vec::new(); k],
        }
    }

    pub fn env(&self) -> &EnvironmentSpec {
        &self.env
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.choices.push(arm);
        self.rewards.push(reward);
        if self.env.is_stochastic() {
            self.per_arm[arm].push(reward);
        }
    }

    pub fn rounds(&self) -> usize {
        self.choices.len()
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    /// Total reward obtained by the policy.
    pub fn obtained(&self) -> f64 {
        self.rewards.iter().sum()
    }

    /// Gap-accounting pseudo-regret `Σ_t Δ_{I_t}`. Stochastic only.
    pub fn pseudo_regret(&self) -> Result<f64, EnvError> {
        let gaps = self.env.gaps()?;
        Ok(self.choices.iter().map(|&i| gaps[i]).sum())
    }

    /// Realized reward table `X_{i,t}` for `t = 1..=rounds`: the first
    /// `T_i(n)` entries of row `i` are the rewards obtained from arm `i`,
    /// the remainder are fresh independent draws.
    pub fn completed_rewards<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>, EnvError> {
        let arms = self.env.arms()?;
        let n = self.rounds();
        let mut table = self.per_arm.clone();
        for (i, row) in table.iter_mut().enumerate() {
            while row.len() < n {
                row.push(arms[i].sample(rng));
            }
        }
        Ok(table)
    }

    /// Regret against the best constant action.
    ///
    /// Adversarial: `max_i Σ_t g_{i,t} − Σ_t g_{I_t,t}` over the realized
    /// matrix (`rng` unused). Stochastic: the same with the completed reward
    /// table, so unplayed rounds are drawn from `rng`.
    pub fn regret<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let best = match &self.env {
            EnvironmentSpec::Adversarial { matrix } => {
                let k = self.env.arm_count();
                (0..k)
                    .map(|i| {
                        matrix
                            .iter()
                            .take(self.rounds())
                            .map(|row| row[i])
                            .sum::<f64>()
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            EnvironmentSpec::Stochastic { .. } => {
                let table = self.completed_rewards(rng).expect("stochastic ledger");
                table
                    .iter()
                    .map(|row| row.iter().sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        };
        best - self.obtained()
    }
}

/// RNG for replication `rep` of an experiment with master seed `seed`.
///
/// Stream-based so that replications are independent of execution order.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

fn check_unit(v: f64) -> Result<(), EnvError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(EnvError::ValueOutOfRange(v));
    }
    Ok(())
}
