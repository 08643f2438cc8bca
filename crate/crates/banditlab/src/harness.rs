//! Experiment harness: JSON configuration, seeded replications in a work
//! pool, CSV result tables and summary statistics.

use crate::adv::{inf_bandit_default, EstimatorKind, Exp3Forecaster, RoundRewards};
use crate::env::{replication_rng, EnvironmentSpec, RegretLedger};
use crate::pure;
use crate::stoch::{IndexPolicy, IndexVariant};
use crate::stop::{race, RaceRadius};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Metrics a run can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    PseudoRegret,
    Regret,
    SimpleRegret,
    ErrorProb,
    StoppingTime,
    WorkSaved,
    ExcessRisk,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::PseudoRegret => "pseudo_regret",
            Metric::Regret => "regret",
            Metric::SimpleRegret => "simple_regret",
            Metric::ErrorProb => "error_prob",
            Metric::StoppingTime => "stopping_time",
            Metric::WorkSaved => "work_saved",
            Metric::ExcessRisk => "excess_risk",
        }
    }
}

/// Policy specification, shared JSON shape across modules:
/// `{"policy": "ucbv", "zeta": 1.2}` and friends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum PolicySpec {
    Ucb1,
    AuerVariance,
    Ucbv {
        zeta: f64,
    },
    UcbHorizon,
    Minimax,
    Ucbe {
        c: f64,
    },
    SuccessiveRejects,
    AdaptiveUcbe {
        c: f64,
    },
    UniformAllocation,
    HoeffdingRace {
        eps: f64,
    },
    Exp3 {
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default)]
        gamma: Option<f64>,
    },
    InfBandit,
    Race {
        eps: f64,
        radius: RaceRadiusSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RaceRadiusSpec {
    Hoeffding,
    EmpiricalBernstein,
}

impl From<RaceRadiusSpec> for RaceRadius {
    fn from(r: RaceRadiusSpec) -> Self {
        match r {
            RaceRadiusSpec::Hoeffding => RaceRadius::Hoeffding,
            RaceRadiusSpec::EmpiricalBernstein => RaceRadius::EmpiricalBernstein,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PolicyFamily {
    Stochastic,
    PureExploration,
    Adversarial,
    Racing,
}

impl PolicySpec {
    fn family(&self) -> PolicyFamily {
        match self {
            PolicySpec::Ucb1
            | PolicySpec::AuerVariance
            | PolicySpec::Ucbv { .. }
            | PolicySpec::UcbHorizon
            | PolicySpec::Minimax => PolicyFamily::Stochastic,
            PolicySpec::Ucbe { .. }
            | PolicySpec::SuccessiveRejects
            | PolicySpec::AdaptiveUcbe { .. }
            | PolicySpec::UniformAllocation
            | PolicySpec::HoeffdingRace { .. } => PolicyFamily::PureExploration,
            PolicySpec::Exp3 { .. } | PolicySpec::InfBandit => PolicyFamily::Adversarial,
            PolicySpec::Race { .. } => PolicyFamily::Racing,
        }
    }

    fn supported_metrics(&self) -> Vec<Metric> {
        match self.family() {
            PolicyFamily::Stochastic => vec![Metric::PseudoRegret, Metric::Regret],
            PolicyFamily::PureExploration => vec![Metric::SimpleRegret, Metric::ErrorProb],
            PolicyFamily::Adversarial => vec![Metric::Regret, Metric::PseudoRegret],
            PolicyFamily::Racing => vec![Metric::WorkSaved, Metric::ErrorProb],
        }
    }
}

/// A complete experiment: environment, policy, horizon, replication plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub policy: PolicySpec,
    pub n: u64,
    pub replications: u64,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replications < 1 {
            return Err(HarnessError::Config(
                "replications must be at least 1".into(),
            ));
        }
        if self.metrics.is_empty() {
            return Err(HarnessError::Config(
                "at least one metric is required".into(),
            ));
        }
        let supported = self.policy.supported_metrics();
        for m in &self.metrics {
            if !supported.contains(m) {
                return Err(HarnessError::Config(format!(
                    "metric {} is incompatible with policy {:?}",
                    m.name(),
                    self.policy
                )));
            }
        }
        let needs_stochastic = !matches!(self.policy.family(), PolicyFamily::Adversarial);
        if needs_stochastic && !self.environment.is_stochastic() {
            return Err(HarnessError::Config(
                "this policy requires a stochastic environment".into(),
            ));
        }
        if self.metrics.contains(&Metric::PseudoRegret) && !self.environment.is_stochastic() {
            return Err(HarnessError::Config(
                "pseudo_regret requires a stochastic environment".into(),
            ));
        }
        if let EnvironmentSpec::Adversarial { matrix } = &self.environment {
            if (matrix.len() as u64) < self.n {
                return Err(HarnessError::Config(format!(
                    "adversarial matrix has {} rows, horizon is {}",
                    matrix.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// One row per replication: replication index plus metric values in the
/// order declared by the config.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ResultsTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Deterministic CSV emission; floats use shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, HarnessError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| HarnessError::Config("empty CSV".into()))?;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for line in lines {
            let row: Vec<f64> = line
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| HarnessError::Config(format!("bad CSV field: {e}")))
                })
                .collect::<Result<_, _>>()?;
            if row.len() != columns.len() {
                return Err(HarnessError::Config("ragged CSV row".into()));
            }
            rows.push(row);
        }
        Ok(ResultsTable { columns, rows })
    }
}

/// Runs every replication of the experiment. Replication `i` draws from a
/// stream derived from `(seed, i)` only, so rows do not depend on execution
/// order; they are returned sorted by replication index.
pub fn run(config: &ExperimentConfig) -> Result<ResultsTable, HarnessError> {
    config.validate()?;
    let mut columns = vec!["replication".to_string()];
    columns.extend(config.metrics.iter().map(|m| m.name().to_string()));

    let body = |rep: u64| -> Result<Vec<f64>, HarnessError> {
        let mut row = vec![rep as f64];
        let values = run_replication(config, rep)?;
        for metric in &config.metrics {
            row.push(values[metric]);
        }
        Ok(row)
    };

    let reps: Vec<u64> = (0..config.replications).collect();
    let rows: Result<Vec<Vec<f64>>, HarnessError> = match config.jobs {
        Some(1) => reps.iter().map(|&r| body(r)).collect(),
        Some(width) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(width)
                .build()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            pool.install(|| reps.par_iter().map(|&r| body(r)).collect())
        }
        None => reps.par_iter().map(|&r| body(r)).collect(),
    };
    let mut rows = rows?;
    rows.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
    Ok(ResultsTable { columns, rows })
}

fn run_replication(
    config: &ExperimentConfig,
    rep: u64,
) -> Result<BTreeMap<Metric, f64>, HarnessError> {
    let mut rng = replication_rng(config.seed, rep);
    let env = &config.environment;
    let n = config.n;
    let mut values = BTreeMap::new();

    match &config.policy {
        PolicySpec::Ucb1
        | PolicySpec::AuerVariance
        | PolicySpec::Ucbv { .. }
        | PolicySpec::UcbHorizon
        | PolicySpec::Minimax => {
            let variant = index_variant(&config.policy, n, env.arm_count());
            let mut policy = IndexPolicy::new(variant, env.arm_count());
            if config.metrics.contains(&Metric::Regret) {
                let ledger = policy.play_recorded(env, n, &mut rng);
                record_regrets(&ledger, &config.metrics, &mut rng, &mut values)?;
            } else {
                let arms = env
                    .arms()
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                let pseudo = policy.play(arms, n, &mut rng);
                values.insert(Metric::PseudoRegret, pseudo);
            }
        }
        PolicySpec::Ucbe { c } => {
            let gaps = env
                .gaps()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let h = pure::hardness(&gaps).map_err(|e| HarnessError::Config(e.to_string()))?;
            let a = c * n as f64 / (2.0 * h);
            let run = pure::ucbe(env, n, a, &mut rng)
                .map_err(|e| HarnessError::Numerical(e.to_string()))?;
            record_pure(&run, &gaps, &mut values);
        }
        PolicySpec::SuccessiveRejects => {
            let gaps = env
                .gaps()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let run = pure::successive_rejects(env, n, &mut rng)
                .map_err(|e| HarnessError::Numerical(e.to_string()))?;
            record_pure(&run, &gaps, &mut values);
        }
        PolicySpec::AdaptiveUcbe { c } => {
            let gaps = env
                .gaps()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let run = pure::adaptive_ucbe(env, n, *c, None, &mut rng)
                .map_err(|e| HarnessError::Numerical(e.to_string()))?;
            record_pure(&run, &gaps, &mut values);
        }
        PolicySpec::UniformAllocation => {
            let gaps = env
                .gaps()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let run = pure::uniform_allocation(env, n, &mut rng)
                .map_err(|e| HarnessError::Numerical(e.to_string()))?;
            record_pure(&run, &gaps, &mut values);
        }
        PolicySpec::HoeffdingRace { eps } => {
            let gaps = env
                .gaps()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let run = pure::hoeffding_race_recommend(env, n, *eps, &mut rng)
                .map_err(|e| HarnessError::Numerical(e.to_string()))?;
            record_pure(&run, &gaps, &mut values);
        }
        PolicySpec::Exp3 { eta, gamma } => {
            let k = env.arm_count();
            let defaults = crate::adv::exp3_defaults(k, n);
            let mut forecaster = Exp3Forecaster::new(
                k,
                eta.unwrap_or(defaults.0),
                gamma.unwrap_or(defaults.1),
                EstimatorKind::RewardMagnifying,
            );
            let ledger = play_adversarial(env, n, &mut forecaster, &mut rng)?;
            record_regrets(&ledger, &config.metrics, &mut rng, &mut values)?;
        }
        PolicySpec::InfBandit => {
            let k = env.arm_count();
            let mut forecaster =
                inf_bandit_default(n, k).map_err(|e| HarnessError::Config(e.to_string()))?;
            let ledger = play_adversarial(env, n, &mut forecaster, &mut rng)?;
            record_regrets(&ledger, &config.metrics, &mut rng, &mut values)?;
        }
        PolicySpec::Race { eps, radius } => {
            let arms = env
                .arms()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let best = env
                .best_arm()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let outcome = race(arms, *eps, n, (*radius).into(), &mut rng);
            values.insert(Metric::WorkSaved, outcome.work_saved);
            let lost_best = if outcome.survivors.contains(&best) {
                0.0
            } else {
                1.0
            };
            values.insert(Metric::ErrorProb, lost_best);
        }
    }
    Ok(values)
}

fn index_variant(policy: &PolicySpec, n: u64, k: usize) -> IndexVariant {
    match policy {
        PolicySpec::Ucb1 => IndexVariant::Ucb1,
        PolicySpec::AuerVariance => IndexVariant::AuerVariance,
        PolicySpec::Ucbv { zeta } => IndexVariant::UcbV { zeta: *zeta },
        PolicySpec::UcbHorizon => IndexVariant::UcbHorizon { horizon: n },
        PolicySpec::Minimax => IndexVariant::Minimax {
            horizon: n,
            arms: k,
        },
        _ => unreachable!("not an index policy"),
    }
}

/// A forecaster playable under bandit feedback.
pub trait BanditForecaster {
    fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize;
    fn observe<R: rand::Rng + ?Sized>(
        &mut self,
        arm: usize,
        reward: f64,
        rng: &mut R,
    ) -> Result<(), crate::adv::AdvError>;
}

impl BanditForecaster for Exp3Forecaster {
    fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.draw_arm(rng)
    }
    fn observe<R: rand::Rng + ?Sized>(
        &mut self,
        arm: usize,
        reward: f64,
        rng: &mut R,
    ) -> Result<(), crate::adv::AdvError> {
        self.step(arm, RoundRewards::Own(reward), rng)
    }
}

impl BanditForecaster for crate::adv::InfForecaster {
    fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.draw_arm(rng)
    }
    fn observe<R: rand::Rng + ?Sized>(
        &mut self,
        arm: usize,
        reward: f64,
        rng: &mut R,
    ) -> Result<(), crate::adv::AdvError> {
        self.step(arm, RoundRewards::Own(reward), rng)
    }
}

/// Plays a forecaster for `n` rounds under bandit feedback.
pub fn play_adversarial<F, R>(
    env: &EnvironmentSpec,
    n: u64,
    forecaster: &mut F,
    rng: &mut R,
) -> Result<RegretLedger, HarnessError>
where
    F: BanditForecaster,
    R: rand::Rng + ?Sized,
{
    let mut ledger = RegretLedger::new(env.clone());
    match env {
        EnvironmentSpec::Adversarial { matrix } => {
            for row in matrix.iter().take(n as usize) {
                let arm = forecaster.draw(rng);
                let g = row[arm];
                forecaster
                    .observe(arm, g, rng)
                    .map_err(|e| HarnessError::Numerical(e.to_string()))?;
                ledger.record(arm, g);
            }
        }
        EnvironmentSpec::Stochastic { arms } => {
            for _ in 0..n {
                let arm = forecaster.draw(rng);
                let g = arms[arm].sample(rng);
                forecaster
                    .observe(arm, g, rng)
                    .map_err(|e| HarnessError::Numerical(e.to_string()))?;
                ledger.record(arm, g);
            }
        }
    }
    Ok(ledger)
}

fn record_regrets<R: rand::Rng + ?Sized>(
    ledger: &RegretLedger,
    metrics: &[Metric],
    rng: &mut R,
    values: &mut BTreeMap<Metric, f64>,
) -> Result<(), HarnessError> {
    if metrics.contains(&Metric::PseudoRegret) {
        let pseudo = ledger
            .pseudo_regret()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        values.insert(Metric::PseudoRegret, pseudo);
    }
    if metrics.contains(&Metric::Regret) {
        values.insert(Metric::Regret, ledger.regret(rng));
    }
    Ok(())
}

fn record_pure(run: &pure::PureExplorationRun, gaps: &[f64], values: &mut BTreeMap<Metric, f64>) {
    let r = pure::simple_regret(run.recommendation, gaps);
    values.insert(Metric::SimpleRegret, r);
    values.insert(Metric::ErrorProb, if r > 0.0 { 1.0 } else { 0.0 });
}

/// Summary of one metric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub std_error: f64,
    /// Normal-approximation interval at the requested level; Wilson interval
    /// for `error_prob`.
    pub ci_low: f64,
    pub ci_high: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
}

/// Summarizes every metric column of a results table at confidence `level`.
pub fn summarize(table: &ResultsTable, level: f64) -> Result<Vec<MetricSummary>, HarnessError> {
    if !(0.0 < level && level < 1.0) {
        return Err(HarnessError::Config(format!(
            "bad confidence level {level}"
        )));
    }
    let z = normal_quantile(0.5 + level / 2.0);
    let mut out = Vec::new();
    for (idx, name) in table.columns.iter().enumerate() {
        if name == "replication" {
            continue;
        }
        let values: Vec<f64> = table.rows.iter().map(|r| r[idx]).collect();
        if values.is_empty() {
            return Err(HarnessError::Config("no rows to summarize".into()));
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        let std_error = (var / count as f64).sqrt();
        let (ci_low, ci_high) = if name == "error_prob" {
            let successes = values.iter().filter(|&&v| v > 0.5).count();
            wilson_interval(successes as u64, count as u64, z)
        } else {
            (mean - z * std_error, mean + z * std_error)
        };
        out.push(MetricSummary {
            metric: name.clone(),
            count,
            mean,
            std_error,
            ci_low,
            ci_high,
            q05: quantile(&values, 0.05),
            median: quantile(&values, 0.5),
            q95: quantile(&values, 0.95),
        });
    }
    Ok(out)
}

/// Empirical quantile with linear interpolation.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - spread).max(0.0), (center + spread).min(1.0))
}

/// Standard normal quantile (Acklam's rational approximation, |err| < 1e-9).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// Histogram as binned counts: `(low_edge, high_edge, count)` per bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, u64)> {
    assert!(bins >= 1 && !values.is_empty());
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = ((max - min) / bins as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0u64; bins];
    for &v in values {
        let idx = (((v - min) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (min + i as f64 * width, min + (i + 1) as f64 * width, c))
        .collect()
}

/// Histogram CSV: `bin_low,bin_high,count` rows.
pub fn histogram_csv(values: &[f64], bins: usize) -> String {
    let mut out = String::from("bin_low,bin_high,count\n");
    for (lo, hi, c) in histogram(values, bins) {
        out.push_str(&format!("{lo},{hi},{c}\n"));
    }
    out
}
