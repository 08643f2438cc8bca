//! Bandit policies, adaptive stopping, adversarial forecasters and
//! model-selection aggregation, with a seeded Monte Carlo harness.
//!
//! The crate is organized by problem:
//!
//! - [`env`] — reward environments, sampling and regret accounting
//! - [`bounds`] — Hoeffding / empirical Bernstein / Maurer–Pontil radii
//! - [`stoch`] — cumulative-regret index policies (UCB1, UCB-V, minimax, …)
//! - [`pure`] — fixed-budget best-arm identification (UCB-E, SR, …)
//! - [`stop`] — the EBGStop* stopping rule and racing
//! - [`adv`] — INF and EXP3 forecasters, switching regret
//! - [`agg`] — progressive mixtures and the empirical star estimator
//! - [`harness`] — experiment configs, replication pool, CSV, summaries
//!
//! The `examples/` directory contains one runnable experiment per
//! capability; `banditlab` is the thin CLI over [`harness`] and [`stop`].

pub mod adv;
pub mod agg;
pub mod bounds;
pub mod env;
pub mod harness;
pub mod pure;
pub mod stoch;
pub mod stop;

pub use env::{ArmModel, ArmStatistics, EnvironmentSpec, RegretLedger};
pub use harness::{ExperimentConfig, Metric, PolicySpec};
