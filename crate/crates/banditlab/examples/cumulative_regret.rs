//! Mean pseudo-regret of the index policies on a three-arm Bernoulli
//! instance, with the minimax policy's distribution-free bound for scale.
//!
//!     cargo run --release --example cumulative_regret

use banditlab::env::{replication_rng, ArmModel};
use banditlab::stoch::{IndexPolicy, IndexVariant};
use rayon::prelude::*;

fn main() {
    let arms = vec![
        ArmModel::Bernoulli { p: 0.7 },
        ArmModel::Bernoulli { p: 0.5 },
        ArmModel::Bernoulli { p: 0.3 },
    ];
    let n = 10_000u64;
    let reps = 500u64;

    let policies = [
        ("ucb1", IndexVariant::Ucb1),
        ("auer-variance", IndexVariant::AuerVariance),
        ("ucbv(1.2)", IndexVariant::UcbV { zeta: 1.2 }),
        ("ucb-horizon", IndexVariant::UcbHorizon { horizon: n }),
        (
            "minimax",
            IndexVariant::Minimax {
                horizon: n,
                arms: arms.len(),
            },
        ),
    ];

    println!("three Bernoulli arms (0.7, 0.5, 0.3), n = {n}, {reps} replications");
    println!("{:<14} {:>14} {:>10}", "policy", "mean regret", "std err");
    for (name, variant) in policies {
        let regrets: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(1, rep);
                let mut policy = IndexPolicy::new(variant, arms.len());
                policy.play(&arms, n, &mut rng)
            })
            .collect();
        let mean = regrets.iter().sum::<f64>() / reps as f64;
        let var = regrets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        println!(
            "{:<14} {:>14.2} {:>10.2}",
            name,
            mean,
            (var / reps as f64).sqrt()
        );
    }
    let minimax_bound = 24.0 * (n as f64 * arms.len() as f64).sqrt();
    println!("minimax distribution-free bound: 24 sqrt(nK) = {minimax_bound:.0}");
}
