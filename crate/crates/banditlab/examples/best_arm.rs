//! Fixed-budget best-arm identification on the 30-arm Bernoulli instance
//! (one 0.5 arm, five 0.45, fourteen 0.43, ten 0.38): error probabilities of
//! Adaptive UCB-E, Successive Rejects, the Hoeffding race and uniform
//! allocation, with 95% Wilson intervals.
//!
//!     cargo run --release --example best_arm

use banditlab::env::{replication_rng, ArmModel, EnvironmentSpec};
use banditlab::harness::{normal_quantile, wilson_interval};
use banditlab::pure;
use rayon::prelude::*;

fn main() {
    let mut means = vec![0.5];
    means.extend(std::iter::repeat_n(0.45, 5));
    means.extend(std::iter::repeat_n(0.43, 14));
    means.extend(std::iter::repeat_n(0.38, 10));
    let env =
        EnvironmentSpec::stochastic(means.iter().map(|&p| ArmModel::Bernoulli { p }).collect())
            .unwrap();
    let h = pure::hardness(&env.gaps().unwrap()).unwrap();
    let n = 6000u64;
    let reps = 1500u64;
    println!("K = 30, n = {n}, hardness H = {h:.1}, {reps} replications");

    let algorithms: Vec<(&str, Box<dyn Fn(u64) -> usize + Sync>)> = vec![
        (
            "adaptive ucb-e (c=0.5)",
            Box::new(|rep| {
                pure::adaptive_ucbe(&env, n, 0.5, None, &mut replication_rng(2, rep))
                    .unwrap()
                    .recommendation
            }),
        ),
        (
            "successive rejects",
            Box::new(|rep| {
                pure::successive_rejects(&env, n, &mut replication_rng(2, rep))
                    .unwrap()
                    .recommendation
            }),
        ),
        (
            "hoeffding race (0.1)",
            Box::new(|rep| {
                pure::hoeffding_race_recommend(&env, n, 0.1, &mut replication_rng(2, rep))
                    .unwrap()
                    .recommendation
            }),
        ),
        (
            "uniform",
            Box::new(|rep| {
                pure::uniform_allocation(&env, n, &mut replication_rng(2, rep))
                    .unwrap()
                    .recommendation
            }),
        ),
    ];

    let z = normal_quantile(0.975);
    println!("{:<24} {:>10} {:>18}", "algorithm", "error", "95% Wilson");
    for (name, run) in &algorithms {
        let errors: u64 = (0..reps)
            .into_par_iter()
            .map(|rep| (run(rep) != 0) as u64)
            .sum();
        let rate = errors as f64 / reps as f64;
        let (lo, hi) = wilson_interval(errors, reps, z);
        println!(
            "{name:<24} {rate:>10.3} {:>18}",
            format!("[{lo:.3}, {hi:.3}]")
        );
    }
}
