//! The arm-increasing rule on a reservoir of Bernoulli arms with uniform
//! mean rewards (tail exponent β = 1): sampled-arm counts follow the
//! schedule and the per-round regret falls with the horizon.
//!
//!     cargo run --release --example many_armed

use banditlab::env::{replication_rng, ArmModel};
use banditlab::stoch::{many_armed_run, many_armed_schedule};
use rand::Rng;
use rayon::prelude::*;

fn main() {
    let beta = 1.0;
    println!("uniform mean-reward reservoir, beta = {beta}, mu* = 1");
    println!(
        "{:>8} {:>12} {:>14} {:>16}",
        "horizon", "target arms", "mean regret", "regret per round"
    );
    for n in [1000u64, 4000, 16000] {
        let reps = 30u64;
        let results: Vec<(usize, f64)> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(20, rep);
                let run = many_armed_run(
                    |r: &mut rand_chacha::ChaCha8Rng| ArmModel::Bernoulli { p: r.gen::<f64>() },
                    n,
                    beta,
                    1.0,
                    false,
                    &mut rng,
                );
                (run.sampled_means.len(), run.pseudo_regret)
            })
            .collect();
        let regret = results.iter().map(|r| r.1).sum::<f64>() / reps as f64;
        println!(
            "{n:>8} {:>12} {regret:>14.0} {:>16.3}",
            many_armed_schedule(n, beta, false),
            regret / n as f64
        );
    }
}
