//! Tracking the best switching strategy: the biased-estimate forecaster
//! against a phase-shifting adversary, compared to plain EXP3 and to the
//! exact switching-regret of both.
//!
//!     cargo run --release --example tracking

use banditlab::adv::{
    switching_regret, tracking_defaults, tracking_forecaster, EstimatorKind, Exp3Forecaster,
    RoundRewards,
};
use banditlab::env::replication_rng;
use rayon::prelude::*;

fn main() {
    let n = 900usize;
    let k = 3usize;
    let switches = 2u64;
    // the best strategy follows the phases: arm 0, then 1, then 2
    let matrix: Vec<Vec<f64>> = (0..n)
        .map(|t| {
            let phase = t * 3 / n;
            (0..k).map(|i| if i == phase { 0.9 } else { 0.1 }).collect()
        })
        .collect();
    let reps = 200u64;

    let play = |tracking: bool, seed: u64| -> Vec<f64> {
        (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(seed, rep);
                let mut actions = Vec::with_capacity(n);
                if tracking {
                    let mut f = tracking_forecaster(n as u64, k, switches).unwrap();
                    for row in &matrix {
                        let arm = f.draw_arm(&mut rng);
                        actions.push(arm);
                        f.step(arm, RoundRewards::Own(row[arm]), &mut rng).unwrap();
                    }
                } else {
                    let mut f =
                        Exp3Forecaster::with_defaults(k, n as u64, EstimatorKind::RewardMagnifying);
                    for row in &matrix {
                        let arm = f.draw_arm(&mut rng);
                        actions.push(arm);
                        f.step(arm, RoundRewards::Own(row[arm]), &mut rng).unwrap();
                    }
                }
                switching_regret(&matrix, &actions, switches as usize)
            })
            .collect()
    };

    let params = tracking_defaults(n as u64, k, switches);
    println!(
        "phase-shifting adversary, n = {n}, K = {k}, S = {switches} \
         (gamma {:.4}, eta {:.4}, beta {:.4})",
        params.gamma, params.eta, params.beta
    );
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let tracked = play(true, 8);
    let plain = play(false, 9);
    println!("tracking forecaster : mean R_n^S = {:>7.1}", mean(&tracked));
    println!("plain EXP3          : mean R_n^S = {:>7.1}", mean(&plain));
    println!(
        "tracking bound 10 sqrt(nK*S~) = {:.1}",
        10.0 * (n as f64 * k as f64 * params.s_tilde).sqrt()
    );
}
