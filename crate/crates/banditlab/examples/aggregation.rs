//! Model-selection aggregation over two constant reference functions:
//! progressive mixture, progressive indirect mixture and the empirical star
//! estimator, with exact excess risks against the best reference.
//!
//!     cargo run --release --example aggregation

use banditlab::agg::{empirical_star, pim_predict, pm_predict, Dictionary};
use banditlab::env::replication_rng;
use banditlab::harness::quantile;
use rand::Rng;
use rayon::prelude::*;

fn main() {
    let n = 1000usize;
    let reps = 500u64;
    let lambda = 0.125; // 1/(8 B^2) for B = 1
                        // outputs on {-1, 1 - 2e'} with e' = 1/sqrt(n); the references are g ≡ ±1
    let eps_prime = 1.0 / (n as f64).sqrt();
    let hi = 1.0 - 2.0 * eps_prime;
    let m1 = 0.5 * (hi - 1.0);
    let m2 = 0.5 * (hi * hi + 1.0);
    let risk = |c: f64| m2 - 2.0 * c * m1 + c * c;
    let best_ref = risk(1.0).min(risk(-1.0));

    let rows: Vec<(f64, f64, f64)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(10, rep);
            let outputs: Vec<f64> = (0..n)
                .map(|_| if rng.gen::<f64>() < 0.5 { hi } else { -1.0 })
                .collect();
            let dict = Dictionary::of_constants(&[1.0, -1.0], outputs, 1.0).unwrap();
            let q = [1.0, -1.0];
            let pm = risk(pm_predict(&dict, lambda, &q)) - best_ref;
            let pim =
                risk(pim_predict(&dict, 0.5, &q).expect("PIM fails only above λ=1/2")) - best_ref;
            let star = empirical_star(&dict).unwrap();
            let star = risk(star.predict(&q)) - best_ref;
            (pm, pim, star)
        })
        .collect();

    let summarize = |name: &str, pick: &dyn Fn(&(f64, f64, f64)) -> f64| {
        let values: Vec<f64> = rows.iter().map(pick).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        println!(
            "{name:<22} mean excess {mean:>9.5}   95th pct {:>9.5}",
            quantile(&values, 0.95)
        );
    };
    println!("d = 2 constants ±1, n = {n}, {reps} replications, outputs in {{-1, {hi:.3}}}");
    summarize("progressive mixture", &|r| r.0);
    summarize("progressive indirect", &|r| r.1);
    summarize("empirical star", &|r| r.2);
    println!(
        "PM mean-excess bound log(d)/(λ(n+1)) = {:.5}",
        2.0f64.ln() / (lambda * (n as f64 + 1.0))
    );
}
