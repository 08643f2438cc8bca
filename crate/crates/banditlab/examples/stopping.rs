//! EBGStop* adaptive stopping across Bernoulli means: the sample count grows
//! as the mean shrinks while the relative-error guarantee holds.
//!
//!     cargo run --release --example stopping

use banditlab::env::{replication_rng, ArmModel};
use banditlab::stop::{ebgstop, StoppingConfig};
use rayon::prelude::*;

fn main() {
    let cfg = StoppingConfig::new(0.1, 0.05);
    println!(
        "delta = {}, eps = {}, grid q = {}, t1 = {}, alpha = {} (c = {:.1})",
        cfg.delta,
        cfg.eps,
        cfg.q,
        cfg.t1,
        cfg.alpha,
        cfg.union_constant()
    );
    println!(
        "{:>6} {:>12} {:>12} {:>10}",
        "mean", "E[samples]", "median T", "fail rate"
    );
    for mu in [0.9, 0.5, 0.1, 0.05] {
        let runs = 500u64;
        let outs: Vec<(u64, bool)> = (0..runs)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(3, rep);
                let model = ArmModel::Bernoulli { p: mu };
                let out = ebgstop(|| Some(model.sample(&mut rng)), &cfg, false).unwrap();
                (
                    out.stopping_time,
                    (out.estimate - mu).abs() > cfg.delta * mu,
                )
            })
            .collect();
        let mut times: Vec<u64> = outs.iter().map(|&(t, _)| t).collect();
        times.sort_unstable();
        let mean_t = times.iter().sum::<u64>() as f64 / runs as f64;
        let fails = outs.iter().filter(|&&(_, f)| f).count() as f64 / runs as f64;
        println!(
            "{mu:>6.2} {mean_t:>12.0} {:>12} {fails:>10.4}",
            times[times.len() / 2]
        );
    }
}
