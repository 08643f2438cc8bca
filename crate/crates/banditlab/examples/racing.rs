//! Racing ten low-variance options: percentage of work saved and survivors
//! left, Hoeffding radius vs empirical Bernstein radius.
//!
//!     cargo run --release --example racing

use banditlab::env::{replication_rng, ArmModel};
use banditlab::stop::{race, RaceRadius};
use rayon::prelude::*;

fn main() {
    // two-point support m +- 0.01: variance 1e-4, means 0.25 .. 0.70
    let options: Vec<ArmModel> = (0..10)
        .map(|i| {
            let m = 0.25 + 0.05 * i as f64;
            ArmModel::FiniteSupport {
                support: vec![(m - 0.01, 0.5), (m + 0.01, 0.5)],
            }
        })
        .collect();
    let eps = 0.05;
    let n = 3000u64;
    let trials = 100u64;
    println!("10 options, per-option budget {n}, eps = {eps}, {trials} trials");
    println!("{:<20} {:>12} {:>12}", "radius", "work saved", "survivors");
    for (name, kind) in [
        ("hoeffding", RaceRadius::Hoeffding),
        ("empirical bernstein", RaceRadius::EmpiricalBernstein),
    ] {
        let results: Vec<(f64, usize)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = replication_rng(4, t);
                let out = race(&options, eps, n, kind, &mut rng);
                (out.work_saved, out.survivors.len())
            })
            .collect();
        let saved = results.iter().map(|r| r.0).sum::<f64>() / trials as f64;
        let survivors = results.iter().map(|r| r.1 as f64).sum::<f64>() / trials as f64;
        println!("{name:<20} {:>11.1}% {survivors:>12.1}", 100.0 * saved);
    }
}
