//! Calibration cross-check of the shipped cleaning defaults.
use gls_granger::bench::{run_benchmark, BenchConfig, Scenario};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let cfg = BenchConfig {
        pairs: 150,
        scenarios: vec![Scenario::M1, Scenario::M2, Scenario::M3, Scenario::Ar1],
        ..BenchConfig::default()
    };
    let rep = run_benchmark(&cfg).unwrap();
    println!("{rep}");
    println!("elapsed {:?}", t0.elapsed());
    for d in rep.diagnostics.iter().take(5) {
        println!("diag: {d}");
    }
}
