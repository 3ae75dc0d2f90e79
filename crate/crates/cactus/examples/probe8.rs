use cactus::experiments::*;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let cfg = ExperimentConfig {
        seed: 20260809,
        replicas: 10_000,
        tree_edges: 10_000,
        workers: 2,
        ..ExperimentConfig::default()
    };
    let report = separating_cycle(&cfg).unwrap();
    println!("separating cycle took {:.1} s", t0.elapsed().as_secs_f64());
    for row in &report.rows {
        println!("  {} = {:.5} (se {:.5}, ref {:.3})", row.name, row.estimate, row.std_error, row.reference);
    }
}
