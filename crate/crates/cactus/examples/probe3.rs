use cactus::experiments::*;
use std::time::Instant;

fn main() {
    // Criterion 4 at full scale: N = 1e5, 1e4 replicas, 1000 pairs each.
    let cfg = ExperimentConfig {
        seed: 20260809,
        replicas: 10_000,
        tree_edges: 100_000,
        pairs_per_replica: 1000,
        deltas: vec![0.05, 0.1, 0.2],
        workers: 2,
        ..ExperimentConfig::default()
    };
    let t0 = Instant::now();
    let report = volume_growth(&cfg).unwrap();
    println!("volume growth took {:.1} s", t0.elapsed().as_secs_f64());
    for row in &report.rows {
        if row.name.starts_with("p_le[") {
            let rel = (row.estimate - row.reference) / row.reference;
            println!(
                "{}: mc {:.6e} se {:.1e} quad {:.6e} rel {:+.2}%",
                row.name, row.estimate, row.std_error, row.reference, 100.0 * rel
            );
        }
    }
}
