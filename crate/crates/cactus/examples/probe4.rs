use cactus::experiments::*;

fn main() {
    for &(n, reps) in &[(10_000usize, 4000usize), (100_000, 2000), (400_000, 1000)] {
        let cfg = ExperimentConfig {
            seed: 99,
            replicas: reps,
            tree_edges: n,
            pairs_per_replica: 1000,
            deltas: vec![0.2],
            workers: 2,
            ..ExperimentConfig::default()
        };
        let report = volume_growth(&cfg).unwrap();
        let row = report.row("p_le[0.2]").unwrap();
        println!(
            "N={n}: mc {:.5e} (se {:.1e}) quad {:.5e} ratio {:.3}",
            row.estimate, row.std_error, row.reference,
            row.estimate / row.reference
        );
    }
}
