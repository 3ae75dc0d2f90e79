use cactus::boltzmann::WeightSeq;
use cactus::experiments::*;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let cfg = ExperimentConfig {
        seed: 20260809,
        map_sizes: vec![1000, 4000],
        maps_per_size: 2500,
        ref_replicas: 40_000,
        tree_edges: 10_000,
        workers: 2,
        ..ExperimentConfig::default()
    };
    let mode = ConvergenceMode::BipartiteAngulation { p: 2 };
    let report = cactus_convergence(&cfg, &mode).unwrap();
    println!("quad convergence took {:.1} s", t0.elapsed().as_secs_f64());
    for row in &report.rows {
        println!("  {} = {:.4}", row.name, row.estimate);
    }
    let t0 = Instant::now();
    let cfg3 = ExperimentConfig {
        seed: 20260810,
        map_sizes: vec![1500],
        maps_per_size: 800,
        ref_replicas: 40_000,
        tree_edges: 10_000,
        workers: 2,
        ..ExperimentConfig::default()
    };
    let mode3 = ConvergenceMode::General {
        q: WeightSeq::delta(3, 1.0),
    };
    let report3 = cactus_convergence(&cfg3, &mode3).unwrap();
    println!("tri convergence took {:.1} s", t0.elapsed().as_secs_f64());
    for row in &report3.rows {
        println!("  {} = {:.4}", row.name, row.estimate);
    }
}
