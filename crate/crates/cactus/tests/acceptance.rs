//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with its headline numbers and wall time (visible with `--nocapture`).
//!
//! Criteria 4 and 5 compare the discrete constructions against continuum
//! reference laws at pinned sizes; the tolerances are asserted exactly as
//! stated even where the finite-size gap is known to exceed them (see the
//! per-test comments for the measured behavior).

use std::time::Instant;

use cactus::bdg::{expected_face_degrees, mobile_to_map, verify_distance_identity};
use cactus::boltzmann::{
    det_id_minus_m, sample_mobile_gw, tangency_identity_rhs, tune_critical, BoltzmannError,
    MapSampler, RootKind, WeightSeq,
};
use cactus::experiments::{
    cactus_convergence, separating_cycle, volume_growth, ball_exponent, ConvergenceMode,
    ExperimentConfig,
};
use cactus::graph::{build_cactus, PointedGraph};
use cactus::map::MapClass;
use cactus::mobile::{sample_labels_uniform, LabelSampler, VertexType};
use cactus::rng::task_rng;
use cactus::testsupport::{grid_scan_critical, random_connected_graph};
use rand::Rng;

struct Criterion {
    name: &'static str,
    budget_secs: f64,
    started: Instant,
    failures: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str, budget_secs: f64) -> Self {
        Criterion {
            name,
            budget_secs,
            started: Instant::now(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if !ok {
            self.failures.push(detail);
        }
    }

    fn finish(mut self) {
        let elapsed = self.started.elapsed().as_secs_f64();
        if elapsed > self.budget_secs {
            self.failures
                .push(format!("runtime {elapsed:.1}s exceeds budget {}s", self.budget_secs));
        }
        if self.failures.is_empty() {
            println!("[{}] PASS ({elapsed:.1}s)", self.name);
        } else {
            println!(
                "[{}] FAIL ({elapsed:.1}s): {}",
                self.name,
                self.failures.join("; ")
            );
            panic!("{} failed: {}", self.name, self.failures.join("; "));
        }
    }
}

#[test]
fn acceptance_1_cactus_oracle_equivalence() {
    let mut c = Criterion::new("acceptance 1: cactus oracle equivalence", 30.0);
    let mut rng = task_rng(0xACC1, 1, 0);
    for g_idx in 0..200 {
        let g = random_connected_graph(&mut rng, 12);
        let n = g.n_vertices();
        let tree = build_cactus(&g);
        let h = g.heights();
        for v in 0..n {
            let dv = g.graph_distances(v).expect("valid source");
            // Eq. (2): the root row of the cactus equals the height profile.
            c.check(
                tree.cactus_distance(g.root(), v).unwrap() == h[v],
                format!("graph {g_idx}: root identity at {v}"),
            );
            for w in 0..n {
                let cac = tree.cactus_distance(v, w).unwrap();
                let mm = g.maximin_oracle(v, w).unwrap();
                c.check(
                    cac == h[v] + h[w] - 2 * mm,
                    format!("graph {g_idx}: maximin formula at ({v},{w})"),
                );
                // Eq. (1)
                c.check(
                    cac <= dv[w],
                    format!("graph {g_idx}: cactus exceeds graph distance at ({v},{w})"),
                );
            }
        }
        // Tree property: classes at cactus distance 1 form a tree whose
        // graph distance is the cactus distance.
        let k = tree.classes().len();
        let mut adj = vec![Vec::new(); k];
        let mut edges = 0;
        for a in 0..k as u32 {
            for b in (a + 1)..k as u32 {
                if tree.class_distance(a, b) == 1 {
                    adj[a as usize].push(b);
                    adj[b as usize].push(a);
                    edges += 1;
                }
            }
        }
        c.check(edges == k - 1, format!("graph {g_idx}: class graph edge count"));
        let mut dist = vec![u32::MAX; k];
        let mut queue = std::collections::VecDeque::from([0u32]);
        dist[0] = 0;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x as usize] {
                if dist[y as usize] == u32::MAX {
                    dist[y as usize] = dist[x as usize] + 1;
                    queue.push_back(y);
                }
            }
        }
        c.check(
            dist.iter().all(|&d| d != u32::MAX),
            format!("graph {g_idx}: class graph connected"),
        );
        for a in 0..k as u32 {
            c.check(
                dist[a as usize] == tree.class_distance(0, a),
                format!("graph {g_idx}: class graph distance at {a}"),
            );
        }
    }
    c.finish();
}

#[test]
fn acceptance_2_bdg_integrity() {
    let mut c = Criterion::new("acceptance 2: corner-chord integrity", 300.0);
    let q4 = MapSampler::tune(&WeightSeq::delta(4, 1.0)).unwrap();
    let q3 = MapSampler::tune(&WeightSeq::delta(3, 1.0)).unwrap();
    let mut labels = LabelSampler::new();
    let mut rng = task_rng(0xACC2, 2, 0);
    let mut cor44_checked = 0usize;
    let mut largest = 0usize;
    for i in 0..10_000 {
        // Mixed weights and variants; every 500th mobile is forced large so
        // the size range genuinely stretches toward 10^4 edges.
        let (laws, variant) = match i % 5 {
            0 => (&q4.laws, MapClass::Positive),
            1 => (&q4.laws, MapClass::Negative),
            2 => (&q3.laws, MapClass::Positive),
            3 => (&q3.laws, MapClass::Negative),
            _ => (&q3.laws, MapClass::Null),
        };
        let root = RootKind::for_variant(variant);
        let min_size = if i % 500 == 250 {
            [2000, 4000, 6000, 8000][(i / 500) % 4]
        } else {
            1
        };
        let tree = loop {
            match sample_mobile_gw(laws, root, &mut rng, 10_001) {
                Ok(t) if t.n_vertices() >= min_size => break t,
                Ok(_) => continue,
                Err(BoltzmannError::SizeCapExceeded(_)) => continue,
                Err(e) => panic!("{e}"),
            }
        };
        largest = largest.max(tree.n_edges());
        let mobile = sample_labels_uniform(&tree, &mut labels, &mut rng);
        // Euler holds by construction or the next call panics.
        let out = mobile_to_map(&mobile, variant).expect("Euler-valid rotation system");
        c.check(
            verify_distance_identity(&out, &mobile),
            format!("mobile {i}: distance identity"),
        );
        if !out.map.is_vertex_map() {
            let mut degs: Vec<usize> = out.map.faces().iter().map(|f| f.degree).collect();
            degs.sort_unstable();
            c.check(
                degs == expected_face_degrees(&mobile),
                format!("mobile {i}: face-degree bookkeeping"),
            );
            c.check(
                out.map.n_vertices()
                    == mobile.tree.count_type(VertexType::T1) + 1,
                format!("mobile {i}: vertex count"),
            );
        }
        // Sandwich bound on a 100-map subsample.
        if i % 100 == 50 && !out.map.is_vertex_map() {
            cor44_checked += 1;
            let g = out.map.to_pointed_graph();
            let cactus = build_cactus(&g);
            let max_deg =
                out.map.faces().iter().map(|f| f.degree).max().unwrap() as i64;
            let t1: Vec<u32> = (0..mobile.tree.n_vertices() as u32)
                .filter(|&v| mobile.tree.vertex_type(v) == VertexType::T1)
                .collect();
            let pairs = if t1.len() <= 40 {
                let mut all = Vec::new();
                for &u in &t1 {
                    for &v in &t1 {
                        all.push((u, v));
                    }
                }
                all
            } else {
                (0..400)
                    .map(|_| {
                        (
                            t1[rng.gen_range(0..t1.len())],
                            t1[rng.gen_range(0..t1.len())],
                        )
                    })
                    .collect()
            };
            for (u, v) in pairs {
                let mu = out.tree_to_map[u as usize].unwrap() as usize;
                let mv = out.tree_to_map[v as usize].unwrap() as usize;
                let dc = cactus.cactus_distance(mu, mv).unwrap() as i64;
                let path_min = mobile
                    .tree
                    .even_path(u, v)
                    .into_iter()
                    .map(|w| mobile.label(w))
                    .min()
                    .unwrap();
                let formula = mobile.label(u) + mobile.label(v) - 2 * path_min;
                c.check(
                    (dc - formula).abs() <= 2 * max_deg + 2,
                    format!("mobile {i}: sandwich bound at ({u},{v})"),
                );
            }
        }
    }
    c.check(
        cor44_checked >= 100,
        format!("only {cor44_checked} maps in the sandwich subsample"),
    );
    c.check(largest >= 8000, format!("largest mobile had {largest} edges"));
    c.finish();
}

#[test]
fn acceptance_3_criticality_solver() {
    let mut c = Criterion::new("acceptance 3: criticality solver", 60.0);
    // Quadrangulations against the analytic tangency.
    let q4 = WeightSeq::delta(4, 1.0);
    let p4 = tune_critical(&q4).unwrap();
    c.check(
        (p4.a_c - 1.0 / 12.0).abs() < 1e-10,
        format!("tuned weight {} vs 1/12", p4.a_c),
    );
    c.check((p4.x - 2.0).abs() < 1e-10, format!("x {} vs 2", p4.x));
    // Triangulations against the independent grid-scan oracle.
    let q3 = WeightSeq::delta(3, 1.0);
    let p3 = tune_critical(&q3).unwrap();
    let (a_or, x_or, y_or) = grid_scan_critical(&q3);
    c.check(
        (p3.a_c - a_or).abs() < 1e-8,
        format!("a_c {} vs oracle {a_or}", p3.a_c),
    );
    c.check((p3.x - x_or).abs() < 1e-8, format!("x {} vs oracle {x_or}", p3.x));
    c.check((p3.y - y_or).abs() < 1e-8, format!("y {} vs oracle {y_or}", p3.y));
    // Determinant identity at 100 random points, relative 1e-9.
    let mut rng = task_rng(0xACC3, 3, 0);
    for trial in 0..100 {
        let q = WeightSeq::new([
            (3, 0.05 + rng.gen::<f64>()),
            (4 + trial % 5, 0.05 + rng.gen::<f64>()),
        ])
        .unwrap();
        let x = 1.05 + 2.0 * rng.gen::<f64>();
        let y = 0.05 + 2.0 * rng.gen::<f64>();
        let lhs = det_id_minus_m(&q, x, y);
        let rhs = tangency_identity_rhs(&q, x, y);
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        c.check(
            (lhs - rhs).abs() <= 1e-9 * scale,
            format!("determinant identity at trial {trial}: {lhs} vs {rhs}"),
        );
    }
    // Homogeneity to 1e-10.
    for (q, p) in [(&q4, &p4), (&q3, &p3)] {
        for &factor in &[0.5, 3.0, 40.0] {
            let scaled = tune_critical(&q.scaled(factor)).unwrap();
            c.check(
                (scaled.a_c * factor - p.a_c).abs() <= 1e-10 * p.a_c.max(1.0),
                format!("homogeneity at factor {factor}"),
            );
            c.check(
                (scaled.x - p.x).abs() < 1e-10 && (scaled.y - p.y).abs() < 1e-10,
                format!("homogeneity fixed point at factor {factor}"),
            );
        }
    }
    c.finish();
}

#[test]
fn acceptance_4_ball_volume_growth() {
    // The Monte Carlo side of this criterion carries a finite-size excess
    // that decays like a label-lattice shift of order (2N)^(-1/4); at the
    // pinned N = 1e5 it measures +570%/+217%/+89% at the three deltas, so
    // the 5% clauses fail. They are asserted as stated; see the decisions
    // ledger for the measured trend and the independent verification of the
    // quadrature reference.
    let mut c = Criterion::new("acceptance 4: ball-volume growth", 1200.0);
    let cfg = ExperimentConfig {
        seed: 0xACC4,
        replicas: 10_000,
        tree_edges: 100_000,
        pairs_per_replica: 1000,
        deltas: vec![0.05, 0.1, 0.2],
        workers: 0,
        ..ExperimentConfig::default()
    };
    let report = volume_growth(&cfg).unwrap();
    for &delta in &cfg.deltas {
        let row = report.row(&format!("p_le[{delta}]")).unwrap();
        let rel = (row.estimate - row.reference).abs() / row.reference;
        c.check(
            rel <= 0.05,
            format!(
                "delta {delta}: Monte Carlo {:.4e} vs quadrature {:.4e} ({:+.1}%)",
                row.estimate,
                row.reference,
                100.0 * (row.estimate - row.reference) / row.reference
            ),
        );
    }
    // Small-delta cubic law against the quadrature at the smallest delta.
    let quad_row = report.row("p_le[0.05]").unwrap();
    let cubic_row = report.row("p_le_cubic[0.05]").unwrap();
    let rel = (quad_row.reference - cubic_row.reference).abs() / cubic_row.reference;
    c.check(
        rel <= 0.10,
        format!("cubic-law consistency at delta 0.05: {:.2}%", 100.0 * rel),
    );
    c.finish();
}

#[test]
fn acceptance_5_separating_cycle() {
    // The volume-split law converges to Beta(1/4,1/4) like N^(-1/4) (KS
    // 0.038 / 0.027 / 0.019 at N = 1e4 / 4e4 / 1.6e5) with the gap pinned at
    // the endpoint mass floor 1/(2N); at the stated N = 1e4 the 0.03
    // threshold is below the measured value. Asserted as stated; analysis
    // in the decisions ledger.
    let mut c = Criterion::new("acceptance 5: separating-cycle volume split", 600.0);
    let cfg = ExperimentConfig {
        seed: 0xACC5,
        replicas: 10_000,
        tree_edges: 10_000,
        workers: 0,
        ..ExperimentConfig::default()
    };
    let report = separating_cycle(&cfg).unwrap();
    let ks = report.row("ks_vol_vs_beta").unwrap();
    c.check(
        ks.estimate < 0.03,
        format!("KS vs Beta(1/4,1/4): {:.4}", ks.estimate),
    );
    let mean = report.row("mean_vol1").unwrap();
    c.check(
        (mean.estimate - 0.5).abs() <= 4.0 * mean.std_error,
        format!("mean {} +- {}", mean.estimate, mean.std_error),
    );
    let cross = report.row("ks_vol_vs_arcsine_oracle").unwrap();
    c.check(
        cross.estimate < 0.03,
        format!("cross-oracle KS {:.4}", cross.estimate),
    );
    c.finish();
}

#[test]
fn acceptance_6_cactus_convergence() {
    let mut c = Criterion::new("acceptance 6: cactus convergence", 3600.0);
    // Uniform quadrangulations at n = 1000 and 4000 vertices.
    let cfg = ExperimentConfig {
        seed: 0xACC6,
        map_sizes: vec![1000, 4000],
        maps_per_size: 2500,
        ref_replicas: 40_000,
        tree_edges: 10_000,
        workers: 0,
        ..ExperimentConfig::default()
    };
    let report =
        cactus_convergence(&cfg, &ConvergenceMode::BipartiteAngulation { p: 2 }).unwrap();
    let ks1_small = report.row("ks_one_point[1000]").unwrap().estimate;
    let ks1_large = report.row("ks_one_point[4000]").unwrap().estimate;
    let ks2_small = report.row("ks_two_point[1000]").unwrap().estimate;
    let ks2_large = report.row("ks_two_point[4000]").unwrap().estimate;
    c.check(
        ks1_large < 0.05,
        format!("one-point KS at n=4000: {ks1_large:.4}"),
    );
    c.check(
        ks1_large < ks1_small,
        format!("one-point trend: {ks1_small:.4} -> {ks1_large:.4}"),
    );
    c.check(
        ks2_large < ks2_small,
        format!("two-point trend: {ks2_small:.4} -> {ks2_large:.4}"),
    );
    // One non-bipartite family: triangulations, constant fitted on the
    // one-point statistic, shape tested on the two-point statistic.
    let cfg3 = ExperimentConfig {
        seed: 0xACC6 + 1,
        map_sizes: vec![1500],
        maps_per_size: 800,
        ref_replicas: 40_000,
        tree_edges: 10_000,
        workers: 0,
        ..ExperimentConfig::default()
    };
    let report3 = cactus_convergence(
        &cfg3,
        &ConvergenceMode::General {
            q: WeightSeq::delta(3, 1.0),
        },
    )
    .unwrap();
    let ks2_tri = report3.row("ks_two_point[1500]").unwrap().estimate;
    let b = report3.row("fitted_b[1500]").unwrap().estimate;
    c.check(
        ks2_tri < 0.07,
        format!("triangulation two-point KS after fit: {ks2_tri:.4} (B = {b:.4})"),
    );
    c.finish();
}

#[test]
fn acceptance_7_determinism() {
    let mut c = Criterion::new("acceptance 7: replica determinism", 600.0);
    let base = ExperimentConfig {
        seed: 0xACC7,
        replicas: 200,
        tree_edges: 400,
        pairs_per_replica: 25,
        deltas: vec![0.2, 0.4],
        map_sizes: vec![40, 80],
        maps_per_size: 60,
        ref_replicas: 200,
        ..ExperimentConfig::default()
    };
    // Reports from every engine, as (csv, json-sans-worker-echo) pairs.
    let run_all = |workers: usize| -> Vec<(String, String)> {
        let mut cfg = base.clone();
        cfg.workers = workers;
        let scrub = |report: &cactus::experiments::StatReport| {
            let json: String = report
                .to_json()
                .lines()
                .filter(|l| !l.contains("\"workers\""))
                .collect::<Vec<_>>()
                .join("\n");
            (report.to_csv(), json)
        };
        vec![
            scrub(&volume_growth(&cfg).unwrap()),
            scrub(&separating_cycle(&cfg).unwrap()),
            scrub(&ball_exponent(&cfg).unwrap()),
            scrub(
                &cactus_convergence(&cfg, &ConvergenceMode::BipartiteAngulation { p: 2 })
                    .unwrap(),
            ),
        ]
    };
    let names = ["volume-growth", "separating-cycle", "ball-exponent", "convergence"];
    let baseline = run_all(1);
    for workers in [2usize, 5] {
        let reports = run_all(workers);
        for (i, name) in names.iter().enumerate() {
            c.check(
                baseline[i].0 == reports[i].0,
                format!("{name} CSV differs between 1 and {workers} workers"),
            );
            c.check(
                baseline[i].1 == reports[i].1,
                format!("{name} JSON differs between 1 and {workers} workers"),
            );
        }
    }
    c.finish();
}
