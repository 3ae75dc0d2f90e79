use cactus::boltzmann::{MapSampler, WeightSeq};
use cactus::brownian::LabeledTree;
use cactus::graph::build_cactus;
use cactus::map::MapClass;
use cactus::mobile::LabelSampler;
use cactus::rng::task_rng;
use std::time::Instant;

fn main() {
    // reference replica cost
    let t0 = Instant::now();
    for r in 0..2000u64 {
        let mut rng = task_rng(1, 0, r);
        let t = LabeledTree::sample(10_000, &mut rng);
        let v = t.sample_mass_vertex(&mut rng);
        let w = t.sample_mass_vertex(&mut rng);
        std::hint::black_box((t.label_raw(v), t.kac_distance(v, w), t.min_label_raw()));
    }
    println!("ref replica: {:.3} ms", t0.elapsed().as_secs_f64() * 1000.0 / 2000.0);

    let q = WeightSeq::delta(4, 1.0);
    let ms = MapSampler::tune(&q).unwrap();
    for &n in &[1000usize, 4000] {
        let t0 = Instant::now();
        let reps = 40u64;
        for r in 0..reps {
            let mut rng = task_rng(2, n as u64, r);
            let mut labels = LabelSampler::new();
            let t1 = Instant::now();
            let (out, _m) = ms
                .sample_angulation_map(n, MapClass::Positive, &mut rng, &mut labels)
                .unwrap();
            let t_sample = t1.elapsed();
            let t2 = Instant::now();
            let g = out.map.to_pointed_graph();
            let cactus = build_cactus(&g);
            let h = g.heights();
            std::hint::black_box((cactus.classes().len(), h[0]));
            if r == 0 {
                println!(
                    "n={n}: sample {:.1} ms, graph+cactus {:.1} ms",
                    t_sample.as_secs_f64() * 1000.0,
                    t2.elapsed().as_secs_f64() * 1000.0
                );
            }
        }
        println!(
            "quad fast map n={n} total: {:.1} ms/map",
            t0.elapsed().as_secs_f64() * 1000.0 / reps as f64
        );
    }
}
