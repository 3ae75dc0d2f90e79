use std::time::Instant;
use cactus::boltzmann::{MapSampler, WeightSeq};
use cactus::brownian::LabeledTree;
use cactus::map::MapClass;
use cactus::mobile::LabelSampler;
use cactus::rng::task_rng;

fn main() {
    // Tree cost at N = 1e5 with 1000 pair queries
    let t0 = Instant::now();
    let mut rng = task_rng(1, 0, 0);
    let reps = 50;
    for r in 0..reps {
        let mut rng = task_rng(1, 0, r);
        let t = LabeledTree::sample(100_000, &mut rng);
        let mut acc = 0.0;
        for _ in 0..1000 {
            let u = t.sample_mass_vertex(&mut rng);
            let v = t.sample_mass_vertex(&mut rng);
            acc += t.kac_distance(u, v);
        }
        std::hint::black_box(acc);
    }
    println!("tree N=1e5 + 1000 pairs: {:.2} ms/replica", t0.elapsed().as_secs_f64()*1000.0/reps as f64);

    // Split cost at N = 1e4
    let t0 = Instant::now();
    let reps = 200;
    for r in 0..reps {
        let mut rng = task_rng(2, 0, r);
        let t = LabeledTree::sample(10_000, &mut rng);
        let s = t.separating_split(&mut rng).unwrap();
        let a = t.arc_sine_split(&mut rng);
        std::hint::black_box((s, a));
    }
    println!("split N=1e4: {:.2} ms/replica", t0.elapsed().as_secs_f64()*1000.0/reps as f64);

    // Map sampling at n = 1000 and 4000, quadrangulations
    let q = WeightSeq::delta(4, 1.0);
    let sampler = MapSampler::tune(&q).unwrap();
    for &n in &[1000usize, 4000] {
        let t0 = Instant::now();
        let reps = if n == 1000 { 12 } else { 4 };
        let mut tries = 0u64;
        for r in 0..reps {
            let mut rng = task_rng(3, n as u64, r);
            let mut labels = LabelSampler::new();
            let (out, _) = sampler.sample_map(n, MapClass::Positive, &mut rng, &mut labels, u64::MAX).unwrap();
            std::hint::black_box(out.map.n_vertices());
        }
        println!("quad map n={n}: {:.0} ms/map", t0.elapsed().as_secs_f64()*1000.0/reps as f64);
        let _ = tries;
    }

    // Triangulations at n = 4000
    let q3 = WeightSeq::delta(3, 1.0);
    let s3 = MapSampler::tune(&q3).unwrap();
    let t0 = Instant::now();
    let reps = 4;
    for r in 0..reps {
        let mut rng = task_rng(4, 0, r);
        let mut labels = LabelSampler::new();
        let (out, _) = s3.sample_map(4000, MapClass::Positive, &mut rng, &mut labels, u64::MAX).unwrap();
        std::hint::black_box(out.map.n_vertices());
    }
    println!("tri map n=4000: {:.0} ms/map", t0.elapsed().as_secs_f64()*1000.0/reps as f64);
    let _ = rng;
}
