use cactus::boltzmann::{ConditionedSampler, MapSampler, RootKind, WeightSeq};
use cactus::rng::task_rng;
use std::time::Instant;

fn main() {
    let q3 = WeightSeq::delta(3, 1.0);
    let s3 = MapSampler::tune(&q3).unwrap();
    let cs = ConditionedSampler::new(&s3.laws, RootKind::Type1).unwrap();
    for &n in &[1000usize, 1500, 2000] {
        let t0 = Instant::now();
        let mut tries = 0u64;
        let reps = 3;
        for r in 0..reps {
            let mut rng = task_rng(5, n as u64, r);
            let (tree, stats) = cs.sample(n - 1, &mut rng, u64::MAX).unwrap();
            tries += stats.tries;
            std::hint::black_box(tree.n_vertices());
        }
        println!(
            "tri n={n}: {:.0} ms/map, {:.0} tries/map",
            t0.elapsed().as_secs_f64() * 1000.0 / reps as f64,
            tries as f64 / reps as f64
        );
    }
    // attainability scan around 1500 and 4000
    for m in [999usize, 1499, 1999, 3999] {
        println!("type1={m} attainable: {}", cs.lattice().attainable(m));
    }
}
