use cactus::boltzmann::{ConditionedSampler, MapSampler, RootKind, WeightSeq};
use cactus::rng::task_rng;
use std::time::Instant;

fn main() {
    let q3 = WeightSeq::delta(3, 1.0);
    let s3 = MapSampler::tune(&q3).unwrap();
    let cs = ConditionedSampler::new(&s3.laws, RootKind::Type1).unwrap();
    for &n in &[1200usize, 1500] {
        let t0 = Instant::now();
        let mut tries = 0u64;
        let reps = 24;
        for r in 0..reps {
            let mut rng = task_rng(55, n as u64, r);
            let (_, stats) = cs.sample(n - 1, &mut rng, u64::MAX).unwrap();
            tries += stats.tries;
        }
        let dt = t0.elapsed().as_secs_f64();
        println!(
            "tri n={n}: {:.2} s/map avg ({:.0} tries avg, {:.2} us/try)",
            dt / reps as f64,
            tries as f64 / reps as f64,
            dt * 1e6 / tries as f64
        );
    }
}
