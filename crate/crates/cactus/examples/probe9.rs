use cactus::brownian::LabeledTree;
use cactus::quad::beta_quarter_cdf;
use cactus::rng::task_rng;
use cactus::stats::ks_vs_cdf;
use rayon::prelude::*;

fn main() {
    for &(n, reps) in &[(10_000usize, 10_000u64), (40_000, 8_000), (160_000, 4_000)] {
        let vols: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = task_rng(777, n as u64, r);
                let t = LabeledTree::sample(n, &mut rng);
                t.separating_split(&mut rng).unwrap().0
            })
            .collect();
        let ks = ks_vs_cdf(&vols, &beta_quarter_cdf);
        // locate the worst gap
        let mut sorted = vols.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = sorted.len() as f64;
        let mut worst = (0.0f64, 0.0f64);
        for (i, &x) in sorted.iter().enumerate() {
            let gap = (beta_quarter_cdf(x) - (i as f64 + 1.0) / m).abs()
                .max((beta_quarter_cdf(x) - i as f64 / m).abs());
            if gap > worst.0 {
                worst = (gap, x);
            }
        }
        println!("N={n}: KS {ks:.4} (worst gap at vol={:.5})", worst.1);
    }
}
