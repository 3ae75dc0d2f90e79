use cactus::boltzmann::{MapSampler, WeightSeq};
use cactus::brownian::LabeledTree;
use cactus::map::MapClass;
use cactus::mobile::LabelSampler;
use cactus::rng::task_rng;
use cactus::stats::ks_two_sample;
use rayon::prelude::*;
use std::collections::HashMap;

fn main() {
    let q = WeightSeq::delta(4, 1.0);
    let ms = MapSampler::tune(&q).unwrap();
    for &n in &[1000usize, 4000] {
        let heights: Vec<u32> = (0..4000u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = task_rng(777, n as u64, i);
                let mut labels = LabelSampler::new();
                let (out, _) = ms
                    .sample_angulation_map(n, MapClass::Positive, &mut rng, &mut labels)
                    .unwrap();
                let g = out.map.to_pointed_graph();
                let h = g.heights();
                use rand::Rng;
                h[rng.gen_range(0..n)]
            })
            .collect();
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for &h in &heights {
            *counts.entry(h).or_default() += 1;
        }
        let p_max = counts.values().copied().max().unwrap() as f64 / heights.len() as f64;
        println!("n={n}: largest one-point atom {:.4} -> KS floor {:.4}", p_max, p_max / 2.0);
        // KS against references of several resolutions
        let scale = (9.0f64 / 8.0).powf(0.25) * ((n - 2) as f64).powf(-0.25);
        let one: Vec<f64> = heights.iter().map(|&h| h as f64 * scale).collect();
        for &nref in &[20_000usize, 40_000, 80_000] {
            let refs: Vec<f64> = (0..20_000u64)
                .into_par_iter()
                .map(|r| {
                    let mut rng = task_rng(778, nref as u64, r);
                    let t = LabeledTree::sample(nref, &mut rng);
                    let v = t.sample_mass_vertex(&mut rng);
                    (t.label_raw(v) - t.min_label_raw()) * t.label_scale()
                })
                .collect();
            println!("  vs ref N={nref}: KS = {:.4}", ks_two_sample(&one, &refs));
        }
    }
}
