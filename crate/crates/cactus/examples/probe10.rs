use cactus::boltzmann::{MapSampler, WeightSeq};
use cactus::brownian::LabeledTree;
use cactus::map::MapClass;
use cactus::mobile::LabelSampler;
use cactus::rng::task_rng;
use cactus::stats::{ks_two_sample, median};
use rayon::prelude::*;

fn main() {
    // map one-point at n = 4000 (quadrangulations)
    let q = WeightSeq::delta(4, 1.0);
    let ms = MapSampler::tune(&q).unwrap();
    let n = 4000usize;
    let maps: Vec<(f64, f64)> = (0..2500u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(31337, 1, i);
            let mut labels = LabelSampler::new();
            let (out, _) = ms
                .sample_angulation_map(n, MapClass::Positive, &mut rng, &mut labels)
                .unwrap();
            let g = out.map.to_pointed_graph();
            let h = g.heights();
            use rand::Rng;
            let v = rng.gen_range(0..n);
            let scale = (9.0f64 / 8.0).powf(0.25) * ((n - 2) as f64).powf(-0.25);
            (h[v] as f64 * scale, (h[v] as f64 - 1.0) * scale)
        })
        .collect();
    let one: Vec<f64> = maps.iter().map(|&(a, _)| a).collect();
    let one_shift: Vec<f64> = maps.iter().map(|&(_, b)| b).collect();
    println!("map one-point median {:.4} (shifted {:.4})", median(&one), median(&one_shift));
    for &nref in &[10_000usize, 40_000, 160_000] {
        let refs: Vec<f64> = (0..20_000u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = task_rng(31337, 2 + nref as u64, r);
                let t = LabeledTree::sample(nref, &mut rng);
                let v = t.sample_mass_vertex(&mut rng);
                (t.label_raw(v) - t.min_label_raw()) * t.label_scale()
            })
            .collect();
        println!(
            "ref N={nref}: median {:.4}; KS(map, ref) = {:.4}; KS(map-1, ref) = {:.4}",
            median(&refs),
            ks_two_sample(&one, &refs),
            ks_two_sample(&one_shift, &refs)
        );
    }
}
