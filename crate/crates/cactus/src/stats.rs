//! Kolmogorov-Smirnov statistics and small estimation helpers.

/// Sup-distance between the empirical distribution of `xs` and `cdf`.
/// Panics on empty input.
pub fn ks_vs_cdf(xs: &[f64], cdf: &dyn Fn(f64) -> f64) -> f64 {
    assert!(!xs.is_empty(), "empty sample");
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max((f - (i as f64 + 1.0) / n).abs());
    }
    sup
}

/// Two-sample sup-distance between empirical distribution functions. Tied
/// values are consumed from both samples before the gap is evaluated, so
/// lattice-valued data does not inflate the statistic.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(!xs.is_empty() && !ys.is_empty(), "empty sample");
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).expect("no NaN samples"));
    b.sort_by(|p, q| p.partial_cmp(q).expect("no NaN samples"));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    sup
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn ks_identical_samples() {
        let xs = vec![0.3, 0.1, 0.7, 0.5];
        assert_eq!(ks_two_sample(&xs, &xs), 0.0);
    }

    #[test]
    fn ks_disjoint_supports() {
        let xs = vec![0.1, 0.2, 0.3];
        let ys = vec![5.0, 6.0];
        assert_eq!(ks_two_sample(&xs, &ys), 1.0);
    }

    #[test]
    fn ks_uniform_calibration() {
        let mut rng = crate::rng::task_rng(99, 11, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        let d = ks_vs_cdf(&xs, &|x| x.clamp(0.0, 1.0));
        assert!(d < 0.01, "uniform KS {d}");
        // and two-sample against a second uniform draw
        let ys: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        assert!(ks_two_sample(&xs, &ys) < 0.01);
    }

    #[test]
    fn ks_vs_cdf_simple() {
        // empirical {0.5} vs uniform CDF: sup gap at the atom
        let d = ks_vs_cdf(&[0.5], &|x| x.clamp(0.0, 1.0));
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn slope_recovers_line() {
        let x: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        assert!((ls_slope(&x, &y) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
