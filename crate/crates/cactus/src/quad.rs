//! Adaptive quadrature and the closed-form reference integrals used by the
//! statistical experiments.
//!
//! The Beta(1/4, 1/4) distribution function is computed after the
//! substitution `t = u^4 / (u^4 + (1-u)^4)`, under which the singular
//! integrand `(t(1-t))^{-3/4}` collapses to the smooth weight
//! `4 / sqrt(u^4 + (1-u)^4)`. The ball-probability law is the double
//! integral `4 sqrt(2/pi) int_0^delta du u^2 int_0^inf dl l^{-1/2}
//! exp(-2 l^2 - u^2/(2l))`, with the inner integral regularized by `l = s^2`.

/// Adaptive Simpson integration with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, fm, flm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fb, fm, whole, tol, 48)
}

/// `Gamma(1/4)` via `4 int_0^inf exp(-u^4) du`.
pub fn gamma_quarter() -> f64 {
    4.0 * adaptive_simpson(&|u| (-u.powi(4)).exp(), 0.0, 8.0, 1e-13)
}

fn beta_weight(u: f64) -> f64 {
    4.0 / (u.powi(4) + (1.0 - u).powi(4)).sqrt()
}

/// `B(1/4, 1/4) = int_0^1 (t(1-t))^{-3/4} dt`, regularized.
pub fn beta_quarter_total() -> f64 {
    adaptive_simpson(&beta_weight, 0.0, 1.0, 1e-13)
}

/// Substitution map `u -> t`.
fn beta_subst(u: f64) -> f64 {
    let p = u.powi(4);
    let q = (1.0 - u).powi(4);
    p / (p + q)
}

/// Beta(1/4, 1/4) cumulative distribution function.
pub fn beta_quarter_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    // Invert the substitution by bisection; it is strictly increasing.
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if beta_subst(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    adaptive_simpson(&beta_weight, 0.0, u, 1e-12) / beta_quarter_total()
}

/// Inner factor of the ball-probability law:
/// `g(u) = int_0^inf l^{-1/2} exp(-2l^2 - u^2/(2l)) dl`, via `l = s^2`.
fn ball_inner(u: f64, tol: f64) -> f64 {
    let f = move |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        (-2.0 * s.powi(4) - u * u / (2.0 * s * s)).exp()
    };
    2.0 * adaptive_simpson(&f, 0.0, 4.0, tol)
}

/// `P[d <= delta] = 4 sqrt(2/pi) int_0^delta u^2 g(u) du`.
pub fn ball_probability(delta: f64, tol: f64) -> f64 {
    if delta <= 0.0 {
        return 0.0;
    }
    let outer = adaptive_simpson(
        &|u: f64| u * u * ball_inner(u, tol * 0.1),
        0.0,
        delta,
        tol,
    );
    4.0 * (2.0 / std::f64::consts::PI).sqrt() * outer
}

/// Leading constant of the small-delta cubic law,
/// `2^{5/4} Gamma(1/4) / (3 sqrt(pi))`.
pub fn ball_constant() -> f64 {
    2.0f64.powf(1.25) * gamma_quarter() / (3.0 * std::f64::consts::PI.sqrt())
}

/// Normalizer of the Beta(1/4, 1/4) density, `Gamma(1/2) / Gamma(1/4)^2`.
pub fn beta_quarter_normalizer() -> f64 {
    1.0 / beta_quarter_total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_on_polynomials() {
        let val = adaptive_simpson(&|x| x * x, 0.0, 3.0, 1e-12);
        assert!((val - 9.0).abs() < 1e-10);
        let val = adaptive_simpson(&|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((val - 2.0).abs() < 1e-10);
    }

    #[test]
    fn gamma_quarter_value() {
        // Frozen from the defining integral, cross-checked against the
        // classical value of Gamma(1/4).
        assert!((gamma_quarter() - 3.625_609_908_221_908).abs() < 1e-9);
    }

    #[test]
    fn beta_normalizer_value() {
        // Gamma(1/2)/Gamma(1/4)^2
        let direct = std::f64::consts::PI.sqrt() / gamma_quarter().powi(2);
        assert!((beta_quarter_normalizer() - direct).abs() < 1e-9);
        assert!((beta_quarter_normalizer() - 0.134_837_273_5).abs() < 1e-4);
    }

    #[test]
    fn beta_cdf_is_symmetric() {
        assert!((beta_quarter_cdf(0.5) - 0.5).abs() < 1e-10);
        for &x in &[0.05, 0.2, 0.35] {
            let sym = beta_quarter_cdf(x) + beta_quarter_cdf(1.0 - x);
            assert!((sym - 1.0).abs() < 1e-9, "x = {x}");
        }
        assert_eq!(beta_quarter_cdf(0.0), 0.0);
        assert_eq!(beta_quarter_cdf(1.0), 1.0);
        assert!(beta_quarter_cdf(0.2) > 0.0 && beta_quarter_cdf(0.2) < 0.5);
    }

    #[test]
    fn ball_constant_value() {
        assert!((ball_constant() - 1.6217).abs() < 1e-3, "{}", ball_constant());
    }

    #[test]
    fn ball_probability_matches_cubic_law_for_small_delta() {
        // Relative deviation from the cubic law shrinks with delta; at
        // delta = 0.05 it sits within 10 percent.
        let c = ball_constant();
        let p = ball_probability(0.05, 1e-11);
        let rel = (p - c * 0.05f64.powi(3)).abs() / (c * 0.05f64.powi(3));
        assert!(rel < 0.10, "relative deviation {rel}");
        let p2 = ball_probability(0.01, 1e-12);
        let rel2 = (p2 - c * 0.01f64.powi(3)).abs() / (c * 0.01f64.powi(3));
        assert!(rel2 < rel);
    }

    #[test]
    fn quadrature_resolution_stability() {
        // Tightening the tolerance stands in for doubling the resolution.
        for &d in &[0.05, 0.1, 0.2] {
            let coarse = ball_probability(d, 1e-10);
            let fine = ball_probability(d, 1e-12);
            assert!((coarse - fine).abs() < 1e-8, "delta = {d}");
        }
        let c1 = adaptive_simpson(&beta_weight, 0.0, 1.0, 1e-10);
        let c2 = adaptive_simpson(&beta_weight, 0.0, 1.0, 1e-13);
        assert!((c1 - c2).abs() < 1e-8);
    }
}
