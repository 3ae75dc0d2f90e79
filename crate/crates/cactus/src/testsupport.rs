//! Brute-force oracles and random instance generators shared by the unit and
//! acceptance test suites. Nothing here is used by the library proper; the
//! oracles deliberately take the dumbest correct route so they stay
//! independent of the implementations they check.

use rand::Rng;

use crate::boltzmann::WeightSeq;
use crate::graph::PointedGraph;

/// Random connected pointed graph with `1..=max_n` vertices: a random
/// attachment tree plus Bernoulli extra edges, root uniform.
pub fn random_connected_graph<R: Rng>(rng: &mut R, max_n: usize) -> PointedGraph {
    let n = rng.gen_range(1..=max_n);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    let p: f64 = rng.gen::<f64>() * rng.gen::<f64>(); // favor sparse graphs
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let root = rng.gen_range(0..n);
    PointedGraph::new(n, edges, root).expect("construction keeps the tree connected")
}

/// All-pairs shortest paths by Floyd-Warshall; `usize::MAX / 4` stands for
/// "unreachable" (never returned for connected inputs).
pub fn floyd_warshall(g: &PointedGraph) -> Vec<Vec<usize>> {
    let n = g.n_vertices();
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for v in 0..n {
        d[v][v] = 0;
    }
    for &(u, v) in g.edges() {
        d[u as usize][v as usize] = 1;
        d[v as usize][u as usize] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Maximin over *simple* paths by exhaustive enumeration. Vertex repetition
/// never helps the maximin objective, so this equals the maximum over all
/// paths. Exponential; keep graphs tiny.
pub fn enumerate_maximin(g: &PointedGraph, v: usize, w: usize) -> u32 {
    let h = g.heights();
    let mut visited = vec![false; g.n_vertices()];
    visited[v] = true;
    let mut best = 0u32;
    dfs(g, &h, v, w, h[v], &mut visited, &mut best);
    best
}

fn dfs(
    g: &PointedGraph,
    h: &[u32],
    at: usize,
    target: usize,
    min_on_path: u32,
    visited: &mut [bool],
    best: &mut u32,
) {
    if at == target {
        *best = (*best).max(min_on_path);
        return;
    }
    for &nb in g.neighbors(at) {
        let nb = nb as usize;
        if !visited[nb] {
            visited[nb] = true;
            dfs(g, h, nb, target, min_on_path.min(h[nb]), visited, best);
            visited[nb] = false;
        }
    }
}

// --- grid-scan criticality oracle ---------------------------------------
//
// Locates the critical scale by pure bracketing and grid refinement, with
// its own naive series evaluation. No Newton steps and no code shared with
// the production tuner beyond the weight container.

fn naive_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k.min(n - k) {
        num *= (n - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as f64 + ((num % den) as f64 / den as f64)
}

fn naive_bullet(q: &WeightSeq, x: f64, y: f64) -> f64 {
    let mut total = 0.0;
    for d in q.support() {
        if d < 2 {
            continue;
        }
        for k in 0..=(d - 2) / 2 {
            let kp = d - 2 - 2 * k;
            total += q.weight(d)
                * naive_binom((2 * k + kp + 1) as u64, (k + 1) as u64)
                * naive_binom((k + kp) as u64, k as u64)
                * x.powi(k as i32)
                * y.powi(kp as i32);
        }
    }
    total
}

fn naive_diamond(q: &WeightSeq, x: f64, y: f64) -> f64 {
    let mut total = 0.0;
    for d in q.support() {
        for k in 0..=(d - 1) / 2 {
            let kp = d - 1 - 2 * k;
            total += q.weight(d)
                * naive_binom((2 * k + kp) as u64, k as u64)
                * naive_binom((k + kp) as u64, k as u64)
                * x.powi(k as i32)
                * y.powi(kp as i32);
        }
    }
    total
}

/// Solves `a f_bullet(x, y) = 1 - 1/x` for `y >= 0` by bisection;
/// `f_bullet` is nondecreasing in `y`. `None` when even `y = 0` overshoots.
fn y_on_curve(q: &WeightSeq, a: f64, x: f64) -> Option<f64> {
    let rhs = 1.0 - 1.0 / x;
    if a * naive_bullet(q, x, 0.0) > rhs {
        return None;
    }
    let mut hi = 1.0;
    let mut guard = 0;
    while a * naive_bullet(q, x, hi) < rhs {
        hi *= 2.0;
        guard += 1;
        if guard > 300 {
            return None; // no y-dependence reaches the target
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if a * naive_bullet(q, x, mid) < rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Signed clearance of the second equation along the first equation's curve.
fn curve_gap(q: &WeightSeq, a: f64, x: f64) -> f64 {
    match y_on_curve(q, a, x) {
        Some(y) => a * naive_diamond(q, x, y) - y,
        None => f64::INFINITY,
    }
}

/// Minimum of the clearance over a refined x-grid; also returns the argmin.
fn min_gap(q: &WeightSeq, a: f64, rounds: usize, pts: usize) -> (f64, f64) {
    let mut lo = 1.0 + 1e-9;
    let mut hi = 64.0;
    let mut best = (f64::INFINITY, lo);
    for _ in 0..rounds {
        best = (f64::INFINITY, lo);
        for i in 0..=pts {
            let x = lo + (hi - lo) * i as f64 / pts as f64;
            let gap = curve_gap(q, a, x);
            if gap < best.0 {
                best = (gap, x);
            }
        }
        let step = (hi - lo) / pts as f64;
        lo = (best.1 - 2.0 * step).max(1.0 + 1e-9);
        hi = best.1 + 2.0 * step;
    }
    best
}

/// Critical scale and tangency point located purely by dense grid scans:
/// bisection over `a` on curve-crossing, then argmin refinement in `x` with
/// a final parabolic vertex estimate, then bisection in `y`.
pub fn grid_scan_critical(q: &WeightSeq) -> (f64, f64, f64) {
    let max_w = q.support().map(|d| q.weight(d)).fold(0.0f64, f64::max);
    let mut a_lo = 1e-4 / max_w;
    let solvable = |a: f64| min_gap(q, a, 3, 800).0 <= 0.0;
    let mut guard = 0;
    while !solvable(a_lo) {
        a_lo *= 0.5;
        guard += 1;
        assert!(guard < 100, "oracle found no admissible scale");
    }
    let mut a_hi = a_lo * 2.0;
    guard = 0;
    while solvable(a_hi) {
        a_hi *= 2.0;
        guard += 1;
        assert!(guard < 100, "oracle found no supercritical scale");
    }
    for _ in 0..100 {
        let mid = 0.5 * (a_lo + a_hi);
        if solvable(mid) {
            a_lo = mid;
        } else {
            a_hi = mid;
        }
    }
    let a_c = a_lo;
    // Argmin in x with a parabolic final estimate.
    let (_, x0) = min_gap(q, a_c, 7, 1000);
    let h = 1e-6;
    let (gm, g0, gp) = (
        curve_gap(q, a_c, x0 - h),
        curve_gap(q, a_c, x0),
        curve_gap(q, a_c, x0 + h),
    );
    let denom = gm - 2.0 * g0 + gp;
    let x_star = if denom.abs() > 0.0 {
        x0 + h * 0.5 * (gm - gp) / denom
    } else {
        x0
    };
    let y_star = y_on_curve(q, a_c, x_star).expect("tangency point lies on the curve");
    (a_c, x_star, y_star)
}
