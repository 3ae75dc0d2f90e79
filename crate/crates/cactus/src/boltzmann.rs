//! Weight sequences, the criticality tuner, offspring laws, and conditioned
//! multitype Galton-Watson sampling of mobiles.
//!
//! A finite-support weight sequence `q` is tuned by a scalar `a` so that
//! `a q` is regular critical. In the bipartite case this is a tangency
//! condition between `a f_q(x)` and `1 - 1/x`; in the general case it is the
//! tangency of the two curves `a f_bullet(x, y) = 1 - 1/x` and
//! `a f_diamond(x, y) = y`, tracked by continuation in `a` with a damped
//! Newton solve and finished by a Newton polish of the extended (tangency)
//! system. Criticality is certified by the spectral radius of the associated
//! 3x3 moment matrix.
//!
//! The tuned parameters feed the four-type offspring laws: geometric type-3
//! counts at type-1 vertices, a deterministic type-4 child at type-2
//! vertices, and weighted tables over `(k, k')` child profiles at types 3
//! and 4. Mobiles conditioned on their type-1 vertex count are drawn by
//! exact rejection with early abort once the count overshoots.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::bdg::{mobile_to_map, MapFromMobile};
use crate::map::MapClass;
use crate::mobile::{sample_labels_uniform, FourTypeTree, LabelSampler, Mobile, VertexType};

#[derive(Debug, Error)]
pub enum BoltzmannError {
    #[error("weight sequence invalid: {0}")]
    InvalidWeights(String),
    #[error("criticality solve failed: {0}")]
    NoConvergence(String),
    #[error("offspring table degenerate: {0}")]
    DegenerateTable(String),
    #[error("vertex count {0} is not attainable for these weights")]
    UnreachableCount(usize),
    #[error("sampling budget exhausted after {tries} tries")]
    BudgetExhausted { tries: u64 },
    #[error("size cap {0} exceeded")]
    SizeCapExceeded(usize),
    #[error("variant unavailable: {0}")]
    InvalidVariant(String),
    #[error("malformed weight text: {0}")]
    Parse(String),
}

/// Finite-support face weight sequence, indexed from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSeq {
    /// `q[d]` is the weight of degree `d`; `q[0]` is unused and zero.
    q: Vec<f64>,
}

impl WeightSeq {
    pub fn new(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self, BoltzmannError> {
        let mut q = vec![0.0];
        for (k, w) in pairs {
            if k == 0 {
                return Err(BoltzmannError::InvalidWeights("degree 0 weight".into()));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(BoltzmannError::InvalidWeights(format!("q_{k} = {w}")));
            }
            if k >= q.len() {
                q.resize(k + 1, 0.0);
            }
            q[k] += w;
        }
        while q.len() > 1 && *q.last().unwrap() == 0.0 {
            q.pop();
        }
        let seq = WeightSeq { q };
        if !seq.support().any(|d| d >= 3) {
            return Err(BoltzmannError::InvalidWeights(
                "need q_k > 0 for some k >= 3".into(),
            ));
        }
        Ok(seq)
    }

    /// Point mass `weight` at degree `k`.
    pub fn delta(k: usize, weight: f64) -> Self {
        Self::new([(k, weight)]).expect("single positive weight")
    }

    pub fn scaled(&self, factor: f64) -> Self {
        WeightSeq {
            q: self.q.iter().map(|w| w * factor).collect(),
        }
    }

    pub fn weight(&self, degree: usize) -> f64 {
        self.q.get(degree).copied().unwrap_or(0.0)
    }

    pub fn max_degree(&self) -> usize {
        self.q.len() - 1
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.q
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(d, _)| d)
    }

    pub fn is_bipartite(&self) -> bool {
        self.support().all(|d| d % 2 == 0)
    }

    /// Lines `k q_k`, positive weights only.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for d in self.support() {
            let _ = writeln!(s, "{d} {}", self.q[d]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, BoltzmannError> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let k = it
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| BoltzmannError::Parse(format!("line {}: bad degree", lineno + 1)))?;
            let w = it
                .next()
                .and_then(|t| t.parse::<f64>().ok())
                .ok_or_else(|| BoltzmannError::Parse(format!("line {}: bad weight", lineno + 1)))?;
            pairs.push((k, w));
        }
        Self::new(pairs)
    }
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Value and partial derivatives up to second order of a bivariate series.
#[derive(Debug, Clone, Copy, Default)]
pub struct Eval2 {
    pub f: f64,
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
    pub fxy: f64,
    pub fyy: f64,
}

impl Eval2 {
    fn add_term(&mut self, coef: f64, k: usize, kp: usize, x: f64, y: f64) {
        let (kf, kpf) = (k as f64, kp as f64);
        let xk = x.powi(k as i32);
        let ykp = y.powi(kp as i32);
        self.f += coef * xk * ykp;
        if k >= 1 {
            self.fx += coef * kf * x.powi(k as i32 - 1) * ykp;
        }
        if kp >= 1 {
            self.fy += coef * kpf * xk * y.powi(kp as i32 - 1);
        }
        if k >= 2 {
            self.fxx += coef * kf * (kf - 1.0) * x.powi(k as i32 - 2) * ykp;
        }
        if k >= 1 && kp >= 1 {
            self.fxy += coef * kf * kpf * x.powi(k as i32 - 1) * y.powi(kp as i32 - 1);
        }
        if kp >= 2 {
            self.fyy += coef * kpf * (kpf - 1.0) * xk * y.powi(kp as i32 - 2);
        }
    }
}

/// `f_bullet(x, y) = sum x^k y^k' C(2k+k'+1, k+1) C(k+k', k) q_{2+2k+k'}`.
pub fn eval_bullet(q: &WeightSeq, x: f64, y: f64) -> Eval2 {
    let mut e = Eval2::default();
    for d in q.support() {
        if d < 2 {
            continue;
        }
        let mut k = 0;
        while 2 * k <= d - 2 {
            let kp = d - 2 - 2 * k;
            let coef = q.weight(d) * binom(d - 1, k + 1) * binom(d - 2 - k, k);
            e.add_term(coef, k, kp, x, y);
            k += 1;
        }
    }
    e
}

/// `f_diamond(x, y) = sum x^k y^k' C(2k+k', k) C(k+k', k) q_{1+2k+k'}`.
pub fn eval_diamond(q: &WeightSeq, x: f64, y: f64) -> Eval2 {
    let mut e = Eval2::default();
    for d in q.support() {
        let mut k = 0;
        while 2 * k <= d - 1 {
            let kp = d - 1 - 2 * k;
            let coef = q.weight(d) * binom(d - 1, k) * binom(d - 1 - k, k);
            e.add_term(coef, k, kp, x, y);
            k += 1;
        }
    }
    e
}

/// Bipartite series `f(x) = sum_k x^k C(2k+1, k) q_{2k+2}`; returns
/// `(f, f', f'')`.
pub fn eval_bipartite(q: &WeightSeq, x: f64) -> (f64, f64, f64) {
    let (mut f, mut fx, mut fxx) = (0.0, 0.0, 0.0);
    for d in q.support() {
        if d % 2 != 0 || d < 2 {
            continue;
        }
        let k = (d - 2) / 2;
        let coef = q.weight(d) * binom(2 * k + 1, k);
        f += coef * x.powi(k as i32);
        if k >= 1 {
            fx += coef * k as f64 * x.powi(k as i32 - 1);
        }
        if k >= 2 {
            fxx += coef * k as f64 * (k as f64 - 1.0) * x.powi(k as i32 - 2);
        }
    }
    (f, fx, fxx)
}

/// The 3x3 moment matrix whose spectral radius certifies criticality.
pub fn moment_matrix(q: &WeightSeq, x: f64, y: f64) -> [[f64; 3]; 3] {
    let b = eval_bullet(q, x, y);
    let dm = eval_diamond(q, x, y);
    [
        [0.0, 0.0, x - 1.0],
        [x / y * dm.fx, dm.fy, 0.0],
        [x * x / (x - 1.0) * b.fx, x * y / (x - 1.0) * b.fy, 0.0],
    ]
}

/// Perron root of a nonnegative 3x3 matrix by shifted power iteration.
pub fn spectral_radius(m: &[[f64; 3]; 3]) -> f64 {
    let mut v = [1.0f64; 3];
    let mut lambda = 1.0;
    for _ in 0..4000 {
        let mut w = [0.0f64; 3];
        for i in 0..3 {
            w[i] = v[i]; // +Id shift keeps the iteration aperiodic
            for (j, vj) in v.iter().enumerate() {
                w[i] += m[i][j] * vj;
            }
        }
        let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        for i in 0..3 {
            v[i] = w[i] / norm;
        }
    }
    lambda - 1.0
}

/// `det(Id - M(x, y))`, expanded directly from the matrix entries.
pub fn det_id_minus_m(q: &WeightSeq, x: f64, y: f64) -> f64 {
    let m = moment_matrix(q, x, y);
    let a = [
        [1.0 - m[0][0], -m[0][1], -m[0][2]],
        [-m[1][0], 1.0 - m[1][1], -m[1][2]],
        [-m[2][0], -m[2][1], 1.0 - m[2][2]],
    ];
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// `x^2 det(grad G, grad H)` with `G = f_bullet - 1 + 1/x`, `H = f_diamond - y`.
pub fn tangency_identity_rhs(q: &WeightSeq, x: f64, y: f64) -> f64 {
    let b = eval_bullet(q, x, y);
    let dm = eval_diamond(q, x, y);
    let g = (b.fx - 1.0 / (x * x), b.fy);
    let h = (dm.fx, dm.fy - 1.0);
    x * x * (g.0 * h.1 - g.1 * h.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// Some odd degree carries weight.
    A1,
    /// Support on even degrees only.
    A2,
}

/// Output of the criticality tuner.
#[derive(Debug, Clone)]
pub struct CriticalParams {
    pub a_c: f64,
    pub x: f64,
    pub y: f64,
    pub z_plus: f64,
    pub z_zero: f64,
    pub spectral_radius: f64,
    pub case: Assumption,
    /// Residuals of the two defining equations at `(x, y)`.
    pub residuals: (f64, f64),
}

impl CriticalParams {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "a_c = {:.17e}", self.a_c);
        let _ = writeln!(s, "x = {:.17e}", self.x);
        let _ = writeln!(s, "y = {:.17e}", self.y);
        let _ = writeln!(s, "z_plus = {:.17e}", self.z_plus);
        let _ = writeln!(s, "z_zero = {:.17e}", self.z_zero);
        let _ = writeln!(s, "spectral_radius = {:.17e}", self.spectral_radius);
        let _ = writeln!(s, "case = {:?}", self.case);
        let _ = writeln!(s, "residual_1 = {:.3e}", self.residuals.0);
        let _ = writeln!(s, "residual_2 = {:.3e}", self.residuals.1);
        s
    }
}

const RESIDUAL_TOL: f64 = 1e-10;
const SPECTRAL_TOL: f64 = 1e-8;

/// Damped Newton solve of `a f_bullet = 1 - 1/x`, `a f_diamond = y`,
/// tracking the first-intersection branch (positive tangency determinant).
pub(crate) fn solve_admissible(
    q: &WeightSeq,
    a: f64,
    start: (f64, f64),
) -> Option<(f64, f64, f64)> {
    let scaled = q.scaled(a);
    let (mut x, mut y) = start;
    let eval = |x: f64, y: f64| {
        let b = eval_bullet(&scaled, x, y);
        let d = eval_diamond(&scaled, x, y);
        (b.f - 1.0 + 1.0 / x, d.f - y, b, d)
    };
    let norm = |g: f64, h: f64| g.abs().max(h.abs());
    let (mut g, mut h, mut b, mut d) = eval(x, y);
    for _ in 0..200 {
        if norm(g, h) < 1e-13 {
            let det = (b.fx - 1.0 / (x * x)) * (d.fy - 1.0) - b.fy * d.fx;
            if det <= 0.0 {
                return None; // lost the first branch
            }
            return Some((x, y, det));
        }
        let j00 = b.fx - 1.0 / (x * x);
        let j01 = b.fy;
        let j10 = d.fx;
        let j11 = d.fy - 1.0;
        let det_j = j00 * j11 - j01 * j10;
        if det_j.abs() < 1e-300 {
            return None;
        }
        let dx = (g * j11 - h * j01) / det_j;
        let dy = (h * j00 - g * j10) / det_j;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (nx, ny) = (x - step * dx, y - step * dy);
            if nx > 1.0 + 1e-12 && ny > 0.0 {
                let (ng, nh, nb, nd) = eval(nx, ny);
                if norm(ng, nh) < norm(g, h) {
                    x = nx;
                    y = ny;
                    g = ng;
                    h = nh;
                    b = nb;
                    d = nd;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// Newton polish of the extended system `(G, H, det(grad G, grad H)) = 0` in
/// the unknowns `(a, x, y)`, converging quadratically onto the fold.
fn polish_fold(q: &WeightSeq, a0: f64, x0: f64, y0: f64) -> Option<(f64, f64, f64)> {
    let (mut a, mut x, mut y) = (a0, x0, y0);
    let eval = |a: f64, x: f64, y: f64| {
        let b = eval_bullet(q, x, y);
        let dm = eval_diamond(q, x, y);
        let g = a * b.f - 1.0 + 1.0 / x;
        let h = a * dm.f - y;
        let gx = a * b.fx - 1.0 / (x * x);
        let gy = a * b.fy;
        let hx = a * dm.fx;
        let hy = a * dm.fy - 1.0;
        let det = gx * hy - gy * hx;
        let gxx = a * b.fxx + 2.0 / (x * x * x);
        let gxy = a * b.fxy;
        let gyy = a * b.fyy;
        let hxx = a * dm.fxx;
        let hxy = a * dm.fxy;
        let hyy = a * dm.fyy;
        let det_x = gxx * hy + gx * hxy - gxy * hx - gy * hxx;
        let det_y = gxy * hy + gx * hyy - gyy * hx - gy * hxy;
        let det_a = b.fx * hy + gx * dm.fy - b.fy * hx - gy * dm.fx;
        (
            [g, h, det],
            [[b.f, gx, gy], [dm.f, hx, hy], [det_a, det_x, det_y]],
        )
    };
    let norm3 = |f: &[f64; 3]| f[0].abs().max(f[1].abs()).max(f[2].abs());
    let (mut f, mut jac) = eval(a, x, y);
    for _ in 0..100 {
        if norm3(&f) < 1e-14 {
            return Some((a, x, y));
        }
        let d = solve3(&jac, &f)?;
        let mut ok = false;
        let mut step = 1.0;
        for _ in 0..40 {
            let (na, nx, ny) = (a - step * d[0], x - step * d[1], y - step * d[2]);
            if na > 0.0 && nx > 1.0 + 1e-12 && ny > 0.0 {
                let (nf, njac) = eval(na, nx, ny);
                if norm3(&nf) < norm3(&f) {
                    a = na;
                    x = nx;
                    y = ny;
                    f = nf;
                    jac = njac;
                    ok = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !ok {
            break;
        }
    }
    if norm3(&f) < 1e-11 {
        Some((a, x, y))
    } else {
        None
    }
}

fn solve3(j: &[[f64; 3]; 3], f: &[f64; 3]) -> Option<[f64; 3]> {
    let mut m = [
        [j[0][0], j[0][1], j[0][2], f[0]],
        [j[1][0], j[1][1], j[1][2], f[1]],
        [j[2][0], j[2][1], j[2][2], f[2]],
    ];
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &k| m[i][col].abs().partial_cmp(&m[k][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let factor = m[row][col] / m[col][col];
                for c in col..4 {
                    m[row][c] -= factor * m[col][c];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Tunes `q` to criticality: the unique `a_c` for which `a_c q` is regular
/// critical, with the fixed point `(x, y)` of the defining system.
pub fn tune_critical(q: &WeightSeq) -> Result<CriticalParams, BoltzmannError> {
    if q.is_bipartite() {
        tune_bipartite(q)
    } else {
        tune_general(q)
    }
}

fn tune_bipartite(q: &WeightSeq) -> Result<CriticalParams, BoltzmannError> {
    // The tangency abscissa does not depend on the scale a:
    // phi(x) = (1 - 1/x) x^2 f'(x) - f(x) crosses zero there.
    let phi = |x: f64| {
        let (f, fx, _) = eval_bipartite(q, x);
        (1.0 - 1.0 / x) * x * x * fx - f
    };
    let mut lo = 1.0 + 1e-9;
    if phi(lo) >= 0.0 {
        return Err(BoltzmannError::NoConvergence(
            "no bracketing for the bipartite tangency".into(),
        ));
    }
    let mut hi = 2.0;
    let mut guard = 0;
    while phi(hi) < 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(BoltzmannError::NoConvergence(
                "bipartite tangency bracket not found".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let (f, fx, _) = eval_bipartite(q, x);
    let a_c = (1.0 - 1.0 / x) / f;
    let residuals = (
        (a_c * f - (1.0 - 1.0 / x)).abs(),
        (a_c * fx - 1.0 / (x * x)).abs(),
    );
    // Criticality of the embedded type-1 process: (x - 1) x f'(x)/f(x) = 1.
    let rho = (x - 1.0) * x * fx / f;
    let params = CriticalParams {
        a_c,
        x,
        y: 0.0,
        z_plus: x,
        z_zero: 0.0,
        spectral_radius: rho,
        case: Assumption::A2,
        residuals,
    };
    check_params(&params)?;
    Ok(params)
}

fn tune_general(q: &WeightSeq) -> Result<CriticalParams, BoltzmannError> {
    let max_w = q.support().map(|d| q.weight(d)).fold(0.0f64, f64::max);
    let a_guess = 1.0 / max_w;
    let mut a = a_guess / 16.0;
    let starts = [(1.1, 0.1), (1.01, 0.01), (1.5, 0.5), (2.0, 1.0)];
    let mut sol = None;
    for _ in 0..200 {
        sol = starts.iter().find_map(|&s| solve_admissible(q, a, s));
        if sol.is_some() {
            break;
        }
        a *= 0.5;
    }
    let mut sol =
        sol.ok_or_else(|| BoltzmannError::NoConvergence("no admissible a found".into()))?;
    let mut a_lo = a;
    let mut a_hi = None;
    for _ in 0..200 {
        let next = a_lo * 2.0;
        match solve_admissible(q, next, (sol.0, sol.1)) {
            Some(s) => {
                a_lo = next;
                sol = s;
            }
            None => {
                a_hi = Some(next);
                break;
            }
        }
    }
    let mut a_hi = a_hi.ok_or_else(|| {
        BoltzmannError::NoConvergence("criticality bracket not found by doubling".into())
    })?;
    // Bisect on solvability, warm-starting from the last admissible point.
    for _ in 0..80 {
        let mid = 0.5 * (a_lo + a_hi);
        match solve_admissible(q, mid, (sol.0, sol.1)) {
            Some(s) => {
                a_lo = mid;
                sol = s;
            }
            None => a_hi = mid,
        }
    }
    let (a_c, x, y) = polish_fold(q, a_lo, sol.0, sol.1).ok_or_else(|| {
        BoltzmannError::NoConvergence(format!("fold polish failed near a = {a_lo}"))
    })?;
    let scaled = q.scaled(a_c);
    let b = eval_bullet(&scaled, x, y);
    let d = eval_diamond(&scaled, x, y);
    let residuals = ((b.f - 1.0 + 1.0 / x).abs(), (d.f - y).abs());
    let rho = spectral_radius(&moment_matrix(&scaled, x, y));
    let params = CriticalParams {
        a_c,
        x,
        y,
        z_plus: x,
        z_zero: y * y,
        spectral_radius: rho,
        case: Assumption::A1,
        residuals,
    };
    check_params(&params)?;
    Ok(params)
}

fn check_params(p: &CriticalParams) -> Result<(), BoltzmannError> {
    if p.residuals.0 > RESIDUAL_TOL || p.residuals.1 > RESIDUAL_TOL {
        return Err(BoltzmannError::NoConvergence(format!(
            "residuals too large: {:?}",
            p.residuals
        )));
    }
    if (p.spectral_radius - 1.0).abs() > SPECTRAL_TOL {
        return Err(BoltzmannError::NoConvergence(format!(
            "spectral radius {} not critical",
            p.spectral_radius
        )));
    }
    Ok(())
}

/// Offspring laws of the critical four-type Galton-Watson tree.
#[derive(Debug, Clone)]
pub struct OffspringLaws {
    pub z_plus: f64,
    pub z_zero: f64,
    /// Type-3 child profile table: `((k, k'), probability)`.
    pub nu3: Vec<((u32, u32), f64)>,
    /// Type-4 child profile table; empty in the bipartite case.
    pub nu4: Vec<((u32, u32), f64)>,
    pub c_q: f64,
    pub c_q_prime: f64,
}

impl OffspringLaws {
    /// Success probability of the geometric type-1 offspring law.
    pub fn nu1_success(&self) -> f64 {
        1.0 / self.z_plus
    }

    pub fn nu1(&self, k: u32) -> f64 {
        let p = self.nu1_success();
        p * (1.0 - p).powi(k as i32)
    }

    /// For `2p`-angulation weights the type-3 law is a point mass at
    /// `(p - 1, 0)` and there are no type-2 or type-4 vertices, so the whole
    /// tree is a deterministic expansion of the tree spanned by its type-1
    /// vertices. Returns that branching factor `p - 1` when applicable.
    pub fn angulation_branching(&self) -> Option<usize> {
        if self.nu4.is_empty() && self.nu3.len() == 1 {
            let ((k, kp), _) = self.nu3[0];
            if kp == 0 && k >= 1 {
                return Some(k as usize);
            }
        }
        None
    }
}

pub fn offspring_laws(
    q: &WeightSeq,
    params: &CriticalParams,
) -> Result<OffspringLaws, BoltzmannError> {
    let scaled = q.scaled(params.a_c);
    let (x, y) = (params.x, params.y);
    let mut nu3 = Vec::new();
    let mut nu4 = Vec::new();
    for d in scaled.support() {
        if d >= 2 {
            let mut k = 0;
            while 2 * k <= d - 2 {
                let kp = d - 2 - 2 * k;
                let w = scaled.weight(d)
                    * x.powi(k as i32)
                    * y.powi(kp as i32)
                    * binom(d - 1, k + 1)
                    * binom(d - 2 - k, k);
                if w > 0.0 {
                    nu3.push(((k as u32, kp as u32), w));
                }
                k += 1;
            }
        }
        let mut k = 0;
        while 2 * k <= d - 1 {
            let kp = d - 1 - 2 * k;
            let w = scaled.weight(d)
                * x.powi(k as i32)
                * y.powi(kp as i32)
                * binom(d - 1, k)
                * binom(d - 1 - k, k);
            if w > 0.0 {
                nu4.push(((k as u32, kp as u32), w));
            }
            k += 1;
        }
    }
    nu3.sort_by_key(|&(kk, _)| kk);
    nu4.sort_by_key(|&(kk, _)| kk);
    let sum3: f64 = nu3.iter().map(|&(_, w)| w).sum();
    let sum4: f64 = nu4.iter().map(|&(_, w)| w).sum();
    if sum3 <= 0.0 {
        return Err(BoltzmannError::DegenerateTable("nu3 empty".into()));
    }
    if sum4 <= 0.0 && params.case == Assumption::A1 {
        return Err(BoltzmannError::DegenerateTable("nu4 empty under A1".into()));
    }
    for (_, w) in nu3.iter_mut() {
        *w /= sum3;
    }
    for (_, w) in nu4.iter_mut() {
        *w /= sum4.max(f64::MIN_POSITIVE);
    }
    Ok(OffspringLaws {
        z_plus: params.z_plus,
        z_zero: params.z_zero,
        nu3,
        nu4,
        c_q: 1.0 / sum3,
        c_q_prime: if sum4 > 0.0 { 1.0 / sum4 } else { f64::NAN },
    })
}

fn sample_table<R: Rng + ?Sized>(table: &[((u32, u32), f64)], rng: &mut R) -> (u32, u32) {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(kk, w) in table {
        acc += w;
        if u < acc {
            return kk;
        }
    }
    table.last().expect("nonempty table").0
}

/// Root profile of a sampled mobile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    /// Type-1 root (positive and negative maps).
    Type1,
    /// Type-2 root with two type-4 children (null maps): the concatenation
    /// of two independent type-2-rooted trees at the root.
    Type2Pair,
}

impl RootKind {
    pub fn for_variant(variant: MapClass) -> RootKind {
        match variant {
            MapClass::Positive | MapClass::Negative => RootKind::Type1,
            MapClass::Null => RootKind::Type2Pair,
        }
    }
}

/// Arena reused across generation tries.
#[derive(Default)]
pub struct GwScratch {
    types: Vec<VertexType>,
    parents: Vec<u32>,
}

impl GwScratch {
    pub fn n_vertices(&self) -> usize {
        self.types.len()
    }
}

pub enum GenOutcome {
    /// Tree completed with the recorded number of type-1 vertices.
    Complete { type1: usize },
    /// Type-1 count exceeded the requested ceiling.
    TooManyType1,
    /// Total vertex count hit the hard cap.
    TotalCap,
}

/// Breadth-first generation of the four-type Galton-Watson tree into the
/// scratch arena. Children of each vertex receive consecutive ids, so the
/// arena order is the breadth-first order and the random draws depend only
/// on the visit sequence.
pub fn generate_gw<R: Rng + ?Sized>(
    laws: &OffspringLaws,
    root: RootKind,
    rng: &mut R,
    scratch: &mut GwScratch,
    max_type1: usize,
    max_total: usize,
) -> GenOutcome {
    scratch.types.clear();
    scratch.parents.clear();
    let mut type1 = 0usize;
    match root {
        RootKind::Type1 => {
            scratch.types.push(VertexType::T1);
            type1 = 1;
        }
        RootKind::Type2Pair => scratch.types.push(VertexType::T2),
    }
    scratch.parents.push(u32::MAX);
    if type1 > max_type1 {
        return GenOutcome::TooManyType1;
    }
    let mut i = 0usize;
    while i < scratch.types.len() {
        match scratch.types[i] {
            VertexType::T1 => {
                let k = crate::rng::geometric(rng, laws.nu1_success());
                for _ in 0..k {
                    scratch.types.push(VertexType::T3);
                    scratch.parents.push(i as u32);
                }
            }
            VertexType::T2 => {
                let n4 = if i == 0 { 2 } else { 1 };
                for _ in 0..n4 {
                    scratch.types.push(VertexType::T4);
                    scratch.parents.push(i as u32);
                }
            }
            ty @ (VertexType::T3 | VertexType::T4) => {
                let table = if ty == VertexType::T3 {
                    &laws.nu3
                } else {
                    &laws.nu4
                };
                debug_assert!(!table.is_empty(), "degenerate table reached");
                let (k, kp) = sample_table(table, rng);
                // Uniform interleaving of k type-1 and k' type-2 children by
                // sequential urn draws.
                let (mut r1, mut r2) = (k, kp);
                while r1 + r2 > 0 {
                    let pick1 = if r2 == 0 {
                        true
                    } else if r1 == 0 {
                        false
                    } else {
                        rng.gen_range(0..r1 + r2) < r1
                    };
                    if pick1 {
                        scratch.types.push(VertexType::T1);
                        type1 += 1;
                        r1 -= 1;
                    } else {
                        scratch.types.push(VertexType::T2);
                        r2 -= 1;
                    }
                    scratch.parents.push(i as u32);
                }
                if type1 > max_type1 {
                    return GenOutcome::TooManyType1;
                }
            }
        }
        if scratch.types.len() > max_total {
            return GenOutcome::TotalCap;
        }
        i += 1;
    }
    GenOutcome::Complete { type1 }
}

fn scratch_to_tree(scratch: &GwScratch) -> FourTypeTree {
    let n = scratch.types.len();
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    for v in 1..n {
        children[scratch.parents[v] as usize].push(v as u32);
    }
    FourTypeTree::from_parts(scratch.types.clone(), children).expect("arena is a valid tree")
}

/// Free (unconditioned) Galton-Watson mobile tree; fails cleanly past the
/// vertex cap so the caller may retry.
pub fn sample_mobile_gw<R: Rng + ?Sized>(
    laws: &OffspringLaws,
    root: RootKind,
    rng: &mut R,
    max_vertices: usize,
) -> Result<FourTypeTree, BoltzmannError> {
    if root == RootKind::Type2Pair && laws.nu4.is_empty() {
        return Err(BoltzmannError::InvalidVariant(
            "type-2 root needs a nondegenerate nu4 (odd weights)".into(),
        ));
    }
    let mut scratch = GwScratch::default();
    match generate_gw(laws, root, rng, &mut scratch, usize::MAX, max_vertices) {
        GenOutcome::Complete { .. } => Ok(scratch_to_tree(&scratch)),
        _ => Err(BoltzmannError::SizeCapExceeded(max_vertices)),
    }
}

/// Set of attainable type-1 vertex counts: exact inside a window, extended
/// by the detected eventual period beyond it.
#[derive(Debug, Clone)]
pub struct CountLattice {
    window: Vec<bool>,
    period: Option<usize>,
}

const LATTICE_WINDOW: usize = 1024;
const LATTICE_TAIL: usize = 256;

impl CountLattice {
    pub fn attainable(&self, m: usize) -> bool {
        let base = self.window.len() - LATTICE_TAIL;
        if m < base {
            return self.window[m];
        }
        match self.period {
            Some(p) => self.window[base + (m - base) % p],
            // No period detected inside the window: stay permissive and let
            // the sampling budget decide.
            None => true,
        }
    }
}

/// `out = {i + j : i in a, j in b}` on fixed-width bitsets, truncated.
fn bitset_sumset(a: &[u64], b: &[u64], out: &mut [u64]) {
    out.iter_mut().for_each(|w| *w = 0);
    let nbits = out.len() * 64;
    for i in 0..nbits {
        if (a[i / 64] >> (i % 64)) & 1 == 1 {
            let ws = i / 64;
            let bs = i % 64;
            for w in 0..out.len() - ws {
                let mut v = b[w] << bs;
                if bs > 0 && w > 0 {
                    v |= b[w - 1] >> (64 - bs);
                }
                out[w + ws] |= v;
            }
        }
    }
}

/// Attainable type-1 counts per root kind, by a monotone bitset fixed point
/// over the four per-type attainability sets.
pub fn count_lattice(laws: &OffspringLaws, root: RootKind) -> CountLattice {
    let words = LATTICE_WINDOW / 64;
    let zero = vec![0u64; words];
    let mut a1 = zero.clone();
    let mut a2 = zero.clone();
    let mut tmp = zero.clone();
    let profile_sums = |a1: &[u64], a2: &[u64], table: &[((u32, u32), f64)]| {
        let mut acc = vec![0u64; words];
        let mut tmp = vec![0u64; words];
        for &((k, kp), _) in table {
            let mut cur = vec![0u64; words];
            cur[0] = 1; // the empty sum
            for _ in 0..k {
                bitset_sumset(&cur, a1, &mut tmp);
                cur.copy_from_slice(&tmp);
            }
            for _ in 0..kp {
                bitset_sumset(&cur, a2, &mut tmp);
                cur.copy_from_slice(&tmp);
            }
            for (a, c) in acc.iter_mut().zip(cur.iter()) {
                *a |= c;
            }
        }
        acc
    };
    for _ in 0..LATTICE_WINDOW {
        let new3 = profile_sums(&a1, &a2, &laws.nu3);
        let new4 = profile_sums(&a1, &a2, &laws.nu4);
        // A1 = 1 + additive span of A3 (geometric child counts hit every k).
        let mut span = zero.clone();
        span[0] = 1;
        loop {
            bitset_sumset(&span, &new3, &mut tmp);
            let mut grew = false;
            for (s, t) in span.iter_mut().zip(tmp.iter()) {
                let merged = *s | *t;
                if merged != *s {
                    grew = true;
                    *s = merged;
                }
            }
            if !grew {
                break;
            }
        }
        let mut new1 = zero.clone();
        for i in 0..LATTICE_WINDOW - 1 {
            if (span[i / 64] >> (i % 64)) & 1 == 1 {
                new1[(i + 1) / 64] |= 1 << ((i + 1) % 64);
            }
        }
        let mut changed = false;
        for (dst, src) in [(&mut a1, &new1), (&mut a2, &new4)] {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                let merged = *d | *s;
                if merged != *d {
                    changed = true;
                    *d = merged;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let root_bits = match root {
        RootKind::Type1 => a1,
        RootKind::Type2Pair => {
            bitset_sumset(&a2.clone(), &a2, &mut tmp);
            tmp.clone()
        }
    };
    let window: Vec<bool> = (0..LATTICE_WINDOW)
        .map(|i| (root_bits[i / 64] >> (i % 64)) & 1 == 1)
        .collect();
    let base = LATTICE_WINDOW - LATTICE_TAIL;
    let mut period = None;
    'outer: for p in 1..=LATTICE_TAIL / 2 {
        for i in base - LATTICE_TAIL..LATTICE_WINDOW - p {
            if window[i] != window[i + p] {
                continue 'outer;
            }
        }
        period = Some(p);
        break;
    }
    CountLattice { window, period }
}

/// Exact rejection sampler for the Galton-Watson tree conditioned on having
/// exactly `target_type1` type-1 vertices. Tries abort as soon as the count
/// overshoots; the per-try total cap only guards against pathological blowup
/// far beyond anything a conditioned tree reaches.
pub struct ConditionedSampler<'a> {
    laws: &'a OffspringLaws,
    root: RootKind,
    lattice: CountLattice,
}

#[derive(Debug, Clone, Copy)]
pub struct SampleStats {
    pub tries: u64,
    pub capped: u64,
}

impl<'a> ConditionedSampler<'a> {
    pub fn new(laws: &'a OffspringLaws, root: RootKind) -> Result<Self, BoltzmannError> {
        if root == RootKind::Type2Pair && laws.nu4.is_empty() {
            return Err(BoltzmannError::InvalidVariant(
                "type-2 root needs a nondegenerate nu4 (odd weights)".into(),
            ));
        }
        Ok(ConditionedSampler {
            laws,
            root,
            lattice: count_lattice(laws, root),
        })
    }

    pub fn lattice(&self) -> &CountLattice {
        &self.lattice
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        target_type1: usize,
        rng: &mut R,
        max_tries: u64,
    ) -> Result<(FourTypeTree, SampleStats), BoltzmannError> {
        self.sample_filtered(target_type1, rng, max_tries, |_| true)
    }

    /// Rejection loop with an extra acceptance predicate on the finished
    /// arena (used to exclude the single-vertex tree when the map must have
    /// at least one edge).
    pub fn sample_filtered<R: Rng + ?Sized>(
        &self,
        target_type1: usize,
        rng: &mut R,
        max_tries: u64,
        accept: impl Fn(&GwScratch) -> bool,
    ) -> Result<(FourTypeTree, SampleStats), BoltzmannError> {
        if !self.lattice.attainable(target_type1) {
            return Err(BoltzmannError::UnreachableCount(target_type1));
        }
        let max_total = 64 * target_type1 + 4096;
        let mut scratch = GwScratch::default();
        let mut stats = SampleStats { tries: 0, capped: 0 };
        while stats.tries < max_tries {
            stats.tries += 1;
            match generate_gw(
                self.laws,
                self.root,
                rng,
                &mut scratch,
                target_type1,
                max_total,
            ) {
                GenOutcome::Complete { type1 } if type1 == target_type1 => {
                    if accept(&scratch) {
                        return Ok((scratch_to_tree(&scratch), stats));
                    }
                }
                GenOutcome::TotalCap => stats.capped += 1,
                _ => {}
            }
        }
        Err(BoltzmannError::BudgetExhausted { tries: stats.tries })
    }
}

/// Draws the conditioned tree of a `2p`-angulation directly: the embedded
/// type-1 tree is a single-type Galton-Watson tree whose offspring count is
/// `(p-1)` times a geometric variable, so a degree sequence conditioned on
/// its sum plus one cycle-lemma rotation produces the conditioned law
/// without tree-level rejection. The four-type mobile is then the
/// deterministic expansion interposing a type-3 vertex over every block of
/// `p - 1` consecutive children.
pub fn sample_angulation_conditioned<R: Rng + ?Sized>(
    laws: &OffspringLaws,
    target_type1: usize,
    rng: &mut R,
) -> Result<FourTypeTree, BoltzmannError> {
    let branch = laws
        .angulation_branching()
        .ok_or_else(|| BoltzmannError::InvalidVariant("not an angulation law".into()))?;
    let m = target_type1;
    if m == 0 || (m - 1) % branch != 0 {
        return Err(BoltzmannError::UnreachableCount(m));
    }
    let geo_target = ((m - 1) / branch) as u64;
    let p_geo = laws.nu1_success();
    // Geometric draws conditioned on their sum, by whole-vector rejection;
    // the sum concentrates so this needs O(sqrt(m)) rounds.
    let mut counts: Vec<u32> = vec![0; m];
    loop {
        let mut sum = 0u64;
        let mut ok = true;
        for c in counts.iter_mut() {
            let k = crate::rng::geometric(rng, p_geo);
            sum += k;
            if sum > geo_target {
                ok = false;
                break;
            }
            *c = k as u32;
        }
        if ok && sum == geo_target {
            break;
        }
    }
    // Cycle-lemma rotation: the unique start turning the degree sequence
    // (children counts branch * K_i) into a valid preorder sequence.
    let rotation = {
        let mut walk = 0i64;
        let mut min = i64::MAX;
        let mut argmin = 0usize;
        for (i, &k) in counts.iter().enumerate() {
            walk += (branch as u64 * k as u64) as i64 - 1;
            if walk < min {
                min = walk;
                argmin = i;
            }
        }
        debug_assert_eq!(walk, -1);
        (argmin + 1) % m
    };
    // Reduced tree from the preorder degree sequence.
    let mut reduced_children: Vec<Vec<u32>> = vec![Vec::new(); m];
    {
        let degree = |v: usize| branch * counts[(rotation + v) % m] as usize;
        let mut stack: Vec<(u32, usize)> = Vec::new();
        for v in 0..m {
            if v > 0 {
                let top = stack.last_mut().expect("preorder sequence is valid");
                reduced_children[top.0 as usize].push(v as u32);
                top.1 -= 1;
            }
            while let Some(&(_, 0)) = stack.last() {
                stack.pop();
            }
            if degree(v) > 0 {
                stack.push((v as u32, degree(v)));
            }
        }
        debug_assert!(stack.is_empty());
    }
    // Expand to the four-type tree, breadth first so ids stay topological.
    let mut types: Vec<VertexType> = Vec::with_capacity(m + geo_target as usize);
    let mut children: Vec<Vec<u32>> = Vec::with_capacity(m + geo_target as usize);
    let mut t1_of_reduced = vec![u32::MAX; m];
    types.push(VertexType::T1);
    children.push(Vec::new());
    t1_of_reduced[0] = 0;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(0u32);
    while let Some(r) = queue.pop_front() {
        let t1 = t1_of_reduced[r as usize];
        for group in reduced_children[r as usize].chunks(branch) {
            let t3 = types.len() as u32;
            types.push(VertexType::T3);
            children.push(Vec::new());
            children[t1 as usize].push(t3);
            for &kid in group {
                let id = types.len() as u32;
                types.push(VertexType::T1);
                children.push(Vec::new());
                children[t3 as usize].push(id);
                t1_of_reduced[kid as usize] = id;
                queue.push_back(kid);
            }
        }
    }
    Ok(FourTypeTree::from_parts(types, children).expect("expansion is a valid tree"))
}

/// Tuned weights plus offspring laws: everything needed to draw Boltzmann
/// maps of a fixed vertex count.
pub struct MapSampler {
    pub params: CriticalParams,
    pub laws: OffspringLaws,
}

impl MapSampler {
    pub fn tune(q: &WeightSeq) -> Result<Self, BoltzmannError> {
        let params = tune_critical(q)?;
        let laws = offspring_laws(q, &params)?;
        Ok(MapSampler { params, laws })
    }

    /// Draws a rooted pointed Boltzmann map conditioned on `n` vertices,
    /// returning the map together with its mobile. The single-vertex tree is
    /// excluded when `n >= 2` because its image, the vertex map, has one
    /// vertex rather than two.
    pub fn sample_map<R: Rng + ?Sized>(
        &self,
        n: usize,
        variant: MapClass,
        rng: &mut R,
        label_sampler: &mut LabelSampler,
        max_tries: u64,
    ) -> Result<(MapFromMobile, Mobile), BoltzmannError> {
        let root = RootKind::for_variant(variant);
        if n == 0 || (root == RootKind::Type1 && n < 2) {
            return Err(BoltzmannError::UnreachableCount(n));
        }
        let sampler = ConditionedSampler::new(&self.laws, root)?;
        let need_edges = n >= 2;
        let (tree, _stats) = sampler.sample_filtered(n - 1, rng, max_tries, |scratch| {
            !need_edges || scratch.n_vertices() > 1
        })?;
        let mobile = sample_labels_uniform(&tree, label_sampler, rng);
        let out = mobile_to_map(&mobile, variant).expect("sampled mobiles are admissible");
        debug_assert_eq!(out.map.n_vertices(), n);
        Ok((out, mobile))
    }

    /// Fast exact path for `2p`-angulation weights: same conditioned law as
    /// `sample_map`, with the tree drawn through the cycle-lemma sampler
    /// instead of tree-level rejection. Only positive and negative variants
    /// exist in the bipartite world.
    pub fn sample_angulation_map<R: Rng + ?Sized>(
        &self,
        n: usize,
        variant: MapClass,
        rng: &mut R,
        label_sampler: &mut LabelSampler,
    ) -> Result<(MapFromMobile, Mobile), BoltzmannError> {
        if variant == MapClass::Null {
            return Err(BoltzmannError::InvalidVariant(
                "bipartite weights carry no null maps".into(),
            ));
        }
        if n < 3 {
            // n = 2 is never a 2p-angulation and n <= 1 is the vertex map.
            return Err(BoltzmannError::UnreachableCount(n));
        }
        let tree = sample_angulation_conditioned(&self.laws, n - 1, rng)?;
        let mobile = sample_labels_uniform(&tree, label_sampler, rng);
        let out = mobile_to_map(&mobile, variant).expect("sampled mobiles are admissible");
        debug_assert_eq!(out.map.n_vertices(), n);
        Ok((out, mobile))
    }
}

/// One-call pipeline: tune, derive laws, sample a conditioned mobile, label
/// it uniformly, and run the corner-chord construction.
pub fn sample_boltzmann_map<R: Rng + ?Sized>(
    q: &WeightSeq,
    n: usize,
    variant: MapClass,
    rng: &mut R,
    max_tries: u64,
) -> Result<(MapFromMobile, Mobile), BoltzmannError> {
    let sampler = MapSampler::tune(q)?;
    let mut labels = LabelSampler::new();
    sampler.sample_map(n, variant, rng, &mut labels, max_tries)
}
