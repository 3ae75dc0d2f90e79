//! Finite pointed metric spaces, correspondence distortion, and exact
//! Gromov-Hausdorff distance on tiny instances.
//!
//! The GH distance between pointed spaces is half the infimal distortion over
//! correspondences containing the root pair. The general problem is NP-hard;
//! `gh_exact_small` enumerates every relation on `A x B` and is capped at
//! `|A| * |B| <= 20` so the test suites can afford it.

use thiserror::Error;

use crate::graph::{build_cactus, PointedGraph};

#[derive(Debug, Error, PartialEq)]
pub enum GhError {
    #[error("distance matrix is not a metric: {0}")]
    NotAMetric(String),
    #[error("correspondence does not cover index {0} of space {1}")]
    Coverage(usize, char),
    #[error("correspondence misses the root pair")]
    MissingRootPair,
    #[error("pair ({0}, {1}) out of range")]
    PairOutOfRange(usize, usize),
    #[error("instance too large for exact enumeration: {0} * {1} > 20")]
    TooLarge(usize, usize),
}

/// Finite pointed metric space given by its full distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    size: usize,
    dist: Vec<f64>,
    root: usize,
}

const METRIC_TOL: f64 = 1e-9;

impl FiniteMetricSpace {
    pub fn new(dist: Vec<Vec<f64>>, root: usize) -> Result<Self, GhError> {
        let size = dist.len();
        if size == 0 || root >= size {
            return Err(GhError::NotAMetric("empty space or bad root".into()));
        }
        let mut flat = vec![0.0; size * size];
        for (i, row) in dist.iter().enumerate() {
            if row.len() != size {
                return Err(GhError::NotAMetric(format!("row {i} has wrong length")));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(GhError::NotAMetric(format!("d({i},{j}) = {d}")));
                }
                flat[i * size + j] = d;
            }
        }
        for i in 0..size {
            if flat[i * size + i].abs() > METRIC_TOL {
                return Err(GhError::NotAMetric(format!("d({i},{i}) != 0")));
            }
            for j in 0..size {
                if (flat[i * size + j] - flat[j * size + i]).abs() > METRIC_TOL {
                    return Err(GhError::NotAMetric(format!("asymmetry at ({i},{j})")));
                }
                for k in 0..size {
                    if flat[i * size + j] > flat[i * size + k] + flat[k * size + j] + METRIC_TOL {
                        return Err(GhError::NotAMetric(format!(
                            "triangle violated at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace {
            size,
            dist: flat,
            root,
        })
    }

    /// Pointed graph with its graph distance.
    pub fn from_pointed_graph(g: &PointedGraph) -> Self {
        let n = g.n_vertices();
        let mut dist = vec![vec![0.0; n]; n];
        for v in 0..n {
            let bfs = g.graph_distances(v).expect("valid vertex");
            for w in 0..n {
                dist[v][w] = bfs[w] as f64;
            }
        }
        Self::new(dist, g.root()).expect("graph distance is a metric")
    }

    /// The cactus of a pointed graph as a finite metric space on its classes,
    /// pointed at the root class.
    pub fn from_cactus_of(g: &PointedGraph) -> Self {
        let t = build_cactus(g);
        let k = t.classes().len();
        let mut dist = vec![vec![0.0; k]; k];
        for a in 0..k as u32 {
            for b in 0..k as u32 {
                dist[a as usize][b as usize] = t.class_distance(a, b) as f64;
            }
        }
        let root_class = t.class_of(g.root()).expect("root in cactus") as usize;
        Self::new(dist, root_class).expect("cactus distance is a metric")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.size + j]
    }
}

/// A set of index pairs covering both spaces and containing the root pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn new(
        pairs: Vec<(usize, usize)>,
        a: &FiniteMetricSpace,
        b: &FiniteMetricSpace,
    ) -> Result<Self, GhError> {
        for &(i, j) in &pairs {
            if i >= a.size() || j >= b.size() {
                return Err(GhError::PairOutOfRange(i, j));
            }
        }
        if !pairs.contains(&(a.root(), b.root())) {
            return Err(GhError::MissingRootPair);
        }
        for i in 0..a.size() {
            if !pairs.iter().any(|&(x, _)| x == i) {
                return Err(GhError::Coverage(i, 'A'));
            }
        }
        for j in 0..b.size() {
            if !pairs.iter().any(|&(_, y)| y == j) {
                return Err(GhError::Coverage(j, 'B'));
            }
        }
        Ok(Correspondence { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// `sup |d_A(x1, y1) - d_B(x2, y2)|` over pairs of pairs of the correspondence.
pub fn distortion(r: &Correspondence, a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> f64 {
    let mut worst = 0.0f64;
    for &(x1, x2) in r.pairs() {
        for &(y1, y2) in r.pairs() {
            let gap = (a.dist(x1, y1) - b.dist(x2, y2)).abs();
            worst = worst.max(gap);
        }
    }
    worst
}

/// Exact pointed Gromov-Hausdorff distance: half the minimal distortion over
/// every correspondence containing the root pair, by exhaustive enumeration
/// of subsets of `A x B`. Requires `|A| * |B| <= 20`.
pub fn gh_exact_small(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> Result<f64, GhError> {
    let (na, nb) = (a.size(), b.size());
    let cells = na * nb;
    if cells > 20 {
        return Err(GhError::TooLarge(na, nb));
    }
    let pair_of = |bit: usize| (bit / nb, bit % nb);
    let root_bit = a.root() * nb + b.root();
    // Row/column coverage masks.
    let mut row_mask = vec![0u32; na];
    let mut col_mask = vec![0u32; nb];
    for bit in 0..cells {
        let (i, j) = pair_of(bit);
        row_mask[i] |= 1 << bit;
        col_mask[j] |= 1 << bit;
    }
    // Distortion contribution of each unordered pair of cells.
    let mut best = f64::INFINITY;
    let total = 1u32 << cells;
    for set in 0..total {
        if set & (1 << root_bit) == 0 {
            continue;
        }
        if row_mask.iter().any(|&m| set & m == 0) || col_mask.iter().any(|&m| set & m == 0) {
            continue;
        }
        let mut bits = Vec::with_capacity(cells);
        let mut s = set;
        while s != 0 {
            let b = s.trailing_zeros() as usize;
            bits.push(b);
            s &= s - 1;
        }
        let mut dis = 0.0f64;
        'outer: for (idx, &p) in bits.iter().enumerate() {
            let (x1, x2) = pair_of(p);
            for &q in &bits[idx..] {
                let (y1, y2) = pair_of(q);
                let gap = (a.dist(x1, y1) - b.dist(x2, y2)).abs();
                if gap > dis {
                    dis = gap;
                    if dis >= best {
                        break 'outer; // cannot improve
                    }
                }
            }
        }
        best = best.min(dis);
    }
    Ok(best / 2.0)
}
