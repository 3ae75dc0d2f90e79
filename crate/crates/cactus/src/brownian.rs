//! Uniform plane trees with Gaussian edge labels: the discrete stand-in for
//! the continuum random tree carrying Brownian labels.
//!
//! Trees with `N` edges are drawn uniformly by the cycle lemma: shuffle a
//! (+1)-step/(-1)-step sequence with `N` rises and `N + 1` falls, rotate just
//! past the first minimum of the walk, and read the resulting Dyck path as a
//! depth-first traversal. Each edge carries an independent standard normal
//! increment; the label of a vertex is the sum along its root path, so the
//! covariance of two labels is the depth of their meet. Distances are shown
//! scaled by `(2N)^{-1/2}` and labels by `(2N)^{-1/4}`.

use rand::Rng;
use thiserror::Error;

use crate::rng::standard_normal;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BrownianError {
    #[error("tree needs at least {1} edges, got {0}")]
    TooSmall(usize, usize),
    #[error("vertex {0} out of range")]
    InvalidVertex(usize),
}

/// Plane tree with real labels; vertex 0 is the root and ids follow the
/// depth-first (contour first-visit) order.
#[derive(Debug, Clone)]
pub struct LabeledTree {
    parent: Vec<u32>,
    depth: Vec<u32>,
    /// Unscaled labels: root-path sums of the edge increments.
    label: Vec<f64>,
    /// Contour vertices `v_0 .. v_{2N-1}` (the closing return is dropped).
    contour: Vec<u32>,
}

impl LabeledTree {
    /// Uniform plane tree with `n_edges` edges and independent standard
    /// normal edge increments.
    pub fn sample<R: Rng + ?Sized>(n_edges: usize, rng: &mut R) -> Self {
        assert!(n_edges >= 1, "need at least one edge");
        let total = 2 * n_edges + 1;
        let mut steps: Vec<bool> = Vec::with_capacity(total);
        steps.extend(std::iter::repeat(true).take(n_edges));
        steps.extend(std::iter::repeat(false).take(n_edges + 1));
        // Fisher-Yates with the documented generator.
        for i in (1..total).rev() {
            let j = rng.gen_range(0..=i);
            steps.swap(i, j);
        }
        // First minimum of the walk; rotating past it yields a Dyck path.
        let mut sum = 0i64;
        let mut min = i64::MAX;
        let mut argmin = 0usize;
        for (i, &up) in steps.iter().enumerate() {
            sum += if up { 1 } else { -1 };
            if sum < min {
                min = sum;
                argmin = i;
            }
        }
        let dyck = |i: usize| steps[(argmin + 1 + i) % total];
        // Build the tree along the Dyck path, recording the contour.
        let n = n_edges + 1;
        let mut parent = vec![u32::MAX; n];
        let mut depth = vec![0u32; n];
        let mut label = vec![0.0f64; n];
        let mut contour = Vec::with_capacity(2 * n_edges);
        let mut next_id = 1u32;
        let mut cur = 0u32;
        contour.push(0);
        for i in 0..2 * n_edges {
            if dyck(i) {
                let child = next_id;
                next_id += 1;
                parent[child as usize] = cur;
                depth[child as usize] = depth[cur as usize] + 1;
                label[child as usize] = label[cur as usize] + standard_normal(rng);
                cur = child;
            } else {
                cur = parent[cur as usize];
            }
            if i + 1 < 2 * n_edges {
                contour.push(cur);
            }
        }
        debug_assert_eq!(next_id as usize, n);
        debug_assert_eq!(cur, 0);
        LabeledTree {
            parent,
            depth,
            label,
            contour,
        }
    }

    /// Test constructor from explicit parent pointers (topological ids) and
    /// unscaled labels.
    pub fn from_parts(parent: Vec<u32>, label: Vec<f64>) -> Self {
        assert_eq!(parent.len(), label.len());
        let n = parent.len();
        let mut depth = vec![0u32; n];
        for v in 1..n {
            assert!((parent[v] as usize) < v, "ids must be topological");
            depth[v] = depth[parent[v] as usize] + 1;
        }
        // Contour by an explicit corner walk.
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
        for v in 1..n {
            children[parent[v] as usize].push(v as u32);
        }
        let mut cursor = vec![0usize; n];
        let mut contour = Vec::with_capacity(2 * n - 1);
        let mut cur = 0u32;
        contour.push(0);
        loop {
            let c = cursor[cur as usize];
            if c < children[cur as usize].len() {
                cursor[cur as usize] += 1;
                cur = children[cur as usize][c];
            } else if cur == 0 {
                break;
            } else {
                cur = parent[cur as usize];
            }
            contour.push(cur);
        }
        contour.pop();
        LabeledTree {
            parent,
            depth,
            label,
            contour,
        }
    }

    pub fn n_edges(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn n_vertices(&self) -> usize {
        self.parent.len()
    }

    pub fn depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        (v != 0).then(|| self.parent[v as usize])
    }

    /// Unscaled label.
    pub fn label_raw(&self, v: u32) -> f64 {
        self.label[v as usize]
    }

    /// Label scale factor `(2N)^{-1/4}`.
    pub fn label_scale(&self) -> f64 {
        (2.0 * self.n_edges() as f64).powf(-0.25)
    }

    /// Distance scale factor `(2N)^{-1/2}`.
    pub fn dist_scale(&self) -> f64 {
        (2.0 * self.n_edges() as f64).powf(-0.5)
    }

    pub fn contour(&self) -> &[u32] {
        &self.contour
    }

    /// Minimum unscaled label over all vertices.
    pub fn min_label_raw(&self) -> f64 {
        self.label.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Vertex of minimal label; ties (a zero-probability event for
    /// continuous labels) go to the earliest contour appearance, which is
    /// the smallest id.
    pub fn min_label_vertex(&self) -> u32 {
        let mut best = 0u32;
        for v in 1..self.n_vertices() as u32 {
            if self.label[v as usize] < self.label[best as usize] {
                best = v;
            }
        }
        best
    }

    /// Minimum unscaled label on the tree path from `u` to `v`, endpoints
    /// included.
    pub fn path_min_raw(&self, u: u32, v: u32) -> f64 {
        let (mut a, mut b) = (u, v);
        let mut min = self.label[a as usize].min(self.label[b as usize]);
        while self.depth[a as usize] > self.depth[b as usize] {
            a = self.parent[a as usize];
            min = min.min(self.label[a as usize]);
        }
        while self.depth[b as usize] > self.depth[a as usize] {
            b = self.parent[b as usize];
            min = min.min(self.label[b as usize]);
        }
        while a != b {
            a = self.parent[a as usize];
            b = self.parent[b as usize];
            min = min.min(self.label[a as usize].min(self.label[b as usize]));
        }
        min
    }

    /// Unscaled label pseudo-distance
    /// `Z_u + Z_v - 2 min over the path [[u, v]]`.
    pub fn kac_distance_raw(&self, u: u32, v: u32) -> f64 {
        self.label[u as usize] + self.label[v as usize] - 2.0 * self.path_min_raw(u, v)
    }

    /// Scaled label pseudo-distance.
    pub fn kac_distance(&self, u: u32, v: u32) -> f64 {
        self.kac_distance_raw(u, v) * self.label_scale()
    }

    /// Vertex visited by a uniform contour step: the discrete mass measure.
    pub fn sample_mass_vertex<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.contour[rng.gen_range(0..self.contour.len())]
    }

    /// Contour multiplicity of each vertex.
    fn contour_multiplicity(&self) -> Vec<u32> {
        let mut mult = vec![0u32; self.n_vertices()];
        for &v in &self.contour {
            mult[v as usize] += 1;
        }
        mult
    }

    /// Contour-step count of each vertex's subtree (vertex included).
    fn subtree_multiplicity(&self, mult: &[u32]) -> Vec<u64> {
        let mut sub: Vec<u64> = mult.iter().map(|&m| m as u64).collect();
        for v in (1..self.n_vertices()).rev() {
            sub[self.parent[v] as usize] += sub[v];
        }
        sub
    }

    /// Contour mass of the component of `tree minus {cut}` containing `u`;
    /// `u` must differ from `cut`. Climbs from `u`: hitting `cut` identifies
    /// the child subtree, reaching the root lands on the parent side.
    fn component_mass(&self, cut: u32, u: u32, sub: &[u64]) -> u64 {
        debug_assert_ne!(cut, u);
        let mut w = u;
        while let Some(p) = self.parent(w) {
            if p == cut {
                return sub[w as usize];
            }
            w = p;
        }
        // u is not below cut, so the component is everything outside cut's
        // closed subtree; a root cut never reaches here.
        debug_assert_ne!(cut, 0);
        self.contour.len() as u64 - sub[cut as usize]
    }

    /// Volume split across the label-minimal vertex of the path between two
    /// independent mass vertices: the mass fractions of the two sides, with
    /// the cut vertex's own contour steps shared half and half.
    pub fn separating_split<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<(f64, f64), BrownianError> {
        if self.n_edges() < 4 {
            return Err(BrownianError::TooSmall(self.n_edges(), 4));
        }
        let (u1, u2) = loop {
            let a = self.sample_mass_vertex(rng);
            let b = self.sample_mass_vertex(rng);
            if a != b {
                break (a, b);
            }
        };
        // Argmin of the label along the path, endpoints included.
        let beta = {
            let mut best = u1;
            let consider = |w: u32, best: &mut u32| {
                if self.label[w as usize] < self.label[*best as usize] {
                    *best = w;
                }
            };
            consider(u2, &mut best);
            let (mut a, mut b) = (u1, u2);
            while self.depth[a as usize] > self.depth[b as usize] {
                a = self.parent[a as usize];
                consider(a, &mut best);
            }
            while self.depth[b as usize] > self.depth[a as usize] {
                b = self.parent[b as usize];
                consider(b, &mut best);
            }
            while a != b {
                a = self.parent[a as usize];
                b = self.parent[b as usize];
                consider(a, &mut best);
                consider(b, &mut best);
            }
            best
        };
        let mult = self.contour_multiplicity();
        let sub = self.subtree_multiplicity(&mult);
        let total = self.contour.len() as f64;
        let m_beta = mult[beta as usize] as f64;
        let (vol1, vol2);
        if beta == u1 {
            let m2 = self.component_mass(beta, u2, &sub) as f64;
            vol2 = (m2 + 0.5 * m_beta) / total;
            vol1 = 1.0 - vol2;
        } else if beta == u2 {
            let m1 = self.component_mass(beta, u1, &sub) as f64;
            vol1 = (m1 + 0.5 * m_beta) / total;
            vol2 = 1.0 - vol1;
        } else {
            let m1 = self.component_mass(beta, u1, &sub) as f64;
            vol1 = (m1 + 0.5 * m_beta) / total;
            vol2 = 1.0 - vol1;
        }
        Ok((vol1, vol2))
    }

    /// Contour gap `[G, D]` around step `s` at the given depth level: `G` is
    /// the last step at or before `s` whose depth is `<= level`, `D` the
    /// first at or after `s` (the closing return to the root counts).
    pub fn contour_gap(&self, s: usize, level: f64) -> (usize, usize) {
        let len = self.contour.len();
        let mut g = s;
        loop {
            if f64::from(self.depth[self.contour[g] as usize]) <= level {
                break;
            }
            g -= 1; // depth 0 at step 0 guarantees termination
        }
        let mut d = s;
        loop {
            if d == len {
                break; // virtual closing step at the root
            }
            if f64::from(self.depth[self.contour[d] as usize]) <= level {
                break;
            }
            d += 1;
        }
        (g, d)
    }

    /// The re-rooting representation of the volume split: a uniform contour
    /// step, an arc-sine depth fraction, and the contour-time gap between
    /// the last and next visits to the dropped level.
    pub fn arc_sine_split<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = rng.gen_range(0..self.contour.len());
        let h = self.depth[self.contour[s] as usize] as f64;
        if h == 0.0 {
            return 0.0;
        }
        let u: f64 = rng.gen();
        let frac = (std::f64::consts::PI * u / 2.0).sin().powi(2);
        let level = h - h * frac;
        let (g, d) = self.contour_gap(s, level);
        (d - g) as f64 / self.contour.len() as f64
    }
}
