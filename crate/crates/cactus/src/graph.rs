//! Pointed graphs and their discrete cactus.
//!
//! A pointed graph is a finite connected simple graph with a distinguished
//! root vertex. Its cactus is the tree of connected components of the vertex
//! sets `{w : d(root, w) >= r}`, swept over the threshold `r`; two vertices
//! fall in the same cactus class exactly when some path between them never
//! gets closer to the root than their common height. The cactus distance
//! between classes is `h(C) + h(C') - 2 h(C ^ C')` with `^` the lowest common
//! ancestor, and it agrees with the maximin formula
//! `d(root,v) + d(root,w) - 2 max_paths min_height` on vertices.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex id {0} out of range (n = {1})")]
    InvalidVertex(usize, usize),
    #[error("edge {0}-{1} is a loop")]
    LoopEdge(usize, usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("graph is not connected: vertex {0} unreachable from root")]
    Disconnected(usize),
    #[error("empty graph")]
    Empty,
    #[error("malformed graph text: {0}")]
    Parse(String),
}

/// Finite connected simple graph with a distinguished root vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedGraph {
    n: usize,
    root: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
}

impl PointedGraph {
    /// Builds a pointed graph, normalizing edge order, dropping loops and
    /// collapsing duplicate edges (planar maps hand us multigraphs).
    /// Connectivity from the root is required.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        root: usize,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if root >= n {
            return Err(GraphError::InvalidVertex(root, n));
        }
        let mut norm: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            if u >= n {
                return Err(GraphError::InvalidVertex(u, n));
            }
            if v >= n {
                return Err(GraphError::InvalidVertex(v, n));
            }
            if u == v {
                continue; // loops never change distances
            }
            let e = (u.min(v) as u32, u.max(v) as u32);
            norm.push(e);
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &norm {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let g = PointedGraph {
            n,
            root,
            edges: norm,
            adj,
        };
        // Connectivity check doubles as validation of the distance oracle.
        let dist = g.bfs(root);
        if let Some(v) = dist.iter().position(|d| *d == u32::MAX) {
            return Err(GraphError::Disconnected(v));
        }
        Ok(g)
    }

    /// Strict variant used by the text decoder: duplicate pairs and loops in
    /// the input are reported instead of collapsed.
    pub fn new_strict(
        n: usize,
        edges: &[(usize, usize)],
        root: usize,
    ) -> Result<Self, GraphError> {
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::LoopEdge(u, v));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
        }
        Self::new(n, edges.iter().copied(), root)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    fn bfs(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source as u32);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &w in &self.adj[u as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Graph distances from `source` to every vertex.
    pub fn graph_distances(&self, source: usize) -> Result<Vec<u32>, GraphError> {
        if source >= self.n {
            return Err(GraphError::InvalidVertex(source, self.n));
        }
        Ok(self.bfs(source))
    }

    /// Heights `d(root, .)` of all vertices.
    pub fn heights(&self) -> Vec<u32> {
        self.bfs(self.root)
    }

    /// `max` over paths `v -> w` of `min` over path vertices of `d(root, .)`,
    /// endpoints included. Cubic bottleneck closure over all intermediate
    /// vertices; intended as a test oracle, not for large graphs.
    pub fn maximin_oracle(&self, v: usize, w: usize) -> Result<u32, GraphError> {
        if v >= self.n {
            return Err(GraphError::InvalidVertex(v, self.n));
        }
        if w >= self.n {
            return Err(GraphError::InvalidVertex(w, self.n));
        }
        let h = self.heights();
        let n = self.n;
        let mut m = vec![0u32; n * n];
        for i in 0..n {
            m[i * n + i] = h[i];
        }
        for &(a, b) in &self.edges {
            let (a, b) = (a as usize, b as usize);
            let val = h[a].min(h[b]);
            m[a * n + b] = m[a * n + b].max(val);
            m[b * n + a] = m[b * n + a].max(val);
        }
        for k in 0..n {
            for i in 0..n {
                let mik = m[i * n + k];
                if mik == 0 {
                    continue;
                }
                for j in 0..n {
                    let cand = mik.min(m[k * n + j]);
                    if cand > m[i * n + j] {
                        m[i * n + j] = cand;
                    }
                }
            }
        }
        Ok(m[v * n + w])
    }

    /// Serializes as `n m root` followed by one `u v` line per edge.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.n, self.edges.len(), self.root);
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let mut nums = text
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| GraphError::Parse(format!("{t:?}: {e}"))));
        let mut next = |what: &str| {
            nums.next()
                .unwrap_or_else(|| Err(GraphError::Parse(format!("missing {what}"))))
        };
        let n = next("vertex count")?;
        let m = next("edge count")?;
        let root = next("root")?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let u = next("edge endpoint")?;
            let v = next("edge endpoint")?;
            edges.push((u, v));
        }
        Self::new_strict(n, &edges, root)
    }
}

/// One class of the cactus: all vertices at height `height` in one component
/// of the threshold set `{h >= height}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CactusClass {
    pub height: u32,
    /// Parent class, always at height `height - 1`; `None` for the root class.
    pub parent: Option<u32>,
}

/// The discrete cactus of a pointed graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CactusTree {
    classes: Vec<CactusClass>,
    class_of: Vec<u32>,
}

impl CactusTree {
    pub fn classes(&self) -> &[CactusClass] {
        &self.classes
    }

    pub fn class_of(&self, v: usize) -> Result<u32, GraphError> {
        self.class_of
            .get(v)
            .copied()
            .ok_or(GraphError::InvalidVertex(v, self.class_of.len()))
    }

    pub fn n_vertices(&self) -> usize {
        self.class_of.len()
    }

    pub fn height(&self, class: u32) -> u32 {
        self.classes[class as usize].height
    }

    /// Cactus distance between classes: climb the deeper one, heights are
    /// exact levels so the walk meets at the lowest common ancestor.
    pub fn class_distance(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let (mut ha, mut hb) = (self.height(a), self.height(b));
        let (oa, ob) = (ha, hb);
        while ha > hb {
            a = self.classes[a as usize].parent.expect("non-root class has parent");
            ha -= 1;
        }
        while hb > ha {
            b = self.classes[b as usize].parent.expect("non-root class has parent");
            hb -= 1;
        }
        while a != b {
            a = self.classes[a as usize].parent.expect("non-root class has parent");
            b = self.classes[b as usize].parent.expect("non-root class has parent");
            ha -= 1;
        }
        oa + ob - 2 * ha
    }

    /// Cactus distance between vertices of the underlying graph.
    pub fn cactus_distance(&self, v: usize, w: usize) -> Result<u32, GraphError> {
        let a = self.class_of(v)?;
        let b = self.class_of(w)?;
        Ok(self.class_distance(a, b))
    }

    /// One `id height parent` line per class (parent -1 for the root class),
    /// then one `vertex class` line per graph vertex.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (id, c) in self.classes.iter().enumerate() {
            let parent = c.parent.map_or(-1i64, |p| p as i64);
            let _ = writeln!(s, "{id} {} {parent}", c.height);
        }
        for (v, c) in self.class_of.iter().enumerate() {
            let _ = writeln!(s, "{v} {c}");
        }
        s
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != x {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Deterministic orientation keeps representatives reproducible.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi as usize] = lo;
        }
    }
}

/// Builds the cactus by sweeping thresholds downward: at level `r` all
/// vertices of height `r` activate, edges with both endpoints active merge
/// components, and every component holding a height-`r` vertex becomes a
/// class parented to the level-`r-1` component that absorbs it.
pub fn build_cactus(g: &PointedGraph) -> CactusTree {
    let h = g.heights();
    let n = g.n_vertices();
    let hmax = h.iter().copied().max().unwrap_or(0);
    let mut levels: Vec<Vec<u32>> = vec![Vec::new(); hmax as usize + 1];
    for v in 0..n {
        levels[h[v] as usize].push(v as u32);
    }

    let mut uf = UnionFind::new(n);
    let mut active = vec![false; n];
    let mut classes: Vec<CactusClass> = Vec::new();
    let mut class_of = vec![u32::MAX; n];
    // Classes created at the previous (higher) level, keyed by a member
    // vertex so we can re-find their component after this level's unions.
    let mut pending: Vec<(u32, u32)> = Vec::new(); // (class id, member vertex)

    for r in (0..=hmax).rev() {
        for &v in &levels[r as usize] {
            active[v as usize] = true;
        }
        for &v in &levels[r as usize] {
            for &w in g.neighbors(v as usize) {
                if active[w as usize] {
                    uf.union(v, w);
                }
            }
        }
        // New classes at height r: one per component containing a height-r vertex.
        let mut created: Vec<(u32, u32)> = Vec::new(); // (uf root, class id)
        for &v in &levels[r as usize] {
            let root = uf.find(v);
            let class = match created.iter().find(|(rt, _)| *rt == root) {
                Some(&(_, c)) => c,
                None => {
                    let c = classes.len() as u32;
                    classes.push(CactusClass {
                        height: r,
                        parent: None,
                    });
                    created.push((root, c));
                    c
                }
            };
            class_of[v as usize] = class;
        }
        // Link the classes from level r+1 to their component's class here.
        for &(child, member) in &pending {
            let root = uf.find(member);
            let parent = created
                .iter()
                .find(|(rt, _)| *rt == root)
                .map(|&(_, c)| c)
                .expect("every vertex of height r+1 has a height-r neighbor");
            classes[child as usize].parent = Some(parent);
        }
        pending = levels[r as usize]
            .iter()
            .map(|&v| (class_of[v as usize], v))
            .collect::<std::collections::HashMap<_, _>>()
            .into_iter()
            .collect();
        pending.sort_unstable();
    }
    debug_assert!(class_of.iter().all(|&c| c != u32::MAX));
    CactusTree { classes, class_of }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testsupport::{enumerate_maximin, floyd_warshall, random_connected_graph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path3() -> PointedGraph {
        PointedGraph::new(3, [(0, 1), (1, 2)], 0).unwrap()
    }

    fn cycle4() -> PointedGraph {
        // rho - a - b - c - rho
        PointedGraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)], 0).unwrap()
    }

    #[test]
    fn distances_on_path() {
        assert_eq!(path3().graph_distances(0).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn distance_to_self_is_zero() {
        let g = cycle4();
        for s in 0..4 {
            assert_eq!(g.graph_distances(s).unwrap()[s], 0);
        }
    }

    #[test]
    fn distances_match_floyd_warshall() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = random_connected_graph(&mut rng, 12);
            let fw = floyd_warshall(&g);
            for s in 0..g.n_vertices() {
                let bfs = g.graph_distances(s).unwrap();
                for v in 0..g.n_vertices() {
                    assert_eq!(bfs[v] as usize, fw[s][v]);
                }
            }
        }
    }

    #[test]
    fn maximin_examples() {
        let g = cycle4();
        // path a-b-c keeps height >= 1, path a-rho-c drops to 0
        assert_eq!(g.maximin_oracle(1, 3).unwrap(), 1);
        let h = g.heights();
        for v in 0..4 {
            assert_eq!(g.maximin_oracle(v, v).unwrap(), h[v]);
        }
        let p = path3();
        assert_eq!(p.maximin_oracle(1, 2).unwrap(), 1);
    }

    #[test]
    fn maximin_matches_path_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let g = random_connected_graph(&mut rng, 7);
            for v in 0..g.n_vertices() {
                for w in 0..g.n_vertices() {
                    assert_eq!(
                        g.maximin_oracle(v, w).unwrap(),
                        enumerate_maximin(&g, v, w),
                        "graph {:?}",
                        g
                    );
                }
            }
        }
    }

    #[test]
    fn cactus_of_path_is_chain() {
        let t = build_cactus(&path3());
        assert_eq!(t.classes().len(), 3);
        let mut heights: Vec<u32> = (0..3)
            .map(|v| t.height(t.class_of(v).unwrap()))
            .collect();
        heights.sort_unstable();
        assert_eq!(heights, vec![0, 1, 2]);
        assert_eq!(t.cactus_distance(0, 2).unwrap(), 2);
    }

    #[test]
    fn cactus_of_cycle_merges_antipodal_neighbors() {
        let t = build_cactus(&cycle4());
        // classes {rho}, {a, c}, {b}
        assert_eq!(t.classes().len(), 3);
        assert_eq!(t.class_of(1).unwrap(), t.class_of(3).unwrap());
        assert_ne!(t.class_of(1).unwrap(), t.class_of(2).unwrap());
        assert_eq!(t.cactus_distance(1, 2).unwrap(), 1);
        assert_eq!(t.cactus_distance(1, 1).unwrap(), 0);
    }

    #[test]
    fn cactus_distance_equals_maximin_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let g = random_connected_graph(&mut rng, 12);
            let t = build_cactus(&g);
            let h = g.heights();
            for v in 0..g.n_vertices() {
                assert_eq!(t.cactus_distance(g.root(), v).unwrap(), h[v], "root identity");
                for w in 0..g.n_vertices() {
                    let mm = g.maximin_oracle(v, w).unwrap();
                    let expect = h[v] + h[w] - 2 * mm;
                    assert_eq!(t.cactus_distance(v, w).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn cactus_distance_below_graph_distance_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let g = random_connected_graph(&mut rng, 10);
            let t = build_cactus(&g);
            let n = g.n_vertices();
            let mut d = vec![vec![0u32; n]; n];
            for v in 0..n {
                let bfs = g.graph_distances(v).unwrap();
                for w in 0..n {
                    d[v][w] = t.cactus_distance(v, w).unwrap();
                    assert!(d[v][w] <= bfs[w], "cactus exceeds graph distance");
                }
            }
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        assert!(d[a][b] + d[b][c] >= d[a][c]);
                    }
                }
            }
        }
    }

    #[test]
    fn class_structure_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let g = random_connected_graph(&mut rng, 11);
            let t = build_cactus(&g);
            let h = g.heights();
            let root_class = t.class_of(g.root()).unwrap();
            assert_eq!(t.height(root_class), 0);
            for (id, c) in t.classes().iter().enumerate() {
                match c.parent {
                    None => assert_eq!(id as u32, root_class),
                    Some(p) => assert_eq!(t.height(p) + 1, c.height),
                }
            }
            for v in 0..g.n_vertices() {
                assert_eq!(t.height(t.class_of(v).unwrap()), h[v]);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let g = cycle4();
        let parsed = PointedGraph::from_text(&g.to_text()).unwrap();
        assert_eq!(g, parsed);
        assert!(PointedGraph::from_text("2 1 0\n0 0\n").is_err());
        assert!(PointedGraph::from_text("3 1 0\n0 1\n").is_err()); // disconnected
    }
}
