//! Rooted pointed planar maps as rotation systems.
//!
//! A map is stored as two permutations of half-edge ids: `opposite`, the
//! fixed-point-free involution pairing the two halves of each edge, and
//! `next_at_vertex`, the counterclockwise successor around the half-edge's
//! origin vertex. Faces are the orbits of `h -> next(opposite(h))`, and the
//! Euler count `V - E + F = 2` certifies genus zero; every constructor runs
//! that check. The vertex map (no edges, one vertex, one face of degree 0)
//! is encoded by zero half-edges.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::PointedGraph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("opposite is not a fixed-point-free involution at half-edge {0}")]
    BadInvolution(usize),
    #[error("next_at_vertex is not a permutation")]
    BadPermutation,
    #[error("underlying graph is disconnected")]
    Disconnected,
    #[error("Euler characteristic is {0}, expected 2")]
    EulerViolation(i64),
    #[error("pointed vertex {0} out of range ({1} vertices)")]
    BadPointedVertex(usize, usize),
    #[error("root half-edge {0} out of range ({1} half-edges)")]
    BadRootHalfEdge(usize, usize),
    #[error("malformed map text: {0}")]
    Parse(String),
}

/// Root-edge class of a rooted pointed map: sign of
/// `d(pointed, target) - d(pointed, origin)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapClass {
    Positive,
    Negative,
    Null,
}

/// One face orbit: its id, degree, and the half-edge cycle tracing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub id: usize,
    pub degree: usize,
    pub half_edges: Vec<u32>,
}

/// Rooted pointed planar map as a half-edge rotation system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinatorialMap {
    opposite: Vec<u32>,
    next_at_vertex: Vec<u32>,
    /// Origin vertex of each half-edge; vertices are numbered by first
    /// appearance when scanning half-edge ids upward.
    vertex_of: Vec<u32>,
    n_vertices: usize,
    root_half_edge: Option<u32>,
    pointed_vertex: u32,
}

impl CombinatorialMap {
    /// The vertex map: no edges, a single vertex bounding a face of degree 0.
    pub fn vertex_map() -> Self {
        CombinatorialMap {
            opposite: Vec::new(),
            next_at_vertex: Vec::new(),
            vertex_of: Vec::new(),
            n_vertices: 1,
            root_half_edge: None,
            pointed_vertex: 0,
        }
    }

    /// Validates permutations, connectivity and the Euler count, then labels
    /// vertices by first half-edge appearance.
    pub fn new(
        opposite: Vec<u32>,
        next_at_vertex: Vec<u32>,
        root_half_edge: Option<u32>,
        pointed_vertex: u32,
    ) -> Result<Self, MapError> {
        let h = opposite.len();
        if h == 0 {
            if next_at_vertex.is_empty() && root_half_edge.is_none() && pointed_vertex == 0 {
                return Ok(Self::vertex_map());
            }
            return Err(MapError::Parse("empty map must encode the vertex map".into()));
        }
        if h % 2 != 0 {
            return Err(MapError::BadInvolution(h));
        }
        if next_at_vertex.len() != h {
            return Err(MapError::BadPermutation);
        }
        for (i, &o) in opposite.iter().enumerate() {
            if o as usize >= h || o as usize == i || opposite[o as usize] as usize != i {
                return Err(MapError::BadInvolution(i));
            }
        }
        let mut seen = vec![false; h];
        for &nx in &next_at_vertex {
            if nx as usize >= h || seen[nx as usize] {
                return Err(MapError::BadPermutation);
            }
            seen[nx as usize] = true;
        }
        // Vertex orbits of next_at_vertex.
        let mut vertex_of = vec![u32::MAX; h];
        let mut n_vertices = 0u32;
        for start in 0..h {
            if vertex_of[start] != u32::MAX {
                continue;
            }
            let mut cur = start;
            loop {
                vertex_of[cur] = n_vertices;
                cur = next_at_vertex[cur] as usize;
                if cur == start {
                    break;
                }
            }
            n_vertices += 1;
        }
        let map = CombinatorialMap {
            opposite,
            next_at_vertex,
            vertex_of,
            n_vertices: n_vertices as usize,
            root_half_edge,
            pointed_vertex,
        };
        if let Some(r) = root_half_edge {
            if r as usize >= h {
                return Err(MapError::BadRootHalfEdge(r as usize, h));
            }
        }
        if pointed_vertex as usize >= map.n_vertices {
            return Err(MapError::BadPointedVertex(
                pointed_vertex as usize,
                map.n_vertices,
            ));
        }
        // Connectivity over half-edges via next and opposite.
        let mut reach = vec![false; h];
        let mut queue = VecDeque::new();
        reach[0] = true;
        queue.push_back(0usize);
        while let Some(x) = queue.pop_front() {
            for y in [map.next_at_vertex[x] as usize, map.opposite[x] as usize] {
                if !reach[y] {
                    reach[y] = true;
                    queue.push_back(y);
                }
            }
        }
        if reach.iter().any(|r| !r) {
            return Err(MapError::Disconnected);
        }
        let euler = map.n_vertices as i64 - (h / 2) as i64 + map.count_faces() as i64;
        if euler != 2 {
            return Err(MapError::EulerViolation(euler));
        }
        Ok(map)
    }

    pub fn n_half_edges(&self) -> usize {
        self.opposite.len()
    }

    pub fn n_edges(&self) -> usize {
        self.opposite.len() / 2
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn is_vertex_map(&self) -> bool {
        self.opposite.is_empty()
    }

    pub fn root_half_edge(&self) -> Option<u32> {
        self.root_half_edge
    }

    pub fn pointed_vertex(&self) -> u32 {
        self.pointed_vertex
    }

    pub fn opposite(&self, h: u32) -> u32 {
        self.opposite[h as usize]
    }

    pub fn next_at_vertex(&self, h: u32) -> u32 {
        self.next_at_vertex[h as usize]
    }

    pub fn vertex_of(&self, h: u32) -> u32 {
        self.vertex_of[h as usize]
    }

    fn count_faces(&self) -> usize {
        if self.opposite.is_empty() {
            return 1;
        }
        let h = self.opposite.len();
        let mut seen = vec![false; h];
        let mut faces = 0;
        for start in 0..h {
            if seen[start] {
                continue;
            }
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cur = self.next_at_vertex[self.opposite[cur] as usize] as usize;
            }
            faces += 1;
        }
        faces
    }

    /// Face orbits of `h -> next(opposite(h))` with their degrees. The degree
    /// counts half-edge incidences, so an isthmus contributes twice to its
    /// single face. The vertex map has one face of degree 0.
    pub fn faces(&self) -> Vec<Face> {
        if self.opposite.is_empty() {
            return vec![Face {
                id: 0,
                degree: 0,
                half_edges: Vec::new(),
            }];
        }
        let h = self.opposite.len();
        let mut seen = vec![false; h];
        let mut faces = Vec::new();
        for start in 0..h {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cycle.push(cur as u32);
                cur = self.next_at_vertex[self.opposite[cur] as usize] as usize;
            }
            faces.push(Face {
                id: faces.len(),
                degree: cycle.len(),
                half_edges: cycle,
            });
        }
        faces
    }

    /// BFS distances from a vertex over the underlying graph.
    pub fn distances_from(&self, source: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n_vertices];
        if self.is_vertex_map() {
            dist[source as usize] = 0;
            return dist;
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); self.n_vertices];
        for h in 0..self.opposite.len() {
            let u = self.vertex_of[h];
            let v = self.vertex_of[self.opposite[h] as usize];
            adj[u as usize].push(v);
        }
        let mut queue = VecDeque::new();
        dist[source as usize] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &w in &adj[u as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Positive, negative or null according to
    /// `d(pointed, e+) - d(pointed, e-)`; the vertex map is positive by
    /// convention.
    pub fn classify(&self) -> MapClass {
        let root = match self.root_half_edge {
            None => return MapClass::Positive,
            Some(r) => r,
        };
        let origin = self.vertex_of(root);
        let target = self.vertex_of(self.opposite(root));
        let dist = self.distances_from(self.pointed_vertex);
        let d_minus = dist[origin as usize];
        let d_plus = dist[target as usize];
        match d_plus.cmp(&d_minus) {
            std::cmp::Ordering::Greater => MapClass::Positive,
            std::cmp::Ordering::Less => MapClass::Negative,
            std::cmp::Ordering::Equal => MapClass::Null,
        }
    }

    /// Simple pointed graph underlying the map: multi-edges collapse, loops
    /// drop, the root is the pointed vertex.
    pub fn to_pointed_graph(&self) -> PointedGraph {
        let edges = (0..self.opposite.len()).filter_map(|h| {
            let u = self.vertex_of[h] as usize;
            let v = self.vertex_of[self.opposite[h] as usize] as usize;
            (u < v).then_some((u, v))
        });
        PointedGraph::new(self.n_vertices, edges, self.pointed_vertex as usize)
            .expect("a valid map yields a connected graph")
    }

    /// Text format: `H root pointed` then `opposite` then `next_at_vertex`,
    /// each as `H` integers on one line. `H = 0` with root `-1` encodes the
    /// vertex map and both permutation lines are empty.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let root = self.root_half_edge.map_or(-1i64, |r| r as i64);
        let _ = writeln!(
            s,
            "{} {} {}",
            self.opposite.len(),
            root,
            self.pointed_vertex
        );
        let join = |xs: &[u32]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(s, "{}", join(&self.opposite));
        let _ = writeln!(s, "{}", join(&self.next_at_vertex));
        s
    }

    pub fn from_text(text: &str) -> Result<Self, MapError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| MapError::Parse("empty input".into()))?;
        let mut parts = header.split_whitespace();
        let mut next_int = |what: &str| -> Result<i64, MapError> {
            parts
                .next()
                .ok_or_else(|| MapError::Parse(format!("missing {what}")))?
                .parse::<i64>()
                .map_err(|e| MapError::Parse(format!("{what}: {e}")))
        };
        let h = next_int("half-edge count")?;
        let root = next_int("root half-edge")?;
        let pointed = next_int("pointed vertex")?;
        if h < 0 || pointed < 0 {
            return Err(MapError::Parse("negative count".into()));
        }
        let parse_row = |line: Option<&str>, what: &str| -> Result<Vec<u32>, MapError> {
            let line = line.unwrap_or("");
            let row: Result<Vec<u32>, _> = line
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect();
            let row = row.map_err(|e| MapError::Parse(format!("{what}: {e}")))?;
            if row.len() != h as usize {
                return Err(MapError::Parse(format!(
                    "{what}: expected {h} entries, got {}",
                    row.len()
                )));
            }
            Ok(row)
        };
        let opposite = parse_row(lines.next(), "opposite")?;
        let next_at_vertex = parse_row(lines.next(), "next_at_vertex")?;
        let root = if root < 0 { None } else { Some(root as u32) };
        Self::new(opposite, next_at_vertex, root, pointed as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Single edge on two vertices, rooted at the half-edge out of the
    /// pointed vertex.
    fn single_edge() -> CombinatorialMap {
        CombinatorialMap::new(vec![1, 0], vec![0, 1], Some(0), 0).unwrap()
    }

    /// A 4-cycle embedded in the plane.
    fn square() -> CombinatorialMap {
        // edge i has halves 2i (at vertex i) and 2i+1 (at vertex i+1 mod 4)
        let opposite = vec![1, 0, 3, 2, 5, 4, 7, 6];
        // rotation at vertex v: [incoming half of edge v-1, outgoing half of edge v]
        let next = {
            let mut next = vec![0u32; 8];
            let rot: [[u32; 2]; 4] = [[7, 0], [1, 2], [3, 4], [5, 6]];
            for r in rot {
                next[r[0] as usize] = r[1];
                next[r[1] as usize] = r[0];
            }
            next
        };
        CombinatorialMap::new(opposite, next, Some(0), 0).unwrap()
    }

    fn loop_at_root() -> CombinatorialMap {
        CombinatorialMap::new(vec![1, 0], vec![1, 0], Some(0), 0).unwrap()
    }

    #[test]
    fn vertex_map_has_one_degree_zero_face() {
        let dagger = CombinatorialMap::vertex_map();
        let faces = dagger.faces();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].degree, 0);
        assert_eq!(dagger.n_vertices(), 1);
    }

    #[test]
    fn single_edge_has_one_degree_two_face() {
        let m = single_edge();
        let faces = m.faces();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].degree, 2);
        assert_eq!(m.n_vertices(), 2);
    }

    #[test]
    fn square_has_two_degree_four_faces() {
        let m = square();
        let mut degs: Vec<usize> = m.faces().iter().map(|f| f.degree).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![4, 4]);
        assert_eq!(m.n_vertices(), 4);
    }

    #[test]
    fn degree_sum_is_twice_edges() {
        for m in [single_edge(), square(), loop_at_root()] {
            let sum: usize = m.faces().iter().map(|f| f.degree).sum();
            assert_eq!(sum, 2 * m.n_edges());
        }
    }

    #[test]
    fn classification() {
        assert_eq!(CombinatorialMap::vertex_map().classify(), MapClass::Positive);
        assert_eq!(single_edge().classify(), MapClass::Positive);
        assert_eq!(loop_at_root().classify(), MapClass::Null);
        // reverse the root of the single edge: negative
        let m = CombinatorialMap::new(vec![1, 0], vec![0, 1], Some(1), 0).unwrap();
        assert_eq!(m.classify(), MapClass::Negative);
    }

    #[test]
    fn classify_invariant_under_relabeling() {
        // Relabel half-edges of the square by an arbitrary permutation.
        let m = square();
        let perm: Vec<u32> = vec![3, 5, 0, 7, 2, 6, 1, 4];
        let h = m.n_half_edges();
        let mut opposite = vec![0u32; h];
        let mut next = vec![0u32; h];
        for old in 0..h as u32 {
            opposite[perm[old as usize] as usize] = perm[m.opposite(old) as usize];
            next[perm[old as usize] as usize] = perm[m.next_at_vertex(old) as usize];
        }
        let root = perm[m.root_half_edge().unwrap() as usize];
        // vertex ids shift; find the relabeled pointed vertex by tracking a half-edge
        let probe = (0..h as u32)
            .find(|&x| m.vertex_of(x) == m.pointed_vertex())
            .unwrap();
        let m2 = CombinatorialMap::new(opposite.clone(), next.clone(), Some(root), 0).unwrap();
        let pointed2 = m2.vertex_of(perm[probe as usize]);
        let m2 = CombinatorialMap::new(opposite, next, Some(root), pointed2).unwrap();
        assert_eq!(m.classify(), m2.classify());
    }

    #[test]
    fn euler_violation_is_caught() {
        // A "rotation" pairing the square's edges into a genus-1 gadget:
        // two vertices, two edges, orbits chosen so F = 1.
        let opposite = vec![1, 0, 3, 2];
        let next = vec![2, 3, 1, 0];
        match CombinatorialMap::new(opposite, next, Some(0), 0) {
            Err(MapError::EulerViolation(_)) => {}
            other => panic!("expected Euler violation, got {other:?}"),
        }
    }

    #[test]
    fn text_round_trip() {
        for m in [
            CombinatorialMap::vertex_map(),
            single_edge(),
            square(),
            loop_at_root(),
        ] {
            let parsed = CombinatorialMap::from_text(&m.to_text()).unwrap();
            assert_eq!(m, parsed);
        }
        assert!(CombinatorialMap::from_text("2 0 0\n1 0\n").is_err());
        assert!(CombinatorialMap::from_text("2 0 0\n0 1\n0 1\n").is_err());
    }

    #[test]
    fn pointed_graph_collapses_loops_and_multiedges() {
        let m = loop_at_root();
        let g = m.to_pointed_graph();
        assert_eq!(g.n_vertices(), 1);
        assert!(g.edges().is_empty());
    }
}
