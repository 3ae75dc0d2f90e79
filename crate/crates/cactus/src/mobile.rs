//! Four-type plane trees, admissible integer labels, contours, shuffling,
//! and uniform sampling of admissible labelings.
//!
//! Vertices at even generations carry types 1 or 2 and integer labels;
//! vertices at odd generations carry types 3 or 4 and no label. Around every
//! odd-generation vertex the cyclic sequence (parent, children..., parent)
//! must satisfy `next >= current - 1`, strengthened to `next >= current`
//! when the next vertex has type 2. Label vectors around an odd vertex are
//! sampled uniformly from that finite constraint set by an exact count-and-
//! draw dynamic program over partial values.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::{BigUint, RandBigInt};
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexType {
    T1,
    T2,
    T3,
    T4,
}

impl VertexType {
    pub fn as_u8(self) -> u8 {
        match self {
            VertexType::T1 => 1,
            VertexType::T2 => 2,
            VertexType::T3 => 3,
            VertexType::T4 => 4,
        }
    }

    pub fn from_u8(x: u8) -> Option<Self> {
        match x {
            1 => Some(VertexType::T1),
            2 => Some(VertexType::T2),
            3 => Some(VertexType::T3),
            4 => Some(VertexType::T4),
            _ => None,
        }
    }

    pub fn is_even_kind(self) -> bool {
        matches!(self, VertexType::T1 | VertexType::T2)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("vertex {0} appears before its parent {1}; ids must be topological")]
    NotTopological(u32, u32),
    #[error("child lists disagree with parents at vertex {0}")]
    Inconsistent(u32),
    #[error("malformed tree text: {0}")]
    Parse(String),
}

/// Ordered rooted tree with a type per vertex. Vertex 0 is the root and ids
/// are topologically ordered (every parent id precedes its children).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourTypeTree {
    types: Vec<VertexType>,
    parent: Vec<u32>, // parent[0] is ignored
    children: Vec<Vec<u32>>,
}

impl FourTypeTree {
    pub fn singleton(root_type: VertexType) -> Self {
        FourTypeTree {
            types: vec![root_type],
            parent: vec![u32::MAX],
            children: vec![Vec::new()],
        }
    }

    pub fn from_parts(
        types: Vec<VertexType>,
        children: Vec<Vec<u32>>,
    ) -> Result<Self, TreeError> {
        assert_eq!(types.len(), children.len());
        let n = types.len();
        let mut parent = vec![u32::MAX; n];
        for (v, ch) in children.iter().enumerate() {
            for &c in ch {
                if c as usize >= n || parent[c as usize] != u32::MAX || c == 0 {
                    return Err(TreeError::Inconsistent(v as u32));
                }
                parent[c as usize] = v as u32;
            }
        }
        for v in 1..n {
            if parent[v] == u32::MAX {
                return Err(TreeError::Inconsistent(v as u32));
            }
            if parent[v] >= v as u32 {
                return Err(TreeError::NotTopological(v as u32, parent[v]));
            }
        }
        Ok(FourTypeTree {
            types,
            parent,
            children,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.types.len()
    }

    pub fn n_edges(&self) -> usize {
        self.types.len() - 1
    }

    pub fn vertex_type(&self, v: u32) -> VertexType {
        self.types[v as usize]
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        if v == 0 {
            None
        } else {
            Some(self.parent[v as usize])
        }
    }

    pub fn children(&self, v: u32) -> &[u32] {
        &self.children[v as usize]
    }

    /// Depth of every vertex; ids are topological so one pass suffices.
    pub fn depths(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.n_vertices()];
        for v in 1..self.n_vertices() {
            d[v] = d[self.parent[v] as usize] + 1;
        }
        d
    }

    pub fn count_type(&self, t: VertexType) -> usize {
        self.types.iter().filter(|&&x| x == t).count()
    }

    /// Full contour sequence `v_0 .. v_{2p}` (first = last = root) by the
    /// corner walk: descend to the first unvisited child, else ascend.
    pub fn full_contour(&self) -> Vec<u32> {
        let n = self.n_vertices();
        let mut cursor = vec![0u32; n];
        let mut contour = Vec::with_capacity(2 * n - 1);
        let mut cur = 0u32;
        contour.push(0);
        loop {
            let c = cursor[cur as usize] as usize;
            if c < self.children[cur as usize].len() {
                cursor[cur as usize] += 1;
                cur = self.children[cur as usize][c];
                contour.push(cur);
            } else if cur == 0 {
                break;
            } else {
                cur = self.parent[cur as usize];
                contour.push(cur);
            }
        }
        contour
    }

    /// Modified contour `u_0 .. u_p`: every second vertex of the full
    /// contour; all entries are even-generation vertices and `u_p = u_0`.
    pub fn modified_contour(&self) -> Vec<u32> {
        self.full_contour()
            .into_iter()
            .step_by(2)
            .collect()
    }

    /// Reverses children blocks at odd-generation vertices, one fair coin per
    /// vertex consumed in depth-first order (`next_u32() & 1`). Returns the
    /// shuffled tree and the vertex bijection `sigma` (old id -> new id).
    pub fn shuffle<R: RngCore + ?Sized>(&self, rng: &mut R) -> (FourTypeTree, Vec<u32>) {
        let n = self.n_vertices();
        let depths = self.depths();
        // Coins in depth-first (preorder) vertex order.
        let mut coin = vec![false; n];
        {
            let mut stack = vec![0u32];
            while let Some(v) = stack.pop() {
                if depths[v as usize] % 2 == 1 {
                    coin[v as usize] = rng.next_u32() & 1 == 1;
                }
                for &c in self.children[v as usize].iter().rev() {
                    stack.push(c);
                }
            }
        }
        let mut sigma = vec![u32::MAX; n];
        let mut types = Vec::with_capacity(n);
        let mut children: Vec<Vec<u32>> = Vec::with_capacity(n);
        let mut order: Vec<(u32, u32)> = vec![(0, u32::MAX)]; // (old id, new parent)
        let mut stack = vec![0usize];
        // Build in preorder of the new tree.
        while let Some(slot) = stack.pop() {
            let (old, new_parent) = order[slot];
            let new = types.len() as u32;
            sigma[old as usize] = new;
            types.push(self.types[old as usize]);
            children.push(Vec::new());
            if new_parent != u32::MAX {
                children[new_parent as usize].push(new);
            }
            let kids = &self.children[old as usize];
            let flipped = coin[old as usize];
            let iter: Box<dyn Iterator<Item = &u32>> = if flipped {
                Box::new(kids.iter())
            } else {
                Box::new(kids.iter().rev())
            };
            // Push in reverse of desired order so the stack pops them in order.
            for &c in iter {
                order.push((c, new));
                stack.push(order.len() - 1);
            }
        }
        // children lists were filled in pop order, which is the new order.
        let tree = FourTypeTree {
            types,
            parent: {
                let mut parent = vec![u32::MAX; n];
                for (v, ch) in children.iter().enumerate() {
                    for &c in ch {
                        parent[c as usize] = v as u32;
                    }
                }
                parent
            },
            children,
        };
        (tree, sigma)
    }

    /// Vertices of type 1 or 2 on the tree path from `u` to `v`, inclusive.
    pub fn even_path(&self, u: u32, v: u32) -> Vec<u32> {
        let depths = self.depths();
        let (mut a, mut b) = (u, v);
        let mut left = vec![a];
        let mut right = vec![b];
        while depths[a as usize] > depths[b as usize] {
            a = self.parent[a as usize];
            left.push(a);
        }
        while depths[b as usize] > depths[a as usize] {
            b = self.parent[b as usize];
            right.push(b);
        }
        while a != b {
            a = self.parent[a as usize];
            b = self.parent[b as usize];
            left.push(a);
            right.push(b);
        }
        right.pop();
        left.extend(right.into_iter().rev());
        left.retain(|&w| self.types[w as usize].is_even_kind());
        left
    }
}

/// A four-type tree with labels on its even-generation vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mobile {
    pub tree: FourTypeTree,
    /// Indexed by vertex id; entries at odd generations are zero and unused.
    labels: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RootType(VertexType),
    ChildOfType1NotType3 { parent: u32, child: u32 },
    Type2ChildCount { vertex: u32, got: usize, want: usize },
    Type2ChildNotType4 { vertex: u32, child: u32 },
    OddChildType { parent: u32, child: u32 },
    TypeParityMismatch { vertex: u32 },
    RootLabelNotZero(i64),
    LabelIncrement { odd_vertex: u32, from: u32, to: u32 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RootType(t) => write!(f, "root has type {}", t.as_u8()),
            Violation::ChildOfType1NotType3 { parent, child } => {
                write!(f, "child {child} of type-1 vertex {parent} is not type 3")
            }
            Violation::Type2ChildCount { vertex, got, want } => {
                write!(f, "type-2 vertex {vertex} has {got} children, wants {want}")
            }
            Violation::Type2ChildNotType4 { vertex, child } => {
                write!(f, "child {child} of type-2 vertex {vertex} is not type 4")
            }
            Violation::OddChildType { parent, child } => {
                write!(f, "child {child} of odd vertex {parent} is not type 1 or 2")
            }
            Violation::TypeParityMismatch { vertex } => {
                write!(f, "vertex {vertex} has a type of the wrong parity")
            }
            Violation::RootLabelNotZero(l) => write!(f, "root label is {l}"),
            Violation::LabelIncrement { odd_vertex, from, to } => {
                write!(f, "label step {from} -> {to} around odd vertex {odd_vertex} violated")
            }
        }
    }
}

impl Mobile {
    pub fn new(tree: FourTypeTree, labels: Vec<i64>) -> Self {
        assert_eq!(labels.len(), tree.n_vertices());
        Mobile { tree, labels }
    }

    pub fn label(&self, v: u32) -> i64 {
        debug_assert!(self.tree.vertex_type(v).is_even_kind());
        self.labels[v as usize]
    }

    pub fn min_label(&self) -> i64 {
        self.tree
            .types
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_even_kind())
            .map(|(v, _)| self.labels[v])
            .min()
            .expect("root is always labeled")
    }

    /// Checks structural rules (i)-(iv) and label rules a-b, reporting every
    /// violation rather than stopping at the first.
    pub fn validate(&self) -> Vec<Violation> {
        let t = &self.tree;
        let mut out = Vec::new();
        let depths = t.depths();
        let root_type = t.vertex_type(0);
        if !root_type.is_even_kind() {
            out.push(Violation::RootType(root_type));
        }
        for v in 0..t.n_vertices() as u32 {
            let ty = t.vertex_type(v);
            if ty.is_even_kind() != (depths[v as usize] % 2 == 0) {
                out.push(Violation::TypeParityMismatch { vertex: v });
            }
            match ty {
                VertexType::T1 => {
                    for &c in t.children(v) {
                        if t.vertex_type(c) != VertexType::T3 {
                            out.push(Violation::ChildOfType1NotType3 { parent: v, child: c });
                        }
                    }
                }
                VertexType::T2 => {
                    let want = if v == 0 { 2 } else { 1 };
                    if t.children(v).len() != want {
                        out.push(Violation::Type2ChildCount {
                            vertex: v,
                            got: t.children(v).len(),
                            want,
                        });
                    }
                    for &c in t.children(v) {
                        if t.vertex_type(c) != VertexType::T4 {
                            out.push(Violation::Type2ChildNotType4 { vertex: v, child: c });
                        }
                    }
                }
                VertexType::T3 | VertexType::T4 => {
                    for &c in t.children(v) {
                        if !t.vertex_type(c).is_even_kind() {
                            out.push(Violation::OddChildType { parent: v, child: c });
                        }
                    }
                }
            }
        }
        if root_type.is_even_kind() && self.labels[0] != 0 {
            out.push(Violation::RootLabelNotZero(self.labels[0]));
        }
        // Label rule b around every odd-generation vertex.
        for v in 0..t.n_vertices() as u32 {
            if t.vertex_type(v).is_even_kind() || depths[v as usize] % 2 != 1 {
                continue;
            }
            let parent = t.parent(v).expect("odd vertex has a parent");
            if !t.vertex_type(parent).is_even_kind() {
                continue; // parity already reported
            }
            let kids = t.children(v);
            if kids.iter().any(|&c| !t.vertex_type(c).is_even_kind()) {
                continue;
            }
            let mut cycle = Vec::with_capacity(kids.len() + 2);
            cycle.push(parent);
            cycle.extend_from_slice(kids);
            cycle.push(parent);
            for w in cycle.windows(2) {
                let (cur, next) = (w[0], w[1]);
                let bound = if t.vertex_type(next) == VertexType::T2 {
                    self.labels[cur as usize]
                } else {
                    self.labels[cur as usize] - 1
                };
                if self.labels[next as usize] < bound {
                    out.push(Violation::LabelIncrement {
                        odd_vertex: v,
                        from: cur,
                        to: next,
                    });
                }
            }
        }
        out
    }

    /// One preorder record per vertex: `type child_count [label]`, labels on
    /// even generations only.
    pub fn to_text(&self) -> String {
        let t = &self.tree;
        let depths = t.depths();
        let mut s = String::new();
        let mut stack = vec![0u32];
        while let Some(v) = stack.pop() {
            let ty = t.vertex_type(v);
            if depths[v as usize] % 2 == 0 {
                let _ = writeln!(
                    s,
                    "{} {} {}",
                    ty.as_u8(),
                    t.children(v).len(),
                    self.labels[v as usize]
                );
            } else {
                let _ = writeln!(s, "{} {}", ty.as_u8(), t.children(v).len());
            }
            for &c in t.children(v).iter().rev() {
                stack.push(c);
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, TreeError> {
        struct Rec {
            ty: VertexType,
            k: usize,
            label: i64,
        }
        let mut recs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let ty = it
                .next()
                .and_then(|x| x.parse::<u8>().ok())
                .and_then(VertexType::from_u8)
                .ok_or_else(|| TreeError::Parse(format!("line {}: bad type", lineno + 1)))?;
            let k = it
                .next()
                .and_then(|x| x.parse::<usize>().ok())
                .ok_or_else(|| TreeError::Parse(format!("line {}: bad child count", lineno + 1)))?;
            let label = if ty.is_even_kind() {
                it.next()
                    .and_then(|x| x.parse::<i64>().ok())
                    .ok_or_else(|| TreeError::Parse(format!("line {}: missing label", lineno + 1)))?
            } else {
                0
            };
            recs.push(Rec { ty, k, label });
        }
        if recs.is_empty() {
            return Err(TreeError::Parse("no records".into()));
        }
        // Preorder ids are topological by construction.
        let n = recs.len();
        let types: Vec<VertexType> = recs.iter().map(|r| r.ty).collect();
        let labels: Vec<i64> = recs.iter().map(|r| r.label).collect();
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut stack: Vec<(u32, usize)> = Vec::new(); // (vertex, remaining children)
        for v in 0..n {
            if v > 0 {
                let top = stack
                    .last_mut()
                    .ok_or_else(|| TreeError::Parse("extra records after root closed".into()))?;
                children[top.0 as usize].push(v as u32);
                top.1 -= 1;
            }
            while let Some(&(_, 0)) = stack.last() {
                stack.pop();
            }
            if recs[v].k > 0 {
                stack.push((v as u32, recs[v].k));
            }
        }
        if !stack.is_empty() {
            return Err(TreeError::Parse("records ended before all children seen".into()));
        }
        let tree = FourTypeTree::from_parts(types, children)?;
        Ok(Mobile::new(tree, labels))
    }
}

/// Exact-count tables for one odd-vertex profile. `suffix[j][m]` holds
/// `sum_{w >= lo_j + m} N_j(lo_j + m)` where `N_j(v)` counts admissible
/// completions from partial value `v` at step `j`.
struct ProfileTables {
    lo: Vec<i64>,
    counts: Vec<Vec<BigUint>>,
    suffix: Vec<Vec<BigUint>>,
}

/// Profile key: parent type flag plus per-child type flags (true = type 1).
type ProfileKey = (bool, Vec<bool>);

#[derive(Default)]
pub struct LabelSampler {
    cache: HashMap<ProfileKey, ProfileTables>,
}

impl LabelSampler {
    pub fn new() -> Self {
        Self::default()
    }

    fn tables(&mut self, key: ProfileKey) -> &ProfileTables {
        self.cache.entry(key).or_insert_with_key(|(parent1, kids)| {
            let k = kids.len();
            // d[j] for steps j = 1..=k+1: 1 when the step destination is
            // type 1 (may drop by one), 0 when it is type 2.
            let mut d = Vec::with_capacity(k + 1);
            for &child_is_1 in kids.iter() {
                d.push(if child_is_1 { 1i64 } else { 0 });
            }
            d.push(if *parent1 { 1 } else { 0 });
            // Reachability envelope: lo_j = -sum_{l<=j} d_l, hi_j = sum_{l>j} d_l.
            let mut lo = vec![0i64; k + 2];
            let mut hi = vec![0i64; k + 2];
            for j in 1..=k + 1 {
                lo[j] = lo[j - 1] - d[j - 1];
            }
            for j in (0..=k).rev() {
                hi[j] = hi[j + 1] + d[j];
            }
            lo[k + 1] = 0;
            hi[k + 1] = 0;
            let mut counts: Vec<Vec<BigUint>> = vec![Vec::new(); k + 2];
            let mut suffix: Vec<Vec<BigUint>> = vec![Vec::new(); k + 2];
            counts[k + 1] = vec![BigUint::from(1u32)];
            suffix[k + 1] = vec![BigUint::from(1u32)];
            for j in (0..=k).rev() {
                let width = (hi[j] - lo[j] + 1) as usize;
                let mut row = Vec::with_capacity(width);
                for off in 0..width {
                    let v = lo[j] + off as i64;
                    let from = v - d[j]; // minimal next value
                    let idx = from - lo[j + 1];
                    let s = if idx <= 0 {
                        suffix[j + 1][0].clone()
                    } else if (idx as usize) < suffix[j + 1].len() {
                        suffix[j + 1][idx as usize].clone()
                    } else {
                        BigUint::from(0u32)
                    };
                    row.push(s);
                }
                // suffix sums over this row
                let mut suf = vec![BigUint::from(0u32); width + 1];
                for off in (0..width).rev() {
                    suf[off] = &suf[off + 1] + &row[off];
                }
                suf.pop();
                counts[j] = row;
                suffix[j] = suf;
            }
            ProfileTables { lo, counts, suffix }
        })
    }

    /// Number of admissible increment vectors for the given profile.
    pub fn count(&mut self, parent_is_type1: bool, child_is_type1: &[bool]) -> BigUint {
        let t = self.tables((parent_is_type1, child_is_type1.to_vec()));
        let idx = (0 - t.lo[0]) as usize;
        t.counts[0][idx].clone()
    }

    /// Draws a uniform admissible increment vector `(i_1 .. i_k)`; `i_j` is
    /// the label of child `j` minus the label of the odd vertex's parent.
    pub fn sample<R: RngCore + ?Sized>(
        &mut self,
        parent_is_type1: bool,
        child_is_type1: &[bool],
        rng: &mut R,
    ) -> Vec<i64> {
        let k = child_is_type1.len();
        if k == 0 {
            return Vec::new();
        }
        let t = self.tables((parent_is_type1, child_is_type1.to_vec()));
        let mut d = Vec::with_capacity(k + 1);
        for &c in child_is_type1 {
            d.push(if c { 1i64 } else { 0 });
        }
        d.push(if parent_is_type1 { 1 } else { 0 });
        let mut out = Vec::with_capacity(k);
        let mut v = 0i64;
        for j in 0..k {
            let from = v - d[j];
            let lo_next = t.lo[j + 1];
            let start = from.max(lo_next);
            let start_idx = (start - lo_next) as usize;
            let total = t.suffix[j + 1][start_idx].clone();
            debug_assert!(total > BigUint::from(0u32));
            let mut r = rng.gen_biguint_below(&total);
            let mut w = start;
            loop {
                let idx = (w - lo_next) as usize;
                let c = &t.counts[j + 1][idx];
                if &r < c {
                    break;
                }
                r -= c;
                w += 1;
            }
            out.push(w);
            v = w;
        }
        out
    }
}

/// Draws labels uniformly over all admissible labelings of `tree`:
/// independently for each odd-generation vertex, a uniform increment vector
/// from its cyclic constraint set, accumulated from the root (label 0).
/// Odd vertices are processed in increasing id order.
pub fn sample_labels_uniform<R: RngCore + ?Sized>(
    tree: &FourTypeTree,
    sampler: &mut LabelSampler,
    rng: &mut R,
) -> Mobile {
    let n = tree.n_vertices();
    let depths = tree.depths();
    let mut labels = vec![0i64; n];
    for v in 0..n as u32 {
        if depths[v as usize] % 2 != 1 {
            continue;
        }
        let parent = tree.parent(v).expect("odd vertex has a parent");
        let kids = tree.children(v);
        if kids.is_empty() {
            continue;
        }
        let flags: Vec<bool> = kids
            .iter()
            .map(|&c| tree.vertex_type(c) == VertexType::T1)
            .collect();
        let parent1 = tree.vertex_type(parent) == VertexType::T1;
        let inc = sampler.sample(parent1, &flags, rng);
        let base = labels[parent as usize];
        for (&c, &i) in kids.iter().zip(inc.iter()) {
            labels[c as usize] = base + i;
        }
    }
    Mobile::new(tree.clone(), labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(x: u8) -> VertexType {
        VertexType::from_u8(x).unwrap()
    }

    /// root(1) - a(3) - b(1), plus a second child c(3) of the root with two
    /// children d(1), e(2).
    fn sample_tree() -> FourTypeTree {
        FourTypeTree::from_parts(
            vec![t(1), t(3), t(1), t(3), t(1), t(2)],
            vec![vec![1, 3], vec![2], vec![], vec![4, 5], vec![], vec![]],
        )
        .unwrap()
    }

    #[test]
    fn contour_of_singleton() {
        let tree = FourTypeTree::singleton(t(1));
        assert_eq!(tree.modified_contour(), vec![0]);
    }

    #[test]
    fn contour_of_chain() {
        // root(1) - child(3) - grandchild(1)
        let tree = FourTypeTree::from_parts(
            vec![t(1), t(3), t(1)],
            vec![vec![1], vec![2], vec![]],
        )
        .unwrap();
        assert_eq!(tree.full_contour(), vec![0, 1, 2, 1, 0]);
        assert_eq!(tree.modified_contour(), vec![0, 2, 0]);
    }

    #[test]
    fn contour_multiplicities_match_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let tree = random_even_tree(&mut rng, 40);
            let contour = tree.full_contour();
            assert_eq!(contour.len(), 2 * tree.n_edges() + 1);
            let mut mult = vec![0usize; tree.n_vertices()];
            for &v in &contour[..contour.len() - 1] {
                mult[v as usize] += 1;
            }
            for v in 0..tree.n_vertices() as u32 {
                let deg = tree.children(v).len() + usize::from(v != 0);
                assert_eq!(mult[v as usize], deg.max(1), "vertex {v}");
            }
        }
    }

    /// Random tree alternating types 1 and 3 (structure-only fixture).
    fn random_even_tree(rng: &mut ChaCha8Rng, max_n: usize) -> FourTypeTree {
        use rand::Rng;
        let n = rng.gen_range(1..=max_n);
        let mut types = vec![t(1)];
        let mut children: Vec<Vec<u32>> = vec![Vec::new()];
        let mut depths = vec![0u32; 1];
        for v in 1..n as u32 {
            let p = rng.gen_range(0..v);
            let d = depths[p as usize] + 1;
            types.push(if d % 2 == 0 { t(1) } else { t(3) });
            depths.push(d);
            children.push(Vec::new());
            children[p as usize].push(v);
        }
        FourTypeTree::from_parts(types, children).unwrap()
    }

    #[test]
    fn validate_accepts_trivial_mobile() {
        let m = Mobile::new(FourTypeTree::singleton(t(1)), vec![0]);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn validate_rejects_type1_child_of_type1() {
        let tree =
            FourTypeTree::from_parts(vec![t(1), t(1)], vec![vec![1], vec![]]).unwrap();
        let m = Mobile::new(tree, vec![0, 0]);
        let v = m.validate();
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::ChildOfType1NotType3 { .. })));
    }

    #[test]
    fn validate_rejects_steep_label_drop() {
        // root(1, 0) - u(3) - child(1, -2): increment -2 < -1
        let tree = FourTypeTree::from_parts(
            vec![t(1), t(3), t(1)],
            vec![vec![1], vec![2], vec![]],
        )
        .unwrap();
        let m = Mobile::new(tree, vec![0, 0, -2]);
        let v = m.validate();
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::LabelIncrement { odd_vertex: 1, .. })));
    }

    #[test]
    fn shuffle_with_zero_coins_is_identity() {
        let tree = sample_tree();
        let mut rng = StepRng::new(0, 0);
        let (shuffled, sigma) = tree.shuffle(&mut rng);
        assert_eq!(shuffled, tree);
        assert_eq!(sigma, (0..tree.n_vertices() as u32).collect::<Vec<_>>());
    }

    #[test]
    fn shuffle_with_one_coins_reverses_blocks() {
        let tree = sample_tree();
        let mut rng = StepRng::new(u64::MAX, 0);
        let (shuffled, sigma) = tree.shuffle(&mut rng);
        // Odd vertices 1 and 3 flip; vertex 3 had children [d(1), e(2)],
        // so the images appear in order (e, d).
        let v3 = sigma[3];
        let kids = shuffled.children(v3);
        assert_eq!(shuffled.vertex_type(kids[0]), t(2));
        assert_eq!(shuffled.vertex_type(kids[1]), t(1));
        // Types transported by sigma.
        for v in 0..tree.n_vertices() as u32 {
            assert_eq!(tree.vertex_type(v), shuffled.vertex_type(sigma[v as usize]));
        }
    }

    #[test]
    fn shuffle_preserves_genealogy_and_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let tree = random_even_tree(&mut rng, 60);
            let (shuffled, sigma) = tree.shuffle(&mut rng);
            // Ancestor relation commutes with sigma.
            for v in 1..tree.n_vertices() as u32 {
                let p = tree.parent(v).unwrap();
                assert_eq!(
                    shuffled.parent(sigma[v as usize]).unwrap(),
                    sigma[p as usize]
                );
            }
            // Even-generation path transport.
            use rand::Rng;
            for _ in 0..10 {
                let u = rng.gen_range(0..tree.n_vertices()) as u32;
                let v = rng.gen_range(0..tree.n_vertices()) as u32;
                let path: Vec<u32> = tree
                    .even_path(u, v)
                    .into_iter()
                    .map(|w| sigma[w as usize])
                    .collect();
                let mut expect = shuffled.even_path(sigma[u as usize], sigma[v as usize]);
                // even_path fixes endpoint order; the transported path runs
                // the same way, so compare directly (or reversed if needed).
                if path.first() != expect.first() {
                    expect.reverse();
                }
                assert_eq!(path, expect);
            }
        }
    }

    #[test]
    fn shuffle_preserves_subtree_shape_multisets() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        // Canonical form of the *unordered* subtree: reversals inside a
        // subtree change its plane shape but not this.
        fn shape(tree: &FourTypeTree, v: u32) -> String {
            let mut kids: Vec<String> =
                tree.children(v).iter().map(|&c| shape(tree, c)).collect();
            kids.sort();
            format!("({})", kids.concat())
        }
        for _ in 0..10 {
            let tree = random_even_tree(&mut rng, 40);
            let (shuffled, sigma) = tree.shuffle(&mut rng);
            let depths = tree.depths();
            for v in 0..tree.n_vertices() as u32 {
                if depths[v as usize] % 2 != 0 {
                    continue;
                }
                let mut old: Vec<String> =
                    tree.children(v).iter().map(|&c| shape(&tree, c)).collect();
                let mut new: Vec<String> = shuffled
                    .children(sigma[v as usize])
                    .iter()
                    .map(|&c| shape(&shuffled, c))
                    .collect();
                old.sort();
                new.sort();
                assert_eq!(old, new);
            }
        }
    }

    #[test]
    fn label_set_small_cases() {
        let mut sampler = LabelSampler::new();
        // one type-1 child under a type-1 grandparent: A = {-1, 0, 1}
        assert_eq!(sampler.count(true, &[true]), BigUint::from(3u32));
        // one type-2 child: A = {0, 1}
        assert_eq!(sampler.count(true, &[false]), BigUint::from(2u32));
        // type-2 parent closing constraint: i_k <= 0
        assert_eq!(sampler.count(false, &[true]), BigUint::from(2u32)); // {-1, 0}
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            let inc = sampler.sample(true, &[true], &mut rng);
            assert!(inc[0] >= -1 && inc[0] <= 1);
            seen.insert(inc[0]);
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn label_counts_match_enumeration() {
        // Independent recursive enumeration of the cyclic constraint set.
        fn enumerate(parent1: bool, kids: &[bool]) -> u64 {
            fn rec(v: i64, j: usize, kids: &[bool], parent1: bool, hi: i64) -> u64 {
                if j == kids.len() {
                    let d = if parent1 { 1 } else { 0 };
                    return u64::from(0 >= v - d);
                }
                let d = if kids[j] { 1 } else { 0 };
                let mut total = 0;
                let mut w = v - d;
                while w <= hi {
                    total += rec(w, j + 1, kids, parent1, hi);
                    w += 1;
                }
                total
            }
            rec(0, 0, kids, parent1, kids.len() as i64 + 2)
        }
        let mut sampler = LabelSampler::new();
        for k in 0..=6usize {
            let kids = vec![true; k];
            assert_eq!(
                sampler.count(true, &kids),
                BigUint::from(enumerate(true, &kids)),
                "all type-1, k = {k}"
            );
        }
        // mixed profiles
        for (parent1, kids) in [
            (true, vec![true, false, true]),
            (false, vec![false, false]),
            (true, vec![false, true, false, true]),
            (false, vec![true, true, false]),
        ] {
            assert_eq!(
                sampler.count(parent1, &kids),
                BigUint::from(enumerate(parent1, &kids)),
                "{parent1} {kids:?}"
            );
        }
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let mut sampler = LabelSampler::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 90_000;
        let mut counts = HashMap::new();
        for _ in 0..n {
            let inc = sampler.sample(true, &[true, true], &mut rng);
            *counts.entry(inc).or_insert(0u64) += 1;
        }
        let total_vectors = sampler.count(true, &[true, true]);
        let tv: u64 = total_vectors.try_into().unwrap();
        let expect = n as f64 / tv as f64;
        let se = (expect * (1.0 - 1.0 / tv as f64)).sqrt();
        assert_eq!(counts.len() as u64, tv);
        for (inc, c) in counts {
            assert!(
                (c as f64 - expect).abs() < 5.0 * se,
                "{inc:?}: {c} vs {expect}"
            );
        }
    }

    #[test]
    fn shuffled_half_shifted_increments_are_centered() {
        // Draw increments for a fixed profile, flip a fair coin to reverse
        // (the single-vertex shuffle), shift type-2 coordinates by -1/2;
        // each coordinate must then be centered within 3 standard errors.
        use rand::Rng;
        let profiles: Vec<(bool, Vec<bool>)> = vec![
            (true, vec![true]),
            (true, vec![false]),
            (true, vec![true, false]),
            (true, vec![false, true, true]),
            (false, vec![true, true]),
        ];
        let mut sampler = LabelSampler::new();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 1_000_000u64;
        for (parent1, kids) in profiles {
            let k = kids.len();
            let mut sums = vec![0.0f64; k];
            let mut sqs = vec![0.0f64; k];
            let rev_kids: Vec<bool> = kids.iter().rev().copied().collect();
            for _ in 0..n {
                let flip = rng.gen::<bool>();
                let (inc, order): (Vec<i64>, Vec<usize>) = if flip {
                    // reversed block: child j takes the reversed draw's k+1-j
                    let raw = sampler.sample(parent1, &rev_kids, &mut rng);
                    let idx: Vec<usize> = (0..k).rev().collect();
                    (raw, idx)
                } else {
                    (sampler.sample(parent1, &kids, &mut rng), (0..k).collect())
                };
                for (pos, &src) in order.iter().enumerate() {
                    // The half-shift applies to both ends of the increment:
                    // subtract 1/2 at type-2 children, add it back when the
                    // reference parent is itself type 2.
                    let mut x = inc[src] as f64;
                    if !kids[pos] {
                        x -= 0.5;
                    }
                    if !parent1 {
                        x += 0.5;
                    }
                    sums[pos] += x;
                    sqs[pos] += x * x;
                }
            }
            for j in 0..k {
                let mean = sums[j] / n as f64;
                let var = sqs[j] / n as f64 - mean * mean;
                let se = (var / n as f64).sqrt();
                assert!(
                    mean.abs() <= 3.0 * se,
                    "profile ({parent1}, {kids:?}) coord {j}: mean {mean}, se {se}"
                );
            }
        }
    }

    #[test]
    fn sampled_mobiles_validate_and_are_contour_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut sampler = LabelSampler::new();
        for _ in 0..40 {
            let tree = random_even_tree(&mut rng, 80);
            let m = sample_labels_uniform(&tree, &mut sampler, &mut rng);
            assert!(m.validate().is_empty());
            let contour = m.tree.modified_contour();
            for w in contour.windows(2) {
                assert!(m.label(w[1]) >= m.label(w[0]) - 1);
            }
        }
    }

    #[test]
    fn mobile_text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut sampler = LabelSampler::new();
        for _ in 0..20 {
            let tree = random_even_tree(&mut rng, 30);
            let m = sample_labels_uniform(&tree, &mut sampler, &mut rng);
            // Decoding renumbers vertices in preorder, so compare texts:
            // encode . decode must be the identity on the wire format.
            let parsed = Mobile::from_text(&m.to_text()).unwrap();
            assert_eq!(parsed.to_text(), m.to_text());
            assert_eq!(Mobile::from_text(&parsed.to_text()).unwrap(), parsed);
            assert_eq!(
                parsed.tree.count_type(t(1)),
                m.tree.count_type(t(1))
            );
        }
        assert!(Mobile::from_text("").is_err());
        assert!(Mobile::from_text("1 2 0\n3 0\n").is_err());
    }
}
