//! The corner-chord construction turning labeled mobiles into rooted pointed
//! planar maps.
//!
//! Walking the modified contour, every corner draws one chord: to the added
//! vertex `rho` when its label attains the global minimum, otherwise to the
//! first later cyclic corner labeled one less (always a type-1 corner). The
//! chords are mutually non-crossing, so the rotation at every vertex can be
//! read off combinatorially: corners in contour order, and within a corner
//! the incoming chords nearest-source-first followed by the outgoing chord;
//! around `rho` the minimum corners in contour order. Type-2 vertices carry
//! exactly two chords, which are spliced into one edge when the vertex is
//! erased. The Euler check run by the map constructor certifies that this
//! bookkeeping produced a genus-zero rotation system.

use thiserror::Error;

use crate::map::{CombinatorialMap, MapClass};
use crate::mobile::{Mobile, VertexType, Violation};

#[derive(Debug, Error)]
pub enum BdgError {
    #[error("mobile is not admissible: {0:?}")]
    InvalidMobile(Vec<Violation>),
    #[error("variant {0:?} requires root type {1}, mobile has type {2}")]
    RootTypeMismatch(MapClass, u8, u8),
}

/// A constructed map together with the vertex correspondence back to the
/// mobile: `tree_to_map[v]` is the map vertex of the type-1 tree vertex `v`.
#[derive(Debug, Clone)]
pub struct MapFromMobile {
    pub map: CombinatorialMap,
    pub tree_to_map: Vec<Option<u32>>,
    pub rho: u32,
}

/// Chord target of one corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Rho,
    Corner(u32),
}

pub fn mobile_to_map(mobile: &Mobile, variant: MapClass) -> Result<MapFromMobile, BdgError> {
    let violations = mobile.validate();
    if !violations.is_empty() {
        return Err(BdgError::InvalidMobile(violations));
    }
    let tree = &mobile.tree;
    let root_type = tree.vertex_type(0);
    let want = match variant {
        MapClass::Positive | MapClass::Negative => VertexType::T1,
        MapClass::Null => VertexType::T2,
    };
    if root_type != want {
        return Err(BdgError::RootTypeMismatch(
            variant,
            want.as_u8(),
            root_type.as_u8(),
        ));
    }

    if tree.n_vertices() == 1 {
        // Single type-1 root: the vertex map.
        return Ok(MapFromMobile {
            map: CombinatorialMap::vertex_map(),
            tree_to_map: vec![None],
            rho: 0,
        });
    }

    // Corners: the modified contour without its closing repeat of the root.
    let mut corners = tree.modified_contour();
    corners.pop();
    let p = corners.len();
    let labels: Vec<i64> = corners.iter().map(|&u| mobile.label(u)).collect();
    let min_label = *labels.iter().min().expect("nonempty contour");

    // Successor of each non-minimal corner: first later cyclic corner with a
    // strictly smaller label, necessarily labeled exactly one less because
    // labels drop by at most one per contour step.
    let mut succ = vec![Target::Rho; p];
    {
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..2 * p {
            let idx = i % p;
            while let Some(&top) = stack.last() {
                if labels[top] > labels[idx] {
                    if succ[top] == Target::Rho {
                        succ[top] = Target::Corner(idx as u32);
                        debug_assert_eq!(labels[idx], labels[top] - 1);
                    }
                    stack.pop();
                } else {
                    break;
                }
            }
            if i < p {
                stack.push(idx);
            }
        }
    }
    for (i, s) in succ.iter().enumerate() {
        match s {
            Target::Rho => debug_assert_eq!(labels[i], min_label),
            Target::Corner(j) => {
                debug_assert_eq!(labels[*j as usize], labels[i] - 1);
                debug_assert_eq!(
                    tree.vertex_type(corners[*j as usize]),
                    VertexType::T1,
                    "chord target must be type 1"
                );
            }
        }
    }

    // Half-edge ids before erasure: chord i owns 2i at its source corner and
    // 2i + 1 at its target.
    let h_out = |i: usize| (2 * i) as u32;
    let h_in = |i: usize| (2 * i + 1) as u32;

    // Incoming chords per corner, nearest source first (cyclic distance).
    let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); p];
    for (i, s) in succ.iter().enumerate() {
        if let Target::Corner(x) = s {
            incoming[*x as usize].push(i as u32);
        }
    }
    for (x, inc) in incoming.iter_mut().enumerate() {
        inc.sort_by_key(|&j| (x + p - j as usize) % p);
    }

    // Rotations: tree vertices in id order, rho last.
    let n_tree = tree.n_vertices();
    let mut corners_of: Vec<Vec<u32>> = vec![Vec::new(); n_tree];
    for (i, &u) in corners.iter().enumerate() {
        corners_of[u as usize].push(i as u32);
    }
    let mut rotations: Vec<Vec<u32>> = vec![Vec::new(); n_tree + 1];
    for v in 0..n_tree {
        for &x in &corners_of[v] {
            for &j in &incoming[x as usize] {
                rotations[v].push(h_in(j as usize));
            }
            rotations[v].push(h_out(x as usize));
        }
    }
    // Around rho the chords from minimum corners attach in *reverse* contour
    // order: the contour circles tree vertices and rho with opposite
    // handedness, since rho sits inside the face the contour walks around.
    let rho_slot = n_tree;
    for (i, s) in succ.iter().enumerate().rev() {
        if *s == Target::Rho {
            rotations[rho_slot].push(h_in(i));
        }
    }

    let mut opposite: Vec<u32> = (0..2 * p as u32).map(|h| h ^ 1).collect();
    let mut dead = vec![false; 2 * p];

    // Erase type-2 vertices: splice their two chords into one edge.
    for v in 0..n_tree as u32 {
        if tree.vertex_type(v) != VertexType::T2 {
            continue;
        }
        let rot = &rotations[v as usize];
        debug_assert_eq!(rot.len(), 2, "type-2 vertices carry two chords");
        let (a, b) = (rot[0], rot[1]);
        debug_assert!(a % 2 == 0 && b % 2 == 0, "type-2 chords are outgoing");
        let (oa, ob) = (opposite[a as usize], opposite[b as usize]);
        opposite[oa as usize] = ob;
        opposite[ob as usize] = oa;
        dead[a as usize] = true;
        dead[b as usize] = true;
    }

    // Compact half-edge ids, dropping erased type-2 rotations.
    let mut renumber = vec![u32::MAX; 2 * p];
    let mut live = 0u32;
    for h in 0..2 * p {
        if !dead[h] {
            renumber[h] = live;
            live += 1;
        }
    }
    let n_half = live as usize;
    let mut final_opposite = vec![0u32; n_half];
    let mut final_next = vec![0u32; n_half];
    let mut owner = vec![u32::MAX; n_half]; // tree vertex id, or n_tree for rho
    for h in 0..2 * p {
        if !dead[h] {
            final_opposite[renumber[h] as usize] = renumber[opposite[h] as usize];
        }
    }
    for (slot, rot) in rotations.iter().enumerate() {
        if slot < n_tree && tree.vertex_type(slot as u32) == VertexType::T2 {
            continue;
        }
        if slot < n_tree && tree.vertex_type(slot as u32) != VertexType::T1 {
            continue; // odd vertices own no chords
        }
        debug_assert!(!rot.is_empty(), "live vertices have at least one chord");
        for (k, &h) in rot.iter().enumerate() {
            let nh = rot[(k + 1) % rot.len()];
            final_next[renumber[h as usize] as usize] = renumber[nh as usize];
            owner[renumber[h as usize] as usize] = slot as u32;
        }
    }

    // Root half-edge. The first chord drawn leaves the first corner of the
    // root vertex (corner 0).
    let root_half = match variant {
        // e+ = tree root: the oriented edge starts at the chord's target.
        MapClass::Positive => renumber[h_in(0) as usize],
        // e- = tree root.
        MapClass::Negative => renumber[h_out(0) as usize],
        // Merged root edge: the half reached through the first corner of the
        // erased type-2 root is the origin.
        MapClass::Null => renumber[h_in(0) as usize],
    };
    debug_assert_ne!(root_half, u32::MAX);

    // Final vertex ids follow first appearance along half-edge ids, the same
    // rule the map constructor uses.
    let mut vertex_id = vec![u32::MAX; n_tree + 1];
    let mut n_vertices = 0u32;
    for h in 0..n_half {
        let o = owner[h] as usize;
        if vertex_id[o] == u32::MAX {
            vertex_id[o] = n_vertices;
            n_vertices += 1;
        }
    }
    let rho = vertex_id[rho_slot];
    let map = CombinatorialMap::new(final_opposite, final_next, Some(root_half), rho)
        .expect("corner-chord assembly must yield a planar rotation system");
    // Cross-check our numbering against the constructor's orbit scan.
    debug_assert!((0..n_half).all(|h| map.vertex_of(h as u32) == vertex_id[owner[h] as usize]));

    let mut tree_to_map = vec![None; n_tree];
    for (v, slot) in tree_to_map.iter_mut().enumerate() {
        if tree.vertex_type(v as u32) == VertexType::T1 {
            debug_assert_ne!(vertex_id[v], u32::MAX);
            *slot = Some(vertex_id[v]);
        }
    }
    Ok(MapFromMobile {
        map,
        tree_to_map,
        rho,
    })
}

/// Checks `d_gr(rho, u) = l_u - min l + 1` for every type-1 tree vertex by an
/// independent breadth-first search on the constructed map.
pub fn verify_distance_identity(out: &MapFromMobile, mobile: &Mobile) -> bool {
    if out.map.is_vertex_map() {
        return true;
    }
    let dist = out.map.distances_from(out.rho);
    let min_label = mobile.min_label();
    for v in 0..mobile.tree.n_vertices() as u32 {
        if mobile.tree.vertex_type(v) != VertexType::T1 {
            continue;
        }
        let mv = match out.tree_to_map[v as usize] {
            Some(m) => m,
            None => return false,
        };
        let expect = mobile.label(v) - min_label + 1;
        if i64::from(dist[mv as usize]) != expect {
            return false;
        }
    }
    true
}

/// Expected face-degree multiset: one face per odd tree vertex, of degree
/// `2 + 2k + k'` at type-3 vertices and `1 + 2k + k'` at type-4 vertices,
/// where `(k, k')` counts its type-1 and type-2 children.
pub fn expected_face_degrees(mobile: &Mobile) -> Vec<usize> {
    let tree = &mobile.tree;
    let mut degs = Vec::new();
    for v in 0..tree.n_vertices() as u32 {
        let ty = tree.vertex_type(v);
        if ty.is_even_kind() {
            continue;
        }
        let k = tree
            .children(v)
            .iter()
            .filter(|&&c| tree.vertex_type(c) == VertexType::T1)
            .count();
        let kp = tree.children(v).len() - k;
        degs.push(match ty {
            VertexType::T3 => 2 + 2 * k + kp,
            VertexType::T4 => 1 + 2 * k + kp,
            _ => unreachable!(),
        });
    }
    degs.sort_unstable();
    degs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_cactus;
    use crate::mobile::{sample_labels_uniform, FourTypeTree, LabelSampler};
    use crate::testsupport::enumerate_maximin;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(x: u8) -> VertexType {
        VertexType::from_u8(x).unwrap()
    }

    #[test]
    fn singleton_mobile_gives_vertex_map() {
        let m = Mobile::new(FourTypeTree::singleton(t(1)), vec![0]);
        let out = mobile_to_map(&m, MapClass::Positive).unwrap();
        assert!(out.map.is_vertex_map());
        assert!(verify_distance_identity(&out, &m));
    }

    #[test]
    fn two_vertex_mobile() {
        // root(1, l=0) - child(3) with no grandchildren
        let tree =
            FourTypeTree::from_parts(vec![t(1), t(3)], vec![vec![1], vec![]]).unwrap();
        let m = Mobile::new(tree, vec![0, 0]);
        let out = mobile_to_map(&m, MapClass::Positive).unwrap();
        assert_eq!(out.map.n_vertices(), 2);
        assert_eq!(out.map.n_edges(), 1);
        let faces = out.map.faces();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].degree, 2);
        assert!(verify_distance_identity(&out, &m));
    }

    #[test]
    fn three_vertex_chain_mobile() {
        // root(1, l=0) - c(3) - g(1, l=-1)
        let tree = FourTypeTree::from_parts(
            vec![t(1), t(3), t(1)],
            vec![vec![1], vec![2], vec![]],
        )
        .unwrap();
        let m = Mobile::new(tree, vec![0, 0, -1]);
        let out = mobile_to_map(&m, MapClass::Positive).unwrap();
        assert_eq!(out.map.n_vertices(), 3);
        assert_eq!(out.map.n_edges(), 2);
        let faces = out.map.faces();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].degree, 4);
        // d(rho, root) = 0 - (-1) + 1 = 2
        let dist = out.map.distances_from(out.rho);
        assert_eq!(dist[out.tree_to_map[0].unwrap() as usize], 2);
        assert!(verify_distance_identity(&out, &m));
    }

    #[test]
    fn minimal_null_mobile_is_loop_at_rho() {
        // type-2 root with two childless type-4 children
        let tree = FourTypeTree::from_parts(
            vec![t(2), t(4), t(4)],
            vec![vec![1, 2], vec![], vec![]],
        )
        .unwrap();
        let m = Mobile::new(tree, vec![0, 0, 0]);
        let out = mobile_to_map(&m, MapClass::Null).unwrap();
        assert_eq!(out.map.n_vertices(), 1);
        assert_eq!(out.map.n_edges(), 1);
        let mut degs: Vec<usize> = out.map.faces().iter().map(|f| f.degree).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1]);
        assert_eq!(out.map.classify(), crate::map::MapClass::Null);
    }

    #[test]
    fn variant_requires_matching_root_type() {
        let m = Mobile::new(FourTypeTree::singleton(t(1)), vec![0]);
        assert!(matches!(
            mobile_to_map(&m, MapClass::Null),
            Err(BdgError::RootTypeMismatch(..))
        ));
    }

    #[test]
    fn invalid_mobiles_are_rejected() {
        let tree =
            FourTypeTree::from_parts(vec![t(1), t(1)], vec![vec![1], vec![]]).unwrap();
        let m = Mobile::new(tree, vec![0, 0]);
        assert!(matches!(
            mobile_to_map(&m, MapClass::Positive),
            Err(BdgError::InvalidMobile(_))
        ));
    }

    /// Random admissible mobile via random tree structure plus uniform labels.
    pub(crate) fn random_mobile(rng: &mut ChaCha8Rng, max_n: usize, null_root: bool) -> Mobile {
        let mut types = vec![if null_root { t(2) } else { t(1) }];
        let mut children: Vec<Vec<u32>> = vec![Vec::new()];
        let mut depths = vec![0u32];
        // Grow: maintain a frontier of vertices that may accept children.
        let target = rng.gen_range(1..=max_n);
        let mut open: Vec<u32> = vec![0];
        while types.len() < target && !open.is_empty() {
            let slot = rng.gen_range(0..open.len());
            let v = open[slot];
            let d = depths[v as usize];
            let ty = types[v as usize];
            let id = types.len() as u32;
            match ty {
                VertexType::T1 => types.push(t(3)),
                VertexType::T2 => types.push(t(4)),
                _ => types.push(if rng.gen::<f64>() < 0.7 { t(1) } else { t(2) }),
            }
            depths.push(d + 1);
            children.push(Vec::new());
            children[v as usize].push(id);
            open.push(id);
            // Close vertices to respect the type-2 child-count rule and to
            // keep the tree finite-ish.
            match ty {
                VertexType::T2 => {
                    let want = if v == 0 { 2 } else { 1 };
                    if children[v as usize].len() == want {
                        open.swap_remove(slot);
                    }
                }
                _ => {
                    if rng.gen::<f64>() < 0.4 {
                        open.swap_remove(slot);
                    }
                }
            }
        }
        // Any still-open type-2 vertex must reach its mandatory child count.
        let mut fix = 0;
        while fix < types.len() {
            let v = fix as u32;
            if types[fix] == VertexType::T2 {
                let want = if v == 0 { 2 } else { 1 };
                while children[fix].len() < want {
                    let id = types.len() as u32;
                    types.push(t(4));
                    depths.push(depths[fix] + 1);
                    children.push(Vec::new());
                    children[fix].push(id);
                }
            }
            fix += 1;
        }
        let tree = FourTypeTree::from_parts(types, children).unwrap();
        let mut sampler = LabelSampler::new();
        sample_labels_uniform(&tree, &mut sampler, rng)
    }

    #[test]
    fn random_mobiles_build_valid_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for i in 0..300 {
            let null_root = i % 3 == 2;
            let m = random_mobile(&mut rng, 120, null_root);
            let variant = match i % 3 {
                0 => MapClass::Positive,
                1 => MapClass::Negative,
                _ => MapClass::Null,
            };
            let out = mobile_to_map(&m, variant).unwrap();
            // Euler already enforced by the constructor; check bookkeeping.
            let n_t1 = m.tree.count_type(t(1));
            if !out.map.is_vertex_map() {
                assert_eq!(out.map.n_vertices(), n_t1 + 1);
                let mut degs: Vec<usize> =
                    out.map.faces().iter().map(|f| f.degree).collect();
                degs.sort_unstable();
                assert_eq!(degs, expected_face_degrees(&m), "face bookkeeping");
            }
            assert!(verify_distance_identity(&out, &m), "distance identity");
            if !out.map.is_vertex_map() {
                assert_eq!(out.map.classify(), variant);
            }
        }
    }

    #[test]
    fn map_round_trip_through_text() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for i in 0..100 {
            let m = random_mobile(&mut rng, 60, i % 2 == 1);
            let variant = if i % 2 == 1 {
                MapClass::Null
            } else {
                MapClass::Positive
            };
            let out = mobile_to_map(&m, variant).unwrap();
            let parsed = CombinatorialMap::from_text(&out.map.to_text()).unwrap();
            assert_eq!(out.map, parsed);
        }
    }

    #[test]
    fn path_bottleneck_bound_on_small_maps() {
        // Every map path from u to v dips at least as low as the tree-path
        // label minimum predicts.
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let mut checked = 0;
        for i in 0..400 {
            let m = random_mobile(&mut rng, 14, i % 4 == 3);
            let variant = if i % 4 == 3 {
                MapClass::Null
            } else {
                MapClass::Positive
            };
            let out = mobile_to_map(&m, variant).unwrap();
            if out.map.is_vertex_map() || out.map.n_vertices() > 10 {
                continue;
            }
            let g = out.map.to_pointed_graph();
            let min_label = m.min_label();
            let t1: Vec<u32> = (0..m.tree.n_vertices() as u32)
                .filter(|&v| m.tree.vertex_type(v) == VertexType::T1)
                .collect();
            for &u in &t1 {
                for &v in &t1 {
                    let mu = out.tree_to_map[u as usize].unwrap() as usize;
                    let mv = out.tree_to_map[v as usize].unwrap() as usize;
                    let lhs = enumerate_maximin(&g, mu, mv);
                    let path_min = m
                        .tree
                        .even_path(u, v)
                        .into_iter()
                        .map(|w| m.label(w))
                        .min()
                        .unwrap();
                    let rhs = path_min - min_label + 1;
                    assert!(i64::from(lhs) <= rhs, "bottleneck bound");
                    checked += 1;
                }
            }
        }
        assert!(checked > 500, "exercised {checked} pairs");
    }

    #[test]
    fn cactus_sandwich_bound() {
        // |d_Cac(u,v) - (l_u + l_v - 2 min path label)| <= 2D + 2.
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for i in 0..60 {
            let m = random_mobile(&mut rng, 80, i % 3 == 2);
            let variant = if i % 3 == 2 {
                MapClass::Null
            } else {
                MapClass::Positive
            };
            let out = mobile_to_map(&m, variant).unwrap();
            if out.map.is_vertex_map() {
                continue;
            }
            let g = out.map.to_pointed_graph();
            let cactus = build_cactus(&g);
            let max_deg = out.map.faces().iter().map(|f| f.degree).max().unwrap() as i64;
            let t1: Vec<u32> = (0..m.tree.n_vertices() as u32)
                .filter(|&v| m.tree.vertex_type(v) == VertexType::T1)
                .collect();
            for _ in 0..40.min(t1.len() * t1.len()) {
                let u = t1[rng.gen_range(0..t1.len())];
                let v = t1[rng.gen_range(0..t1.len())];
                let mu = out.tree_to_map[u as usize].unwrap() as usize;
                let mv = out.tree_to_map[v as usize].unwrap() as usize;
                let dc = cactus.cactus_distance(mu, mv).unwrap() as i64;
                let path_min = m
                    .tree
                    .even_path(u, v)
                    .into_iter()
                    .map(|w| m.label(w))
                    .min()
                    .unwrap();
                let formula = m.label(u) + m.label(v) - 2 * path_min;
                assert!(
                    (dc - formula).abs() <= 2 * max_deg + 2,
                    "sandwich: dc={dc} formula={formula} D={max_deg}"
                );
            }
        }
    }
}
