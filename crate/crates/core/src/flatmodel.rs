//! Finite patches of the complex `H_n` (unit equilateral triangles, `n`
//! around every vertex) and the embedding of regular trees into it.
//!
//! A patch is grown ring by ring around a base vertex. Every vertex of ring
//! `k < depth` is surrounded by its full fan of `n` triangles; ring `depth`
//! is the boundary.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

pub const MAX_FLAT_DEPTH: u32 = 6;
pub const FLAT_VERTEX_CAP: u64 = 4_000_000;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlatComplex {
    pub n: u32,
    pub depth: u32,
    /// Ring index of each vertex; the base vertex is 0.
    pub layer: Vec<u32>,
    /// Neighbors of each vertex in counterclockwise order. For boundary
    /// vertices the fan is open and starts at its clockwise end.
    pub rotation: Vec<Vec<usize>>,
    pub closed: Vec<bool>,
    /// Triangles, each listed counterclockwise.
    pub triangles: Vec<[usize; 3]>,
}

/// Vertex count of the `{3,n}` patch with `depth` rings, by the ring growth
/// `s_{k+1} = (n-4) s_k - s_{k-1}`, `s_1 = n`, `s_2 = n(n-4)`.
fn estimated_vertices(n: u32, depth: u32) -> u64 {
    let (mut total, mut prev, mut cur) = (1u64, 1u64, n as u64);
    for k in 1..=depth {
        total = total.saturating_add(cur);
        let next = if k == 1 {
            cur * (n as u64 - 4)
        } else {
            cur.saturating_mul(n as u64 - 4).saturating_sub(prev)
        };
        (prev, cur) = (cur, next);
    }
    total
}

pub fn build_flat_patch(n: u32, depth: u32) -> Result<FlatComplex> {
    if n < 6 {
        return Err(invalid(format!("n must be at least 6, got {n}")));
    }
    if depth > MAX_FLAT_DEPTH {
        return Err(invalid(format!(
            "depth {depth} exceeds the cap of {MAX_FLAT_DEPTH}"
        )));
    }
    let requested = estimated_vertices(n, depth);
    if requested > FLAT_VERTEX_CAP {
        return Err(Error::TooLarge {
            requested,
            cap: FLAT_VERTEX_CAP,
        });
    }

    let mut layer = vec![0u32];
    let mut triangles = Vec::new();
    // Triangles already incident to each vertex of the current ring.
    let mut count = vec![n as usize];
    if depth == 0 {
        return Ok(assemble(n, depth, layer, triangles));
    }
    let mut ring: Vec<usize> = (1..=n as usize).collect();
    layer.extend(std::iter::repeat_n(1, n as usize));
    count.extend(std::iter::repeat_n(2, n as usize));
    for i in 0..ring.len() {
        triangles.push([0, ring[i], ring[(i + 1) % ring.len()]]);
    }

    for k in 1..depth {
        let len = ring.len();
        // Apex of the outer triangle on each ring edge (ring[i], ring[i+1]).
        let apex: Vec<usize> = (0..len).map(|i| layer.len() + i).collect();
        layer.extend(std::iter::repeat_n(k + 1, len));
        count.extend(std::iter::repeat_n(0, len));
        let mut next_ring = Vec::new();
        for i in 0..len {
            let v = ring[i];
            let fan = n as usize - count[v] - 2;
            if fan == 0 {
                return Err(Error::Construction(format!(
                    "vertex {v} has no room for an outward fan"
                )));
            }
            let mut chain = vec![apex[(i + len - 1) % len]];
            for _ in 1..fan {
                chain.push(layer.len());
                layer.push(k + 1);
                count.push(0);
            }
            chain.push(apex[i]);
            for w in chain.windows(2) {
                triangles.push([v, w[0], w[1]]);
                count[w[0]] += 1;
                count[w[1]] += 1;
            }
            triangles.push([ring[(i + 1) % len], v, apex[i]]);
            count[apex[i]] += 1;
            count[v] = n as usize;
            next_ring.extend_from_slice(&chain[1..]);
        }
        ring = next_ring;
    }
    Ok(assemble(n, depth, layer, triangles))
}

fn assemble(n: u32, depth: u32, layer: Vec<u32>, triangles: Vec<[usize; 3]>) -> FlatComplex {
    let nv = layer.len();
    // succ[v] maps a neighbor a to the neighbor following it counterclockwise.
    let mut succ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for &[a, b, c] in &triangles {
        succ[a].push((b, c));
        succ[b].push((c, a));
        succ[c].push((a, b));
    }
    let mut rotation = Vec::with_capacity(nv);
    let mut closed = Vec::with_capacity(nv);
    for s in &mut succ {
        s.sort_unstable();
        let next = |a: usize| s.binary_search_by_key(&a, |p| p.0).ok().map(|i| s[i].1);
        let start = s
            .iter()
            .map(|p| p.0)
            .find(|&a| !s.iter().any(|p| p.1 == a))
            .or_else(|| s.first().map(|p| p.0));
        let mut fan = Vec::new();
        let mut cur = start;
        while let Some(a) = cur {
            fan.push(a);
            cur = next(a).filter(|&b| Some(b) != start);
            if fan.len() > s.len() {
                break;
            }
        }
        closed.push(!s.is_empty() && fan.len() == s.len() && next(*fan.last().unwrap()) == start);
        rotation.push(fan);
    }
    FlatComplex {
        n,
        depth,
        layer,
        rotation,
        closed,
        triangles,
    }
}

impl FlatComplex {
    pub fn vertex_count(&self) -> usize {
        self.layer.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.rotation.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.depth as usize + 1];
        for &l in &self.layer {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Surrounded by exactly `n` triangles.
    pub fn is_complete(&self, v: usize) -> bool {
        self.closed[v] && self.rotation[v].len() == self.n as usize
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.triangle_count() as i64
    }

    /// Position of `w` in the rotation at `v`.
    pub fn slot(&self, v: usize, w: usize) -> Option<usize> {
        self.rotation[v].iter().position(|&x| x == w)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EmbeddingMap {
    pub q: u32,
    pub n: u32,
    pub depth: u32,
    /// Image of each tree vertex. Tree vertices are numbered breadth-first
    /// from the root, children in slot order.
    pub vertex_map: Vec<usize>,
    pub tree_parent: Vec<Option<usize>>,
    pub tree_depth: Vec<u32>,
    #[serde(skip)]
    pub complex: FlatComplex,
}

impl EmbeddingMap {
    pub fn tree_size(&self) -> usize {
        self.vertex_map.len()
    }

    /// Images of the tree edges, as `(parent image, child image)`.
    pub fn edge_map(&self) -> Vec<(usize, usize)> {
        (0..self.tree_size())
            .filter_map(|t| self.tree_parent[t].map(|p| (self.vertex_map[p], self.vertex_map[t])))
            .collect()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = self.vertex_map.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// `tree_id complex_id` per line.
    pub fn write_pairs(&self, mut out: impl Write) -> Result<()> {
        for (t, v) in self.vertex_map.iter().enumerate() {
            writeln!(out, "{t} {v}")?;
        }
        Ok(())
    }
}

/// Embeds the ball of radius `depth` of the `q`-regular tree, breadth-first.
/// The root's edges leave the base vertex every `⌊n/q⌋` slots; at every
/// other vertex the child edges follow the edge back to the parent at the
/// same spacing, so consecutive image edges are at least 3 slots apart.
pub fn embed_tree(q: u32, n: u32, depth: u32) -> Result<EmbeddingMap> {
    if q < 2 {
        return Err(invalid(format!("q must be at least 2, got {q}")));
    }
    if n < 6 || q > n / 3 {
        return Err(invalid(format!(
            "q = {q} exceeds floor(n/3) = {} for n = {n}",
            n / 3
        )));
    }
    let complex = build_flat_patch(n, depth)?;
    let step = (n / q) as usize;
    let mut vertex_map = vec![0usize];
    let mut tree_parent = vec![None];
    let mut tree_depth = vec![0u32];
    let mut head = 0;
    while head < vertex_map.len() {
        let t = head;
        head += 1;
        if tree_depth[t] == depth {
            continue;
        }
        let v = vertex_map[t];
        if !complex.is_complete(v) {
            return Err(Error::Construction(format!(
                "image vertex {v} is on the patch boundary"
            )));
        }
        let slots: Vec<usize> = match tree_parent[t] {
            None => (0..q as usize).map(|j| j * step).collect(),
            Some(p) => {
                let back = complex.slot(v, vertex_map[p]).ok_or_else(|| {
                    Error::Construction(format!("edge {v}-{} missing", vertex_map[p]))
                })?;
                (1..q as usize)
                    .map(|j| (back + j * step) % n as usize)
                    .collect()
            }
        };
        for s in slots {
            vertex_map.push(complex.rotation[v][s]);
            tree_parent.push(Some(t));
            tree_depth.push(tree_depth[t] + 1);
        }
    }
    let map = EmbeddingMap {
        q,
        n,
        depth,
        vertex_map,
        tree_parent,
        tree_depth,
        complex,
    };
    if !map.is_injective() {
        return Err(Error::Construction("embedding is not injective".into()));
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AngleWitness {
    pub tree_vertex: usize,
    pub complex_vertex: usize,
    /// Rotation slots of the two offending image edges.
    pub slots: (usize, usize),
    pub edges_between: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AngleCertificate {
    pub holds: bool,
    pub vertices_checked: usize,
    pub witness: Option<AngleWitness>,
}

/// Checks that around every image vertex any two cyclically consecutive
/// image edges have at least 2 other edges between them, i.e. the tree path
/// through the vertex makes an angle of at least π on both sides.
pub fn check_angle_certificate(map: &EmbeddingMap) -> AngleCertificate {
    let n = map.complex.n as usize;
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); map.tree_size()];
    for t in 0..map.tree_size() {
        if let Some(p) = map.tree_parent[t] {
            incident[t].push(p);
            incident[p].push(t);
        }
    }
    let failures: Vec<AngleWitness> = (0..map.tree_size())
        .into_par_iter()
        .filter(|&t| incident[t].len() >= 2)
        .filter_map(|t| {
            let v = map.vertex_map[t];
            let mut slots: Vec<usize> = Vec::with_capacity(incident[t].len());
            for &u in &incident[t] {
                match map.complex.slot(v, map.vertex_map[u]) {
                    Some(s) if map.complex.is_complete(v) => slots.push(s),
                    _ => {
                        return Some(AngleWitness {
                            tree_vertex: t,
                            complex_vertex: v,
                            slots: (0, 0),
                            edges_between: 0,
                        });
                    }
                }
            }
            slots.sort_unstable();
            (0..slots.len())
                .map(|i| {
                    let (a, b) = (slots[i], slots[(i + 1) % slots.len()]);
                    let gap = (b + n - a) % n;
                    let gap = if gap == 0 { n } else { gap };
                    AngleWitness {
                        tree_vertex: t,
                        complex_vertex: v,
                        slots: (a, b),
                        edges_between: gap - 1,
                    }
                })
                .filter(|w| w.edges_between < 2)
                .min_by_key(|w| w.edges_between)
        })
        .collect();
    let checked = incident.iter().filter(|i| i.len() >= 2).count();
    let witness = failures.into_iter().min_by_key(|w| w.tree_vertex);
    AngleCertificate {
        holds: witness.is_none(),
        vertices_checked: checked,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_fan() {
        let c = build_flat_patch(7, 1).unwrap();
        assert_eq!(c.vertex_count(), 8);
        assert_eq!(c.triangle_count(), 7);
        assert!(c.is_complete(0));
        assert_eq!(c.rotation[0], (1..=7).collect::<Vec<_>>());
        assert!(!c.is_complete(1));
        assert_eq!(build_flat_patch(6, 0).unwrap().vertex_count(), 1);
    }

    #[test]
    fn euclidean_case_is_the_triangular_lattice() {
        let c = build_flat_patch(6, 2).unwrap();
        assert_eq!(c.layer_sizes(), vec![1, 6, 12]);
        assert_eq!(c.triangle_count(), 24);
        assert_eq!(c.euler_characteristic(), 1);
        for v in 0..7 {
            assert!(c.is_complete(v));
        }
    }

    #[test]
    fn ring_counts_match_growth_series() {
        for n in 6..=12u32 {
            for depth in 1..=4u32 {
                let Ok(c) = build_flat_patch(n, depth) else {
                    continue;
                };
                // Layer sizes of the {3,n} tiling, counted independently by
                // following the boundary: each ring vertex with t inner
                // triangles spawns n - t - 3 new corner vertices plus one apex per ring edge.
                let mut rings = vec![1usize, n as usize];
                let mut inner = vec![2usize; n as usize];
                for _ in 1..depth {
                    let mut next = Vec::new();
                    for &t in &inner {
                        next.extend(std::iter::repeat_n(2, n as usize - t - 3));
                        next.push(3);
                    }
                    rings.push(next.len());
                    inner = next;
                }
                assert_eq!(c.layer_sizes(), rings, "n={n} depth={depth}");
                // An annulus between cycles of lengths a and b has a + b triangles.
                let f = n as usize + rings[1..].windows(2).map(|w| w[0] + w[1]).sum::<usize>();
                assert_eq!(c.triangle_count(), f);
                assert_eq!(c.euler_characteristic(), 1);
                assert_eq!(estimated_vertices(n, depth), c.vertex_count() as u64);
                for v in 0..c.vertex_count() {
                    assert_eq!(
                        c.is_complete(v),
                        c.layer[v] < depth,
                        "n={n} depth={depth} v={v}"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(build_flat_patch(5, 2).is_err());
        assert!(build_flat_patch(7, 7).is_err());
        assert!(matches!(
            build_flat_patch(40, 6),
            Err(Error::TooLarge { .. })
        ));
        assert!(embed_tree(4, 9, 2).is_err());
    }

    #[test]
    fn straight_line() {
        let m = embed_tree(2, 6, 3).unwrap();
        assert_eq!(m.tree_size(), 7);
        let cert = check_angle_certificate(&m);
        assert!(cert.holds);
        assert_eq!(cert.vertices_checked, 5);
    }

    #[test]
    fn adjacent_image_edges_are_caught() {
        let mut m = embed_tree(3, 9, 2).unwrap();
        assert!(check_angle_certificate(&m).holds);
        let root = m.vertex_map[0];
        let slot = m.complex.slot(root, m.vertex_map[1]).unwrap();
        // Move the root's first child one slot toward the second.
        m.vertex_map[1] = m.complex.rotation[root][slot + 1];
        let cert = check_angle_certificate(&m);
        assert!(!cert.holds);
        let w = cert.witness.unwrap();
        assert_eq!(w.tree_vertex, 0);
        assert_eq!(w.edges_between, 1);
    }
}
