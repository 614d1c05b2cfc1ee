//! Finite balls of the `q`-regular tree `T_q` with a Busemann stratification.
//!
//! A ball of radius `R` around `x0` is stored together with the spine
//! `x0, x1, ..., x_K` toward a fixed end `eta`. Every vertex other than `x_K`
//! has a parent (one step toward `eta`) and up to `q - 1` children labeled
//! `0..q-1`; `x_{k-1}` is the label-0 child of `x_k`. The Busemann level is
//! `d(x_K, v) - K`, so `x_k` sits at level `-k` and a child is one level
//! below its parent.
//!
//! Vertex ids list the ball in breadth-first order from `x0` (the parent
//! before the children, children by label), followed by the spine extension
//! `x_{R+1}..x_K`. Ids of ball vertices therefore do not depend on `K`.

use std::collections::VecDeque;
use std::io::Write;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

pub type VertexId = usize;

pub const DEFAULT_VERTEX_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TVertex {
    pub id: VertexId,
    pub level: i64,
}

#[derive(Debug, Clone)]
pub struct TreeBall {
    q: u32,
    radius: u32,
    ball_size: usize,
    parent: Vec<Option<VertexId>>,
    label: Vec<u32>,
    level: Vec<i64>,
    depth: Vec<u32>,
    children: Vec<Vec<VertexId>>,
    spine: Vec<VertexId>,
}

/// `1 + q ((q-1)^R - 1) / (q - 2)`, or `None` on overflow.
pub fn ball_vertex_count(q: u32, radius: u32) -> Option<u64> {
    let mut total: u64 = 1;
    let mut sphere: u64 = q as u64;
    for _ in 0..radius {
        total = total.checked_add(sphere)?;
        sphere = sphere.checked_mul(q as u64 - 1)?;
    }
    Some(total)
}

impl TreeBall {
    pub fn build(q: u32, radius: u32, spine_len: u32) -> Result<Self> {
        Self::build_with_cap(q, radius, spine_len, DEFAULT_VERTEX_CAP)
    }

    pub fn build_with_cap(q: u32, radius: u32, spine_len: u32, cap: u64) -> Result<Self> {
        if q < 3 {
            return Err(invalid(format!("q must be at least 3, got {q}")));
        }
        if radius < 1 {
            return Err(invalid("radius must be at least 1"));
        }
        if spine_len <= radius {
            return Err(invalid(format!(
                "spine length {spine_len} must exceed the radius {radius}"
            )));
        }
        let requested = ball_vertex_count(q, radius).unwrap_or(u64::MAX);
        if requested > cap {
            return Err(Error::TooLarge { requested, cap });
        }
        let n = requested as usize + (spine_len - radius) as usize;
        let mut ball = TreeBall {
            q,
            radius,
            ball_size: requested as usize,
            parent: Vec::with_capacity(n),
            label: Vec::with_capacity(n),
            level: Vec::with_capacity(n),
            depth: Vec::with_capacity(n),
            children: Vec::with_capacity(n),
            spine: vec![0],
        };
        ball.push(None, 0, 0, 0);

        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            if ball.depth[v] == radius {
                continue;
            }
            let on_spine = ball.spine_index(v);
            if let Some(k) = on_spine {
                let up = ball.push(None, 0, -(k as i64) - 1, ball.depth[v] + 1);
                ball.parent[v] = Some(up);
                ball.children[up].push(v);
                ball.spine.push(up);
                queue.push_back(up);
            }
            let first = if matches!(on_spine, Some(k) if k >= 1) {
                1
            } else {
                0
            };
            for l in first..q - 1 {
                let c = ball.push(Some(v), l, ball.level[v] + 1, ball.depth[v] + 1);
                ball.children[v].push(c);
                queue.push_back(c);
            }
        }
        debug_assert_eq!(ball.parent.len(), ball.ball_size);

        for k in radius + 1..=spine_len {
            let below = *ball.spine.last().unwrap();
            let up = ball.push(None, 0, -(k as i64), k);
            ball.parent[below] = Some(up);
            ball.children[up].push(below);
            ball.spine.push(up);
        }
        Ok(ball)
    }

    fn push(&mut self, parent: Option<VertexId>, label: u32, level: i64, depth: u32) -> VertexId {
        self.parent.push(parent);
        self.label.push(label);
        self.level.push(level);
        self.depth.push(depth);
        self.children.push(Vec::new());
        self.parent.len() - 1
    }

    /// `k` if `v = x_k`.
    fn spine_index(&self, v: VertexId) -> Option<usize> {
        let k = -self.level[v];
        (k >= 0 && (k as usize) < self.spine.len() && self.spine[k as usize] == v)
            .then_some(k as usize)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn spine_len(&self) -> u32 {
        self.spine.len() as u32 - 1
    }

    pub fn base(&self) -> VertexId {
        0
    }

    /// Vertices within distance `R` of `x0`; ids `0..ball_size()`.
    pub fn ball_size(&self) -> usize {
        self.ball_size
    }

    /// Ball vertices plus the spine extension.
    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn spine(&self) -> &[VertexId] {
        &self.spine
    }

    pub fn vertex(&self, v: VertexId) -> TVertex {
        TVertex {
            id: v,
            level: self.level[v],
        }
    }

    pub fn level(&self, v: VertexId) -> i64 {
        self.level[v]
    }

    /// Distance from `x0`.
    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[v]
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    /// Label of `v` among its parent's children; spine vertices have label 0.
    pub fn label(&self, v: VertexId) -> u32 {
        self.label[v]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    pub fn child(&self, v: VertexId, label: u32) -> Option<VertexId> {
        self.children[v]
            .iter()
            .copied()
            .find(|&c| self.label[c] == label)
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.parent[v]
            .into_iter()
            .chain(self.children[v].iter().copied())
    }

    /// Every edge once, as `(parent, child)`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count()).filter_map(|v| self.parent[v].map(|p| (p, v)))
    }

    /// The ancestor `t` levels above `v`, if it is stored.
    pub fn ancestor(&self, mut v: VertexId, t: u32) -> Option<VertexId> {
        for _ in 0..t {
            v = self.parent[v]?;
        }
        Some(v)
    }

    /// Lowest common ancestor with respect to `eta`.
    pub fn lca(&self, mut u: VertexId, mut v: VertexId) -> VertexId {
        while self.level[u] > self.level[v] {
            u = self.parent[u].expect("level above the spine top");
        }
        while self.level[v] > self.level[u] {
            v = self.parent[v].expect("level above the spine top");
        }
        while u != v {
            u = self.parent[u].expect("vertices in different components");
            v = self.parent[v].expect("vertices in different components");
        }
        u
    }

    pub fn distance(&self, u: VertexId, v: VertexId) -> u32 {
        let a = self.level[self.lca(u, v)];
        ((self.level[u] - a) + (self.level[v] - a)) as u32
    }

    /// Descends from `v` along `labels`.
    pub fn descend(
        &self,
        mut v: VertexId,
        labels: impl IntoIterator<Item = u32>,
    ) -> Option<VertexId> {
        for l in labels {
            v = self.child(v, l)?;
        }
        Some(v)
    }

    /// All ball vertices at distance in `range` from `u`, by a bounded walk.
    pub fn ball_vertices_at(&self, u: VertexId, range: &RangeInclusive<u32>) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![(u, usize::MAX, 0u32)];
        while let Some((v, from, dist)) = stack.pop() {
            if range.contains(&dist) {
                out.push(v);
            }
            if dist == *range.end() {
                continue;
            }
            for w in self.neighbors(v) {
                if w != from && w < self.ball_size {
                    stack.push((w, v, dist + 1));
                }
            }
        }
        out
    }

    /// Pairs `u < v` of ball vertices whose distance lies in `range`,
    /// sorted.
    pub fn pairs_at(&self, range: &RangeInclusive<u32>) -> Vec<(VertexId, VertexId)> {
        (0..self.ball_size)
            .into_par_iter()
            .flat_map_iter(|u| {
                let mut vs = self.ball_vertices_at(u, range);
                vs.retain(|&v| v > u);
                vs.sort_unstable();
                vs.into_iter().map(move |v| (u, v))
            })
            .collect()
    }

    /// Edge list with zero-based ids, one `u v` pair per line.
    pub fn write_adjacency<W: Write>(&self, mut out: W) -> Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

/// `q (q-1)^{d-1} + 1`, the greedy bound on `chi(T_q, d)`.
pub fn brooks_bound(q: u32, d: u32) -> Result<u128> {
    if q < 3 || d < 1 {
        return Err(invalid(format!(
            "need q >= 3 and d >= 1, got q = {q}, d = {d}"
        )));
    }
    (q as u128 - 1)
        .checked_pow(d - 1)
        .and_then(|p| p.checked_mul(q as u128))
        .and_then(|p| p.checked_add(1))
        .ok_or_else(|| invalid(format!("bound overflows for q = {q}, d = {d}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TreeColor {
    pub branch: u64,
    pub stratum: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "camelCase")]
pub enum TreeColoring {
    /// `level mod 2`; proper for every odd `d`.
    Odd,
    /// Branch label at the bundle root (height `(d-2)/2`) and `level mod (d+1)`.
    Even { d: u32 },
    /// Label word from the super-bundle root at height `floor(cd/2) + 1`
    /// down to the bundle root at height `ceil((d-2)/2)`, and
    /// `level mod (floor(cd) + 1)`.
    Interval { d: u32, c: f64 },
}

impl TreeColoring {
    pub fn even(d: u32) -> Result<Self> {
        if d < 2 || !d.is_multiple_of(2) {
            return Err(invalid(format!(
                "even coloring needs an even d >= 2, got {d}"
            )));
        }
        Ok(TreeColoring::Even { d })
    }

    pub fn interval(d: u32, c: f64) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("interval coloring needs d >= 2, got {d}")));
        }
        if !(c > 1.0 && c.is_finite()) {
            return Err(invalid(format!("interval factor c must exceed 1, got {c}")));
        }
        Ok(TreeColoring::Interval { d, c })
    }

    /// Number of strata classes.
    pub fn strata(&self) -> u32 {
        match *self {
            TreeColoring::Odd => 2,
            TreeColoring::Even { d } => d + 1,
            TreeColoring::Interval { d, c } => (c * d as f64).floor() as u32 + 1,
        }
    }

    /// `(root height, bundle height)` of the label word, if any.
    fn word_heights(&self) -> Option<(u32, u32)> {
        match *self {
            TreeColoring::Odd => None,
            TreeColoring::Even { d } => Some(((d - 2) / 2 + 1, (d - 2) / 2)),
            TreeColoring::Interval { d, c } => {
                Some(((c * d as f64 / 2.0).floor() as u32 + 1, (d - 2).div_ceil(2)))
            }
        }
    }

    /// Exact palette size: `(q-1)^{word length}` branches times the strata.
    pub fn palette_size(&self, q: u32) -> u64 {
        let words = self
            .word_heights()
            .map_or(1, |(top, bottom)| (q as u64 - 1).pow(top - bottom));
        words * self.strata() as u64
    }

    /// Color of `v`, or `None` when a required ancestor is not stored.
    pub fn color(&self, ball: &TreeBall, v: VertexId) -> Option<TreeColor> {
        let stratum = ball.level(v).rem_euclid(self.strata() as i64) as u32;
        let Some((top, bottom)) = self.word_heights() else {
            return Some(TreeColor { branch: 0, stratum });
        };
        ball.ancestor(v, top)?;
        let mut u = ball.ancestor(v, bottom)?;
        let mut branch = 0u64;
        let mut place = 1u64;
        for _ in bottom..top {
            branch += place * ball.label(u) as u64;
            place *= ball.q() as u64 - 1;
            u = ball.parent(u)?;
        }
        Some(TreeColor { branch, stratum })
    }

    pub fn color_index(&self, ball: &TreeBall, v: VertexId) -> Option<u64> {
        self.color(ball, v)
            .map(|c| c.branch * self.strata() as u64 + c.stratum as u64)
    }

    pub fn forbidden(&self) -> Option<RangeInclusive<u32>> {
        match *self {
            TreeColoring::Odd => None,
            TreeColoring::Even { d } => Some(d..=d),
            TreeColoring::Interval { d, c } => Some(d..=(c * d as f64).floor() as u32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeViolation {
    pub u: VertexId,
    pub v: VertexId,
    pub distance: u32,
    pub color: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeVerification {
    pub q: u32,
    pub radius: u32,
    pub distance_lo: u32,
    pub distance_hi: u32,
    pub colored_vertices: usize,
    pub checked_pairs: u64,
    pub violation_count: u64,
    pub palette_used: usize,
    pub violations: Vec<TreeViolation>,
}

impl TreeVerification {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

const MAX_WITNESSES: usize = 16;

/// Scans every pair of colored ball vertices at distance in `range`.
/// Vertices where `color` returns `None` are skipped.
pub fn verify_tree_coloring<F>(
    ball: &TreeBall,
    color: F,
    range: RangeInclusive<u32>,
) -> TreeVerification
where
    F: Fn(VertexId) -> Option<u64> + Sync,
{
    let colors: Vec<Option<u64>> = (0..ball.ball_size()).into_par_iter().map(&color).collect();
    let per_vertex: Vec<(u64, u64, Vec<TreeViolation>)> = (0..ball.ball_size())
        .into_par_iter()
        .map(|u| {
            let Some(cu) = colors[u] else {
                return (0, 0, Vec::new());
            };
            let mut checked = 0;
            let mut bad = 0;
            let mut witnesses = Vec::new();
            for v in ball.ball_vertices_at(u, &range) {
                if v <= u {
                    continue;
                }
                let Some(cv) = colors[v] else { continue };
                checked += 1;
                if cu == cv {
                    bad += 1;
                    if witnesses.len() < MAX_WITNESSES {
                        witnesses.push(TreeViolation {
                            u,
                            v,
                            distance: ball.distance(u, v),
                            color: cu,
                        });
                    }
                }
            }
            (checked, bad, witnesses)
        })
        .collect();

    let mut used: Vec<u64> = colors.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let mut report = TreeVerification {
        q: ball.q(),
        radius: ball.radius(),
        distance_lo: *range.start(),
        distance_hi: *range.end(),
        colored_vertices: colors.iter().flatten().count(),
        checked_pairs: 0,
        violation_count: 0,
        palette_used: used.len(),
        violations: Vec::new(),
    };
    for (checked, bad, mut w) in per_vertex {
        report.checked_pairs += checked;
        report.violation_count += bad;
        let room = MAX_WITNESSES - report.violations.len();
        w.truncate(room);
        report.violations.append(&mut w);
    }
    report
}

/// Coloring CSV: `vertexId,level,colorIndex`; uncolored vertices are
/// omitted.
pub fn write_coloring_csv<W: Write>(
    ball: &TreeBall,
    coloring: &TreeColoring,
    mut out: W,
) -> Result<()> {
    writeln!(out, "vertexId,level,colorIndex")?;
    for v in 0..ball.ball_size() {
        if let Some(c) = coloring.color_index(ball, v) {
            writeln!(out, "{v},{},{c}", ball.level(v))?;
        }
    }
    Ok(())
}

fn require_radius(ball: &TreeBall, needed: u32) -> Result<()> {
    if ball.radius() < needed {
        Err(Error::RadiusTooSmall {
            radius: ball.radius(),
            needed,
        })
    } else {
        Ok(())
    }
}

fn check_pairs(ball: &TreeBall, vs: &[VertexId], ok: impl Fn(u32) -> bool) -> Result<()> {
    for (i, &a) in vs.iter().enumerate() {
        for &b in &vs[i + 1..] {
            let dist = ball.distance(a, b);
            if !ok(dist) {
                return Err(Error::Construction(format!(
                    "vertices {a} and {b} are at distance {dist}"
                )));
            }
        }
    }
    Ok(())
}

/// Walks `steps` edges from `v` straight away from `x0`: up the spine if
/// `v` is on it, otherwise down label-0 children.
fn extend_outward(ball: &TreeBall, mut v: VertexId, steps: u32) -> Option<VertexId> {
    for _ in 0..steps {
        v = if v != ball.base() && ball.spine_index(v).is_some() {
            ball.parent(v)?
        } else {
            ball.child(v, 0)?
        };
    }
    Some(v)
}

/// `q` vertices pairwise at distance `d`: one in each branch at `x0`, at
/// distance `d/2` from it.
pub fn clique_q(ball: &TreeBall, d: u32) -> Result<Vec<VertexId>> {
    if d < 2 || !d.is_multiple_of(2) {
        return Err(invalid(format!("clique needs an even d >= 2, got {d}")));
    }
    let half = d / 2;
    require_radius(ball, half)?;
    let mut out = vec![ball.spine()[half as usize]];
    for l in 0..ball.q() - 1 {
        let c = ball.child(ball.base(), l).expect("radius >= 1");
        out.push(extend_outward(ball, c, half - 1).expect("radius checked"));
    }
    check_pairs(ball, &out, |x| x == d)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Spindle {
    pub d: u32,
    /// `v0, v_1..v_{q-1}, v'_1..v'_{q-1}, v_q, v'_q`.
    pub vertices: Vec<VertexId>,
    /// Index pairs into `vertices` that are at distance exactly `d`.
    pub pairs: Vec<(usize, usize)>,
}

/// The generalized Moser spindle: two `q`-cliques `{v0, v_i}` and
/// `{v0, v'_i}`, apexes `v_q`, `v'_q` adjacent to every `v_i` (resp.
/// `v'_i`), and the edge `v_q v'_q`. In a `q`-coloring both apexes would
/// repeat the color of `v0`.
pub fn moser_spindle(ball: &TreeBall, d: u32) -> Result<Spindle> {
    if d < 4 || !d.is_multiple_of(2) {
        return Err(invalid(format!("spindle needs an even d >= 4, got {d}")));
    }
    require_radius(ball, d)?;
    let q = ball.q();
    let half = d / 2;
    let v0 = ball.base();
    let c = ball.spine()[half as usize];
    let c2 = ball
        .descend(v0, std::iter::repeat_n(0, half as usize))
        .expect("radius checked");

    // Branches at c and c' that avoid x0.
    let mut family = vec![
        extend_outward(ball, ball.parent(c).expect("spine"), half - 1).expect("radius checked"),
    ];
    for l in 1..q - 1 {
        family.push(
            extend_outward(ball, ball.child(c, l).expect("full valence"), half - 1)
                .expect("radius checked"),
        );
    }
    let family2: Vec<VertexId> = (0..q - 1)
        .map(|l| {
            extend_outward(ball, ball.child(c2, l).expect("full valence"), half - 1)
                .expect("radius checked")
        })
        .collect();

    let apex = ball.child(ball.spine()[1], 1).expect("full valence");
    let beta = half - 1;
    let a2 = ball
        .descend(v0, std::iter::repeat_n(0, beta as usize))
        .expect("radius checked");
    let apex2 = ball
        .descend(
            a2,
            std::iter::once(1).chain(std::iter::repeat_n(0, beta as usize - 1)),
        )
        .expect("radius checked");

    let mut vertices = vec![v0];
    vertices.extend(&family);
    vertices.extend(&family2);
    vertices.push(apex);
    vertices.push(apex2);
    let n = vertices.len();
    let (f1, f2) = (1..q as usize, q as usize..2 * q as usize - 1);
    let (ia, ib) = (n - 2, n - 1);

    let mut pairs = Vec::new();
    for fam in [f1.clone(), f2.clone()] {
        for i in fam.clone() {
            pairs.push((0, i));
            for j in fam.clone().filter(|&j| j > i) {
                pairs.push((i, j));
            }
        }
    }
    pairs.extend(f1.map(|i| (i, ia)));
    pairs.extend(f2.map(|i| (i, ib)));
    pairs.push((ia, ib));

    for &(i, j) in &pairs {
        let dist = ball.distance(vertices[i], vertices[j]);
        if dist != d {
            return Err(Error::Construction(format!(
                "spindle pair ({i}, {j}) is at distance {dist}"
            )));
        }
    }
    let mut sorted = vertices.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != n {
        return Err(Error::Construction(
            "spindle vertices are not distinct".into(),
        ));
    }
    Ok(Spindle { d, vertices, pairs })
}

/// `q (q-1)^{floor(cd/2) - ceil(d/2)}` vertices at distance `floor(cd/2)`
/// from `x0`, pairwise at distance in `[d, floor(cd)]`: the sphere of
/// radius `floor(cd/2) - ceil(d/2) + 1`, each point pushed outward.
pub fn interval_clique_tree(ball: &TreeBall, d: u32, c: f64) -> Result<Vec<VertexId>> {
    if d < 1 {
        return Err(invalid("d must be positive"));
    }
    if !(c > 1.0 && c.is_finite()) {
        return Err(invalid(format!("interval factor c must exceed 1, got {c}")));
    }
    let outer = (c * d as f64 / 2.0).floor() as u32;
    let inner = d.div_ceil(2);
    if outer < inner {
        return Err(invalid(format!(
            "floor(cd/2) = {outer} is below ceil(d/2) = {inner}"
        )));
    }
    require_radius(ball, outer)?;
    let sphere = outer - inner + 1;
    let out: Vec<VertexId> = ball
        .ball_vertices_at(ball.base(), &(sphere..=sphere))
        .into_iter()
        .map(|v| extend_outward(ball, v, outer - sphere).expect("radius checked"))
        .collect();
    let hi = (c * d as f64).floor() as u32;
    check_pairs(ball, &out, |x| x >= d && x <= hi)?;
    Ok(out)
}
