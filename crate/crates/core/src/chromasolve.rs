//! Exact clique and coloring search on finite distance graphs.
//!
//! Budgets count search nodes, never wall time, so a run is reproducible:
//! the same graph, `k` and budget give the same answer on every machine.

use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hypgeom::{hyp_distance, HPoint};
use crate::treegeom::TreeBall;

/// Relative comparison slack for real-valued forbidden distances.
pub const POINT_DISTANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DistGraph {
    vertex_count: usize,
    edges: Vec<(u32, u32)>,
    #[serde(skip)]
    adj: Vec<Vec<u32>>,
    provenance: String,
}

impl DistGraph {
    /// Deduplicates and sorts the edges; loops and out-of-range endpoints
    /// are errors.
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(invalid(format!("loop at vertex {u}")));
            }
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(invalid(format!(
                    "edge ({u}, {v}) out of range for {vertex_count} vertices"
                )));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        list.dedup();
        let mut adj = vec![Vec::new(); vertex_count];
        for &(u, v) in &list {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        Ok(DistGraph {
            vertex_count,
            edges: list,
            adj,
            provenance: provenance.into(),
        })
    }

    /// Ball vertices joined when their tree distance lies in `forbidden`.
    pub fn from_tree_ball(ball: &TreeBall, forbidden: RangeInclusive<u32>) -> Result<Self> {
        if *forbidden.start() == 0 || forbidden.is_empty() {
            return Err(invalid(
                "forbidden distances must be a nonempty range of positive integers",
            ));
        }
        let edges = ball
            .pairs_at(&forbidden)
            .into_iter()
            .map(|(u, v)| (u as u32, v as u32));
        let provenance = format!(
            "T_{} ball radius {} around x0, forbidden distances {}..={}",
            ball.q(),
            ball.radius(),
            forbidden.start(),
            forbidden.end()
        );
        DistGraph::new(ball.ball_size(), edges, provenance)
    }

    /// Points joined when `lo (1 - tol) <= dist <= hi (1 + tol)`.
    pub fn from_points<P: Sync, F>(
        points: &[P],
        dist: F,
        lo: f64,
        hi: f64,
        provenance: impl Into<String>,
    ) -> Result<Self>
    where
        F: Fn(&P, &P) -> f64,
    {
        if !(lo > 0.0 && hi >= lo) {
            return Err(invalid(format!("bad forbidden interval [{lo}, {hi}]")));
        }
        let mut edges = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let x = dist(&points[i], &points[j]);
                if x >= lo * (1.0 - POINT_DISTANCE_TOL) && x <= hi * (1.0 + POINT_DISTANCE_TOL) {
                    edges.push((i as u32, j as u32));
                }
            }
        }
        DistGraph::new(points.len(), edges, provenance)
    }

    pub fn from_hyperbolic_points(points: &[HPoint], lo: f64, hi: f64) -> Result<Self> {
        let provenance = format!(
            "{} half-plane points, forbidden distances [{lo}, {hi}]",
            points.len()
        );
        Self::from_points(points, |a, b| hyp_distance(*a, *b), lo, hi, provenance)
    }

    /// Reads `u v` per line; blank lines and lines starting with `#` are
    /// skipped. The vertex count is one more than the largest id.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n = 0usize;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let parse = |s: Option<&str>| -> Result<u32> {
                s.ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: "expected two vertex ids".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: format!("{e}"),
                })
            };
            let mut it = t.split_whitespace();
            let (u, v) = (parse(it.next())?, parse(it.next())?);
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "trailing tokens".into(),
                });
            }
            n = n.max(u.max(v) as usize + 1);
            edges.push((u, v));
        }
        DistGraph::new(n, edges, "edge list")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].contains(&(b as u32))
    }

    /// Subgraph on `vertices`, relabeled `0..vertices.len()` in that order.
    pub fn induced(&self, vertices: &[usize]) -> DistGraph {
        let mut index = vec![u32::MAX; self.vertex_count];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i as u32;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u as usize] != u32::MAX && index[v as usize] != u32::MAX)
            .map(|&(u, v)| (index[u as usize], index[v as usize]));
        DistGraph::new(
            vertices.len(),
            edges,
            format!("induced subgraph of {}", self.provenance),
        )
        .expect("relabeled edges are valid")
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.vertex_count];
        let mut out = Vec::new();
        for s in 0..self.vertex_count {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        comp.push(w as usize);
                        queue.push_back(w as usize);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// True when `colors` is a proper coloring of every vertex.
    pub fn is_proper_coloring(&self, colors: &[u32]) -> bool {
        colors.len() == self.vertex_count
            && self
                .edges
                .iter()
                .all(|&(u, v)| colors[u as usize] != colors[v as usize])
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            vertices[i + 1..]
                .iter()
                .all(|&v| u != v && self.has_edge(u, v))
        })
    }
}

/// Node budget shared by every stage of one solver call.
#[derive(Debug, Clone, Copy)]
struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    /// Counts one node; false once the limit is passed.
    fn tick(&mut self) -> bool {
        self.used += 1;
        self.used <= self.limit
    }

    fn exhausted(&self) -> bool {
        self.used > self.limit
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CliqueResult {
    pub size: usize,
    pub witness: Vec<usize>,
    pub exact: bool,
    pub nodes: u64,
}

struct Bitset {
    words: usize,
    bits: Vec<u64>,
}

impl Bitset {
    fn adjacency(g: &DistGraph, order: &[usize]) -> Self {
        let n = order.len();
        let words = n.div_ceil(64).max(1);
        let mut pos = vec![usize::MAX; g.vertex_count()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut bits = vec![0u64; n * words];
        for (i, &v) in order.iter().enumerate() {
            for &w in g.neighbors(v) {
                let j = pos[w as usize];
                if j != usize::MAX {
                    bits[i * words + j / 64] |= 1 << (j % 64);
                }
            }
        }
        Bitset { words, bits }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }
}

fn first_bit(set: &[u64]) -> Option<usize> {
    set.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
}

struct CliqueSearch<'a> {
    adj: &'a Bitset,
    best: Vec<usize>,
    current: Vec<usize>,
    budget: &'a mut Budget,
}

impl CliqueSearch<'_> {
    /// Greedy sequential coloring of `cand`; returns vertices with their
    /// color numbers, ascending, as the branching order and bound.
    fn color_sort(&self, cand: &[u64]) -> Vec<(usize, usize)> {
        let mut uncolored = cand.to_vec();
        let mut out = Vec::new();
        let mut color = 0;
        while uncolored.iter().any(|&w| w != 0) {
            color += 1;
            let mut q = uncolored.clone();
            while let Some(v) = first_bit(&q) {
                uncolored[v / 64] &= !(1 << (v % 64));
                q[v / 64] &= !(1 << (v % 64));
                for (qw, aw) in q.iter_mut().zip(self.adj.row(v)) {
                    *qw &= !aw;
                }
                out.push((v, color));
            }
        }
        out
    }

    fn expand(&mut self, mut cand: Vec<u64>) -> bool {
        let order = self.color_sort(&cand);
        for &(v, color) in order.iter().rev() {
            if self.current.len() + color <= self.best.len() {
                return true;
            }
            if !self.budget.tick() {
                return false;
            }
            self.current.push(v);
            let next: Vec<u64> = cand
                .iter()
                .zip(self.adj.row(v))
                .map(|(c, a)| c & a)
                .collect();
            if next.iter().all(|&w| w == 0) {
                if self.current.len() > self.best.len() {
                    self.best = self.current.clone();
                }
            } else if !self.expand(next) {
                self.current.pop();
                return false;
            }
            self.current.pop();
            cand[v / 64] &= !(1 << (v % 64));
        }
        true
    }
}

fn max_clique_with(g: &DistGraph, vertices: &[usize], budget: &mut Budget) -> (Vec<usize>, bool) {
    if vertices.is_empty() {
        return (Vec::new(), true);
    }
    let mut order = vertices.to_vec();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let adj = Bitset::adjacency(g, &order);
    let mut cand = vec![0u64; adj.words];
    for i in 0..order.len() {
        cand[i / 64] |= 1 << (i % 64);
    }
    let mut search = CliqueSearch {
        adj: &adj,
        best: vec![0],
        current: Vec::new(),
        budget,
    };
    let exact = search.expand(cand);
    let mut witness: Vec<usize> = search.best.iter().map(|&i| order[i]).collect();
    witness.sort_unstable();
    (witness, exact)
}

/// Largest clique by branch and bound with a greedy-coloring bound.
/// When the budget runs out the best clique found so far is returned with
/// `exact = false`.
pub fn max_clique(g: &DistGraph, budget: u64) -> CliqueResult {
    let mut b = Budget::new(budget);
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    let (witness, exact) = max_clique_with(g, &all, &mut b);
    debug_assert!(g.is_clique(&witness));
    CliqueResult {
        size: witness.len(),
        witness,
        exact,
        nodes: b.used.min(budget),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    Sat { coloring: Vec<u32> },
    Unsat,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KColorResult {
    pub k: u32,
    #[serde(flatten)]
    pub decision: Decision,
    pub nodes: u64,
}

const UNCOLORED: u32 = u32::MAX;

/// DSATUR over one connected component with forward checking.
struct Dsatur<'a> {
    adj: &'a [Vec<u32>],
    degree: Vec<usize>,
    k: usize,
    color: Vec<u32>,
    count: Vec<u32>,
    sat: Vec<u32>,
    uncolored: usize,
}

enum Outcome {
    Sat,
    Unsat,
    Timeout,
}

impl<'a> Dsatur<'a> {
    fn new(adj: &'a [Vec<u32>], k: usize) -> Self {
        let n = adj.len();
        Dsatur {
            adj,
            degree: adj.iter().map(Vec::len).collect(),
            k,
            color: vec![UNCOLORED; n],
            count: vec![0; n * k],
            sat: vec![0; n],
            uncolored: n,
        }
    }

    fn assign(&mut self, v: usize, c: u32) {
        self.color[v] = c;
        self.uncolored -= 1;
        for &w in &self.adj[v] {
            let slot = &mut self.count[w as usize * self.k + c as usize];
            if *slot == 0 {
                self.sat[w as usize] += 1;
            }
            *slot += 1;
        }
    }

    fn unassign(&mut self, v: usize) {
        let c = self.color[v];
        self.color[v] = UNCOLORED;
        self.uncolored += 1;
        for &w in &self.adj[v] {
            let slot = &mut self.count[w as usize * self.k + c as usize];
            *slot -= 1;
            if *slot == 0 {
                self.sat[w as usize] -= 1;
            }
        }
    }

    fn free(&self, v: usize, c: u32) -> bool {
        self.count[v * self.k + c as usize] == 0
    }

    /// Highest saturation, then highest degree, then lowest id.
    fn pick(&self) -> usize {
        let mut best = usize::MAX;
        for v in 0..self.color.len() {
            if self.color[v] != UNCOLORED {
                continue;
            }
            if best == usize::MAX
                || (self.sat[v], self.degree[v]) > (self.sat[best], self.degree[best])
            {
                best = v;
            }
        }
        best
    }

    fn search(&mut self, max_used: Option<u32>, budget: &mut Budget) -> Outcome {
        if self.uncolored == 0 {
            return Outcome::Sat;
        }
        if !budget.tick() {
            return Outcome::Timeout;
        }
        let v = self.pick();
        let limit = max_used.map_or(1, |m| m + 2).min(self.k as u32);
        for c in 0..limit {
            if !self.free(v, c) {
                continue;
            }
            self.assign(v, c);
            let wiped = self.adj[v].iter().any(|&w| {
                self.color[w as usize] == UNCOLORED && self.sat[w as usize] as usize >= self.k
            });
            if !wiped {
                match self.search(Some(max_used.map_or(c, |m| m.max(c))), budget) {
                    Outcome::Sat => return Outcome::Sat,
                    Outcome::Timeout => {
                        self.unassign(v);
                        return Outcome::Timeout;
                    }
                    Outcome::Unsat => {}
                }
            }
            self.unassign(v);
        }
        Outcome::Unsat
    }

    /// Plain DSATUR: every vertex takes its smallest free color.
    fn greedy(mut self) -> Vec<u32> {
        while self.uncolored > 0 {
            let v = self.pick();
            let c = (0..self.k as u32)
                .find(|&c| self.free(v, c))
                .expect("k exceeds the maximum degree");
            self.assign(v, c);
        }
        self.color
    }
}

/// Local adjacency of a component, relabeled in the order of `vertices`.
fn local_adjacency(g: &DistGraph, vertices: &[usize]) -> Vec<Vec<u32>> {
    let mut index = vec![u32::MAX; g.vertex_count()];
    for (i, &v) in vertices.iter().enumerate() {
        index[v] = i as u32;
    }
    vertices
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .map(|&w| index[w as usize])
                .filter(|&i| i != u32::MAX)
                .collect()
        })
        .collect()
}

/// Removes vertices of degree `< k` until none remain; returns the kept
/// vertices and the removal order.
fn k_core(g: &DistGraph, k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut deg: Vec<usize> = (0..g.vertex_count()).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; g.vertex_count()];
    let mut order = Vec::new();
    let mut stack: Vec<usize> = (0..g.vertex_count()).filter(|&v| deg[v] < k).collect();
    for &v in &stack {
        removed[v] = true;
    }
    while let Some(v) = stack.pop() {
        order.push(v);
        for &w in g.neighbors(v) {
            let w = w as usize;
            if removed[w] {
                continue;
            }
            deg[w] -= 1;
            if deg[w] < k {
                removed[w] = true;
                stack.push(w);
            }
        }
    }
    let kept = (0..g.vertex_count()).filter(|&v| !removed[v]).collect();
    (kept, order)
}

/// Runs `f` on a thread with a stack deep enough for one recursion level per
/// vertex.
fn with_deep_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, f)
            .expect("spawn solver thread")
            .join()
            .expect("solver thread panicked")
    })
}

fn decide(g: &DistGraph, k: usize, budget: &mut Budget) -> Decision {
    if k == 0 {
        return if g.vertex_count() == 0 {
            Decision::Sat {
                coloring: Vec::new(),
            }
        } else {
            Decision::Unsat
        };
    }
    let (core, removed) = k_core(g, k);
    let core_graph = g.induced(&core);
    let mut coloring = vec![UNCOLORED; g.vertex_count()];

    for comp in core_graph.components() {
        let (clique, _) = max_clique_with(&core_graph, &comp, budget);
        if budget.exhausted() {
            return Decision::Timeout;
        }
        if clique.len() > k {
            return Decision::Unsat;
        }
        // Clique first, so that the pre-coloring fixes colors 0..|clique|.
        let mut order = clique.clone();
        order.extend(
            comp.iter()
                .copied()
                .filter(|v| clique.binary_search(v).is_err()),
        );
        let adj = local_adjacency(&core_graph, &order);
        let mut search = Dsatur::new(&adj, k);
        for (i, _) in clique.iter().enumerate() {
            search.assign(i, i as u32);
        }
        let max_used = clique.len().checked_sub(1).map(|m| m as u32);
        match search.search(max_used, budget) {
            Outcome::Sat => {
                for (i, &v) in order.iter().enumerate() {
                    coloring[core[v]] = search.color[i];
                }
            }
            Outcome::Unsat => return Decision::Unsat,
            Outcome::Timeout => return Decision::Timeout,
        }
    }

    for &v in removed.iter().rev() {
        let mut used = vec![false; k];
        for &w in g.neighbors(v) {
            let c = coloring[w as usize];
            if c != UNCOLORED {
                used[c as usize] = true;
            }
        }
        coloring[v] = used
            .iter()
            .position(|&u| !u)
            .expect("removed vertices have a free color") as u32;
    }
    debug_assert!(g.is_proper_coloring(&coloring));
    Decision::Sat { coloring }
}

/// Decides whether `g` has a proper `k`-coloring.
///
/// Vertices of degree below `k` are peeled off and colored last; each
/// remaining component is searched by DSATUR with a maximum clique
/// pre-colored and new colors opened one at a time.
pub fn k_colorable(g: &DistGraph, k: u32, budget: u64) -> KColorResult {
    let mut b = Budget::new(budget);
    let decision = with_deep_stack(|| decide(g, k as usize, &mut b));
    if let Decision::Sat { coloring } = &decision {
        assert!(
            g.is_proper_coloring(coloring),
            "solver returned an improper coloring"
        );
    }
    KColorResult {
        k,
        decision,
        nodes: b.used.min(budget),
    }
}

/// Like [`k_colorable`], but first tries `hint`: a proper coloring with at
/// most `k` colors is accepted without search.
pub fn k_colorable_with_hint(g: &DistGraph, k: u32, hint: &[u32], budget: u64) -> KColorResult {
    if g.is_proper_coloring(hint) && hint.iter().all(|&c| c < k) {
        return KColorResult {
            k,
            decision: Decision::Sat {
                coloring: hint.to_vec(),
            },
            nodes: 0,
        };
    }
    k_colorable(g, k, budget)
}

/// DSATUR greedy coloring.
pub fn greedy_coloring(g: &DistGraph) -> Vec<u32> {
    let adj: Vec<Vec<u32>> = (0..g.vertex_count())
        .map(|v| g.neighbors(v).to_vec())
        .collect();
    let max_deg = adj.iter().map(Vec::len).max().unwrap_or(0);
    Dsatur::new(&adj, max_deg + 1).greedy()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Solved,
    /// The budget ran out after the bounds had been tightened.
    Bounded,
    /// The budget ran out before either bound improved.
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ColoringResult {
    pub lower_bound: u32,
    pub upper_bound: u32,
    pub exact: Option<u32>,
    pub certificate: Option<Vec<u32>>,
    pub clique: Vec<usize>,
    pub status: SolveStatus,
    pub nodes: u64,
}

fn palette(coloring: &[u32]) -> u32 {
    coloring.iter().max().map_or(0, |&m| m + 1)
}

/// Exact chromatic number within `budget` nodes: clique lower bound, DSATUR
/// upper bound, then a `k`-colorability decision for each `k` in between,
/// smallest first.
pub fn chromatic_number(g: &DistGraph, budget: u64) -> ColoringResult {
    let mut b = Budget::new(budget);
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    let (clique, clique_exact) = max_clique_with(g, &all, &mut b);
    let mut best = greedy_coloring(g);
    let mut lower = clique.len() as u32;
    let mut upper = palette(&best);
    let (lower0, upper0) = (lower, upper);
    let mut timed_out = !clique_exact;

    while lower < upper && !timed_out {
        let decision = with_deep_stack(|| decide(g, lower as usize, &mut b));
        match decision {
            Decision::Sat { coloring } => {
                upper = palette(&coloring);
                best = coloring;
            }
            Decision::Unsat => lower += 1,
            Decision::Timeout => timed_out = true,
        }
    }
    assert!(
        g.is_proper_coloring(&best),
        "solver returned an improper coloring"
    );
    let solved = lower >= upper;
    let status = if solved {
        SolveStatus::Solved
    } else if lower > lower0 || upper < upper0 {
        SolveStatus::Bounded
    } else {
        SolveStatus::Timeout
    };
    ColoringResult {
        lower_bound: lower.min(upper),
        upper_bound: upper,
        exact: solved.then_some(upper),
        certificate: Some(best),
        clique,
        status,
        nodes: b.used.min(budget),
    }
}

/// Variable of "vertex `v` has color `c`".
pub fn cnf_var(v: usize, c: u32, k: u32) -> u64 {
    v as u64 * k as u64 + c as u64 + 1
}

pub fn cnf_clause_count(g: &DistGraph, k: u32) -> u64 {
    let (n, k, e) = (g.vertex_count() as u64, k as u64, g.edge_count() as u64);
    n + n * k * (k - 1) / 2 + e * k
}

/// DIMACS CNF for `k`-colorability: at-least-one per vertex, pairwise
/// at-most-one per vertex, then one conflict clause per edge and color.
pub fn write_dimacs_cnf<W: Write>(g: &DistGraph, k: u32, mut out: W) -> Result<()> {
    if k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    let n = g.vertex_count();
    writeln!(
        out,
        "p cnf {} {}",
        n as u64 * k as u64,
        cnf_clause_count(g, k)
    )?;
    for v in 0..n {
        for c in 0..k {
            write!(out, "{} ", cnf_var(v, c, k))?;
        }
        writeln!(out, "0")?;
    }
    for v in 0..n {
        for a in 0..k {
            for b in a + 1..k {
                writeln!(out, "-{} -{} 0", cnf_var(v, a, k), cnf_var(v, b, k))?;
            }
        }
    }
    for &(u, v) in g.edges() {
        for c in 0..k {
            writeln!(
                out,
                "-{} -{} 0",
                cnf_var(u as usize, c, k),
                cnf_var(v as usize, c, k)
            )?;
        }
    }
    Ok(())
}
