//! The {7,3} tiling by regular heptagons with interior angle `2π/3`, and its
//! 8-coloring whose color classes are far apart.
//!
//! Tiles are motions of one base heptagon centered at `i`. Side `j` of the
//! base joins vertices `j` and `j + 1`; vertex `j` lies at angle `2πj/7`
//! counterclockwise from straight up, so slots increase counterclockwise.
//! The tile across side `j` of a tile `M` is `M ∘ N_j`, where `N_j` is the
//! half turn about the midpoint of side `j`.

use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hypgeom::{hyp_distance, HPoint, Isometry};
use crate::output::fmt_f64;

pub const SIDES: usize = 7;
pub const COLORS: u8 = 8;
pub const MAX_DEPTH: u32 = 5;
/// Two tile centers closer than this are the same tile.
pub const DEDUP_TOL: f64 = 1e-7;
/// Boundary samples per side before refinement.
pub const SAMPLES_PER_SIDE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HeptagonGeometry {
    pub circumradius: f64,
    pub inradius: f64,
    pub side_length: f64,
    pub diameter: f64,
    pub interior_angle: f64,
    pub vertex_count: usize,
}

/// Each heptagon splits into 7 triangles with angles `π/3, π/3, 2π/7`; the
/// right-triangle identity `cosh c = cot A cot B` gives the circumradius.
pub fn heptagon_geometry() -> HeptagonGeometry {
    let (a, b) = (PI / 7.0, PI / 3.0);
    let circumradius = (1.0 / (a.tan() * b.tan())).acosh();
    let inradius = (b.cos() / a.sin()).acosh();
    let (ch, sh) = (circumradius.cosh(), circumradius.sinh());
    let chord = |k: f64| (ch * ch - sh * sh * (TAU * k / 7.0).cos()).acosh();
    let diameter = (1..=3).map(|k| chord(k as f64)).fold(0.0, f64::max);
    HeptagonGeometry {
        circumradius,
        inradius,
        side_length: chord(1.0),
        diameter,
        interior_angle: 2.0 * PI / 3.0,
        vertex_count: SIDES,
    }
}

fn base_vertex(g: &HeptagonGeometry, j: usize) -> HPoint {
    Isometry::rotation_about(HPoint::I, TAU * j as f64 / 7.0)
        .apply(HPoint::new_unchecked(0.0, g.circumradius.exp()))
}

/// Rotation taking the upward direction at `i` to the midpoint of side `j`.
fn side_frame(j: usize) -> Isometry {
    Isometry::rotation_about(HPoint::I, TAU * j as f64 / 7.0 + PI / 7.0)
}

fn base_midpoint(g: &HeptagonGeometry, j: usize) -> HPoint {
    side_frame(j).apply(HPoint::new_unchecked(0.0, g.inradius.exp()))
}

/// Vertices of the base heptagon, counterclockwise from the top.
pub fn base_vertices() -> Vec<HPoint> {
    let g = heptagon_geometry();
    (0..SIDES).map(|j| base_vertex(&g, j)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Tile {
    pub motion: Isometry,
    pub dual_id: usize,
    pub depth: u32,
    pub color_id: Option<u8>,
    /// Tile across each side, when it is in the patch.
    pub neighbors: [Option<usize>; SIDES],
}

impl Tile {
    pub fn center(&self) -> HPoint {
        self.motion.apply(HPoint::I)
    }

    pub fn vertices(&self, g: &HeptagonGeometry) -> [HPoint; SIDES] {
        std::array::from_fn(|j| self.motion.apply(base_vertex(g, j)))
    }

    /// All 7 neighbors present.
    pub fn is_interior(&self) -> bool {
        self.neighbors.iter().all(Option::is_some)
    }

    fn slot_of(&self, other: usize) -> Option<usize> {
        self.neighbors.iter().position(|&n| n == Some(other))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TilingPatch {
    pub depth: u32,
    pub tiles: Vec<Tile>,
}

impl TilingPatch {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Tile counts per dual-graph distance from the base.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.depth as usize + 1];
        for t in &self.tiles {
            out[t.depth as usize] += 1;
        }
        out
    }

    /// Dual-graph distances from `src` within the patch.
    pub fn dual_distances(&self, src: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.tiles.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(t) = queue.pop_front() {
            let dt = dist[t].unwrap();
            for n in self.tiles[t].neighbors.iter().flatten() {
                if dist[*n].is_none() {
                    dist[*n] = Some(dt + 1);
                    queue.push_back(*n);
                }
            }
        }
        dist
    }

    /// Pairs of adjacent tiles with the same color.
    pub fn adjacent_same_color(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, t) in self.tiles.iter().enumerate() {
            for &b in t.neighbors.iter().flatten() {
                if a < b && t.color_id.is_some() && t.color_id == self.tiles[b].color_id {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// CSV dump: `dualId,colorId,centerX,centerY`; uncolored tiles leave
    /// the color empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "dualId,colorId,centerX,centerY")?;
        for t in &self.tiles {
            let c = t.center();
            let color = t.color_id.map(|c| c.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{}",
                t.dual_id,
                color,
                fmt_f64(c.x()),
                fmt_f64(c.y())
            )?;
        }
        Ok(())
    }
}

/// All tiles within dual distance `depth` of the base, breadth-first.
pub fn generate_patch(depth: u32) -> Result<TilingPatch> {
    if depth > MAX_DEPTH {
        return Err(invalid(format!(
            "tiling depth must be at most {MAX_DEPTH}, got {depth}"
        )));
    }
    let g = heptagon_geometry();
    let half_turns: Vec<Isometry> = (0..SIDES)
        .map(|j| Isometry::rotation_about(base_midpoint(&g, j), PI))
        .collect();
    let midpoints: Vec<HPoint> = (0..SIDES).map(|j| base_midpoint(&g, j)).collect();

    let mut tiles = vec![Tile {
        motion: Isometry::IDENTITY,
        dual_id: 0,
        depth: 0,
        color_id: None,
        neighbors: [None; SIDES],
    }];
    let mut centers = vec![HPoint::I];
    let mut queue = VecDeque::from([0usize]);
    while let Some(t) = queue.pop_front() {
        if tiles[t].depth == depth {
            continue;
        }
        for (j, turn) in half_turns.iter().enumerate() {
            if tiles[t].neighbors[j].is_some() {
                continue;
            }
            let motion = tiles[t].motion.compose(turn);
            let center = motion.apply(HPoint::I);
            let found = centers
                .iter()
                .position(|&c| hyp_distance(c, center) < DEDUP_TOL);
            let n = found.unwrap_or_else(|| {
                tiles.push(Tile {
                    motion,
                    dual_id: tiles.len(),
                    depth: tiles[t].depth + 1,
                    color_id: None,
                    neighbors: [None; SIDES],
                });
                centers.push(center);
                queue.push_back(tiles.len() - 1);
                tiles.len() - 1
            });
            // The shared side is the side of `n` whose midpoint matches.
            let shared = tiles[t].motion.apply(midpoints[j]);
            let back = (0..SIDES)
                .min_by(|&a, &b| {
                    let da = hyp_distance(tiles[n].motion.apply(midpoints[a]), shared);
                    let db = hyp_distance(tiles[n].motion.apply(midpoints[b]), shared);
                    da.total_cmp(&db)
                })
                .unwrap();
            tiles[t].neighbors[j] = Some(n);
            tiles[n].neighbors[back] = Some(t);
        }
    }
    Ok(TilingPatch { depth, tiles })
}

/// The walk `u -> a -> v -> w` that forces `color(w) = color(u)`: at `a`,
/// take the edge two slots counterclockwise from the edge back to `u`; at
/// `v`, take the edge three slots clockwise from the edge back to `a`.
///
/// Turning two slots at both corners (`±4π/7`) would relate tiles only
/// about 1.506 apart and would never reach the 7 second-layer tiles that
/// touch two first-layer tiles.
fn rule_walk(patch: &TilingPatch, u: usize, slot: usize) -> Option<[usize; 4]> {
    let a = patch.tiles[u].neighbors[slot]?;
    let b = patch.tiles[a].slot_of(u)?;
    let v = patch.tiles[a].neighbors[(b + 2) % SIDES]?;
    let b2 = patch.tiles[v].slot_of(a)?;
    let w = patch.tiles[v].neighbors[(b2 + SIDES - 3) % SIDES]?;
    Some([u, a, v, w])
}

/// Seeds colors `0..8` on the base and its neighbors, then propagates the
/// walk rule until nothing changes.
pub fn color_patch(mut patch: TilingPatch) -> Result<TilingPatch> {
    for t in &mut patch.tiles {
        t.color_id = None;
    }
    patch.tiles[0].color_id = Some(0);
    for j in 0..SIDES {
        if let Some(n) = patch.tiles[0].neighbors[j] {
            patch.tiles[n].color_id = Some(j as u8 + 1);
        }
    }
    let mut queue: VecDeque<usize> = (0..patch.len())
        .filter(|&t| patch.tiles[t].color_id.is_some())
        .collect();
    while let Some(u) = queue.pop_front() {
        let cu = patch.tiles[u].color_id.unwrap();
        for slot in 0..SIDES {
            let Some([_, a, v, w]) = rule_walk(&patch, u, slot) else {
                continue;
            };
            match patch.tiles[w].color_id {
                None => {
                    patch.tiles[w].color_id = Some(cu);
                    queue.push_back(w);
                }
                Some(cw) if cw != cu => {
                    return Err(Error::InconsistentColoring(format!(
                        "walk {u} -> {a} -> {v} -> {w} ends on color {cw}, expected {cu}"
                    )));
                }
                Some(_) => {}
            }
        }
    }
    Ok(patch)
}

/// Walks whose endpoints are both colored but differ.
pub fn rule_violations(patch: &TilingPatch) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for u in 0..patch.len() {
        for slot in 0..SIDES {
            if let Some(walk) = rule_walk(patch, u, slot) {
                let (cu, cw) = (patch.tiles[u].color_id, patch.tiles[walk[3]].color_id);
                if cu.is_some() && cw.is_some() && cu != cw {
                    out.push(walk);
                }
            }
        }
    }
    out
}

/// Point at arclength `t` from the midpoint of side `side` of the base
/// heptagon, carried by `frame = motion ∘ side_frame(side)`.
fn side_point(frame: &Isometry, rho: f64, t: f64) -> HPoint {
    frame.apply(HPoint::new_unchecked(rho * t.tanh(), rho / t.cosh()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Separation {
    pub distance: f64,
    pub tile_a: usize,
    pub tile_b: usize,
    pub color: u8,
    pub dual_distance: Option<u32>,
    pub pairs_examined: usize,
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut e) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fe) = (f(c), f(e));
    for _ in 0..60 {
        if fc <= fe {
            (b, e, fe) = (e, c, fc);
            c = b - g * (b - a);
            fc = f(c);
        } else {
            (a, c, fc) = (c, e, fe);
            e = a + g * (b - a);
            fe = f(e);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (a, f(a)), (b, f(b))]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap()
}

/// Distance between the closures of two tiles. Each boundary is sampled at
/// [`SAMPLES_PER_SIDE`] points per side; the side pairs whose samples come
/// close to the best are then minimized exactly, which works because the
/// distance between two geodesic segments is convex in both arclengths.
pub fn tile_distance(g: &HeptagonGeometry, a: &Tile, b: &Tile) -> f64 {
    let rho = g.inradius.exp();
    let half = 0.5 * g.side_length;
    let frames = |t: &Tile| -> Vec<Isometry> {
        (0..SIDES)
            .map(|j| t.motion.compose(&side_frame(j)))
            .collect()
    };
    let (fa, fb) = (frames(a), frames(b));
    let ts: Vec<f64> = (0..=SAMPLES_PER_SIDE)
        .map(|k| -half + 2.0 * half * k as f64 / SAMPLES_PER_SIDE as f64)
        .collect();
    let sample =
        |f: &Isometry| -> Vec<HPoint> { ts.iter().map(|&t| side_point(f, rho, t)).collect() };
    let (pa, pb): (Vec<_>, Vec<_>) = (
        fa.iter().map(sample).collect(),
        fb.iter().map(sample).collect(),
    );

    let mut coarse = Vec::with_capacity(SIDES * SIDES);
    for (i, sa) in pa.iter().enumerate() {
        for (j, sb) in pb.iter().enumerate() {
            let m = sa
                .iter()
                .flat_map(|p| sb.iter().map(move |q| hyp_distance(*p, *q)))
                .fold(f64::INFINITY, f64::min);
            coarse.push((m, i, j));
        }
    }
    let best = coarse.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    // Sample spacing bounds how far a sampled minimum can sit above the true one.
    let slack = 2.0 * half / SAMPLES_PER_SIDE as f64 * 2.0;
    coarse
        .iter()
        .filter(|c| c.0 <= best + slack)
        .map(|&(_, i, j)| {
            let inner = |s: f64| {
                let p = side_point(&fa[i], rho, s);
                golden_min(|t| hyp_distance(p, side_point(&fb[j], rho, t)), -half, half).1
            };
            golden_min(inner, -half, half).1
        })
        .fold(best, f64::min)
}

/// Smallest distance between two distinct tiles of the same color.
pub fn min_same_color_separation(patch: &TilingPatch) -> Result<Separation> {
    let g = heptagon_geometry();
    let mut pairs = Vec::new();
    for a in 0..patch.len() {
        for b in a + 1..patch.len() {
            let (ca, cb) = (patch.tiles[a].color_id, patch.tiles[b].color_id);
            if ca.is_some() && ca == cb {
                pairs.push((
                    hyp_distance(patch.tiles[a].center(), patch.tiles[b].center()),
                    a,
                    b,
                ));
            }
        }
    }
    if pairs.is_empty() {
        return Err(invalid("no two tiles of the patch share a color"));
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));

    // Closures of tiles with centers D apart are at least D - 2R apart, so
    // pairs are examined in batches of increasing center distance until
    // that bound passes the best distance found.
    let mut best: Option<(f64, usize, usize)> = None;
    let mut examined = 0;
    for batch in pairs.chunks(64) {
        let lower = batch[0].0 - 2.0 * g.circumradius;
        if best.is_some_and(|b| lower > b.0) {
            break;
        }
        let found = batch
            .par_iter()
            .map(|&(_, a, b)| (tile_distance(&g, &patch.tiles[a], &patch.tiles[b]), a, b))
            .min_by(|p, q| p.0.total_cmp(&q.0).then((p.1, p.2).cmp(&(q.1, q.2))))
            .unwrap();
        examined += batch.len();
        if best.is_none_or(|b| found.0 < b.0) {
            best = Some(found);
        }
    }
    let (distance, a, b) = best.unwrap();
    Ok(Separation {
        distance,
        tile_a: a,
        tile_b: b,
        color: patch.tiles[a].color_id.unwrap(),
        dual_distance: patch.dual_distances(a)[b],
        pairs_examined: examined,
    })
}
