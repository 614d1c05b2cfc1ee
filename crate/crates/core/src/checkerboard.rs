//! Horocyclic checkerboard colorings of the half-plane.
//!
//! The plane is cut into horocyclic strata `S_j = { e^{jh} <= y < e^{(j+1)h} }`
//! and each stratum into half-open rectangles
//! `R_{i,j} = [r i e^{jh}, r (i+1) e^{jh}) x S_j` whose base has hyperbolic
//! length `w`, where `r = sqrt(2 (cosh w - 1))`. Rectangle `R_{i,j}` gets
//! color `(i mod (k+1), j mod (m+1))`.

use std::f64::consts::TAU;
use std::io::Write;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypgeom::{acosh1p, cosh_m1, point_at_distance, HPoint};

/// Relative slack allowed when checking the scheme inequalities, so that
/// parameters sitting exactly on a boundary (`h = ln 2`, `k = e^h`) survive
/// rounding.
pub const VALIDATION_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Scheme {
    d_min: f64,
    d_max: f64,
    h: f64,
    w: f64,
    r: f64,
    k_period: u32,
    m_period: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RectIndex {
    pub i: i64,
    pub j: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Color {
    pub horiz: u32,
    pub vert: u32,
}

impl Color {
    /// `horiz + (k+1) vert`.
    pub fn index(&self, k_period: u32) -> u64 {
        self.horiz as u64 + (k_period as u64 + 1) * self.vert as u64
    }
}

impl Scheme {
    /// Checks only structural constraints; the coloring inequalities are
    /// reported by [`Scheme::validate`].
    pub fn new(
        d_min: f64,
        d_max: f64,
        h: f64,
        w: f64,
        k_period: u32,
        m_period: u32,
    ) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(d_min) || !positive(h) || !positive(w) {
            return Err(invalid(format!(
                "scheme needs positive finite dMin, h, w (got {d_min}, {h}, {w})"
            )));
        }
        if !d_max.is_finite() || d_max < d_min {
            return Err(invalid(format!("dMax {d_max} must be >= dMin {d_min}")));
        }
        if k_period < 2 || m_period < 1 {
            return Err(invalid(format!(
                "kPeriod must be >= 2 and mPeriod >= 1 (got {k_period}, {m_period})"
            )));
        }
        Ok(Scheme {
            d_min,
            d_max,
            h,
            w,
            r: (2.0 * cosh_m1(w)).sqrt(),
            k_period,
            m_period,
        })
    }

    /// Scheme for the single forbidden distance `d`.
    pub fn pure(d: f64, h: f64, w: f64, k_period: u32, m_period: u32) -> Result<Self> {
        Scheme::new(d, d, h, w, k_period, m_period)
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }
    pub fn d_max(&self) -> f64 {
        self.d_max
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn k_period(&self) -> u32 {
        self.k_period
    }
    pub fn m_period(&self) -> u32 {
        self.m_period
    }

    pub fn is_interval(&self) -> bool {
        self.d_max > self.d_min
    }

    /// Same scheme with different periods; used to build mutants.
    pub fn with_periods(&self, k_period: u32, m_period: u32) -> Result<Self> {
        Scheme::new(self.d_min, self.d_max, self.h, self.w, k_period, m_period)
    }

    pub fn palette_size(&self) -> u64 {
        (self.k_period as u64 + 1) * (self.m_period as u64 + 1)
    }

    /// Height of the horocycle `y = e^{jh}` bounding stratum `j` from below.
    fn floor_height(&self, j: i64) -> f64 {
        (j as f64 * self.h).exp()
    }

    pub fn rect_of_point(&self, p: HPoint) -> RectIndex {
        let y = p.y();
        let mut j = (y.ln() / self.h).floor() as i64;
        while y < self.floor_height(j) {
            j -= 1;
        }
        while y >= self.floor_height(j + 1) {
            j += 1;
        }
        let width = self.r * self.floor_height(j);
        let x = p.x();
        let mut i = (x / width).floor() as i64;
        while x < i as f64 * width {
            i -= 1;
        }
        while x >= (i + 1) as f64 * width {
            i += 1;
        }
        RectIndex { i, j }
    }

    pub fn color_of_rect(&self, idx: RectIndex) -> Color {
        Color {
            horiz: idx.i.rem_euclid(self.k_period as i64 + 1) as u32,
            vert: idx.j.rem_euclid(self.m_period as i64 + 1) as u32,
        }
    }

    pub fn color_of_point(&self, p: HPoint) -> Color {
        self.color_of_rect(self.rect_of_point(p))
    }

    /// Corners of `R_{i,j}` in the order bottom-left, bottom-right,
    /// top-left, top-right. Only the bottom-left one belongs to the
    /// rectangle.
    pub fn corners(&self, idx: RectIndex) -> [HPoint; 4] {
        let lo = self.floor_height(idx.j);
        let hi = self.floor_height(idx.j + 1);
        let width = self.r * lo;
        let x0 = idx.i as f64 * width;
        let x1 = (idx.i + 1) as f64 * width;
        [
            HPoint::new_unchecked(x0, lo),
            HPoint::new_unchecked(x1, lo),
            HPoint::new_unchecked(x0, hi),
            HPoint::new_unchecked(x1, hi),
        ]
    }

    pub fn validate(&self) -> ValidationReport {
        let horizontal_need = self.h.exp() * (cosh_m1(self.d_max) / cosh_m1(self.w)).sqrt();
        let k = self.k_period as f64;
        let mh = self.m_period as f64 * self.h;
        let diam = rect_diameter(self.w, self.h);
        ValidationReport {
            checks: vec![
                Check {
                    name: "horizontal",
                    description: "kPeriod >= e^h sqrt((cosh dMax - 1)/(cosh w - 1))",
                    lhs: k,
                    rhs: horizontal_need,
                    passed: k >= horizontal_need * (1.0 - VALIDATION_RTOL),
                },
                Check {
                    name: "vertical",
                    description: "mPeriod * h >= dMax",
                    lhs: mh,
                    rhs: self.d_max,
                    passed: mh >= self.d_max * (1.0 - VALIDATION_RTOL),
                },
                Check {
                    name: "diameter",
                    description: "rect_diameter(w, h) <= dMin",
                    lhs: diam,
                    rhs: self.d_min,
                    passed: diam <= self.d_min * (1.0 + VALIDATION_RTOL),
                },
            ],
        }
    }
}

/// Diameter of a closed checkerboard rectangle: the larger of the base and
/// the diagonal.
pub fn rect_diameter(w: f64, h: f64) -> f64 {
    let em1 = h.exp_m1();
    let diagonal = acosh1p((2.0 * cosh_m1(w) + em1 * em1) / (2.0 * h.exp()));
    w.max(diagonal)
}

/// Distance between the two upper corners of a rectangle.
pub fn upper_corner_distance(w: f64, h: f64) -> f64 {
    acosh1p(cosh_m1(w) * (-2.0 * h).exp())
}

/// Distance between the closures of two rectangles of one stratum with
/// `gap` full rectangles strictly between them.
pub fn same_stratum_separation(w: f64, h: f64, gap: u64) -> f64 {
    let g = gap as f64;
    acosh1p(g * g * cosh_m1(w) * (-2.0 * h).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub description: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Region in which base points are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplingWindow {
    /// Lowest stratum index, inclusive.
    pub strata_lo: i64,
    /// Highest stratum index, inclusive.
    pub strata_hi: i64,
    /// Horizontal extent in multiples of `(k+1)` rectangle widths.
    pub horizontal_periods: f64,
}

impl SamplingWindow {
    /// Strata `0..=3(m+1)`, three horizontal palette periods.
    pub fn for_scheme(s: &Scheme) -> Self {
        SamplingWindow {
            strata_lo: 0,
            strata_hi: 3 * (s.m_period as i64 + 1),
            horizontal_periods: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub p: HPoint,
    pub q: HPoint,
    pub t: f64,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ViolationReport {
    pub scheme: Scheme,
    pub samples: u64,
    pub seed: u64,
    pub violation_count: u64,
    /// Boundary hits that disappeared under perturbation.
    pub screened: u64,
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.violation_count == 0
    }
}

/// Randomized falsifier for a checkerboard coloring.
///
/// Samples are split into fixed-size chunks, each with its own ChaCha
/// stream derived from the seed, so the report does not depend on how many
/// worker threads run the chunks.
#[derive(Debug, Clone)]
pub struct Sampler {
    scheme: Scheme,
    window: SamplingWindow,
    allow_invalid: bool,
    max_exemplars: usize,
}

const CHUNK: u64 = 1 << 14;
const PERTURBATION: f64 = 1e-7;

impl Sampler {
    pub fn new(scheme: Scheme) -> Self {
        Sampler {
            window: SamplingWindow::for_scheme(&scheme),
            scheme,
            allow_invalid: false,
            max_exemplars: 16,
        }
    }

    pub fn window(mut self, window: SamplingWindow) -> Self {
        self.window = window;
        self
    }

    /// Lets the sampler run on schemes that fail validation (mutation runs).
    pub fn allow_invalid(mut self, yes: bool) -> Self {
        self.allow_invalid = yes;
        self
    }

    pub fn max_exemplars(mut self, n: usize) -> Self {
        self.max_exemplars = n;
        self
    }

    pub fn run(&self, samples: u64, seed: u64) -> Result<ViolationReport> {
        let report = self.scheme.validate();
        if !self.allow_invalid && !report.is_valid() {
            let names: Vec<_> = report.failures().map(|c| c.name).collect();
            return Err(Error::InvalidScheme(names.join(", ")));
        }
        if self.window.strata_hi < self.window.strata_lo || !(self.window.horizontal_periods > 0.0)
        {
            return Err(invalid("empty sampling window"));
        }
        let chunks = samples.div_ceil(CHUNK);
        let partial: Vec<ChunkResult> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let n = CHUNK.min(samples - c * CHUNK);
                self.run_chunk(seed, c, n)
            })
            .collect();

        let mut out = ViolationReport {
            scheme: self.scheme,
            samples,
            seed,
            violation_count: 0,
            screened: 0,
            violations: Vec::new(),
        };
        for part in partial {
            out.violation_count += part.count;
            out.screened += part.screened;
            for v in part.exemplars {
                if out.violations.len() < self.max_exemplars {
                    out.violations.push(v);
                }
            }
        }
        Ok(out)
    }

    fn run_chunk(&self, seed: u64, chunk: u64, n: u64) -> ChunkResult {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let s = &self.scheme;
        let mut res = ChunkResult::default();
        let lo = self.window.strata_lo as f64 * s.h;
        let hi = (self.window.strata_hi + 1) as f64 * s.h;
        for _ in 0..n {
            let y = rng.random_range(lo..hi).exp();
            let j = s.rect_of_point(HPoint::new_unchecked(0.0, y)).j;
            let span = self.window.horizontal_periods
                * (s.k_period as f64 + 1.0)
                * s.r
                * s.floor_height(j);
            let x = rng.random_range(0.0..span);
            let phi = rng.random_range(0.0..TAU);
            let t = if s.is_interval() {
                rng.random_range(s.d_min..=s.d_max)
            } else {
                s.d_min
            };
            let p = HPoint::new_unchecked(x, y);
            let Some((q, color)) = self.conflict(p, phi, t) else {
                continue;
            };
            let persistent = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
                .iter()
                .all(|&(ex, ey)| {
                    let moved = HPoint::new_unchecked(
                        x + ex * PERTURBATION * y,
                        y * (1.0 + ey * PERTURBATION),
                    );
                    self.conflict(moved, phi, t).is_some()
                });
            if persistent {
                res.count += 1;
                if res.exemplars.len() < self.max_exemplars {
                    res.exemplars.push(Violation { p, q, t, color });
                }
            } else {
                res.screened += 1;
            }
        }
        res
    }

    fn conflict(&self, p: HPoint, phi: f64, t: f64) -> Option<(HPoint, Color)> {
        let q = point_at_distance(p, phi, t).ok()?;
        let cp = self.scheme.color_of_point(p);
        (cp == self.scheme.color_of_point(q)).then_some((q, cp))
    }
}

#[derive(Default)]
struct ChunkResult {
    count: u64,
    screened: u64,
    exemplars: Vec<Violation>,
}

/// Samples `n_samples` distance-`t` pairs and reports same-colored ones.
/// Refuses schemes that fail [`Scheme::validate`].
pub fn verify_by_sampling(scheme: &Scheme, n_samples: u64, seed: u64) -> Result<ViolationReport> {
    Sampler::new(*scheme).run(n_samples, seed)
}

/// Writes `x,y,horiz,vert,colorIndex` rows on an `nx` by `ny` grid covering
/// the default sampling window (log-uniform in `y`).
pub fn write_color_map_csv<W: Write>(
    scheme: &Scheme,
    nx: usize,
    ny: usize,
    mut out: W,
) -> Result<()> {
    writeln!(out, "x,y,horiz,vert,colorIndex")?;
    let win = SamplingWindow::for_scheme(scheme);
    let lo = win.strata_lo as f64 * scheme.h;
    let hi = (win.strata_hi + 1) as f64 * scheme.h;
    for a in 0..ny {
        let y = (lo + (hi - lo) * (a as f64 + 0.5) / ny as f64).exp();
        let j = scheme.rect_of_point(HPoint::new_unchecked(0.0, y)).j;
        let span = win.horizontal_periods
            * (scheme.k_period as f64 + 1.0)
            * scheme.r
            * scheme.floor_height(j);
        for b in 0..nx {
            let x = span * (b as f64 + 0.5) / nx as f64;
            let c = scheme.color_of_point(HPoint::new_unchecked(x, y));
            writeln!(
                out,
                "{},{},{},{},{}",
                crate::output::fmt_f64(x),
                crate::output::fmt_f64(y),
                c.horiz,
                c.vert,
                c.index(scheme.k_period)
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, LN_2};

    fn pt(x: f64, y: f64) -> HPoint {
        HPoint::new(x, y).unwrap()
    }

    fn d1_scheme() -> Scheme {
        Scheme::pure(1.0, 0.5, 1.0, 2, 2).unwrap()
    }

    #[test]
    fn rect_of_point_examples() {
        let s = d1_scheme();
        assert_eq!(s.rect_of_point(HPoint::I), RectIndex { i: 0, j: 0 });
        let s2 = Scheme::pure(1.0, LN_2, 1.0, 2, 2).unwrap();
        assert_eq!(s2.rect_of_point(pt(0.0, 2.0)).j, 1);
        let s3 = Scheme::pure(1.0, 1.0, 1.0, 2, 2).unwrap();
        let p = pt(s3.r() * 2.5 * E, E * 1.5);
        assert_eq!(s3.rect_of_point(p), RectIndex { i: 2, j: 1 });
        let neg = s3.rect_of_point(pt(-1e-9, 0.5));
        assert_eq!(neg, RectIndex { i: -1, j: -1 });
    }

    #[test]
    fn colors_repeat_with_the_periods() {
        let s = d1_scheme();
        let a = s.color_of_rect(RectIndex { i: 0, j: 0 });
        assert_eq!(a, s.color_of_rect(RectIndex { i: 3, j: 0 }));
        assert_eq!(a, s.color_of_rect(RectIndex { i: -3, j: 3 }));
        assert_ne!(a, s.color_of_rect(RectIndex { i: 1, j: 0 }));
        assert_eq!(s.palette_size(), 9);
        let inside = [pt(0.1, 1.1), pt(0.9 * s.r(), 1.6)];
        assert_eq!(s.color_of_point(inside[0]), s.color_of_point(inside[1]));
    }

    #[test]
    fn half_open_corners() {
        let s = d1_scheme();
        for idx in [
            RectIndex { i: 0, j: 0 },
            RectIndex { i: 5, j: -2 },
            RectIndex { i: -4, j: 3 },
        ] {
            let [bl, br, tl, tr] = s.corners(idx);
            assert_eq!(s.rect_of_point(bl), idx);
            assert_eq!(
                s.rect_of_point(br),
                RectIndex {
                    i: idx.i + 1,
                    j: idx.j
                }
            );
            assert_eq!(s.rect_of_point(tl).j, idx.j + 1);
            assert_eq!(s.rect_of_point(tr).j, idx.j + 1);
        }
    }

    #[test]
    fn diameter_branches() {
        assert_eq!(rect_diameter(1.0, 0.1), 1.0);
        let diag =
            (1.0 + (2.0 * (1f64.cosh() - 1.0) + (E * E - 1.0).powi(2)) / (2.0 * E * E)).acosh();
        assert!((rect_diameter(1.0, 2.0) - diag).abs() < 1e-13);
        assert!((diag - 2.03).abs() < 0.01);
        assert!((rect_diameter(0.7, 1e-9) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn diameter_is_monotone_on_a_grid() {
        let vals: Vec<f64> = (1..40).map(|i| i as f64 * 0.1).collect();
        for &w in &vals {
            for pair in vals.windows(2) {
                assert!(rect_diameter(w, pair[0]) <= rect_diameter(w, pair[1]));
                assert!(rect_diameter(pair[0], w) <= rect_diameter(pair[1], w));
            }
        }
    }

    #[test]
    fn corner_and_gap_distances() {
        assert!((upper_corner_distance(0.8, 0.0) - 0.8).abs() < 1e-15);
        let expected = (1.0 + (1f64.cosh() - 1.0) / (E * E)).acosh();
        assert!((upper_corner_distance(1.0, 1.0) - expected).abs() < 1e-14);
        assert!((expected - 0.381090).abs() < 1e-6);
        let mut last = f64::INFINITY;
        for i in 1..20 {
            let v = upper_corner_distance(1.3, i as f64 * 0.2);
            assert!(v < last && v < 1.3);
            last = v;
        }
        assert_eq!(same_stratum_separation(1.0, 1.0, 0), 0.0);
        let two = (1.0 + 4.0 * (1f64.cosh() - 1.0) / (E * E)).acosh();
        assert!((same_stratum_separation(1.0, 1.0, 2) - two).abs() < 1e-14);
        assert!((two - 0.749159).abs() < 1e-6);
        // The corner formula agrees with direct evaluation on actual corners.
        let s = Scheme::pure(3.0, 0.4, 1.1, 9, 8).unwrap();
        let a = s.corners(RectIndex { i: 0, j: 2 })[3];
        let b = s.corners(RectIndex { i: 3, j: 2 })[2];
        let direct = crate::hypgeom::hyp_distance(a, b);
        assert!((direct - same_stratum_separation(1.1, 0.4, 2)).abs() < 1e-12);
    }

    #[test]
    fn validation_examples() {
        assert!(d1_scheme().validate().is_valid());
        let broken = d1_scheme().with_periods(2, 1).unwrap();
        let rep = broken.validate();
        assert!(!rep.is_valid());
        assert_eq!(
            rep.failures().map(|c| c.name).collect::<Vec<_>>(),
            vec!["vertical"]
        );
        let big = Scheme::pure(10.0, 4f64.ln(), 10.0, 4, 8).unwrap();
        let rep = big.validate();
        assert!(rep.is_valid(), "{rep:?}");
        assert!((rep.checks[0].rhs - 4.0).abs() < 1e-12);
        // With a valid kPeriod, the same-stratum gap reaches dMax.
        let s = Scheme::pure(1.0, 0.5, 1.0, 2, 2).unwrap();
        assert!(same_stratum_separation(s.w(), s.h(), s.k_period() as u64) >= s.d_max());
    }

    #[test]
    fn structural_errors() {
        assert!(Scheme::pure(-1.0, 0.5, 1.0, 2, 2).is_err());
        assert!(Scheme::new(2.0, 1.0, 0.5, 1.0, 2, 2).is_err());
        assert!(Scheme::pure(1.0, 0.5, 1.0, 1, 2).is_err());
        assert!(Scheme::pure(1.0, 0.5, 1.0, 2, 0).is_err());
    }

    #[test]
    fn sampling_smoke() {
        let s = d1_scheme();
        let empty = verify_by_sampling(&s, 0, 1).unwrap();
        assert_eq!(empty.samples, 0);
        assert!(empty.violations.is_empty() && empty.is_clean());
        let clean = verify_by_sampling(&s, 50_000, 3).unwrap();
        assert!(clean.is_clean(), "{:?}", clean.violations.first());

        let broken = s.with_periods(2, 1).unwrap();
        assert!(verify_by_sampling(&broken, 10, 1).is_err());
        let rep = Sampler::new(broken)
            .allow_invalid(true)
            .run(50_000, 3)
            .unwrap();
        assert!(rep.violation_count > 0);
        let v = &rep.violations[0];
        assert!((crate::hypgeom::hyp_distance(v.p, v.q) - 1.0).abs() < 1e-9);
        assert_eq!(broken.color_of_point(v.p), broken.color_of_point(v.q));
    }

    #[test]
    fn sampling_is_deterministic_across_pools() {
        let s = d1_scheme().with_periods(2, 1).unwrap();
        let sampler = Sampler::new(s).allow_invalid(true);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| sampler.run(70_000, 11).unwrap());
        let b = four.install(|| sampler.run(70_000, 11).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn csv_export_shape() {
        let s = d1_scheme();
        let mut buf = Vec::new();
        write_color_map_csv(&s, 4, 3, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,y,horiz,vert,colorIndex");
        assert_eq!(lines.len(), 13);
        for line in &lines[1..] {
            let f: Vec<_> = line.split(',').collect();
            let h: u64 = f[2].parse().unwrap();
            let v: u64 = f[3].parse().unwrap();
            assert_eq!(f[4].parse::<u64>().unwrap(), h + 3 * v);
        }
    }
}
