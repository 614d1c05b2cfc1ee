//! Upper bounds on the distance-`d` and interval chromatic numbers of the
//! hyperbolic plane, plus the interval clique construction.
//!
//! A checkerboard with stratum height `h`, base `w`, horizontal period
//! `k + 1` and `m + 1` strata per palette uses `(k + 1)(m + 1)` colors. For a
//! fixed `h` the widest admissible base is
//! `w(h) = min{d, arccosh((1 + 2 e^h cosh d - e^{2h}) / 2)}`
//! and the smallest admissible period is
//! `k(h) = ceil(e^h sqrt((cosh d - 1) / (cosh w(h) - 1)))`.

use std::f64::consts::{LN_2, PI, TAU};

use serde::Serialize;

use crate::checkerboard::{rect_diameter, Scheme, VALIDATION_RTOL};
use crate::error::{invalid, Error, Result};
use crate::hypgeom::{acosh1p, cosh_m1, hyp_distance, HPoint, Isometry};

/// Lower bound valid for every `d`, from a metric Moser spindle.
pub const UNIVERSAL_LOWER_BOUND: u64 = 4;

/// Closed window on which the heptagonal tiling gives 8 colors.
pub const FUNDDOM_WINDOW: (f64, f64) = (1.22, 1.77);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundSource {
    #[serde(rename = "SMALL_D_9")]
    SmallD9,
    #[serde(rename = "FUNDDOM_8")]
    FundDom8,
    #[serde(rename = "TABLE_12")]
    Table12,
    #[serde(rename = "TABLE_15")]
    Table15,
    #[serde(rename = "TABLE_16")]
    Table16,
    #[serde(rename = "TABLE_18")]
    Table18,
    #[serde(rename = "LARGE_D_K4")]
    LargeDK4,
    #[serde(rename = "LARGE_D_K3")]
    LargeDK3,
    Optimized,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeParams {
    pub h: f64,
    pub w: f64,
    pub k: u32,
    pub m: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: u64,
    pub source: BoundSource,
    pub params: Option<SchemeParams>,
}

impl BoundResult {
    fn new(value: u64, source: BoundSource, params: Option<SchemeParams>) -> Self {
        debug_assert!(value >= UNIVERSAL_LOWER_BOUND);
        BoundResult {
            value,
            source,
            params,
        }
    }
}

/// `ceil(x)`, except that values within relative `VALIDATION_RTOL` above
/// an integer round down to it.
fn ceil_tol(x: f64) -> f64 {
    let n = x.round();
    if x > n && x - n <= VALIDATION_RTOL * n.abs().max(1.0) {
        n
    } else {
        x.ceil()
    }
}

/// Smallest `m >= 1` with `m h >= d` (up to the validation tolerance).
pub fn strata_count(d: f64, h: f64) -> u32 {
    let mut m = ceil_tol(d / h).max(1.0) as u32;
    while m > 1 && (m - 1) as f64 * h >= d * (1.0 - VALIDATION_RTOL) {
        m -= 1;
    }
    while (m as f64) * h < d * (1.0 - VALIDATION_RTOL) {
        m += 1;
    }
    m
}

fn check_d(d: f64) -> Result<()> {
    if d.is_finite() && d > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "distance must be positive and finite, got {d}"
        )))
    }
}

/// Widest rectangle base for stratum height `h` keeping the diameter `<= d`.
pub fn w_of_h(d: f64, h: f64) -> Result<f64> {
    check_d(d)?;
    if !(h > 0.0 && h < d) {
        return Err(invalid(format!("need 0 < h < d, got h = {h}, d = {d}")));
    }
    // (1 + 2 e^h cosh d - e^{2h}) / 2 - 1 = e^h (cosh d - 1) - (e^h - 1)^2 / 2
    let em1 = h.exp_m1();
    let arg_m1 = h.exp() * cosh_m1(d) - 0.5 * em1 * em1;
    if !(arg_m1 > 0.0) {
        return Err(invalid(format!(
            "h = {h} is too large for d = {d}: no admissible base"
        )));
    }
    Ok(d.min(acosh1p(arg_m1)))
}

/// Smallest admissible horizontal period for stratum height `h`.
pub fn k_of_h(d: f64, h: f64) -> Result<u32> {
    let w = w_of_h(d, h)?;
    Ok(period_for(d, h, w))
}

fn period_for(d_max: f64, h: f64, w: f64) -> u32 {
    let need = h.exp() * (cosh_m1(d_max) / cosh_m1(w)).sqrt();
    (ceil_tol(need) as u32).max(2)
}

fn params_for_height(d: f64, h: f64) -> Result<SchemeParams> {
    let w = w_of_h(d, h)?;
    Ok(SchemeParams {
        h,
        w,
        k: period_for(d, h, w),
        m: strata_count(d, h),
    })
}

fn colors(p: &SchemeParams) -> u64 {
    (p.k as u64 + 1) * (p.m as u64 + 1)
}

/// Stratum height `d / m`, nudged up until `m` strata cover `d`.
fn height_for_strata(d: f64, m: u32) -> f64 {
    let mut h = d / m as f64;
    while (m as f64) * h < d {
        h = f64::from_bits(h.to_bits() + 1);
    }
    h
}

impl SchemeParams {
    pub fn scheme(&self, d_min: f64, d_max: f64) -> Result<Scheme> {
        Scheme::new(d_min, d_max, self.h, self.w, self.k, self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimized {
    pub bound: BoundResult,
    pub scheme: Scheme,
}

/// Minimizes `(k(h) + 1)(ceil(d/h) + 1)` over `h` in `(d/50, d)`.
///
/// Candidates are a log-uniform grid of `grid_steps` heights, a
/// golden-section refinement of the continuous relaxation around the best
/// grid point, and the heights `d/m` where the stratum count drops. The
/// objective is piecewise constant and, for a fixed stratum count, smallest
/// at the left end `h = d/m` of its piece, which a grid almost never hits.
/// Ties go to the larger `h`.
pub fn optimize_checkerboard(d: f64, grid_steps: usize) -> Result<Optimized> {
    check_d(d)?;
    if grid_steps < 10 {
        return Err(invalid(format!(
            "gridSteps must be >= 10, got {grid_steps}"
        )));
    }
    let lo = (d / 50.0).ln();
    let span = 50f64.ln();
    let grid: Vec<f64> = (0..grid_steps)
        .map(|i| (lo + span * (i + 1) as f64 / (grid_steps + 1) as f64).exp())
        .collect();

    let relaxed = |h: f64| -> f64 {
        match w_of_h(d, h) {
            Ok(w) => (h.exp() * (cosh_m1(d) / cosh_m1(w)).sqrt() + 1.0) * (d / h + 1.0),
            Err(_) => f64::INFINITY,
        }
    };
    let mut candidates = grid.clone();
    if let Some(best) =
        (0..grid.len()).min_by(|&a, &b| relaxed(grid[a]).total_cmp(&relaxed(grid[b])))
    {
        let a = grid[best.saturating_sub(1)];
        let b = grid[(best + 1).min(grid.len() - 1)];
        candidates.push(golden_section(relaxed, a, b, 80));
    }
    for m in 2..50u32 {
        candidates.push(height_for_strata(d, m));
    }

    let mut best: Option<SchemeParams> = None;
    for h in candidates {
        if !(h > d / 50.0 && h < d) {
            continue;
        }
        let Ok(p) = params_for_height(d, h) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some(b) => colors(&p) < colors(b) || (colors(&p) == colors(b) && p.h > b.h),
        };
        if better {
            best = Some(p);
        }
    }
    let params =
        best.ok_or_else(|| invalid(format!("no admissible stratum height for d = {d}")))?;
    let scheme = params.scheme(d, d)?;
    Ok(Optimized {
        bound: BoundResult::new(colors(&params), BoundSource::Optimized, Some(params)),
        scheme,
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    for _ in 0..iters {
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = f(e);
        }
    }
    0.5 * (a + b)
}

/// Closed-form bound for `d <= m ln k`: `(k+1)(m+1)` colors with `h = d/m`.
struct TableEntry {
    source: BoundSource,
    k: u32,
    m: u32,
    endpoint: f64,
}

fn table() -> [TableEntry; 5] {
    let ln3 = 3f64.ln();
    [
        TableEntry {
            source: BoundSource::SmallD9,
            k: 2,
            m: 2,
            endpoint: 2.0 * LN_2,
        },
        TableEntry {
            source: BoundSource::Table12,
            k: 3,
            m: 2,
            endpoint: 2.0 * ln3,
        },
        TableEntry {
            source: BoundSource::Table15,
            k: 4,
            m: 2,
            endpoint: 4.0 * LN_2,
        },
        TableEntry {
            source: BoundSource::Table16,
            k: 3,
            m: 3,
            endpoint: 3.0 * ln3,
        },
        TableEntry {
            source: BoundSource::Table18,
            k: 2,
            m: 5,
            endpoint: 5.0 * LN_2,
        },
    ]
}

/// Right endpoints of the closed-form table windows `(0, endpoint]`.
pub fn table_endpoints() -> Vec<(BoundSource, u64, f64)> {
    table()
        .iter()
        .map(|t| (t.source, (t.k as u64 + 1) * (t.m as u64 + 1), t.endpoint))
        .collect()
}

/// Every closed-form bound that applies at `d`, in priority order.
pub fn closed_form_bounds(d: f64) -> Result<Vec<BoundResult>> {
    check_d(d)?;
    let mut out = Vec::new();
    for t in table() {
        if d <= t.endpoint {
            let h = height_for_strata(d, t.m);
            let params = w_of_h(d, h).ok().map(|w| SchemeParams {
                h,
                w,
                k: t.k,
                m: t.m,
            });
            out.push(BoundResult::new(
                (t.k as u64 + 1) * (t.m as u64 + 1),
                t.source,
                params,
            ));
        }
    }
    if (FUNDDOM_WINDOW.0..=FUNDDOM_WINDOW.1).contains(&d) {
        out.push(BoundResult::new(8, BoundSource::FundDom8, None));
    }
    if d >= 2.0 {
        for (k, source) in [(4u32, BoundSource::LargeDK4), (3u32, BoundSource::LargeDK3)] {
            let h = (k as f64).ln();
            let m = strata_count(d, h);
            let params = SchemeParams { h, w: d, k, m };
            out.push(BoundResult::new(colors(&params), source, Some(params)));
        }
    }
    out.sort_by_key(|b| b.source);
    Ok(out)
}

/// Best closed-form bound at `d`; ties resolve to the earlier source in
/// [`BoundSource`] order.
pub fn closed_form_bound(d: f64) -> Result<BoundResult> {
    closed_form_bounds(d)?
        .into_iter()
        .min_by_key(|b| (b.value, b.source))
        .ok_or_else(|| invalid(format!("no closed form applies at d = {d}")))
}

/// Large-`d` formula `(k+1)(ceil(d / ln k) + 1)` with `w = d`, `h = ln k`.
pub fn large_d_formula(d: f64, k: u32) -> u64 {
    (k as u64 + 1) * ((d / (k as f64).ln()).ceil() as u64 + 1)
}

/// Residual of the equation defining `d0`: the height `h = d/2` at which the
/// diagonal admissibility bound `arccosh((1 + 2 e^h cosh d - e^{2h}) / 2)`
/// equals `d`.
pub fn d0_residual(d: f64) -> f64 {
    (1.0 + 2.0 * (0.5 * d).exp() * d.cosh() - d.exp()) / 2.0 - d.cosh()
}

/// `2 ln(((108 + 12 sqrt 69)^{1/3} + 12 / (108 + 12 sqrt 69)^{1/3}) / 6)`.
pub fn d0_closed_form() -> f64 {
    let c = (108.0 + 12.0 * 69f64.sqrt()).cbrt();
    2.0 * ((c + 12.0 / c) / 6.0).ln()
}

/// Positive root of [`d0_residual`] by bisection on `[0.1, 1]`.
pub fn solve_d0() -> Result<f64> {
    let (mut lo, mut hi) = (0.1, 1.0);
    let (flo, fhi) = (d0_residual(lo), d0_residual(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if d0_residual(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all_fields = "camelCase", tag = "status")]
pub enum IntervalBound {
    #[serde(rename = "APPLICABLE")]
    Applicable {
        bound: BoundResult,
        envelope: f64,
        within_envelope: bool,
        scheme: Scheme,
    },
    #[serde(rename = "INAPPLICABLE")]
    Inapplicable { reason: String },
}

/// `2 (2 e^{(cd - 1)/2} + 1)(cd + 1)`.
pub fn interval_envelope(d: f64, c: f64) -> f64 {
    let cd = c * d;
    2.0 * (2.0 * ((cd - 1.0) / 2.0).exp() + 1.0) * (cd + 1.0)
}

/// Checkerboard bound for the forbidden interval `[d, cd]` with `w = d`,
/// `h = ln 4`, and colors reused every `floor(cd) + 1` strata.
pub fn interval_upper_bound(d: f64, c: f64) -> Result<IntervalBound> {
    check_d(d)?;
    if !(c > 1.0) || !c.is_finite() {
        return Err(invalid(format!("interval factor c must exceed 1, got {c}")));
    }
    let h = 4f64.ln();
    let cd = c * d;
    let diam = rect_diameter(d, h);
    if diam > d * (1.0 + VALIDATION_RTOL) {
        return Ok(IntervalBound::Inapplicable {
            reason: format!("rectangle diameter {diam} exceeds d = {d} for w = d, h = ln 4"),
        });
    }
    let m = cd.floor() as u32;
    if m == 0 || (m as f64) * h < cd * (1.0 - VALIDATION_RTOL) {
        return Ok(IntervalBound::Inapplicable {
            reason: format!("floor(cd) = {m} strata of height ln 4 do not span cd = {cd}"),
        });
    }
    let k = period_for(cd, h, d);
    let params = SchemeParams { h, w: d, k, m };
    let scheme = params.scheme(d, cd)?;
    let envelope = interval_envelope(d, c);
    let value = colors(&params);
    Ok(IntervalBound::Applicable {
        bound: BoundResult::new(value, BoundSource::Interval, Some(params)),
        envelope,
        within_envelope: (value as f64) <= envelope,
        scheme,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CliqueWitness {
    pub points: Vec<HPoint>,
    pub d_min: f64,
    pub d_max: f64,
    pub theta: f64,
    pub n: usize,
    pub pairwise_ok: bool,
    pub min_pair: f64,
    pub max_pair: f64,
}

/// Points on a hyperbolic circle of radius `cd/2`, successive ones at
/// central angle `theta = 2 arcsin(sinh(d/2) / sinh(cd/2))`, hence at
/// distance exactly `d`; every pair lies in `[d, cd]`.
pub fn interval_clique_points(d: f64, c: f64) -> Result<CliqueWitness> {
    check_d(d)?;
    if !(c > 1.0) || !c.is_finite() {
        return Err(invalid(format!("interval factor c must exceed 1, got {c}")));
    }
    let radius = 0.5 * c * d;
    let ratio = (0.5 * d).sinh() / radius.sinh();
    let theta = 2.0 * ratio.asin();
    if !(theta > 0.0) {
        return Err(invalid(format!(
            "central angle underflows for d = {d}, c = {c}"
        )));
    }
    let n = (TAU / theta).floor() as usize;
    let center = HPoint::I;
    let start = HPoint::new_unchecked(0.0, radius.exp());
    let points: Vec<HPoint> = (0..n)
        .map(|k| Isometry::rotation_about(center, k as f64 * theta).apply(start))
        .collect();

    let tol = 1e-9;
    let mut ok = true;
    let (mut min_pair, mut max_pair) = (f64::INFINITY, 0f64);
    for a in 0..n {
        let mut last = 0.0;
        for b in a + 1..n {
            let dist = hyp_distance(points[a], points[b]);
            min_pair = min_pair.min(dist);
            max_pair = max_pair.max(dist);
            ok &= dist >= d - tol && dist <= c * d + tol;
            // Chord length grows with the central angle up to pi.
            let sep = (b - a) as f64 * theta;
            if sep <= PI {
                ok &= dist >= last - tol;
                last = dist;
            }
        }
    }
    Ok(CliqueWitness {
        points,
        d_min: d,
        d_max: c * d,
        theta,
        n,
        pairwise_ok: ok,
        min_pair,
        max_pair,
    })
}
