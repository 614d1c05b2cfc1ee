//! Upper half-plane model of the hyperbolic plane.
//!
//! Points are `(x, y)` with `y > 0`. Distances use
//! `cosh d = 1 + ((x - x')^2 + (y - y')^2) / (2 y y')`, evaluated through
//! `sinh(d/2)` so that nearly coincident points keep full relative precision.
//! Orientation-preserving isometries are real 2x2 matrices of determinant 1
//! acting by Möbius transformations.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `arccosh(1 + u)` for `u >= 0`, accurate for small `u`.
pub fn acosh1p(u: f64) -> f64 {
    2.0 * (0.5 * u).sqrt().asinh()
}

/// `cosh(x) - 1`, accurate for small `x`.
pub fn cosh_m1(x: f64) -> f64 {
    let s = (0.5 * x).sinh();
    2.0 * s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct HPoint {
    x: f64,
    y: f64,
}

#[derive(Deserialize)]
struct RawPoint {
    x: f64,
    y: f64,
}

impl TryFrom<RawPoint> for HPoint {
    type Error = Error;

    fn try_from(raw: RawPoint) -> Result<Self> {
        HPoint::new(raw.x, raw.y)
    }
}

impl HPoint {
    /// The point `i = (0, 1)`.
    pub const I: HPoint = HPoint { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && y > 0.0 {
            Ok(HPoint { x, y })
        } else {
            Err(Error::NotInHalfPlane { x, y })
        }
    }

    pub(crate) fn new_unchecked(x: f64, y: f64) -> Self {
        debug_assert!(y > 0.0 && x.is_finite() && y.is_finite(), "({x}, {y})");
        HPoint { x, y }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Hyperbolic distance between two points of the half-plane.
///
/// Exactly symmetric in its arguments: both orders perform the same
/// floating-point operations on the same magnitudes.
pub fn hyp_distance(p: HPoint, q: HPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    // sinh(d/2)^2 = ((dx^2 + dy^2) / (2 y y')) / 2
    let s2 = (dx * dx + dy * dy) / (4.0 * (p.y * q.y));
    2.0 * s2.sqrt().asinh()
}

/// Point at hyperbolic distance `s` from `p`, on the Euclidean circle of
/// center `(x, y cosh s)` and radius `y sinh s`, at Euclidean angle `phi`
/// around that center.
///
/// `phi` is not the hyperbolic angle at `p`; use [`shoot`] when the
/// direction matters.
pub fn point_at_distance(p: HPoint, phi: f64, s: f64) -> Result<HPoint> {
    if !(s >= 0.0) || !s.is_finite() || !phi.is_finite() {
        return Err(crate::error::invalid(format!(
            "point_at_distance needs finite s >= 0 and finite phi, got s = {s}, phi = {phi}"
        )));
    }
    // With psi = phi + pi/2: cos(phi) = sin(psi) and 1 + sin(phi) = 2 sin^2(psi/2).
    // cosh s + sinh s sin(phi) = e^{-s} + sinh s (1 + sin phi) has no cancellation.
    let psi = phi + FRAC_PI_2;
    let half = (0.5 * psi).sin();
    let sh = s.sinh();
    let x = p.x + p.y * sh * psi.sin();
    let y = p.y * ((-s).exp() + sh * 2.0 * half * half);
    HPoint::new(x, y)
}

/// Endpoint of the geodesic of length `s` leaving `p` at hyperbolic angle
/// `angle`, measured counterclockwise from the positive x direction.
pub fn shoot(p: HPoint, angle: f64, s: f64) -> HPoint {
    let above = HPoint::new_unchecked(p.x, p.y * s.exp());
    Isometry::rotation_about(p, angle - FRAC_PI_2).apply(above)
}

/// Orientation-preserving isometry `z -> (a z + b) / (c z + d)` with
/// `a d - b c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds the isometry from any real matrix of positive determinant,
    /// rescaling it to determinant one.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 1e-300) || !det.is_finite() {
            return Err(Error::DegenerateIsometry(det));
        }
        let s = det.sqrt().recip();
        Ok(Isometry {
            a: a * s,
            b: b * s,
            c: c * s,
            d: d * s,
        })
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `z -> z + t`.
    pub fn translation(t: f64) -> Self {
        Isometry {
            a: 1.0,
            b: t,
            c: 0.0,
            d: 1.0,
        }
    }

    /// `z -> lambda z`, `lambda > 0`.
    pub fn dilation(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(crate::error::invalid(format!("dilation factor {lambda}")));
        }
        let s = lambda.sqrt();
        Ok(Isometry {
            a: s,
            b: 0.0,
            c: 0.0,
            d: 1.0 / s,
        })
    }

    /// Counterclockwise rotation by `angle` about `center`.
    pub fn rotation_about(center: HPoint, angle: f64) -> Self {
        let (sn, cs) = (0.5 * angle).sin_cos();
        // Rotation about i, conjugated by z -> y z + x which sends i to center.
        let rot = Isometry {
            a: cs,
            b: sn,
            c: -sn,
            d: cs,
        };
        let to = Isometry::affine(center);
        to.compose(&rot).compose(&to.inverse())
    }

    /// `z -> y z + x`, sending `i` to `p`.
    pub fn affine(p: HPoint) -> Self {
        let s = p.y.sqrt();
        Isometry {
            a: s,
            b: p.x / s,
            c: 0.0,
            d: 1.0 / s,
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let m = Isometry {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        };
        m.renormalized()
    }

    pub fn inverse(&self) -> Isometry {
        Isometry {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    fn renormalized(self) -> Isometry {
        let det = self.det();
        if (det - 1.0).abs() <= 1e-15 {
            return self;
        }
        let s = det.sqrt().recip();
        Isometry {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            d: self.d * s,
        }
    }

    pub fn apply(&self, p: HPoint) -> HPoint {
        let re = self.c * p.x + self.d;
        let im = self.c * p.y;
        let denom = re * re + im * im;
        let num_re = (self.a * p.x + self.b) * re + self.a * self.c * p.y * p.y;
        HPoint::new_unchecked(num_re / denom, self.det() * p.y / denom)
    }
}

/// Applies `m` to `p`.
pub fn apply_isometry(m: &Isometry, p: HPoint) -> HPoint {
    m.apply(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn pt(x: f64, y: f64) -> HPoint {
        HPoint::new(x, y).unwrap()
    }

    /// Length of the geodesic arc between two points at equal height,
    /// integrated numerically along the Euclidean semicircle with
    /// composite Simpson's rule.
    fn semicircle_length(x1: f64, x2: f64, y: f64) -> f64 {
        let cx = 0.5 * (x1 + x2);
        let rho = ((x1 - cx).powi(2) + y * y).sqrt();
        let t1 = (y / rho).asin();
        let t2 = PI - t1;
        let n = 20_000;
        let h = (t2 - t1) / n as f64;
        let f = |t: f64| 1.0 / t.sin();
        let mut acc = f(t1) + f(t2);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(t1 + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn distance_examples() {
        assert!((hyp_distance(pt(0.0, 1.0), pt(0.0, E)) - 1.0).abs() < 1e-15);
        let p = pt(0.3, 0.7);
        assert_eq!(hyp_distance(p, p), 0.0);
        let d = hyp_distance(pt(0.0, 1.0), pt(1.0, 1.0));
        assert!((d - 1.5f64.acosh()).abs() < 1e-15);
        assert!((d - 0.962_424).abs() < 1e-6);
        assert!((d - semicircle_length(0.0, 1.0, 1.0)).abs() < 1e-9);
    }

    #[test]
    fn rejects_points_off_the_half_plane() {
        assert!(HPoint::new(0.0, 0.0).is_err());
        assert!(HPoint::new(1.0, -2.0).is_err());
        assert!(HPoint::new(f64::NAN, 1.0).is_err());
        assert!(HPoint::new(0.0, f64::INFINITY).is_err());
        assert!(serde_json::from_str::<HPoint>(r#"{"x":0.0,"y":-1.0}"#).is_err());
    }

    #[test]
    fn tiny_distances_keep_precision() {
        let p = pt(0.0, 1.0);
        let q = pt(1e-12, 1.0);
        assert!((hyp_distance(p, q) - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn point_at_distance_examples() {
        let o = HPoint::I;
        for s in [0.0, 0.5, 1.0, 7.0] {
            let up = point_at_distance(o, FRAC_PI_2, s).unwrap();
            assert!(up.x().abs() <= 1e-15 * up.y());
            assert!((up.y() - s.exp()).abs() <= 1e-14 * s.exp());
            let down = point_at_distance(o, -FRAC_PI_2, s).unwrap();
            assert!(down.x().abs() < 1e-15);
            assert!((down.y() - (-s).exp()).abs() <= 1e-14 * (-s).exp());
        }
        let q = point_at_distance(o, 0.0, 1.0).unwrap();
        assert!((q.x() - 1.175_201).abs() < 1e-6);
        assert!((q.y() - 1.543_081).abs() < 1e-6);
        assert!((hyp_distance(o, q) - 1.0).abs() < 1e-14);
        assert!(point_at_distance(o, 0.0, -1.0).is_err());
    }

    #[test]
    fn far_points_straight_down_keep_their_distance() {
        let p = pt(3.0, 2.0);
        for s in [5.0, 12.0, 20.0] {
            for phi in [-FRAC_PI_2, 1.5 * PI, 1.5 * PI + 1e-9, 1.5 * PI - 3e-10] {
                let q = point_at_distance(p, phi, s).unwrap();
                assert!(
                    (hyp_distance(p, q) - s).abs() <= 1e-9 * (1.0 + s),
                    "s={s} phi={phi}"
                );
            }
        }
    }

    #[test]
    fn isometry_examples() {
        let p = pt(0.25, 3.0);
        assert_eq!(Isometry::IDENTITY.apply(p), p);
        let t = Isometry::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(t.apply(HPoint::I), pt(1.0, 1.0));
        let s2 = 2f64.sqrt();
        let dil = Isometry::new(s2, 0.0, 0.0, 1.0 / s2).unwrap();
        let q = dil.apply(HPoint::I);
        assert!(q.x().abs() < 1e-15 && (q.y() - 2.0).abs() < 1e-15);
        assert!((hyp_distance(HPoint::I, q) - 2f64.ln()).abs() < 1e-15);
        assert!(Isometry::new(1.0, 2.0, 2.0, 4.0).is_err());
        assert!(Isometry::new(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rotation_fixes_center_and_turns_directions() {
        let c = pt(-1.0, 0.5);
        let rot = Isometry::rotation_about(c, 1.234);
        let fixed = rot.apply(c);
        assert!(hyp_distance(fixed, c) < 1e-14);
        // A quarter turn about i sends the upward geodesic to the leftward one.
        let quarter = Isometry::rotation_about(HPoint::I, FRAC_PI_2);
        let up = pt(0.0, E);
        let left = quarter.apply(up);
        assert!(left.x() < 0.0);
        assert!((left.x() - shoot(HPoint::I, PI, 1.0).x()).abs() < 1e-14);
        for k in 0..8 {
            let a = k as f64 * PI / 4.0;
            let q = shoot(c, a, 0.8);
            assert!((hyp_distance(c, q) - 0.8).abs() < 1e-13);
        }
        let full = Isometry::rotation_about(c, 2.0 * PI).apply(up);
        assert!(hyp_distance(full, up) < 1e-12);
    }

    #[test]
    fn shoot_angles_between_geodesics() {
        // Isoceles triangle with apex angle theta and legs r has base
        // sinh(base/2) = sinh(r) sin(theta/2).
        let c = pt(0.7, 1.9);
        let (r, theta) = (1.3, 0.9);
        let a = shoot(c, 0.2, r);
        let b = shoot(c, 0.2 + theta, r);
        let base = hyp_distance(a, b);
        let expected = 2.0 * (r.sinh() * (0.5 * theta).sin()).asinh();
        assert!((base - expected).abs() < 1e-12);
    }

    #[test]
    fn composition_keeps_unit_determinant() {
        let mut m = Isometry::IDENTITY;
        let step = Isometry::rotation_about(pt(0.3, 0.9), 2.0 * PI / 7.0)
            .compose(&Isometry::translation(0.37));
        for _ in 0..500 {
            m = m.compose(&step);
            assert!((m.det() - 1.0).abs() <= 1e-12);
        }
        let inv = m.compose(&m.inverse());
        let p = pt(0.1, 0.2);
        assert!(hyp_distance(inv.apply(p), p) < 1e-8);
    }
}
