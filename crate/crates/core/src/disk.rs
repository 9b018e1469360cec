//! Poincaré disk geometry: points, disk automorphisms, hyperbolic distance,
//! length, area and geodesics.
//!
//! The metric is normalized to curvature −1, with line element
//! `2|dz| / (1 − |z|²)` and area element `4 dm(z) / (1 − |z|²)²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::numerics::{adaptive_simpson, pairwise_sum};

/// Points closer than this to the unit circle are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Tolerance on `|a|² − |c|² = 1` for automorphism coefficients.
pub const DET_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance of the per-segment adaptive Simpson rule in [`hyp_length`].
pub const SEGMENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point ({re}, {im}) is not strictly inside the unit disk")]
    OutsideDisk { re: f64, im: f64 },
    #[error("automorphism coefficients have |a|² − |c|² = {0} ≤ 0")]
    Degenerate(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// A point of the open unit disk, kept at least [`BOUNDARY_MARGIN`] from the boundary.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint(Complex64::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Result<Self, GeometryError> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Result<Self, GeometryError> {
        if z.re.is_finite() && z.im.is_finite() && z.norm() < 1.0 - BOUNDARY_MARGIN {
            Ok(DiskPoint(z))
        } else {
            Err(GeometryError::OutsideDisk { re: z.re, im: z.im })
        }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Result<Self, GeometryError> {
        Self::from_complex(Complex64::from_polar(radius, angle))
    }

    pub fn z(self) -> Complex64 {
        self.0
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    pub fn abs(self) -> f64 {
        self.0.norm()
    }

    /// Conformal factor `2 / (1 − |z|²)` of the hyperbolic line element.
    pub fn conformal_factor(self) -> f64 {
        conformal_factor(self.0)
    }
}

impl fmt::Debug for DiskPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiskPoint({}, {})", self.0.re, self.0.im)
    }
}

impl TryFrom<(f64, f64)> for DiskPoint {
    type Error = GeometryError;
    fn try_from((re, im): (f64, f64)) -> Result<Self, Self::Error> {
        DiskPoint::new(re, im)
    }
}

impl From<DiskPoint> for (f64, f64) {
    fn from(p: DiskPoint) -> Self {
        (p.0.re, p.0.im)
    }
}

pub fn conformal_factor(z: Complex64) -> f64 {
    2.0 / (1.0 - z.norm_sqr())
}

/// Hyperbolic distance `log((1 + t) / (1 − t))`, `t = |z1 − z2| / |1 − z1 z̄2|`.
pub fn hyp_distance(z1: DiskPoint, z2: DiskPoint) -> f64 {
    hyp_distance_raw(z1.0, z2.0)
}

pub(crate) fn hyp_distance_raw(z1: Complex64, z2: Complex64) -> f64 {
    let num = (z1 - z2).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = (Complex64::new(1.0, 0.0) - z1 * z2.conj()).norm();
    let t = num / den;
    // 1 − t² in product form avoids cancellation close to the boundary.
    let one_minus_t2 = (1.0 - z1.norm_sqr()) * (1.0 - z2.norm_sqr()) / (den * den);
    2.0 * t.ln_1p() - one_minus_t2.ln()
}

/// Euclidean radius of a hyperbolic ball about the origin: `(e^r − 1)/(e^r + 1)`.
pub fn euclid_radius(r: f64) -> f64 {
    assert!(r >= 0.0, "hyperbolic radius must be non-negative");
    (0.5 * r).tanh()
}

/// Inverse of [`euclid_radius`].
pub fn hyp_radius(big_r: f64) -> f64 {
    assert!((0.0..1.0).contains(&big_r), "Euclidean radius must lie in [0, 1)");
    2.0 * big_r.atanh()
}

/// A disk automorphism `z ↦ (a z + c) / (c̄ z + ā)` with `|a|² − |c|² = 1`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusAutomorphism {
    a: Complex64,
    c: Complex64,
}

impl fmt::Debug for MobiusAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Mobius(a = {}{:+}i, c = {}{:+}i)",
            self.a.re, self.a.im, self.c.re, self.c.im
        )
    }
}

impl MobiusAutomorphism {
    pub const IDENTITY: MobiusAutomorphism = MobiusAutomorphism {
        a: Complex64::new(1.0, 0.0),
        c: Complex64::new(0.0, 0.0),
    };

    /// Builds an automorphism from unnormalized coefficients, rescaling so the
    /// determinant is exactly one.
    pub fn new(a: Complex64, c: Complex64) -> Result<Self, GeometryError> {
        let det = a.norm_sqr() - c.norm_sqr();
        if !(det > 0.0) || !det.is_finite() {
            return Err(GeometryError::Degenerate(det));
        }
        let s = det.sqrt();
        Ok(MobiusAutomorphism { a: a / s, c: c / s })
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn determinant(&self) -> f64 {
        self.a.norm_sqr() - self.c.norm_sqr()
    }

    /// Rotation `z ↦ e^{iθ} z`.
    pub fn rotation(theta: f64) -> Self {
        MobiusAutomorphism {
            a: Complex64::from_polar(1.0, 0.5 * theta),
            c: Complex64::new(0.0, 0.0),
        }
    }

    /// Hyperbolic translation of length `length` along the diameter through `e^{iθ}`.
    pub fn translation(length: f64, theta: f64) -> Self {
        let h = 0.5 * length;
        MobiusAutomorphism {
            a: Complex64::new(h.cosh(), 0.0),
            c: Complex64::from_polar(h.sinh(), theta),
        }
    }

    /// The automorphism `z ↦ (z − z0) / (1 − z z̄0)`, which sends `z0` to the origin.
    pub fn to_zero(z0: DiskPoint) -> Self {
        let s = (1.0 - z0.0.norm_sqr()).sqrt();
        MobiusAutomorphism {
            a: Complex64::new(1.0 / s, 0.0),
            c: -z0.0 / s,
        }
    }

    pub fn apply(&self, z: DiskPoint) -> DiskPoint {
        let w = self.apply_raw(z.0);
        // The image of an interior point is interior; only round-off can push it out.
        DiskPoint::from_complex(w).unwrap_or_else(|_| {
            let r = 1.0 - 2.0 * BOUNDARY_MARGIN;
            DiskPoint(w / w.norm() * r)
        })
    }

    pub fn apply_raw(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.c) / (self.c.conj() * z + self.a.conj())
    }

    /// Complex derivative `g'(z) = 1 / (c̄ z + ā)²`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = self.c.conj() * z + self.a.conj();
        Complex64::new(1.0, 0.0) / (d * d)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusAutomorphism) -> MobiusAutomorphism {
        let a = self.a * other.a + self.c * other.c.conj();
        let c = self.a * other.c + self.c * other.a.conj();
        MobiusAutomorphism::new(a, c).expect("composition of automorphisms is an automorphism")
    }

    pub fn invert(&self) -> MobiusAutomorphism {
        MobiusAutomorphism {
            a: self.a.conj(),
            c: -self.c,
        }
    }

    /// Coefficient distance, taking the sign ambiguity `(a, c) ~ (−a, −c)` into account.
    pub fn coefficient_distance(&self, other: &MobiusAutomorphism) -> f64 {
        let plus = (self.a - other.a).norm().max((self.c - other.c).norm());
        let minus = (self.a + other.a).norm().max((self.c + other.c).norm());
        plus.min(minus)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.coefficient_distance(&Self::IDENTITY) < tol
    }

    /// Representative with `Re(a) ≥ 0` (and `Im(a) ≥ 0` when `Re(a) = 0`).
    pub fn canonical_sign(&self) -> MobiusAutomorphism {
        if self.a.re < 0.0 || (self.a.re == 0.0 && self.a.im < 0.0) {
            MobiusAutomorphism {
                a: -self.a,
                c: -self.c,
            }
        } else {
            *self
        }
    }

    /// Half the trace of the SU(1,1) matrix, `Re(a)` up to sign.
    pub fn half_trace(&self) -> f64 {
        self.a.re.abs()
    }

    /// Translation length `2 acosh(|Re a|)` of a hyperbolic element (0 otherwise).
    pub fn translation_length(&self) -> f64 {
        let t = self.half_trace();
        if t <= 1.0 {
            0.0
        } else {
            2.0 * t.acosh()
        }
    }
}

pub fn mobius_apply(g: &MobiusAutomorphism, z: DiskPoint) -> DiskPoint {
    g.apply(z)
}

pub fn mobius_compose(g1: &MobiusAutomorphism, g2: &MobiusAutomorphism) -> MobiusAutomorphism {
    g1.compose(g2)
}

pub fn mobius_invert(g: &MobiusAutomorphism) -> MobiusAutomorphism {
    g.invert()
}

pub fn mobius_to_zero(z0: DiskPoint) -> MobiusAutomorphism {
    MobiusAutomorphism::to_zero(z0)
}

/// Piecewise-linear curve in the disk. Consecutive duplicate vertices are
/// collapsed on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    vertices: Vec<DiskPoint>,
    closed: bool,
}

impl Polyline {
    pub fn new(vertices: Vec<DiskPoint>, closed: bool) -> Result<Self, GeometryError> {
        if vertices.is_empty() {
            return Err(GeometryError::InvalidArgument(
                "a polyline needs at least one vertex".into(),
            ));
        }
        let mut out: Vec<DiskPoint> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        if closed {
            while out.len() > 1 && out.first() == out.last() {
                out.pop();
            }
        }
        let closed = closed && out.len() > 1;
        Ok(Polyline {
            vertices: out,
            closed,
        })
    }

    pub fn open(vertices: Vec<DiskPoint>) -> Result<Self, GeometryError> {
        Self::new(vertices, false)
    }

    pub fn vertices(&self) -> &[DiskPoint] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Segments as `(start, end)` pairs, including the closing segment.
    pub fn segments(&self) -> impl Iterator<Item = (DiskPoint, DiskPoint)> + '_ {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Applies `g` to every vertex.
    pub fn map(&self, g: &MobiusAutomorphism) -> Polyline {
        let vertices = self.vertices.iter().map(|&v| g.apply(v)).collect();
        Polyline::new(vertices, self.closed).expect("non-empty")
    }

    /// Applies `g` after subdividing every segment into `pieces` parts, so the
    /// result tracks the curved image of each segment.
    pub fn map_refined(&self, g: &MobiusAutomorphism, pieces: usize) -> Polyline {
        let pieces = pieces.max(1);
        let mut vertices = Vec::new();
        for (p, q) in self.segments() {
            for k in 0..pieces {
                let t = k as f64 / pieces as f64;
                let z = p.0 + (q.0 - p.0) * t;
                vertices.push(DiskPoint(g.apply_raw(z)));
            }
        }
        if !self.closed {
            vertices.push(g.apply(*self.vertices.last().unwrap()));
        }
        Polyline::new(vertices, self.closed).expect("non-empty")
    }

    /// Euclidean length.
    pub fn euclidean_length(&self) -> f64 {
        self.segments().map(|(p, q)| (q.0 - p.0).norm()).sum()
    }
}

/// Hyperbolic length `∫ 2|dz| / (1 − |z|²)`, by adaptive Simpson along each segment.
pub fn hyp_length(curve: &Polyline) -> f64 {
    // Sorted summation makes the result independent of traversal direction.
    let mut pieces: Vec<f64> = curve.segments().map(|(p, q)| segment_hyp_length(p.0, q.0)).collect();
    pieces.sort_by(|a, b| a.total_cmp(b));
    pairwise_sum(&pieces)
}

pub(crate) fn segment_hyp_length(p: Complex64, q: Complex64) -> f64 {
    let (p, q) = if (p.re, p.im) <= (q.re, q.im) { (p, q) } else { (q, p) };
    let d = q - p;
    let len = d.norm();
    if len == 0.0 {
        return 0.0;
    }
    let f = |t: f64| conformal_factor(p + d * t);
    len * adaptive_simpson(&f, 0.0, 1.0, SEGMENT_TOLERANCE / len.max(1e-300))
}

/// Axis-aligned Euclidean rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub const UNIT_SQUARE: Window = Window {
        x_min: -1.0,
        x_max: 1.0,
        y_min: -1.0,
        y_max: 1.0,
    };

    pub fn square(half_side: f64) -> Window {
        Window {
            x_min: -half_side,
            x_max: half_side,
            y_min: -half_side,
            y_max: half_side,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaEstimate {
    /// Value at twice the requested resolution.
    pub value: f64,
    /// Value at the requested resolution.
    pub coarse: f64,
    /// False when the two resolutions differ by more than 1 %.
    pub converged: bool,
}

/// Hyperbolic area of the region selected by `indicator` inside `window`,
/// by the midpoint rule on a `resolution × resolution` grid, checked against
/// a grid twice as fine.
pub fn hyp_area<F>(indicator: F, window: Window, resolution: usize) -> Result<AreaEstimate, GeometryError>
where
    F: Fn(DiskPoint) -> bool,
{
    if resolution < 2 {
        return Err(GeometryError::InvalidArgument("resolution must be ≥ 2".into()));
    }
    let inside_square = |v: f64| (-1.0..=1.0).contains(&v);
    if !(inside_square(window.x_min)
        && inside_square(window.x_max)
        && inside_square(window.y_min)
        && inside_square(window.y_max))
        || window.x_min >= window.x_max
        || window.y_min >= window.y_max
    {
        return Err(GeometryError::InvalidArgument(
            "window must be a non-empty rectangle inside [-1, 1]²".into(),
        ));
    }
    let coarse = midpoint_area(&indicator, window, resolution);
    let value = midpoint_area(&indicator, window, 2 * resolution);
    let scale = value.abs().max(coarse.abs());
    let converged = scale == 0.0 || (value - coarse).abs() <= 0.01 * scale;
    Ok(AreaEstimate {
        value,
        coarse,
        converged,
    })
}

fn midpoint_area<F: Fn(DiskPoint) -> bool>(indicator: &F, w: Window, n: usize) -> f64 {
    let hx = (w.x_max - w.x_min) / n as f64;
    let hy = (w.y_max - w.y_min) / n as f64;
    let rows: Vec<f64> = (0..n)
        .map(|j| {
            let y = w.y_min + hy * (j as f64 + 0.5);
            let terms: Vec<f64> = (0..n)
                .filter_map(|i| {
                    let x = w.x_min + hx * (i as f64 + 0.5);
                    let p = DiskPoint::new(x, y).ok()?;
                    if indicator(p) {
                        let d = 1.0 - p.0.norm_sqr();
                        Some(4.0 / (d * d))
                    } else {
                        None
                    }
                })
                .collect();
            crate::numerics::pairwise_sum(&terms)
        })
        .collect();
    crate::numerics::pairwise_sum(&rows) * hx * hy
}

/// A hyperbolic circle (and the ball it bounds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicCircle {
    pub center: DiskPoint,
    pub radius: f64,
}

impl HyperbolicCircle {
    pub fn new(center: DiskPoint, radius: f64) -> Result<Self, GeometryError> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidArgument(format!(
                "circle radius {radius} must be finite and non-negative"
            )));
        }
        Ok(HyperbolicCircle { center, radius })
    }

    /// Euclidean radius of the circle after recentering at the origin.
    pub fn euclid_radius(&self) -> f64 {
        euclid_radius(self.radius)
    }

    pub fn contains(&self, z: DiskPoint) -> bool {
        hyp_distance(self.center, z) < self.radius
    }

    /// `n` points on the circle, equally spaced in the recentered angle.
    pub fn sample(&self, n: usize) -> Polyline {
        let back = MobiusAutomorphism::to_zero(self.center).invert();
        let r = self.euclid_radius();
        let pts = (0..n.max(1))
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / n as f64;
                back.apply(DiskPoint(Complex64::from_polar(r, theta)))
            })
            .collect();
        Polyline::new(pts, true).expect("non-empty")
    }

    /// Hyperbolic circumference `2π sinh r`.
    pub fn circumference(&self) -> f64 {
        std::f64::consts::TAU * self.radius.sinh()
    }

    /// Hyperbolic area of the ball, `2π (cosh r − 1)`.
    pub fn ball_area(&self) -> f64 {
        std::f64::consts::TAU * (self.radius.cosh() - 1.0)
    }
}

/// `n`-vertex polyline along the geodesic from `z1` to `z2`, equally spaced
/// in hyperbolic arclength.
pub fn geodesic(z1: DiskPoint, z2: DiskPoint, n: usize) -> Result<Polyline, GeometryError> {
    if n < 2 {
        return Err(GeometryError::InvalidArgument("geodesic needs n ≥ 2".into()));
    }
    // Sample from a canonical endpoint so swapping the endpoints reverses the list exactly.
    let swap = (z2.re(), z2.im()) < (z1.re(), z1.im());
    let (p, q) = if swap { (z2, z1) } else { (z1, z2) };
    let to_zero = MobiusAutomorphism::to_zero(p);
    let back = to_zero.invert();
    let w = to_zero.apply_raw(q.0);
    let dist = hyp_distance(p, q);
    let dir = if w.norm() > 0.0 {
        w / w.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut pts: Vec<DiskPoint> = (0..n)
        .map(|k| {
            if k == 0 {
                p
            } else if k == n - 1 {
                q
            } else {
                let s = dist * k as f64 / (n - 1) as f64;
                back.apply(DiskPoint(dir * euclid_radius(s)))
            }
        })
        .collect();
    if swap {
        pts.reverse();
    }
    Polyline::open(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{LN_2, PI, TAU};

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    fn arb_point() -> impl Strategy<Value = DiskPoint> {
        (0.0..0.9f64, 0.0..TAU).prop_map(|(r, t)| DiskPoint::from_polar(r, t).unwrap())
    }

    fn arb_mobius() -> impl Strategy<Value = MobiusAutomorphism> {
        (0.0..2.0f64, 0.0..TAU, 0.0..TAU).prop_map(|(t, alpha, beta)| {
            MobiusAutomorphism::new(
                Complex64::from_polar(t.cosh(), alpha),
                Complex64::from_polar(t.sinh(), beta),
            )
            .unwrap()
        })
    }

    #[test]
    fn construction_rejects_boundary_and_exterior() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.0, 1.0 - 1e-10).is_err());
        assert!(DiskPoint::new(f64::NAN, 0.0).is_err());
        assert!(DiskPoint::new(0.0, 0.999_999).is_ok());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(hyp_distance(DiskPoint::ORIGIN, DiskPoint::ORIGIN), 0.0);
        let d = hyp_distance(DiskPoint::ORIGIN, pt(0.5, 0.0));
        assert!((d - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn distance_matches_geodesic_length() {
        let (a, b) = (pt(0.3, 0.0), pt(0.0, 0.3));
        let oracle = hyp_length(&geodesic(a, b, 10_000).unwrap());
        let d = hyp_distance(a, b);
        assert!((d - oracle).abs() < 1e-8, "{d} vs {oracle}");
        assert!(oracle >= d - 1e-9);
    }

    #[test]
    fn length_examples() {
        assert_eq!(hyp_length(&Polyline::open(vec![pt(0.2, 0.1)]).unwrap()), 0.0);
        let seg = Polyline::open(vec![DiskPoint::ORIGIN, pt(0.5, 0.0)]).unwrap();
        let closed_form = ((1.0 + 0.5) / (1.0 - 0.5f64)).ln();
        assert!((hyp_length(&seg) - closed_form).abs() < 1e-10);

        let big_r = 0.6;
        let n = 100_000;
        let circle: Vec<DiskPoint> = (0..n)
            .map(|k| DiskPoint::from_polar(big_r, TAU * k as f64 / n as f64).unwrap())
            .collect();
        let len = hyp_length(&Polyline::new(circle, true).unwrap());
        let exact = 4.0 * PI * big_r / (1.0 - big_r * big_r);
        assert!((len - exact).abs() / exact < 1e-8, "{len} vs {exact}");
    }

    #[test]
    fn polyline_canonicalizes_duplicates() {
        let p = pt(0.1, 0.1);
        let q = pt(0.2, 0.1);
        let line = Polyline::new(vec![p, p, q, q, p], true).unwrap();
        assert_eq!(line.vertices(), &[p, q]);
        assert!(line.is_closed());
        let single = Polyline::new(vec![p, p], true).unwrap();
        assert_eq!(single.vertices().len(), 1);
        assert!(!single.is_closed());
        assert!(Polyline::open(vec![]).is_err());
    }

    #[test]
    fn radius_conversions() {
        assert_eq!(euclid_radius(0.0), 0.0);
        assert!((euclid_radius(3f64.ln()) - 0.5).abs() < 1e-15);
        assert!((hyp_radius(0.9) - 19f64.ln()).abs() < 1e-14);
        assert_eq!(hyp_radius(0.0), 0.0);
    }

    #[test]
    fn area_examples() {
        let empty = hyp_area(|_| false, Window::UNIT_SQUARE, 50).unwrap();
        assert_eq!(empty.value, 0.0);
        assert!(empty.converged);

        let exact = TAU * (1f64.cosh() - 1.0);
        let ball = HyperbolicCircle::new(DiskPoint::ORIGIN, 1.0).unwrap();
        let at_zero = hyp_area(|z| ball.contains(z), Window::square(0.5), 400).unwrap();
        assert!(at_zero.converged);
        assert!((at_zero.value - exact).abs() / exact < 2e-3, "{}", at_zero.value);
        assert!((ball.ball_area() - exact).abs() < 1e-14);

        let moved = HyperbolicCircle::new(pt(0.3, -0.2), 1.0).unwrap();
        let off = hyp_area(|z| moved.contains(z), Window::square(0.9), 600).unwrap();
        assert!((off.value - exact).abs() / exact < 5e-3, "{}", off.value);
    }

    #[test]
    fn area_rejects_bad_window() {
        assert!(hyp_area(|_| true, Window::square(1.5), 10).is_err());
        assert!(hyp_area(|_| true, Window::UNIT_SQUARE, 1).is_err());
    }

    #[test]
    fn mobius_examples() {
        let z = pt(0.3, -0.4);
        assert_eq!(MobiusAutomorphism::IDENTITY.apply(z), z);
        let half = pt(0.5, 0.0);
        let w = mobius_to_zero(half).apply(half);
        assert!(w.abs() < 1e-16);
        assert!(MobiusAutomorphism::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).is_err());
        assert!(MobiusAutomorphism::new(Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0)).is_err());
        let g = MobiusAutomorphism::new(Complex64::new(3.0, 1.0), Complex64::new(0.5, 2.0)).unwrap();
        assert!((g.determinant() - 1.0).abs() < DET_TOLERANCE);
    }

    #[test]
    fn translation_has_expected_length() {
        let g = MobiusAutomorphism::translation(1.7, 0.4);
        let d = hyp_distance(DiskPoint::ORIGIN, g.apply(DiskPoint::ORIGIN));
        assert!((d - 1.7).abs() < 1e-13);
        assert!((g.translation_length() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn geodesic_examples() {
        let p = pt(0.2, 0.3);
        let constant = geodesic(p, p, 10).unwrap();
        assert_eq!(hyp_length(&constant), 0.0);

        let g = geodesic(DiskPoint::ORIGIN, pt(0.5, 0.0), 10_000).unwrap();
        assert!((hyp_length(&g) - 3f64.ln()).abs() < 1e-7);

        let (a, b) = (pt(-0.4, 0.2), pt(0.3, 0.5));
        let fwd = geodesic(a, b, 50).unwrap();
        let bwd = geodesic(b, a, 50).unwrap();
        let mut rev = bwd.vertices().to_vec();
        rev.reverse();
        assert_eq!(fwd.vertices(), rev.as_slice());
        assert_eq!(hyp_length(&fwd), hyp_length(&bwd));
        assert!(geodesic(a, b, 1).is_err());
    }

    #[test]
    fn geodesic_length_converges_from_above() {
        let (a, b) = (pt(-0.5, 0.1), pt(0.2, 0.7));
        let d = hyp_distance(a, b);
        let mut prev = f64::INFINITY;
        for n in [3, 5, 9, 17, 33, 65] {
            let l = hyp_length(&geodesic(a, b, n).unwrap());
            assert!(l >= d - 1e-9);
            assert!(l <= prev + 1e-12);
            prev = l;
        }
        // Quadratic convergence in n.
        let e1 = hyp_length(&geodesic(a, b, 33).unwrap()) - d;
        let e2 = hyp_length(&geodesic(a, b, 65).unwrap()) - d;
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn length_invariance_under_mobius() {
        let g = MobiusAutomorphism::new(Complex64::new(1.3, 0.4), Complex64::new(-0.6, 0.5)).unwrap();
        let line = Polyline::open(vec![pt(0.0, 0.0), pt(0.3, 0.1), pt(0.2, -0.4), pt(-0.5, -0.1)]).unwrap();
        let base = hyp_length(&line);
        let coarse = hyp_length(&line.map_refined(&g, 50_000));
        let fine = hyp_length(&line.map_refined(&g, 100_000));
        // Richardson extrapolation of the O(h²) chord error.
        let mapped = (4.0 * fine - coarse) / 3.0;
        assert!((mapped - base).abs() / base < 1e-9, "{mapped} vs {base}");
        let _ = LN_2;
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn isometry(g in arb_mobius(), z1 in arb_point(), z2 in arb_point()) {
            let d0 = hyp_distance(z1, z2);
            let d1 = hyp_distance(g.apply(z1), g.apply(z2));
            prop_assert!((d0 - d1).abs() <= 1e-10);
        }

        #[test]
        fn triangle_inequality(x in arb_point(), y in arb_point(), z in arb_point()) {
            prop_assert!(hyp_distance(x, z) <= hyp_distance(x, y) + hyp_distance(y, z) + 1e-12);
        }

        #[test]
        fn symmetry(x in arb_point(), y in arb_point()) {
            prop_assert_eq!(hyp_distance(x, y), hyp_distance(y, x));
        }

        #[test]
        fn inverse_law(g in arb_mobius(), z in arb_point()) {
            let back = g.invert().apply(g.apply(z));
            prop_assert!((back.z() - z.z()).norm() < 1e-12);
            prop_assert!(g.compose(&g.invert()).is_identity(1e-12));
        }

        #[test]
        fn radius_round_trip(r in 0.0..10.0f64) {
            let back = hyp_radius(euclid_radius(r));
            prop_assert!((back - r).abs() <= 1e-13 * r.max(1e-300));
        }
    }
}
