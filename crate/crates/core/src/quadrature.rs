//! Integration in a normal chart: hyperbolic circles, balls, rings and the
//! radial profile `‖Q‖(r) = ∫_{S(0, r)} Q ds_h`.
//!
//! Circles are integrated with the periodic trapezoid rule, balls as iterated
//! integrals `∫₀^{r0} ‖Q‖(r) dr` (composite Simpson in `r`), and the iterated
//! form is cross-checked against a direct Cartesian quadrature of
//! `Q · 4/(1 − |z|²)²`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disk::{euclid_radius, DiskPoint, GeometryError};
use crate::field::ScalarField;
use crate::numerics::{composite_gauss, composite_simpson, geomspace, pairwise_sum, simpson_nodes, simpson_weights_sum, trapezoid};

/// Smallest radius used for balls about a singular center.
pub const SINGULAR_START: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("profile value at r = {radius} is zero; the reciprocal integral is undefined")]
    ZeroNorm { radius: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// The declared singular point lies on the circle; nodes with non-finite values were dropped.
    SingularitySkipped { radius: f64 },
    /// Nodes returned non-finite values away from the declared singular point.
    NonFiniteValues { radius: f64, count: usize },
}

/// An integral value together with the warnings raised while computing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub warnings: Vec<Warning>,
}

/// `∫_{S(0, r)} Q ds_h` by the trapezoid rule over `n` equispaced angles on
/// the Euclidean circle of radius `R = euclid_radius(r)`, with line element
/// `2R / (1 − R²) dθ`.
pub fn circle_integral(q: &ScalarField, r: f64, n: usize) -> Result<Integral, QuadratureError> {
    if !(r > 0.0) {
        return Err(QuadratureError::Precondition(format!("circle radius {r} must be > 0")));
    }
    if n < 16 {
        return Err(QuadratureError::Precondition("circle quadrature needs n ≥ 16".into()));
    }
    let big_r = euclid_radius(r);
    if big_r >= 1.0 - crate::disk::BOUNDARY_MARGIN {
        return Err(QuadratureError::Precondition(format!("circle radius {r} reaches the boundary")));
    }
    Ok(circle_integral_unchecked(q, big_r, n, r))
}

fn circle_integral_unchecked(q: &ScalarField, big_r: f64, n: usize, r: f64) -> Integral {
    let mut warnings = Vec::new();
    let on_circle = q
        .singular_point()
        .map(|s| (s.norm() - big_r).abs() < 1e-9)
        .unwrap_or(false);
    let mut skipped = 0;
    let values: Vec<f64> = (0..n)
        .map(|k| {
            let theta = TAU * (k as f64 + 0.5) / n as f64;
            let v = q.eval(Complex64::from_polar(big_r, theta));
            if v.is_finite() {
                v
            } else {
                skipped += 1;
                0.0
            }
        })
        .collect();
    if on_circle {
        warnings.push(Warning::SingularitySkipped { radius: r });
    } else if skipped > 0 {
        warnings.push(Warning::NonFiniteValues { radius: r, count: skipped });
    }
    let weight = 2.0 * big_r / (1.0 - big_r * big_r) * TAU / n as f64;
    Integral {
        value: pairwise_sum(&values) * weight,
        warnings,
    }
}

/// `∫_{B(0, r0)} Q dh = ∫₀^{r0} ‖Q‖(r) dr` with composite Simpson over `n_r`
/// radial nodes. Fields singular at the center start at [`SINGULAR_START`].
pub fn ball_integral(q: &ScalarField, r0: f64, n_r: usize, n_theta: usize) -> Result<Integral, QuadratureError> {
    let start = if singular_at_center(q) { SINGULAR_START } else { 0.0 };
    shell_integral(q, start, r0, n_r, n_theta)
}

/// `∫_{r_a < h(0, z) < r_b} Q dh` as an iterated radial integral.
pub fn shell_integral(
    q: &ScalarField,
    r_a: f64,
    r_b: f64,
    n_r: usize,
    n_theta: usize,
) -> Result<Integral, QuadratureError> {
    if !(r_b > r_a && r_a >= 0.0) {
        return Err(QuadratureError::Precondition(format!("need 0 ≤ {r_a} < {r_b}")));
    }
    if n_theta < 16 {
        return Err(QuadratureError::Precondition("circle quadrature needs n ≥ 16".into()));
    }
    if euclid_radius(r_b) >= 1.0 - crate::disk::BOUNDARY_MARGIN {
        return Err(QuadratureError::Precondition(format!("radius {r_b} reaches the boundary")));
    }
    let n = simpson_nodes(n_r);
    let h = (r_b - r_a) / (n - 1) as f64;
    let nodes: Vec<Integral> = (0..n)
        .into_par_iter()
        .map(|i| {
            let r = r_a + h * i as f64;
            if r == 0.0 {
                Integral { value: 0.0, warnings: Vec::new() }
            } else {
                circle_integral_unchecked(q, euclid_radius(r), n_theta, r)
            }
        })
        .collect();
    let values: Vec<f64> = nodes.iter().map(|i| i.value).collect();
    let warnings = nodes.into_iter().flat_map(|i| i.warnings).collect();
    Ok(Integral {
        value: simpson_weights_sum(&values, h),
        warnings,
    })
}

fn singular_at_center(q: &ScalarField) -> bool {
    q.singular_point().map(|s| s.norm() < 1e-12).unwrap_or(false)
}

/// Resolutions of the two routes compared by [`fubini_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FubiniResolution {
    /// Cells per side of the Cartesian grid covering the ball.
    pub cartesian: usize,
    pub radial: usize,
    pub angular: usize,
}

impl Default for FubiniResolution {
    fn default() -> Self {
        FubiniResolution {
            cartesian: 400,
            radial: 256,
            angular: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FubiniReport {
    pub cartesian: f64,
    pub iterated: f64,
    pub residual: f64,
    pub relative: f64,
}

/// Compares a direct Cartesian quadrature of `∫_{B(0, r0)} Q · 4/(1 − |z|²)² dm`
/// with the iterated circle integral.
///
/// The Cartesian side integrates over the cells of a uniform grid on the
/// bounding square; cells cut by the circle use their exact overlap area with
/// the disk, so the rule stays second order.
pub fn fubini_residual(q: &ScalarField, r0: f64, res: FubiniResolution) -> Result<FubiniReport, QuadratureError> {
    let iterated = ball_integral(q, r0, res.radial, res.angular)?.value;
    let cartesian = cartesian_ball_integral(q, r0, res.cartesian)?;
    let residual = (cartesian - iterated).abs();
    let relative = if iterated == 0.0 {
        if residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        residual / iterated.abs()
    };
    Ok(FubiniReport {
        cartesian,
        iterated,
        residual,
        relative,
    })
}

/// Direct 2-D quadrature of `∫_{B(0, r0)} Q dh` on an `n × n` Cartesian grid.
pub fn cartesian_ball_integral(q: &ScalarField, r0: f64, n: usize) -> Result<f64, QuadratureError> {
    if n < 2 || !(r0 > 0.0) {
        return Err(QuadratureError::Precondition("need n ≥ 2 and r0 > 0".into()));
    }
    let big_r = euclid_radius(r0);
    let h = 2.0 * big_r / n as f64;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let y0 = -big_r + h * j as f64;
            let y1 = y0 + h;
            let terms: Vec<f64> = (0..n)
                .filter_map(|i| {
                    let x0 = -big_r + h * i as f64;
                    let x1 = x0 + h;
                    let area = rect_disk_overlap(x0, x1, y0, y1, big_r);
                    if area <= 0.0 {
                        return None;
                    }
                    if area >= h * h * (1.0 - 1e-12) {
                        return gauss_cell(q, x0, x1, y0, y1);
                    }
                    cut_cell(q, x0, x1, y0, y1, big_r)
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(pairwise_sum(&rows))
}

/// 2 × 2 Gauss-Legendre rule on a cell fully inside the disk.
fn gauss_cell(q: &ScalarField, x0: f64, x1: f64, y0: f64, y1: f64) -> Option<f64> {
    let g = 0.5 / 3f64.sqrt();
    let (cx, cy, hx, hy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0);
    let mut sum = 0.0;
    for sx in [-g, g] {
        for sy in [-g, g] {
            let v = hyp_density(q, Complex64::new(cx + sx * hx, cy + sy * hy))?;
            sum += v;
        }
    }
    Some(0.25 * sum * hx * hy)
}

fn hyp_density(q: &ScalarField, z: Complex64) -> Option<f64> {
    let v = q.eval(z);
    let d = 1.0 - z.norm_sqr();
    v.is_finite().then(|| v * 4.0 / (d * d))
}

/// Cell cut by the circle `|z| = R`: Gauss in x over pieces on which the
/// clipped chord `[max(y0, −c), min(y1, c)]`, `c = √(R² − x²)`, is smooth.
fn cut_cell(q: &ScalarField, x0: f64, x1: f64, y0: f64, y1: f64, big_r: f64) -> Option<f64> {
    let (a, b) = (x0.max(-big_r), x1.min(big_r));
    if a >= b {
        return None;
    }
    let mut breaks = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < big_r {
            let x = (big_r * big_r - y * y).sqrt();
            breaks.extend([-x, x].into_iter().filter(|&x| x > a && x < b));
        }
    }
    breaks.sort_by(f64::total_cmp);
    let finite = std::cell::Cell::new(true);
    let total = breaks
        .windows(2)
        .map(|w| {
            composite_gauss(
                |x| {
                    let c = (big_r * big_r - x * x).max(0.0).sqrt();
                    let (lo, hi) = (y0.max(-c), y1.min(c));
                    if hi <= lo {
                        return 0.0;
                    }
                    composite_gauss(
                        |y| {
                            hyp_density(q, Complex64::new(x, y)).unwrap_or_else(|| {
                                finite.set(false);
                                0.0
                            })
                        },
                        lo,
                        hi,
                        1,
                    )
                },
                w[0],
                w[1],
                1,
            )
        })
        .sum::<f64>();
    finite.get().then_some(total)
}

/// Exact area of `[x0, x1] × [y0, y1] ∩ {|z| ≤ R}`.
pub fn rect_disk_overlap(x0: f64, x1: f64, y0: f64, y1: f64, big_r: f64) -> f64 {
    let a = x0.max(-big_r);
    let b = x1.min(big_r);
    if a >= b {
        return 0.0;
    }
    let corner_in = |x: f64, y: f64| x * x + y * y <= big_r * big_r;
    if corner_in(x0, y0) && corner_in(x0, y1) && corner_in(x1, y0) && corner_in(x1, y1) {
        return (x1 - x0) * (y1 - y0);
    }
    let s = |x: f64| ((big_r - x) * (big_r + x)).max(0.0).sqrt();
    // Antiderivative of s(x) = √(R² − x²); atan2 stays accurate near x = ±R where asin does not.
    let big_s = |x: f64| {
        let sx = s(x);
        0.5 * (x * sx + big_r * big_r * x.atan2(sx))
    };
    let mut breaks = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < big_r {
            let x = s(y);
            for c in [-x, x] {
                if c > a && c < b {
                    breaks.push(c);
                }
            }
        }
    }
    breaks.sort_by(|p, q| p.total_cmp(q));
    let mut area = 0.0;
    for w in breaks.windows(2) {
        let (l, r) = (w[0], w[1]);
        if r <= l {
            continue;
        }
        let m = 0.5 * (l + r);
        let sm = s(m);
        let upper_is_curve = sm <= y1;
        let lower_is_curve = -sm >= y0;
        let top = if upper_is_curve { sm } else { y1 };
        let bottom = if lower_is_curve { -sm } else { y0 };
        if top <= bottom {
            continue;
        }
        let upper = if upper_is_curve { big_s(r) - big_s(l) } else { y1 * (r - l) };
        let lower = if lower_is_curve { -(big_s(r) - big_s(l)) } else { y0 * (r - l) };
        area += upper - lower;
    }
    area.max(0.0)
}

/// Ring `r_inner < h(center, z) < r_outer` in hyperbolic radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub center: DiskPoint,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl RingSpec {
    pub fn new(center: DiskPoint, r_inner: f64, r_outer: f64) -> Result<Self, QuadratureError> {
        if !(r_inner >= 0.0 && r_inner < r_outer) {
            return Err(QuadratureError::Precondition(format!(
                "ring radii must satisfy 0 ≤ r_inner < r_outer (got {r_inner}, {r_outer})"
            )));
        }
        if euclid_radius(r_outer) >= 1.0 - 1e-6 {
            return Err(QuadratureError::Precondition(format!(
                "outer radius {r_outer} leaves the chart"
            )));
        }
        Ok(RingSpec {
            center,
            r_inner,
            r_outer,
        })
    }

    pub fn centered(r_inner: f64, r_outer: f64) -> Result<Self, QuadratureError> {
        Self::new(DiskPoint::ORIGIN, r_inner, r_outer)
    }

    pub fn euclid_radii(&self) -> (f64, f64) {
        (euclid_radius(self.r_inner), euclid_radius(self.r_outer))
    }
}

/// Samples of `r ↦ ‖Q‖(r)` on a ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub quadrature_n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Warning>,
}

#[derive(Serialize)]
struct ProfileRow {
    r: f64,
    qnorm: f64,
}

impl RadialProfile {
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (&r, &qnorm) in self.radii.iter().zip(&self.values) {
            w.serialize(ProfileRow { r, qnorm })?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// `‖Q‖` sampled at `n_samples` geometrically spaced radii from `r_inner` to
/// `r_outer` (both ends included; a zero inner radius starts at
/// [`SINGULAR_START`]). `Q` is read in the chart about `ring.center`.
pub fn qnorm_profile(
    q: &ScalarField,
    ring: &RingSpec,
    n_samples: usize,
    n_angular: usize,
) -> Result<RadialProfile, QuadratureError> {
    if n_samples < 8 {
        return Err(QuadratureError::Precondition("a profile needs at least 8 samples".into()));
    }
    if n_angular < 16 {
        return Err(QuadratureError::Precondition("circle quadrature needs n ≥ 16".into()));
    }
    let q = q.recentered(ring.center);
    let start = ring.r_inner.max(SINGULAR_START);
    let radii = geomspace(start, ring.r_outer, n_samples);
    let samples: Vec<Integral> = radii
        .par_iter()
        .map(|&r| circle_integral_unchecked(&q, euclid_radius(r), n_angular, r))
        .collect();
    let values = samples.iter().map(|s| s.value).collect();
    let warnings = samples.into_iter().flat_map(|s| s.warnings).collect();
    Ok(RadialProfile {
        radii,
        values,
        quadrature_n: n_angular,
        warnings,
    })
}

/// `∫ dr / ‖Q‖(r)` over the sampled radii, trapezoid rule.
pub fn ring_reciprocal_integral(profile: &RadialProfile) -> Result<f64, QuadratureError> {
    if profile.radii.len() < 2 {
        return Err(QuadratureError::Precondition("need at least two radii".into()));
    }
    let recip = reciprocal_values(profile)?;
    Ok(trapezoid(&profile.radii, &recip))
}

pub(crate) fn reciprocal_values(profile: &RadialProfile) -> Result<Vec<f64>, QuadratureError> {
    profile
        .radii
        .iter()
        .zip(&profile.values)
        .map(|(&r, &v)| {
            if v > 0.0 {
                Ok(1.0 / v)
            } else {
                Err(QuadratureError::ZeroNorm { radius: r })
            }
        })
        .collect()
}

/// Simpson-rule `∫_{a}^{b} dr / ‖Q‖(r)` with fresh circle integrals; used where
/// trapezoid accuracy is not enough.
pub fn reciprocal_integral_simpson(
    q: &ScalarField,
    a: f64,
    b: f64,
    n_r: usize,
    n_theta: usize,
) -> Result<f64, QuadratureError> {
    let zero = std::cell::Cell::new(None);
    let value = composite_simpson(
        |r| {
            let v = circle_integral_unchecked(q, euclid_radius(r), n_theta, r).value;
            if v > 0.0 {
                1.0 / v
            } else {
                if zero.get().is_none() {
                    zero.set(Some(r));
                }
                0.0
            }
        },
        a,
        b,
        n_r,
    );
    match zero.get() {
        Some(radius) => Err(QuadratureError::ZeroNorm { radius }),
        None => Ok(value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::hyp_distance_raw;
    use crate::numerics::composite_gauss;

    fn origin() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    #[test]
    fn circle_integral_of_constants() {
        let zero = ScalarField::zero();
        assert_eq!(circle_integral(&zero, 0.7, 64).unwrap().value, 0.0);
        let one = ScalarField::constant(1.0);
        for r in [0.25, 0.5, 1.0, 2.0] {
            let v = circle_integral(&one, r, 2048).unwrap().value;
            let exact = TAU * f64::sinh(r);
            assert!((v - exact).abs() / exact < 1e-8);
        }
        let v1 = circle_integral(&one, 1.0, 64).unwrap().value;
        let v3 = circle_integral(&ScalarField::constant(3.0), 1.0, 64).unwrap().value;
        assert!((v3 - 3.0 * v1).abs() < 1e-12);
        assert!((v1 - 7.384_006_872_882_645).abs() < 1e-10);
    }

    #[test]
    fn circle_integral_preconditions() {
        let one = ScalarField::constant(1.0);
        assert!(circle_integral(&one, 0.0, 64).is_err());
        assert!(circle_integral(&one, 1.0, 8).is_err());
    }

    #[test]
    fn singular_point_on_circle_warns() {
        let p = Complex64::new(euclid_radius(0.5), 0.0);
        let q = ScalarField::new("spike", move |z: Complex64| 1.0 / (z - p).norm()).with_singular_point(p);
        let out = circle_integral(&q, 0.5, 64).unwrap();
        assert_eq!(out.warnings, vec![Warning::SingularitySkipped { radius: 0.5 }]);
        assert!(out.value.is_finite());
    }

    #[test]
    fn ball_integral_examples() {
        let one = ScalarField::constant(1.0);
        let v = ball_integral(&one, 1.0, 257, 256).unwrap().value;
        let exact = TAU * (1f64.cosh() - 1.0);
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
        assert_eq!(ball_integral(&ScalarField::zero(), 1.0, 33, 32).unwrap().value, 0.0);

        // Q = h(0, z): oracle is the 1-D integral of r · 2π sinh r.
        let h = ScalarField::new("h", move |z| hyp_distance_raw(origin(), z));
        let got = ball_integral(&h, 1.2, 257, 256).unwrap().value;
        let oracle = composite_gauss(|r| r * TAU * r.sinh(), 0.0, 1.2, 50);
        assert!((got - oracle).abs() / oracle < 1e-9, "{got} vs {oracle}");
    }

    #[test]
    fn overlap_area_is_exact() {
        let r = 0.7;
        // Whole disk from a covering grid.
        let n = 37;
        let h = 2.0 * r / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x0 = -r + h * i as f64;
                let y0 = -r + h * j as f64;
                total += rect_disk_overlap(x0, x0 + h, y0, y0 + h, r);
            }
        }
        assert!((total - std::f64::consts::PI * r * r).abs() < 1e-13, "{total}");
        // Quadrant.
        let q = rect_disk_overlap(0.0, 1.0, 0.0, 1.0, r);
        assert!((q - std::f64::consts::PI * r * r / 4.0).abs() < 1e-14);
        assert_eq!(rect_disk_overlap(0.8, 0.9, 0.0, 0.1, r), 0.0);
        assert!((rect_disk_overlap(-0.1, 0.1, -0.1, 0.1, r) - 0.04).abs() < 1e-16);
    }

    #[test]
    fn fubini_examples() {
        let res = FubiniResolution::default();
        let zero = fubini_residual(&ScalarField::zero(), 1.0, res).unwrap();
        assert_eq!(zero.residual, 0.0);
        let one = fubini_residual(&ScalarField::constant(1.0), 1.0, res).unwrap();
        assert!(one.relative < 5e-3, "{one:?}");
        let half = fubini_residual(&ScalarField::parse("half-plane").unwrap(), 1.0, res).unwrap();
        assert!(half.relative < 1e-2, "{half:?}");
        let exact_half = 0.5 * TAU * (1f64.cosh() - 1.0);
        assert!((half.iterated - exact_half).abs() / exact_half < 1e-6);
    }

    #[test]
    fn ring_spec_validation() {
        assert!(RingSpec::centered(1.0, 1.0).is_err());
        assert!(RingSpec::centered(-0.1, 1.0).is_err());
        assert!(RingSpec::centered(0.5, 40.0).is_err());
        assert!(RingSpec::centered(0.5, 1.5).is_ok());
    }

    #[test]
    fn profile_examples() {
        let ring = RingSpec::centered(0.5, 1.5).unwrap();
        let one = qnorm_profile(&ScalarField::constant(1.0), &ring, 16, 256).unwrap();
        assert_eq!(one.radii.len(), 16);
        assert_eq!(one.radii[0], 0.5);
        assert_eq!(*one.radii.last().unwrap(), 1.5);
        for (r, v) in one.radii.iter().zip(&one.values) {
            assert!((v - TAU * r.sinh()).abs() < 1e-10);
        }
        let inv_h = ScalarField::parse("radial:inv-h").unwrap();
        let p = qnorm_profile(&inv_h, &ring, 16, 256).unwrap();
        for (r, v) in p.radii.iter().zip(&p.values) {
            let expected = TAU * r.sinh() / r;
            assert!((v - expected).abs() / expected < 1e-10);
        }
        assert!(qnorm_profile(&inv_h, &ring, 4, 256).is_err());
        let csv = one.to_csv().unwrap();
        assert!(csv.starts_with("r,qnorm\n0.5,"));
    }

    #[test]
    fn reciprocal_integral_examples() {
        let ring = RingSpec::centered(0.5, 1.5).unwrap();
        let p = qnorm_profile(&ScalarField::constant(1.0), &ring, 1025, 64).unwrap();
        let closed = ((0.75f64).tanh() / (0.25f64).tanh()).ln() / TAU;
        let v = ring_reciprocal_integral(&p).unwrap();
        assert!((v - closed).abs() / closed < 1e-6, "{v} vs {closed}");

        let p3 = qnorm_profile(&ScalarField::constant(3.0), &ring, 1025, 64).unwrap();
        assert!((ring_reciprocal_integral(&p3).unwrap() - v / 3.0).abs() < 1e-14);

        let single = RadialProfile {
            radii: vec![1.0],
            values: vec![1.0],
            quadrature_n: 16,
            warnings: vec![],
        };
        assert!(ring_reciprocal_integral(&single).is_err());
        let zero = qnorm_profile(&ScalarField::zero(), &ring, 8, 16).unwrap();
        assert!(matches!(ring_reciprocal_integral(&zero), Err(QuadratureError::ZeroNorm { .. })));
    }

    #[test]
    fn monotone_in_the_field() {
        let ring = RingSpec::centered(0.2, 1.0).unwrap();
        let small = ScalarField::new("small", |z: Complex64| 1.0 + z.re.abs());
        let big = ScalarField::new("big", |z: Complex64| 1.5 + z.re.abs() + z.im * z.im);
        let ps = qnorm_profile(&small, &ring, 12, 128).unwrap();
        let pb = qnorm_profile(&big, &ring, 12, 128).unwrap();
        for (a, b) in ps.values.iter().zip(&pb.values) {
            assert!(a <= &(b + 1e-12));
        }
        assert!(ring_reciprocal_integral(&pb).unwrap() < ring_reciprocal_integral(&ps).unwrap());
    }
}
