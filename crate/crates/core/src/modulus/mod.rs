//! Discrete conformal modulus of curve families, closed-form ring moduli and
//! the weighted infimum `inf_α ∫ φ α^q dμ` over `∫ α dμ = 1`.

mod domain;
mod family;
mod solver;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use domain::{Cell, DiscretizedDomain, GridGeometry};
pub use family::{
    band_circles, radial_family, rasterize_polyline, sample_circle, Curve, CurveFamily, FamilyKind, Incidence,
    SampledCurve,
};
pub use solver::{modulus_discrete, modulus_weighted, solve, DensityField, ModulusResult, SolverOptions};

use crate::disk::GeometryError;
use crate::field::ScalarField;
use crate::quadrature::{qnorm_profile, ring_reciprocal_integral, QuadratureError, RingSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModulusError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("curve {index} does not meet the domain")]
    EmptyCurve { index: usize },
    #[error("curve {curve} has no admissible density (zero length on weighted cells)")]
    Infeasible { curve: usize },
    #[error("solver did not converge after {} iterations (violation {:.3e})", .0.iterations, .0.max_constraint_violation)]
    NonConvergence(Box<ModulusResult>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Hyperbolic,
    Euclidean,
}

impl Metric {
    pub fn area(self, cell: &Cell) -> f64 {
        match self {
            Metric::Hyperbolic => cell.area_hyp,
            Metric::Euclidean => cell.area_euclid,
        }
    }

    pub fn length(self, inc: &Incidence) -> f64 {
        match self {
            Metric::Hyperbolic => inc.length_hyp,
            Metric::Euclidean => inc.length_euclid,
        }
    }
}

/// Modulus of the family of curves joining the boundary circles of the ring,
/// `2π / log(R₂ / R₁)` with Euclidean radii `R_i`.
pub fn ring_modulus_exact(ring: &RingSpec) -> Result<f64, ModulusError> {
    if !(ring.r_inner > 0.0) {
        return Err(ModulusError::Precondition("ring modulus needs r_inner > 0".into()));
    }
    let (r1, r2) = ring.euclid_radii();
    Ok(TAU / (r2 / r1).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleFamilyParams {
    pub n_circles: usize,
    pub n_theta: usize,
    pub points_per_circle: usize,
    /// Samples of the reference profile.
    pub profile_samples: usize,
    pub tol: f64,
}

impl Default for CircleFamilyParams {
    fn default() -> Self {
        CircleFamilyParams {
            n_circles: 64,
            n_theta: 256,
            points_per_circle: 2048,
            profile_samples: 1025,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleFamilyModulus {
    /// Discrete optimum of `Σ ρ² A / Q` over densities admissible for the circles.
    pub value: f64,
    /// `∫ dr / ‖Q‖(r)` over the ring.
    pub reference: f64,
    pub result: ModulusResult,
}

impl CircleFamilyModulus {
    pub fn relative_gap(&self) -> f64 {
        (self.value - self.reference).abs() / self.reference
    }
}

/// Weighted modulus of the family of concentric circles filling the ring, one
/// circle per radial band of a polar grid, compared with the reciprocal
/// integral of the radial profile of `Q`.
pub fn circle_family_modulus(
    ring: &RingSpec,
    q: &ScalarField,
    params: CircleFamilyParams,
) -> Result<CircleFamilyModulus, ModulusError> {
    if params.n_circles < 4 {
        return Err(ModulusError::Precondition("circle family needs n_circles ≥ 4".into()));
    }
    let q = q.recentered(ring.center);
    let dom = DiscretizedDomain::polar(ring.r_inner, ring.r_outer, params.n_circles, params.n_theta)?;
    let circles = band_circles(&dom, params.points_per_circle)?;
    let family = CurveFamily::rasterize(FamilyKind::CircleFamily, &circles, &dom)?;
    let weights: Vec<f64> = dom.cells.iter().map(|c| q.value(c.center)).collect();
    let result = modulus_weighted(
        &family,
        &dom,
        Metric::Hyperbolic,
        &weights,
        SolverOptions::with_tol(params.tol),
    )?;
    let centered = RingSpec::centered(ring.r_inner, ring.r_outer)?;
    let profile = qnorm_profile(&q, &centered, params.profile_samples, params.n_theta.max(64))?;
    let reference = ring_reciprocal_integral(&profile)?;
    Ok(CircleFamilyModulus {
        value: result.value,
        reference,
        result,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedInfimum {
    pub value: f64,
    /// Minimizing weights, `Σ α_i m_i = 1`.
    pub alpha: Vec<f64>,
}

/// `inf Σ φ_i α_i^q m_i` over `α ≥ 0` with `Σ α_i m_i = 1`:
/// `I = (Σ φ_i^{−λ} m_i)^{−1/λ}`, `λ = 1/(q − 1)`, attained at `α ∝ φ^{−λ}`.
pub fn weighted_infimum(atoms: &[(f64, f64)], q: f64) -> Result<WeightedInfimum, ModulusError> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(ModulusError::Precondition(format!("exponent q = {q} must exceed 1")));
    }
    if atoms.is_empty() || atoms.iter().any(|(phi, m)| !(*phi > 0.0 && *m > 0.0 && phi.is_finite() && m.is_finite())) {
        return Err(ModulusError::Precondition("atoms need φ > 0 and mass > 0".into()));
    }
    let lambda = 1.0 / (q - 1.0);
    let powers: Vec<f64> = atoms.iter().map(|(phi, _)| phi.powf(-lambda)).collect();
    let terms: Vec<f64> = powers.iter().zip(atoms).map(|(p, (_, m))| p * m).collect();
    let s = crate::numerics::pairwise_sum(&terms);
    Ok(WeightedInfimum {
        value: s.powf(-1.0 / lambda),
        alpha: powers.iter().map(|p| p / s).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::DiskPoint;
    use proptest::prelude::*;

    #[test]
    fn ring_modulus_examples() {
        let ring = RingSpec::centered(0.5, 1.5).unwrap();
        let v = ring_modulus_exact(&ring).unwrap();
        assert!((v - 6.593_52).abs() < 1e-5, "{v}");
        let thin = RingSpec::centered(0.5, 0.500_001).unwrap();
        assert!(ring_modulus_exact(&thin).unwrap() > 1e5);
        assert!(ring_modulus_exact(&RingSpec::centered(0.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn ring_modulus_depends_on_the_ratio_only() {
        use crate::disk::hyp_radius;
        let a = RingSpec::centered(hyp_radius(0.2), hyp_radius(0.5)).unwrap();
        let b = RingSpec::centered(hyp_radius(0.3), hyp_radius(0.75)).unwrap();
        assert!((ring_modulus_exact(&a).unwrap() - ring_modulus_exact(&b).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn radial_family_reproduces_ring_modulus() {
        let ring = RingSpec::centered(0.5, 1.5).unwrap();
        let dom = DiscretizedDomain::polar(0.5, 1.5, 40, 120).unwrap();
        let fam = CurveFamily::rasterize(FamilyKind::Connecting, &radial_family(&dom, 200).unwrap(), &dom).unwrap();
        let r = modulus_discrete(&fam, &dom, Metric::Hyperbolic, 1e-6).unwrap();
        let exact = ring_modulus_exact(&ring).unwrap();
        assert!((r.value - exact).abs() / exact < 0.01, "{} vs {exact}", r.value);
    }

    #[test]
    fn circle_family_matches_reciprocal_integral() {
        let ring = RingSpec::centered(0.5, 1.5).unwrap();
        let params = CircleFamilyParams {
            n_circles: 32,
            n_theta: 128,
            points_per_circle: 1024,
            ..Default::default()
        };
        let one = circle_family_modulus(&ring, &ScalarField::constant(1.0), params).unwrap();
        let closed = ((0.75f64).tanh() / (0.25f64).tanh()).ln() / TAU;
        assert!((one.reference - closed).abs() / closed < 1e-5);
        assert!(one.relative_gap() < 0.02, "{one:?}");
        let three = circle_family_modulus(&ring, &ScalarField::constant(3.0), params).unwrap();
        assert!((three.value * 3.0 - one.value).abs() / one.value < 1e-5);
        assert!((three.reference * 3.0 - one.reference).abs() / one.reference < 1e-12);
        let small = CircleFamilyParams { n_circles: 1, ..params };
        assert!(circle_family_modulus(&ring, &ScalarField::constant(1.0), small).is_err());
    }

    #[test]
    fn circle_family_multiplicity_law() {
        let dom = DiscretizedDomain::polar(0.5, 1.5, 16, 64).unwrap();
        let fam = CurveFamily::rasterize(FamilyKind::CircleFamily, &band_circles(&dom, 512).unwrap(), &dom).unwrap();
        let base = modulus_discrete(&fam, &dom, Metric::Hyperbolic, 1e-8).unwrap();
        for k in [2, 3] {
            let r = modulus_discrete(&fam.with_multiplicity_factor(k), &dom, Metric::Hyperbolic, 1e-8).unwrap();
            assert!((r.value * (k * k) as f64 - base.value).abs() / base.value < 1e-6);
        }
    }

    #[test]
    fn circle_family_about_a_moved_center() {
        let c = DiskPoint::new(0.3, 0.1).unwrap();
        let ring = RingSpec::new(c, 0.5, 1.0).unwrap();
        let params = CircleFamilyParams {
            n_circles: 16,
            n_theta: 64,
            points_per_circle: 512,
            ..Default::default()
        };
        let r = circle_family_modulus(&ring, &ScalarField::constant(1.0), params).unwrap();
        assert!(r.relative_gap() < 0.02);
    }

    #[test]
    fn weighted_infimum_examples() {
        let w = weighted_infimum(&[(1.0, 0.5), (4.0, 0.5)], 2.0).unwrap();
        assert!((w.value - 1.6).abs() < 1e-12);
        assert!((w.alpha[0] - 1.6).abs() < 1e-12 && (w.alpha[1] - 0.4).abs() < 1e-12);
        let one = weighted_infimum(&[(1.0, 0.25); 4], 3.5).unwrap();
        assert!((one.value - 1.0).abs() < 1e-14);
        assert!(one.alpha.iter().all(|a| (a - 1.0).abs() < 1e-14));
        assert!(weighted_infimum(&[(1.0, 1.0)], 1.0).is_err());
        assert!(weighted_infimum(&[(0.0, 1.0)], 2.0).is_err());
    }

    /// Minimizes Σ φ α^q m on Σ α m = 1 by bisection on the Lagrange multiplier.
    fn lagrange_oracle(atoms: &[(f64, f64)], q: f64) -> f64 {
        let alpha_of = |mu: f64| -> Vec<f64> { atoms.iter().map(|(phi, _)| (mu / (q * phi)).powf(1.0 / (q - 1.0))).collect() };
        let mass = |mu: f64| -> f64 { alpha_of(mu).iter().zip(atoms).map(|(a, (_, m))| a * m).sum() };
        let (mut lo, mut hi) = (1e-300f64, 1.0f64);
        while mass(hi) < 1.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if mass(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let alpha = alpha_of(hi);
        let total: f64 = alpha.iter().zip(atoms).map(|(a, (_, m))| a * m).sum();
        alpha
            .iter()
            .zip(atoms)
            .map(|(a, (phi, m))| phi * (a / total).powf(q) * m)
            .sum()
    }

    proptest! {
        #[test]
        fn weighted_infimum_matches_lagrange(
            atoms in prop::collection::vec((0.1f64..10.0, 0.01f64..1.0), 10),
            q in 1.2f64..5.0,
        ) {
            let w = weighted_infimum(&atoms, q).unwrap();
            let oracle = lagrange_oracle(&atoms, q);
            prop_assert!((w.value - oracle).abs() / oracle < 1e-6);
            let mass: f64 = w.alpha.iter().zip(&atoms).map(|(a, (_, m))| a * m).sum();
            prop_assert!((mass - 1.0).abs() < 1e-12);
        }

        #[test]
        fn weighted_infimum_is_homogeneous(c in 0.1f64..10.0, q in 1.5f64..4.0) {
            let atoms = [(1.0, 0.3), (2.5, 0.2), (0.7, 0.5)];
            let scaled: Vec<(f64, f64)> = atoms.iter().map(|(p, m)| (c * p, *m)).collect();
            let a = weighted_infimum(&atoms, q).unwrap().value;
            let b = weighted_infimum(&scaled, q).unwrap().value;
            prop_assert!((b - c * a).abs() / (c * a) < 1e-12);
        }
    }
}
