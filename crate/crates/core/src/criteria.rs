//! Numeric verdicts for the analytic hypotheses on `Q`: finite mean
//! oscillation at a point, divergence of `∫ dt / ‖Q‖(t)` at zero, the
//! extremal radial weight `η₀`, and the log-log growth of the FMO integral.
//!
//! Limits cannot be decided from finitely many samples; every verdict is a
//! model comparison over an explicit ε-sequence and the raw data is kept.

use std::f64::consts::{LN_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disk::{euclid_radius, DiskPoint};
use crate::field::ScalarField;
use crate::numerics::{composite_gauss, linear_fit, median, pairwise_sum, simpson_nodes, simpson_weights_sum};
use crate::quadrature::{circle_integral, shell_integral, QuadratureError, RingSpec};

/// Smallest admissible ε (hyperbolic units).
pub const QUADRATURE_FLOOR: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriteriaError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// `ε_k = ε₀ 2^{−k}` for `k = 1..=count`, stopping at [`QUADRATURE_FLOOR`].
pub fn default_epsilons(eps0: f64, count: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for k in 1..=count {
        let e = (eps0 * 0.5f64.powi(k as i32)).max(QUADRATURE_FLOOR);
        if out.last().is_some_and(|l| *l <= e) {
            break;
        }
        out.push(e);
    }
    out
}

fn check_decreasing(eps: &[f64]) -> Result<(), CriteriaError> {
    if eps.len() < 3 {
        return Err(CriteriaError::Precondition("need at least three ε values".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CriteriaError::Precondition("ε values must strictly decrease".into()));
    }
    if *eps.last().unwrap() < QUADRATURE_FLOOR {
        return Err(CriteriaError::Precondition(format!("smallest ε is below the floor {QUADRATURE_FLOOR}")));
    }
    Ok(())
}

/// Hyperbolic area of a ball of radius `r`, `4π sinh²(r/2)`.
fn ball_area(r: f64) -> f64 {
    let s = (0.5 * r).sinh();
    2.0 * TAU * s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FmoVerdict {
    Fmo,
    NotFmo,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmoParams {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for FmoParams {
    fn default() -> Self {
        FmoParams { n_r: 129, n_theta: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmoReport {
    pub epsilons: Vec<f64>,
    pub means: Vec<f64>,
    /// `(1/|B_ε|) ∫_{B_ε} |Q − Q̄_ε|`.
    pub oscillations: Vec<f64>,
    /// Slope of `log(oscillation)` against `log(1/ε)`.
    pub trend_slope: f64,
    pub max_over_median: f64,
    pub verdict: FmoVerdict,
}

fn ball_integral_fine(q: &ScalarField, eps: f64, params: FmoParams) -> Result<f64, QuadratureError> {
    let singular = q.singular_point().map(|s| s.norm() < 1e-12).unwrap_or(false);
    let start = if singular { eps * 1e-6 } else { 0.0 };
    Ok(shell_integral(q, start, eps, params.n_r, params.n_theta)?.value)
}

/// Ball means and mean oscillations of `Q` about `center`.
///
/// Verdict: `fmo` when the oscillations stay within a factor 3 of their median,
/// all vanish, or shrink with ε, else `not_fmo` when their log-log slope against `1/ε`
/// exceeds 0.2, else `inconclusive`.
pub fn fmo_check(q: &ScalarField, center: DiskPoint, epsilons: &[f64], params: FmoParams) -> Result<FmoReport, CriteriaError> {
    check_decreasing(epsilons)?;
    let q = q.recentered(center);
    let rows = epsilons
        .par_iter()
        .map(|&eps| {
            let area = ball_area(eps);
            let mean = ball_integral_fine(&q, eps, params)? / area;
            let inner = q.clone();
            let mut dev = ScalarField::new("deviation", move |z| (inner.eval(z) - mean).abs());
            if let Some(s) = q.singular_point() {
                dev = dev.with_singular_point(s);
            }
            let osc = ball_integral_fine(&dev, eps, params)? / area;
            Ok((mean, osc))
        })
        .collect::<Result<Vec<_>, QuadratureError>>()?;
    let means: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let oscillations: Vec<f64> = rows.iter().map(|r| r.1).collect();

    let scale = means.iter().map(|m| m.abs()).fold(0.0, f64::max);
    let negligible = oscillations.iter().all(|o| *o <= 1e-9 * scale.max(f64::MIN_POSITIVE));
    let (xs, ys): (Vec<f64>, Vec<f64>) = epsilons
        .iter()
        .zip(&oscillations)
        .filter(|(_, o)| **o > 0.0)
        .map(|(e, o)| ((1.0 / e).ln(), o.ln()))
        .unzip();
    let trend_slope = if negligible {
        0.0
    } else {
        linear_fit(&xs, &ys).map(|f| f.slope).unwrap_or(0.0)
    };
    let med = median(&oscillations);
    let max = oscillations.iter().cloned().fold(0.0, f64::max);
    let max_over_median = if negligible { 1.0 } else { max / med };
    let verdict = if negligible || max_over_median <= 3.0 || trend_slope <= 0.0 {
        FmoVerdict::Fmo
    } else if trend_slope > 0.2 {
        FmoVerdict::NotFmo
    } else {
        FmoVerdict::Inconclusive
    };
    Ok(FmoReport {
        epsilons: epsilons.to_vec(),
        means,
        oscillations,
        trend_slope,
        max_over_median,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Log,
    Loglog,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceVerdict {
    Diverges,
    Converges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub intercept: f64,
    pub slope: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub epsilons: Vec<f64>,
    /// `∫_ε^{ε₀} dt / ‖Q‖(t)` for each ε.
    pub partial_integrals: Vec<f64>,
    /// Models `a + bε`, `a + b log(1/ε)`, `a + b log log(1/ε)` on the fitted tail.
    pub bounded_fit: ModelFit,
    pub log_fit: ModelFit,
    pub loglog_fit: ModelFit,
    pub fitted_growth: Growth,
    pub verdict: DivergenceVerdict,
}

/// Residual factor separating the growth models.
pub const MODEL_FACTOR: f64 = 10.0;
const NODES_PER_OCTAVE: usize = 16;

/// Partial integrals of `1/‖Q‖` for `ε_k = ε₀ 2^{−k}`, `ε₀ = ring.r_outer`,
/// down to `max(ring.r_inner, floor)`, and a growth-model verdict.
pub fn divergence_check(q: &ScalarField, ring: &RingSpec, n_eps: usize) -> Result<DivergenceReport, CriteriaError> {
    let eps0 = ring.r_outer;
    let floor = ring.r_inner.max(QUADRATURE_FLOOR);
    let epsilons: Vec<f64> = default_epsilons(eps0, n_eps).into_iter().filter(|e| *e >= floor).collect();
    let octaves = epsilons
        .iter()
        .take_while(|e| ((eps0 / **e).log2() - (eps0 / **e).log2().round()).abs() < 1e-9)
        .count();
    let epsilons = epsilons[..octaves].to_vec();
    let q = q.recentered(ring.center);

    // Simpson in u = log r on each octave [ε_{k}, ε_{k−1}].
    let m = NODES_PER_OCTAVE;
    let n_nodes = octaves * m + 1;
    let h = LN_2 / m as f64;
    let values = (0..n_nodes)
        .into_par_iter()
        .map(|j| {
            let r = eps0 * (-(j as f64) * h).exp();
            let norm = circle_integral(&q, r, 256)?.value;
            if norm > 0.0 {
                Ok(r / norm)
            } else {
                Err(QuadratureError::ZeroNorm { radius: r })
            }
        })
        .collect::<Result<Vec<f64>, QuadratureError>>()?;
    let mut partial_integrals = Vec::with_capacity(octaves);
    let mut acc = 0.0;
    for k in 0..octaves {
        acc += simpson_weights_sum(&values[k * m..=(k + 1) * m], h);
        partial_integrals.push(acc);
    }

    let tail: Vec<usize> = (0..epsilons.len())
        .filter(|&i| epsilons[i] <= (0.5 * eps0).min(0.25))
        .collect();
    if tail.len() < 4 {
        return Err(CriteriaError::Precondition(
            "need at least four ε ≤ min(ε₀/2, 1/4) above the floor".into(),
        ));
    }
    let ys: Vec<f64> = tail.iter().map(|&i| partial_integrals[i]).collect();
    let fit = |f: &dyn Fn(f64) -> f64| -> ModelFit {
        let xs: Vec<f64> = tail.iter().map(|&i| f(epsilons[i])).collect();
        let l = linear_fit(&xs, &ys).expect("distinct abscissae");
        ModelFit {
            intercept: l.intercept,
            slope: l.slope,
            rms_residual: l.rms_residual,
        }
    };
    let bounded_fit = fit(&|e| e);
    let log_fit = fit(&|e| (1.0 / e).ln());
    let loglog_fit = fit(&|e| (1.0 / e).ln().ln());

    let range = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let noise = 1e-12 * ys.iter().map(|y| y.abs()).fold(0.0, f64::max);
    let rb = bounded_fit.rms_residual.max(noise);
    let (unbounded, ru) = if log_fit.rms_residual <= loglog_fit.rms_residual {
        (log_fit, log_fit.rms_residual.max(noise))
    } else {
        (loglog_fit, loglog_fit.rms_residual.max(noise))
    };
    let verdict = if unbounded.slope > 0.0 && ru * MODEL_FACTOR <= rb {
        DivergenceVerdict::Diverges
    } else if rb * MODEL_FACTOR <= ru {
        DivergenceVerdict::Converges
    } else {
        DivergenceVerdict::Inconclusive
    };
    let best = [
        (Growth::Bounded, bounded_fit.rms_residual),
        (Growth::Log, log_fit.rms_residual),
        (Growth::Loglog, loglog_fit.rms_residual),
    ]
    .into_iter()
    .min_by(|a, b| a.1.total_cmp(&b.1))
    .unwrap();
    let fitted_growth = if best.1 > 1e-2 * range.max(f64::MIN_POSITIVE) {
        Growth::Other
    } else {
        best.0
    };
    Ok(DivergenceReport {
        epsilons,
        partial_integrals,
        bounded_fit,
        log_fit,
        loglog_fit,
        fitted_growth,
        verdict,
    })
}

/// `η₀(r) = 1 / (J ‖Q‖(r))` sampled on Simpson nodes across the ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaProfile {
    pub ring: RingSpec,
    /// `∫ dr / ‖Q‖(r)` over the ring.
    pub j: f64,
    pub radii: Vec<f64>,
    pub eta0: Vec<f64>,
    pub n_theta: usize,
}

impl EtaProfile {
    pub fn build(q: &ScalarField, ring: &RingSpec, n_r: usize, n_theta: usize) -> Result<Self, CriteriaError> {
        let q = q.recentered(ring.center);
        let n = simpson_nodes(n_r);
        let (a, b) = (ring.r_inner.max(crate::quadrature::SINGULAR_START), ring.r_outer);
        let h = (b - a) / (n - 1) as f64;
        let radii: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
        let norms = radii
            .par_iter()
            .map(|&r| {
                let v = circle_integral(&q, r, n_theta)?.value;
                if v > 0.0 {
                    Ok(v)
                } else {
                    Err(QuadratureError::ZeroNorm { radius: r })
                }
            })
            .collect::<Result<Vec<f64>, QuadratureError>>()?;
        let recip: Vec<f64> = norms.iter().map(|v| 1.0 / v).collect();
        let j = simpson_weights_sum(&recip, h);
        Ok(EtaProfile {
            ring: *ring,
            j,
            radii,
            eta0: recip.iter().map(|r| r / j).collect(),
            n_theta,
        })
    }

    /// `∫ η₀ dr` on the sampling nodes; equals 1 up to rounding.
    pub fn normalization(&self) -> f64 {
        let h = self.radii[1] - self.radii[0];
        simpson_weights_sum(&self.eta0, h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaParams {
    pub n_r: usize,
    pub n_theta: usize,
    pub bins: usize,
    /// Gauss panels per bin.
    pub panels: usize,
}

impl Default for EtaParams {
    fn default() -> Self {
        EtaParams {
            n_r: 1025,
            n_theta: 256,
            bins: 32,
            panels: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    pub inverse_j: f64,
    /// `∫ Q η₀²(h) dh` computed with a Gauss rule independent of `J`.
    pub equality_lhs: f64,
    pub equality_rel_error: f64,
    pub normalization: f64,
    pub n_random: usize,
    /// `min J · ∫ Q η² dh − 1` over the random weights.
    pub min_margin: f64,
    /// `∫ Q η² dh` for the uniform weight.
    pub uniform_value: f64,
    pub pass: bool,
}

/// Checks `∫ Q η₀² dh = 1/J` and `∫ Q η² dh ≥ 1/J` for seeded random
/// piecewise-constant `η ≥ 0` with `∫ η dr = 1`.
pub fn eta_inequality_check(
    q: &ScalarField,
    ring: &RingSpec,
    n_random: usize,
    seed: u64,
    params: EtaParams,
) -> Result<EtaReport, CriteriaError> {
    let profile = EtaProfile::build(q, ring, params.n_r, params.n_theta)?;
    let centered = q.recentered(ring.center);
    let (a, b) = (profile.radii[0], *profile.radii.last().unwrap());
    let j = profile.j;
    let norm_at = |r: f64| -> f64 { circle_integral(&centered, r, params.n_theta).map(|i| i.value).unwrap_or(0.0) };

    // (a) the equality at η₀: integrate Q · η₀(r)² over each circle, then in r.
    let panels = params.bins * params.panels;
    let equality_lhs = composite_gauss(
        |r| {
            let eta = 1.0 / (j * norm_at(r));
            let weighted = centered.scaled(eta * eta);
            circle_integral(&weighted, r, params.n_theta).map(|i| i.value).unwrap_or(f64::NAN)
        },
        a,
        b,
        panels,
    );
    let inverse_j = 1.0 / j;
    let equality_rel_error = (equality_lhs - inverse_j).abs() / inverse_j;

    // (b) bin integrals with one shared Gauss rule.
    let width = (b - a) / params.bins as f64;
    let bins: Vec<(f64, f64)> = (0..params.bins)
        .into_par_iter()
        .map(|k| {
            let lo = a + width * k as f64;
            let hi = lo + width;
            let s = composite_gauss(&norm_at, lo, hi, params.panels);
            let t = composite_gauss(|r| 1.0 / norm_at(r), lo, hi, params.panels);
            (s, t)
        })
        .collect();
    let j_bins = pairwise_sum(&bins.iter().map(|x| x.1).collect::<Vec<_>>());
    let weighted = |heights: &[f64]| -> f64 {
        let mass: f64 = heights.iter().sum::<f64>() * width;
        let terms: Vec<f64> = heights
            .iter()
            .zip(&bins)
            .map(|(h, (s, _))| {
                let h = h / mass;
                h * h * s
            })
            .collect();
        pairwise_sum(&terms)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_margin = f64::INFINITY;
    for _ in 0..n_random {
        let heights: Vec<f64> = (0..params.bins).map(|_| rng.gen_range(0.0..1.0)).collect();
        min_margin = min_margin.min(weighted(&heights) * j_bins - 1.0);
    }
    let uniform_value = weighted(&vec![1.0; params.bins]);
    let normalization = profile.normalization();
    Ok(EtaReport {
        inverse_j,
        equality_lhs,
        equality_rel_error,
        normalization,
        n_random,
        min_margin,
        uniform_value,
        pass: equality_rel_error <= 1e-6 && min_margin >= -1e-9 && (normalization - 1.0).abs() <= 1e-8,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmoIntegralReport {
    pub eps0: f64,
    pub epsilons: Vec<f64>,
    /// `∫_{ε < h < ε₀} Q · (h log(1/h))^{−2} dh`.
    pub integrals: Vec<f64>,
    /// Slope against `log log(1/ε)`.
    pub slope: f64,
    pub intercept: f64,
}

/// Growth of `∫_{ε<h<ε₀} Q (h log(1/h))^{−2} dh` against `log log(1/ε)`.
pub fn fmo_integral_estimate(
    q: &ScalarField,
    center: DiskPoint,
    eps0: f64,
    epsilons: &[f64],
) -> Result<FmoIntegralReport, CriteriaError> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(CriteriaError::Precondition("ε₀ must lie in (0, 1)".into()));
    }
    check_decreasing(epsilons)?;
    if epsilons[0] > eps0 {
        return Err(CriteriaError::Precondition("every ε must be ≤ ε₀".into()));
    }
    let q = q.recentered(center);
    // In u = log r the integrand is ‖Q‖(r) / (r log²(1/r)).
    let integrand = |u: f64| -> f64 {
        let r = u.exp();
        let l = -u;
        let norm = circle_integral(&q, r, 128).map(|i| i.value).unwrap_or(f64::NAN);
        norm / (r * l * l)
    };
    let mut edges = vec![eps0];
    edges.extend_from_slice(epsilons);
    let pieces: Vec<f64> = edges
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| composite_gauss(integrand, w[1].ln(), w[0].ln(), 8))
        .collect();
    let mut integrals = Vec::with_capacity(epsilons.len());
    let mut acc = 0.0;
    for p in pieces {
        acc += p;
        integrals.push(acc);
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| (1.0 / e).ln().ln()).collect();
    let fit = linear_fit(&xs, &integrals).ok_or_else(|| CriteriaError::Precondition("degenerate ε list".into()))?;
    Ok(FmoIntegralReport {
        eps0,
        epsilons: epsilons.to_vec(),
        integrals,
        slope: fit.slope,
        intercept: fit.intercept,
    })
}

/// Euclidean radius of the hyperbolic ball of radius `eps`; convenience for reports.
pub fn euclid_ball_radius(eps: f64) -> f64 {
    euclid_radius(eps)
}
