use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::record::{Artifact, Outcome, Provenance, VerdictRecord, SCHEMA_VERSION};
use super::{ExperimentConfig, ExperimentError, ExperimentKind};
use crate::criteria::{divergence_check, DivergenceVerdict};
use crate::field::ScalarField;
use crate::mappings::{MapError, SampleMap};
use crate::numerics::linear_fit;
use crate::quadrature::RingSpec;
use crate::report::{csv_table, line_plot, Scale, Series};

/// Residual ratio `last / first` below which the residuals count as contracted.
pub const CONTRACTION_RATIO: f64 = 0.05;
/// Minimal log-log slope of residual against δ.
pub const CONTRACTION_SLOPE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResiduals {
    pub deltas: Vec<f64>,
    /// `max |f(p_k) − f(p'_k)|` over pairs of approach paths.
    pub residuals: Vec<f64>,
    /// Log-log slope of residual against δ over the second half of the steps.
    pub slope: f64,
    /// Non-increasing over the second half.
    pub monotone: bool,
    pub contracted: bool,
}

/// Images along three approach paths to `e^{i angle}`: `1 − δ` radially,
/// `(1 − δ) e^{i√δ}` tangentially skewed, and `1 − δ²` radially at a faster
/// rate. Distances are Euclidean in the chart, where the boundary limit lives.
pub fn approach_residuals(f: &SampleMap, angle: f64, steps: usize) -> Result<BoundaryResiduals, MapError> {
    let dir = Complex64::from_polar(1.0, angle);
    let deltas: Vec<f64> = (1..=steps).map(|k| 0.5f64.powi(k as i32)).collect();
    let residuals = deltas
        .iter()
        .map(|&d| {
            let paths = [
                dir * (1.0 - d),
                dir * Complex64::from_polar(1.0 - d, d.sqrt()),
                dir * (1.0 - d * d),
            ];
            let imgs: Vec<Complex64> = paths.iter().map(|&z| f.apply(z)).collect();
            if let Some(w) = imgs.iter().find(|w| !w.norm().is_finite() || w.norm() > 1.0 + 1e-9) {
                return Err(MapError::ChartOverflow { re: w.re, im: w.im });
            }
            let mut r: f64 = 0.0;
            for i in 0..imgs.len() {
                for j in i + 1..imgs.len() {
                    r = r.max((imgs[i] - imgs[j]).norm());
                }
            }
            Ok(r)
        })
        .collect::<Result<Vec<f64>, MapError>>()?;
    // Slope and monotonicity are judged on the second half, past the
    // pre-asymptotic steps where δ is still large.
    let tail = steps / 2;
    let xs: Vec<f64> = deltas[tail..].iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = residuals[tail..].iter().map(|r| r.max(1e-300).ln()).collect();
    let slope = linear_fit(&xs, &ys).map(|l| l.slope).unwrap_or(0.0);
    let monotone = residuals[tail..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let first = residuals[0];
    let last = *residuals.last().unwrap();
    let contracted = monotone && slope >= CONTRACTION_SLOPE && (first == 0.0 || last / first < CONTRACTION_RATIO);
    Ok(BoundaryResiduals {
        deltas,
        residuals,
        slope,
        monotone,
        contracted,
    })
}

/// Checks whether images along distinct approach paths to a boundary point
/// converge to a common limit, and compares with the expected outcome.
pub fn run_boundary_extension_probe(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let start = Instant::now();
    if cfg.kind != ExperimentKind::BoundaryExt {
        return Err(ExperimentError::Config(format!("{} is not a boundary_ext experiment", cfg.id)));
    }
    cfg.validate()?;
    let b = cfg.boundary.clone().unwrap_or_default();
    let f = SampleMap::from_spec(&cfg.map)?;
    let res = approach_residuals(&f, b.angle, b.steps)?;
    let first = res.residuals[0];
    let last = *res.residuals.last().unwrap();
    let ratio = if first > 0.0 { last / first } else { 0.0 };
    let mut provenance = vec![Provenance::new(
        "residuals",
        "experiments",
        "approach_residuals",
        json!({"map": f.to_string(), "angle": b.angle, "steps": b.steps, "metric": "euclidean_chart"}),
        &res,
    )];
    let mut notes = vec![format!(
        "slope {:.4}, monotone {}, last/first {:.3e}: {}",
        res.slope,
        res.monotone,
        ratio,
        if res.contracted { "contracts" } else { "does not contract" }
    )];
    let mut pass = res.contracted == b.expect_contraction;
    if !b.expect_contraction && !res.contracted {
        notes.push("no continuous extension observed; the map violates the divergence hypothesis by construction".into());
    }

    if let Some(spec) = &b.q_majorant {
        let q = ScalarField::parse(spec).map_err(|e| ExperimentError::Config(e.to_string()))?;
        let ring = RingSpec::centered(0.0, 1.0)?;
        let div = divergence_check(&q, &ring, 20)?;
        provenance.push(Provenance::new(
            "divergence",
            "criteria",
            "divergence_check",
            json!({"q": spec, "r_outer": 1.0, "n_eps": 20}),
            json!({"verdict": div.verdict, "fitted_growth": div.fitted_growth}),
        ));
        notes.push(format!("divergence condition on Q-majorant {spec}: {:?}", div.verdict));
        if b.expect_contraction && div.verdict != DivergenceVerdict::Diverges {
            pass = false;
            notes.push("contraction expected but the divergence condition was not confirmed".into());
        }
    }

    let csv = csv_table(
        &["delta", "residual"],
        res.deltas.iter().zip(&res.residuals).map(|(d, r)| vec![d.to_string(), r.to_string()]),
    )
    .map_err(|e| std::io::Error::other(e.to_string()))?;
    let svg = line_plot(
        &format!("approach residuals, {}", cfg.id),
        "δ",
        "residual",
        &[Series::new(f.to_string(), res.deltas.iter().cloned().zip(res.residuals.iter().cloned()).collect())],
        Scale::Log,
        Scale::Log,
    );
    Ok(Outcome {
        record: VerdictRecord {
            schema_version: SCHEMA_VERSION,
            id: cfg.id.clone(),
            kind: Some(ExperimentKind::BoundaryExt),
            lhs: Some(last),
            rhs: Some(first),
            ratio: Some(ratio),
            pass,
            tolerance: CONTRACTION_RATIO,
            runtime_ms: start.elapsed().as_millis() as u64,
            provenance,
            notes,
            error: None,
        },
        artifacts: vec![Artifact::new("residuals.csv", csv), Artifact::new("residuals.svg", svg)],
    })
}
