use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::record::{Artifact, Outcome, Provenance, VerdictRecord, SCHEMA_VERSION};
use super::{ExperimentConfig, ExperimentError, ExperimentKind};
use crate::disk::{euclid_radius, hyp_radius, DiskPoint, MobiusAutomorphism};
use crate::field::ScalarField;
use crate::fuchsian::{DirichletDomain, FuchsianGroup, NormalNeighborhood, SurfacePoint};
use crate::mappings::{dilatation, multiplicity, pushforward_family, MapError, SampleMap};
use crate::modulus::{band_circles, modulus_discrete, DiscretizedDomain, FamilyKind, GridGeometry, Metric};
use crate::quadrature::{qnorm_profile, ring_reciprocal_integral};
use crate::report::{csv_table, line_plot, Scale, Series};

const MULTIPLICITY_TARGETS: usize = 16;
const MULTIPLICITY_SEED_GRID: usize = 32;

/// Compares the modulus of the image of the circle family filling the ring
/// (LHS) with `∫ dr / ‖Q‖(r)` for `Q = N(f, D) · K_f` (RHS).
///
/// The source circles are taken about the ring center; the image is read in
/// the chart centered at the image of that point, on a polar grid whose bands
/// are the images of the source bands.
pub fn run_lower_q_verification(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let start = Instant::now();
    if cfg.kind != ExperimentKind::LowerQ {
        return Err(ExperimentError::Config(format!("{} is not a lower_q experiment", cfg.id)));
    }
    cfg.validate()?;
    let ring = cfg.ring.expect("validated").to_ring()?;
    let grid = cfg.grid;
    let mut provenance = Vec::new();
    let mut notes = Vec::new();

    if let Some(file) = &cfg.group_file {
        let path = cfg.resolve(file);
        let group = FuchsianGroup::load(&path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        let enumerated = Arc::new(group.enumerate()?);
        let dirichlet = DirichletDomain::new(DiskPoint::ORIGIN, &enumerated);
        let center = SurfacePoint::new(ring.center, enumerated.clone(), &dirichlet)?;
        let limit = NormalNeighborhood::radius_limit(&center);
        NormalNeighborhood::new(center, ring.r_outer).map_err(|e| ExperimentError::Config(e.to_string()))?;
        provenance.push(Provenance::new(
            "normal_neighborhood_limit",
            "fuchsian",
            "injectivity_radius",
            json!({"group_file": file, "max_word_length": group.max_word_length, "elements": enumerated.len()}),
            limit,
        ));
    }

    let f = SampleMap::from_spec(&cfg.map)?;
    let back = MobiusAutomorphism::to_zero(ring.center).invert();
    let chart_map = SampleMap::compose(vec![SampleMap::mobius(back), f.clone()]);
    let image_center = chart_map.apply(Complex64::new(0.0, 0.0));
    let image_center = DiskPoint::from_complex(image_center).map_err(|_| MapError::ChartOverflow {
        re: image_center.re,
        im: image_center.im,
    })?;
    let post = MobiusAutomorphism::to_zero(image_center);

    let source = DiscretizedDomain::polar(ring.r_inner, ring.r_outer, grid.n_circles, grid.n_theta)?;
    let GridGeometry::Polar { radial_edges, .. } = &source.geometry else {
        unreachable!("polar grid")
    };
    let image_edges: Vec<f64> = radial_edges
        .iter()
        .map(|&e| post.apply_raw(chart_map.apply(Complex64::new(e, 0.0))).norm())
        .collect();
    if image_edges.windows(2).any(|w| !(w[1] > w[0])) || image_edges.iter().any(|e| !(*e < 1.0)) {
        return Err(ExperimentError::Config(format!(
            "map {f} does not send the ring bands to nested bands; lower_q needs a radial-type map"
        )));
    }
    let image = DiscretizedDomain::polar_with_edges(image_edges.clone(), grid.n_theta)?;
    let circles = band_circles(&source, grid.points_per_circle)?;
    let (images, family) = pushforward_family(&chart_map, &circles, FamilyKind::CircleFamily, &image, Some(&post))?;
    for (i, c) in images.iter().enumerate() {
        if c.polyline.vertices().iter().any(|w| w.abs() < image_edges[i] || w.abs() > image_edges[i + 1]) {
            return Err(ExperimentError::Config(format!(
                "image of circle {i} under {f} leaves its band; lower_q needs a map sending circles about the ring center to circles"
            )));
        }
    }
    let result = modulus_discrete(&family, &image, Metric::Hyperbolic, cfg.tol)?;
    let lhs = result.value;
    let traversals: Vec<u32> = images.iter().map(|c| c.multiplicity).collect();
    provenance.push(Provenance::new(
        "lhs",
        "modulus",
        "modulus_discrete(pushforward_family)",
        json!({
            "map": f.to_string(),
            "metric": "hyperbolic",
            "tol": cfg.tol,
            "n_circles": grid.n_circles,
            "n_theta": grid.n_theta,
            "points_per_circle": grid.points_per_circle,
            "iterations": result.iterations,
            "duality_gap": result.duality_gap,
            "max_constraint_violation": result.max_constraint_violation,
            "image_inner_hyp": hyp_radius(image_edges[0]),
            "image_outer_hyp": hyp_radius(*image_edges.last().unwrap()),
            "max_traversals": traversals.iter().max(),
        }),
        lhs,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let targets: Vec<DiskPoint> = (0..MULTIPLICITY_TARGETS)
        .map(|_| {
            let r = ring.r_inner + (ring.r_outer - ring.r_inner) * rng.gen::<f64>();
            let theta = std::f64::consts::TAU * rng.gen::<f64>();
            let z = back.apply(DiskPoint::from_polar(euclid_radius(r), theta).map_err(crate::modulus::ModulusError::from)?);
            f.apply_point(z).map_err(ExperimentError::from)
        })
        .collect::<Result<_, ExperimentError>>()?;
    let mult = multiplicity(&f, &targets, MULTIPLICITY_SEED_GRID, 1e-12);
    let n = mult.supremum.max(1) as f64;
    if mult.incomplete {
        notes.push("multiplicity: seed grids disagreed for some target".into());
    }
    provenance.push(Provenance::new(
        "N",
        "mappings",
        "multiplicity",
        json!({"targets": MULTIPLICITY_TARGETS, "seed_grid": MULTIPLICITY_SEED_GRID, "seed": cfg.seed, "counts": mult.counts}),
        mult.supremum,
    ));

    let fq = f.clone();
    let q = ScalarField::new(format!("N·K[{f}]"), move |z| match DiskPoint::from_complex(z) {
        Ok(p) => n * dilatation(&fq, p).value(),
        Err(_) => f64::NAN,
    });
    let profile = qnorm_profile(&q, &ring, grid.profile_samples, grid.n_theta)?;
    let rhs = ring_reciprocal_integral(&profile)?;
    provenance.push(Provenance::new(
        "rhs",
        "quadrature",
        "ring_reciprocal_integral(qnorm_profile)",
        json!({"q": q.label(), "samples": grid.profile_samples, "n_angular": grid.n_theta, "r_inner": ring.r_inner, "r_outer": ring.r_outer}),
        rhs,
    ));
    for w in &profile.warnings {
        notes.push(format!("profile: {w:?}"));
    }

    let ratio = lhs / rhs;
    let pass = ratio >= 1.0 - cfg.ratio_tolerance;
    provenance.push(Provenance::new("ratio", "experiments", "lhs / rhs", json!({}), ratio));
    notes.push(format!("calibration constant c ≈ {ratio:.6} (pass needs ratio ≥ {:.3})", 1.0 - cfg.ratio_tolerance));

    let profile_csv = csv_table(
        &["r", "qnorm"],
        profile.radii.iter().zip(&profile.values).map(|(r, v)| vec![r.to_string(), v.to_string()]),
    )
    .map_err(|e| std::io::Error::other(e.to_string()))?;
    let bands_csv = csv_table(
        &["band", "source_inner", "source_outer", "image_inner", "image_outer", "traversals"],
        (0..grid.n_circles).map(|i| {
            vec![
                i.to_string(),
                radial_edges[i].to_string(),
                radial_edges[i + 1].to_string(),
                image_edges[i].to_string(),
                image_edges[i + 1].to_string(),
                traversals[i].to_string(),
            ]
        }),
    )
    .map_err(|e| std::io::Error::other(e.to_string()))?;
    let svg = line_plot(
        &format!("‖Q‖(r), {}", cfg.id),
        "r",
        "‖Q‖",
        &[Series::new(q.label(), profile.radii.iter().cloned().zip(profile.values.iter().cloned()).collect())],
        Scale::Log,
        Scale::Log,
    );

    Ok(Outcome {
        record: VerdictRecord {
            schema_version: SCHEMA_VERSION,
            id: cfg.id.clone(),
            kind: Some(ExperimentKind::LowerQ),
            lhs: Some(lhs),
            rhs: Some(rhs),
            ratio: Some(ratio),
            pass,
            tolerance: cfg.ratio_tolerance,
            runtime_ms: start.elapsed().as_millis() as u64,
            provenance,
            notes,
            error: None,
        },
        artifacts: vec![
            Artifact::new("profile.csv", profile_csv),
            Artifact::new("bands.csv", bands_csv),
            Artifact::new("profile.svg", svg),
        ],
    })
}
