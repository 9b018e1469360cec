//! Closed-form sample mappings of the disk, their Wirtinger derivatives and
//! the quantities built from them: dilatation, Jacobian, multiplicity, and
//! images of curve families.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disk::{DiskPoint, MobiusAutomorphism, Polyline, BOUNDARY_MARGIN};
use crate::modulus::{CurveFamily, DiscretizedDomain, FamilyKind, ModulusError, SampledCurve};

/// Jacobian threshold below which a point counts as degenerate.
pub const JACOBIAN_ZERO: f64 = 1e-10;
/// Norm threshold paired with [`JACOBIAN_ZERO`] in the finite-distortion check.
pub const NORM_ZERO: f64 = 1e-8;
/// Preimages closer than this are the same point.
pub const PREIMAGE_DEDUP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("invalid map spec: {0}")]
    InvalidSpec(String),
    #[error("image point ({re}, {im}) leaves the chart")]
    ChartOverflow { re: f64, im: f64 },
    #[error(transparent)]
    Modulus(#[from] ModulusError),
}

/// Serializable description of a map, e.g. `{"kind": "winding", "k": 3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    Identity,
    Mobius { a_re: f64, a_im: f64, c_re: f64, c_im: f64 },
    RadialStretch { k: f64 },
    Winding { k: u32 },
    /// Applied first to last.
    Composition { maps: Vec<MapSpec> },
    Fold,
    Spiral,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Mobius(MobiusAutomorphism),
    /// `z ↦ z |z|^{k−1}`.
    RadialStretch(f64),
    /// `r e^{iθ} ↦ r e^{ikθ}`.
    Winding(u32),
    Composition(Vec<SampleMap>),
    /// `x + iy ↦ |x| + iy`.
    Fold,
    /// `z ↦ z e^{i s(|z|)}` with `s(r) = log(1 + log(1/(1 − r)))`.
    Spiral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMap {
    pub kind: MapKind,
}

impl fmt::Display for SampleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MapKind::Mobius(g) if g.is_identity(0.0) => write!(f, "identity"),
            MapKind::Mobius(g) => write!(f, "mobius({}, {})", g.a(), g.c()),
            MapKind::RadialStretch(k) => write!(f, "radial_stretch({k})"),
            MapKind::Winding(k) => write!(f, "winding({k})"),
            MapKind::Composition(maps) => {
                let parts: Vec<String> = maps.iter().map(|m| m.to_string()).collect();
                write!(f, "composition[{}]", parts.join(", "))
            }
            MapKind::Fold => write!(f, "fold"),
            MapKind::Spiral => write!(f, "spiral"),
        }
    }
}

/// Wirtinger derivatives `(f_z, f_z̄)`.
pub type Wirtinger = (Complex64, Complex64);

fn spiral_angle(r: f64) -> (f64, f64) {
    let l = -(-r).ln_1p();
    let s = l.ln_1p();
    let ds = 1.0 / ((1.0 - r) * (1.0 + l));
    (s, ds)
}

impl SampleMap {
    pub fn identity() -> Self {
        SampleMap {
            kind: MapKind::Mobius(MobiusAutomorphism::IDENTITY),
        }
    }

    pub fn mobius(g: MobiusAutomorphism) -> Self {
        SampleMap {
            kind: MapKind::Mobius(g),
        }
    }

    pub fn winding(k: u32) -> Self {
        SampleMap {
            kind: MapKind::Winding(k),
        }
    }

    pub fn radial_stretch(k: f64) -> Self {
        SampleMap {
            kind: MapKind::RadialStretch(k),
        }
    }

    pub fn compose(maps: Vec<SampleMap>) -> Self {
        SampleMap {
            kind: MapKind::Composition(maps),
        }
    }

    pub fn fold() -> Self {
        SampleMap { kind: MapKind::Fold }
    }

    pub fn spiral() -> Self {
        SampleMap { kind: MapKind::Spiral }
    }

    pub fn from_spec(spec: &MapSpec) -> Result<Self, MapError> {
        Ok(match spec {
            MapSpec::Identity => Self::identity(),
            MapSpec::Mobius { a_re, a_im, c_re, c_im } => Self::mobius(
                MobiusAutomorphism::new(Complex64::new(*a_re, *a_im), Complex64::new(*c_re, *c_im))
                    .map_err(|e| MapError::InvalidSpec(e.to_string()))?,
            ),
            MapSpec::RadialStretch { k } => {
                if !(*k >= 1.0 && k.is_finite()) {
                    return Err(MapError::InvalidSpec(format!("radial stretch needs k ≥ 1, got {k}")));
                }
                Self::radial_stretch(*k)
            }
            MapSpec::Winding { k } => {
                if *k == 0 {
                    return Err(MapError::InvalidSpec("winding needs k ≥ 1".into()));
                }
                Self::winding(*k)
            }
            MapSpec::Composition { maps } => {
                if maps.is_empty() {
                    return Err(MapError::InvalidSpec("empty composition".into()));
                }
                Self::compose(maps.iter().map(Self::from_spec).collect::<Result<_, _>>()?)
            }
            MapSpec::Fold => Self::fold(),
            MapSpec::Spiral => Self::spiral(),
        })
    }

    /// Short command-line form: `identity`, `winding:<k>`, `radial:<k>`,
    /// `mobius:<a_re>,<a_im>,<c_re>,<c_im>`, `fold`, `spiral`, or a JSON object.
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let text = text.trim();
        if text.starts_with('{') {
            let spec: MapSpec = serde_json::from_str(text).map_err(|e| MapError::InvalidSpec(e.to_string()))?;
            return Self::from_spec(&spec);
        }
        let bad = || MapError::InvalidSpec(text.to_string());
        let (head, tail) = text.split_once(':').unwrap_or((text, ""));
        let spec = match head {
            "identity" => MapSpec::Identity,
            "fold" => MapSpec::Fold,
            "spiral" => MapSpec::Spiral,
            "winding" => MapSpec::Winding { k: tail.parse().map_err(|_| bad())? },
            "radial" | "radial_stretch" => MapSpec::RadialStretch { k: tail.parse().map_err(|_| bad())? },
            "mobius" => {
                let v: Vec<f64> = tail
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                if v.len() != 4 {
                    return Err(bad());
                }
                MapSpec::Mobius {
                    a_re: v[0],
                    a_im: v[1],
                    c_re: v[2],
                    c_im: v[3],
                }
            }
            _ => return Err(bad()),
        };
        Self::from_spec(&spec)
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            MapKind::Mobius(g) => g.apply_raw(z),
            MapKind::RadialStretch(k) => {
                let r = z.norm();
                if r == 0.0 {
                    z
                } else {
                    z * r.powf(k - 1.0)
                }
            }
            MapKind::Winding(k) => {
                let r = z.norm();
                if r == 0.0 {
                    z
                } else {
                    Complex64::from_polar(r, *k as f64 * z.im.atan2(z.re))
                }
            }
            MapKind::Composition(maps) => maps.iter().fold(z, |w, m| m.apply(w)),
            MapKind::Fold => Complex64::new(z.re.abs(), z.im),
            MapKind::Spiral => {
                let (s, _) = spiral_angle(z.norm());
                z * Complex64::from_polar(1.0, s)
            }
        }
    }

    pub fn apply_point(&self, z: DiskPoint) -> Result<DiskPoint, MapError> {
        let w = self.apply(z.z());
        DiskPoint::from_complex(w).map_err(|_| MapError::ChartOverflow { re: w.re, im: w.im })
    }

    /// Closed-form `(f_z, f_z̄)`; `None` where the map is not differentiable
    /// (the branch point of a winding map with `k ≥ 2`).
    pub fn wirtinger_analytic(&self, z: Complex64) -> Option<Wirtinger> {
        let zero = Complex64::new(0.0, 0.0);
        match &self.kind {
            MapKind::Mobius(g) => Some((g.derivative(z), zero)),
            MapKind::RadialStretch(k) => {
                let r = z.norm();
                if r == 0.0 {
                    return Some(if *k == 1.0 { (Complex64::new(1.0, 0.0), zero) } else { (zero, zero) });
                }
                let f = self.apply(z);
                Some((f / z * (0.5 * (k + 1.0)), f / z.conj() * (0.5 * (k - 1.0))))
            }
            MapKind::Winding(k) => {
                let k = *k as f64;
                if z.norm() == 0.0 {
                    return (k == 1.0).then_some((Complex64::new(1.0, 0.0), zero));
                }
                let f = self.apply(z);
                Some((f / z * (0.5 * (k + 1.0)), -(f / z.conj()) * (0.5 * (k - 1.0))))
            }
            MapKind::Composition(maps) => {
                let mut w = z;
                let mut acc = (Complex64::new(1.0, 0.0), zero);
                for m in maps {
                    let (gz, gzb) = m.wirtinger_analytic(w)?;
                    let (fz, fzb) = acc;
                    acc = (gz * fz + gzb * fzb.conj(), gz * fzb + gzb * fz.conj());
                    w = m.apply(w);
                }
                Some(acc)
            }
            MapKind::Fold => {
                let s = if z.re > 0.0 {
                    1.0
                } else if z.re < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                Some((Complex64::new(0.5 * (s + 1.0), 0.0), Complex64::new(0.5 * (s - 1.0), 0.0)))
            }
            MapKind::Spiral => {
                let r = z.norm();
                let (s, ds) = spiral_angle(r);
                let e = Complex64::from_polar(1.0, s);
                let i = Complex64::i();
                let fzb = if r == 0.0 { zero } else { i * ds * e * z * z / (2.0 * r) };
                Some((e * (1.0 + i * (ds * r / 2.0)), fzb))
            }
        }
    }

    /// Central-difference Wirtinger derivatives with spacing `step`.
    pub fn wirtinger_fd(&self, z: Complex64, step: f64) -> Wirtinger {
        let h = Complex64::new(step, 0.0);
        let ih = Complex64::new(0.0, step);
        let fx = (self.apply(z + h) - self.apply(z - h)) / (2.0 * step);
        let fy = (self.apply(z + ih) - self.apply(z - ih)) / (2.0 * step);
        let i = Complex64::i();
        ((fx - i * fy) * 0.5, (fx + i * fy) * 0.5)
    }

    /// Default finite-difference spacing at `z`.
    pub fn default_step(z: Complex64) -> f64 {
        1e-5 * (1.0 - z.norm()).max(1e-6)
    }

    /// Analytic derivatives when available, otherwise finite differences.
    pub fn wirtinger_best(&self, z: Complex64) -> Wirtinger {
        self.wirtinger_analytic(z)
            .unwrap_or_else(|| self.wirtinger_fd(z, Self::default_step(z)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirtingerResult {
    pub analytic: Option<Wirtinger>,
    pub finite_difference: Wirtinger,
}

impl WirtingerResult {
    /// The preferred value: analytic when available.
    pub fn value(&self) -> Wirtinger {
        self.analytic.unwrap_or(self.finite_difference)
    }
}

pub fn wirtinger(f: &SampleMap, z: DiskPoint, step: f64) -> Result<WirtingerResult, MapError> {
    if !(step > 0.0) || z.abs() + step >= 1.0 - BOUNDARY_MARGIN {
        return Err(MapError::InvalidSpec(format!("step {step} leaves the disk at {z:?}")));
    }
    Ok(WirtingerResult {
        analytic: f.wirtinger_analytic(z.z()),
        finite_difference: f.wirtinger_fd(z.z(), step),
    })
}

/// `K_f` with a distinguished infinite value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Dilatation {
    Finite(f64),
    Infinite,
}

impl Dilatation {
    pub fn from_wirtinger((fz, fzb): Wirtinger) -> Self {
        let (a, b) = (fz.norm(), fzb.norm());
        let norm = a + b;
        if norm == 0.0 {
            return Dilatation::Finite(1.0);
        }
        let j = a * a - b * b;
        if j.abs() <= JACOBIAN_ZERO * norm * norm.max(1.0) {
            Dilatation::Infinite
        } else {
            Dilatation::Finite(norm / (a - b).abs())
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Dilatation::Finite(k) => k,
            Dilatation::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Dilatation::Finite(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionField {
    pub f_z: Complex64,
    pub f_zbar: Complex64,
    pub norm: f64,
    pub jacobian: f64,
    pub k: Dilatation,
}

impl DistortionField {
    pub fn from_wirtinger(w: Wirtinger) -> Self {
        let (a, b) = (w.0.norm(), w.1.norm());
        DistortionField {
            f_z: w.0,
            f_zbar: w.1,
            norm: a + b,
            jacobian: a * a - b * b,
            k: Dilatation::from_wirtinger(w),
        }
    }
}

pub fn distortion(f: &SampleMap, z: DiskPoint) -> DistortionField {
    DistortionField::from_wirtinger(f.wirtinger_best(z.z()))
}

pub fn dilatation(f: &SampleMap, z: DiskPoint) -> Dilatation {
    distortion(f, z).k
}

/// `K_f` from finite differences only.
pub fn dilatation_fd(f: &SampleMap, z: DiskPoint, step: f64) -> Dilatation {
    Dilatation::from_wirtinger(f.wirtinger_fd(z.z(), step))
}

pub fn jacobian(f: &SampleMap, z: DiskPoint) -> f64 {
    distortion(f, z).jacobian
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityReport {
    pub counts: Vec<usize>,
    pub supremum: usize,
    /// Two seed densities disagreed for some target.
    pub incomplete: bool,
}

/// Counts preimages of each target by Newton iteration from a seed grid,
/// repeated at twice the density to detect missed roots.
pub fn multiplicity(f: &SampleMap, targets: &[DiskPoint], seed_grid: usize, newton_tol: f64) -> MultiplicityReport {
    let seed_grid = seed_grid.max(4);
    let coarse = seeds(seed_grid);
    let fine = seeds(2 * seed_grid);
    let per_target: Vec<(usize, bool)> = targets
        .par_iter()
        .map(|w| {
            let a = preimages(f, w.z(), &coarse, newton_tol);
            let b = preimages(f, w.z(), &fine, newton_tol);
            (b.len().max(a.len()), a.len() != b.len())
        })
        .collect();
    let counts: Vec<usize> = per_target.iter().map(|p| p.0).collect();
    MultiplicityReport {
        supremum: counts.iter().copied().max().unwrap_or(0),
        incomplete: per_target.iter().any(|p| p.1),
        counts,
    }
}

fn seeds(n: usize) -> Vec<Complex64> {
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let z = Complex64::new(-1.0 + (2 * i + 1) as f64 / n as f64, -1.0 + (2 * j + 1) as f64 / n as f64);
            if z.norm() < 0.999 {
                out.push(z);
            }
        }
    }
    out
}

/// Distinct preimages of `w` reached from the given seeds.
pub fn preimages(f: &SampleMap, w: Complex64, seeds: &[Complex64], tol: f64) -> Vec<Complex64> {
    let mut found: Vec<Complex64> = Vec::new();
    for &s in seeds {
        if let Some(z) = newton(f, w, s, tol) {
            if found.iter().all(|p| (p - z).norm() > PREIMAGE_DEDUP) {
                found.push(z);
            }
        }
    }
    found.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    found
}

fn newton(f: &SampleMap, w: Complex64, mut z: Complex64, tol: f64) -> Option<Complex64> {
    for _ in 0..60 {
        let r = w - f.apply(z);
        if r.norm() < tol {
            return Some(z);
        }
        let (fz, fzb) = f.wirtinger_best(z);
        let j = fz.norm_sqr() - fzb.norm_sqr();
        if j.abs() < 1e-14 {
            return None;
        }
        let mut dz = (fz.conj() * r - fzb * r.conj()) / j;
        // Damp steps that would leave the disk.
        while (z + dz).norm() >= 1.0 - 1e-12 {
            dz *= 0.5;
            if dz.norm() < 1e-16 {
                return None;
            }
        }
        z += dz;
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionViolation {
    pub x: f64,
    pub y: f64,
    pub norm: f64,
    pub jacobian: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionCheck {
    pub grid: usize,
    pub points_checked: usize,
    /// Points where the map has no derivative (branch points), left out.
    pub excluded: usize,
    pub violations: Vec<DistortionViolation>,
    /// Violations on the refined grid `2·grid − 1`.
    pub refined_violations: usize,
    pub pass: bool,
}

fn grid_points(n: usize) -> Vec<Complex64> {
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let x = -0.95 + 1.9 * i as f64 / (n - 1) as f64;
            let y = -0.95 + 1.9 * j as f64 / (n - 1) as f64;
            let z = Complex64::new(x, y);
            if z.norm() < 0.95 {
                out.push(z);
            }
        }
    }
    out
}

fn scan(f: &SampleMap, pts: &[Complex64]) -> (usize, Vec<DistortionViolation>) {
    let results: Vec<Option<Option<DistortionViolation>>> = pts
        .par_iter()
        .map(|&z| {
            let w = f.wirtinger_analytic(z)?;
            let d = DistortionField::from_wirtinger(w);
            Some((d.jacobian.abs() <= JACOBIAN_ZERO && d.norm > NORM_ZERO).then_some(DistortionViolation {
                x: z.re,
                y: z.im,
                norm: d.norm,
                jacobian: d.jacobian,
            }))
        })
        .collect();
    let excluded = results.iter().filter(|r| r.is_none()).count();
    (excluded, results.into_iter().flatten().flatten().collect())
}

/// Checks that the Jacobian vanishes only where the derivative does, on a
/// `grid × grid` lattice of the disk and on its refinement.
pub fn finite_distortion_check(f: &SampleMap, grid: usize) -> Result<DistortionCheck, MapError> {
    if grid < 16 {
        return Err(MapError::InvalidSpec("finite distortion check needs grid ≥ 16".into()));
    }
    let pts = grid_points(grid);
    let (excluded, violations) = scan(f, &pts);
    let (_, refined) = scan(f, &grid_points(2 * grid - 1));
    Ok(DistortionCheck {
        grid,
        points_checked: pts.len() - excluded,
        excluded,
        pass: violations.is_empty() && refined.is_empty(),
        refined_violations: refined.len(),
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionSample {
    pub x: f64,
    pub y: f64,
    pub fz_abs: f64,
    pub fzbar_abs: f64,
    /// `None` encodes an infinite dilatation.
    pub k: Option<f64>,
    pub jacobian: f64,
}

/// Distortion quantities on a `grid × grid` lattice clipped to `|z| < 0.95`.
pub fn distortion_grid(f: &SampleMap, grid: usize) -> Vec<DistortionSample> {
    grid_points(grid.max(2))
        .par_iter()
        .map(|&z| {
            let d = DistortionField::from_wirtinger(f.wirtinger_best(z));
            DistortionSample {
                x: z.re,
                y: z.im,
                fz_abs: d.f_z.norm(),
                fzbar_abs: d.f_zbar.norm(),
                k: d.k.is_finite().then(|| d.k.value()),
                jacobian: d.jacobian,
            }
        })
        .collect()
}

pub fn distortion_csv(samples: &[DistortionSample]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "abs_fz", "abs_fzbar", "K", "J"])?;
    for s in samples {
        w.write_record([
            s.x.to_string(),
            s.y.to_string(),
            s.fz_abs.to_string(),
            s.fzbar_abs.to_string(),
            s.k.map(|k| k.to_string()).unwrap_or_else(|| "inf".into()),
            s.jacobian.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Winding number of a closed polyline about `p`.
pub fn winding_number(vertices: &[Complex64], p: Complex64) -> i64 {
    let n = vertices.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = vertices[i] - p;
        let b = vertices[(i + 1) % n] - p;
        total += (b / a).arg();
    }
    (total / std::f64::consts::TAU).round() as i64
}

/// Image of a sampled curve. Closed curves whose image winds `m` times as often
/// about `f(0)` as the source winds about 0 keep one traversal and carry
/// multiplicity `m`.
pub fn push_curve(f: &SampleMap, curve: &SampledCurve, post: Option<&MobiusAutomorphism>) -> Result<SampledCurve, MapError> {
    let src: Vec<Complex64> = curve.polyline.vertices().iter().map(|p| p.z()).collect();
    let image: Vec<Complex64> = src
        .iter()
        .map(|&z| {
            let w = f.apply(z);
            let w = post.map(|g| g.apply_raw(w)).unwrap_or(w);
            if w.norm() >= 1.0 - BOUNDARY_MARGIN || !w.norm().is_finite() {
                Err(MapError::ChartOverflow { re: w.re, im: w.im })
            } else {
                Ok(w)
            }
        })
        .collect::<Result<_, _>>()?;
    let mut keep = image.len();
    let mut multiplicity = curve.multiplicity;
    if curve.polyline.is_closed() {
        let center = post.map(|g| g.apply_raw(f.apply(Complex64::new(0.0, 0.0)))).unwrap_or(f.apply(Complex64::new(0.0, 0.0)));
        let w_src = winding_number(&src, Complex64::new(0.0, 0.0));
        let w_img = winding_number(&image, center);
        if w_src != 0 && w_img % w_src == 0 {
            let m = (w_img / w_src).unsigned_abs() as usize;
            if m > 1 && image.len() % m == 0 {
                keep = image.len() / m;
                multiplicity *= m as u32;
            }
        }
    }
    let pts = image[..keep]
        .iter()
        .map(|&w| DiskPoint::from_complex(w).map_err(|_| MapError::ChartOverflow { re: w.re, im: w.im }))
        .collect::<Result<Vec<_>, _>>()?;
    let polyline = Polyline::new(pts, curve.polyline.is_closed()).map_err(|e| MapError::InvalidSpec(e.to_string()))?;
    Ok(SampledCurve { polyline, multiplicity })
}

/// Maps every curve and rasterizes the images into `dom_image`. `post` is an
/// optional automorphism applied after `f` (used to recenter the image chart).
pub fn pushforward_family(
    f: &SampleMap,
    curves: &[SampledCurve],
    kind: FamilyKind,
    dom_image: &DiscretizedDomain,
    post: Option<&MobiusAutomorphism>,
) -> Result<(Vec<SampledCurve>, CurveFamily), MapError> {
    let images = curves
        .par_iter()
        .map(|c| push_curve(f, c, post))
        .collect::<Result<Vec<_>, _>>()?;
    let family = CurveFamily::rasterize(kind, &images, dom_image)?;
    Ok((images, family))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::{band_circles, sample_circle};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn smooth_maps() -> Vec<SampleMap> {
        let g = MobiusAutomorphism::new(c(1.2, 0.3), c(0.2, -0.6)).unwrap();
        vec![
            SampleMap::mobius(g),
            SampleMap::winding(3),
            SampleMap::radial_stretch(2.5),
            SampleMap::spiral(),
            SampleMap::compose(vec![SampleMap::winding(2), SampleMap::mobius(g)]),
        ]
    }

    #[test]
    fn identity_derivatives() {
        let id = SampleMap::identity();
        let z = DiskPoint::new(0.3, -0.2).unwrap();
        let w = wirtinger(&id, z, 1e-4).unwrap();
        assert_eq!(w.value(), (c(1.0, 0.0), c(0.0, 0.0)));
        assert!((w.finite_difference.0 - c(1.0, 0.0)).norm() < 1e-10);
        assert!(wirtinger(&id, DiskPoint::new(0.9999, 0.0).unwrap(), 1e-3).is_err());
    }

    #[test]
    fn winding_and_stretch_wirtinger_magnitudes() {
        // Oracle: polar differentiation of r e^{ikθ} and z|z|^{k−1}.
        for k in [2u32, 3, 5] {
            let kf = k as f64;
            let z = c(0.4, 0.3);
            let r = z.norm();
            let (fz, fzb) = SampleMap::winding(k).wirtinger_analytic(z).unwrap();
            assert!((fz.norm() - (kf + 1.0) / 2.0).abs() < 1e-13);
            assert!((fzb.norm() - (kf - 1.0) / 2.0).abs() < 1e-13);
            let (fz, fzb) = SampleMap::radial_stretch(kf).wirtinger_analytic(z).unwrap();
            assert!((fz.norm() - r.powf(kf - 1.0) * (kf + 1.0) / 2.0).abs() < 1e-13);
            assert!((fzb.norm() - r.powf(kf - 1.0) * (kf - 1.0) / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn dilatation_examples() {
        let z = DiskPoint::new(-0.2, 0.55).unwrap();
        let g = MobiusAutomorphism::new(c(1.2, 0.3), c(0.2, -0.6)).unwrap();
        assert_eq!(dilatation(&SampleMap::mobius(g), z), Dilatation::Finite(1.0));
        for k in [2u32, 3, 5] {
            assert!((dilatation(&SampleMap::winding(k), z).value() - k as f64).abs() < 1e-12);
            assert!((dilatation(&SampleMap::radial_stretch(k as f64), z).value() - k as f64).abs() < 1e-12);
            let step = SampleMap::default_step(z.z());
            assert!((dilatation_fd(&SampleMap::winding(k), z, step).value() - k as f64).abs() < 1e-4);
        }
        // Zero derivative: K = 1 by convention.
        assert_eq!(dilatation(&SampleMap::radial_stretch(2.0), DiskPoint::ORIGIN), Dilatation::Finite(1.0));
        // Fold on its crease: J = 0 with a nonzero derivative.
        assert_eq!(dilatation(&SampleMap::fold(), DiskPoint::new(0.0, 0.3).unwrap()), Dilatation::Infinite);
        assert_eq!(dilatation(&SampleMap::fold(), DiskPoint::new(-0.1, 0.3).unwrap()), Dilatation::Finite(1.0));
    }

    #[test]
    fn analytic_and_finite_differences_agree_to_second_order() {
        let z = c(0.35, -0.25);
        for f in smooth_maps() {
            let exact = f.wirtinger_analytic(z).unwrap();
            let err = |h: f64| {
                let (a, b) = f.wirtinger_fd(z, h);
                (a - exact.0).norm() + (b - exact.1).norm()
            };
            let (e1, e2) = (err(1e-3), err(5e-4));
            assert!(e1 < 1e-4, "{f}: {e1}");
            // Halving the step cuts the error by about four.
            assert!(e2 < e1 / 3.0, "{f}: {e1} {e2}");
        }
    }

    #[test]
    fn multiplicity_examples() {
        let targets = [DiskPoint::new(0.5, 0.0).unwrap()];
        let w3 = multiplicity(&SampleMap::winding(3), &targets, 24, 1e-12);
        assert_eq!(w3.counts, vec![3]);
        assert!(!w3.incomplete);
        // Oracle: closed-form preimages 0.5 e^{2πij/3}.
        let pre = preimages(&SampleMap::winding(3), c(0.5, 0.0), &seeds(24), 1e-12);
        for z in &pre {
            assert!((z.norm() - 0.5).abs() < 1e-9);
            let a = 3.0 * z.im.atan2(z.re);
            assert!((a / std::f64::consts::TAU - (a / std::f64::consts::TAU).round()).abs() < 1e-9);
        }
        let g = MobiusAutomorphism::new(c(1.2, 0.3), c(0.2, -0.6)).unwrap();
        let m = multiplicity(&SampleMap::mobius(g), &targets, 16, 1e-12);
        assert_eq!(m.supremum, 1);
        let zero = multiplicity(&SampleMap::winding(4), &[DiskPoint::ORIGIN], 16, 1e-12);
        assert_eq!(zero.counts, vec![1]);
    }

    #[test]
    fn finite_distortion_examples() {
        let g = MobiusAutomorphism::new(c(1.2, 0.3), c(0.2, -0.6)).unwrap();
        let m = finite_distortion_check(&SampleMap::mobius(g), 16).unwrap();
        assert!(m.pass && m.violations.is_empty());
        let w = finite_distortion_check(&SampleMap::winding(3), 17).unwrap();
        assert!(w.pass);
        assert_eq!(w.excluded, 1);
        let fold = finite_distortion_check(&SampleMap::fold(), 16).unwrap();
        assert!(!fold.pass);
        assert!(fold.refined_violations > 0);
        assert!(finite_distortion_check(&SampleMap::fold(), 8).is_err());
    }

    #[test]
    fn pushforward_examples() {
        let dom = DiscretizedDomain::polar(0.5, 1.5, 8, 64).unwrap();
        let circles = band_circles(&dom, 512).unwrap();
        let (imgs, fam) =
            pushforward_family(&SampleMap::identity(), &circles, FamilyKind::CircleFamily, &dom, None).unwrap();
        assert_eq!(imgs, circles);
        assert!(fam.curves.iter().all(|c| c.multiplicity == 1));

        let (imgs, fam) = pushforward_family(&SampleMap::winding(2), &circles, FamilyKind::CircleFamily, &dom, None).unwrap();
        for (img, src) in imgs.iter().zip(&circles) {
            assert_eq!(img.multiplicity, 2);
            let r = src.polyline.vertices()[0].abs();
            assert!(img.polyline.vertices().iter().all(|p| (p.abs() - r).abs() < 1e-14));
            assert_eq!(img.polyline.vertices().len(), 256);
        }
        assert!(fam.curves.iter().all(|c| c.multiplicity == 2));

        let wide = DiscretizedDomain::polar(0.0, 1.5, 8, 64).unwrap();
        let (imgs, _) =
            pushforward_family(&SampleMap::radial_stretch(2.0), &circles, FamilyKind::CircleFamily, &wide, None).unwrap();
        for (img, src) in imgs.iter().zip(&circles) {
            let r = src.polyline.vertices()[0].abs();
            assert!(img.polyline.vertices().iter().all(|p| (p.abs() - r * r).abs() < 1e-14));
        }

        let big = vec![SampledCurve::once(sample_circle(0.99, 64).unwrap())];
        let g = MobiusAutomorphism::translation(20.0, 0.0);
        assert!(matches!(
            pushforward_family(&SampleMap::mobius(g), &big, FamilyKind::CircleFamily, &dom, None),
            Err(MapError::ChartOverflow { .. })
        ));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(SampleMap::parse("winding:3").unwrap(), SampleMap::winding(3));
        assert_eq!(SampleMap::parse("radial:2").unwrap(), SampleMap::radial_stretch(2.0));
        assert_eq!(SampleMap::parse(r#"{"kind": "winding", "k": 3}"#).unwrap(), SampleMap::winding(3));
        assert!(SampleMap::parse("mobius:1,0,0,0").is_ok());
        assert!(SampleMap::parse("winding:0").is_err());
        assert!(SampleMap::parse("radial:0.5").is_err());
        assert!(SampleMap::parse("twist").is_err());
    }

    fn arb_point() -> impl Strategy<Value = Complex64> {
        (0.05f64..0.6, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dilatation_is_invariant_under_mobius_pre_and_post_composition(z in arb_point(), k in 2u32..5) {
            let g1 = MobiusAutomorphism::translation(0.3, 1.1);
            let g2 = MobiusAutomorphism::translation(0.5, -0.4);
            let f = SampleMap::winding(k);
            let h = SampleMap::compose(vec![SampleMap::mobius(g1), f.clone(), SampleMap::mobius(g2)]);
            let step = 1e-5;
            let kh = Dilatation::from_wirtinger(h.wirtinger_fd(z, step)).value();
            let kf = Dilatation::from_wirtinger(f.wirtinger_fd(g1.apply_raw(z), step)).value();
            prop_assert!((kh - kf).abs() < 1e-6);
        }

        #[test]
        fn jacobian_composition_law(z in arb_point()) {
            let g = MobiusAutomorphism::new(c(1.2, 0.3), c(0.2, -0.6)).unwrap();
            let outer = SampleMap::compose(vec![SampleMap::radial_stretch(1.5), SampleMap::mobius(g)]);
            let inner = SampleMap::spiral();
            let both = SampleMap::compose(vec![inner.clone(), outer.clone()]);
            let jf = DistortionField::from_wirtinger(inner.wirtinger_analytic(z).unwrap()).jacobian;
            let jg = DistortionField::from_wirtinger(outer.wirtinger_analytic(inner.apply(z)).unwrap()).jacobian;
            let jh = DistortionField::from_wirtinger(both.wirtinger_analytic(z).unwrap()).jacobian;
            prop_assert!((jh - jg * jf).abs() < 1e-8 * jh.abs().max(1.0));
        }

        #[test]
        fn winding_multiplicity_equals_k(z in arb_point(), k in 1u32..5) {
            let report = multiplicity(&SampleMap::winding(k), &[DiskPoint::from_complex(z).unwrap()], 24, 1e-12);
            prop_assert_eq!(report.counts[0], k as usize);
        }
    }
}
