//! Finitely generated Fuchsian groups acting on the disk.
//!
//! Groups are handled through a finite truncation: all reduced words up to a
//! maximal length. Every quantity derived from the truncation (quotient
//! distance, Dirichlet domain, injectivity radius) is therefore an
//! approximation from the correct side and carries the word-length bound.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disk::{hyp_distance, DiskPoint, GeometryError, MobiusAutomorphism};

/// Coefficient distance below which two enumerated elements are identified.
pub const DEDUP_TOLERANCE: f64 = 1e-9;
/// Elements must satisfy `|Re a| ≥ 1 + HYPERBOLIC_MARGIN`.
pub const HYPERBOLIC_MARGIN: f64 = 1e-12;
/// Default cap on the number of enumerated elements.
pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;
/// Boundary tolerance of Dirichlet-domain membership.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FuchsianError {
    #[error("element {word} is elliptic or parabolic (|Re a| = {half_trace})")]
    EllipticElement { word: String, half_trace: f64 },
    #[error("enumeration exceeded the element cap of {cap}")]
    GrowthOverflow { cap: usize },
    #[error("no enumerated element brings the point into the fundamental domain")]
    NotReduced,
    #[error("normal neighborhood radius {radius} must lie in (0, {limit})")]
    RadiusTooLarge { radius: f64, limit: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("group file: {0}")]
    Io(#[from] std::io::Error),
    #[error("group file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Letter of a word: generator index and whether it is inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    fn inverted(self) -> Letter {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

pub fn format_word(word: &[Letter]) -> String {
    if word.is_empty() {
        return "I".into();
    }
    word.iter()
        .map(|l| {
            if l.inverse {
                format!("g{}^-1", l.generator)
            } else {
                format!("g{}", l.generator)
            }
        })
        .collect::<Vec<_>>()
        .join("·")
}

/// JSON form of a generator, `g(z) = (a z + c) / (c̄ z + ā)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub a_re: f64,
    pub a_im: f64,
    pub c_re: f64,
    pub c_im: f64,
}

impl From<MobiusAutomorphism> for GeneratorSpec {
    fn from(g: MobiusAutomorphism) -> Self {
        GeneratorSpec {
            a_re: g.a().re,
            a_im: g.a().im,
            c_re: g.c().re,
            c_im: g.c().im,
        }
    }
}

/// Group definition file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFile {
    pub generators: Vec<GeneratorSpec>,
    pub max_word_length: usize,
    #[serde(default = "default_cap")]
    pub element_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_ELEMENT_CAP
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuchsianGroup {
    pub generators: Vec<MobiusAutomorphism>,
    pub max_word_length: usize,
    pub element_cap: usize,
}

impl FuchsianGroup {
    pub fn new(generators: Vec<MobiusAutomorphism>, max_word_length: usize) -> Self {
        FuchsianGroup {
            generators,
            max_word_length: max_word_length.max(1),
            element_cap: DEFAULT_ELEMENT_CAP,
        }
    }

    pub fn trivial() -> Self {
        Self::new(Vec::new(), 1)
    }

    /// Cyclic group generated by a hyperbolic translation of length `length`
    /// along the real diameter.
    pub fn cyclic(length: f64, max_word_length: usize) -> Self {
        Self::new(vec![MobiusAutomorphism::translation(length, 0.0)], max_word_length)
    }

    /// Genus-2 surface group of the regular octagon with angles π/4: generators
    /// `g_k = [[1+√2, √(2+2√2) e^{ikπ/4}], [·, ·]]`, `k = 0..3`, with relator
    /// `g0 g1⁻¹ g2 g3⁻¹ g0⁻¹ g1 g2⁻¹ g3`.
    pub fn genus2(max_word_length: usize) -> Self {
        let s2 = std::f64::consts::SQRT_2;
        let a = Complex64::new(1.0 + s2, 0.0);
        let b = (2.0 + 2.0 * s2).sqrt();
        let generators = (0..4)
            .map(|k| {
                let c = Complex64::from_polar(b, k as f64 * std::f64::consts::FRAC_PI_4);
                MobiusAutomorphism::new(a, c).expect("determinant is one")
            })
            .collect();
        Self::new(generators, max_word_length)
    }

    pub fn from_file_spec(spec: &GroupFile) -> Result<Self, FuchsianError> {
        let generators = spec
            .generators
            .iter()
            .map(|g| {
                MobiusAutomorphism::new(
                    Complex64::new(g.a_re, g.a_im),
                    Complex64::new(g.c_re, g.c_im),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FuchsianGroup {
            generators,
            max_word_length: spec.max_word_length.max(1),
            element_cap: spec.element_cap,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, FuchsianError> {
        let spec: GroupFile = serde_json::from_str(text)?;
        Self::from_file_spec(&spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FuchsianError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_file_spec(&self) -> GroupFile {
        GroupFile {
            generators: self.generators.iter().map(|&g| g.into()).collect(),
            max_word_length: self.max_word_length,
            element_cap: self.element_cap,
        }
    }

    pub fn with_max_word_length(&self, max_word_length: usize) -> Self {
        FuchsianGroup {
            max_word_length: max_word_length.max(1),
            ..self.clone()
        }
    }

    /// All reduced words up to `max_word_length`, deduplicated, identity excluded,
    /// ordered by word length then lexicographically.
    pub fn enumerate(&self) -> Result<EnumeratedGroup, FuchsianError> {
        let letters: Vec<(Letter, MobiusAutomorphism)> = self
            .generators
            .iter()
            .enumerate()
            .flat_map(|(i, g)| {
                [
                    (Letter { generator: i, inverse: false }, *g),
                    (Letter { generator: i, inverse: true }, g.invert()),
                ]
            })
            .collect();

        let mut elements: Vec<GroupElement> = Vec::new();
        let mut index = DedupIndex::default();
        let mut frontier: Vec<(Vec<Letter>, MobiusAutomorphism)> = vec![(Vec::new(), MobiusAutomorphism::IDENTITY)];

        for _ in 0..self.max_word_length {
            let mut next = Vec::new();
            for (word, map) in &frontier {
                for (letter, lmap) in &letters {
                    if word.last() == Some(&letter.inverted()) {
                        continue;
                    }
                    let candidate = map.compose(lmap).canonical_sign();
                    let mut cword = word.clone();
                    cword.push(*letter);
                    if candidate.is_identity(DEDUP_TOLERANCE) {
                        continue;
                    }
                    if index.find(&candidate, &elements).is_some() {
                        continue;
                    }
                    if candidate.half_trace() < 1.0 + HYPERBOLIC_MARGIN {
                        return Err(FuchsianError::EllipticElement {
                            word: format_word(&cword),
                            half_trace: candidate.half_trace(),
                        });
                    }
                    index.insert(&candidate, elements.len());
                    elements.push(GroupElement {
                        map: candidate,
                        word: cword.clone(),
                    });
                    if elements.len() > self.element_cap {
                        return Err(FuchsianError::GrowthOverflow { cap: self.element_cap });
                    }
                    next.push((cword, candidate));
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        Ok(EnumeratedGroup {
            elements,
            max_word_length: self.max_word_length,
        })
    }
}

/// Hash buckets on coefficients for near-duplicate detection.
#[derive(Default)]
struct DedupIndex {
    buckets: HashMap<[i64; 4], Vec<usize>>,
}

const BUCKET: f64 = 1e-3;

impl DedupIndex {
    fn coords(g: &MobiusAutomorphism) -> [f64; 4] {
        [g.a().re, g.a().im, g.c().re, g.c().im]
    }

    fn key(c: &[f64; 4]) -> [i64; 4] {
        c.map(|v| (v / BUCKET).floor() as i64)
    }

    fn tolerance(g: &MobiusAutomorphism) -> f64 {
        DEDUP_TOLERANCE * g.a().norm().max(1.0)
    }

    fn insert(&mut self, g: &MobiusAutomorphism, idx: usize) {
        self.buckets.entry(Self::key(&Self::coords(g))).or_default().push(idx);
    }

    fn find(&self, g: &MobiusAutomorphism, elements: &[GroupElement]) -> Option<usize> {
        let c = Self::coords(g);
        let base = Self::key(&c);
        let tol = Self::tolerance(g);
        // Offsets to probe per coordinate: only neighbours within tolerance of a cell wall.
        let options: Vec<Vec<i64>> = c
            .iter()
            .zip(base)
            .map(|(v, k)| {
                let frac = v / BUCKET - k as f64;
                let mut o = vec![0];
                if frac * BUCKET < tol {
                    o.push(-1);
                }
                if (1.0 - frac) * BUCKET < tol {
                    o.push(1);
                }
                o
            })
            .collect();
        for d0 in &options[0] {
            for d1 in &options[1] {
                for d2 in &options[2] {
                    for d3 in &options[3] {
                        let key = [base[0] + d0, base[1] + d1, base[2] + d2, base[3] + d3];
                        if let Some(list) = self.buckets.get(&key) {
                            for &i in list {
                                if elements[i].map.coefficient_distance(g) < tol {
                                    return Some(i);
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub map: MobiusAutomorphism,
    pub word: Vec<Letter>,
}

/// Finite truncation of a Fuchsian group (identity excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedGroup {
    pub elements: Vec<GroupElement>,
    pub max_word_length: usize,
}

impl EnumeratedGroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn maps(&self) -> impl Iterator<Item = &MobiusAutomorphism> {
        self.elements.iter().map(|e| &e.map)
    }
}

/// Upper bound on the quotient distance `inf_g h(z1, g z2)` over the truncation
/// (the identity included).
pub fn quotient_distance(z1: DiskPoint, z2: DiskPoint, group: &EnumeratedGroup) -> f64 {
    group
        .maps()
        .map(|g| hyp_distance(z1, g.apply(z2)))
        .fold(hyp_distance(z1, z2), f64::min)
}

/// Half the minimal displacement `min_{g ≠ I} h(z0, g z0) / 2`; `+∞` for the trivial group.
pub fn injectivity_radius(z0: DiskPoint, group: &EnumeratedGroup) -> f64 {
    group
        .maps()
        .map(|g| 0.5 * hyp_distance(z0, g.apply(z0)))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

/// Truncated Dirichlet polygon: points closer to the center than to any
/// enumerated translate of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletDomain {
    pub center: DiskPoint,
    pub constraints: Vec<MobiusAutomorphism>,
    /// Images `g(center)`, aligned with `constraints`.
    pub translates: Vec<DiskPoint>,
}

impl DirichletDomain {
    pub fn new(center: DiskPoint, group: &EnumeratedGroup) -> Self {
        let mut constraints = Vec::new();
        let mut translates: Vec<DiskPoint> = Vec::new();
        for g in group.maps() {
            let t = g.apply(center);
            if translates.iter().any(|&u| (u.z() - t.z()).norm() < DEDUP_TOLERANCE) {
                continue;
            }
            constraints.push(*g);
            translates.push(t);
        }
        DirichletDomain {
            center,
            constraints,
            translates,
        }
    }

    pub fn membership(&self, z: DiskPoint) -> Membership {
        dirichlet_membership(z, self)
    }

    /// Boundary radius along the geodesic ray from the center in direction `theta`,
    /// by bisection on the hyperbolic distance. `None` when the ray stays inside
    /// up to `max_radius`.
    pub fn boundary_along(&self, theta: f64, max_radius: f64) -> Option<f64> {
        let back = MobiusAutomorphism::to_zero(self.center).invert();
        let at = |r: f64| back.apply_raw(Complex64::from_polar(crate::disk::euclid_radius(r), theta));
        let inside = |r: f64| {
            DiskPoint::from_complex(at(r))
                .map(|p| self.membership(p) != Membership::Outside)
                .unwrap_or(false)
        };
        if inside(max_radius) {
            return None;
        }
        let (mut lo, mut hi) = (0.0, max_radius);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

pub fn dirichlet_membership(z: DiskPoint, dom: &DirichletDomain) -> Membership {
    let d0 = hyp_distance(z, dom.center);
    let mut on_boundary = false;
    for &t in &dom.translates {
        let d = hyp_distance(z, t);
        if d0 > d + MEMBERSHIP_TOLERANCE {
            return Membership::Outside;
        }
        if d0 >= d - MEMBERSHIP_TOLERANCE {
            on_boundary = true;
        }
    }
    if on_boundary {
        Membership::Boundary
    } else {
        Membership::Inside
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub representative: DiskPoint,
    /// Element `g` with `g(z) = representative`.
    pub element: MobiusAutomorphism,
    pub steps: usize,
}

/// Greedy reduction into the Dirichlet domain: repeatedly apply the enumerated
/// element that brings the point closest to the center.
pub fn project_to_fundamental(
    z: DiskPoint,
    group: &EnumeratedGroup,
    dom: &DirichletDomain,
) -> Result<Projection, FuchsianError> {
    let mut current = z;
    let mut acc = MobiusAutomorphism::IDENTITY;
    let mut steps = 0;
    let limit = group.len() + 1;
    loop {
        if dom.membership(current) != Membership::Outside {
            return Ok(Projection {
                representative: current,
                element: acc,
                steps,
            });
        }
        let here = hyp_distance(current, dom.center);
        let best = group
            .maps()
            .map(|g| (g, hyp_distance(g.apply(current), dom.center)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((g, d)) if d < here - MEMBERSHIP_TOLERANCE && steps < limit => {
                current = g.apply(current);
                acc = g.compose(&acc);
                steps += 1;
            }
            _ => return Err(FuchsianError::NotReduced),
        }
    }
}

/// Point of the quotient surface, stored by its representative in the Dirichlet domain.
#[derive(Debug, Clone)]
pub struct SurfacePoint {
    pub representative: DiskPoint,
    pub group: Arc<EnumeratedGroup>,
}

impl SurfacePoint {
    pub fn new(
        z: DiskPoint,
        group: Arc<EnumeratedGroup>,
        dom: &DirichletDomain,
    ) -> Result<Self, FuchsianError> {
        let projection = project_to_fundamental(z, &group, dom)?;
        Ok(SurfacePoint {
            representative: projection.representative,
            group,
        })
    }

    pub fn distance(&self, other: &SurfacePoint) -> f64 {
        quotient_distance(self.representative, other.representative, &self.group)
    }
}

/// Ball about a surface point on which the quotient distance agrees with the
/// disk distance. The radius is kept below half the injectivity radius so that
/// any two points of the ball are closer to each other than to any other
/// translate.
#[derive(Debug, Clone)]
pub struct NormalNeighborhood {
    pub center: SurfacePoint,
    pub radius: f64,
}

impl NormalNeighborhood {
    pub fn new(center: SurfacePoint, radius: f64) -> Result<Self, FuchsianError> {
        let limit = 0.5 * injectivity_radius(center.representative, &center.group);
        if !(radius > 0.0 && radius < limit) {
            return Err(FuchsianError::RadiusTooLarge { radius, limit });
        }
        Ok(NormalNeighborhood { center, radius })
    }

    /// Largest admissible radius (exclusive).
    pub fn radius_limit(center: &SurfacePoint) -> f64 {
        0.5 * injectivity_radius(center.representative, &center.group)
    }

    /// Random point of the ball (uniform in hyperbolic radius and angle).
    pub fn sample_point(&self, rng: &mut impl Rng) -> DiskPoint {
        let r = self.radius * rng.gen::<f64>();
        let theta = std::f64::consts::TAU * rng.gen::<f64>();
        let back = MobiusAutomorphism::to_zero(self.center.representative).invert();
        back.apply(DiskPoint::from_polar(crate::disk::euclid_radius(r), theta).expect("interior"))
    }

    /// Largest deviation `|quotient_distance − hyp_distance|` over `samples`
    /// random pairs of the ball.
    pub fn local_isometry_defect(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| {
                let a = self.sample_point(&mut rng);
                let b = self.sample_point(&mut rng);
                (quotient_distance(a, b, &self.center.group) - hyp_distance(a, b)).abs()
            })
            .fold(0.0, f64::max)
    }
}
