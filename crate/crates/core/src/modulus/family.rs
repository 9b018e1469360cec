//! Curve families rasterized onto a [`DiscretizedDomain`].

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::domain::{DiscretizedDomain, GridGeometry};
use super::ModulusError;
use crate::disk::{conformal_factor, DiskPoint, Polyline};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Incidence {
    pub cell: usize,
    pub length_euclid: f64,
    pub length_hyp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    /// Sorted by cell index, one entry per cell.
    pub incidences: Vec<Incidence>,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Connecting,
    CircleFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFamily {
    pub kind: FamilyKind,
    pub curves: Vec<Curve>,
}

/// Sampled curve with its traversal count.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub polyline: Polyline,
    pub multiplicity: u32,
}

impl SampledCurve {
    pub fn once(polyline: Polyline) -> Self {
        SampledCurve {
            polyline,
            multiplicity: 1,
        }
    }
}

impl CurveFamily {
    pub fn empty(kind: FamilyKind) -> Self {
        CurveFamily {
            kind,
            curves: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Rasterizes sampled curves into `dom`. Every curve must meet the domain.
    pub fn rasterize(kind: FamilyKind, curves: &[SampledCurve], dom: &DiscretizedDomain) -> Result<Self, ModulusError> {
        let mut out = Vec::with_capacity(curves.len());
        for (i, c) in curves.iter().enumerate() {
            if c.multiplicity == 0 {
                return Err(ModulusError::Precondition(format!("curve {i} has multiplicity 0")));
            }
            let incidences = rasterize_polyline(&c.polyline, dom);
            if incidences.is_empty() {
                return Err(ModulusError::EmptyCurve { index: i });
            }
            out.push(Curve {
                incidences,
                multiplicity: c.multiplicity,
            });
        }
        Ok(CurveFamily { kind, curves: out })
    }

    /// The same curves with every multiplicity multiplied by `k`.
    pub fn with_multiplicity_factor(&self, k: u32) -> Self {
        let mut out = self.clone();
        for c in &mut out.curves {
            c.multiplicity *= k;
        }
        out
    }

    /// Union of two families on the same domain.
    pub fn union(&self, other: &CurveFamily) -> Self {
        let mut out = self.clone();
        out.curves.extend(other.curves.iter().cloned());
        out
    }

    pub fn validate(&self, dom: &DiscretizedDomain) -> Result<(), ModulusError> {
        for (i, c) in self.curves.iter().enumerate() {
            if c.incidences.is_empty() {
                return Err(ModulusError::EmptyCurve { index: i });
            }
            for inc in &c.incidences {
                if inc.cell >= dom.len() || !(inc.length_euclid >= 0.0) || !(inc.length_hyp >= 0.0) {
                    return Err(ModulusError::Precondition(format!("curve {i} has an invalid incidence")));
                }
            }
        }
        Ok(())
    }
}

/// Clips every segment at the grid lines and credits each piece to the cell
/// containing its midpoint. Hyperbolic piece length uses the conformal factor
/// at that midpoint.
pub fn rasterize_polyline(curve: &Polyline, dom: &DiscretizedDomain) -> Vec<Incidence> {
    let mut acc: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for (a, b) in curve.segments() {
        let (p, q) = (a.z(), b.z());
        let d = q - p;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let mut ts = vec![0.0];
        ts.extend(dom.crossings(p, q));
        ts.push(1.0);
        for w in ts.windows(2) {
            let piece = (w[1] - w[0]) * len;
            if piece <= 0.0 {
                continue;
            }
            let mid = p + d * (0.5 * (w[0] + w[1]));
            if let Some(cell) = dom.locate(mid) {
                let e = acc.entry(cell).or_insert((0.0, 0.0));
                e.0 += piece;
                e.1 += piece * conformal_factor(mid);
            }
        }
    }
    acc.into_iter()
        .map(|(cell, (le, lh))| Incidence {
            cell,
            length_euclid: le,
            length_hyp: lh,
        })
        .collect()
}

/// Closed polygon with `n` vertices on the Euclidean circle `|z| = radius`.
pub fn sample_circle(radius: f64, n: usize) -> Result<Polyline, ModulusError> {
    let pts = (0..n)
        .map(|k| DiskPoint::from_polar(radius, TAU * k as f64 / n as f64))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Polyline::new(pts, true)?)
}

/// Radial segments across a polar grid, one through the middle of each angular
/// sector, sampled with `samples` points.
pub fn radial_family(dom: &DiscretizedDomain, samples: usize) -> Result<Vec<SampledCurve>, ModulusError> {
    let GridGeometry::Polar { radial_edges, n_theta } = &dom.geometry else {
        return Err(ModulusError::Precondition("radial family needs a polar grid".into()));
    };
    let (r1, r2) = (radial_edges[0], *radial_edges.last().unwrap());
    let samples = samples.max(2);
    (0..*n_theta)
        .map(|j| {
            let theta = TAU * (j as f64 + 0.5) / *n_theta as f64;
            let u = Complex64::from_polar(1.0, theta);
            let pts = (0..samples)
                .map(|i| {
                    let r = r1 + (r2 - r1) * i as f64 / (samples - 1) as f64;
                    DiskPoint::from_complex(u * r)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SampledCurve::once(Polyline::open(pts)?))
        })
        .collect()
}

/// One circle per radial band of a polar grid, at the hyperbolic middle of the band.
pub fn band_circles(dom: &DiscretizedDomain, points_per_circle: usize) -> Result<Vec<SampledCurve>, ModulusError> {
    let GridGeometry::Polar { radial_edges, .. } = &dom.geometry else {
        return Err(ModulusError::Precondition("circle family needs a polar grid".into()));
    };
    radial_edges
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (crate::disk::hyp_radius(w[0]) + crate::disk::hyp_radius(w[1]));
            Ok(SampledCurve::once(sample_circle(crate::disk::euclid_radius(mid), points_per_circle)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::{hyp_length, Window};

    #[test]
    fn rasterized_lengths_sum_to_curve_length() {
        let dom = DiscretizedDomain::polar(0.0, 2.0, 16, 32).unwrap();
        let circle = sample_circle(0.5, 500).unwrap();
        let inc = rasterize_polyline(&circle, &dom);
        let le: f64 = inc.iter().map(|i| i.length_euclid).sum();
        assert!((le - circle.euclidean_length()).abs() < 1e-12);
        let lh: f64 = inc.iter().map(|i| i.length_hyp).sum();
        assert!((lh - hyp_length(&circle)).abs() / lh < 1e-5, "{lh}");
        assert!(inc.windows(2).all(|w| w[0].cell < w[1].cell));

        let cart = DiscretizedDomain::cartesian(Window::square(0.5), 10, 10).unwrap();
        let seg = Polyline::open(vec![DiskPoint::new(-0.5, -0.3).unwrap(), DiskPoint::new(0.49, 0.41).unwrap()]).unwrap();
        let inc = rasterize_polyline(&seg, &cart);
        let le: f64 = inc.iter().map(|i| i.length_euclid).sum();
        assert!((le - seg.euclidean_length()).abs() < 1e-12);
    }

    #[test]
    fn curves_outside_the_domain_are_rejected() {
        let dom = DiscretizedDomain::polar(0.5, 1.0, 4, 8).unwrap();
        let tiny = SampledCurve::once(sample_circle(0.01, 16).unwrap());
        assert!(matches!(
            CurveFamily::rasterize(FamilyKind::CircleFamily, &[tiny], &dom),
            Err(ModulusError::EmptyCurve { index: 0 })
        ));
    }

    #[test]
    fn band_circles_stay_in_their_band() {
        let dom = DiscretizedDomain::polar(0.5, 1.5, 8, 64).unwrap();
        let fam = CurveFamily::rasterize(FamilyKind::CircleFamily, &band_circles(&dom, 1024).unwrap(), &dom).unwrap();
        for (band, c) in fam.curves.iter().enumerate() {
            assert_eq!(c.incidences.len(), 64);
            assert!(c.incidences.iter().all(|i| i.cell / 64 == band));
        }
    }
}
