//! Cell decompositions of a chart region: polar grids for ring problems,
//! Cartesian grids for generic families.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ModulusError;
use crate::disk::{conformal_factor, euclid_radius, DiskPoint, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub center: DiskPoint,
    pub area_euclid: f64,
    pub area_hyp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridGeometry {
    /// Annular sectors about the origin. `radial_edges` are Euclidean radii;
    /// sector `j` spans angles `[j, j + 1] · 2π / n_theta`.
    Polar { radial_edges: Vec<f64>, n_theta: usize },
    Cartesian { window: Window, nx: usize, ny: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedDomain {
    pub cells: Vec<Cell>,
    pub geometry: GridGeometry,
}

impl DiscretizedDomain {
    /// Polar grid on the ring `r_inner < h(0, z) < r_outer`, uniform in the
    /// hyperbolic radius.
    pub fn polar(r_inner: f64, r_outer: f64, n_r: usize, n_theta: usize) -> Result<Self, ModulusError> {
        if !(r_inner >= 0.0 && r_inner < r_outer) || n_r == 0 {
            return Err(ModulusError::Precondition(format!(
                "polar grid needs 0 ≤ r_inner < r_outer and n_r ≥ 1 (got {r_inner}, {r_outer}, {n_r})"
            )));
        }
        let edges = (0..=n_r)
            .map(|i| euclid_radius(r_inner + (r_outer - r_inner) * i as f64 / n_r as f64))
            .collect();
        Self::polar_with_edges(edges, n_theta)
    }

    /// Polar grid with explicit Euclidean radial edges.
    pub fn polar_with_edges(radial_edges: Vec<f64>, n_theta: usize) -> Result<Self, ModulusError> {
        if radial_edges.len() < 2 || n_theta < 3 {
            return Err(ModulusError::Precondition("polar grid needs ≥ 2 edges and n_theta ≥ 3".into()));
        }
        if radial_edges[0] < 0.0
            || radial_edges.windows(2).any(|w| !(w[1] > w[0]))
            || *radial_edges.last().unwrap() >= 1.0 - 1e-9
        {
            return Err(ModulusError::Precondition(
                "radial edges must increase strictly inside [0, 1)".into(),
            ));
        }
        let dtheta = TAU / n_theta as f64;
        let mut cells = Vec::with_capacity((radial_edges.len() - 1) * n_theta);
        for w in radial_edges.windows(2) {
            let (r1, r2) = (w[0], w[1]);
            let area_euclid = 0.5 * dtheta * (r2 * r2 - r1 * r1);
            // Radius where the conformal factor squared equals the exact mean over the sector.
            let rc = (1.0 - ((1.0 - r1 * r1) * (1.0 - r2 * r2)).sqrt()).sqrt();
            let lambda = 2.0 / (1.0 - rc * rc);
            for j in 0..n_theta {
                let theta = dtheta * (j as f64 + 0.5);
                cells.push(Cell {
                    center: DiskPoint::from_polar(rc, theta)?,
                    area_euclid,
                    area_hyp: area_euclid * lambda * lambda,
                });
            }
        }
        Ok(DiscretizedDomain {
            cells,
            geometry: GridGeometry::Polar {
                radial_edges,
                n_theta,
            },
        })
    }

    /// Uniform `nx × ny` grid on a window whose closure lies in the open disk.
    pub fn cartesian(window: Window, nx: usize, ny: usize) -> Result<Self, ModulusError> {
        if nx == 0 || ny == 0 || !(window.x_max > window.x_min && window.y_max > window.y_min) {
            return Err(ModulusError::Precondition("empty Cartesian grid".into()));
        }
        let corner = window.x_min.abs().max(window.x_max.abs()).hypot(window.y_min.abs().max(window.y_max.abs()));
        if corner >= 1.0 - 1e-9 {
            return Err(ModulusError::Precondition("Cartesian window must lie inside the disk".into()));
        }
        let hx = (window.x_max - window.x_min) / nx as f64;
        let hy = (window.y_max - window.y_min) / ny as f64;
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let c = Complex64::new(
                    window.x_min + hx * (i as f64 + 0.5),
                    window.y_min + hy * (j as f64 + 0.5),
                );
                let lambda = conformal_factor(c);
                cells.push(Cell {
                    center: DiskPoint::from_complex(c)?,
                    area_euclid: hx * hy,
                    area_hyp: hx * hy * lambda * lambda,
                });
            }
        }
        Ok(DiscretizedDomain {
            cells,
            geometry: GridGeometry::Cartesian { window, nx, ny },
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell containing `z`, if any.
    pub fn locate(&self, z: Complex64) -> Option<usize> {
        match &self.geometry {
            GridGeometry::Polar { radial_edges, n_theta } => {
                let r = z.norm();
                let first = radial_edges[0];
                let last = *radial_edges.last().unwrap();
                if r < first || r >= last {
                    return None;
                }
                let ring = radial_edges.partition_point(|&e| e <= r) - 1;
                let mut theta = z.im.atan2(z.re);
                if theta < 0.0 {
                    theta += TAU;
                }
                let sector = ((theta / TAU * *n_theta as f64) as usize).min(n_theta - 1);
                Some(ring * n_theta + sector)
            }
            GridGeometry::Cartesian { window, nx, ny } => {
                if z.re < window.x_min || z.re >= window.x_max || z.im < window.y_min || z.im >= window.y_max {
                    return None;
                }
                let i = (((z.re - window.x_min) / (window.x_max - window.x_min) * *nx as f64) as usize).min(nx - 1);
                let j = (((z.im - window.y_min) / (window.y_max - window.y_min) * *ny as f64) as usize).min(ny - 1);
                Some(j * nx + i)
            }
        }
    }

    /// Parameters `t ∈ (0, 1)` where the segment `p + t (q − p)` crosses a grid line.
    pub(crate) fn crossings(&self, p: Complex64, q: Complex64) -> Vec<f64> {
        let d = q - p;
        let mut ts = Vec::new();
        match &self.geometry {
            GridGeometry::Polar { radial_edges, n_theta } => {
                let dd = d.norm_sqr();
                if dd == 0.0 {
                    return ts;
                }
                // Radii swept by the segment.
                let t_close = (-(p.re * d.re + p.im * d.im) / dd).clamp(0.0, 1.0);
                let r_min = (p + d * t_close).norm();
                let r_max = p.norm().max(q.norm());
                let lo = radial_edges.partition_point(|&e| e < r_min);
                let hi = radial_edges.partition_point(|&e| e <= r_max);
                let pd = p.re * d.re + p.im * d.im;
                for &e in &radial_edges[lo..hi] {
                    // |p + t d|² = e²
                    let c = p.norm_sqr() - e * e;
                    let disc = pd * pd - dd * c;
                    if disc < 0.0 {
                        continue;
                    }
                    let s = disc.sqrt();
                    for t in [(-pd - s) / dd, (-pd + s) / dd] {
                        if t > 0.0 && t < 1.0 {
                            ts.push(t);
                        }
                    }
                }
                let dtheta = TAU / *n_theta as f64;
                let mut push_ray = |k: i64| {
                    let phi = dtheta * k as f64;
                    let u = Complex64::from_polar(1.0, -phi);
                    let pu = p * u;
                    let du = d * u;
                    if du.im == 0.0 {
                        return;
                    }
                    let t = -pu.im / du.im;
                    if t > 0.0 && t < 1.0 && (pu + du * t).re > 0.0 {
                        ts.push(t);
                    }
                };
                if r_min > 1e-12 {
                    let a0 = p.im.atan2(p.re);
                    let mut delta = q.im.atan2(q.re) - a0;
                    if delta > std::f64::consts::PI {
                        delta -= TAU;
                    } else if delta < -std::f64::consts::PI {
                        delta += TAU;
                    }
                    let (a, b) = if delta >= 0.0 { (a0, a0 + delta) } else { (a0 + delta, a0) };
                    let k0 = (a / dtheta).floor() as i64;
                    let k1 = (b / dtheta).ceil() as i64;
                    for k in k0..=k1 {
                        push_ray(k);
                    }
                } else {
                    for k in 0..*n_theta as i64 {
                        push_ray(k);
                    }
                }
            }
            GridGeometry::Cartesian { window, nx, ny } => {
                let hx = (window.x_max - window.x_min) / *nx as f64;
                let hy = (window.y_max - window.y_min) / *ny as f64;
                let mut axis = |p0: f64, d0: f64, origin: f64, h: f64, n: usize| {
                    if d0 == 0.0 {
                        return;
                    }
                    let (a, b) = if d0 > 0.0 { (p0, p0 + d0) } else { (p0 + d0, p0) };
                    let i0 = ((a - origin) / h).floor().max(0.0) as usize;
                    let i1 = (((b - origin) / h).ceil().max(0.0) as usize).min(n);
                    for i in i0..=i1 {
                        let t = (origin + h * i as f64 - p0) / d0;
                        if t > 0.0 && t < 1.0 {
                            ts.push(t);
                        }
                    }
                };
                axis(p.re, d.re, window.x_min, hx, *nx);
                axis(p.im, d.im, window.y_min, hy, *ny);
            }
        }
        ts.sort_by(|a, b| a.total_cmp(b));
        ts.dedup();
        ts
    }

    pub fn total_area(&self, metric: super::Metric) -> f64 {
        let areas: Vec<f64> = self.cells.iter().map(|c| metric.area(c)).collect();
        crate::numerics::pairwise_sum(&areas)
    }
}
