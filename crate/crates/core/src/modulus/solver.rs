//! Discrete modulus by dual ascent.
//!
//! Primal: minimize `Σ_c A_c ρ_c²` subject to `m_γ Σ_c ℓ_{cγ} ρ_c ≥ 1` for every
//! curve and `ρ ≥ 0`. With `a_{γc} = m_γ ℓ_{cγ}` and multipliers `λ ≥ 0` the
//! inner minimization is `ρ_c = Σ_γ λ_γ a_{γc} / (2 A_c)` and the dual is
//! `g(λ) = Σ λ_γ − Σ_c A_c ρ_c²`. The dual is maximized by projected gradient
//! ascent, preconditioned by the diagonal `d_γ = Σ_c a_{γc}² / (2 A_c)`, with
//! Nesterov momentum, adaptive restart and backtracking on the step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::DiscretizedDomain;
use super::family::CurveFamily;
use super::{Metric, ModulusError};
use crate::numerics::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Iterations over which the relative objective change is measured.
    pub stall_window: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-4,
            max_iterations: 200_000,
            stall_window: 50,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusResult {
    pub value: f64,
    pub extremal: DensityField,
    pub iterations: usize,
    pub max_constraint_violation: f64,
    pub metric: Metric,
    /// Primal value minus the best dual bound; the discrete optimum lies in `[value − gap, value]`.
    pub duality_gap: f64,
    pub converged: bool,
}

impl ModulusResult {
    /// Per-cell `(x, y, ρ)` rows.
    pub fn density_csv(&self, dom: &DiscretizedDomain) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "y", "rho"])?;
        for (cell, rho) in dom.cells.iter().zip(&self.extremal.rho) {
            w.write_record([cell.center.re().to_string(), cell.center.im().to_string(), rho.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Modulus of `family` on `dom` in the given metric.
pub fn modulus_discrete(
    family: &CurveFamily,
    dom: &DiscretizedDomain,
    metric: Metric,
    tol: f64,
) -> Result<ModulusResult, ModulusError> {
    solve(family, dom, metric, None, SolverOptions::with_tol(tol))
}

/// Weighted modulus `min Σ ρ_c² A_c / w_c` (cells with `w_c = 0` are excluded
/// from the density).
pub fn modulus_weighted(
    family: &CurveFamily,
    dom: &DiscretizedDomain,
    metric: Metric,
    weights: &[f64],
    opts: SolverOptions,
) -> Result<ModulusResult, ModulusError> {
    solve(family, dom, metric, Some(weights), opts)
}

pub fn solve(
    family: &CurveFamily,
    dom: &DiscretizedDomain,
    metric: Metric,
    weights: Option<&[f64]>,
    opts: SolverOptions,
) -> Result<ModulusResult, ModulusError> {
    if !(opts.tol > 0.0) {
        return Err(ModulusError::Precondition("tolerance must be positive".into()));
    }
    family.validate(dom)?;
    if let Some(w) = weights {
        if w.len() != dom.len() || w.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(ModulusError::Precondition("weights must be finite, ≥ 0, one per cell".into()));
        }
    }
    let problem = Problem::build(family, dom, metric, weights)?;
    Ok(problem.run(metric, opts)?)
}

struct Problem {
    /// Effective area per cell; `None` for cells carrying zero weight.
    area: Vec<Option<f64>>,
    curve_ptr: Vec<usize>,
    curve_cell: Vec<usize>,
    curve_coef: Vec<f64>,
    cell_ptr: Vec<usize>,
    cell_curve: Vec<usize>,
    cell_coef: Vec<f64>,
    diag: Vec<f64>,
}

impl Problem {
    fn build(
        family: &CurveFamily,
        dom: &DiscretizedDomain,
        metric: Metric,
        weights: Option<&[f64]>,
    ) -> Result<Self, ModulusError> {
        let area: Vec<Option<f64>> = dom
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let w = weights.map(|w| w[i]).unwrap_or(1.0);
                (w > 0.0).then(|| metric.area(c) / w)
            })
            .collect();
        let mut curve_ptr = vec![0];
        let mut curve_cell = Vec::new();
        let mut curve_coef = Vec::new();
        for (g, curve) in family.curves.iter().enumerate() {
            let m = curve.multiplicity as f64;
            for inc in &curve.incidences {
                if area[inc.cell].is_some() {
                    curve_cell.push(inc.cell);
                    curve_coef.push(m * metric.length(inc));
                }
            }
            if curve_cell.len() == *curve_ptr.last().unwrap() {
                return Err(ModulusError::Infeasible { curve: g });
            }
            curve_ptr.push(curve_cell.len());
        }
        // Transpose to cell-major order; curve indices stay increasing within a cell.
        let n_cells = dom.len();
        let mut counts = vec![0usize; n_cells + 1];
        for &c in &curve_cell {
            counts[c + 1] += 1;
        }
        for i in 0..n_cells {
            counts[i + 1] += counts[i];
        }
        let cell_ptr = counts.clone();
        let mut fill = counts;
        let mut cell_curve = vec![0; curve_cell.len()];
        let mut cell_coef = vec![0.0; curve_cell.len()];
        for g in 0..family.len() {
            for k in curve_ptr[g]..curve_ptr[g + 1] {
                let c = curve_cell[k];
                cell_curve[fill[c]] = g;
                cell_coef[fill[c]] = curve_coef[k];
                fill[c] += 1;
            }
        }
        let diag = (0..family.len())
            .map(|g| {
                let terms: Vec<f64> = (curve_ptr[g]..curve_ptr[g + 1])
                    .map(|k| {
                        let a = curve_coef[k];
                        a * a / (2.0 * area[curve_cell[k]].unwrap())
                    })
                    .collect();
                pairwise_sum(&terms)
            })
            .collect::<Vec<_>>();
        if let Some(g) = diag.iter().position(|d| !(*d > 0.0)) {
            return Err(ModulusError::Infeasible { curve: g });
        }
        Ok(Problem {
            area,
            curve_ptr,
            curve_cell,
            curve_coef,
            cell_ptr,
            cell_curve,
            cell_coef,
            diag,
        })
    }

    fn n_curves(&self) -> usize {
        self.diag.len()
    }

    /// Inner minimizer `ρ(λ)`, clipped at zero.
    fn density(&self, lambda: &[f64]) -> Vec<f64> {
        (0..self.area.len())
            .into_par_iter()
            .map(|c| match self.area[c] {
                None => 0.0,
                Some(a) => {
                    let mut s = 0.0;
                    for k in self.cell_ptr[c]..self.cell_ptr[c + 1] {
                        s += lambda[self.cell_curve[k]] * self.cell_coef[k];
                    }
                    (s / (2.0 * a)).max(0.0)
                }
            })
            .collect()
    }

    /// `a_γ · ρ` for every curve.
    fn curve_sums(&self, rho: &[f64]) -> Vec<f64> {
        (0..self.n_curves())
            .into_par_iter()
            .map(|g| {
                let mut s = 0.0;
                for k in self.curve_ptr[g]..self.curve_ptr[g + 1] {
                    s += self.curve_coef[k] * rho[self.curve_cell[k]];
                }
                s
            })
            .collect()
    }

    fn energy(&self, rho: &[f64]) -> f64 {
        let terms: Vec<f64> = rho
            .par_iter()
            .zip(self.area.par_iter())
            .map(|(r, a)| a.map(|a| a * r * r).unwrap_or(0.0))
            .collect();
        pairwise_sum(&terms)
    }

    fn dual(&self, lambda: &[f64], rho: &[f64]) -> f64 {
        pairwise_sum(lambda) - self.energy(rho)
    }

    fn run(&self, metric: Metric, opts: SolverOptions) -> Result<ModulusResult, ModulusError> {
        let n = self.n_curves();
        if n == 0 {
            return Ok(ModulusResult {
                value: 0.0,
                extremal: DensityField {
                    rho: vec![0.0; self.area.len()],
                },
                iterations: 0,
                max_constraint_violation: 0.0,
                metric,
                duality_gap: 0.0,
                converged: true,
            });
        }
        let mut lambda = vec![0.0; n];
        let mut rho_lambda = vec![0.0; self.area.len()];
        let mut g_lambda = 0.0;
        let mut best_dual = 0.0f64;
        let mut y = lambda.clone();
        let mut t = 1.0f64;
        let mut lip = 1.0f64;
        let mut history: Vec<f64> = Vec::new();
        let mut iterations = 0;
        let mut converged = false;

        while iterations < opts.max_iterations {
            iterations += 1;
            let rho_y = self.density(&y);
            let sums_y = self.curve_sums(&rho_y);
            let grad: Vec<f64> = sums_y.iter().map(|s| 1.0 - s).collect();
            let g_y = self.dual(&y, &rho_y);
            let (x, rho_x, g_x) = loop {
                let x: Vec<f64> = (0..n).map(|i| (y[i] + grad[i] / (lip * self.diag[i])).max(0.0)).collect();
                let rho_x = self.density(&x);
                let g_x = self.dual(&x, &rho_x);
                let lin: Vec<f64> = (0..n)
                    .map(|i| {
                        let dx = x[i] - y[i];
                        grad[i] * dx - 0.5 * lip * self.diag[i] * dx * dx
                    })
                    .collect();
                let model = g_y + pairwise_sum(&lin);
                if g_x >= model - 1e-13 * g_x.abs().max(1.0) || lip > 1e12 {
                    break (x, rho_x, g_x);
                }
                lip *= 2.0;
            };
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            if g_x < g_lambda {
                // Restart momentum once the dual stops increasing.
                t = 1.0;
                y = x.clone();
            } else {
                let beta = (t - 1.0) / t_next;
                y = (0..n).map(|i| x[i] + beta * (x[i] - lambda[i])).collect();
                t = t_next;
            }
            lambda = x;
            rho_lambda = rho_x;
            g_lambda = g_x;
            best_dual = best_dual.max(g_x);
            lip = (lip * 0.9).max(1.0);

            let sums = self.curve_sums(&rho_lambda);
            let violation = sums.iter().map(|s| (1.0 - s).max(0.0)).fold(0.0, f64::max);
            let energy = self.energy(&rho_lambda);
            history.push(energy);
            if history.len() > opts.stall_window {
                let old = history[history.len() - 1 - opts.stall_window];
                let change = (energy - old).abs() / energy.abs().max(f64::MIN_POSITIVE);
                if violation < opts.tol && change < opts.tol {
                    converged = true;
                    break;
                }
            }
        }

        // Rescale to exact feasibility: the reported density is admissible.
        let sums = self.curve_sums(&rho_lambda);
        let min_sum = sums.iter().cloned().fold(f64::INFINITY, f64::min);
        let scale = if min_sum > 0.0 { 1.0 / min_sum } else { 1.0 };
        let rho: Vec<f64> = rho_lambda.iter().map(|r| r * scale).collect();
        let value = self.energy(&rho);
        let violation = self
            .curve_sums(&rho)
            .iter()
            .map(|s| (1.0 - s).max(0.0))
            .fold(0.0, f64::max);
        let result = ModulusResult {
            value,
            extremal: DensityField { rho },
            iterations,
            max_constraint_violation: violation,
            metric,
            duality_gap: (value - best_dual).max(0.0),
            converged,
        };
        if converged {
            Ok(result)
        } else {
            Err(ModulusError::NonConvergence(Box::new(result)))
        }
    }
}
