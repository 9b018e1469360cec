use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::disk::DiskPoint;
use crate::mappings::MapSpec;
use crate::quadrature::RingSpec;

pub const MAX_N_CIRCLES: usize = 512;
pub const MAX_N_THETA: usize = 4096;
const MAX_POINTS_PER_CIRCLE: usize = 65_536;
const MAX_PROFILE_SAMPLES: usize = 100_001;
const MAX_BOUNDARY_STEPS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    LowerQ,
    BoundaryExt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    #[serde(default)]
    pub center: [f64; 2],
    pub r_inner: f64,
    pub r_outer: f64,
}

impl RingConfig {
    pub fn to_ring(&self) -> Result<RingSpec, ExperimentError> {
        let c = DiskPoint::new(self.center[0], self.center[1]).map_err(|e| ExperimentError::Config(e.to_string()))?;
        RingSpec::new(c, self.r_inner, self.r_outer).map_err(|e| ExperimentError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Radial bands, one circle each.
    pub n_circles: usize,
    pub n_theta: usize,
    pub points_per_circle: usize,
    pub profile_samples: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_circles: 64,
            n_theta: 256,
            points_per_circle: 2048,
            profile_samples: 1025,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryConfig {
    /// Boundary point `e^{i angle}`.
    pub angle: f64,
    /// Steps `δ_k = 2^{−k}`, `k = 1..=steps`.
    pub steps: usize,
    pub expect_contraction: bool,
    /// Field spec of a majorant of `Q` near the boundary point, if known.
    pub q_majorant: Option<String>,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            angle: 0.0,
            steps: 14,
            expect_contraction: true,
            q_majorant: None,
        }
    }
}

fn default_schema() -> u32 {
    super::SCHEMA_VERSION
}

fn default_tol() -> f64 {
    1e-6
}

fn default_ratio_tolerance() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub id: String,
    pub kind: ExperimentKind,
    pub map: MapSpec,
    #[serde(default)]
    pub ring: Option<RingConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    /// Solver tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Lower-Q passes when `LHS/RHS ≥ 1 − ratio_tolerance`.
    #[serde(default = "default_ratio_tolerance")]
    pub ratio_tolerance: f64,
    #[serde(default)]
    pub seed: u64,
    /// Group file, relative to the config file. The ring must then fit in a
    /// normal neighborhood of its center.
    #[serde(default)]
    pub group_file: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.schema_version != super::SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return bad(format!("id `{}` must be non-empty [A-Za-z0-9_-]", self.id));
        }
        let g = &self.grid;
        if !(4..=MAX_N_CIRCLES).contains(&g.n_circles) {
            return bad(format!("n_circles must lie in 4..={MAX_N_CIRCLES}"));
        }
        if !(16..=MAX_N_THETA).contains(&g.n_theta) {
            return bad(format!("n_theta must lie in 16..={MAX_N_THETA}"));
        }
        if !(16..=MAX_POINTS_PER_CIRCLE).contains(&g.points_per_circle) {
            return bad(format!("points_per_circle must lie in 16..={MAX_POINTS_PER_CIRCLE}"));
        }
        if !(8..=MAX_PROFILE_SAMPLES).contains(&g.profile_samples) {
            return bad(format!("profile_samples must lie in 8..={MAX_PROFILE_SAMPLES}"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("tol must lie in (0, 1)".into());
        }
        if !(self.ratio_tolerance >= 0.0 && self.ratio_tolerance < 1.0) {
            return bad("ratio_tolerance must lie in [0, 1)".into());
        }
        crate::mappings::SampleMap::from_spec(&self.map).map_err(|e| ExperimentError::Config(e.to_string()))?;
        match self.kind {
            ExperimentKind::LowerQ => {
                let Some(ring) = self.ring else {
                    return bad("lower_q needs a ring".into());
                };
                let ring = ring.to_ring()?;
                if ring.r_inner <= 0.0 {
                    return bad("lower_q needs r_inner > 0".into());
                }
            }
            ExperimentKind::BoundaryExt => {
                let b = self.boundary.clone().unwrap_or_default();
                if !(4..=MAX_BOUNDARY_STEPS).contains(&b.steps) {
                    return bad(format!("boundary steps must lie in 4..={MAX_BOUNDARY_STEPS}"));
                }
                if !b.angle.is_finite() {
                    return bad("boundary angle must be finite".into());
                }
                if let Some(q) = &b.q_majorant {
                    crate::field::ScalarField::parse(q).map_err(|e| ExperimentError::Config(e.to_string()))?;
                }
            }
        }
        Ok(())
    }
}
