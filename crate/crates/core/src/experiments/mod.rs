//! End-to-end verification runs driven by JSON configs.

mod boundary;
mod config;
mod lower_q;
mod record;
mod suite;

pub use boundary::{approach_residuals, run_boundary_extension_probe, BoundaryResiduals};
pub use config::{BoundaryConfig, ExperimentConfig, ExperimentKind, GridConfig, RingConfig, MAX_N_CIRCLES, MAX_N_THETA};
pub use lower_q::run_lower_q_verification;
pub use record::{Artifact, Outcome, Provenance, VerdictRecord, SCHEMA_VERSION};
pub use suite::{run_experiment, run_suite, SuiteReport};

use thiserror::Error;

use crate::criteria::CriteriaError;
use crate::fuchsian::FuchsianError;
use crate::mappings::MapError;
use crate::modulus::ModulusError;
use crate::quadrature::QuadratureError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    /// Unreadable, malformed or out-of-range configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Modulus(#[from] ModulusError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Fuchsian(#[from] FuchsianError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    pub fn is_config(&self) -> bool {
        matches!(self, ExperimentError::Config(_))
    }
}
