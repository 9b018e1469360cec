//! Moduli of curve families on hyperbolic surfaces: disk geometry, Fuchsian
//! groups, hyperbolic quadrature, a discrete modulus solver, sample mappings
//! with their distortion, numeric criteria on `Q`, and verification runs.

pub mod criteria;
pub mod disk;
pub mod experiments;
pub mod field;
pub mod fuchsian;
pub mod mappings;
pub mod modulus;
pub mod numerics;
pub mod quadrature;
pub mod report;

pub use criteria::{
    divergence_check, eta_inequality_check, fmo_check, fmo_integral_estimate, DivergenceReport, DivergenceVerdict, EtaProfile,
    EtaReport, FmoReport, FmoVerdict,
};
pub use disk::{euclid_radius, hyp_distance, hyp_length, hyp_radius, DiskPoint, GeometryError, MobiusAutomorphism, Polyline, Window};
pub use experiments::{run_suite, ExperimentConfig, ExperimentError, VerdictRecord};
pub use field::ScalarField;
pub use fuchsian::{DirichletDomain, EnumeratedGroup, FuchsianError, FuchsianGroup, NormalNeighborhood, SurfacePoint};
pub use mappings::{Dilatation, MapError, MapSpec, SampleMap};
pub use modulus::{
    circle_family_modulus, modulus_discrete, ring_modulus_exact, weighted_infimum, CurveFamily, DiscretizedDomain, Metric,
    ModulusError, ModulusResult,
};
pub use quadrature::{ball_integral, circle_integral, qnorm_profile, ring_reciprocal_integral, QuadratureError, RadialProfile, RingSpec};
