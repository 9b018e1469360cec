//! Non-negative scalar fields on the disk chart and the fixed field catalog
//! used by configs and the command line.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::disk::{hyp_distance_raw, DiskPoint, MobiusAutomorphism};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldSpecError {
    #[error("unknown field spec `{0}`")]
    Unknown(String),
    #[error("bad constant in field spec `{0}`")]
    BadConstant(String),
}

type Evaluator = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

/// A field `Q ≥ 0` evaluated in the chart coordinates of the disk, optionally
/// with one declared singular point.
#[derive(Clone)]
pub struct ScalarField {
    label: String,
    evaluator: Evaluator,
    singular: Option<Complex64>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("singular", &self.singular)
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            label: label.into(),
            evaluator: Arc::new(f),
            singular: None,
        }
    }

    pub fn with_singular_point(mut self, p: Complex64) -> Self {
        self.singular = Some(p);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn singular_point(&self) -> Option<Complex64> {
        self.singular
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        (self.evaluator)(z)
    }

    pub fn value(&self, p: DiskPoint) -> f64 {
        self.eval(p.z())
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const:{c}"), move |_| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `c · Q`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.evaluator.clone();
        ScalarField {
            label: format!("{c}*({})", self.label),
            evaluator: Arc::new(move |z| c * inner(z)),
            singular: self.singular,
        }
    }

    /// The same field read in the chart centered at `center`, i.e. `Q ∘ T⁻¹`
    /// where `T` sends `center` to the origin.
    pub fn recentered(&self, center: DiskPoint) -> Self {
        if center.z() == Complex64::new(0.0, 0.0) {
            return self.clone();
        }
        let to_zero = MobiusAutomorphism::to_zero(center);
        let back = to_zero.invert();
        let inner = self.evaluator.clone();
        ScalarField {
            label: format!("{}@({}, {})", self.label, center.re(), center.im()),
            evaluator: Arc::new(move |z| inner(back.apply_raw(z))),
            singular: self.singular.map(|s| to_zero.apply_raw(s)),
        }
    }

    /// Parses the catalog form used by configs and the CLI:
    /// `const:<c>`, `log-inv-r`, `inv-r`, `inv-r2`, `half-plane`,
    /// `radial:h`, `radial:inv-h`, `radial:log-inv-h`.
    pub fn parse(spec: &str) -> Result<Self, FieldSpecError> {
        let origin = Complex64::new(0.0, 0.0);
        let field = match spec.trim() {
            s if s.starts_with("const:") => {
                let c: f64 = s[6..]
                    .parse()
                    .map_err(|_| FieldSpecError::BadConstant(s.to_string()))?;
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(FieldSpecError::BadConstant(s.to_string()));
                }
                Self::constant(c)
            }
            "log-inv-r" => Self::new(spec, |z: Complex64| -z.norm().ln()).with_singular_point(origin),
            "inv-r" => Self::new(spec, |z: Complex64| 1.0 / z.norm()).with_singular_point(origin),
            "inv-r2" => Self::new(spec, |z: Complex64| 1.0 / z.norm_sqr()).with_singular_point(origin),
            "half-plane" => Self::new(spec, |z: Complex64| if z.re > 0.0 { 1.0 } else { 0.0 }),
            "radial:h" => Self::new(spec, move |z| hyp_distance_raw(origin, z)),
            "radial:inv-h" => {
                Self::new(spec, move |z| 1.0 / hyp_distance_raw(origin, z)).with_singular_point(origin)
            }
            "radial:log-inv-h" => Self::new(spec, move |z| (1.0 / hyp_distance_raw(origin, z)).ln().max(0.0))
                .with_singular_point(origin),
            other => return Err(FieldSpecError::Unknown(other.to_string())),
        };
        Ok(field)
    }
}
