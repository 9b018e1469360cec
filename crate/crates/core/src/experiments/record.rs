use serde::{Deserialize, Serialize};

use super::ExperimentKind;

pub const SCHEMA_VERSION: u32 = 1;

/// Which module call produced a number, and with which parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub quantity: String,
    pub module: String,
    pub operation: String,
    pub parameters: serde_json::Value,
    pub value: serde_json::Value,
}

impl Provenance {
    pub fn new(quantity: &str, module: &str, operation: &str, parameters: serde_json::Value, value: impl Serialize) -> Self {
        Provenance {
            quantity: quantity.into(),
            module: module.into(),
            operation: operation.into(),
            parameters,
            value: serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub schema_version: u32,
    pub id: String,
    pub kind: Option<ExperimentKind>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    pub pass: bool,
    pub tolerance: f64,
    /// Wall-clock time; the only field that varies between identical runs.
    pub runtime_ms: u64,
    pub provenance: Vec<Provenance>,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

impl VerdictRecord {
    pub fn failed(id: &str, kind: Option<ExperimentKind>, error: String, runtime_ms: u64) -> Self {
        VerdictRecord {
            schema_version: SCHEMA_VERSION,
            id: id.into(),
            kind,
            lhs: None,
            rhs: None,
            ratio: None,
            pass: false,
            tolerance: 0.0,
            runtime_ms,
            provenance: Vec::new(),
            notes: Vec::new(),
            error: Some(error),
        }
    }

    /// Copy with the timing field zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        VerdictRecord {
            runtime_ms: 0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize") + "\n"
    }
}

/// A file written next to the record.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: &str, contents: String) -> Self {
        Artifact {
            name: name.into(),
            contents,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub record: VerdictRecord,
    pub artifacts: Vec<Artifact>,
}
