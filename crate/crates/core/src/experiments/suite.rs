use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::{Outcome, VerdictRecord};
use super::{run_boundary_extension_probe, run_lower_q_verification, ExperimentConfig, ExperimentError, ExperimentKind};
use crate::report::csv_table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub records: Vec<VerdictRecord>,
    /// 0 when every record passes, else 1.
    pub exit_code: i32,
}

/// Runs one experiment, turning errors and panics into failed records.
pub fn run_experiment(cfg: &ExperimentConfig) -> Outcome {
    let start = Instant::now();
    let run = catch_unwind(AssertUnwindSafe(|| match cfg.kind {
        ExperimentKind::LowerQ => run_lower_q_verification(cfg),
        ExperimentKind::BoundaryExt => run_boundary_extension_probe(cfg),
    }));
    let elapsed = start.elapsed().as_millis() as u64;
    let error = match run {
        Ok(Ok(outcome)) => return outcome,
        Ok(Err(e)) => e.to_string(),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            format!("panic: {msg}")
        }
    };
    Outcome {
        record: VerdictRecord::failed(&cfg.id, Some(cfg.kind), error, elapsed),
        artifacts: Vec::new(),
    }
}

fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("record.json"), outcome.record.to_json())?;
    for a in &outcome.artifacts {
        std::fs::write(dir.join(&a.name), &a.contents)?;
    }
    Ok(())
}

/// Runs every `*.json` config in `config_dir` (sorted by name) and writes
/// `<out>/<id>/record.json` plus artifacts, `<out>/suite.json` and
/// `<out>/summary.csv`. A config that fails to load becomes a failed record
/// named after its file; other experiments still run.
pub fn run_suite(config_dir: &Path, out_dir: &Path) -> Result<SuiteReport, ExperimentError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(config_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    std::fs::create_dir_all(out_dir)?;

    let outcomes: Vec<(String, Outcome)> = paths
        .par_iter()
        .map(|path| {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            match ExperimentConfig::load(path) {
                Ok(cfg) => {
                    let dir = cfg.output_dir.clone().map(|d| d.to_string_lossy().into_owned()).unwrap_or_else(|| cfg.id.clone());
                    (dir, run_experiment(&cfg))
                }
                Err(e) => (
                    stem.clone(),
                    Outcome {
                        record: VerdictRecord::failed(&stem, None, e.to_string(), 0),
                        artifacts: Vec::new(),
                    },
                ),
            }
        })
        .collect();

    for (dir, outcome) in &outcomes {
        write_outcome(&out_dir.join(dir), outcome)?;
    }
    let records: Vec<VerdictRecord> = outcomes.into_iter().map(|(_, o)| o.record).collect();
    let exit_code = if records.iter().all(|r| r.pass) { 0 } else { 1 };
    let report = SuiteReport { records, exit_code };
    std::fs::write(out_dir.join("suite.json"), serde_json::to_string_pretty(&report).expect("serializable") + "\n")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let summary = csv_table(
        &["id", "kind", "lhs", "rhs", "ratio", "pass", "runtime_ms", "error"],
        report.records.iter().map(|r| {
            vec![
                r.id.clone(),
                r.kind.map(|k| serde_json::to_value(k).unwrap().as_str().unwrap_or_default().to_string()).unwrap_or_default(),
                opt(r.lhs),
                opt(r.rhs),
                opt(r.ratio),
                r.pass.to_string(),
                r.runtime_ms.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )
    .map_err(|e| std::io::Error::other(e.to_string()))?;
    std::fs::write(out_dir.join("summary.csv"), summary)?;
    Ok(report)
}
