//! Side-by-side runs of both engines on the same sessions.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::components::ComponentSet;
use crate::dpi::{Dpi, Measurement};
use crate::session::{
    run_session, EngineKind, IterationRecord, Oracle, ScriptedOracle, SessionConfig,
    SimulatedOracle,
};

/// How a benchmark session's questions are answered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleSpec {
    Simulated(ComponentSet),
    Scripted(Vec<Measurement>),
}

impl OracleSpec {
    fn build(&self) -> Box<dyn Oracle> {
        match self {
            OracleSpec::Simulated(d) => Box::new(SimulatedOracle::new(*d)),
            OracleSpec::Scripted(s) => Box::new(ScriptedOracle::new(s.clone())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchCase {
    pub name: String,
    pub dpi: Dpi,
    pub oracle: OracleSpec,
    /// Shared by both engines; its `engine` field is ignored.
    pub config: SessionConfig,
}

/// One session of one engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub engine: EngineKind,
    pub iterations: usize,
    pub fc: u64,
    pub rd: u64,
    pub cc_tree: u64,
    pub cc_session: u64,
    pub wall_ms: f64,
    /// Final diagnosis, e.g. `[a1,a4]`; empty if the session failed.
    pub diagnosis: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    /// Cases run (each with both engines).
    pub cases: usize,
    /// Cases where both engines finished.
    pub completed: usize,
    pub fc_dynamic: u64,
    pub fc_hstree: u64,
    /// `1 - fc_dynamic / fc_hstree` over completed cases, in percent.
    pub fc_savings_pct: Option<f64>,
    /// Mean of per-case FC savings, over cases where HS-Tree needed any.
    pub mean_fc_savings_pct: Option<f64>,
    /// Mean of per-case wall-time savings.
    pub mean_runtime_savings_pct: Option<f64>,
    /// Cases where the engines disagreed on some iteration's diagnoses.
    pub mismatches: Vec<String>,
    pub audit_violations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchRow>,
    pub summary: BenchSummary,
}

struct Run {
    row: BenchRow,
    log: Option<Vec<IterationRecord>>,
    violations: usize,
}

fn run_one(case: &BenchCase, engine: EngineKind) -> Run {
    let config = SessionConfig {
        engine,
        ..case.config.clone()
    };
    let mut oracle = case.oracle.build();
    let started = Instant::now();
    let result = run_session(&case.dpi, &config, oracle.as_mut());
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let mut row = BenchRow {
        name: case.name.clone(),
        engine,
        iterations: 0,
        fc: 0,
        rd: 0,
        cc_tree: 0,
        cc_session: 0,
        wall_ms,
        diagnosis: String::new(),
        error: String::new(),
    };
    match result {
        Ok(out) => {
            row.iterations = out.log.len();
            row.fc = out.counters.fc;
            row.rd = out.counters.rd;
            row.cc_tree = out.counters.cc_tree;
            row.cc_session = out.counters.cc_session;
            row.diagnosis = out.diagnosis.to_string();
            Run {
                row,
                violations: out.violations.len(),
                log: Some(out.log),
            }
        }
        Err(f) => {
            row.iterations = f.log.len();
            row.error = f.error.to_string();
            Run {
                row,
                log: None,
                violations: 0,
            }
        }
    }
}

fn same_diagnoses(a: &[IterationRecord], b: &[IterationRecord]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.diagnoses == y.diagnoses)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Runs every case with both engines, in parallel across cases.
pub fn compare(cases: &[BenchCase]) -> BenchmarkReport {
    let runs: Vec<(Run, Run)> = cases
        .par_iter()
        .map(|c| {
            (
                run_one(c, EngineKind::Hstree),
                run_one(c, EngineKind::Dynamic),
            )
        })
        .collect();

    let mut report = BenchmarkReport::default();
    let mut fc_savings = Vec::new();
    let mut time_savings = Vec::new();
    report.summary.cases = runs.len();
    for (hs, dy) in runs {
        report.summary.audit_violations += hs.violations + dy.violations;
        match (&hs.log, &dy.log) {
            (Some(a), Some(b)) => {
                report.summary.completed += 1;
                report.summary.fc_hstree += hs.row.fc;
                report.summary.fc_dynamic += dy.row.fc;
                if hs.row.fc > 0 {
                    fc_savings
                        .push(100.0 * (hs.row.fc as f64 - dy.row.fc as f64) / hs.row.fc as f64);
                }
                if hs.row.wall_ms > 0.0 {
                    time_savings.push(100.0 * (hs.row.wall_ms - dy.row.wall_ms) / hs.row.wall_ms);
                }
                if !same_diagnoses(a, b) {
                    report.summary.mismatches.push(hs.row.name.clone());
                }
            }
            (None, None) if hs.row.error == dy.row.error => {}
            _ => report.summary.mismatches.push(hs.row.name.clone()),
        }
        report.rows.push(hs.row);
        report.rows.push(dy.row);
    }
    let s = &mut report.summary;
    if s.fc_hstree > 0 {
        s.fc_savings_pct =
            Some(100.0 * (s.fc_hstree as f64 - s.fc_dynamic as f64) / s.fc_hstree as f64);
    }
    s.mean_fc_savings_pct = mean(&fc_savings);
    s.mean_runtime_savings_pct = mean(&time_savings);
    report
}

impl BenchmarkReport {
    /// One CSV line per row, with a header.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "name",
                "engine",
                "iterations",
                "fc",
                "rd",
                "cc_tree",
                "cc_session",
                "wall_ms",
                "diagnosis",
                "error",
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflict::ScriptEntry;
    use crate::fixtures::{example_dpi, example_script, EXAMPLE_CONFLICTS};

    #[test]
    fn example_case_reports_both_tallies() {
        let entries: Vec<ScriptEntry> = serde_json::from_str(EXAMPLE_CONFLICTS).unwrap();
        let case = BenchCase {
            name: "example".into(),
            dpi: example_dpi(),
            oracle: OracleSpec::Scripted(example_script()),
            config: SessionConfig {
                conflict_script: Some(entries),
                ..SessionConfig::default()
            },
        };
        let report = compare(&[case]);
        assert_eq!(report.rows.len(), 2);
        let hs = &report.rows[0];
        let dy = &report.rows[1];
        assert_eq!((hs.fc, hs.rd, hs.cc_tree), (14, 0, 9));
        assert_eq!((dy.fc, dy.rd, dy.cc_tree), (6, 4, 5));
        assert_eq!(dy.diagnosis, "[a1,a4]");
        let s = &report.summary;
        assert_eq!(s.completed, 1);
        assert!(s.mismatches.is_empty());
        let pct = s.fc_savings_pct.unwrap();
        assert!((pct - 100.0 * 8.0 / 14.0).abs() < 1e-9);

        let csv = report.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with(
            "name,engine,iterations,fc,rd,cc_tree,cc_session,wall_ms,diagnosis,error"
        ));
        let back: BenchmarkReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back.rows.len(), 2);
    }

    #[test]
    fn empty_corpus_gives_empty_report() {
        let report = compare(&[]);
        assert!(report.rows.is_empty());
        assert_eq!(report.summary.cases, 0);
        assert_eq!(report.summary.fc_savings_pct, None);
        assert_eq!(report.to_csv().unwrap().lines().count(), 1);
    }
}
