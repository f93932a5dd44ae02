//! Machine-readable run reports.
//!
//! `report.json` is the canonical output: identical configs and seeds must
//! produce byte-identical files, so nothing time- or host-dependent goes in
//! here (wall-clock timings live in the human-readable summary only). The
//! JSON field names below are part of the tool's contract.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    /// Scenario kind, as spelled in the config.
    pub kind: String,
    /// The RNG seed the run actually used.
    pub seed: u64,
    /// True only if every case passed.
    pub all_pass: bool,
    /// One entry per case, in config order.
    pub cases: Vec<CaseReport>,
    /// Grid-refinement tables (empty for scenarios without levels).
    pub convergence_tables: Vec<ConvergenceTable>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CaseReport {
    pub id: String,
    pub pass: bool,
    /// Populated when the case aborted instead of producing metrics.
    pub error: Option<String>,
    /// Scalar measurements, ordered by name.
    pub metrics: BTreeMap<String, f64>,
    /// Categorical outcomes (e.g. "verdict": "physical").
    pub verdicts: BTreeMap<String, String>,
}

impl CaseReport {
    pub fn failed(id: impl Into<String>, error: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            pass: false,
            error: Some(error.into()),
            metrics: BTreeMap::new(),
            verdicts: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceTable {
    pub case_id: String,
    /// What the norms measure (e.g. "energy_balance_rms").
    pub quantity: String,
    /// One row per grid level, coarsest first.
    pub rows: Vec<ConvergenceRow>,
    /// `log2(norm_i / norm_{i+1})` between consecutive levels; empty when
    /// the quantity is identically zero at every level.
    pub observed_orders: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceRow {
    /// Representative spacing of the level.
    pub h: f64,
    pub norm: f64,
}

impl RunReport {
    pub fn new(kind: String, seed: u64) -> Self {
        Self {
            kind,
            seed,
            all_pass: true,
            cases: Vec::new(),
            convergence_tables: Vec::new(),
        }
    }

    pub fn push_case(&mut self, case: CaseReport) {
        self.all_pass &= case.pass;
        self.cases.push(case);
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}
