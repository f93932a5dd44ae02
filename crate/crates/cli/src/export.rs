//! Report serialization: `report.json`, flat CSV tables, plot-ready data
//! files, and a generated plotting script.
//!
//! CSV schemas (header rows are part of the contract):
//!
//! * `cases.csv` — `case_id,pass,metric,value` (one row per metric)
//! * `verdicts.csv` — `case_id,key,value`
//! * `convergence.csv` — `case_id,quantity,level,h,norm,observed_order`
//!   (the order column is empty on each coarsest row)
//! * `branch_jump_vs_nu.csv` — `nu,branch_jump` (spuriosity runs)
//! * `residual_vs_h.csv` — `case_id,h,energy_balance_rms,continuity_rms`
//!   (equivalence runs)
//! * `ring_profiles.csv` — `radius,kinetic,minus_q,residual_sum`
//!   (sum-rule runs with the probe enabled)

use crate::report::RunReport;
use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub fn export(report: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let mut written = Vec::new();
    let mut write = |name: &str, content: String| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, content)
            .with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
        Ok(())
    };

    write("report.json", report.to_json())?;

    let mut cases = String::from("case_id,pass,metric,value\n");
    let mut verdicts = String::from("case_id,key,value\n");
    for case in &report.cases {
        for (metric, value) in &case.metrics {
            writeln!(cases, "{},{},{},{}", case.id, case.pass, metric, value).unwrap();
        }
        for (key, value) in &case.verdicts {
            writeln!(verdicts, "{},{},{}", case.id, key, value).unwrap();
        }
        if let Some(error) = &case.error {
            writeln!(verdicts, "{},error,{}", case.id, error.replace(',', ";")).unwrap();
        }
    }
    write("cases.csv", cases)?;
    write("verdicts.csv", verdicts)?;

    let mut convergence = String::from("case_id,quantity,level,h,norm,observed_order\n");
    for table in &report.convergence_tables {
        for (level, row) in table.rows.iter().enumerate() {
            let order = if level == 0 {
                String::new()
            } else {
                table
                    .observed_orders
                    .get(level - 1)
                    .map(|o| o.to_string())
                    .unwrap_or_default()
            };
            writeln!(
                convergence,
                "{},{},{},{},{},{}",
                table.case_id, table.quantity, level, row.h, row.norm, order
            )
            .unwrap();
        }
    }
    write("convergence.csv", convergence)?;

    match report.kind.as_str() {
        "spuriosity" => {
            let mut data = String::from("nu,branch_jump\n");
            for case in &report.cases {
                if let (Some(nu), Some(jump)) =
                    (case.metrics.get("nu"), case.metrics.get("branch_jump"))
                {
                    writeln!(data, "{nu},{jump}").unwrap();
                }
            }
            write("branch_jump_vs_nu.csv", data)?;
        }
        "equivalence" => {
            let mut data = String::from("case_id,h,energy_balance_rms,continuity_rms\n");
            for table in report.convergence_tables.iter().filter(|t| t.quantity == "energy_balance_rms")
            {
                let partner = report
                    .convergence_tables
                    .iter()
                    .find(|t| t.case_id == table.case_id && t.quantity == "continuity_rms");
                for (level, row) in table.rows.iter().enumerate() {
                    let ct = partner
                        .and_then(|p| p.rows.get(level))
                        .map(|r| r.norm.to_string())
                        .unwrap_or_default();
                    writeln!(data, "{},{},{},{}", table.case_id, row.h, row.norm, ct).unwrap();
                }
            }
            write("residual_vs_h.csv", data)?;
        }
        "sum-rule" => {
            if let Some(case) = report.cases.iter().find(|c| c.id == "cancellation_probe") {
                let mut data = String::from("radius,kinetic,minus_q,residual_sum\n");
                let mut ring = 0usize;
                loop {
                    let key = |what: &str| format!("ring{ring:02}_{what}");
                    match (
                        case.metrics.get(&key("radius")),
                        case.metrics.get(&key("kinetic")),
                        case.metrics.get(&key("minus_q")),
                        case.metrics.get(&key("residual_sum")),
                    ) {
                        (Some(r), Some(k), Some(q), Some(s)) => {
                            writeln!(data, "{r},{k},{q},{s}").unwrap();
                        }
                        _ if ring > 40 => break,
                        _ => {}
                    }
                    ring += 1;
                }
                write("ring_profiles.csv", data)?;
            }
        }
        _ => {}
    }

    write("plot.py", PLOT_SCRIPT.to_string())?;
    Ok(written)
}

/// Human-readable counterpart of the report; the caller appends timing.
pub fn summary(report: &RunReport) -> String {
    let mut out = String::new();
    writeln!(out, "scenario: {}   seed: {}", report.kind, report.seed).unwrap();
    for case in &report.cases {
        let status = if case.pass { "PASS" } else { "FAIL" };
        match &case.error {
            Some(e) => writeln!(out, "  [{status}] {}  ({e})", case.id).unwrap(),
            None => {
                let mut line = format!("  [{status}] {}", case.id);
                for key in ["measured_winding", "branch_jump", "energy", "innermost_ratio"] {
                    if let Some(v) = case.metrics.get(key) {
                        write!(line, "  {key}={v:.3e}").unwrap();
                    }
                }
                if let Some(v) = case.verdicts.get("verdict") {
                    write!(line, "  verdict={v}").unwrap();
                }
                writeln!(out, "{line}").unwrap();
            }
        }
    }
    for table in &report.convergence_tables {
        writeln!(out, "  {} / {}:", table.case_id, table.quantity).unwrap();
        for row in &table.rows {
            writeln!(out, "    h={:<12.6} norm={:.6e}", row.h, row.norm).unwrap();
        }
        if !table.observed_orders.is_empty() {
            let orders: Vec<String> =
                table.observed_orders.iter().map(|o| format!("{o:.2}")).collect();
            writeln!(out, "    observed orders: {}", orders.join(", ")).unwrap();
        } else {
            writeln!(out, "    residual identically zero at every level").unwrap();
        }
    }
    writeln!(out, "overall: {}", if report.all_pass { "PASS" } else { "FAIL" }).unwrap();
    out
}

const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plots the data files written next to this script."""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def read(name):
    path = os.path.join(here, name)
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        return list(csv.DictReader(fh))


def save(fig, name):
    out = os.path.join(here, name)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    print("wrote", out)


rows = read("branch_jump_vs_nu.csv")
if rows:
    nu = [float(r["nu"]) for r in rows]
    jump = [float(r["branch_jump"]) for r in rows]
    fig, ax = plt.subplots()
    ax.plot(nu, jump, "o-")
    ax.set_xlabel("nu")
    ax.set_ylabel("branch-cut jump")
    ax.set_title("Single-valuedness violation vs angular order")
    save(fig, "branch_jump_vs_nu.png")

rows = read("residual_vs_h.csv")
if rows:
    fig, ax = plt.subplots()
    by_case = {}
    for r in rows:
        by_case.setdefault(r["case_id"], []).append(r)
    for case, entries in sorted(by_case.items()):
        h = [float(r["h"]) for r in entries]
        eb = [float(r["energy_balance_rms"]) for r in entries]
        ax.loglog(h, eb, "o-", label=f"{case} energy balance")
        ct = [float(r["continuity_rms"]) for r in entries if r["continuity_rms"]]
        if ct and max(ct) > 1e-14:
            ax.loglog(h[: len(ct)], ct, "s--", label=f"{case} continuity")
    ax.set_xlabel("h")
    ax.set_ylabel("residual RMS")
    ax.legend(fontsize=6)
    ax.set_title("Stationary residuals under refinement")
    save(fig, "residual_vs_h.png")

rows = read("ring_profiles.csv")
if rows:
    r = [float(x["radius"]) for x in rows]
    kin = [float(x["kinetic"]) for x in rows]
    mq = [float(x["minus_q"]) for x in rows]
    s = [abs(float(x["residual_sum"])) for x in rows]
    fig, ax = plt.subplots()
    ax.loglog(r, kin, "o-", label="kinetic (m/2) v^2")
    ax.loglog(r, mq, "s-", label="-Q")
    ax.loglog(r, s, "^--", label="|sum|")
    ax.set_xlabel("ring radius")
    ax.set_ylabel("ring average")
    ax.legend()
    ax.set_title("Kinetic / quantum-potential cancellation at a vortex")
    save(fig, "ring_profiles.png")

print("done")
sys.exit(0)
"#;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{CaseReport, RunReport};
    use std::collections::BTreeMap;

    #[test]
    fn csv_headers_match_schema() {
        let mut report = RunReport::new("spuriosity".into(), 1);
        let mut case = CaseReport {
            id: "nu=0".into(),
            pass: true,
            error: None,
            metrics: BTreeMap::new(),
            verdicts: BTreeMap::new(),
        };
        case.metrics.insert("nu".into(), 0.0);
        case.metrics.insert("branch_jump".into(), 0.0);
        case.verdicts.insert("verdict".into(), "physical".into());
        report.push_case(case);
        let dir = tempfile::tempdir().unwrap();
        export(&report, dir.path()).unwrap();
        let cases = std::fs::read_to_string(dir.path().join("cases.csv")).unwrap();
        assert!(cases.starts_with("case_id,pass,metric,value\n"));
        let conv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
        assert!(conv.starts_with("case_id,quantity,level,h,norm,observed_order\n"));
        let jumps = std::fs::read_to_string(dir.path().join("branch_jump_vs_nu.csv")).unwrap();
        assert!(jumps.starts_with("nu,branch_jump\n"));
        assert!(jumps.contains("0,0"));
        assert!(dir.path().join("plot.py").exists());
    }
}
