//   Copyright 2026 corrfix developers
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

//! Rendering of run reports.

use std::fmt::Write as _;
use std::path::Path;

use crate::run::{Outcome, RunReport};
use crate::{CliError, Format};

/// Violations listed per report in the human table.
pub const HUMAN_VIOLATION_LIMIT: usize = 10;

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Human => human(report),
        Format::Structured => structured(report),
    }
}

/// Pretty JSON with struct field order; the same run always yields the same bytes.
pub fn structured(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is serializable");
    s.push('\n');
    s
}

pub fn write_structured(report: &RunReport, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, structured(report)).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn label(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "PASS",
        Outcome::Fail => "FAIL",
        Outcome::Inconclusive => "INCONCLUSIVE",
        Outcome::Invalid => "INVALID",
    }
}

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn human(r: &RunReport) -> String {
    let mut out = String::new();
    let c = &r.config;
    let _ = writeln!(out, "corrfix {} {}  ({})", r.command, if r.scenario.is_empty() { "<unnamed>" } else { &r.scenario }, r.digest);
    let _ = writeln!(out, "mesh=1/{} tol={:e} eps={:e} eta={:e} seed={}", c.mesh, c.tol, c.eps, c.eta, c.seed);
    let _ = writeln!(out);
    let rows: Vec<[String; 6]> = r
        .operations
        .iter()
        .flat_map(|op| {
            let time = format!("{:.3}s", op.elapsed.as_secs_f64());
            if op.reports.is_empty() {
                return vec![[op.name.clone(), op.kind.clone(), label(op.outcome).into(), "-".into(), "-".into(), time]];
            }
            op.reports
                .iter()
                .enumerate()
                .map(|(i, rep)| {
                    let verdict = if rep.passed() { "PASS" } else { "FAIL" };
                    [
                        if i == 0 { op.name.clone() } else { String::new() },
                        rep.property.clone(),
                        verdict.into(),
                        rep.tested.to_string(),
                        rep.violations.len().to_string(),
                        if i == 0 { time.clone() } else { String::new() },
                    ]
                })
                .collect()
        })
        .collect();
    let head = ["OPERATION", "CHECK", "RESULT", "TESTED", "VIOLATIONS", "TIME"].map(String::from);
    let mut w = [0usize; 6];
    for row in std::iter::once(&head).chain(&rows) {
        for (k, cell) in row.iter().enumerate() {
            w[k] = w[k].max(cell.len());
        }
    }
    for row in std::iter::once(&head).chain(&rows) {
        let line: Vec<String> = row.iter().enumerate().map(|(k, cell)| format!("{cell:<width$}", width = w[k])).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    for op in &r.operations {
        if let Some(m) = &op.message {
            let _ = writeln!(out, "\n{} [{}]: {m}", op.name, label(op.outcome));
        }
        for rep in &op.reports {
            if rep.violations.is_empty() {
                continue;
            }
            let _ = writeln!(out, "\n{} / {} ({}): {} violations", op.name, rep.property, rep.grid, rep.violations.len());
            for v in rep.violations.iter().take(HUMAN_VIOLATION_LIMIT) {
                let detail = if v.detail.is_empty() { String::new() } else { format!("  {}", v.detail) };
                let _ = writeln!(out, "  at {}  distance {:.3e}{detail}", fmt_point(&v.at), v.distance);
            }
            if rep.violations.len() > HUMAN_VIOLATION_LIMIT {
                let _ = writeln!(out, "  ... {} more", rep.violations.len() - HUMAN_VIOLATION_LIMIT);
            }
        }
    }
    let _ = writeln!(out, "\n{} (exit {}) in {:.3}s", label(r.outcome), r.exit_code, r.elapsed().as_secs_f64());
    out
}
