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

//! Scenario runner behind the `corrfix` binary.
//!
//! A scenario is a versioned JSON document declaring domains, correspondences,
//! witnesses and the operations each command runs. [`run_scenario`] executes
//! one command and returns a [`RunReport`]; [`emit`] renders it as a human
//! table or as the structured `corrfix-report/1` document.

// negated float comparisons are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod emit;
pub mod run;
pub mod scenario;

use std::fmt;

use serde::Serialize;

pub use run::{run_scenario, Operation, Outcome, RunReport};
pub use scenario::Scenario;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("cannot write report: {0}")]
    Output(String),
}

impl From<corrfix_core::Error> for CliError {
    fn from(e: corrfix_core::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Output(_) => EXIT_VIOLATION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Select,
    Fixpoint,
    Hull,
    Equilibrium,
}

impl Command {
    pub const ALL: [Command; 5] = [Command::Check, Command::Select, Command::Fixpoint, Command::Hull, Command::Equilibrium];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Select => "select",
            Command::Fixpoint => "fixpoint",
            Command::Hull => "hull",
            Command::Equilibrium => "equilibrium",
        }
    }

    /// Scenario section the command reads.
    pub fn section(self) -> &'static str {
        match self {
            Command::Check => "checks",
            Command::Select => "selections",
            Command::Fixpoint => "fixpoints",
            Command::Hull => "hulls",
            Command::Equilibrium => "games",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Structured,
}

/// Command-line values that take precedence over the scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Grid order from `64`, `1/64`, or a spacing such as `0.015625`.
pub fn parse_mesh(s: &str) -> Result<usize, String> {
    let s = s.trim();
    let order = if let Some(d) = s.strip_prefix("1/") {
        d.parse::<usize>().map_err(|e| format!("bad mesh {s:?}: {e}"))?
    } else if let Ok(m) = s.parse::<usize>() {
        m
    } else {
        let h: f64 = s.parse().map_err(|_| format!("bad mesh {s:?}"))?;
        if !(h > 0.0 && h <= 1.0) {
            return Err(format!("mesh spacing {h} not in (0, 1]"));
        }
        let m = (1.0 / h).round();
        if (m * h - 1.0).abs() > 1e-9 {
            return Err(format!("mesh spacing {h} is not 1/m"));
        }
        m as usize
    };
    if order == 0 {
        return Err("mesh order must be positive".into());
    }
    Ok(order)
}
