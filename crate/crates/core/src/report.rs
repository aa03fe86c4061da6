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

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// One failed test inside a sweep: where it happened and how far the tested
/// point was from the required set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub at: Vec<f64>,
    pub distance: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Violation {
    pub fn new(at: Vec<f64>, distance: f64) -> Self {
        Self { at, distance, detail: String::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub grid: String,
    pub tested: usize,
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    pub verdict: Verdict,
}

impl PropertyReport {
    /// Builds a report; the verdict is `Pass` iff `violations` is empty.
    pub fn new(property: impl Into<String>, grid: impl Into<String>, tested: usize, mut violations: Vec<Violation>) -> Self {
        violations.sort_by(|a, b| lex_cmp(&a.at, &b.at).then_with(|| a.detail.cmp(&b.detail)));
        let verdict = if violations.is_empty() { Verdict::Pass } else { Verdict::Fail };
        Self { property: property.into(), grid: grid.into(), tested, violations, notes: Vec::new(), metrics: BTreeMap::new(), verdict }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    /// Merges sub-reports; passes iff all of them pass.
    pub fn combine(property: impl Into<String>, grid: impl Into<String>, parts: &[PropertyReport]) -> Self {
        let tested = parts.iter().map(|p| p.tested).sum();
        let violations = parts.iter().flat_map(|p| p.violations.iter().cloned()).collect();
        let mut out = Self::new(property, grid, tested, violations);
        for p in parts {
            out.notes.extend(p.notes.iter().cloned());
        }
        out
    }
}
