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

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vertices are affinely dependent (smallest normalized singular value {0:e})")]
    AffinelyDependent(f64),

    #[error("point lies outside the domain (distance {distance:e})")]
    OutsideDomain { distance: f64 },

    #[error("invalid mesh order {0}; must be at least 1")]
    InvalidMesh(usize),

    #[error("negative radius {0}")]
    NegativeRadius(f64),

    #[error("invalid reparameterization: {0}")]
    InvalidReparameterization(String),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("witness family inconsistent: sum of g_i(lambda_i) is {sum} at lambda {lambda:?}")]
    WitnessInconsistent { lambda: Vec<f64>, sum: f64 },

    #[error("no witness supplied for radius {0}")]
    MissingWitness(f64),

    #[error("witness rejected at radius {radius}: {violations} grid violations")]
    WitnessRejected { radius: f64, violations: usize },

    #[error("fixed-point search did not converge: best residual {residual:e} at {best:?}")]
    NonConvergence { best: Vec<f64>, residual: f64 },

    #[error("biconvex hull iteration cap reached ({added_last_round} cells added in last round)")]
    HullIterationCap { added_last_round: usize },

    #[error("selection undefined on W_{agent} at {point:?}")]
    SelectionUndefined { agent: usize, point: Vec<f64> },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}
