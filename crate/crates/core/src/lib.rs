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

//! Polytope-valued correspondences on simplices and products of simplices:
//! convexity-class checkers, continuous selections built from witnesses,
//! simplicial fixed-point search, biconvex hulls at grid resolution, and a
//! generalized quasi-game equilibrium pipeline with verifiable certificates.

// negated float comparisons are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biconvex;
pub mod classes;
pub mod correspondence;
pub mod error;
pub mod exec;
pub mod fixed_point;
pub mod game;
mod minnorm;
pub mod polytope;
pub mod report;
pub mod selection;
pub mod simplex;

pub use error::{Error, Result};
pub use polytope::PolytopeSet;
pub use report::{PropertyReport, Verdict, Violation};
pub use simplex::{Mesh, SimplexDomain};
