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

//! Continuous selections built from class witnesses.

use std::collections::HashMap;

use crate::biconvex::{biconvex_hull, BiconvexGridSet, GridAxis, ProductPoint};
use crate::classes::{BiconvexWitness, PlMap, WnqWitness};
use crate::correspondence::Correspondence;
use crate::error::{Error, Result};
use crate::exec;
use crate::report::{PropertyReport, Violation};
use crate::simplex::{Mesh, SimplexDomain};

const ALIGN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionKind {
    Wnq,
    Biconvex,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionDomain {
    Simplex(SimplexDomain),
    /// Simplex on the base pairs, restricted to their grid biconvex hull.
    Biconvex {
        simplex: SimplexDomain,
        hull: BiconvexGridSet,
    },
}

impl SelectionDomain {
    pub fn simplex(&self) -> &SimplexDomain {
        match self {
            SelectionDomain::Simplex(s) | SelectionDomain::Biconvex { simplex: s, .. } => s,
        }
    }
}

/// `f(x) = Σ g_i(λ_i(x)) b_i` with `λ` the barycentric coordinates of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionFunction {
    kind: SelectionKind,
    domain: SelectionDomain,
    values: Vec<Vec<f64>>,
    g: Vec<PlMap>,
}

impl SelectionFunction {
    pub fn kind(&self) -> SelectionKind {
        self.kind
    }

    pub fn domain(&self) -> &SelectionDomain {
        &self.domain
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn output_dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        match &self.domain {
            SelectionDomain::Simplex(k) => k.contains_point(x, crate::simplex::DOMAIN_TOL),
            SelectionDomain::Biconvex { simplex, hull } => {
                let dx = hull.x_axis().dim();
                simplex.contains_point(x, crate::simplex::DOMAIN_TOL)
                    && hull.contains(&ProductPoint::new(x[..dx].to_vec(), x[dx..].to_vec()))
            }
        }
    }

    /// Weights `g_i(λ_i)` at a domain point.
    pub fn weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let SelectionDomain::Biconvex { simplex, .. } = &self.domain {
            if !self.in_domain(x) {
                return Err(Error::OutsideDomain { distance: simplex.as_polytope().distance(x)? });
            }
        }
        let l = self.domain.simplex().barycentric_coordinates(x)?;
        Ok(self.g.iter().zip(l.as_slice()).map(|(g, &li)| g.eval(li)).collect())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let w = self.weights(x)?;
        let mut out = vec![0.0; self.output_dim()];
        for (wi, b) in w.iter().zip(&self.values) {
            if *wi == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(b) {
                *o += wi * v;
            }
        }
        Ok(out)
    }
}

/// Selection on `K` from a WNQ witness whose base points are the vertices of `K`.
pub fn build_wnq_selection(k: &SimplexDomain, w: &WnqWitness) -> Result<SelectionFunction> {
    if w.points.len() != k.vertex_count() || w.values.len() != w.points.len() || w.g.len() != w.points.len() {
        return Err(Error::InvalidWitness("witness not aligned with the simplex vertices".into()));
    }
    for (i, (p, a)) in w.points.iter().zip(k.vertices()).enumerate() {
        if p.len() != a.len() || p.iter().zip(a).any(|(u, v)| (u - v).abs() > ALIGN_TOL) {
            return Err(Error::InvalidWitness(format!("base point {i} is not vertex {i} of the simplex")));
        }
    }
    let d = w.values[0].len();
    if w.values.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidWitness("values of mixed dimension".into()));
    }
    Ok(SelectionFunction {
        kind: SelectionKind::Wnq,
        domain: SelectionDomain::Simplex(k.clone()),
        values: w.values.clone(),
        g: w.g.clone(),
    })
}

/// Selection `Σ λ_i c_i` on the biconvex hull of affinely independent base pairs.
pub fn build_biconvex_selection(w: &BiconvexWitness, x_axis: &GridAxis, y_axis: &GridAxis) -> Result<SelectionFunction> {
    if w.pairs.is_empty() || w.pairs.len() != w.values.len() {
        return Err(Error::InvalidWitness("pair and value counts differ".into()));
    }
    let simplex = SimplexDomain::new(w.pairs.iter().map(ProductPoint::concat).collect())?;
    let hull = biconvex_hull(&w.pairs, x_axis, y_axis)?;
    let n = w.pairs.len();
    Ok(SelectionFunction {
        kind: SelectionKind::Biconvex,
        domain: SelectionDomain::Biconvex { simplex, hull },
        values: w.values.clone(),
        g: vec![PlMap::identity(); n],
    })
}

/// `f(x) ∈ T(x)` on the domain grid, plus the largest difference quotient
/// between lattice neighbors.
pub fn verify_selection(f: &SelectionFunction, t: &Correspondence, mesh: Mesh, tol: f64) -> Result<PropertyReport> {
    let k = f.domain.simplex();
    let nodes: Vec<(Vec<usize>, Vec<f64>)> = k.grid(mesh).into_iter().filter(|(_, p)| f.in_domain(p)).collect();
    let evals = exec::map(&nodes, |(_, x)| -> Result<(Vec<f64>, f64)> {
        let y = f.eval(x)?;
        let d = t.evaluate(x)?.distance(&y)?;
        Ok((y, d))
    });
    let mut fx = Vec::with_capacity(nodes.len());
    let mut violations = Vec::new();
    for ((_, x), r) in nodes.iter().zip(evals) {
        let (y, d) = r?;
        if d > tol {
            violations.push(Violation::new(x.clone(), d));
        }
        fx.push(y);
    }
    let lookup: HashMap<&[usize], usize> = nodes.iter().enumerate().map(|(i, (c, _))| (c.as_slice(), i)).collect();
    let mut lip: f64 = 0.0;
    for (i, (c, x)) in nodes.iter().enumerate() {
        for a in 0..c.len() {
            for b in 0..c.len() {
                if a == b || c[b] == 0 {
                    continue;
                }
                let mut n = c.clone();
                n[a] += 1;
                n[b] -= 1;
                if let Some(&j) = lookup.get(n.as_slice()) {
                    let dx = dist(x, &nodes[j].1);
                    if dx > 0.0 {
                        lip = lip.max(dist(&fx[i], &fx[j]) / dx);
                    }
                }
            }
        }
    }
    let grid = format!("simplex n={} mesh=1/{}", k.vertex_count(), mesh.order());
    Ok(PropertyReport::new("selection", grid, nodes.len(), violations)
        .with_metric("lipschitz", lip)
        .with_metric("max_g_slope", f.g.iter().map(PlMap::max_slope).fold(0.0, f64::max)))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
