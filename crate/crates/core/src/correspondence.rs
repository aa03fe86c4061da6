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

//! Polytope-valued correspondences over simplices and products of simplices.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::polytope::PolytopeSet;
use crate::simplex::{compositions, Mesh, SimplexDomain, DOMAIN_TOL};

/// Slack on the distance comparisons of the closure surrogate.
const COMPARE_SLACK: f64 = 1e-12;
/// Half-space tests treat points within this slack as on the boundary.
pub const REGION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Simplex(SimplexDomain),
    /// Points are concatenations of the factor coordinates.
    Product(Vec<SimplexDomain>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridNode {
    /// Concatenated integer barycentric coordinates of every factor.
    pub index: Vec<usize>,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DomainGrid {
    pub mesh: Mesh,
    pub nodes: Vec<GridNode>,
    factor_lens: Vec<usize>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl DomainGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn position(&self, index: &[usize]) -> Option<usize> {
        self.lookup.get(index).copied()
    }

    /// Nodes one lattice step away (move one unit of weight between two
    /// vertices of a single factor).
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let idx = &self.nodes[node].index;
        let mut out = Vec::new();
        let mut off = 0;
        for &len in &self.factor_lens {
            for i in 0..len {
                for j in 0..len {
                    if i == j || idx[off + j] == 0 {
                        continue;
                    }
                    let mut n = idx.clone();
                    n[off + i] += 1;
                    n[off + j] -= 1;
                    if let Some(p) = self.position(&n) {
                        out.push(p);
                    }
                }
            }
            off += len;
        }
        out
    }
}

impl Domain {
    pub fn factors(&self) -> Vec<&SimplexDomain> {
        match self {
            Domain::Simplex(s) => vec![s],
            Domain::Product(f) => f.iter().collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.factors().iter().map(|f| f.ambient_dim()).sum()
    }

    /// Splits a point into per-factor slices.
    pub fn split<'a>(&self, x: &'a [f64]) -> Vec<&'a [f64]> {
        let mut out = Vec::new();
        let mut off = 0;
        for f in self.factors() {
            let d = f.ambient_dim();
            out.push(&x[off..off + d]);
            off += d;
        }
        out
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.ambient_dim() && self.factors().iter().zip(self.split(x)).all(|(f, p)| f.contains_point(p, tol))
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: x.len() });
        }
        let mut s = 0.0;
        for (f, p) in self.factors().iter().zip(self.split(x)) {
            s += f.as_polytope().distance(p)?.powi(2);
        }
        Ok(s.sqrt())
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: x.len() });
        }
        if !self.contains(x, DOMAIN_TOL) {
            return Err(Error::OutsideDomain { distance: self.distance(x)? });
        }
        Ok(())
    }

    /// Cartesian product of the factor lattices, lexicographic in the index.
    pub fn grid(&self, mesh: Mesh) -> DomainGrid {
        let m = mesh.order() as f64;
        let factors = self.factors();
        let per: Vec<Vec<(Vec<usize>, Vec<f64>)>> = factors
            .iter()
            .map(|f| {
                compositions(f.vertex_count(), mesh.order())
                    .into_iter()
                    .map(|c| {
                        let l: Vec<f64> = c.iter().map(|&k| k as f64 / m).collect();
                        let p = f.point_at(&l);
                        (c, p)
                    })
                    .collect()
            })
            .collect();
        let mut nodes = Vec::new();
        let mut pick = vec![0usize; per.len()];
        'outer: loop {
            let mut index = Vec::new();
            let mut point = Vec::new();
            for (f, &k) in per.iter().zip(&pick) {
                index.extend_from_slice(&f[k].0);
                point.extend_from_slice(&f[k].1);
            }
            nodes.push(GridNode { index, point });
            let mut i = per.len();
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                pick[i] += 1;
                if pick[i] < per[i].len() {
                    break;
                }
                pick[i] = 0;
            }
        }
        let lookup = nodes.iter().enumerate().map(|(i, n)| (n.index.clone(), i)).collect();
        DomainGrid { mesh, nodes, factor_lens: factors.iter().map(|f| f.vertex_count()).collect(), lookup }
    }
}

/// A deterministic point-to-polytope map.
pub trait SetValuedMap: Send + Sync {
    fn value(&self, x: &[f64]) -> PolytopeSet;
}

impl<F> SetValuedMap for F
where
    F: Fn(&[f64]) -> PolytopeSet + Send + Sync,
{
    fn value(&self, x: &[f64]) -> PolytopeSet {
        self(x)
    }
}

#[derive(Clone)]
pub struct Correspondence {
    domain: Domain,
    codomain: PolytopeSet,
    map: Arc<dyn SetValuedMap>,
}

impl fmt::Debug for Correspondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Correspondence").field("domain", &self.domain).field("codomain", &self.codomain).finish()
    }
}

impl Correspondence {
    pub fn new(domain: Domain, codomain: PolytopeSet, map: impl SetValuedMap + 'static) -> Self {
        Self { domain, codomain, map: Arc::new(map) }
    }

    pub fn from_spec(domain: Domain, codomain: PolytopeSet, spec: CorrespondenceSpec) -> Result<Self> {
        spec.validate(domain.ambient_dim(), codomain.dim())?;
        let dim = codomain.dim();
        Ok(Self::new(domain, codomain, SpecMap { spec, dim }))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn codomain(&self) -> &PolytopeSet {
        &self.codomain
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<PolytopeSet> {
        self.domain.check_point(x)?;
        Ok(self.map.value(x))
    }

    /// Evaluation without the domain check; callers guarantee `x` is valid.
    pub fn value(&self, x: &[f64]) -> PolytopeSet {
        self.map.value(x)
    }

    /// `x -> (T(x) + V) ∩ Y` with `V` the closed `r`-ball of `norm`.
    pub fn thicken(&self, r: f64, norm: Norm) -> Result<Correspondence> {
        if r < 0.0 || !r.is_finite() {
            return Err(Error::NegativeRadius(r));
        }
        let ball = ball(self.codomain.dim(), r, norm);
        Ok(Self {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            map: Arc::new(Thickened { inner: self.map.clone(), ball, codomain: self.codomain.clone() }),
        })
    }

    /// Same values, restricted to a smaller (convex) domain.
    pub fn restrict(&self, domain: Domain) -> Result<Correspondence> {
        if domain.ambient_dim() != self.domain.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.domain.ambient_dim(), got: domain.ambient_dim() });
        }
        Ok(Self { domain, codomain: self.codomain.clone(), map: self.map.clone() })
    }

    pub fn sample_graph(&self, mesh: Mesh) -> GraphSample {
        let grid = self.domain.grid(mesh);
        let values = exec::map(&grid.nodes, |n| self.map.value(&n.point));
        GraphSample { mesh, samples: grid.nodes.into_iter().map(|n| n.point).zip(values).collect() }
    }
}

struct SpecMap {
    spec: CorrespondenceSpec,
    dim: usize,
}

impl SetValuedMap for SpecMap {
    fn value(&self, x: &[f64]) -> PolytopeSet {
        self.spec.eval(x, self.dim)
    }
}

struct Thickened {
    inner: Arc<dyn SetValuedMap>,
    ball: PolytopeSet,
    codomain: PolytopeSet,
}

impl SetValuedMap for Thickened {
    fn value(&self, x: &[f64]) -> PolytopeSet {
        let v = self.inner.value(x);
        if v.is_empty() {
            return v;
        }
        let grown = v.minkowski_sum(&self.ball).expect("ball has the codomain dimension");
        grown.intersect(&self.codomain).expect("codomain dimension")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    #[default]
    Inf,
    Two,
}

/// Closed ball of radius `r` around the origin. The Euclidean ball is
/// replaced by an inscribed polytope in dimensions 2 and 3.
pub fn ball(dim: usize, r: f64, norm: Norm) -> PolytopeSet {
    let origin = vec![0.0; dim];
    if r == 0.0 {
        return PolytopeSet::point(origin);
    }
    match (norm, dim) {
        (Norm::Inf, _) | (Norm::Two, 1) => PolytopeSet::cube(&origin, r),
        (Norm::Two, 2) => {
            let k = 32;
            let v = (0..k)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect();
            PolytopeSet::new(2, v).expect("dim 2")
        }
        (Norm::Two, _) => {
            let mut dirs: Vec<Vec<f64>> = Vec::new();
            for mask in 1..3usize.pow(dim as u32) {
                let mut d = Vec::with_capacity(dim);
                let mut m = mask;
                for _ in 0..dim {
                    d.push((m % 3) as f64 - 1.0);
                    m /= 3;
                }
                let n = d.iter().map(|c| c * c).sum::<f64>().sqrt();
                if n > 0.0 {
                    dirs.push(d.iter().map(|c| r * c / n).collect());
                }
            }
            PolytopeSet::new(dim, dirs).expect("dim").reduced()
        }
    }
}

/// Sampled graph `{(x, T(x))}` on a domain lattice.
#[derive(Debug, Clone)]
pub struct GraphSample {
    pub mesh: Mesh,
    pub samples: Vec<(Vec<f64>, PolytopeSet)>,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl GraphSample {
    /// True iff some sample `x'` within `eta` of `x` has `dist(y, T(x')) <= eta`.
    pub fn near_graph(&self, x: &[f64], y: &[f64], eta: f64) -> Result<bool> {
        for (xp, v) in &self.samples {
            if xp.len() != x.len() {
                return Err(Error::DimensionMismatch { expected: xp.len(), got: x.len() });
            }
            if euclid(xp, x) <= eta + COMPARE_SLACK && v.distance(y)? <= eta + COMPARE_SLACK {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Numerical surrogate for `y ∈ T̄(x)`: the pair `(x, y)` is within `eta` of the
/// graph sampled on the domain lattice of spacing `h` together with `x` itself.
pub fn graph_closure_membership(t: &Correspondence, x: &[f64], y: &[f64], eta: f64, h: f64) -> Result<bool> {
    if y.len() != t.codomain.dim() {
        return Err(Error::DimensionMismatch { expected: t.codomain.dim(), got: y.len() });
    }
    if x.len() != t.domain.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: t.domain.ambient_dim(), got: x.len() });
    }
    if t.map.value(x).distance(y)? <= eta + COMPARE_SLACK {
        return Ok(true);
    }
    let mesh = Mesh::from_spacing(h)?;
    let grid = t.domain.grid(mesh);
    let near: Vec<&GridNode> = grid.nodes.iter().filter(|n| euclid(&n.point, x) <= eta + COMPARE_SLACK).collect();
    let hits = exec::map(&near, |n| t.map.value(&n.point).distance(y).map(|d| d <= eta + COMPARE_SLACK));
    for h in hits {
        if h? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
    /// `normal·x < offset` instead of `<=`. Boundary points (within
    /// [`REGION_SLACK`]) satisfy the closed test and fail the strict one.
    #[serde(default)]
    pub strict: bool,
}

impl HalfSpace {
    pub fn holds(&self, x: &[f64]) -> bool {
        let v: f64 = self.normal.iter().zip(x).map(|(a, b)| a * b).sum();
        if self.strict {
            v < self.offset - REGION_SLACK
        } else {
            v <= self.offset + REGION_SLACK
        }
    }
}

/// Intersection of half-spaces; no constraints means the whole space.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Region {
    #[serde(default)]
    pub constraints: Vec<HalfSpace>,
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|h| h.holds(x))
    }

    fn validate(&self, ddim: usize) -> Result<()> {
        for h in &self.constraints {
            if h.normal.len() != ddim {
                return Err(Error::DimensionMismatch { expected: ddim, got: h.normal.len() });
            }
        }
        Ok(())
    }
}

/// Vertex `M x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl AffineMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.iter().zip(&self.offset).map(|(row, b)| row.iter().zip(x).map(|(m, xi)| m * xi).sum::<f64>() + b).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub region: Region,
    pub value: CorrespondenceSpec,
}

/// Declarative correspondence descriptions used by scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrespondenceSpec {
    Constant {
        vertices: Vec<Vec<f64>>,
    },
    AffineVertices {
        maps: Vec<AffineMap>,
    },
    /// First piece whose region contains `x`; `otherwise` (default empty) if none.
    PiecewiseRegion {
        pieces: Vec<Piece>,
        #[serde(default)]
        otherwise: Option<Box<CorrespondenceSpec>>,
    },
    EmptyOutsideRegion {
        region: Region,
        inner: Box<CorrespondenceSpec>,
    },
}

impl CorrespondenceSpec {
    pub fn validate(&self, ddim: usize, cdim: usize) -> Result<()> {
        match self {
            CorrespondenceSpec::Constant { vertices } => {
                for v in vertices {
                    if v.len() != cdim {
                        return Err(Error::DimensionMismatch { expected: cdim, got: v.len() });
                    }
                }
            }
            CorrespondenceSpec::AffineVertices { maps } => {
                for m in maps {
                    if m.matrix.len() != cdim || m.offset.len() != cdim {
                        return Err(Error::DimensionMismatch { expected: cdim, got: m.matrix.len() });
                    }
                    for row in &m.matrix {
                        if row.len() != ddim {
                            return Err(Error::DimensionMismatch { expected: ddim, got: row.len() });
                        }
                    }
                }
            }
            CorrespondenceSpec::PiecewiseRegion { pieces, otherwise } => {
                for p in pieces {
                    p.region.validate(ddim)?;
                    p.value.validate(ddim, cdim)?;
                }
                if let Some(o) = otherwise {
                    o.validate(ddim, cdim)?;
                }
            }
            CorrespondenceSpec::EmptyOutsideRegion { region, inner } => {
                region.validate(ddim)?;
                inner.validate(ddim, cdim)?;
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], cdim: usize) -> PolytopeSet {
        match self {
            CorrespondenceSpec::Constant { vertices } => PolytopeSet::new(cdim, vertices.clone()).expect("validated").reduced(),
            CorrespondenceSpec::AffineVertices { maps } => {
                PolytopeSet::new(cdim, maps.iter().map(|m| m.apply(x)).collect()).expect("validated").reduced()
            }
            CorrespondenceSpec::PiecewiseRegion { pieces, otherwise } => {
                for p in pieces {
                    if p.region.contains(x) {
                        return p.value.eval(x, cdim);
                    }
                }
                match otherwise {
                    Some(o) => o.eval(x, cdim),
                    None => PolytopeSet::empty(cdim),
                }
            }
            CorrespondenceSpec::EmptyOutsideRegion { region, inner } => {
                if region.contains(x) {
                    inner.eval(x, cdim)
                } else {
                    PolytopeSet::empty(cdim)
                }
            }
        }
    }
}
