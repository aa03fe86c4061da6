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

//! Vertex-represented convex polytopes (possibly empty) in small dimension.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minnorm::{dot, min_norm_point};

/// Membership tolerance used when collecting intersection candidates.
const CANDIDATE_TOL: f64 = 1e-9;
/// Dedup radius for vertex lists.
const DEDUP_TOL: f64 = 1e-12;
/// A separating hyperplane certifies emptiness only above this margin.
pub const SEPARATION_MARGIN: f64 = 1e-12;

/// Convex hull of a finite vertex list. An empty list is the empty set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeSet {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatingHyperplane {
    pub normal: Vec<f64>,
    /// min of normal·p over the first set
    pub lower: f64,
    /// max of normal·q over the second set
    pub upper: f64,
}

impl SeparatingHyperplane {
    pub fn margin(&self) -> f64 {
        self.lower - self.upper
    }

    /// Re-evaluates the hyperplane on both vertex lists.
    pub fn verify(&self, p: &PolytopeSet, q: &PolytopeSet) -> bool {
        if p.is_empty() || q.is_empty() || p.dim != self.normal.len() || q.dim != self.normal.len() {
            return false;
        }
        let lo = p.vertices.iter().map(|v| dot(&self.normal, v)).fold(f64::INFINITY, f64::min);
        let hi = q.vertices.iter().map(|v| dot(&self.normal, v)).fold(f64::NEG_INFINITY, f64::max);
        lo - hi > SEPARATION_MARGIN
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Separation {
    /// One of the operands is the empty set.
    EmptyOperand,
    /// The hulls meet (or come within the separation margin).
    Overlap {
        gap: f64,
    },
    Disjoint(SeparatingHyperplane),
}

impl Separation {
    pub fn is_empty_intersection(&self) -> bool {
        !matches!(self, Separation::Overlap { .. })
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

pub(crate) fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let mut i = r;
        while i > 0 && idx[i - 1] == i - 1 + n - r {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn hull_2d(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| lex(a, b));
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl PolytopeSet {
    pub fn new(dim: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("polytope ambient dimension must be positive".into()));
        }
        for v in &vertices {
            check_dim(dim, v.len())?;
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidDimension("non-finite vertex coordinate".into()));
            }
        }
        Ok(Self { dim, vertices })
    }

    /// Nonempty hull; the dimension is taken from the first vertex.
    pub fn from_vertices(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim =
            vertices.first().map(|v| v.len()).ok_or_else(|| Error::InvalidDimension("from_vertices needs at least one vertex".into()))?;
        Self::new(dim, vertices)
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, vertices: Vec::new() }
    }

    pub fn point(p: Vec<f64>) -> Self {
        Self { dim: p.len(), vertices: vec![p] }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self { dim: 1, vertices: vec![vec![lo.min(hi)], vec![lo.max(hi)]] }
    }

    /// Corners of the box centered at `center` with half-width `r`.
    pub fn cube(center: &[f64], r: f64) -> Self {
        let d = center.len();
        let mut vertices = Vec::with_capacity(1 << d);
        for mask in 0..(1usize << d) {
            vertices.push((0..d).map(|k| if mask >> k & 1 == 1 { center[k] + r } else { center[k] - r }).collect());
        }
        Self { dim: d, vertices }.reduced()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Euclidean distance from `y` to the hull; infinite for the empty set.
    pub fn distance(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.dim, y.len())?;
        if self.is_empty() {
            return Ok(f64::INFINITY);
        }
        if self.dim == 1 {
            let lo = self.vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = self.vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
            return Ok((lo - y[0]).max(y[0] - hi).max(0.0));
        }
        let shifted: Vec<Vec<f64>> = self.vertices.iter().map(|v| sub(v, y)).collect();
        Ok(min_norm_point(&shifted).norm())
    }

    pub fn nearest_point(&self, y: &[f64]) -> Result<Option<Vec<f64>>> {
        check_dim(self.dim, y.len())?;
        if self.is_empty() {
            return Ok(None);
        }
        let shifted: Vec<Vec<f64>> = self.vertices.iter().map(|v| sub(v, y)).collect();
        let mn = min_norm_point(&shifted);
        Ok(Some(mn.point.iter().zip(y).map(|(a, b)| a + b).collect()))
    }

    /// `dist(y, self) <= tol`; the empty set contains nothing.
    pub fn contains(&self, y: &[f64], tol: f64) -> Result<bool> {
        if self.is_empty() {
            check_dim(self.dim, y.len())?;
            return Ok(false);
        }
        Ok(self.distance(y)? <= tol)
    }

    pub fn is_subset_of(&self, other: &PolytopeSet, tol: f64) -> Result<bool> {
        check_dim(other.dim, self.dim)?;
        for v in &self.vertices {
            if !other.contains(v, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Equality of hulls up to `tol`.
    pub fn same_hull(&self, other: &PolytopeSet, tol: f64) -> Result<bool> {
        Ok(self.is_subset_of(other, tol)? && other.is_subset_of(self, tol)?)
    }

    /// Drops duplicate and non-extreme vertices.
    pub fn reduced(&self) -> Self {
        let mut uniq: Vec<Vec<f64>> = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            if !uniq.iter().any(|u| linf(u, v) <= DEDUP_TOL) {
                uniq.push(v.clone());
            }
        }
        if uniq.len() <= 1 {
            return Self { dim: self.dim, vertices: uniq };
        }
        let vertices = match self.dim {
            1 => {
                let lo = uniq.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                let hi = uniq.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
                if hi - lo <= DEDUP_TOL {
                    vec![vec![lo]]
                } else {
                    vec![vec![lo], vec![hi]]
                }
            }
            2 => hull_2d(uniq),
            _ => {
                uniq.sort_by(|a, b| lex(a, b));
                let mut keep = uniq;
                let mut i = 0;
                while i < keep.len() {
                    if keep.len() > 1 {
                        let others: Vec<Vec<f64>> =
                            keep.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| sub(v, &keep[i])).collect();
                        if min_norm_point(&others).norm() <= DEDUP_TOL {
                            keep.remove(i);
                            continue;
                        }
                    }
                    i += 1;
                }
                keep
            }
        };
        Self { dim: self.dim, vertices }
    }

    pub fn minkowski_sum(&self, other: &PolytopeSet) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        if self.is_empty() || other.is_empty() {
            return Ok(Self::empty(self.dim));
        }
        let mut vertices = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for p in &self.vertices {
            for q in &other.vertices {
                vertices.push(p.iter().zip(q).map(|(a, b)| a + b).collect());
            }
        }
        Ok(Self { dim: self.dim, vertices }.reduced())
    }

    /// Decides whether the hulls are disjoint. When they are, the returned
    /// hyperplane separates them with a positive margin; the nearest pair is
    /// found as the minimum-norm point of the difference set.
    pub fn separation(&self, other: &PolytopeSet) -> Result<Separation> {
        check_dim(self.dim, other.dim)?;
        if self.is_empty() || other.is_empty() {
            return Ok(Separation::EmptyOperand);
        }
        let mut diff = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for p in &self.vertices {
            for q in &other.vertices {
                diff.push(sub(p, q));
            }
        }
        let mn = min_norm_point(&diff);
        let gap = mn.norm();
        if gap <= SEPARATION_MARGIN {
            return Ok(Separation::Overlap { gap });
        }
        let normal: Vec<f64> = mn.point.iter().map(|c| c / gap).collect();
        let lower = self.vertices.iter().map(|v| dot(&normal, v)).fold(f64::INFINITY, f64::min);
        let upper = other.vertices.iter().map(|v| dot(&normal, v)).fold(f64::NEG_INFINITY, f64::max);
        let h = SeparatingHyperplane { normal, lower, upper };
        if h.margin() > SEPARATION_MARGIN {
            Ok(Separation::Disjoint(h))
        } else {
            Ok(Separation::Overlap { gap })
        }
    }

    /// Vertex representation of the intersection of the two hulls.
    ///
    /// Every vertex of the intersection is the unique common point of the
    /// affine hulls of a vertex subset of each operand whose dimensions add up
    /// to at most the ambient dimension, so the candidates are enumerated
    /// directly and filtered by membership.
    pub fn intersect(&self, other: &PolytopeSet) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let sep = self.separation(other)?;
        if sep.is_empty_intersection() {
            return Ok(Self::empty(self.dim));
        }
        if self.dim == 1 {
            let (a0, a1) = bounds_1d(self);
            let (b0, b1) = bounds_1d(other);
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            return Ok(Self { dim: 1, vertices: vec![vec![lo.min(hi)], vec![hi.max(lo)]] }.reduced());
        }
        let p = self.reduced();
        let q = other.reduced();
        let mut cand: Vec<Vec<f64>> = Vec::new();
        for v in &p.vertices {
            if q.contains(v, CANDIDATE_TOL)? {
                cand.push(v.clone());
            }
        }
        for v in &q.vertices {
            if p.contains(v, CANDIDATE_TOL)? {
                cand.push(v.clone());
            }
        }
        let c = self.dim;
        for k in 1..c {
            for l in 1..=(c - k) {
                let ps = combinations(p.vertices.len(), k + 1);
                let qs = combinations(q.vertices.len(), l + 1);
                for s in &ps {
                    for t in &qs {
                        if let Some(x) = affine_meet(&p.vertices, s, &q.vertices, t) {
                            if p.contains(&x, CANDIDATE_TOL)? && q.contains(&x, CANDIDATE_TOL)? {
                                cand.push(x);
                            }
                        }
                    }
                }
            }
        }
        if cand.is_empty() {
            // touching within the separation margin
            let mut diff = Vec::new();
            let mut pairs = Vec::new();
            for (i, a) in p.vertices.iter().enumerate() {
                for (j, b) in q.vertices.iter().enumerate() {
                    diff.push(sub(a, b));
                    pairs.push((i, j));
                }
            }
            let mn = min_norm_point(&diff);
            let mut x = vec![0.0; c];
            for (idx, w) in mn.weights {
                let (i, _) = pairs[idx];
                for (xk, pk) in x.iter_mut().zip(&p.vertices[i]) {
                    *xk += w * pk;
                }
            }
            cand.push(x);
        }
        Ok(Self { dim: c, vertices: cand }.reduced())
    }
}

fn bounds_1d(p: &PolytopeSet) -> (f64, f64) {
    let lo = p.vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
    let hi = p.vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Unique common point of aff{a_s} and aff{b_t}, if any.
fn affine_meet(a: &[Vec<f64>], s: &[usize], b: &[Vec<f64>], t: &[usize]) -> Option<Vec<f64>> {
    let c = a[0].len();
    let unknowns = s.len() + t.len();
    let rows = c + 2;
    let mut m = DMatrix::<f64>::zeros(rows, unknowns);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (j, &si) in s.iter().enumerate() {
        for r in 0..c {
            m[(r, j)] = a[si][r];
        }
        m[(c, j)] = 1.0;
    }
    for (j, &ti) in t.iter().enumerate() {
        for r in 0..c {
            m[(r, s.len() + j)] = -b[ti][r];
        }
        m[(c + 1, s.len() + j)] = 1.0;
    }
    rhs[c] = 1.0;
    rhs[c + 1] = 1.0;
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if svd.singular_values.len() < unknowns || smin <= 1e-10 * smax.max(1.0) {
        return None;
    }
    // one step of iterative refinement brings the meet to working precision
    let mut sol = svd.solve(&rhs, 1e-14).ok()?;
    let r = &rhs - &m * &sol;
    sol += svd.solve(&r, 1e-14).ok()?;
    let resid = (&m * &sol - &rhs).norm();
    if resid > 1e-9 {
        return None;
    }
    let mut x = vec![0.0; c];
    for (j, &si) in s.iter().enumerate() {
        for r in 0..c {
            x[r] += sol[j] * a[si][r];
        }
    }
    Some(x)
}

/// Free-function form of [`PolytopeSet::contains`].
pub fn contains(p: &PolytopeSet, y: &[f64], tol: f64) -> Result<bool> {
    p.contains(y, tol)
}

/// Free-function form of [`PolytopeSet::intersect`].
pub fn intersect(p: &PolytopeSet, q: &PolytopeSet) -> Result<PolytopeSet> {
    p.intersect(q)
}
