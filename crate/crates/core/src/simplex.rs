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

//! Simplices, barycentric coordinates and Kuhn (Freudenthal) refinement.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::PolytopeSet;

/// Coordinates must sum to one within this.
pub const SUM_TOL: f64 = 1e-12;
/// Points this close outside a facet are clamped back in.
pub const DOMAIN_TOL: f64 = 1e-9;
const MIN_SINGULAR: f64 = 1e-10;

/// Lattice order `m` of a grid with spacing `h = 1/m` in barycentric
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mesh(usize);

impl Mesh {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidMesh(order));
        }
        Ok(Self(order))
    }

    /// Smallest order whose spacing does not exceed `h`.
    pub fn from_spacing(h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidMesh(0));
        }
        Self::new(((1.0 / h) - 1e-9).ceil().max(1.0) as usize)
    }

    pub fn order(self) -> usize {
        self.0
    }

    pub fn spacing(self) -> f64 {
        1.0 / self.0 as f64
    }
}

/// The standard simplex of coefficient vectors with `n` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardSimplex {
    n: usize,
}

pub fn standard_simplex(n: usize) -> Result<StandardSimplex> {
    if n == 0 {
        return Err(Error::InvalidDimension("standard simplex needs at least one vertex".into()));
    }
    Ok(StandardSimplex { n })
}

impl StandardSimplex {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn vertex(&self, i: usize) -> BarycentricPoint {
        let mut l = vec![0.0; self.n];
        l[i] = 1.0;
        BarycentricPoint(l)
    }

    pub fn centroid(&self) -> BarycentricPoint {
        BarycentricPoint(vec![1.0 / self.n as f64; self.n])
    }

    pub fn contains(&self, lambda: &[f64]) -> bool {
        lambda.len() == self.n && is_simplex_vector(lambda)
    }

    /// All grid points of the simplex at the given mesh, lexicographic.
    pub fn grid(&self, mesh: Mesh) -> Vec<BarycentricPoint> {
        let m = mesh.order() as f64;
        compositions(self.n, mesh.order()).into_iter().map(|c| BarycentricPoint(c.iter().map(|&k| k as f64 / m).collect())).collect()
    }
}

fn is_simplex_vector(l: &[f64]) -> bool {
    l.iter().all(|&v| v >= 0.0 && v.is_finite()) && (l.iter().sum::<f64>() - 1.0).abs() <= SUM_TOL
}

/// A point of the standard simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarycentricPoint(Vec<f64>);

impl BarycentricPoint {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() || !is_simplex_vector(&lambda) {
            return Err(Error::InvalidDimension(format!("{lambda:?} is not a point of the standard simplex")));
        }
        Ok(Self(lambda))
    }

    /// Clamps entries within `DOMAIN_TOL` below zero and renormalizes.
    pub fn clamped(raw: &[f64]) -> Result<Self> {
        if raw.iter().any(|&v| v < -DOMAIN_TOL || !v.is_finite()) {
            return Err(Error::InvalidDimension(format!("{raw:?} lies outside the simplex")));
        }
        let mut l: Vec<f64> = raw.iter().map(|&v| v.max(0.0)).collect();
        let s: f64 = l.iter().sum();
        if s <= 0.0 {
            return Err(Error::InvalidDimension("zero coefficient vector".into()));
        }
        l.iter_mut().for_each(|v| *v /= s);
        Ok(Self(l))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Convex hull of affinely independent points in R^d, with the coordinate
/// solve factored once.
#[derive(Debug, Clone)]
pub struct SimplexDomain {
    vertices: Vec<Vec<f64>>,
    /// (n-1) x d left inverse of the edge matrix [a_2-a_1, ..., a_n-a_1]
    left_inverse: DMatrix<f64>,
    edges: DMatrix<f64>,
}

impl PartialEq for SimplexDomain {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

impl Serialize for SimplexDomain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.vertices.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SimplexDomain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<Vec<f64>>::deserialize(d)?;
        SimplexDomain::new(v).map_err(serde::de::Error::custom)
    }
}

impl SimplexDomain {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let n = vertices.len();
        if n == 0 {
            return Err(Error::InvalidDimension("simplex needs at least one vertex".into()));
        }
        let d = vertices[0].len();
        if d == 0 {
            return Err(Error::InvalidDimension("vertices must have positive dimension".into()));
        }
        for v in &vertices {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidDimension("non-finite vertex coordinate".into()));
            }
        }
        if n - 1 > d {
            return Err(Error::InvalidDimension(format!("{n} vertices cannot be affinely independent in R^{d}")));
        }
        let k = n - 1;
        let mut edges = DMatrix::<f64>::zeros(d, k);
        for j in 0..k {
            for r in 0..d {
                edges[(r, j)] = vertices[j + 1][r] - vertices[0][r];
            }
        }
        let left_inverse = if k == 0 {
            DMatrix::zeros(0, d)
        } else {
            let mut normalized = edges.clone();
            for j in 0..k {
                let nrm = normalized.column(j).norm();
                if nrm == 0.0 {
                    return Err(Error::AffinelyDependent(0.0));
                }
                normalized.column_mut(j).scale_mut(1.0 / nrm);
            }
            let sv = normalized.svd(false, false).singular_values;
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            if smin <= MIN_SINGULAR {
                return Err(Error::AffinelyDependent(smin));
            }
            let gram = edges.transpose() * &edges;
            let inv = gram.try_inverse().ok_or(Error::AffinelyDependent(smin))?;
            inv * edges.transpose()
        };
        Ok(Self { vertices, left_inverse, edges })
    }

    /// The simplex spanned by the standard basis of R^n.
    pub fn standard(n: usize) -> Result<Self> {
        standard_simplex(n)?;
        Self::new((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn as_polytope(&self) -> PolytopeSet {
        PolytopeSet::new(self.ambient_dim(), self.vertices.clone()).expect("validated vertices")
    }

    /// Unclamped affine coordinates and the distance of `p` from the affine hull.
    pub fn raw_coordinates(&self, p: &[f64]) -> Result<(Vec<f64>, f64)> {
        let d = self.ambient_dim();
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
        let rel = nalgebra::DVector::from_iterator(d, p.iter().zip(&self.vertices[0]).map(|(a, b)| a - b));
        let k = self.vertex_count() - 1;
        let mut lambda = Vec::with_capacity(k + 1);
        if k == 0 {
            lambda.push(1.0);
            return Ok((lambda, rel.norm()));
        }
        let mu = &self.left_inverse * &rel;
        let resid = (&self.edges * &mu - &rel).norm();
        lambda.push(1.0 - mu.iter().sum::<f64>());
        lambda.extend(mu.iter());
        Ok((lambda, resid))
    }

    pub fn barycentric_coordinates(&self, p: &[f64]) -> Result<BarycentricPoint> {
        let (raw, resid) = self.raw_coordinates(p)?;
        if let Some(i) = self.vertices.iter().position(|v| v.as_slice() == p) {
            let mut l = vec![0.0; raw.len()];
            l[i] = 1.0;
            return Ok(BarycentricPoint(l));
        }
        if resid > DOMAIN_TOL || raw.iter().any(|&v| v < -DOMAIN_TOL) {
            let distance = self.as_polytope().distance(p)?;
            return Err(Error::OutsideDomain { distance });
        }
        BarycentricPoint::clamped(&raw)
    }

    pub fn from_barycentric(&self, lambda: &BarycentricPoint) -> Result<Vec<f64>> {
        if lambda.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch { expected: self.vertex_count(), got: lambda.len() });
        }
        Ok(self.point_at(lambda.as_slice()))
    }

    /// `sum lambda_i a_i` without validating `lambda`.
    pub fn point_at(&self, lambda: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.ambient_dim()];
        for (l, v) in lambda.iter().zip(&self.vertices) {
            if *l != 0.0 {
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += l * vi;
                }
            }
        }
        x
    }

    pub fn contains_point(&self, p: &[f64], tol: f64) -> bool {
        match self.raw_coordinates(p) {
            Ok((raw, resid)) => resid <= tol && raw.iter().all(|&v| v >= -tol),
            Err(_) => false,
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        self.point_at(&vec![1.0 / self.vertex_count() as f64; self.vertex_count()])
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt());
            }
        }
        d
    }

    /// (n-1)-dimensional volume.
    pub fn volume(&self) -> f64 {
        let k = self.vertex_count() - 1;
        if k == 0 {
            return 1.0;
        }
        let gram = self.edges.transpose() * &self.edges;
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        gram.determinant().max(0.0).sqrt() / fact
    }

    /// Lattice grid points `sum (c_i/m) a_i`, with their integer coordinates.
    pub fn grid(&self, mesh: Mesh) -> Vec<(Vec<usize>, Vec<f64>)> {
        let m = mesh.order() as f64;
        compositions(self.vertex_count(), mesh.order())
            .into_iter()
            .map(|c| {
                let l: Vec<f64> = c.iter().map(|&k| k as f64 / m).collect();
                let p = self.point_at(&l);
                (c, p)
            })
            .collect()
    }

    /// Kuhn triangulation of order `m`: `m^(n-1)` congruent-in-type cells that
    /// tile the simplex.
    pub fn kuhn_triangulate(&self, mesh: Mesh) -> Vec<SimplexDomain> {
        let m = mesh.order() as f64;
        kuhn_cells(self.vertex_count(), mesh.order())
            .into_iter()
            .map(|cell| {
                let pts = cell.iter().map(|c| self.point_at(&c.iter().map(|&k| k as f64 / m).collect::<Vec<_>>())).collect();
                SimplexDomain::new(pts).expect("Kuhn cells of a nondegenerate simplex are nondegenerate")
            })
            .collect()
    }
}

pub fn barycentric_coordinates(p: &[f64], k: &SimplexDomain) -> Result<BarycentricPoint> {
    k.barycentric_coordinates(p)
}

pub fn from_barycentric(lambda: &BarycentricPoint, k: &SimplexDomain) -> Result<Vec<f64>> {
    k.from_barycentric(lambda)
}

pub fn kuhn_triangulate(k: &SimplexDomain, mesh: Mesh) -> Vec<SimplexDomain> {
    k.kuhn_triangulate(mesh)
}

/// All `n`-tuples of nonnegative integers summing to `m`, lexicographic.
pub fn compositions(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let n = cur.len();
        if pos == n - 1 {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[pos] = k;
            rec(pos + 1, left - k, cur, out);
        }
    }
    if n > 0 {
        rec(0, m, &mut cur, &mut out);
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Cells of the order-`m` Kuhn triangulation of the `(n-1)`-simplex, each as
/// `n` integer barycentric coordinate vectors (entries summing to `m`).
///
/// In cumulative coordinates `u_j = c_{j+1} + ... + c_n` the simplex is
/// `m >= u_1 >= ... >= u_{n-1} >= 0`, a union of Freudenthal cells of the unit
/// cube lattice.
pub fn kuhn_cells(n: usize, m: usize) -> Vec<Vec<Vec<usize>>> {
    assert!(n >= 1 && m >= 1);
    let k = n - 1;
    if k == 0 {
        return vec![vec![vec![m]]];
    }
    let perms = permutations(k);
    let mut cells = Vec::new();
    let mut base = vec![0usize; k];
    loop {
        for perm in &perms {
            let mut u = base.clone();
            let mut verts = vec![u.clone()];
            let mut ok = ordered(&u, m);
            for &axis in perm {
                if !ok {
                    break;
                }
                u[axis] += 1;
                ok = ordered(&u, m);
                verts.push(u.clone());
            }
            if ok {
                cells.push(verts.iter().map(|u| cumulative_to_composition(u, m)).collect());
            }
        }
        // odometer over {0..m-1}^k
        let mut i = 0;
        loop {
            if i == k {
                return cells;
            }
            base[i] += 1;
            if base[i] < m {
                break;
            }
            base[i] = 0;
            i += 1;
        }
    }
}

fn ordered(u: &[usize], m: usize) -> bool {
    u[0] <= m && u.windows(2).all(|w| w[0] >= w[1])
}

fn cumulative_to_composition(u: &[usize], m: usize) -> Vec<usize> {
    let k = u.len();
    let mut c = Vec::with_capacity(k + 1);
    c.push(m - u[0]);
    for j in 1..k {
        c.push(u[j - 1] - u[j]);
    }
    c.push(u[k - 1]);
    c
}
