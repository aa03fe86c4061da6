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

//! Biconvex combinations, grid biconvex sets and section-closure hulls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::polytope::PolytopeSet;
use crate::report::{PropertyReport, Violation};

const SHARED_TOL: f64 = 1e-12;
const SUBSET_TOL: f64 = 1e-9;
pub const DEFAULT_ROUND_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl ProductPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    pub fn concat(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.y);
        v
    }
}

fn all_equal(v: &[&[f64]]) -> bool {
    v.windows(2).all(|w| w[0].len() == w[1].len() && w[0].iter().zip(w[1]).all(|(a, b)| (a - b).abs() <= SHARED_TOL))
}

/// `λ` is a weight vector and all `x_i` coincide or all `y_i` coincide.
pub fn is_biconvex_combination(pairs: &[ProductPoint], lambda: &[f64]) -> bool {
    if pairs.is_empty() || pairs.len() != lambda.len() {
        return false;
    }
    if lambda.iter().any(|&l| !(l >= 0.0)) || (lambda.iter().sum::<f64>() - 1.0).abs() > SHARED_TOL {
        return false;
    }
    let xs: Vec<&[f64]> = pairs.iter().map(|p| p.x.as_slice()).collect();
    let ys: Vec<&[f64]> = pairs.iter().map(|p| p.y.as_slice()).collect();
    all_equal(&xs) || all_equal(&ys)
}

/// Uniform lattice on an axis-aligned box of dimension 1 or 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    lo: Vec<f64>,
    hi: Vec<f64>,
    order: usize,
}

impl GridAxis {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, order: usize) -> Result<Self> {
        if lo.is_empty() || lo.len() > 2 {
            return Err(Error::InvalidDimension(format!("grid factor dimension {} not in 1..=2", lo.len())));
        }
        if hi.len() != lo.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if order == 0 {
            return Err(Error::InvalidMesh(0));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidDimension("grid box has an empty side".into()));
        }
        Ok(Self { lo, hi, order })
    }

    pub fn unit(dim: usize, order: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim], order)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        (self.order + 1).pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multi(&self, idx: usize) -> Vec<usize> {
        let s = self.order + 1;
        match self.dim() {
            1 => vec![idx],
            _ => vec![idx / s, idx % s],
        }
    }

    pub fn linear(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &k| acc * (self.order + 1) + k)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let m = self.order as f64;
        self.multi(idx).iter().zip(self.lo.iter().zip(&self.hi)).map(|(&k, (a, b))| a + (b - a) * k as f64 / m).collect()
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) / self.order as f64).collect()
    }

    /// Nearest lattice node; `None` outside the box (beyond `tol`).
    pub fn snap(&self, p: &[f64], tol: f64) -> Option<usize> {
        if p.len() != self.dim() {
            return None;
        }
        let mut multi = Vec::with_capacity(p.len());
        for ((&v, a), b) in p.iter().zip(&self.lo).zip(&self.hi) {
            if v < a - tol || v > b + tol {
                return None;
            }
            let k = ((v - a) / (b - a) * self.order as f64).round().clamp(0.0, self.order as f64);
            multi.push(k as usize);
        }
        Some(self.linear(&multi))
    }
}

/// Indicator of a subset of the product lattice `X-grid × Y-grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiconvexGridSet {
    x_axis: GridAxis,
    y_axis: GridAxis,
    cells: Vec<bool>,
}

impl BiconvexGridSet {
    pub fn empty(x_axis: GridAxis, y_axis: GridAxis) -> Self {
        let n = x_axis.len() * y_axis.len();
        Self { x_axis, y_axis, cells: vec![false; n] }
    }

    pub fn from_fn(x_axis: GridAxis, y_axis: GridAxis, f: impl Fn(&[f64], &[f64]) -> bool) -> Self {
        let mut s = Self::empty(x_axis, y_axis);
        for ix in 0..s.x_axis.len() {
            let x = s.x_axis.point(ix);
            for iy in 0..s.y_axis.len() {
                let y = s.y_axis.point(iy);
                let k = s.at(ix, iy);
                s.cells[k] = f(&x, &y);
            }
        }
        s
    }

    /// Cells nearest to the given points; points outside the boxes are an error.
    pub fn rasterize(x_axis: GridAxis, y_axis: GridAxis, points: &[ProductPoint]) -> Result<Self> {
        let mut s = Self::empty(x_axis, y_axis);
        for p in points {
            let (ix, iy) = s.snap(p).ok_or(Error::OutsideDomain { distance: f64::NAN })?;
            let k = s.at(ix, iy);
            s.cells[k] = true;
        }
        Ok(s)
    }

    pub fn x_axis(&self) -> &GridAxis {
        &self.x_axis
    }

    pub fn y_axis(&self) -> &GridAxis {
        &self.y_axis
    }

    fn at(&self, ix: usize, iy: usize) -> usize {
        ix * self.y_axis.len() + iy
    }

    pub fn get(&self, ix: usize, iy: usize) -> bool {
        self.cells[self.at(ix, iy)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, v: bool) {
        let k = self.at(ix, iy);
        self.cells[k] = v;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn snap(&self, p: &ProductPoint) -> Option<(usize, usize)> {
        Some((self.x_axis.snap(&p.x, 1e-9)?, self.y_axis.snap(&p.y, 1e-9)?))
    }

    /// Grid-resolution membership: the nearest cell is set.
    pub fn contains(&self, p: &ProductPoint) -> bool {
        self.snap(p).is_some_and(|(ix, iy)| self.get(ix, iy))
    }

    pub fn cells(&self) -> Vec<ProductPoint> {
        let mut out = Vec::new();
        for ix in 0..self.x_axis.len() {
            for iy in 0..self.y_axis.len() {
                if self.get(ix, iy) {
                    out.push(ProductPoint::new(self.x_axis.point(ix), self.y_axis.point(iy)));
                }
            }
        }
        out
    }

    pub fn is_subset_of(&self, other: &BiconvexGridSet) -> bool {
        self.cells.len() == other.cells.len() && self.cells.iter().zip(&other.cells).all(|(a, b)| !a || *b)
    }

    pub fn x_section(&self, ix: usize) -> Vec<usize> {
        (0..self.y_axis.len()).filter(|&iy| self.get(ix, iy)).collect()
    }

    pub fn y_section(&self, iy: usize) -> Vec<usize> {
        (0..self.x_axis.len()).filter(|&ix| self.get(ix, iy)).collect()
    }

    /// Runs `[start, len]` of set y-indices for every x-index.
    pub fn rle_rows(&self) -> Vec<Vec<[usize; 2]>> {
        (0..self.x_axis.len())
            .map(|ix| {
                let mut runs: Vec<[usize; 2]> = Vec::new();
                for iy in self.x_section(ix) {
                    match runs.last_mut() {
                        Some(r) if r[0] + r[1] == iy => r[1] += 1,
                        _ => runs.push([iy, 1]),
                    }
                }
                runs
            })
            .collect()
    }
}

/// `count` points drawn uniformly from the axis boxes with a fixed-seed generator.
pub fn random_points(count: usize, x_axis: &GridAxis, y_axis: &GridAxis, seed: u64) -> Vec<ProductPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |a: &GridAxis| -> Vec<f64> { a.lo.iter().zip(&a.hi).map(|(l, h)| rng.random_range(*l..=*h)).collect() };
    (0..count).map(|_| ProductPoint::new(draw(x_axis), draw(y_axis))).collect()
}

/// Lattice points of the convex hull of `section` (indices on `axis`).
fn section_fill(axis: &GridAxis, section: &[usize]) -> Vec<usize> {
    if section.is_empty() {
        return Vec::new();
    }
    if axis.dim() == 1 {
        let lo = *section.iter().min().unwrap();
        let hi = *section.iter().max().unwrap();
        return (lo..=hi).collect();
    }
    let pts: Vec<(i64, i64)> = section
        .iter()
        .map(|&i| {
            let m = axis.multi(i);
            (m[0] as i64, m[1] as i64)
        })
        .collect();
    let hull = lattice_hull(pts);
    let (x0, x1) = (hull.iter().map(|p| p.0).min().unwrap(), hull.iter().map(|p| p.0).max().unwrap());
    let (y0, y1) = (hull.iter().map(|p| p.1).min().unwrap(), hull.iter().map(|p| p.1).max().unwrap());
    let mut out = Vec::new();
    for a in x0..=x1 {
        for b in y0..=y1 {
            if in_lattice_hull(&hull, (a, b)) {
                out.push(axis.linear(&[a as usize, b as usize]));
            }
        }
    }
    out
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Counter-clockwise hull without collinear points.
fn lattice_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn in_lattice_hull(hull: &[(i64, i64)], p: (i64, i64)) -> bool {
    match hull.len() {
        1 => hull[0] == p,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            cross(a, b, p) == 0 && p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
        }
        n => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0),
    }
}

fn section_convex(axis: &GridAxis, section: &[usize]) -> bool {
    section_fill(axis, section).len() == section.len()
}

/// Every x-section and y-section is convex at grid resolution.
pub fn is_biconvex_set(b: &BiconvexGridSet) -> bool {
    let xs = exec::map_range(b.x_axis.len(), |ix| section_convex(&b.y_axis, &b.x_section(ix)));
    let ys = exec::map_range(b.y_axis.len(), |iy| section_convex(&b.x_axis, &b.y_section(iy)));
    xs.into_iter().chain(ys).all(|c| c)
}

/// One x-pass and one y-pass of section convexification; returns cells added.
fn close_round(b: &mut BiconvexGridSet) -> usize {
    let mut added = 0;
    let fills = exec::map_range(b.x_axis.len(), |ix| section_fill(&b.y_axis, &b.x_section(ix)));
    for (ix, f) in fills.into_iter().enumerate() {
        for iy in f {
            if !b.get(ix, iy) {
                b.set(ix, iy, true);
                added += 1;
            }
        }
    }
    let fills = exec::map_range(b.y_axis.len(), |iy| section_fill(&b.x_axis, &b.y_section(iy)));
    for (iy, f) in fills.into_iter().enumerate() {
        for ix in f {
            if !b.get(ix, iy) {
                b.set(ix, iy, true);
                added += 1;
            }
        }
    }
    added
}

/// Smallest grid set containing `seed` whose sections are all convex.
pub fn close_biconvex(seed: &BiconvexGridSet, round_cap: usize) -> Result<BiconvexGridSet> {
    let mut b = seed.clone();
    let mut last = 0;
    for _ in 0..round_cap {
        last = close_round(&mut b);
        if last == 0 {
            return Ok(b);
        }
    }
    Err(Error::HullIterationCap { added_last_round: last })
}

/// Biconvex hull of finitely many points at the resolution of the axes.
pub fn biconvex_hull(points: &[ProductPoint], x_axis: &GridAxis, y_axis: &GridAxis) -> Result<BiconvexGridSet> {
    if points.is_empty() {
        return Err(Error::Precondition("biconvex hull of an empty point set".into()));
    }
    let seed = BiconvexGridSet::rasterize(x_axis.clone(), y_axis.clone(), points)?;
    close_biconvex(&seed, DEFAULT_ROUND_CAP)
}

/// Every cell of the biconvex hull lies in the convex hull of the snapped points.
pub fn hull_subset_convex(points: &[ProductPoint], x_axis: &GridAxis, y_axis: &GridAxis) -> Result<PropertyReport> {
    let hull = biconvex_hull(points, x_axis, y_axis)?;
    let snapped: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let (ix, iy) = hull.snap(p).expect("rasterized");
            ProductPoint::new(x_axis.point(ix), y_axis.point(iy)).concat()
        })
        .collect();
    let conv = PolytopeSet::from_vertices(snapped)?.reduced();
    let cells = hull.cells();
    let dists = exec::map(&cells, |c| conv.distance(&c.concat()));
    let mut violations = Vec::new();
    for (c, d) in cells.iter().zip(dists) {
        let d = d?;
        if d > SUBSET_TOL {
            violations.push(Violation::new(c.concat(), d));
        }
    }
    let grid = format!("x order {} dim {}, y order {} dim {}", x_axis.order(), x_axis.dim(), y_axis.order(), y_axis.dim());
    Ok(PropertyReport::new("hull_subset_convex", grid, cells.len(), violations).with_metric("hull_cells", cells.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(x: f64, y: f64) -> ProductPoint {
        ProductPoint::new(vec![x], vec![y])
    }

    #[test]
    fn combination_predicate() {
        assert!(is_biconvex_combination(&[pp(0.3, 0.0), pp(0.3, 1.0)], &[0.5, 0.5]));
        assert!(is_biconvex_combination(&[pp(0.0, 0.7), pp(1.0, 0.7)], &[0.5, 0.5]));
        assert!(!is_biconvex_combination(&[pp(0.0, 0.0), pp(1.0, 1.0)], &[0.5, 0.5]));
    }

    #[test]
    fn l_shape_hull() {
        let ax = GridAxis::unit(1, 8).unwrap();
        let h = biconvex_hull(&[pp(0.0, 0.0), pp(1.0, 0.0), pp(0.0, 1.0)], &ax, &ax).unwrap();
        assert_eq!(h.count(), 17);
        assert!(h.contains(&pp(0.5, 0.0)) && h.contains(&pp(0.0, 0.5)));
        assert!(!h.contains(&pp(0.25, 0.25)));
        assert!(is_biconvex_set(&h));
    }

    #[test]
    fn gap_is_not_biconvex() {
        let ax = GridAxis::unit(1, 4).unwrap();
        let b = BiconvexGridSet::from_fn(ax.clone(), ax, |x, y| (x[0] <= 0.25 && y[0] <= 0.25) || (x[0] >= 0.75 && y[0] <= 0.25));
        assert!(!is_biconvex_set(&b));
    }

    #[test]
    fn two_dim_section_fill() {
        let ax = GridAxis::unit(2, 4).unwrap();
        let tri = [ax.linear(&[0, 0]), ax.linear(&[4, 0]), ax.linear(&[0, 4])];
        // lattice points with a+b <= 4
        assert_eq!(section_fill(&ax, &tri).len(), 15);
        let seg = [ax.linear(&[0, 0]), ax.linear(&[4, 2])];
        assert_eq!(section_fill(&ax, &seg).len(), 3);
    }

    #[test]
    fn rle_rows_encode_runs() {
        let ax = GridAxis::unit(1, 4).unwrap();
        let b = BiconvexGridSet::from_fn(ax.clone(), ax, |x, y| x[0] == 0.0 && y[0] != 0.5);
        assert_eq!(b.rle_rows()[0], vec![[0, 2], [3, 2]]);
        assert!(b.rle_rows()[1].is_empty());
    }
}
