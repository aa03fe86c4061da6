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

//! Checkers and witness search for the correspondence convexity classes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::biconvex::{is_biconvex_combination, BiconvexGridSet, ProductPoint};
use crate::correspondence::{Correspondence, Norm};
use crate::error::{Error, Result};
use crate::exec;
use crate::polytope::PolytopeSet;
use crate::report::{PropertyReport, Violation};
use crate::simplex::{compositions, Mesh, DOMAIN_TOL};

/// Normalization slack for `Σ g_i(λ_i) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Upper bound on candidate witnesses tried by [`search_witness`].
pub const SEARCH_CAP: usize = 1 << 16;

/// Strictly increasing piecewise-linear bijection of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlMapRepr", into = "PlMapRepr")]
pub struct PlMap {
    knots: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct PlMapRepr {
    knots: Vec<[f64; 2]>,
}

impl TryFrom<PlMapRepr> for PlMap {
    type Error = Error;
    fn try_from(r: PlMapRepr) -> Result<Self> {
        PlMap::new(r.knots.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<PlMap> for PlMapRepr {
    fn from(g: PlMap) -> Self {
        PlMapRepr { knots: g.knots.into_iter().map(|(a, b)| [a, b]).collect() }
    }
}

impl PlMap {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidReparameterization(m.to_string()));
        if knots.len() < 2 {
            return bad("fewer than two knots");
        }
        if knots[0] != (0.0, 0.0) || knots[knots.len() - 1] != (1.0, 1.0) {
            return bad("endpoints must be (0,0) and (1,1)");
        }
        if knots.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return bad("non-finite knot");
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
            return bad("knots must be strictly increasing in both coordinates");
        }
        Ok(Self { knots })
    }

    pub fn identity() -> Self {
        Self { knots: vec![(0.0, 0.0), (1.0, 1.0)] }
    }

    /// Interpolant of `t^p` on `pieces` equal subintervals.
    pub fn power(p: f64, pieces: usize) -> Result<Self> {
        if !(p > 0.0) || pieces == 0 {
            return Err(Error::InvalidReparameterization(format!("power {p} on {pieces} pieces")));
        }
        let mut knots: Vec<(f64, f64)> = (0..=pieces).map(|k| k as f64 / pieces as f64).map(|t| (t, t.powf(p))).collect();
        knots[pieces] = (1.0, 1.0);
        Self::new(knots)
    }

    /// `s -> 1 - g(1 - s)`: the partner of `g` in a normalized pair.
    pub fn conjugate(&self) -> Self {
        let knots = self.knots.iter().rev().map(|&(a, b)| (1.0 - a, 1.0 - b)).collect();
        Self { knots }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn is_identity(&self) -> bool {
        self.knots.iter().all(|(a, b)| a == b)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let k = self.knots.partition_point(|&(a, _)| a < t);
        if k < self.knots.len() && self.knots[k].0 == t {
            return self.knots[k].1;
        }
        let (a0, b0) = self.knots[k - 1];
        let (a1, b1) = self.knots[k];
        b0 + (b1 - b0) * (t - a0) / (a1 - a0)
    }

    pub fn max_slope(&self) -> f64 {
        self.knots.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WcgWitness {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WnqWitness {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
    pub g: Vec<PlMap>,
}

impl WnqWitness {
    pub fn identity(points: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Self {
        let g = vec![PlMap::identity(); points.len()];
        Self { points, values, g }
    }
}

impl From<WcgWitness> for WnqWitness {
    fn from(w: WcgWitness) -> Self {
        WnqWitness::identity(w.points, w.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiconvexWitness {
    pub pairs: Vec<ProductPoint>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Wcg,
    Wnq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum Witness {
    Wcg(WcgWitness),
    Wnq(WnqWitness),
}

impl Witness {
    pub fn as_wnq(&self) -> WnqWitness {
        match self {
            Witness::Wcg(w) => w.clone().into(),
            Witness::Wnq(w) => w.clone(),
        }
    }
}

fn validate_base(t: &Correspondence, points: &[Vec<f64>], values: &[Vec<f64>], tol: f64) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidWitness("no base points".into()));
    }
    if points.len() != values.len() {
        return Err(Error::InvalidWitness(format!("{} points but {} values", points.len(), values.len())));
    }
    for (i, (x, y)) in points.iter().zip(values).enumerate() {
        if !t.domain().contains(x, DOMAIN_TOL) {
            return Err(Error::InvalidWitness(format!("base point {i} outside the domain")));
        }
        if y.len() != t.codomain().dim() {
            return Err(Error::InvalidWitness(format!("value {i} has dimension {}", y.len())));
        }
        if !t.value(x).contains(y, tol)? {
            return Err(Error::InvalidWitness(format!("value {i} not in T(x_{i})")));
        }
    }
    Ok(())
}

fn combine(w: &[f64], pts: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; pts[0].len()];
    for (c, p) in w.iter().zip(pts) {
        for (o, v) in out.iter_mut().zip(p) {
            *o += c * v;
        }
    }
    out
}

fn lambda_grid(n: usize, mesh: Mesh) -> Vec<Vec<f64>> {
    let m = mesh.order() as f64;
    compositions(n, mesh.order()).into_iter().map(|c| c.into_iter().map(|k| k as f64 / m).collect()).collect()
}

fn grid_label(n: usize, mesh: Mesh) -> String {
    format!("simplex n={n} mesh=1/{}", mesh.order())
}

/// Membership sweep shared by the checkers: `y_weights(λ)` gives the value weights.
fn sweep(
    t: &Correspondence,
    points: &[Vec<f64>],
    values: &[Vec<f64>],
    lambdas: &[Vec<f64>],
    y_weights: impl Fn(&[f64]) -> Vec<f64> + Sync,
    tol: f64,
) -> Result<Vec<Violation>> {
    let res = exec::map(lambdas, |l| {
        let x = combine(l, points);
        let y = combine(&y_weights(l), values);
        t.value(&x).distance(&y).map(|d| if d > tol { Some(Violation::new(l.clone(), d)) } else { None })
    });
    let mut out = Vec::new();
    for r in res {
        if let Some(v) = r? {
            out.push(v);
        }
    }
    Ok(out)
}

/// `Σ λ_i y_i ∈ T(Σ λ_i x_i)` on the λ-grid.
pub fn check_wcg(t: &Correspondence, w: &WcgWitness, mesh: Mesh, tol: f64) -> Result<PropertyReport> {
    validate_base(t, &w.points, &w.values, tol)?;
    let n = w.points.len();
    let lambdas = lambda_grid(n, mesh);
    let v = sweep(t, &w.points, &w.values, &lambdas, |l| l.to_vec(), tol)?;
    Ok(PropertyReport::new("wcg", grid_label(n, mesh), lambdas.len(), v))
}

/// `Σ g_i(λ_i) y_i ∈ T(Σ λ_i x_i)` on the λ-grid.
pub fn check_wnq(t: &Correspondence, w: &WnqWitness, mesh: Mesh, tol: f64) -> Result<PropertyReport> {
    validate_base(t, &w.points, &w.values, tol)?;
    let n = w.points.len();
    if w.g.len() != n {
        return Err(Error::InvalidWitness(format!("{} reparameterizations for {n} points", w.g.len())));
    }
    let lambdas = lambda_grid(n, mesh);
    for l in &lambdas {
        let sum: f64 = w.g.iter().zip(l).map(|(g, &li)| g.eval(li)).sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::WitnessInconsistent { lambda: l.clone(), sum });
        }
    }
    let v = sweep(t, &w.points, &w.values, &lambdas, |l| w.g.iter().zip(l).map(|(g, &li)| g.eval(li)).collect(), tol)?;
    let slope = w.g.iter().map(PlMap::max_slope).fold(0.0, f64::max);
    Ok(PropertyReport::new("wnq", grid_label(n, mesh), lambdas.len(), v).with_metric("max_g_slope", slope))
}

/// Sweep over biconvex combinations of the witness pairs. `t` is defined on
/// the product domain with points `(x, y)` concatenated.
pub fn check_weakly_biconvex(t: &Correspondence, b: &BiconvexGridSet, w: &BiconvexWitness, mesh: Mesh, tol: f64) -> Result<PropertyReport> {
    let points: Vec<Vec<f64>> = w.pairs.iter().map(ProductPoint::concat).collect();
    validate_base(t, &points, &w.values, tol)?;
    for (i, p) in w.pairs.iter().enumerate() {
        if !b.contains(p) {
            return Err(Error::InvalidWitness(format!("base pair {i} outside the biconvex set")));
        }
    }
    let n = w.pairs.len();
    let uniform = vec![1.0 / n as f64; n];
    if !is_biconvex_combination(&w.pairs, &uniform) {
        return Ok(PropertyReport::new("weakly_biconvex", grid_label(n, mesh), 0, vec![]).with_note("no biconvex combinations"));
    }
    let lambdas = lambda_grid(n, mesh);
    let v = sweep(t, &points, &w.values, &lambdas, |l| l.to_vec(), tol)?;
    Ok(PropertyReport::new("weakly_biconvex", grid_label(n, mesh), lambdas.len(), v))
}

/// Base checker on every thickening `T_r`. A single witness is reused for all radii.
pub fn check_star_variant(
    t: &Correspondence,
    property: Property,
    radii: &[f64],
    witnesses: &[WnqWitness],
    mesh: Mesh,
    tol: f64,
    norm: Norm,
) -> Result<PropertyReport> {
    if radii.is_empty() {
        return Err(Error::Precondition("empty radius list".into()));
    }
    if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0)) {
        return Err(Error::NegativeRadius(r));
    }
    if witnesses.len() != 1 && witnesses.len() != radii.len() {
        return Err(Error::InvalidWitness(format!("{} witnesses for {} radii", witnesses.len(), radii.len())));
    }
    let mut parts = Vec::new();
    for (k, &r) in radii.iter().enumerate() {
        let tr = t.thicken(r, norm)?;
        let w = &witnesses[if witnesses.len() == 1 { 0 } else { k }];
        let rep = match property {
            Property::Wcg => {
                if !w.g.iter().all(PlMap::is_identity) {
                    return Err(Error::InvalidWitness("WCG witness with non-identity g".into()));
                }
                check_wcg(&tr, &WcgWitness { points: w.points.clone(), values: w.values.clone() }, mesh, tol)?
            }
            Property::Wnq => check_wnq(&tr, w, mesh, tol)?,
        };
        parts.push(rep.with_metric("radius", r));
    }
    let name = match property {
        Property::Wcg => "star_wcg",
        Property::Wnq => "star_wnq",
    };
    let mut rep = PropertyReport::combine(name, grid_label(witnesses[0].points.len(), mesh), &parts);
    for (p, r) in parts.iter().zip(radii) {
        rep = rep.with_note(format!("r={r}: {} violations", p.violations.len()));
    }
    Ok(rep)
}

/// Candidate values in `P`: vertices, then hull points on a barycentric grid of `density`.
pub fn value_candidates(p: &PolytopeSet, density: usize) -> Vec<Vec<f64>> {
    let verts = p.vertices();
    let mut out: Vec<Vec<f64>> = verts.to_vec();
    if density >= 2 && verts.len() > 1 {
        let m = density as f64;
        for c in compositions(verts.len(), density) {
            if c.iter().filter(|&&k| k > 0).count() < 2 {
                continue;
            }
            let w: Vec<f64> = c.iter().map(|&k| k as f64 / m).collect();
            out.push(combine(&w, verts));
        }
    }
    out
}

/// Reparameterization catalog: identity, then `t^p`/conjugate pairs for `n = 2`.
pub fn g_catalog(n: usize, size: usize, pieces: usize) -> Vec<Vec<PlMap>> {
    let mut out = vec![vec![PlMap::identity(); n]];
    if n != 2 {
        return out;
    }
    let mut k = 2.0;
    while out.len() < size.max(1) {
        for p in [k, 1.0 / k] {
            if out.len() < size {
                let g = PlMap::power(p, pieces).expect("positive power");
                let c = g.conjugate();
                out.push(vec![g, c]);
            }
        }
        k += 1.0;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub witness: Option<Witness>,
    pub tested: usize,
}

/// First witness (lexicographic over value candidates, then g catalog) passing the checker.
pub fn search_witness(
    t: &Correspondence,
    property: Property,
    points: &[Vec<f64>],
    density: usize,
    g_family: usize,
    mesh: Mesh,
    tol: f64,
) -> Result<SearchOutcome> {
    search_witness_sampled(t, property, points, density, g_family, 0, 0, mesh, tol)
}

/// Dirichlet(1) samples of the hull of `P` from a fixed-seed generator.
pub fn sampled_candidates(p: &PolytopeSet, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let verts = p.vertices();
    if verts.len() < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let e: Vec<f64> = (0..verts.len()).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let s: f64 = e.iter().sum();
            combine(&e.iter().map(|v| v / s).collect::<Vec<_>>(), verts)
        })
        .collect()
}

/// [`search_witness`] with `samples` seeded random hull points appended to each
/// candidate list; the seed for base point `i` is `seed + i`.
#[allow(clippy::too_many_arguments)]
pub fn search_witness_sampled(
    t: &Correspondence,
    property: Property,
    points: &[Vec<f64>],
    density: usize,
    g_family: usize,
    samples: usize,
    seed: u64,
    mesh: Mesh,
    tol: f64,
) -> Result<SearchOutcome> {
    let cands: Vec<Vec<Vec<f64>>> = points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let p = t.value(x);
            let mut c = value_candidates(&p, density);
            c.extend(sampled_candidates(&p, samples, seed.wrapping_add(i as u64)));
            c
        })
        .collect();
    if points.is_empty() || cands.iter().any(Vec::is_empty) {
        return Ok(SearchOutcome { witness: None, tested: 0 });
    }
    let gs = match property {
        Property::Wcg => vec![vec![PlMap::identity(); points.len()]],
        Property::Wnq => g_catalog(points.len(), g_family, mesh.order()),
    };
    let mut pick = vec![0usize; points.len()];
    let mut tested = 0;
    loop {
        let values: Vec<Vec<f64>> = pick.iter().zip(&cands).map(|(&k, c)| c[k].clone()).collect();
        for g in &gs {
            if tested >= SEARCH_CAP {
                return Ok(SearchOutcome { witness: None, tested });
            }
            tested += 1;
            let w = WnqWitness { points: points.to_vec(), values: values.clone(), g: g.clone() };
            if check_wnq(t, &w, mesh, tol)?.passed() {
                let witness = match property {
                    Property::Wcg => Witness::Wcg(WcgWitness { points: w.points, values: w.values }),
                    Property::Wnq => Witness::Wnq(w),
                };
                return Ok(SearchOutcome { witness: Some(witness), tested });
            }
        }
        let mut i = pick.len();
        loop {
            if i == 0 {
                return Ok(SearchOutcome { witness: None, tested });
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < cands[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}
