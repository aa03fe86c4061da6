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

//! Brouwer fixed points by Sperner labeling, and thickening nets for
//! correspondences without continuous selections.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::classes::{check_wnq, WnqWitness};
use crate::correspondence::{graph_closure_membership, Correspondence, Norm};
use crate::error::{Error, Result};
use crate::exec;
use crate::report::Verdict;
use crate::selection::{build_wnq_selection, SelectionFunction};
use crate::simplex::{compositions, kuhn_cells, Mesh, SimplexDomain};

/// Single-valued map of a simplex into itself.
pub trait PointMap: Sync {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl<F> PointMap for F
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self(x))
    }
}

impl PointMap for SelectionFunction {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrouwerConfig {
    /// Kuhn order of every level.
    pub order: usize,
    /// Next region spans `zoom × n` cells of the current level (`n` vertices).
    pub zoom: f64,
    pub max_levels: usize,
    /// Restarts double the order up to this cap.
    pub max_order: usize,
    /// Restarts also stop once a level would exceed this many cells.
    pub max_cells: usize,
    /// Levels without improvement before a restart.
    pub stall_levels: usize,
}

impl Default for BrouwerConfig {
    fn default() -> Self {
        Self { order: 16, zoom: 2.0, max_levels: 80, max_order: 256, max_cells: 1 << 18, stall_levels: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub x_star: Vec<f64>,
    /// `|f(x*) - x*|_∞`.
    pub residual: f64,
    pub mesh_order: usize,
    pub levels: usize,
    pub cells_visited: usize,
}

fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
struct Probe {
    lambda: Vec<f64>,
    x: Vec<f64>,
    residual: f64,
    /// Coordinates of the retracted image in the current region.
    image: Vec<f64>,
}

/// Sub-simplex of `K` given by vertices in `K`-barycentric coordinates.
struct Region {
    verts: Vec<Vec<f64>>,
    inv: DMatrix<f64>,
}

impl Region {
    fn whole(n: usize) -> Self {
        let verts = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self::new(verts)
    }

    fn new(verts: Vec<Vec<f64>>) -> Self {
        let n = verts.len();
        let m = DMatrix::from_fn(n, n, |i, j| verts[j][i]);
        let inv = m.try_inverse().unwrap_or_else(|| DMatrix::identity(n, n));
        Self { verts, inv }
    }

    fn to_k(&self, nu: &[f64]) -> Vec<f64> {
        let n = self.verts.len();
        (0..n).map(|i| self.verts.iter().zip(nu).map(|(v, w)| v[i] * w).sum()).collect()
    }

    /// Region coordinates of `mu`, clamped onto the region.
    fn retract(&self, mu: &[f64]) -> Vec<f64> {
        let nu = &self.inv * DVector::from_column_slice(mu);
        let mut nu: Vec<f64> = nu.iter().map(|v| v.max(0.0)).collect();
        let s: f64 = nu.iter().sum();
        if s > 0.0 {
            nu.iter_mut().for_each(|v| *v /= s);
        } else {
            let n = nu.len() as f64;
            nu.iter_mut().for_each(|v| *v = 1.0 / n);
        }
        nu
    }

    fn centroid(&self) -> Vec<f64> {
        let n = self.verts.len();
        self.to_k(&vec![1.0 / n as f64; n])
    }

    /// Copy scaled by `rho` and centred at `p`, moved toward the centroid until it fits in `K`.
    fn zoom(&self, p: &[f64], rho: f64) -> Self {
        let c = self.centroid();
        let mut q = p.to_vec();
        for _ in 0..64 {
            let verts: Vec<Vec<f64>> =
                self.verts.iter().map(|v| v.iter().zip(&c).zip(&q).map(|((vi, ci), qi)| qi + rho * (vi - ci)).collect()).collect();
            if verts.iter().all(|v| v.iter().all(|&x| x >= 0.0)) {
                return Self::new(verts);
            }
            q = q.iter().zip(&c).map(|(qi, ci)| qi + 0.5 * (ci - qi)).collect();
        }
        let verts = self.verts.iter().map(|v| v.iter().zip(&c).map(|(vi, ci)| ci + rho * (vi - ci)).collect()).collect();
        Self::new(verts)
    }
}

fn probe(f: &dyn PointMap, k: &SimplexDomain, region: &Region, lambda: Vec<f64>) -> Result<Probe> {
    let x = k.point_at(&lambda);
    let fx = f.apply(&x)?;
    if fx.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: fx.len() });
    }
    let residual = inf_dist(&fx, &x);
    let (mu, _) = k.raw_coordinates(&fx)?;
    let image = region.retract(&mu);
    Ok(Probe { lambda, x, residual, image })
}

/// Sperner label: among coordinates that do not grow, the one with the most
/// negative displacement (lowest index on ties).
pub fn sperner_label(kappa: &[f64], image: &[f64]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, (&k, &m)) in kappa.iter().zip(image).enumerate() {
        if k <= 0.0 {
            continue;
        }
        let d = m - k;
        if d <= 0.0 && best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best.map(|b| b.0).unwrap_or_else(|| kappa.iter().position(|&k| k > 0.0).unwrap_or(0))
}

struct Level {
    best_node: Probe,
    /// Barycentres (region coordinates) of completely labeled cells, in scan order.
    full_cells: Vec<Vec<f64>>,
    cells: usize,
}

fn scan_level(f: &dyn PointMap, k: &SimplexDomain, region: &Region, order: usize) -> Result<Level> {
    let n = k.vertex_count();
    let m = order as f64;
    let comps = compositions(n, order);
    let probes = exec::map(&comps, |c| {
        let kappa: Vec<f64> = c.iter().map(|&v| v as f64 / m).collect();
        probe(f, k, region, region.to_k(&kappa)).map(|p| (kappa, p))
    });
    let mut nodes = Vec::with_capacity(probes.len());
    for p in probes {
        nodes.push(p?);
    }
    let labels: HashMap<&[usize], usize> =
        comps.iter().zip(&nodes).map(|(c, (kappa, p))| (c.as_slice(), sperner_label(kappa, &p.image))).collect();
    let mut best = 0;
    for (i, (_, p)) in nodes.iter().enumerate() {
        if p.residual < nodes[best].1.residual {
            best = i;
        }
    }
    let cells = kuhn_cells(n, order);
    let mut full_cells = Vec::new();
    for cell in &cells {
        let mut seen = vec![false; n];
        for v in cell {
            seen[labels[v.as_slice()]] = true;
        }
        if seen.iter().all(|&s| s) {
            let bary: Vec<f64> = (0..n).map(|i| cell.iter().map(|v| v[i] as f64).sum::<f64>() / (n as f64 * m)).collect();
            full_cells.push(bary);
        }
    }
    Ok(Level { best_node: nodes.swap_remove(best).1, full_cells, cells: cells.len() })
}

/// Number of completely labeled cells of the order-`m` Kuhn triangulation of `K`.
pub fn completely_labeled_cells(f: &dyn PointMap, k: &SimplexDomain, mesh: Mesh) -> Result<usize> {
    Ok(scan_level(f, k, &Region::whole(k.vertex_count()), mesh.order())?.full_cells.len())
}

/// Best lattice node of a single order-`m` level on all of `K`.
pub fn grid_fixed_point(f: &dyn PointMap, k: &SimplexDomain, mesh: Mesh) -> Result<FixedPointResult> {
    let l = scan_level(f, k, &Region::whole(k.vertex_count()), mesh.order())?;
    Ok(FixedPointResult {
        x_star: l.best_node.x,
        residual: l.best_node.residual,
        mesh_order: mesh.order(),
        levels: 1,
        cells_visited: l.cells,
    })
}

/// `x*` with `|f(x*) - x*|_∞ <= eps`, by zooming Sperner scans.
pub fn brouwer_fixed_point(f: &dyn PointMap, k: &SimplexDomain, eps: f64, cfg: &BrouwerConfig) -> Result<FixedPointResult> {
    let n = k.vertex_count();
    if cfg.order == 0 {
        return Err(Error::InvalidMesh(0));
    }
    let whole = Region::whole(n);
    let mut best = probe(f, k, &whole, whole.centroid())?;
    let mut levels = 0;
    let mut cells_visited = 0;
    let mut order = cfg.order;
    let done = |best: &Probe, order: usize, levels: usize, cells: usize| FixedPointResult {
        x_star: best.x.clone(),
        residual: best.residual,
        mesh_order: order,
        levels,
        cells_visited: cells,
    };
    if best.residual <= eps {
        return Ok(done(&best, order, levels, cells_visited));
    }
    let rho = |order: usize| (cfg.zoom * n as f64 / order as f64).min(1.0);
    while order <= cfg.max_order && order.pow(n as u32 - 1) <= cfg.max_cells.max(cfg.order.pow(n as u32 - 1)) {
        let mut region = Region::whole(n);
        let mut stall = 0;
        let mut run_best = f64::INFINITY;
        for _ in 0..cfg.max_levels {
            let level = scan_level(f, k, &region, order)?;
            levels += 1;
            cells_visited += level.cells;
            let before = run_best;
            run_best = run_best.min(level.best_node.residual);
            if level.best_node.residual < best.residual {
                best = level.best_node.clone();
            }
            let mut centre = level.best_node.lambda.clone();
            let mut centre_res = f64::INFINITY;
            for bary in &level.full_cells {
                let p = probe(f, k, &region, region.to_k(bary))?;
                if p.residual < centre_res {
                    centre_res = p.residual;
                    centre = p.lambda.clone();
                }
                run_best = run_best.min(p.residual);
                if p.residual < best.residual {
                    best = p;
                }
            }
            if best.residual <= eps {
                return Ok(done(&best, order, levels, cells_visited));
            }
            if run_best < before * 0.999 {
                stall = 0;
            } else {
                stall += 1;
                if stall >= cfg.stall_levels {
                    break;
                }
            }
            region = region.zoom(&centre, rho(order));
        }
        order *= 2;
    }
    Err(Error::NonConvergence { best: best.x, residual: best.residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WnqFixedPoint {
    pub result: FixedPointResult,
    /// `dist(x*, T(x*))`.
    pub defect: f64,
}

/// Selection from a checked witness, then its Brouwer fixed point.
pub fn solve_wnq_fixed_point(
    t: &Correspondence,
    w: &WnqWitness,
    k: &SimplexDomain,
    eps: f64,
    check_mesh: Mesh,
    tol: f64,
    cfg: &BrouwerConfig,
) -> Result<WnqFixedPoint> {
    let rep = check_wnq(t, w, check_mesh, tol)?;
    if !rep.passed() {
        return Err(Error::WitnessRejected { radius: 0.0, violations: rep.violations.len() });
    }
    let f = build_wnq_selection(k, w)?;
    let result = brouwer_fixed_point(&f, k, eps, cfg)?;
    let defect = t.value(&result.x_star).distance(&result.x_star)?;
    Ok(WnqFixedPoint { result, defect })
}

/// Supplies a witness for the thickening at radius `r`.
pub trait WitnessProvider: Sync {
    fn witness(&self, r: f64) -> Option<WnqWitness>;
}

impl<F> WitnessProvider for F
where
    F: Fn(f64) -> Option<WnqWitness> + Sync,
{
    fn witness(&self, r: f64) -> Option<WnqWitness> {
        self(r)
    }
}

/// Witnesses keyed by radius; a `None` key applies to every radius.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WitnessTable {
    pub entries: Vec<(Option<f64>, WnqWitness)>,
}

impl WitnessProvider for WitnessTable {
    fn witness(&self, r: f64) -> Option<WnqWitness> {
        let exact = self.entries.iter().find(|(k, _)| k.is_some_and(|k| (k - r).abs() <= 1e-12 * r.max(1.0)));
        exact.or_else(|| self.entries.iter().find(|(k, _)| k.is_none())).map(|e| e.1.clone())
    }
}

/// `r_k = 2^-k`, `k = 1..=count`.
pub fn default_radii(count: usize) -> Vec<f64> {
    (1..=count).map(|k| 0.5f64.powi(k as i32)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub eps: f64,
    /// Closure certificate radius.
    pub eta: f64,
    /// Lattice spacing for the closure certificate.
    pub h: f64,
    pub tol: f64,
    pub check_mesh: usize,
    pub norm: Norm,
    pub brouwer: BrouwerConfig,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self { eps: 1e-9, eta: 0.05, h: 1.0 / 64.0, tol: 1e-9, check_mesh: 64, norm: Norm::Inf, brouwer: BrouwerConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetStep {
    pub radius: f64,
    pub x: Vec<f64>,
    /// `dist(x_k, T_{r_k}(x_k))`.
    pub defect: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxNetTrace {
    pub steps: Vec<NetStep>,
    pub cluster: Vec<f64>,
    pub cluster_diameter: f64,
    pub eta: f64,
    pub certificate: bool,
    pub verdict: Verdict,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn in_ball(c: &[f64], r: f64, p: &[f64]) -> bool {
    euclid(c, p) <= r * (1.0 + 1e-12) + 1e-15
}

/// Smallest enclosing ball of at most three points.
pub fn enclosing_ball(pts: &[Vec<f64>]) -> (Vec<f64>, f64) {
    match pts.len() {
        0 => (Vec::new(), 0.0),
        1 => (pts[0].clone(), 0.0),
        _ => {
            let mut best: Option<(Vec<f64>, f64)> = None;
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let c: Vec<f64> = pts[i].iter().zip(&pts[j]).map(|(a, b)| 0.5 * (a + b)).collect();
                    let r = 0.5 * euclid(&pts[i], &pts[j]);
                    if pts.iter().all(|p| in_ball(&c, r, p)) && best.as_ref().is_none_or(|b| r < b.1) {
                        best = Some((c, r));
                    }
                }
            }
            if let Some(b) = best {
                return b;
            }
            let (a, b, c) = (&pts[0], &pts[1], &pts[2]);
            let u: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
            let v: Vec<f64> = c.iter().zip(a).map(|(x, y)| x - y).collect();
            let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x * y).sum::<f64>();
            let (uu, uv, vv) = (dot(&u, &u), dot(&u, &v), dot(&v, &v));
            let det = uu * vv - uv * uv;
            let s = 0.5 * (uu * vv - vv * uv) / det;
            let t = 0.5 * (vv * uu - uu * uv) / det;
            let centre: Vec<f64> = a.iter().zip(&u).zip(&v).map(|((ai, ui), vi)| ai + s * ui + t * vi).collect();
            let r = euclid(&centre, a);
            (centre, r)
        }
    }
}

fn diameter(pts: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(euclid(&pts[i], &pts[j]));
        }
    }
    d
}

/// Per radius: fixed point of the selection of `T_r`; then the tail cluster
/// point and its closure certificate.
pub fn approx_fixed_point_net(
    t: &Correspondence,
    radii: &[f64],
    provider: &dyn WitnessProvider,
    k: &SimplexDomain,
    cfg: &NetConfig,
) -> Result<ApproxNetTrace> {
    if radii.is_empty() {
        return Err(Error::Precondition("empty radius schedule".into()));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Precondition("radii must be positive and strictly decreasing".into()));
    }
    let check_mesh = Mesh::new(cfg.check_mesh)?;
    let steps = exec::map(radii, |&r| -> Result<NetStep> {
        let tr = t.thicken(r, cfg.norm)?;
        let w = provider.witness(r).ok_or(Error::MissingWitness(r))?;
        let rep = check_wnq(&tr, &w, check_mesh, cfg.tol)?;
        if !rep.passed() {
            return Err(Error::WitnessRejected { radius: r, violations: rep.violations.len() });
        }
        let f = build_wnq_selection(k, &w)?;
        let fp = brouwer_fixed_point(&f, k, cfg.eps, &cfg.brouwer)?;
        let defect = tr.value(&fp.x_star).distance(&fp.x_star)?;
        Ok(NetStep { radius: r, x: fp.x_star, defect, residual: fp.residual })
    });
    let steps: Vec<NetStep> = steps.into_iter().collect::<Result<_>>()?;
    let tail: Vec<Vec<f64>> = steps.iter().rev().take(3).rev().map(|s| s.x.clone()).collect();
    let (cluster, _) = enclosing_ball(&tail);
    let cluster_diameter = diameter(&tail);
    let certificate = graph_closure_membership(t, &cluster, &cluster, cfg.eta, cfg.h)?;
    let defects_ok = steps.iter().all(|s| s.defect <= cfg.tol);
    let verdict = if cluster_diameter > cfg.eta {
        Verdict::Inconclusive
    } else if certificate && defects_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ApproxNetTrace { steps, cluster, cluster_diameter, eta: cfg.eta, certificate, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryResult {
    pub trace: ApproxNetTrace,
    pub x_star: Vec<f64>,
    /// `dist(x*, T(x*))`.
    pub defect: f64,
}

/// Grid check that `S` is nonempty and its `eta`-adherence lies in `T`.
pub fn check_corollary_precondition(
    s: &Correspondence,
    t: &Correspondence,
    mesh: Mesh,
    eta: f64,
    tol: f64,
) -> Result<crate::report::PropertyReport> {
    use crate::report::{PropertyReport, Violation};
    let sample = s.sample_graph(mesh);
    let checks = exec::map(&sample.samples, |(x, sx)| -> Result<Option<Violation>> {
        if sx.is_empty() {
            return Ok(Some(Violation::new(x.clone(), f64::INFINITY).with_detail("S(x) empty")));
        }
        let tx = t.value(x);
        let mut worst: f64 = 0.0;
        for (xp, sp) in &sample.samples {
            if euclid(xp, x) > eta + 1e-12 {
                continue;
            }
            for v in sp.vertices() {
                worst = worst.max(tx.distance(v)?);
            }
        }
        Ok((worst > tol).then(|| Violation::new(x.clone(), worst).with_detail("adherence of S leaves T(x)")))
    });
    let mut v = Vec::new();
    for c in checks {
        if let Some(x) = c? {
            v.push(x);
        }
    }
    Ok(PropertyReport::new("corollary_precondition", format!("domain mesh=1/{}", mesh.order()), sample.samples.len(), v))
}

/// Net on `S`; its cluster point is reported as a fixed point of `T`.
pub fn solve_corollary_pair(
    s: &Correspondence,
    t: &Correspondence,
    k: &SimplexDomain,
    radii: &[f64],
    provider: &dyn WitnessProvider,
    grid: Mesh,
    cfg: &NetConfig,
) -> Result<CorollaryResult> {
    let pre = check_corollary_precondition(s, t, grid, cfg.eta, cfg.tol)?;
    if !pre.passed() {
        return Err(Error::Precondition(format!("{} grid points violate the corollary hypotheses", pre.violations.len())));
    }
    let trace = approx_fixed_point_net(s, radii, provider, k, cfg)?;
    let x_star = trace.cluster.clone();
    let defect = t.value(&x_star).distance(&x_star)?;
    Ok(CorollaryResult { trace, x_star, defect })
}
