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

//! Generalized quasi-games over `Z = X × X`: W-regions, the product map and
//! certified equilibria.

use serde::{Deserialize, Serialize};

use crate::biconvex::{biconvex_hull, BiconvexGridSet, GridAxis, ProductPoint};
use crate::classes::{BiconvexWitness, WnqWitness};
use crate::correspondence::{Correspondence, Domain, DomainGrid};
use crate::error::{Error, Result};
use crate::exec;
use crate::polytope::{PolytopeSet, SeparatingHyperplane, Separation};
use crate::report::{PropertyReport, Violation};
use crate::selection::{build_biconvex_selection, build_wnq_selection, SelectionFunction};
use crate::simplex::{Mesh, SimplexDomain};

pub const MAX_AGENTS: usize = 4;
const PLACEMENT_TOL: f64 = 1e-9;

/// Declared structure of `W_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "snake_case")]
pub enum RegionDecl {
    /// `A_i ∩ P_i` is empty everywhere.
    Empty,
    /// Open set whose closure is `closure`; the witness is aligned with its vertices.
    Simplex { closure: SimplexDomain, witness: WnqWitness },
    /// Interior of the grid biconvex hull of the witness pairs.
    BiconvexHull { witness: BiconvexWitness },
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub strategy: SimplexDomain,
    pub a: Correspondence,
    pub b: Correspondence,
    pub p: Correspondence,
    pub region: RegionDecl,
}

#[derive(Debug, Clone)]
pub struct QuasiGame {
    agents: Vec<Agent>,
    z: Domain,
    offsets: Vec<usize>,
    x_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Simplex-closure regions, `x_i ∉ P_i`.
    Simplex,
    /// Biconvex-hull regions, `x_i ∉ co P_i`.
    Biconvex,
}

impl QuasiGame {
    pub fn new(agents: Vec<Agent>) -> Result<Self> {
        if agents.is_empty() || agents.len() > MAX_AGENTS {
            return Err(Error::InvalidGame(format!("{} agents; supported 1..={MAX_AGENTS}", agents.len())));
        }
        let mut offsets = Vec::new();
        let mut x_dim = 0;
        for (i, a) in agents.iter().enumerate() {
            if a.strategy.vertex_count() > 3 {
                return Err(Error::InvalidGame(format!("agent {i}: strategy simplex of dimension above 2")));
            }
            offsets.push(x_dim);
            x_dim += a.strategy.ambient_dim();
        }
        let mut factors: Vec<SimplexDomain> = agents.iter().map(|a| a.strategy.clone()).collect();
        factors.extend(agents.iter().map(|a| a.strategy.clone()));
        let z = Domain::Product(factors);
        for (i, a) in agents.iter().enumerate() {
            let d = a.strategy.ambient_dim();
            for (name, c) in [("A", &a.a), ("B", &a.b), ("P", &a.p)] {
                if c.domain().ambient_dim() != 2 * x_dim {
                    return Err(Error::InvalidGame(format!("agent {i}: {name} is not defined on Z")));
                }
                if c.codomain().dim() != d {
                    return Err(Error::InvalidGame(format!("agent {i}: {name} does not map into X_{i}")));
                }
            }
        }
        Ok(Self { agents, z, offsets, x_dim })
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn z_domain(&self) -> &Domain {
        &self.z
    }

    pub fn x_dim(&self) -> usize {
        self.x_dim
    }

    pub fn z_grid(&self, mesh: Mesh) -> DomainGrid {
        self.z.grid(mesh)
    }

    pub fn x_part<'a>(&self, z: &'a [f64], i: usize) -> &'a [f64] {
        let d = self.agents[i].strategy.ambient_dim();
        &z[self.offsets[i]..self.offsets[i] + d]
    }

    pub fn y_part<'a>(&self, z: &'a [f64], i: usize) -> &'a [f64] {
        let d = self.agents[i].strategy.ambient_dim();
        let o = self.x_dim + self.offsets[i];
        &z[o..o + d]
    }

    /// `(A_i ∩ P_i)(z)` decided by separation.
    pub fn constrained_preference(&self, i: usize, z: &[f64]) -> Result<(PolytopeSet, PolytopeSet, Separation)> {
        let a = self.agents[i].a.value(z);
        let p = self.agents[i].p.value(z);
        let s = a.separation(&p)?;
        Ok((a, p, s))
    }

    pub fn in_w(&self, i: usize, z: &[f64]) -> Result<bool> {
        Ok(!self.constrained_preference(i, z)?.2.is_empty_intersection())
    }

    fn x_axis(&self, order: usize) -> Result<GridAxis> {
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for a in &self.agents {
            if a.strategy.vertex_count() != 2 || a.strategy.ambient_dim() != 1 {
                return Err(Error::InvalidGame("biconvex regions need interval strategy sets".into()));
            }
            let (u, v) = (a.strategy.vertices()[0][0], a.strategy.vertices()[1][0]);
            lo.push(u.min(v));
            hi.push(u.max(v));
        }
        GridAxis::new(lo, hi, order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Interior,
    Boundary,
    Exterior,
}

/// Declared region prepared for point classification.
#[derive(Debug, Clone)]
enum Prepared {
    Empty,
    Simplex(SimplexDomain),
    Hull(BiconvexGridSet),
}

impl Prepared {
    fn new(game: &QuasiGame, decl: &RegionDecl, mesh: Mesh) -> Result<Self> {
        Ok(match decl {
            RegionDecl::Empty => Prepared::Empty,
            RegionDecl::Simplex { closure, .. } => {
                if closure.ambient_dim() != game.z.ambient_dim() {
                    return Err(Error::InvalidGame("region closure is not a simplex in Z".into()));
                }
                Prepared::Simplex(closure.clone())
            }
            RegionDecl::BiconvexHull { witness } => {
                let ax = game.x_axis(mesh.order())?;
                Prepared::Hull(biconvex_hull(&witness.pairs, &ax, &ax)?)
            }
        })
    }

    fn place(&self, z: &[f64], x_dim: usize) -> Result<Placement> {
        Ok(match self {
            Prepared::Empty => Placement::Exterior,
            Prepared::Simplex(k) => {
                let (l, res) = k.raw_coordinates(z)?;
                let min = l.iter().copied().fold(f64::INFINITY, f64::min);
                if res > PLACEMENT_TOL || min < -PLACEMENT_TOL {
                    Placement::Exterior
                } else if min > PLACEMENT_TOL {
                    Placement::Interior
                } else {
                    Placement::Boundary
                }
            }
            Prepared::Hull(h) => {
                let p = ProductPoint::new(z[..x_dim].to_vec(), z[x_dim..].to_vec());
                let Some((ix, iy)) = h.snap(&p) else { return Ok(Placement::Exterior) };
                if !h.get(ix, iy) {
                    return Ok(Placement::Exterior);
                }
                let (ax, ay) = (h.x_axis(), h.y_axis());
                let on = |axis: &GridAxis, idx: usize| -> Vec<usize> {
                    let m = axis.multi(idx);
                    let mut out = Vec::new();
                    for k in 0..m.len() {
                        for s in [-1i64, 1] {
                            let v = m[k] as i64 + s;
                            if v < 0 || v > axis.order() as i64 {
                                return Vec::new();
                            }
                            let mut n = m.clone();
                            n[k] = v as usize;
                            out.push(axis.linear(&n));
                        }
                    }
                    out
                };
                let nx = on(ax, ix);
                let ny = on(ay, iy);
                let interior = !nx.is_empty() && !ny.is_empty() && nx.iter().all(|&j| h.get(j, iy)) && ny.iter().all(|&j| h.get(ix, j));
                if interior {
                    Placement::Interior
                } else {
                    Placement::Boundary
                }
            }
        })
    }
}

/// `W_i` on the Z-grid with the declared-structure cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionWi {
    pub agent: usize,
    pub mesh: Mesh,
    pub indicator: Vec<bool>,
    pub placement: Vec<Placement>,
    /// Grid nodes on the declared boundary.
    pub boundary: Vec<usize>,
    /// Declared interior with empty `A_i ∩ P_i`, or declared exterior with a nonempty one.
    pub mismatches: Vec<usize>,
}

impl RegionWi {
    pub fn count(&self) -> usize {
        self.indicator.iter().filter(|&&b| b).count()
    }
}

pub fn compute_wi(game: &QuasiGame, i: usize, mesh: Mesh) -> Result<RegionWi> {
    compute_wi_on(game, i, &game.z_grid(mesh))
}

fn compute_wi_on(game: &QuasiGame, i: usize, grid: &DomainGrid) -> Result<RegionWi> {
    let prep = Prepared::new(game, &game.agents[i].region, grid.mesh)?;
    let rows =
        exec::map(&grid.nodes, |n| -> Result<(bool, Placement)> { Ok((game.in_w(i, &n.point)?, prep.place(&n.point, game.x_dim)?)) });
    let mut indicator = Vec::with_capacity(rows.len());
    let mut placement = Vec::with_capacity(rows.len());
    let (mut boundary, mut mismatches) = (Vec::new(), Vec::new());
    for (k, r) in rows.into_iter().enumerate() {
        let (w, p) = r?;
        match (p, w) {
            (Placement::Boundary, _) => boundary.push(k),
            (Placement::Interior, false) | (Placement::Exterior, true) => mismatches.push(k),
            _ => {}
        }
        indicator.push(w);
        placement.push(p);
    }
    Ok(RegionWi { agent: i, mesh: grid.mesh, indicator, placement, boundary, mismatches })
}

fn selection_for(game: &QuasiGame, i: usize, mesh: Mesh) -> Result<Option<SelectionFunction>> {
    match &game.agents[i].region {
        RegionDecl::Empty => Ok(None),
        RegionDecl::Simplex { closure, witness } => Ok(Some(build_wnq_selection(closure, witness)?)),
        RegionDecl::BiconvexHull { witness } => {
            let ax = game.x_axis(mesh.order())?;
            Ok(Some(build_biconvex_selection(witness, &ax, &ax)?))
        }
    }
}

/// `Φ(z) = ∏ Φ'_i(z) × ∏ cl B_j(z)`, with `Φ'_i = {f_i}` on `W_i` and `X_i` off it.
#[derive(Debug, Clone)]
pub struct ProductMap<'g> {
    game: &'g QuasiGame,
    selections: Vec<Option<SelectionFunction>>,
}

impl<'g> ProductMap<'g> {
    pub fn new(game: &'g QuasiGame, selections: Vec<Option<SelectionFunction>>) -> Result<Self> {
        if selections.len() != game.agents.len() {
            return Err(Error::InvalidGame("one selection slot per agent required".into()));
        }
        Ok(Self { game, selections })
    }

    /// Factor values `(Φ'_1..Φ'_N, B_1..B_N)` at `z`.
    pub fn factors(&self, z: &[f64]) -> Result<Vec<PolytopeSet>> {
        let mut out = Vec::new();
        for i in 0..self.game.agents.len() {
            if self.game.in_w(i, z)? {
                let f = self.selections[i].as_ref().ok_or_else(|| Error::SelectionUndefined { agent: i, point: z.to_vec() })?;
                let v = f.eval(z).map_err(|_| Error::SelectionUndefined { agent: i, point: z.to_vec() })?;
                out.push(PolytopeSet::point(v));
            } else {
                out.push(self.game.agents[i].strategy.as_polytope());
            }
        }
        for a in &self.game.agents {
            out.push(a.b.value(z));
        }
        Ok(out)
    }

    /// Euclidean `dist(z, Φ(z))`.
    pub fn merit(&self, z: &[f64]) -> Result<f64> {
        let n = self.game.agents.len();
        let mut s = 0.0;
        for (k, v) in self.factors(z)?.iter().enumerate() {
            let part = if k < n { self.game.x_part(z, k) } else { self.game.y_part(z, k - n) };
            s += v.distance(part)?.powi(2);
        }
        Ok(s.sqrt())
    }
}

/// Exact emptiness evidence for `A_i ∩ P_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmptinessToken {
    EmptyA,
    EmptyP,
    Hyperplane(SeparatingHyperplane),
}

impl EmptinessToken {
    pub fn verify(&self, a: &PolytopeSet, p: &PolytopeSet) -> bool {
        match self {
            EmptinessToken::EmptyA => a.is_empty(),
            EmptinessToken::EmptyP => p.is_empty(),
            EmptinessToken::Hyperplane(h) => h.verify(a, p),
        }
    }
}

fn token(a: &PolytopeSet, sep: &Separation) -> Option<EmptinessToken> {
    match sep {
        Separation::EmptyOperand if a.is_empty() => Some(EmptinessToken::EmptyA),
        Separation::EmptyOperand => Some(EmptinessToken::EmptyP),
        Separation::Disjoint(h) => Some(EmptinessToken::Hyperplane(h.clone())),
        Separation::Overlap { .. } => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCertificate {
    pub agent: usize,
    /// `dist(y*_i, B_i(x*, y*))`.
    pub b_residual: f64,
    pub token: EmptinessToken,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub merit: f64,
    pub agents: Vec<AgentCertificate>,
    pub eps: f64,
    pub eta: f64,
    pub mesh_order: usize,
}

impl EquilibriumCertificate {
    pub fn z(&self) -> Vec<f64> {
        let mut z = self.x.clone();
        z.extend_from_slice(&self.y);
        z
    }

    /// Equilibrium clauses at the stored point plus re-evaluation of every token.
    pub fn verify(&self, game: &QuasiGame) -> Result<PropertyReport> {
        let base = verify_equilibrium(game, &self.x, &self.y, self.eta)?;
        let z = self.z();
        let mut v = Vec::new();
        for c in &self.agents {
            let a = game.agents[c.agent].a.value(&z);
            let p = game.agents[c.agent].p.value(&z);
            if !c.token.verify(&a, &p) {
                v.push(Violation::new(z.clone(), 0.0).with_detail(format!("agent {}: emptiness token does not verify", c.agent)));
            }
        }
        let tok = PropertyReport::new("certificate_tokens", "point", self.agents.len(), v);
        Ok(PropertyReport::combine("certificate", base.grid.clone(), &[base, tok]))
    }
}

/// Clause (i) `dist(y_i, B_i) <= eta` and clause (ii) exact emptiness of `A_i ∩ P_i`.
pub fn verify_equilibrium(game: &QuasiGame, x: &[f64], y: &[f64], eta: f64) -> Result<PropertyReport> {
    let mut z = x.to_vec();
    z.extend_from_slice(y);
    game.z.check_point(&z)?;
    let mut v = Vec::new();
    for i in 0..game.agents.len() {
        let d = game.agents[i].b.value(&z).distance(game.y_part(&z, i))?;
        if d > eta {
            v.push(Violation::new(z.clone(), d).with_detail(format!("agent {i}: y_{i} outside cl B_{i}")));
        }
        let (_, _, sep) = game.constrained_preference(i, &z)?;
        if let Separation::Overlap { gap } = sep {
            v.push(Violation::new(z.clone(), gap).with_detail(format!("agent {i}: A_{i} and P_{i} intersect")));
        }
    }
    Ok(PropertyReport::new("equilibrium", format!("point, eta={eta:e}"), 2 * game.agents.len(), v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conditions {
    pub containment: PropertyReport,
    pub b_nonempty: PropertyReport,
    pub usc: PropertyReport,
    pub irreflexive: PropertyReport,
    pub structure: PropertyReport,
}

impl Conditions {
    pub fn combined(&self) -> PropertyReport {
        let parts = [self.containment.clone(), self.b_nonempty.clone(), self.usc.clone(), self.irreflexive.clone(), self.structure.clone()];
        PropertyReport::combine("conditions", self.containment.grid.clone(), &parts)
    }

    /// Name of the first failing diagnostic.
    pub fn first_failure(&self) -> Option<&'static str> {
        [
            ("containment", &self.containment),
            ("b_nonempty", &self.b_nonempty),
            ("usc", &self.usc),
            ("irreflexive", &self.irreflexive),
            ("structure", &self.structure),
        ]
        .into_iter()
        .find(|(_, r)| !r.passed())
        .map(|(n, _)| n)
    }
}

fn excess(base: &PolytopeSet, other: &PolytopeSet) -> Result<f64> {
    let mut e: f64 = 0.0;
    for v in other.vertices() {
        e = e.max(base.distance(v)?);
    }
    Ok(e)
}

fn collect(rows: Vec<Result<Vec<Violation>>>) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Grid diagnostics for the existence hypotheses.
pub fn check_conditions(game: &QuasiGame, variant: Variant, mesh: Mesh, tol: f64) -> Result<Conditions> {
    let grid = game.z_grid(mesh);
    let label = format!("Z grid mesh=1/{} ({} nodes)", mesh.order(), grid.len());
    let n = game.agents.len();
    let idx: Vec<usize> = (0..grid.len()).collect();

    let rows = exec::map(&idx, |&k| -> Result<Vec<Violation>> {
        let z = &grid.nodes[k].point;
        let mut v = Vec::new();
        for (i, ag) in game.agents.iter().enumerate() {
            let (a, b) = (ag.a.value(z), ag.b.value(z));
            for av in a.vertices() {
                let d = b.distance(av)?;
                if d > tol {
                    v.push(Violation::new(z.clone(), d).with_detail(format!("agent {i}: A vertex {av:?} outside B")));
                }
            }
        }
        Ok(v)
    });
    let containment = PropertyReport::new("containment", label.clone(), grid.len() * n, collect(rows)?);

    let rows = exec::map(&idx, |&k| -> Result<Vec<Violation>> {
        let z = &grid.nodes[k].point;
        Ok((0..n)
            .filter(|&i| game.agents[i].b.value(z).is_empty())
            .map(|i| Violation::new(z.clone(), f64::INFINITY).with_detail(format!("agent {i}: B empty")))
            .collect())
    });
    let b_nonempty = PropertyReport::new("b_nonempty", label.clone(), grid.len() * n, collect(rows)?);

    // excess of nearby values over B(z0) must shrink with the neighbor distance
    let rows = exec::map(&idx, |&k| -> Result<Vec<Violation>> {
        let z0 = &grid.nodes[k].point;
        let mut v = Vec::new();
        for (i, ag) in game.agents.iter().enumerate() {
            let b0 = ag.b.value(z0);
            for j in grid.neighbors(k) {
                let z1 = &grid.nodes[j].point;
                let mid: Vec<f64> = z0.iter().zip(z1).map(|(a, b)| 0.5 * (a + b)).collect();
                let e_h = excess(&b0, &ag.b.value(z1))?;
                let e_half = excess(&b0, &ag.b.value(&mid))?;
                if e_half > tol && e_half > 0.75 * e_h {
                    v.push(Violation::new(z0.clone(), e_half).with_detail(format!("agent {i}: excess does not decay toward {mid:?}")));
                    break;
                }
            }
        }
        Ok(v)
    });
    let usc = PropertyReport::new("usc_surrogate", label.clone(), grid.len() * n, collect(rows)?)
        .with_note("excess of B over B(z0) compared at lattice spacing h and h/2");

    let regions: Vec<RegionWi> = (0..n).map(|i| compute_wi_on(game, i, &grid)).collect::<Result<_>>()?;
    let mut reflexive = Vec::new();
    let mut tested = 0;
    let mut structure = Vec::new();
    for (i, w) in regions.iter().enumerate() {
        for (k, &inside) in w.indicator.iter().enumerate() {
            if !inside {
                continue;
            }
            tested += 1;
            let z = &grid.nodes[k].point;
            // values are convex hulls, so co P_i = P_i in either variant
            let p = game.agents[i].p.value(z);
            let xi = game.x_part(z, i);
            if p.contains(xi, tol)? {
                reflexive.push(Violation::new(z.clone(), p.distance(xi)?).with_detail(format!("agent {i}: x_{i} in P_{i} on W_{i}")));
            }
        }
        for &k in &w.mismatches {
            let what = if w.indicator[k] { "nonempty outside" } else { "empty inside" };
            structure.push(Violation::new(grid.nodes[k].point.clone(), 0.0).with_detail(format!("agent {i}: A∩P {what} declared W_{i}")));
        }
    }
    let name = match variant {
        Variant::Simplex => "irreflexive",
        Variant::Biconvex => "irreflexive_hull",
    };
    let irreflexive = PropertyReport::new(name, label.clone(), tested, reflexive);
    let boundary: usize = regions.iter().map(|w| w.boundary.len()).sum();
    let structure = PropertyReport::new("w_structure", label, grid.len() * n, structure).with_metric("boundary_nodes", boundary as f64);
    Ok(Conditions { containment, b_nonempty, usc, irreflexive, structure })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumConfig {
    pub mesh: usize,
    /// Mesh of the condition diagnostics.
    pub check_mesh: usize,
    pub eps: f64,
    pub eta: f64,
    pub tol: f64,
    pub refine_rounds: usize,
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        Self { mesh: 16, check_mesh: 8, eps: 1e-9, eta: 1e-6, tol: 1e-9, refine_rounds: 400 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EquilibriumOutcome {
    Certified(EquilibriumCertificate),
    ScenarioFault { reason: String, report: PropertyReport, point: Option<Vec<f64>> },
    Inconclusive { best: Vec<f64>, merit: f64 },
}

/// Compass search from `z0`, first improving move in coordinate order.
fn refine(phi: &ProductMap, domain: &Domain, z0: Vec<f64>, m0: f64, h: f64, eps: f64, rounds: usize) -> (Vec<f64>, f64) {
    let (mut z, mut m) = (z0, m0);
    let mut step = 0.5 * h;
    for _ in 0..rounds {
        if m <= eps || step < 1e-13 {
            break;
        }
        let mut moved = false;
        'dirs: for k in 0..z.len() {
            for s in [-1.0, 1.0] {
                let mut c = z.clone();
                c[k] += s * step;
                if !domain.contains(&c, 0.0) {
                    continue;
                }
                if let Ok(mc) = phi.merit(&c) {
                    if mc < m {
                        z = c;
                        m = mc;
                        moved = true;
                        break 'dirs;
                    }
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (z, m)
}

/// Pipeline: conditions, W-regions, selections, product map, grid merit,
/// local refinement and the dichotomy at the fixed point.
pub fn solve_equilibrium(game: &QuasiGame, variant: Variant, cfg: &EquilibriumConfig) -> Result<EquilibriumOutcome> {
    let mesh = Mesh::new(cfg.mesh)?;
    let conditions = check_conditions(game, variant, Mesh::new(cfg.check_mesh)?, cfg.tol)?;
    if let Some(name) = conditions.first_failure() {
        return Ok(EquilibriumOutcome::ScenarioFault {
            reason: format!("hypothesis check failed: {name}"),
            report: conditions.combined(),
            point: None,
        });
    }
    let grid = game.z_grid(mesh);
    let n = game.agents.len();
    let mut selections = Vec::with_capacity(n);
    for i in 0..n {
        let w = compute_wi_on(game, i, &grid)?;
        let f = selection_for(game, i, mesh)?;
        let inside: Vec<usize> = (0..grid.len()).filter(|&k| w.indicator[k]).collect();
        let rows = exec::map(&inside, |&k| -> Result<Option<Violation>> {
            let z = &grid.nodes[k].point;
            let Some(f) = &f else {
                return Ok(Some(Violation::new(z.clone(), f64::INFINITY).with_detail(format!("agent {i}: no selection"))));
            };
            let Ok(v) = f.eval(z) else {
                return Ok(Some(Violation::new(z.clone(), f64::INFINITY).with_detail(format!("agent {i}: selection undefined"))));
            };
            let (a, p, _) = game.constrained_preference(i, z)?;
            let d = a.intersect(&p)?.distance(&v)?;
            Ok((d > cfg.tol).then(|| Violation::new(z.clone(), d).with_detail(format!("agent {i}: f_{i} outside A∩P"))))
        });
        let bad: Vec<Violation> = rows.into_iter().filter_map(|r| r.transpose()).collect::<Result<_>>()?;
        if !bad.is_empty() {
            let report = PropertyReport::new(format!("selection_{i}"), format!("W_{i} grid nodes"), inside.len(), bad);
            return Ok(EquilibriumOutcome::ScenarioFault {
                reason: format!("selection of agent {i} leaves A∩P on W_{i}"),
                report,
                point: None,
            });
        }
        selections.push(f);
    }
    let phi = ProductMap::new(game, selections)?;
    let merits = exec::map(&grid.nodes, |node| phi.merit(&node.point).unwrap_or(f64::INFINITY));
    let mut best = 0;
    for (k, &m) in merits.iter().enumerate() {
        if m <= cfg.eps {
            best = k;
            break;
        }
        if m < merits[best] {
            best = k;
        }
    }
    let (z, merit) = if merits[best] <= cfg.eps {
        (grid.nodes[best].point.clone(), merits[best])
    } else {
        refine(&phi, game.z_domain(), grid.nodes[best].point.clone(), merits[best], mesh.spacing(), cfg.eps, cfg.refine_rounds)
    };
    if merit > cfg.eps {
        return Ok(EquilibriumOutcome::Inconclusive { best: z, merit });
    }
    let mut agents = Vec::with_capacity(n);
    for i in 0..n {
        let (a, _, sep) = game.constrained_preference(i, &z)?;
        let Some(tok) = token(&a, &sep) else {
            let report = PropertyReport::new(
                "dichotomy",
                "fixed point",
                n,
                vec![Violation::new(z.clone(), 0.0)
                    .with_detail(format!("agent {i}: fixed point in W_{i}, so x_{i} = f_{i}(z) lies in P_{i}"))],
            );
            return Ok(EquilibriumOutcome::ScenarioFault {
                reason: format!("fixed point lies in W_{i}, contradicting x_{i} ∉ P_{i}"),
                report,
                point: Some(z),
            });
        };
        let b_residual = game.agents[i].b.value(&z).distance(game.y_part(&z, i))?;
        agents.push(AgentCertificate { agent: i, b_residual, token: tok });
    }
    let d = game.x_dim;
    Ok(EquilibriumOutcome::Certified(EquilibriumCertificate {
        x: z[..d].to_vec(),
        y: z[d..].to_vec(),
        merit,
        agents,
        eps: cfg.eps,
        eta: cfg.eta,
        mesh_order: mesh.order(),
    }))
}
