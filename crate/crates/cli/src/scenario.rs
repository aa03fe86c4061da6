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

//! Scenario documents: declarations of domains, correspondences, witnesses and
//! the operations each command runs.

use std::collections::BTreeMap;
use std::path::Path;

use corrfix_core::biconvex::{GridAxis, ProductPoint};
use corrfix_core::classes::{BiconvexWitness, PlMap, WnqWitness};
use corrfix_core::correspondence::{AffineMap, Correspondence, CorrespondenceSpec, Domain, Norm};
use corrfix_core::fixed_point::BrouwerConfig;
use corrfix_core::game::{Agent, QuasiGame, RegionDecl};
use corrfix_core::{PolytopeSet, SimplexDomain};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCENARIO_VERSION: &str = "corrfix-scenario/1";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub config: Config,
    #[serde(default)]
    pub domains: BTreeMap<String, DomainDecl>,
    #[serde(default)]
    pub correspondences: BTreeMap<String, CorrespondenceDecl>,
    #[serde(default)]
    pub witnesses: BTreeMap<String, WitnessDecl>,
    #[serde(default)]
    pub checks: Vec<CheckDecl>,
    #[serde(default)]
    pub selections: Vec<SelectionDecl>,
    #[serde(default)]
    pub fixpoints: Vec<FixpointDecl>,
    #[serde(default)]
    pub hulls: Vec<HullDecl>,
    #[serde(default)]
    pub games: Vec<GameDecl>,
}

/// Scenario-wide defaults; each operation may override the grid and tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Grid order `m` (spacing `1/m`) for sweeps.
    pub mesh: usize,
    pub tol: f64,
    pub eps: f64,
    pub eta: f64,
    pub seed: u64,
    pub norm: Norm,
    /// Default radius schedule `2^-k`, `k = 1..=radius_count`.
    pub radius_count: usize,
    pub brouwer: BrouwerConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self { mesh: 32, tol: 1e-9, eps: 1e-9, eta: 0.05, seed: 0, norm: Norm::Inf, radius_count: 10, brouwer: BrouwerConfig::default() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainDecl {
    /// Vertex list of a simplex.
    Simplex(Vec<Vec<f64>>),
    /// Product of named simplex domains.
    Product(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceDecl {
    pub domain: String,
    /// Vertices of the codomain polytope.
    pub codomain: Vec<Vec<f64>>,
    pub spec: CorrespondenceSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    #[serde(default)]
    pub radius: Option<f64>,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
    #[serde(default)]
    pub g: Option<Vec<PlMap>>,
}

impl TableEntry {
    pub fn witness(&self) -> WnqWitness {
        let n = self.points.len();
        WnqWitness {
            points: self.points.clone(),
            values: self.values.clone(),
            g: self.g.clone().unwrap_or_else(|| vec![PlMap::identity(); n]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchProperty {
    Wcg,
    Wnq,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WitnessDecl {
    Wcg {
        points: Vec<Vec<f64>>,
        values: Vec<Vec<f64>>,
    },
    Wnq {
        points: Vec<Vec<f64>>,
        values: Vec<Vec<f64>>,
        #[serde(default)]
        g: Option<Vec<PlMap>>,
    },
    Biconvex {
        pairs: Vec<ProductPoint>,
        values: Vec<Vec<f64>>,
    },
    /// Witnesses keyed by thickening radius; an entry without a radius applies to all.
    Table {
        entries: Vec<TableEntry>,
    },
    /// Found by candidate enumeration plus seeded sampling.
    Search {
        correspondence: String,
        property: SearchProperty,
        points: Vec<Vec<f64>>,
        #[serde(default = "default_density")]
        density: usize,
        #[serde(default = "one")]
        g_family: usize,
        #[serde(default)]
        samples: usize,
    },
}

fn default_density() -> usize {
    4
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckProperty {
    Wcg,
    Wnq,
    StarWcg,
    StarWnq,
    WeaklyBiconvex,
}

/// Per-operation overrides of the scenario config.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(default)]
pub struct Knobs {
    pub mesh: Option<usize>,
    pub tol: Option<f64>,
    pub eps: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CheckDecl {
    pub name: String,
    pub property: CheckProperty,
    pub correspondence: String,
    pub witness: String,
    /// Thickening radii for the star variants; defaults to the config schedule.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    /// Hull operation whose set carries the biconvex check.
    #[serde(default)]
    pub set: Option<String>,
    #[serde(default, flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionKindDecl {
    Wnq,
    Biconvex,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisDecl {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub order: usize,
}

impl AxisDecl {
    pub fn build(&self, order: Option<usize>) -> Result<GridAxis, CliError> {
        Ok(GridAxis::new(self.lo.clone(), self.hi.clone(), order.unwrap_or(self.order))?)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SelectionDecl {
    pub name: String,
    pub kind: SelectionKindDecl,
    pub correspondence: String,
    pub witness: String,
    #[serde(default)]
    pub x_axis: Option<AxisDecl>,
    #[serde(default)]
    pub y_axis: Option<AxisDecl>,
    #[serde(default, flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixpointBody {
    /// Brouwer on an explicit affine self-map of a simplex.
    AffineMap {
        domain: String,
        map: AffineMap,
        #[serde(default)]
        expect: Option<Vec<f64>>,
    },
    /// Fixed point of the selection built from a WNQ witness.
    Selection { correspondence: String, witness: String },
    /// Net of fixed points of thickenings.
    Net {
        correspondence: String,
        witness: String,
        #[serde(default)]
        radii: Option<Vec<f64>>,
    },
    /// Net on `s`, reported as a fixed point of `t`.
    Corollary {
        s: String,
        t: String,
        witness: String,
        #[serde(default)]
        radii: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
pub struct FixpointDecl {
    pub name: String,
    #[serde(flatten)]
    pub body: FixpointBody,
    #[serde(flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSets {
    pub count: usize,
    #[serde(default = "one")]
    pub sets: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct HullDecl {
    pub name: String,
    pub x_axis: AxisDecl,
    pub y_axis: AxisDecl,
    #[serde(default)]
    pub points: Option<Vec<ProductPoint>>,
    #[serde(default)]
    pub random: Option<RandomSets>,
    #[serde(default, flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDecl {
    pub strategy: String,
    pub a: String,
    pub b: String,
    pub p: String,
    pub region: RegionDecl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantDecl {
    Simplex,
    Biconvex,
}

#[derive(Debug, Clone, Deserialize)]
pub struct GameDecl {
    pub name: String,
    #[serde(default = "simplex_variant")]
    pub variant: VariantDecl,
    pub agents: Vec<AgentDecl>,
    /// Grid order of the hypothesis checks.
    #[serde(default)]
    pub check_mesh: Option<usize>,
    #[serde(default)]
    pub refine_rounds: Option<usize>,
    #[serde(default, flatten)]
    pub knobs: Knobs,
}

fn simplex_variant() -> VariantDecl {
    VariantDecl::Simplex
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("scenario does not parse: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Invalid("scenario is not UTF-8".into()))?;
        Ok((Self::parse(text)?, bytes))
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.version != SCENARIO_VERSION {
            return Err(CliError::Invalid(format!("unsupported scenario version {:?}; expected {SCENARIO_VERSION:?}", self.version)));
        }
        check_config(&self.config)?;
        for (section, names) in [
            ("checks", self.checks.iter().map(|d| &d.name).collect::<Vec<_>>()),
            ("selections", self.selections.iter().map(|d| &d.name).collect()),
            ("fixpoints", self.fixpoints.iter().map(|d| &d.name).collect()),
            ("hulls", self.hulls.iter().map(|d| &d.name).collect()),
            ("games", self.games.iter().map(|d| &d.name).collect()),
        ] {
            let mut seen = std::collections::BTreeSet::new();
            if let Some(dup) = names.into_iter().find(|n| !seen.insert(*n)) {
                return Err(invalid(format!("{section}: duplicate name {dup}")));
            }
        }
        for (name, d) in &self.domains {
            if let DomainDecl::Product(fs) = d {
                for f in fs {
                    match self.domains.get(f) {
                        Some(DomainDecl::Simplex(_)) => {}
                        Some(DomainDecl::Product(_)) => return Err(invalid(format!("domain {name}: factor {f} is itself a product"))),
                        None => return Err(unresolved("domain", f, name)),
                    }
                }
            }
        }
        for (name, c) in &self.correspondences {
            self.require_domain(&c.domain, name)?;
        }
        for (name, w) in &self.witnesses {
            if let WitnessDecl::Search { correspondence, .. } = w {
                self.require_corr(correspondence, name)?;
            }
        }
        for c in &self.checks {
            check_knobs(&c.knobs, &c.name)?;
            self.require_corr(&c.correspondence, &c.name)?;
            self.require_witness(&c.witness, &c.name)?;
            if let Some(r) = &c.radii {
                check_radii(r, &c.name)?;
            }
            match (&c.property, &c.set) {
                (CheckProperty::WeaklyBiconvex, Some(set)) => {
                    if !self.hulls.iter().any(|h| &h.name == set) {
                        return Err(unresolved("hull", set, &c.name));
                    }
                }
                (CheckProperty::WeaklyBiconvex, None) => return Err(invalid(format!("{}: weakly_biconvex needs a set", c.name))),
                _ => {}
            }
        }
        for s in &self.selections {
            check_knobs(&s.knobs, &s.name)?;
            self.require_corr(&s.correspondence, &s.name)?;
            self.require_witness(&s.witness, &s.name)?;
            if s.kind == SelectionKindDecl::Biconvex && (s.x_axis.is_none() || s.y_axis.is_none()) {
                return Err(invalid(format!("{}: biconvex selection needs x_axis and y_axis", s.name)));
            }
        }
        for f in &self.fixpoints {
            check_knobs(&f.knobs, &f.name)?;
            match &f.body {
                FixpointBody::AffineMap { domain, .. } => self.require_domain(domain, &f.name)?,
                FixpointBody::Selection { correspondence, witness } => {
                    self.require_corr(correspondence, &f.name)?;
                    self.require_witness(witness, &f.name)?;
                }
                FixpointBody::Net { correspondence, witness, radii } => {
                    self.require_corr(correspondence, &f.name)?;
                    self.require_witness(witness, &f.name)?;
                    if let Some(r) = radii {
                        check_radii(r, &f.name)?;
                    }
                }
                FixpointBody::Corollary { s, t, witness, radii } => {
                    self.require_corr(s, &f.name)?;
                    self.require_corr(t, &f.name)?;
                    self.require_witness(witness, &f.name)?;
                    if let Some(r) = radii {
                        check_radii(r, &f.name)?;
                    }
                }
            }
        }
        for h in &self.hulls {
            check_knobs(&h.knobs, &h.name)?;
            if h.points.is_none() == h.random.is_none() {
                return Err(invalid(format!("{}: give exactly one of points and random", h.name)));
            }
        }
        for g in &self.games {
            check_knobs(&g.knobs, &g.name)?;
            if g.check_mesh == Some(0) {
                return Err(invalid(format!("{}: check_mesh must be positive", g.name)));
            }
            for a in &g.agents {
                self.require_domain(&a.strategy, &g.name)?;
                for c in [&a.a, &a.b, &a.p] {
                    self.require_corr(c, &g.name)?;
                }
            }
        }
        Ok(())
    }

    fn require_domain(&self, name: &str, user: &str) -> Result<(), CliError> {
        self.domains.get(name).map(|_| ()).ok_or_else(|| unresolved("domain", name, user))
    }

    fn require_corr(&self, name: &str, user: &str) -> Result<(), CliError> {
        self.correspondences.get(name).map(|_| ()).ok_or_else(|| unresolved("correspondence", name, user))
    }

    fn require_witness(&self, name: &str, user: &str) -> Result<(), CliError> {
        self.witnesses.get(name).map(|_| ()).ok_or_else(|| unresolved("witness", name, user))
    }

    pub fn simplex(&self, name: &str) -> Result<SimplexDomain, CliError> {
        match self.domains.get(name) {
            Some(DomainDecl::Simplex(v)) => Ok(SimplexDomain::new(v.clone())?),
            Some(DomainDecl::Product(_)) => Err(invalid(format!("domain {name} is a product, a simplex is required"))),
            None => Err(unresolved("domain", name, "lookup")),
        }
    }

    pub fn domain(&self, name: &str) -> Result<Domain, CliError> {
        match self.domains.get(name) {
            Some(DomainDecl::Simplex(_)) => Ok(Domain::Simplex(self.simplex(name)?)),
            Some(DomainDecl::Product(fs)) => Ok(Domain::Product(fs.iter().map(|f| self.simplex(f)).collect::<Result<_, _>>()?)),
            None => Err(unresolved("domain", name, "lookup")),
        }
    }

    pub fn correspondence(&self, name: &str) -> Result<Correspondence, CliError> {
        let d = self.correspondences.get(name).ok_or_else(|| unresolved("correspondence", name, "lookup"))?;
        let codomain = PolytopeSet::from_vertices(d.codomain.clone())?;
        Ok(Correspondence::from_spec(self.domain(&d.domain)?, codomain, d.spec.clone())?)
    }

    pub fn witness(&self, name: &str) -> Result<&WitnessDecl, CliError> {
        self.witnesses.get(name).ok_or_else(|| unresolved("witness", name, "lookup"))
    }

    /// Biconvex witnesses as declared; other kinds are a type error.
    pub fn biconvex_witness(&self, name: &str) -> Result<BiconvexWitness, CliError> {
        match self.witness(name)? {
            WitnessDecl::Biconvex { pairs, values } => Ok(BiconvexWitness { pairs: pairs.clone(), values: values.clone() }),
            _ => Err(invalid(format!("witness {name} is not a biconvex witness"))),
        }
    }

    /// The game declared under `name`.
    pub fn game(&self, name: &str) -> Result<QuasiGame, CliError> {
        let d = self.games.iter().find(|g| g.name == name).ok_or_else(|| unresolved("game", name, "lookup"))?;
        let mut agents = Vec::new();
        for a in &d.agents {
            agents.push(Agent {
                strategy: self.simplex(&a.strategy)?,
                a: self.correspondence(&a.a)?,
                b: self.correspondence(&a.b)?,
                p: self.correspondence(&a.p)?,
                region: a.region.clone(),
            });
        }
        Ok(QuasiGame::new(agents)?)
    }

    /// The declaration list that a command runs.
    pub fn section_len(&self, command: crate::Command) -> usize {
        use crate::Command::*;
        match command {
            Check => self.checks.len(),
            Select => self.selections.len(),
            Fixpoint => self.fixpoints.len(),
            Hull => self.hulls.len(),
            Equilibrium => self.games.len(),
        }
    }
}

fn invalid(msg: String) -> CliError {
    CliError::Invalid(msg)
}

fn unresolved(what: &str, name: &str, user: &str) -> CliError {
    CliError::Invalid(format!("{user}: unknown {what} {name:?}"))
}

fn positive(v: f64, what: &str) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be positive and finite, got {v}")))
    }
}

fn check_config(c: &Config) -> Result<(), CliError> {
    positive(c.tol, "tol")?;
    positive(c.eps, "eps")?;
    positive(c.eta, "eta")?;
    if c.mesh == 0 {
        return Err(invalid("mesh must be positive".into()));
    }
    if c.radius_count == 0 {
        return Err(invalid("radius_count must be positive".into()));
    }
    let b = &c.brouwer;
    if b.order == 0 || b.max_order < b.order || !(b.zoom >= 1.0) || b.max_cells == 0 {
        return Err(invalid("brouwer config out of range".into()));
    }
    Ok(())
}

pub(crate) fn check_knobs(k: &Knobs, name: &str) -> Result<(), CliError> {
    for (v, what) in [(k.tol, "tol"), (k.eps, "eps"), (k.eta, "eta")] {
        if let Some(v) = v {
            positive(v, &format!("{name}: {what}"))?;
        }
    }
    if k.mesh == Some(0) {
        return Err(invalid(format!("{name}: mesh must be positive")));
    }
    Ok(())
}

fn check_radii(r: &[f64], name: &str) -> Result<(), CliError> {
    if r.is_empty() || r.iter().any(|&v| !(v > 0.0)) {
        return Err(invalid(format!("{name}: radii must be positive and nonempty")));
    }
    Ok(())
}
