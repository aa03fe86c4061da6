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

//! Command dispatch: one scenario section per command, one [`Operation`] per declaration.

use std::time::{Duration, Instant};

use corrfix_core::biconvex::{biconvex_hull, hull_subset_convex, is_biconvex_set, random_points, BiconvexGridSet, ProductPoint};
use corrfix_core::classes::{
    check_star_variant, check_wcg, check_weakly_biconvex, check_wnq, search_witness_sampled, Property, WcgWitness, Witness, WnqWitness,
};
use corrfix_core::correspondence::{Correspondence, Domain};
use corrfix_core::fixed_point::{
    approx_fixed_point_net, brouwer_fixed_point, default_radii, solve_corollary_pair, solve_wnq_fixed_point, NetConfig, WitnessTable,
};
use corrfix_core::game::{solve_equilibrium, EquilibriumConfig, EquilibriumOutcome, Variant};
use corrfix_core::selection::{build_biconvex_selection, build_wnq_selection, verify_selection, SelectionDomain};
use corrfix_core::{Error, Mesh, PropertyReport, SimplexDomain, Verdict, Violation};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::scenario::*;
use crate::{CliError, Command, Overrides, EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_PASS, EXIT_VIOLATION};

pub const REPORT_FORMAT: &str = "corrfix-report/1";

/// Tolerance for `f(a_i) = b_i` on selections.
pub const VERTEX_TOL: f64 = 1e-12;

/// Tolerance against a declared analytic fixed point.
pub const EXPECT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Inconclusive,
    Fail,
    Invalid,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => EXIT_PASS,
            Outcome::Fail => EXIT_VIOLATION,
            Outcome::Invalid => EXIT_INVALID,
            Outcome::Inconclusive => EXIT_INCONCLUSIVE,
        }
    }

    fn of_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Outcome::Pass,
            Verdict::Fail => Outcome::Fail,
            Verdict::Inconclusive => Outcome::Inconclusive,
        }
    }

    fn of_reports(reports: &[PropertyReport]) -> Self {
        if reports.iter().all(PropertyReport::passed) {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Operation {
    pub name: String,
    pub kind: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub reports: Vec<PropertyReport>,
    pub result: Value,
    /// Wall-clock time; shown in the human table only.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub mesh: usize,
    pub tol: f64,
    pub eps: f64,
    pub eta: f64,
    pub seed: u64,
    pub radius_count: usize,
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub format: &'static str,
    pub command: Command,
    pub scenario: String,
    pub digest: String,
    pub config: ConfigEcho,
    pub operations: Vec<Operation>,
    pub outcome: Outcome,
    pub exit_code: i32,
}

impl RunReport {
    pub fn elapsed(&self) -> Duration {
        self.operations.iter().map(|o| o.elapsed).sum()
    }
}

/// Failure of one operation, sorted into the exit-code classes.
#[derive(Debug)]
struct OpError {
    outcome: Outcome,
    message: String,
    reports: Vec<PropertyReport>,
    result: Value,
}

impl OpError {
    fn fail(message: impl Into<String>) -> Self {
        Self { outcome: Outcome::Fail, message: message.into(), reports: Vec::new(), result: Value::Null }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self { outcome: Outcome::Invalid, message: message.into(), reports: Vec::new(), result: Value::Null }
    }
}

impl From<Error> for OpError {
    fn from(e: Error) -> Self {
        let outcome = match &e {
            Error::NonConvergence { .. } | Error::HullIterationCap { .. } => Outcome::Inconclusive,
            Error::WitnessRejected { .. }
            | Error::MissingWitness(_)
            | Error::Precondition(_)
            | Error::SelectionUndefined { .. }
            | Error::WitnessInconsistent { .. } => Outcome::Fail,
            _ => Outcome::Invalid,
        };
        let result = match &e {
            Error::NonConvergence { best, residual } => json!({ "best": best, "residual": residual }),
            _ => Value::Null,
        };
        Self { outcome, message: e.to_string(), reports: Vec::new(), result }
    }
}

impl From<CliError> for OpError {
    fn from(e: CliError) -> Self {
        OpError::invalid(e.to_string())
    }
}

struct Done {
    outcome: Outcome,
    message: Option<String>,
    reports: Vec<PropertyReport>,
    result: Value,
}

impl Done {
    fn reports(reports: Vec<PropertyReport>, result: Value) -> Self {
        Self { outcome: Outcome::of_reports(&reports), message: None, reports, result }
    }
}

/// Effective settings of one operation: overrides, then per-operation knobs, then config.
#[derive(Debug, Clone, Copy)]
struct Settings {
    mesh: usize,
    tol: f64,
    eps: f64,
    eta: f64,
    seed: u64,
}

struct Ctx<'a> {
    sc: &'a Scenario,
    ov: Overrides,
}

impl Ctx<'_> {
    fn settings(&self, k: &Knobs) -> Settings {
        let c = &self.sc.config;
        Settings {
            mesh: self.ov.mesh.or(k.mesh).unwrap_or(c.mesh),
            tol: self.ov.tol.or(k.tol).unwrap_or(c.tol),
            eps: self.ov.eps.or(k.eps).unwrap_or(c.eps),
            eta: self.ov.eta.or(k.eta).unwrap_or(c.eta),
            seed: self.ov.seed.unwrap_or(c.seed),
        }
    }

    fn radii(&self, r: &Option<Vec<f64>>) -> Vec<f64> {
        r.clone().unwrap_or_else(|| default_radii(self.sc.config.radius_count))
    }

    /// WNQ witness by name; a search that finds nothing is a failed operation.
    fn wnq_witness(&self, name: &str, s: &Settings) -> Result<(WnqWitness, Value), OpError> {
        match self.sc.witness(name)? {
            WitnessDecl::Wcg { points, values } => Ok((WnqWitness::identity(points.clone(), values.clone()), Value::Null)),
            WitnessDecl::Wnq { points, values, g } => {
                let e = TableEntry { radius: None, points: points.clone(), values: values.clone(), g: g.clone() };
                Ok((e.witness(), Value::Null))
            }
            WitnessDecl::Search { correspondence, property, points, density, g_family, samples } => {
                let t = self.sc.correspondence(correspondence)?;
                let prop = match property {
                    SearchProperty::Wcg => Property::Wcg,
                    SearchProperty::Wnq => Property::Wnq,
                };
                let out = search_witness_sampled(&t, prop, points, *density, *g_family, *samples, s.seed, Mesh::new(s.mesh)?, s.tol)?;
                let info = json!({ "searched": out.tested, "seed": s.seed });
                match out.witness {
                    Some(Witness::Wcg(w)) => Ok((WnqWitness::identity(w.points, w.values), info)),
                    Some(Witness::Wnq(w)) => Ok((w, info)),
                    None => Err(OpError { result: info, ..OpError::fail(format!("witness search {name:?} found no passing candidate")) }),
                }
            }
            WitnessDecl::Biconvex { .. } | WitnessDecl::Table { .. } => {
                Err(OpError::invalid(format!("witness {name:?} is not a single WCG/WNQ witness")))
            }
        }
    }

    fn witness_table(&self, name: &str, s: &Settings) -> Result<WitnessTable, OpError> {
        match self.sc.witness(name)? {
            WitnessDecl::Table { entries } => Ok(WitnessTable { entries: entries.iter().map(|e| (e.radius, e.witness())).collect() }),
            _ => Ok(WitnessTable { entries: vec![(None, self.wnq_witness(name, s)?.0)] }),
        }
    }
}

fn simplex_domain(t: &Correspondence, name: &str) -> Result<SimplexDomain, OpError> {
    match t.domain() {
        Domain::Simplex(k) => Ok(k.clone()),
        Domain::Product(_) => Err(OpError::invalid(format!("correspondence {name:?} must be defined on a simplex"))),
    }
}

fn witness_json(w: &WnqWitness) -> Value {
    json!({ "points": w.points, "values": w.values, "g": w.g })
}

fn run_check(cx: &Ctx, d: &CheckDecl) -> Result<Done, OpError> {
    let s = cx.settings(&d.knobs);
    let mesh = Mesh::new(s.mesh)?;
    let t = cx.sc.correspondence(&d.correspondence)?;
    if d.property == CheckProperty::WeaklyBiconvex {
        let w = cx.sc.biconvex_witness(&d.witness)?;
        let set = d.set.as_deref().unwrap_or_default();
        let h = cx.sc.hulls.iter().find(|h| h.name == set).ok_or_else(|| OpError::invalid(format!("unknown hull {set:?}")))?;
        let b = hull_sets(cx, h)?.into_iter().next().map(|x| x.1).ok_or_else(|| OpError::invalid("hull declares no sets"))?;
        let rep = check_weakly_biconvex(&t, &b, &w, mesh, s.tol)?;
        return Ok(Done::reports(vec![rep], Value::Null));
    }
    let mut info = Value::Null;
    let rep = match d.property {
        CheckProperty::Wcg | CheckProperty::Wnq => {
            let (w, i) = cx.wnq_witness(&d.witness, &s)?;
            info = json!({ "search": i, "witness": witness_json(&w) });
            if d.property == CheckProperty::Wcg {
                if !w.g.iter().all(|g| g.is_identity()) {
                    return Err(OpError::invalid(format!("{}: WCG check with a reparameterized witness", d.name)));
                }
                check_wcg(&t, &WcgWitness { points: w.points, values: w.values }, mesh, s.tol)?
            } else {
                check_wnq(&t, &w, mesh, s.tol)?
            }
        }
        CheckProperty::StarWcg | CheckProperty::StarWnq => {
            let radii = cx.radii(&d.radii);
            let table = cx.witness_table(&d.witness, &s)?;
            let ws: Vec<WnqWitness> = if table.entries.len() == 1 && table.entries[0].0.is_none() {
                vec![table.entries[0].1.clone()]
            } else {
                use corrfix_core::fixed_point::WitnessProvider;
                radii.iter().map(|&r| table.witness(r).ok_or(Error::MissingWitness(r))).collect::<Result<_, _>>()?
            };
            let prop = if d.property == CheckProperty::StarWcg { Property::Wcg } else { Property::Wnq };
            check_star_variant(&t, prop, &radii, &ws, mesh, s.tol, cx.sc.config.norm)?
        }
        CheckProperty::WeaklyBiconvex => unreachable!(),
    };
    Ok(Done::reports(vec![rep], info))
}

fn vertex_report(pairs: &[(Vec<f64>, Vec<f64>, Vec<f64>)]) -> PropertyReport {
    let mut worst: f64 = 0.0;
    let mut v = Vec::new();
    for (a, fa, b) in pairs {
        let e = fa.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(e);
        if e > VERTEX_TOL {
            v.push(Violation::new(a.clone(), e).with_detail("f(a_i) differs from b_i"));
        }
    }
    PropertyReport::new("vertex_exactness", format!("{} base points, tol={VERTEX_TOL:e}", pairs.len()), pairs.len(), v)
        .with_metric("max_error", worst)
}

fn run_select(cx: &Ctx, d: &SelectionDecl) -> Result<Done, OpError> {
    let s = cx.settings(&d.knobs);
    let mesh = Mesh::new(s.mesh)?;
    let t = cx.sc.correspondence(&d.correspondence)?;
    let (f, info) = match d.kind {
        SelectionKindDecl::Wnq => {
            let k = simplex_domain(&t, &d.correspondence)?;
            let (w, i) = cx.wnq_witness(&d.witness, &s)?;
            (build_wnq_selection(&k, &w)?, json!({ "search": i, "witness": witness_json(&w) }))
        }
        SelectionKindDecl::Biconvex => {
            let w = cx.sc.biconvex_witness(&d.witness)?;
            let (xa, ya) = (d.x_axis.as_ref().expect("validated"), d.y_axis.as_ref().expect("validated"));
            let f = build_biconvex_selection(&w, &xa.build(None)?, &ya.build(None)?)?;
            if let SelectionDomain::Biconvex { hull, .. } = f.domain() {
                let info = json!({ "hull_cells": hull.count() });
                (f, info)
            } else {
                unreachable!("biconvex selection has a biconvex domain")
            }
        }
    };
    let rep = verify_selection(&f, &t, mesh, s.tol)?;
    let base: Vec<Vec<f64>> = f.domain().simplex().vertices().to_vec();
    let pairs = base.iter().zip(f.values()).map(|(a, b)| Ok((a.clone(), f.eval(a)?, b.clone()))).collect::<Result<Vec<_>, Error>>()?;
    Ok(Done::reports(vec![rep, vertex_report(&pairs)], info))
}

fn net_config(cx: &Ctx, s: &Settings) -> NetConfig {
    NetConfig {
        eps: s.eps,
        eta: s.eta,
        h: 1.0 / s.mesh as f64,
        tol: s.tol,
        check_mesh: s.mesh,
        norm: cx.sc.config.norm,
        brouwer: cx.sc.config.brouwer,
    }
}

fn run_fixpoint(cx: &Ctx, d: &FixpointDecl) -> Result<Done, OpError> {
    let s = cx.settings(&d.knobs);
    let brouwer = cx.sc.config.brouwer;
    match &d.body {
        FixpointBody::AffineMap { domain, map, expect } => {
            let k = cx.sc.simplex(domain)?;
            let n = k.ambient_dim();
            if map.matrix.len() != n || map.offset.len() != n || map.matrix.iter().any(|r| r.len() != n) {
                return Err(OpError::invalid(format!("{}: map is not a square affine map on R^{n}", d.name)));
            }
            for v in k.vertices() {
                if !k.contains_point(&map.apply(v), 1e-9) {
                    return Err(OpError::invalid(format!("{}: map sends vertex {v:?} outside the domain", d.name)));
                }
            }
            let f = |x: &[f64]| map.apply(x);
            let r = brouwer_fixed_point(&f, &k, s.eps, &brouwer)?;
            let mut reports = Vec::new();
            if let Some(e) = expect {
                let err = r.x_star.iter().zip(e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let v = if err > EXPECT_TOL {
                    vec![Violation::new(r.x_star.clone(), err).with_detail("far from the expected point")]
                } else {
                    vec![]
                };
                reports.push(PropertyReport::new("expected_point", format!("tol={EXPECT_TOL:e}"), 1, v).with_metric("error", err));
            }
            Ok(Done::reports(reports, serde_json::to_value(&r).expect("serializable")))
        }
        FixpointBody::Selection { correspondence, witness } => {
            let t = cx.sc.correspondence(correspondence)?;
            let k = simplex_domain(&t, correspondence)?;
            let (w, _) = cx.wnq_witness(witness, &s)?;
            let r = solve_wnq_fixed_point(&t, &w, &k, s.eps, Mesh::new(s.mesh)?, s.tol, &brouwer)?;
            let v = if r.defect > s.tol {
                vec![Violation::new(r.result.x_star.clone(), r.defect).with_detail("x* not in T(x*)")]
            } else {
                vec![]
            };
            let rep = PropertyReport::new("fixed_point_membership", format!("tol={:e}", s.tol), 1, v);
            Ok(Done::reports(vec![rep], serde_json::to_value(&r).expect("serializable")))
        }
        FixpointBody::Net { correspondence, witness, radii } => {
            let t = cx.sc.correspondence(correspondence)?;
            let k = simplex_domain(&t, correspondence)?;
            let table = cx.witness_table(witness, &s)?;
            let trace = approx_fixed_point_net(&t, &cx.radii(radii), &table, &k, &net_config(cx, &s))?;
            Ok(Done {
                outcome: Outcome::of_verdict(trace.verdict),
                message: None,
                reports: Vec::new(),
                result: serde_json::to_value(&trace).expect("serializable"),
            })
        }
        FixpointBody::Corollary { s: sn, t: tn, witness, radii } => {
            let sc = cx.sc.correspondence(sn)?;
            let tc = cx.sc.correspondence(tn)?;
            let k = simplex_domain(&sc, sn)?;
            let table = cx.witness_table(witness, &s)?;
            let r = solve_corollary_pair(&sc, &tc, &k, &cx.radii(radii), &table, Mesh::new(s.mesh)?, &net_config(cx, &s))?;
            let outcome = match r.trace.verdict {
                Verdict::Pass if r.defect <= s.tol => Outcome::Pass,
                Verdict::Inconclusive => Outcome::Inconclusive,
                _ => Outcome::Fail,
            };
            Ok(Done { outcome, message: None, reports: Vec::new(), result: serde_json::to_value(&r).expect("serializable") })
        }
    }
}

/// Declared point sets of a hull operation with their grid hulls.
/// Points, their grid hull, and the seed for generated sets.
type HullSet = (Vec<ProductPoint>, BiconvexGridSet, Option<u64>);

fn hull_sets(cx: &Ctx, d: &HullDecl) -> Result<Vec<HullSet>, OpError> {
    let order = cx.ov.mesh.or(d.knobs.mesh);
    let xa = d.x_axis.build(order)?;
    let ya = d.y_axis.build(order)?;
    let sets: Vec<(Vec<ProductPoint>, Option<u64>)> = match (&d.points, &d.random) {
        (Some(p), _) => vec![(p.clone(), None)],
        (None, Some(r)) => {
            let base = cx.ov.seed.or(r.seed).unwrap_or(cx.sc.config.seed);
            (0..r.sets as u64).map(|i| (random_points(r.count, &xa, &ya, base + i), Some(base + i))).collect()
        }
        (None, None) => unreachable!("validated"),
    };
    sets.into_iter().map(|(p, seed)| Ok((p.clone(), biconvex_hull(&p, &xa, &ya)?, seed))).collect()
}

fn run_hull(cx: &Ctx, d: &HullDecl) -> Result<Done, OpError> {
    let sets = hull_sets(cx, d)?;
    let (xa, ya) = (sets[0].1.x_axis().clone(), sets[0].1.y_axis().clone());
    let mut reports = Vec::new();
    let mut out = Vec::new();
    for (points, hull, seed) in &sets {
        let biconvex = is_biconvex_set(hull);
        let idempotent = &biconvex_hull(&hull.cells(), &xa, &ya)? == hull;
        let mut v = Vec::new();
        if !biconvex {
            v.push(Violation::new(vec![], 1.0).with_detail("hull has a nonconvex section"));
        }
        if !idempotent {
            v.push(Violation::new(vec![], 1.0).with_detail("hull of the hull differs"));
        }
        reports.push(PropertyReport::new("hull_closure", format!("{} cells", hull.count()), 2, v));
        reports.push(hull_subset_convex(points, &xa, &ya)?);
        out.push(json!({
            "seed": seed,
            "points": points,
            "cells": hull.count(),
            "rows": hull.rle_rows(),
        }));
    }
    let result = json!({
        "x_axis": { "order": xa.order(), "dim": xa.dim() },
        "y_axis": { "order": ya.order(), "dim": ya.dim() },
        "sets": out,
    });
    Ok(Done::reports(reports, result))
}

fn run_game(cx: &Ctx, d: &GameDecl) -> Result<Done, OpError> {
    let s = cx.settings(&d.knobs);
    let defaults = EquilibriumConfig::default();
    let game = cx.sc.game(&d.name)?;
    let cfg = EquilibriumConfig {
        mesh: s.mesh,
        check_mesh: d.check_mesh.unwrap_or(defaults.check_mesh),
        eps: s.eps,
        eta: s.eta,
        tol: s.tol,
        refine_rounds: d.refine_rounds.unwrap_or(defaults.refine_rounds),
    };
    let variant = match d.variant {
        VariantDecl::Simplex => Variant::Simplex,
        VariantDecl::Biconvex => Variant::Biconvex,
    };
    match solve_equilibrium(&game, variant, &cfg)? {
        EquilibriumOutcome::Certified(c) => {
            let rep = c.verify(&game)?;
            Ok(Done::reports(vec![rep], json!({ "certificate": c })))
        }
        EquilibriumOutcome::ScenarioFault { reason, report, point } => Ok(Done {
            outcome: Outcome::Fail,
            message: Some(format!("scenario fault: {reason}")),
            reports: vec![report],
            result: json!({ "fault": reason, "point": point }),
        }),
        EquilibriumOutcome::Inconclusive { best, merit } => Ok(Done {
            outcome: Outcome::Inconclusive,
            message: Some(format!("no point with merit <= eps; best merit {merit:e}")),
            reports: Vec::new(),
            result: json!({ "best": best, "merit": merit }),
        }),
    }
}

fn operation(name: &str, kind: &str, f: impl FnOnce() -> Result<Done, OpError>) -> Operation {
    let start = Instant::now();
    let r = f();
    let elapsed = start.elapsed();
    match r {
        Ok(d) => Operation {
            name: name.into(),
            kind: kind.into(),
            outcome: d.outcome,
            message: d.message,
            reports: d.reports,
            result: d.result,
            elapsed,
        },
        Err(e) => Operation {
            name: name.into(),
            kind: kind.into(),
            outcome: e.outcome,
            message: Some(e.message),
            reports: e.reports,
            result: e.result,
            elapsed,
        },
    }
}

fn check_kind(p: CheckProperty) -> &'static str {
    match p {
        CheckProperty::Wcg => "wcg",
        CheckProperty::Wnq => "wnq",
        CheckProperty::StarWcg => "star_wcg",
        CheckProperty::StarWnq => "star_wnq",
        CheckProperty::WeaklyBiconvex => "weakly_biconvex",
    }
}

pub fn digest(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    let hex: String = d.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Runs every declaration of the command's section.
pub fn run_scenario(sc: &Scenario, bytes: &[u8], command: Command, ov: Overrides) -> Result<RunReport, CliError> {
    check_knobs(&Knobs { mesh: ov.mesh, tol: ov.tol, eps: ov.eps, eta: ov.eta }, "override")?;
    if sc.section_len(command) == 0 {
        return Err(CliError::Invalid(format!("scenario declares no {} for `{command}`", command.section())));
    }
    let cx = Ctx { sc, ov };
    let ops: Vec<Operation> = match command {
        Command::Check => sc.checks.iter().map(|d| operation(&d.name, check_kind(d.property), || run_check(&cx, d))).collect(),
        Command::Select => sc
            .selections
            .iter()
            .map(|d| {
                operation(&d.name, if d.kind == SelectionKindDecl::Wnq { "wnq_selection" } else { "biconvex_selection" }, || {
                    run_select(&cx, d)
                })
            })
            .collect(),
        Command::Fixpoint => sc
            .fixpoints
            .iter()
            .map(|d| {
                let kind = match d.body {
                    FixpointBody::AffineMap { .. } => "brouwer",
                    FixpointBody::Selection { .. } => "selection_fixed_point",
                    FixpointBody::Net { .. } => "approx_net",
                    FixpointBody::Corollary { .. } => "corollary",
                };
                operation(&d.name, kind, || run_fixpoint(&cx, d))
            })
            .collect(),
        Command::Hull => sc.hulls.iter().map(|d| operation(&d.name, "biconvex_hull", || run_hull(&cx, d))).collect(),
        Command::Equilibrium => sc.games.iter().map(|d| operation(&d.name, "equilibrium", || run_game(&cx, d))).collect(),
    };
    let outcome = overall(&ops);
    let c = &sc.config;
    Ok(RunReport {
        format: REPORT_FORMAT,
        command,
        scenario: sc.name.clone(),
        digest: digest(bytes),
        config: ConfigEcho {
            mesh: ov.mesh.unwrap_or(c.mesh),
            tol: ov.tol.unwrap_or(c.tol),
            eps: ov.eps.unwrap_or(c.eps),
            eta: ov.eta.unwrap_or(c.eta),
            seed: ov.seed.unwrap_or(c.seed),
            radius_count: c.radius_count,
            overrides: ov,
        },
        operations: ops,
        outcome,
        exit_code: outcome.exit_code(),
    })
}

/// Invalid dominates, then failure, then inconclusive.
fn overall(ops: &[Operation]) -> Outcome {
    ops.iter().map(|o| o.outcome).max().unwrap_or(Outcome::Pass)
}
