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

//! Acceptance criteria: one line per criterion, nonzero exit if any fails.

mod oracle;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command as Proc;
use std::time::{Duration, Instant};

use corrfix_cli::{run_scenario, Command, Outcome, Overrides, RunReport, Scenario};
use corrfix_core::classes::{check_wcg, check_wnq, WcgWitness, WnqWitness};
use corrfix_core::game::{EmptinessToken, EquilibriumCertificate};
use corrfix_core::selection::build_wnq_selection;
use corrfix_core::Mesh;
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn load(name: &str) -> (Scenario, Vec<u8>) {
    Scenario::load(&fixtures_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn run(name: &str, command: Command) -> (Scenario, RunReport) {
    let (sc, bytes) = load(name);
    let r = run_scenario(&sc, &bytes, command, Overrides::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
    (sc, r)
}

fn op<'a>(r: &'a RunReport, name: &str) -> &'a corrfix_cli::Operation {
    r.operations.iter().find(|o| o.name == name).unwrap_or_else(|| panic!("no operation {name}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Duration, limit: f64) -> Result<(), String> {
    ensure(t.as_secs_f64() < limit, || format!("took {:.2}s, limit {limit}s", t.as_secs_f64()))
}

fn inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn vec_of(v: &Value) -> Vec<f64> {
    v.as_array().expect("array").iter().map(|x| x.as_f64().expect("number")).collect()
}

/// Selection on the 2-simplex at mesh 1/64.
fn wnq_selection() -> Check {
    let start = Instant::now();
    let (sc, r) = run("delta2_wnq.json", Command::Select);
    let o = op(&r, "selection");
    ensure(o.outcome == Outcome::Pass, || format!("outcome {:?}", o.outcome))?;
    let verify = &o.reports[0];
    let vx = &o.reports[1];
    ensure(r.config.mesh == 64 && r.config.tol == 1e-9, || format!("mesh 1/{} tol {}", r.config.mesh, r.config.tol))?;
    ensure(verify.passed() && verify.tested == 2145, || format!("selection check tested {}", verify.tested))?;
    let vmax = vx.metrics["max_error"];
    ensure(vx.passed() && vmax <= 1e-12, || format!("vertex error {vmax:e}"))?;
    // independent reference: f(x) = sum x_i b_i must lie in the hull of the declared T(x)
    let k = sc.simplex("K").unwrap();
    let w = WnqWitness::identity(k.vertices().to_vec(), vec![vec![0.1, 0.1], vec![0.8, 0.2], vec![0.3, 0.9]]);
    let f = build_wnq_selection(&k, &w).unwrap();
    let mut worst: f64 = 0.0;
    let mut worst_lin: f64 = 0.0;
    let mats = direct_maps();
    for x in oracle::compositions(3, 64) {
        let y = f.eval(&x).unwrap();
        worst_lin = worst_lin.max(inf(&y, &oracle::combine(&x, &w.values)));
        let verts: Vec<Vec<f64>> =
            mats.iter().map(|m| m.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect()).collect();
        worst = worst.max(oracle::hull_dist(&y, &verts));
    }
    ensure(worst <= 1e-9, || format!("reference distance {worst:e}"))?;
    ensure(worst_lin <= 1e-12, || format!("reference selection error {worst_lin:e}"))?;
    let el = start.elapsed();
    within(el, 5.0)?;
    Ok(format!("tested={} vertex_error={vmax:.1e} reference_dist={worst:.1e} time={:.2}s", verify.tested, el.as_secs_f64()))
}

/// The fixture's three vertex maps, written out directly.
fn direct_maps() -> Vec<[[f64; 3]; 2]> {
    let b = [[0.1, 0.1], [0.8, 0.2], [0.3, 0.9]];
    let mk = |dx: [f64; 3], dy: [f64; 3]| {
        [[b[0][0] + dx[0], b[1][0] + dx[1], b[2][0] + dx[2]], [b[0][1] + dy[0], b[1][1] + dy[1], b[2][1] + dy[2]]]
    };
    vec![mk([0.0; 3], [0.0; 3]), mk([0.0, 0.1, 0.0], [0.05; 3]), mk([-0.05; 3], [0.1, 0.0, 0.0])]
}

/// Brouwer solver on affine self-maps of the 2-simplex.
fn brouwer_maps() -> Check {
    let start = Instant::now();
    let (sc, r) = run("identity_selection.json", Command::Fixpoint);
    let c = 1.0 / 3.0;
    let analytic: [(&str, Option<[f64; 3]>); 5] = [
        ("identity_map", None),
        ("constant_map", Some([0.2, 0.3, 0.5])),
        ("contraction_to_centroid", Some([c, c, c])),
        ("off_centre_contraction", Some([0.6, 0.3, 0.1])),
        ("cyclic_permutation", Some([c, c, c])),
    ];
    let mut worst_res: f64 = 0.0;
    let mut worst_err: f64 = 0.0;
    for (name, expect) in analytic {
        let o = op(&r, name);
        ensure(o.outcome == Outcome::Pass, || format!("{name}: {:?} {:?}", o.outcome, o.message))?;
        let x = vec_of(&o.result["x_star"]);
        let decl = sc.fixpoints.iter().find(|d| d.name == name).unwrap();
        let map = match &decl.body {
            corrfix_cli::scenario::FixpointBody::AffineMap { map, .. } => map,
            _ => unreachable!(),
        };
        let fx: Vec<f64> = (0..3).map(|i| map.offset[i] + (0..3).map(|j| map.matrix[i][j] * x[j]).sum::<f64>()).collect();
        let res = inf(&fx, &x);
        ensure(res <= 1e-6, || format!("{name}: residual {res:e}"))?;
        worst_res = worst_res.max(res);
        if let Some(e) = expect {
            let err = inf(&x, &e);
            ensure(err <= 1e-4, || format!("{name}: distance to analytic point {err:e}"))?;
            worst_err = worst_err.max(err);
        }
    }
    let sel = op(&r, "identity_selection");
    // T(x) = {x}: the selection is the identity up to barycentric rounding
    let sres = sel.result["result"]["residual"].as_f64().unwrap();
    let sdef = sel.result["defect"].as_f64().unwrap();
    ensure(sres <= 1e-15 && sdef == 0.0, || format!("identity selection residual {sres:e} defect {sdef:e}"))?;
    let el = start.elapsed();
    within(el, 30.0)?;
    Ok(format!("maps=5 max_residual={worst_res:.1e} max_error={worst_err:.1e} time={:.2}s", el.as_secs_f64()))
}

/// Approximate fixed-point net for the jump correspondence.
fn jump_net() -> Check {
    let start = Instant::now();
    let (_, r) = run("jump_net.json", Command::Fixpoint);
    let o = op(&r, "net");
    ensure(o.outcome == Outcome::Pass, || format!("outcome {:?}", o.outcome))?;
    let steps = o.result["steps"].as_array().unwrap();
    let radii: Vec<f64> = steps.iter().map(|s| s["radius"].as_f64().unwrap()).collect();
    let want: Vec<f64> = (1..=10).map(|k| 0.5f64.powi(k)).collect();
    ensure(radii == want, || format!("radii {radii:?}"))?;
    let defect = steps.iter().map(|s| s["defect"].as_f64().unwrap()).fold(0.0, f64::max);
    ensure(defect <= 1e-9, || format!("defect {defect:e}"))?;
    let diam = o.result["cluster_diameter"].as_f64().unwrap();
    ensure(diam <= 1e-2, || format!("cluster diameter {diam:e}"))?;
    ensure(o.result["certificate"] == Value::Bool(true) && o.result["eta"].as_f64() == Some(0.05), || "closure membership".into())?;
    // reference: the graph of the jump is closed at the cluster point, so x in T(x) there
    let x = vec_of(&o.result["cluster"])[0];
    let tx = if x <= 0.5 { 0.0 } else { 1.0 };
    ensure((tx - x).abs() <= 0.05, || format!("cluster {x} not near T({x}) = {tx}"))?;
    let el = start.elapsed();
    within(el, 60.0)?;
    Ok(format!("radii=10 max_defect={defect:.1e} cluster_diameter={diam:.1e} cluster={x} time={:.2}s", el.as_secs_f64()))
}

/// Class checkers against grid brute force.
fn classes() -> Check {
    let start = Instant::now();
    let m = 32;
    let mesh = Mesh::new(m).unwrap();
    let fx = oracle::fixtures();
    let (mut pass, mut fail) = (0, 0);
    for f in &fx {
        ensure(f.domain.vertex_count() <= 3, || format!("{}: n > 3", f.name))?;
        let t = f.correspondence();
        let wcg = check_wcg(&t, &WcgWitness { points: f.witness.points.clone(), values: f.witness.values.clone() }, mesh, 1e-9).unwrap();
        let wnq = check_wnq(&t, &f.witness, mesh, 1e-9).unwrap();
        ensure(wcg.passed() == f.passes(m, 1e-9, false), || format!("{}: wcg verdict differs", f.name))?;
        ensure(wnq.passed() == f.passes(m, 1e-9, true), || format!("{}: wnq verdict differs", f.name))?;
        if wcg.passed() {
            let id = WnqWitness::identity(f.witness.points.clone(), f.witness.values.clone());
            ensure(check_wnq(&t, &id, mesh, 1e-9).unwrap().passed(), || format!("{}: wcg pass without wnq pass", f.name))?;
            pass += 1;
        } else {
            fail += 1;
        }
    }
    ensure(fx.len() >= 10, || "fewer than 10 fixtures".into())?;
    Ok(format!("fixtures={} wcg_pass={pass} wcg_fail={fail} time={:.2}s", fx.len(), start.elapsed().as_secs_f64()))
}

/// Biconvex hulls at order 64.
fn hulls() -> Check {
    let start = Instant::now();
    let (_, r) = run("l_shape.json", Command::Hull);
    let l = op(&r, "l_shape");
    ensure(l.outcome == Outcome::Pass, || format!("l_shape {:?}", l.outcome))?;
    let m = l.result["x_axis"]["order"].as_i64().unwrap();
    ensure(m == 64, || format!("order {m}"))?;
    let cells = |set: &Value| -> BTreeSet<(i64, i64)> {
        let mut out = BTreeSet::new();
        // one row per x index, runs of [start, len] over y indices
        for (ix, row) in set["rows"].as_array().unwrap().iter().enumerate() {
            for run in row.as_array().unwrap() {
                let (a, n) = (run[0].as_i64().unwrap(), run[1].as_i64().unwrap());
                out.extend((a..a + n).map(|iy| (ix as i64, iy)));
            }
        }
        out
    };
    let got = cells(&l.result["sets"][0]);
    let want = oracle::lattice_closure(&[(0, 0), (m, 0), (0, m)].into_iter().collect(), m);
    ensure(got == want, || format!("hull has {} cells, reference {}", got.len(), want.len()))?;
    let closure = &l.reports[0];
    ensure(closure.passed(), || "l_shape not biconvex or not idempotent".into())?;
    let rnd = op(&r, "random_sets");
    let sets = rnd.result["sets"].as_array().unwrap();
    ensure(sets.len() == 20, || format!("{} random sets", sets.len()))?;
    let mut subset_violations = 0;
    let mut mismatched = 0;
    for (i, s) in sets.iter().enumerate() {
        subset_violations += rnd.reports[2 * i + 1].violations.len();
        ensure(rnd.reports[2 * i + 1].property == "hull_subset_convex", || "report order".into())?;
        let seed: BTreeSet<(i64, i64)> = s["points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| ((p["x"][0].as_f64().unwrap() * 64.0).round() as i64, (p["y"][0].as_f64().unwrap() * 64.0).round() as i64))
            .collect();
        if cells(s) != oracle::lattice_closure(&seed, m) {
            mismatched += 1;
        }
    }
    ensure(subset_violations == 0, || format!("{subset_violations} hull_subset_convex violations"))?;
    ensure(mismatched == 0, || format!("{mismatched} random hulls differ from the reference"))?;
    ensure(rnd.outcome == Outcome::Pass, || format!("random_sets {:?}", rnd.outcome))?;
    Ok(format!("l_shape_cells={} random_sets=20 subset_violations=0 time={:.2}s", got.len(), start.elapsed().as_secs_f64()))
}

/// Quasi-game certificates, immediate emptiness and the scenario fault.
fn games() -> Check {
    let start = Instant::now();
    let (sc, r) = run("game_two_agent.json", Command::Equilibrium);
    let o = op(&r, "game_two_agent");
    ensure(o.outcome == Outcome::Pass, || format!("two_agent {:?} {:?}", o.outcome, o.message))?;
    let cert: EquilibriumCertificate = serde_json::from_value(o.result["certificate"].clone()).unwrap();
    let z = cert.z();
    ensure(oracle::two_agent_equilibrium(&z, 1e-2), || format!("certificate {z:?} outside the reference set"))?;
    ensure(cert.agents.iter().all(|a| matches!(a.token, EmptinessToken::Hyperplane(_))), || "tokens".into())?;
    // round trip through the structured report, then re-verify against a freshly built game
    let text = serde_json::to_string(&cert).unwrap();
    let back: EquilibriumCertificate = serde_json::from_str(&text).unwrap();
    ensure(back == cert, || "certificate round trip differs".into())?;
    ensure(back.verify(&sc.game("game_two_agent").unwrap()).unwrap().passed(), || "certificate does not verify".into())?;
    let t_empty = Instant::now();
    let (_, e) = run("game_empty_p.json", Command::Equilibrium);
    let t_empty = t_empty.elapsed();
    let eo = op(&e, "game_empty_p");
    let ec: EquilibriumCertificate = serde_json::from_value(eo.result["certificate"].clone()).unwrap();
    ensure(eo.outcome == Outcome::Pass && ec.agents.iter().all(|a| a.token == EmptinessToken::EmptyP), || "empty P".into())?;
    ensure(t_empty.as_secs_f64() < 1.0, || format!("empty P took {:.2}s", t_empty.as_secs_f64()))?;
    let (_, f) = run("game_reflexive.json", Command::Equilibrium);
    let fo = op(&f, "game_reflexive");
    ensure(
        fo.outcome == Outcome::Fail && fo.result["fault"].as_str().is_some_and(|s| s.contains("irreflexive")) && f.exit_code == 1,
        || format!("condition fixture: {:?} {:?}", fo.outcome, fo.message),
    )?;
    let el = start.elapsed();
    within(el, 120.0)?;
    Ok(format!("z={z:?} merit={:.1e} empty_p={:.3}s fault=irreflexive time={:.2}s", cert.merit, t_empty.as_secs_f64(), el.as_secs_f64()))
}

/// Every command twice on every fixture, structured output compared byte for byte.
fn determinism() -> Check {
    let start = Instant::now();
    let dir = fixtures_dir();
    let expected: serde_json::Map<String, Value> =
        serde_json::from_str(&std::fs::read_to_string(dir.join("expected.json")).unwrap()).unwrap();
    let tmp = std::env::temp_dir().join(format!("corrfix-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let mut runs = 0;
    for (file, cmds) in &expected {
        for (cmd, code) in cmds.as_object().unwrap() {
            let mut outs = Vec::new();
            for k in 0..2 {
                let out = tmp.join(format!("{k}.json"));
                let _ = std::fs::remove_file(&out);
                let p = Proc::new(env!("CARGO_BIN_EXE_corrfix"))
                    .args([cmd.as_str(), dir.join(file).to_str().unwrap(), "--format", "structured", "--out", out.to_str().unwrap()])
                    .output()
                    .unwrap();
                ensure(p.status.code() == code.as_i64().map(|c| c as i32), || {
                    format!("{file} {cmd}: exit {:?}, want {code}", p.status.code())
                })?;
                outs.push((p.stdout, std::fs::read(&out).ok()));
                runs += 1;
            }
            ensure(outs[0] == outs[1], || format!("{file} {cmd}: reports differ between runs"))?;
        }
    }
    let _ = std::fs::remove_dir_all(&tmp);
    Ok(format!("runs={runs} time={:.2}s", start.elapsed().as_secs_f64()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("wnq_selection_delta2", wnq_selection),
        ("brouwer_affine_maps", brouwer_maps),
        ("jump_net_closure", jump_net),
        ("class_checkers_vs_brute_force", classes),
        ("biconvex_hulls", hulls),
        ("quasi_game_certificates", games),
        ("cli_determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let r = std::panic::catch_unwind(f).unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>())));
        match r {
            Ok(msg) => println!("criterion {} {name}: PASS {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} {name}: FAIL {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
