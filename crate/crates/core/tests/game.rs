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

use corrfix_core::classes::WnqWitness;
use corrfix_core::correspondence::{AffineMap, Correspondence, CorrespondenceSpec, Domain, HalfSpace, Piece, Region};
use corrfix_core::game::*;
use corrfix_core::simplex::{Mesh, SimplexDomain};
use corrfix_core::PolytopeSet;

fn unit() -> SimplexDomain {
    SimplexDomain::new(vec![vec![0.0], vec![1.0]]).unwrap()
}

fn z_domain() -> Domain {
    Domain::Product(vec![unit(), unit(), unit(), unit()])
}

fn affine(row: [f64; 4], b: f64) -> AffineMap {
    AffineMap { matrix: vec![row.to_vec()], offset: vec![b] }
}

fn interval(lo: AffineMap, hi: AffineMap) -> CorrespondenceSpec {
    CorrespondenceSpec::AffineVertices { maps: vec![lo, hi] }
}

fn point(v: f64) -> CorrespondenceSpec {
    CorrespondenceSpec::Constant { vertices: vec![vec![v]] }
}

fn strict(normal: [f64; 4], offset: f64) -> HalfSpace {
    HalfSpace { normal: normal.to_vec(), offset, strict: true }
}

/// Open simplex `{w > 0, Σw < 1}` in the coordinates `w = s ⊙ z + t`.
fn corner(s: [f64; 4], t: [f64; 4]) -> Region {
    let mut c = Vec::new();
    for k in 0..4 {
        let mut n = [0.0; 4];
        n[k] = -s[k];
        c.push(strict(n, t[k]));
    }
    c.push(strict(s, 1.0 - t.iter().sum::<f64>()));
    Region { constraints: c }
}

fn closure(s: [f64; 4], t: [f64; 4]) -> SimplexDomain {
    // w -> z inverse of the coordinate change
    let to_z = |w: [f64; 4]| (0..4).map(|k| (w[k] - t[k]) / s[k]).collect::<Vec<f64>>();
    let mut v = vec![to_z([0.0; 4])];
    for k in 0..4 {
        let mut w = [0.0; 4];
        w[k] = 1.0;
        v.push(to_z(w));
    }
    SimplexDomain::new(v).unwrap()
}

fn corr(spec: CorrespondenceSpec) -> Correspondence {
    Correspondence::from_spec(z_domain(), PolytopeSet::interval(0.0, 1.0), spec).unwrap()
}

const W1: ([f64; 4], [f64; 4]) = ([1.0, 1.0, 1.0, 1.0], [0.0; 4]);
const W2: ([f64; 4], [f64; 4]) = ([-1.0, 1.0, 1.0, 1.0], [1.0, 0.0, 0.0, 0.0]);

fn agent(own: usize, other: usize, w: ([f64; 4], [f64; 4]), p_inside: CorrespondenceSpec, sel: Vec<Vec<f64>>) -> Agent {
    let mut half = [0.0; 4];
    half[other] = 0.5;
    let b = interval(affine(half, 0.0), affine([0.0; 4], 1.0));
    let a = CorrespondenceSpec::PiecewiseRegion {
        pieces: vec![Piece { region: corner(w.0, w.1), value: b.clone() }],
        otherwise: Some(Box::new(interval(affine(half, 0.0), affine([0.0; 4], 0.9)))),
    };
    let p = CorrespondenceSpec::PiecewiseRegion {
        pieces: vec![Piece { region: corner(w.0, w.1), value: p_inside }],
        otherwise: Some(Box::new(point(1.0))),
    };
    let k = closure(w.0, w.1);
    let _ = own;
    Agent {
        strategy: unit(),
        a: corr(a),
        b: corr(b),
        p: corr(p),
        region: RegionDecl::Simplex { witness: WnqWitness::identity(k.vertices().to_vec(), sel), closure: k },
    }
}

fn two_agent() -> QuasiGame {
    QuasiGame::new(vec![agent(0, 1, W1, point(1.0), vec![vec![1.0]; 5]), agent(1, 0, W2, point(1.0), vec![vec![1.0]; 5])]).unwrap()
}

fn in_corner(z: &[f64], w: ([f64; 4], [f64; 4])) -> bool {
    let c: Vec<f64> = (0..4).map(|k| w.0[k] * z[k] + w.1[k]).collect();
    c.iter().all(|&v| v > 0.0) && c.iter().sum::<f64>() < 1.0
}

/// Closed-form equilibrium test for the two-agent fixture.
fn oracle_equilibrium(z: &[f64], eta: f64) -> bool {
    !in_corner(z, W1) && !in_corner(z, W2) && z[2] >= z[1] / 2.0 - eta && z[3] >= z[0] / 2.0 - eta
}

/// Exact version of `in_corner` on lattice points `z = c / m`.
fn in_corner_lattice(c: &[i64], m: i64, w: ([f64; 4], [f64; 4])) -> bool {
    let v: Vec<i64> = (0..4).map(|k| w.0[k] as i64 * c[k] + w.1[k] as i64 * m).collect();
    v.iter().all(|&x| x > 0) && v.iter().sum::<i64>() < m
}

#[test]
fn wi_matches_brute_force() {
    let g = two_agent();
    let mesh = Mesh::new(6).unwrap();
    let grid = g.z_grid(mesh);
    for (i, w) in [W1, W2].into_iter().enumerate() {
        let r = compute_wi(&g, i, mesh).unwrap();
        for (k, n) in grid.nodes.iter().enumerate() {
            // second barycentric count of each unit-interval factor is the coordinate numerator
            let c: Vec<i64> = (0..4).map(|f| n.index[2 * f + 1] as i64).collect();
            assert_eq!(r.indicator[k], in_corner_lattice(&c, 6, w), "agent {i} at {:?}", n.point);
        }
        assert!(r.mismatches.is_empty());
        assert!(r.count() > 0 && r.count() < grid.len());
    }
}

#[test]
fn certificate_for_two_agent_fixture() {
    let g = two_agent();
    let out = solve_equilibrium(&g, Variant::Simplex, &EquilibriumConfig::default()).unwrap();
    let EquilibriumOutcome::Certified(c) = out else { panic!("{out:?}") };
    let z = c.z();
    assert!(oracle_equilibrium(&z, 1e-9));
    assert!(c.agents.iter().all(|a| matches!(a.token, EmptinessToken::Hyperplane(_))));
    assert!(c.verify(&g).unwrap().passed());
    // push y_1 below B_1 by 10 eta
    let mut y = c.y.clone();
    y[0] = (c.x[1] / 2.0 - 10.0 * c.eta).max(0.0);
    if y[0] < c.x[1] / 2.0 - c.eta {
        assert!(!verify_equilibrium(&g, &c.x, &y, c.eta).unwrap().passed());
    }
}

#[test]
fn reflexive_preference_is_a_fault() {
    let k = closure(W1.0, W1.1);
    let x1: Vec<Vec<f64>> = k.vertices().iter().map(|v| vec![v[0]]).collect();
    let mut bad = agent(0, 1, W1, CorrespondenceSpec::Constant { vertices: vec![vec![0.0], vec![1.0]] }, x1);
    bad.a = corr(CorrespondenceSpec::PiecewiseRegion {
        pieces: vec![Piece { region: corner(W1.0, W1.1), value: CorrespondenceSpec::Constant { vertices: vec![vec![0.0], vec![1.0]] } }],
        otherwise: Some(Box::new(interval(affine([0.0, 0.5, 0.0, 0.0], 0.0), affine([0.0; 4], 0.9)))),
    });
    bad.b = corr(CorrespondenceSpec::Constant { vertices: vec![vec![0.0], vec![1.0]] });
    let g = QuasiGame::new(vec![bad, agent(1, 0, W2, point(1.0), vec![vec![1.0]; 5])]).unwrap();
    let out = solve_equilibrium(&g, Variant::Simplex, &EquilibriumConfig::default()).unwrap();
    match out {
        EquilibriumOutcome::ScenarioFault { reason, report, .. } => {
            assert!(reason.contains("irreflexive"), "{reason}");
            assert!(!report.passed());
        }
        o => panic!("{o:?}"),
    }
}

#[test]
fn empty_preferences_certify_immediately() {
    let mk = |b: f64| Agent {
        strategy: unit(),
        a: corr(point(b)),
        b: corr(point(b)),
        p: corr(CorrespondenceSpec::Constant { vertices: vec![] }),
        region: RegionDecl::Empty,
    };
    let g = QuasiGame::new(vec![mk(0.25), mk(0.75)]).unwrap();
    let out = solve_equilibrium(&g, Variant::Simplex, &EquilibriumConfig::default()).unwrap();
    let EquilibriumOutcome::Certified(c) = out else { panic!("{out:?}") };
    assert_eq!(c.y, vec![0.25, 0.75]);
    assert!(c.agents.iter().all(|a| a.token == EmptinessToken::EmptyP));
    assert!(c.verify(&g).unwrap().passed());
}

#[test]
fn containment_violation_listed() {
    let mut ag = agent(0, 1, W1, point(1.0), vec![vec![1.0]; 5]);
    ag.b = corr(interval(affine([0.0; 4], 0.2), affine([0.0; 4], 0.8)));
    let g = QuasiGame::new(vec![ag, agent(1, 0, W2, point(1.0), vec![vec![1.0]; 5])]).unwrap();
    let c = check_conditions(&g, Variant::Simplex, Mesh::new(4).unwrap(), 1e-9).unwrap();
    assert!(!c.containment.passed());
    assert!(c.containment.violations[0].detail.contains("A vertex"));
}
