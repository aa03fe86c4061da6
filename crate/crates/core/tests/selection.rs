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

mod common;

use common::*;
use corrfix_core::biconvex::{GridAxis, ProductPoint};
use corrfix_core::classes::{check_wnq, BiconvexWitness, PlMap, WnqWitness};
use corrfix_core::correspondence::{Correspondence, Domain};
use corrfix_core::selection::*;
use corrfix_core::{Error, Mesh, PolytopeSet};

#[test]
fn delta2_selection_verified_at_mesh_64() {
    let t = delta2_correspondence();
    let w = delta2_witness();
    assert!(check_wnq(&t, &w, Mesh::new(32).unwrap(), 1e-9).unwrap().passed());
    let f = build_wnq_selection(&delta2(), &w).unwrap();
    let rep = verify_selection(&f, &t, Mesh::new(64).unwrap(), 1e-9).unwrap();
    assert!(rep.passed(), "{:?}", rep.violations.first());
    assert_eq!(rep.tested, 65 * 66 / 2);
    for (a, b) in delta2().vertices().iter().zip(DELTA2_VALUES) {
        assert!(inf_dist(&f.eval(a).unwrap(), &b) <= 1e-12);
    }
    // linear in the coordinates: the quotient along e_a - e_b is |b_a - b_b| / sqrt 2
    let mut lip: f64 = 0.0;
    for a in &DELTA2_VALUES {
        for c in &DELTA2_VALUES {
            let d = ((a[0] - c[0]).powi(2) + (a[1] - c[1]).powi(2)).sqrt();
            lip = lip.max(d / 2f64.sqrt());
        }
    }
    assert!((rep.metrics["lipschitz"] - lip).abs() < 1e-9);
}

#[test]
fn centroid_value() {
    let f = build_wnq_selection(&delta2(), &delta2_witness()).unwrap();
    let c = delta2().centroid();
    let expected: Vec<f64> = (0..2).map(|j| DELTA2_VALUES.iter().map(|b| b[j]).sum::<f64>() / 3.0).collect();
    assert!(inf_dist(&f.eval(&c).unwrap(), &expected) < 1e-12);
}

#[test]
fn reparameterized_selection_follows_curve() {
    let g = PlMap::power(2.0, 64).unwrap();
    let w = WnqWitness { points: vec![vec![0.0], vec![1.0]], values: vec![vec![0.0], vec![1.0]], g: vec![g.conjugate(), g.clone()] };
    let t =
        Correspondence::new(Domain::Simplex(unit()), PolytopeSet::interval(0.0, 1.0), |x: &[f64]| PolytopeSet::point(vec![x[0] * x[0]]));
    let f = build_wnq_selection(&unit(), &w).unwrap();
    let rep = verify_selection(&f, &t, Mesh::new(64).unwrap(), 1e-9).unwrap();
    assert!(rep.passed());
    assert!((rep.metrics["max_g_slope"] - g.max_slope()).abs() < 1e-12);
    assert!(rep.metrics["lipschitz"] > 1.9);
    // at non-knot points the interpolant stays within the chord error h^2 / 4
    assert!((f.eval(&[0.3]).unwrap()[0] - 0.09).abs() <= 1.0 / (4.0 * 64.0 * 64.0));
}

#[test]
fn misaligned_witness_rejected() {
    let mut w = delta2_witness();
    w.points.swap(0, 1);
    assert!(matches!(build_wnq_selection(&delta2(), &w), Err(Error::InvalidWitness(_))));
}

#[test]
fn biconvex_selection_on_l_shape() {
    let pairs =
        vec![ProductPoint::new(vec![0.0], vec![0.0]), ProductPoint::new(vec![1.0], vec![0.0]), ProductPoint::new(vec![0.0], vec![1.0])];
    let values = vec![vec![0.0], vec![0.5], vec![1.0]];
    let a = GridAxis::unit(1, 16).unwrap();
    let f = build_biconvex_selection(&BiconvexWitness { pairs: pairs.clone(), values }, &a, &a).unwrap();
    assert_eq!(f.kind(), SelectionKind::Biconvex);
    // f(x, y) = x / 2 + y on the grid L-shape
    let t = Correspondence::new(Domain::Simplex(tri()), PolytopeSet::interval(0.0, 1.0), |z: &[f64]| {
        PolytopeSet::point(vec![z[0] / 2.0 + z[1]])
    });
    let rep = verify_selection(&f, &t, Mesh::new(16).unwrap(), 1e-9).unwrap();
    assert!(rep.passed());
    assert_eq!(rep.tested, 33);
    assert!(f.in_domain(&[0.5, 0.0]));
    assert!(!f.in_domain(&[0.25, 0.25]));
    assert!(matches!(f.eval(&[0.25, 0.25]), Err(Error::OutsideDomain { .. })));
}

#[test]
fn dependent_pairs_rejected() {
    let pairs =
        vec![ProductPoint::new(vec![0.0], vec![0.0]), ProductPoint::new(vec![0.5], vec![0.0]), ProductPoint::new(vec![1.0], vec![0.0])];
    let a = GridAxis::unit(1, 8).unwrap();
    let w = BiconvexWitness { pairs, values: vec![vec![0.0]; 3] };
    assert!(build_biconvex_selection(&w, &a, &a).is_err());
}
