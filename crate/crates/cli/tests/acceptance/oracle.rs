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

//! Brute-force references that share no geometry code with the library.

use std::collections::BTreeSet;
use std::sync::Arc;

use corrfix_core::classes::{PlMap, WnqWitness};
use corrfix_core::correspondence::{Correspondence, Domain};
use corrfix_core::{PolytopeSet, SimplexDomain};

pub fn seg_dist(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(x, y)| y - x).collect();
    let l2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if l2 == 0.0 { 0.0 } else { (ap.iter().zip(&ab).map(|(u, v)| u * v).sum::<f64>() / l2).clamp(0.0, 1.0) };
    a.iter().zip(&ab).zip(p).map(|((ai, di), pi)| (ai + t * di - pi).powi(2)).sum::<f64>().sqrt()
}

fn tri_dist(p: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    if det.abs() > 1e-15 {
        let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
        if l1 >= 0.0 && l2 >= 0.0 && l1 + l2 <= 1.0 {
            return 0.0;
        }
    }
    seg_dist(p, a, b).min(seg_dist(p, b, c)).min(seg_dist(p, a, c))
}

/// Distance to the hull of a few points in R^1 or R^2.
pub fn hull_dist(p: &[f64], verts: &[Vec<f64>]) -> f64 {
    if verts.is_empty() {
        return f64::INFINITY;
    }
    if p.len() == 1 {
        let lo = verts.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        let hi = verts.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
        return (lo - p[0]).max(p[0] - hi).max(0.0);
    }
    let mut d = f64::INFINITY;
    for i in 0..verts.len() {
        for j in i..verts.len() {
            d = d.min(seg_dist(p, &verts[i], &verts[j]));
            for k in j + 1..verts.len() {
                d = d.min(tri_dist(p, &verts[i], &verts[j], &verts[k]));
            }
        }
    }
    d
}

/// Barycentric lattice `{c / m : c in N^n, Σc = m}`.
pub fn compositions(n: usize, m: usize) -> Vec<Vec<f64>> {
    fn rec(pos: usize, left: usize, c: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == c.len() {
            c[pos] = left;
            out.push(c.clone());
            return;
        }
        for k in 0..=left {
            c[pos] = k;
            rec(pos + 1, left - k, c, out);
        }
    }
    let mut all = Vec::new();
    rec(0, m, &mut vec![0; n], &mut all);
    all.into_iter().map(|c| c.into_iter().map(|k| k as f64 / m as f64).collect()).collect()
}

pub fn combine(weights: &[f64], points: &[Vec<f64>]) -> Vec<f64> {
    (0..points[0].len()).map(|j| weights.iter().zip(points).map(|(a, p)| a * p[j]).sum()).collect()
}

type VertexFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

pub struct Fixture {
    pub name: &'static str,
    pub domain: SimplexDomain,
    pub values: VertexFn,
    pub codomain: PolytopeSet,
    pub witness: WnqWitness,
}

impl Fixture {
    pub fn correspondence(&self) -> Correspondence {
        let f = self.values.clone();
        let d = self.codomain.dim();
        Correspondence::new(Domain::Simplex(self.domain.clone()), self.codomain.clone(), move |x: &[f64]| {
            PolytopeSet::new(d, f(x)).unwrap()
        })
    }

    /// Grid verdict of the defining inequality, with or without the reparameterization.
    pub fn passes(&self, m: usize, tol: f64, use_g: bool) -> bool {
        let w = &self.witness;
        compositions(w.points.len(), m).iter().all(|l| {
            let mu: Vec<f64> = if use_g { w.g.iter().zip(l).map(|(g, &t)| g.eval(t)).collect() } else { l.clone() };
            hull_dist(&combine(&mu, &w.values), &(self.values)(&combine(l, &w.points))) <= tol
        })
    }
}

pub fn fixtures() -> Vec<Fixture> {
    let u = SimplexDomain::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let t = SimplexDomain::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let end = vec![vec![0.0], vec![1.0]];
    let id = WnqWitness::identity;
    let sq = PlMap::power(2.0, 32).unwrap();
    let unit_codomain = PolytopeSet::interval(0.0, 1.0);
    let fx = |name, domain: &SimplexDomain, values: VertexFn, codomain: &PolytopeSet, witness| Fixture {
        name,
        domain: domain.clone(),
        values,
        codomain: codomain.clone(),
        witness,
    };
    let tc = t.as_polytope();
    vec![
        fx("constant", &u, Arc::new(|_| vec![vec![0.3]]), &unit_codomain, id(end.clone(), vec![vec![0.3], vec![0.3]])),
        fx("affine_half", &u, Arc::new(|x| vec![vec![x[0] / 2.0]]), &unit_codomain, id(end.clone(), vec![vec![0.0], vec![0.5]])),
        fx(
            "jump",
            &u,
            Arc::new(|x| vec![vec![if x[0] <= 0.5 { 0.0 } else { 1.0 }]]),
            &unit_codomain,
            id(end.clone(), vec![vec![0.0], vec![1.0]]),
        ),
        fx(
            "band",
            &u,
            Arc::new(|x| vec![vec![(x[0] - 0.1).max(0.0)], vec![(x[0] + 0.1).min(1.0)]]),
            &unit_codomain,
            id(end.clone(), vec![vec![0.1], vec![0.9]]),
        ),
        fx("square_curve_identity", &u, Arc::new(|x| vec![vec![x[0] * x[0]]]), &unit_codomain, id(end.clone(), vec![vec![0.0], vec![1.0]])),
        fx(
            "square_curve_g",
            &u,
            Arc::new(|x| vec![vec![x[0] * x[0]]]),
            &unit_codomain,
            WnqWitness { points: end.clone(), values: vec![vec![0.0], vec![1.0]], g: vec![sq.conjugate(), sq.clone()] },
        ),
        fx("lower_interval", &u, Arc::new(|x| vec![vec![0.0], vec![x[0]]]), &unit_codomain, id(end.clone(), vec![vec![0.0], vec![0.5]])),
        fx(
            "triangle_constant_value",
            &t,
            Arc::new(|_| vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]),
            &tc,
            id(t.vertices().to_vec(), vec![vec![0.2, 0.2], vec![0.9, 0.05], vec![0.0, 1.0]]),
        ),
        fx(
            "triangle_affine",
            &t,
            Arc::new(|x| vec![vec![0.5 * x[0] + 0.25 * x[1], 0.1 + 0.5 * x[1]]]),
            &tc,
            id(t.vertices().to_vec(), vec![vec![0.0, 0.1], vec![0.5, 0.1], vec![0.25, 0.6]]),
        ),
        fx(
            "triangle_step",
            &t,
            Arc::new(|x| vec![if x[0] + x[1] <= 0.5 { vec![0.0, 0.0] } else { vec![0.5, 0.5] }]),
            &tc,
            id(t.vertices().to_vec(), vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![0.5, 0.5]]),
        ),
        fx(
            "triangle_vertical_segment",
            &t,
            Arc::new(|x| vec![vec![x[0], 0.0], vec![x[0], 1.0 - x[0]]]),
            &tc,
            id(t.vertices().to_vec(), vec![vec![0.0, 0.5], vec![1.0, 0.0], vec![0.0, 0.5]]),
        ),
        fx(
            "triangle_shrinking_disc",
            &t,
            Arc::new(|x| {
                let r = 0.2 * (1.0 - x[0] - x[1]);
                vec![vec![0.3 - r, 0.3], vec![0.3 + r, 0.3], vec![0.3, 0.3 + r]]
            }),
            &tc,
            id(t.vertices().to_vec(), vec![vec![0.3, 0.4], vec![0.3, 0.3], vec![0.3, 0.3]]),
        ),
    ]
}

// ---- exact lattice closure for 1 x 1 products ----

/// Closure of a cell set under section hulls, on integer coordinates `0..=m`.
pub fn lattice_closure(seed: &BTreeSet<(i64, i64)>, m: i64) -> BTreeSet<(i64, i64)> {
    let mut set = seed.clone();
    loop {
        let mut add = Vec::new();
        for a in 0..=m {
            let ys: Vec<i64> = set.iter().filter(|c| c.0 == a).map(|c| c.1).collect();
            if let (Some(lo), Some(hi)) = (ys.iter().min(), ys.iter().max()) {
                add.extend((*lo..=*hi).map(|b| (a, b)).filter(|c| !set.contains(c)));
            }
            let xs: Vec<i64> = set.iter().filter(|c| c.1 == a).map(|c| c.0).collect();
            if let (Some(lo), Some(hi)) = (xs.iter().min(), xs.iter().max()) {
                add.extend((*lo..=*hi).map(|b| (b, a)).filter(|c| !set.contains(c)));
            }
        }
        if add.is_empty() {
            return set;
        }
        set.extend(add);
    }
}

/// Equilibrium set of the two-agent fixture in closed form, with slack on the B clauses.
pub fn two_agent_equilibrium(z: &[f64], slack: f64) -> bool {
    let corner = |s: [f64; 4], t: [f64; 4]| {
        let w: Vec<f64> = (0..4).map(|k| s[k] * z[k] + t[k]).collect();
        w.iter().all(|&v| v > 0.0) && w.iter().sum::<f64>() < 1.0
    };
    !corner([1.0; 4], [0.0; 4])
        && !corner([-1.0, 1.0, 1.0, 1.0], [1.0, 0.0, 0.0, 0.0])
        && z[2] >= z[1] / 2.0 - slack
        && z[3] >= z[0] / 2.0 - slack
}
