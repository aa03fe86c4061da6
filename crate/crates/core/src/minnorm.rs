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

//! Minimum-norm point of the convex hull of a finite point set (Wolfe's
//! algorithm). All distance, membership and separation queries on
//! vertex-represented polytopes reduce to this program over convex-combination
//! weights.

use nalgebra::{DMatrix, DVector};

const MAX_MAJOR: usize = 10_000;
const MAX_MINOR: usize = 1_000;
const TOL_OPT: f64 = 1e-13;
const TOL_WEIGHT: f64 = 1e-15;

#[derive(Debug, Clone)]
pub(crate) struct MinNorm {
    pub point: Vec<f64>,
    /// (index into the input, weight) with weights summing to one.
    pub weights: Vec<(usize, f64)>,
}

impl MinNorm {
    pub fn norm(&self) -> f64 {
        dot(&self.point, &self.point).sqrt()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(points: &[Vec<f64>], support: &[usize], w: &[f64]) -> Vec<f64> {
    let d = points[support[0]].len();
    let mut x = vec![0.0; d];
    for (&k, &wk) in support.iter().zip(w) {
        for (xi, pi) in x.iter_mut().zip(&points[k]) {
            *xi += wk * pi;
        }
    }
    x
}

/// Weights minimizing |sum a_i q_i| subject to sum a_i = 1.
fn affine_minimizer(points: &[Vec<f64>], support: &[usize]) -> Vec<f64> {
    let k = support.len();
    if k == 1 {
        return vec![1.0];
    }
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in i..k {
            let g = dot(&points[support[i]], &points[support[j]]);
            m[(i, j)] = g;
            m[(j, i)] = g;
        }
        m[(i, k)] = 1.0;
        m[(k, i)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = match m.clone().lu().solve(&rhs) {
        Some(s) if s.iter().all(|v| v.is_finite()) => s,
        _ => m.svd(true, true).solve(&rhs, 1e-14).unwrap_or_else(|_| {
            let mut s = DVector::zeros(k + 1);
            s[0] = 1.0;
            s
        }),
    };
    sol.iter().take(k).copied().collect()
}

pub(crate) fn min_norm_point(points: &[Vec<f64>]) -> MinNorm {
    assert!(!points.is_empty(), "min_norm_point on empty set");
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);

    let mut start = 0;
    let mut best = f64::INFINITY;
    for (k, p) in points.iter().enumerate() {
        let n = dot(p, p);
        if n < best {
            best = n;
            start = k;
        }
    }
    let mut support = vec![start];
    let mut w = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..MAX_MAJOR {
        let xx = dot(&x, &x);
        if xx <= 1e-32 * scale {
            break;
        }
        let (j, xpj) =
            points.iter().enumerate().map(|(k, p)| (k, dot(&x, p))).fold((0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
        if xx - xpj <= TOL_OPT * scale || support.contains(&j) {
            break;
        }
        support.push(j);
        w.push(0.0);

        for _ in 0..MAX_MINOR {
            let alpha = affine_minimizer(points, &support);
            if alpha.iter().all(|&a| a > TOL_WEIGHT) {
                w = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (wi, ai) in w.iter().zip(&alpha) {
                if *ai <= TOL_WEIGHT && wi - ai > 0.0 {
                    theta = theta.min(wi / (wi - ai));
                }
            }
            for (wi, ai) in w.iter_mut().zip(&alpha) {
                *wi = (1.0 - theta) * *wi + theta * ai;
            }
            let mut keep_s = Vec::with_capacity(support.len());
            let mut keep_w = Vec::with_capacity(support.len());
            for (&s, &wi) in support.iter().zip(&w) {
                if wi > TOL_WEIGHT {
                    keep_s.push(s);
                    keep_w.push(wi);
                }
            }
            if keep_s.is_empty() {
                // numerically collapsed; restart from the entering point
                keep_s.push(j);
                keep_w.push(1.0);
            }
            let total: f64 = keep_w.iter().sum();
            keep_w.iter_mut().for_each(|v| *v /= total);
            support = keep_s;
            w = keep_w;
            if support.len() == 1 {
                break;
            }
        }
        x = combine(points, &support, &w);
    }

    MinNorm { point: x, weights: support.into_iter().zip(w).collect() }
}
