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

#![allow(dead_code)]

use corrfix_core::classes::{PlMap, WnqWitness};
use corrfix_core::correspondence::{AffineMap, Correspondence, CorrespondenceSpec, Domain, HalfSpace, Piece, Region};
use corrfix_core::simplex::SimplexDomain;
use corrfix_core::PolytopeSet;

pub fn unit() -> SimplexDomain {
    SimplexDomain::new(vec![vec![0.0], vec![1.0]]).unwrap()
}

pub fn tri() -> SimplexDomain {
    SimplexDomain::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
}

pub fn le(normal: Vec<f64>, offset: f64) -> Region {
    Region { constraints: vec![HalfSpace { normal, offset, strict: false }] }
}

pub fn lt(normal: Vec<f64>, offset: f64) -> Region {
    Region { constraints: vec![HalfSpace { normal, offset, strict: true }] }
}

pub fn constant(vs: &[f64]) -> CorrespondenceSpec {
    CorrespondenceSpec::Constant { vertices: vs.iter().map(|&v| vec![v]).collect() }
}

/// `{0}` for `x <= 1/2`, `{1}` otherwise.
pub fn jump() -> Correspondence {
    let spec = CorrespondenceSpec::PiecewiseRegion {
        pieces: vec![Piece { region: le(vec![1.0], 0.5), value: constant(&[0.0]) }],
        otherwise: Some(Box::new(constant(&[1.0]))),
    };
    Correspondence::from_spec(Domain::Simplex(unit()), PolytopeSet::interval(0.0, 1.0), spec).unwrap()
}

/// `{1-x}` for `x < 1/2`, `{0.8(1-x)}` otherwise: no fixed point, `1/2` lies in the closure.
pub fn drop() -> Correspondence {
    let lin = |a: f64, b: f64| CorrespondenceSpec::AffineVertices { maps: vec![AffineMap { matrix: vec![vec![a]], offset: vec![b] }] };
    let spec = CorrespondenceSpec::PiecewiseRegion {
        pieces: vec![Piece { region: lt(vec![1.0], 0.5), value: lin(-1.0, 1.0) }],
        otherwise: Some(Box::new(lin(-0.8, 0.8))),
    };
    Correspondence::from_spec(Domain::Simplex(unit()), PolytopeSet::interval(0.0, 1.0), spec).unwrap()
}

fn pair(g2: PlMap, y: [f64; 2]) -> WnqWitness {
    WnqWitness { points: vec![vec![0.0], vec![1.0]], values: vec![vec![y[0]], vec![y[1]]], g: vec![g2.conjugate(), g2] }
}

/// Witness for the jump thickened by `r`, valid on the grid of spacing `h`.
pub fn jump_witness(r: f64, h: f64) -> WnqWitness {
    if r >= 0.5 {
        return WnqWitness::identity(vec![vec![0.0], vec![1.0]], vec![vec![0.0], vec![1.0]]);
    }
    let g2 = PlMap::new(vec![(0.0, 0.0), (0.5, r), (0.5 + h, 1.0 - r), (1.0, 1.0)]).unwrap();
    pair(g2, [0.0, 1.0])
}

/// Witness for the drop thickened by `r`, valid on the grid of spacing `h`.
pub fn drop_witness(r: f64, h: f64) -> WnqWitness {
    if r >= 0.1 {
        return WnqWitness::identity(vec![vec![0.0], vec![1.0]], vec![vec![1.0], vec![0.0]]);
    }
    let g2 = PlMap::new(vec![(0.0, 0.0), (0.5 - h, 0.5 - h), (0.5, 0.6), (1.0, 1.0)]).unwrap();
    pair(g2, [1.0, 0.0])
}

pub fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Standard 2-simplex in R^3.
pub fn delta2() -> SimplexDomain {
    SimplexDomain::standard(3).unwrap()
}

pub const DELTA2_VALUES: [[f64; 2]; 3] = [[0.1, 0.1], [0.8, 0.2], [0.3, 0.9]];

/// Segment-and-triangle valued map on the 2-simplex tracking `Σ x_i b_i`.
pub fn delta2_spec() -> CorrespondenceSpec {
    let b = DELTA2_VALUES;
    let f = |dx: [f64; 3], dy: [f64; 3]| AffineMap {
        matrix: vec![(0..3).map(|i| b[i][0] + dx[i]).collect(), (0..3).map(|i| b[i][1] + dy[i]).collect()],
        offset: vec![0.0, 0.0],
    };
    CorrespondenceSpec::AffineVertices {
        maps: vec![f([0.0; 3], [0.0; 3]), f([0.0, 0.1, 0.0], [0.05, 0.05, 0.05]), f([-0.05, -0.05, -0.05], [0.1, 0.0, 0.0])],
    }
}

pub fn delta2_correspondence() -> Correspondence {
    let y = PolytopeSet::from_vertices(vec![vec![-1.0, -1.0], vec![2.0, -1.0], vec![2.0, 2.0], vec![-1.0, 2.0]]).unwrap();
    Correspondence::from_spec(Domain::Simplex(delta2()), y, delta2_spec()).unwrap()
}

pub fn delta2_witness() -> WnqWitness {
    WnqWitness::identity(delta2().vertices().to_vec(), DELTA2_VALUES.iter().map(|v| v.to_vec()).collect())
}
