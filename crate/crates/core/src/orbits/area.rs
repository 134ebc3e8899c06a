//! Areas of superlevel sets by piecewise-linear sub-cell interpolation.

use rayon::prelude::*;

use std::f64::consts::TAU;

use super::sampler::PolarSampler;
use crate::field::ScalarField;

/// Fraction of a triangle on which the linear interpolant of `d` is positive.
fn positive_fraction(d: [f64; 3]) -> f64 {
    let pos = d.iter().filter(|&&x| x > 0.0).count();
    let lone = |k: usize| {
        let (a, b, c) = (d[k], d[(k + 1) % 3], d[(k + 2) % 3]);
        a * a / ((a - b) * (a - c))
    };
    match pos {
        0 => 0.0,
        3 => 1.0,
        1 => lone(d.iter().position(|&x| x > 0.0).expect("one positive vertex")),
        _ => 1.0 - lone(d.iter().position(|&x| x <= 0.0).expect("one nonpositive vertex")),
    }
}

fn triangle_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
}

struct Triangle {
    vertices: [usize; 3],
    area: f64,
}

/// Piecewise-linear triangulation of a refined polar lattice whose values
/// come from the cubic interpolant, closed at the centre.
struct Mesh {
    values: Vec<f64>,
    triangles: Vec<Triangle>,
}

/// Sub-cells per grid cell in each direction.
const REFINE: usize = 4;

impl Mesh {
    fn new(g: &ScalarField) -> Self {
        let grid = &g.grid;
        let sampler = PolarSampler::new(g);
        let rings = REFINE * grid.nr;
        let np = REFINE * grid.npsi;
        let (dr, dp) = (grid.domain.r_max / rings as f64, TAU / np as f64);
        let mut pts: Vec<[f64; 2]> = vec![[0.0, 0.0]];
        let mut values = vec![sampler.polar(0.0, 0.0)];
        for a in 1..=rings {
            let r = a as f64 * dr;
            let row: Vec<([f64; 2], f64)> = (0..np)
                .into_par_iter()
                .map(|b| {
                    let p = b as f64 * dp;
                    ([r * p.cos(), r * p.sin()], sampler.polar(r, p))
                })
                .collect();
            for (q, v) in row {
                pts.push(q);
                values.push(v);
            }
        }
        let idx = |a: usize, b: usize| 1 + (a - 1) * np + b % np;
        let tri = |v: [usize; 3]| Triangle {
            vertices: v,
            area: triangle_area(pts[v[0]], pts[v[1]], pts[v[2]]),
        };
        let mut triangles = Vec::with_capacity(2 * rings * np);
        for b in 0..np {
            triangles.push(tri([0, idx(1, b), idx(1, b + 1)]));
        }
        for a in 1..rings {
            for b in 0..np {
                triangles.push(tri([idx(a, b), idx(a + 1, b), idx(a + 1, b + 1)]));
                triangles.push(tri([idx(a, b), idx(a + 1, b + 1), idx(a, b + 1)]));
            }
        }
        Mesh { values, triangles }
    }

    fn area_above(&self, c: f64) -> f64 {
        self.triangles
            .par_iter()
            .map(|t| {
                let d = t.vertices.map(|v| self.values[v] - c);
                t.area * positive_fraction(d)
            })
            .sum()
    }

    fn total(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }
}

/// Area of `{g > c}` for each level.
///
/// Levels at or above `sup g` give 0 and levels at or below `inf g` the
/// whole triangulated disc; both cases are logged.
pub fn area_distribution(g: &ScalarField, levels: &[f64]) -> Vec<f64> {
    let mesh = Mesh::new(g);
    let (lo, hi) = g
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    levels
        .iter()
        .map(|&c| {
            if c >= hi {
                log::warn!("level {c} is not below sup g = {hi}; area is empty");
                0.0
            } else if c <= lo {
                log::warn!("level {c} is not above inf g = {lo}; area is the whole disc");
                mesh.total()
            } else {
                mesh.area_above(c)
            }
        })
        .collect()
}
