//! Grid functions and their ghost-cell extensions.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{EndKind, Grid};

/// How a scalar behaves at an axis of `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Smooth and even in the distance to the axis.
    Even,
    /// Vanishes linearly at the axis.
    Odd,
    /// Carries a factor `|K|^2`, so vanishes quadratically at the axis.
    KNormSqScaled,
}

/// Boundary treatment on walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Zero on every wall and axis (stream functions).
    Dirichlet,
    /// No prescribed value; ghosts are extrapolated.
    Free,
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub parity: Parity,
    pub boundary: Boundary,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>, parity: Parity, boundary: Boundary) -> Self {
        ScalarField {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
            parity,
            boundary,
        }
    }

    pub fn stream(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        Self::with_values(grid, values, Parity::Even, Boundary::Dirichlet)
    }

    pub fn swirl(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        Self::with_values(grid, values, Parity::KNormSqScaled, Boundary::Free)
    }

    pub fn with_values(
        grid: &Arc<Grid>,
        values: Vec<f64>,
        parity: Parity,
        boundary: Boundary,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.nr,
                grid.npsi,
                values.len()
            )));
        }
        Ok(ScalarField {
            grid: Arc::clone(grid),
            values,
            parity,
            boundary,
        })
    }

    /// Samples `f(r, psi)` at every node.
    pub fn from_fn(
        grid: &Arc<Grid>,
        parity: Parity,
        boundary: Boundary,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &r in &grid.r_nodes {
            for &p in &grid.psi_nodes {
                values.push(f(r, p));
            }
        }
        ScalarField {
            grid: Arc::clone(grid),
            values,
            parity,
            boundary,
        }
    }

    pub fn like(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        ScalarField {
            grid: Arc::clone(&self.grid),
            values,
            parity: self.parity,
            boundary: self.boundary,
        }
    }

    pub fn with_kind(mut self, parity: Parity, boundary: Boundary) -> Self {
        self.parity = parity;
        self.boundary = boundary;
        self
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.npsi + j]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.like(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Node-wise combination; row geometry is available to `f`.
    pub fn zip_rows(&self, other: &ScalarField, f: impl Fn(usize, f64, f64) -> f64) -> Self {
        let n = self.grid.npsi;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(k, (&a, &b))| f(k / n, a, b))
            .collect();
        self.like(values)
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid)
            || (self.grid.nr == other.grid.nr
                && self.grid.npsi == other.grid.npsi
                && self.grid.geometry == other.grid.geometry
                && self.grid.domain == other.grid.domain)
        {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "fields live on different grids ({}x{} vs {}x{})",
                self.grid.nr, self.grid.npsi, other.grid.nr, other.grid.npsi
            )))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sum W a b` over the unknowns.
    pub fn weighted_dot(&self, other: &ScalarField) -> f64 {
        let n = self.grid.npsi;
        self.values
            .chunks(n)
            .zip(other.values.chunks(n))
            .enumerate()
            .map(|(i, (a, b))| self.grid.weight(i) * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    /// `sum W v` over the unknowns.
    pub fn integral(&self) -> f64 {
        let n = self.grid.npsi;
        self.values
            .chunks(n)
            .enumerate()
            .map(|(i, row)| self.grid.weight(i) * row.iter().sum::<f64>())
            .sum()
    }

    pub fn weighted_mean(&self) -> f64 {
        let total: f64 = self.grid.weights.iter().sum::<f64>() * self.grid.npsi as f64;
        self.integral() / total
    }

    /// Extends the field by one ghost layer on every side.
    pub fn padded(&self) -> Padded {
        Padded::new(self)
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, o: &ScalarField) -> ScalarField {
        self.like(self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, o: &ScalarField) -> ScalarField {
        self.like(self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, s: f64) -> ScalarField {
        self.map(|v| v * s)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

/// A field with one ghost layer: indices run over `-1..=nr` and `-1..=npsi`.
#[derive(Debug, Clone)]
pub struct Padded {
    pub nr: usize,
    pub npsi: usize,
    data: Vec<f64>,
}

impl Padded {
    #[inline]
    pub fn get(&self, i: isize, j: isize) -> f64 {
        let w = self.npsi + 2;
        self.data[(i + 1) as usize * w + (j + 1) as usize]
    }

    #[inline]
    fn set(&mut self, i: isize, j: isize, v: f64) {
        let w = self.npsi + 2;
        self.data[(i + 1) as usize * w + (j + 1) as usize] = v;
    }

    fn new(field: &ScalarField) -> Self {
        Padded::with_rules(&field.grid, &field.values, GhostRules::for_field(field.parity, field.boundary))
    }

    /// Pads raw node values of `grid` with an explicit ghost policy.
    pub fn with_rules(g: &Grid, values: &[f64], rules: GhostRules) -> Self {
        let (nr, np) = (g.nr, g.npsi);
        let mut p = Padded {
            nr,
            npsi: np,
            data: vec![0.0; (nr + 2) * (np + 2)],
        };
        for i in 0..nr {
            for j in 0..np {
                p.set(i as isize, j as isize, values[i * np + j]);
            }
        }
        let (nri, npi) = (nr as isize, np as isize);
        for i in 0..nri {
            if g.psi_periodic() {
                p.set(i, -1, p.get(i, npi - 1));
                p.set(i, npi, p.get(i, 0));
            } else {
                let lo = rules.psi_wall.apply(p.get(i, 0), p.get(i, 1), p.get(i, 2));
                let hi = rules.psi_wall.apply(p.get(i, npi - 1), p.get(i, npi - 2), p.get(i, npi - 3));
                p.set(i, -1, lo);
                p.set(i, npi, hi);
            }
        }
        // radial ghosts, including corners, from the psi-padded rows
        for (end, ghost, first, step) in [(g.inner, -1, 0, 1), (g.outer, nri, nri - 1, -1)] {
            for j in -1..=npi {
                let (v1, v2, v3) = (
                    p.get(first, j),
                    p.get(first + step, j),
                    p.get(first + 2 * step, j),
                );
                let v = match end {
                    EndKind::Pole => {
                        // the row across the pole: psi + pi
                        let jj = (j + npi / 2).rem_euclid(npi);
                        p.get(first, jj)
                    }
                    EndKind::Wall => rules.r_wall.apply(v1, v2, v3),
                    EndKind::Axis => rules.axis.apply(v1, v2, v3),
                };
                p.set(ghost, j, v);
            }
        }
        p
    }
}

impl Padded {
    /// Bilinear interpolation at fractional node coordinates `(x, y)`.
    ///
    /// Coordinates are clamped to the padded range, so points between the
    /// last unknown and a wall interpolate against the ghost value.
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(-1.0, self.nr as f64);
        let y = y.clamp(-1.0, self.npsi as f64);
        let i0 = (x.floor() as isize).min(self.nr as isize - 1);
        let j0 = (y.floor() as isize).min(self.npsi as isize - 1);
        let (tx, ty) = (x - i0 as f64, y - j0 as f64);
        let a = self.get(i0, j0) * (1.0 - ty) + self.get(i0, j0 + 1) * ty;
        let b = self.get(i0 + 1, j0) * (1.0 - ty) + self.get(i0 + 1, j0 + 1) * ty;
        a * (1.0 - tx) + b * tx
    }
}

/// Value assigned to a ghost node one spacing beyond the last unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ghost {
    Zero,
    /// Quadratic extrapolation `3 v1 - 3 v2 + v3`.
    Extrapolate,
    /// Even reflection through an axis: `(4 v1 - v2) / 3`.
    Even,
}

impl Ghost {
    #[inline]
    fn apply(self, v1: f64, v2: f64, v3: f64) -> f64 {
        match self {
            Ghost::Zero => 0.0,
            Ghost::Extrapolate => 3.0 * v1 - 3.0 * v2 + v3,
            Ghost::Even => (4.0 * v1 - v2) / 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GhostRules {
    pub r_wall: Ghost,
    pub axis: Ghost,
    pub psi_wall: Ghost,
}

impl GhostRules {
    pub fn for_field(parity: Parity, boundary: Boundary) -> Self {
        match (boundary, parity) {
            (Boundary::Dirichlet, _) => GhostRules {
                r_wall: Ghost::Zero,
                axis: Ghost::Zero,
                psi_wall: Ghost::Zero,
            },
            (Boundary::Free, Parity::Even) => GhostRules {
                r_wall: Ghost::Extrapolate,
                axis: Ghost::Even,
                psi_wall: Ghost::Extrapolate,
            },
            (Boundary::Free, _) => GhostRules {
                r_wall: Ghost::Extrapolate,
                axis: Ghost::Zero,
                psi_wall: Ghost::Extrapolate,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GeometryKind, Profile};
    use crate::grid::{Domain, PsiExtent};
    use std::f64::consts::TAU;

    #[test]
    fn shape_mismatch_is_an_error() {
        let g = Grid::new(
            GeometryKind::doubly_warped(Profile::EuclideanRotation),
            Domain::periodic(0.0, 1.0, 1.0).unwrap(),
            8,
            8,
        )
        .unwrap();
        assert!(matches!(ScalarField::stream(&g, vec![0.0; 63]), Err(Error::Shape(_))));
    }

    #[test]
    fn pole_ghost_is_the_opposite_row() {
        let g = Grid::new(
            GeometryKind::fibration(0).unwrap(),
            Domain::periodic(0.0, 1.0, TAU).unwrap(),
            6,
            8,
        )
        .unwrap();
        // x = r cos psi is smooth through the pole
        let f = ScalarField::from_fn(&g, Parity::Even, Boundary::Free, |r, p| r * p.cos());
        let p = f.padded();
        for j in 0..8 {
            let expect = -g.r_nodes[0] * g.psi_nodes[j].cos();
            assert!((p.get(-1, j as isize) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn free_wall_ghost_is_exact_for_quadratics() {
        let g = Grid::new(
            GeometryKind::doubly_warped(Profile::Sol),
            Domain::new(0.1, 1.0, PsiExtent::Walls { min: 0.0, max: 1.0 }).unwrap(),
            8,
            8,
        )
        .unwrap();
        let q = |r: f64, p: f64| r * r + 2.0 * p * p - r * p;
        let f = ScalarField::from_fn(&g, Parity::Even, Boundary::Free, q);
        let p = f.padded();
        let rg = g.domain.r_max;
        let pg = g.psi_nodes[3];
        assert!((p.get(8, 3) - q(rg, pg)).abs() < 1e-12);
        assert!((p.get(3, -1) - q(g.r_nodes[3], 0.0)).abs() < 1e-12);
        assert!((p.get(-1, -1) - q(0.1, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn axis_ghost_for_even_fields_uses_symmetry() {
        let g = Grid::new(
            GeometryKind::doubly_warped(Profile::EuclideanRotation),
            Domain::periodic(0.0, 1.0, 1.0).unwrap(),
            8,
            8,
        )
        .unwrap();
        let f = ScalarField::from_fn(&g, Parity::Even, Boundary::Free, |r, _| 1.0 + r * r);
        assert!((f.padded().get(-1, 2) - 1.0).abs() < 1e-14);
        let s = ScalarField::from_fn(&g, Parity::KNormSqScaled, Boundary::Free, |r, _| r * r);
        assert_eq!(s.padded().get(-1, 2), 0.0);
    }
}
