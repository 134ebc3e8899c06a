//! Tensor-product `(r, psi)` discretization of the quotient surface.
//!
//! Unknowns never sit on a boundary, an axis of `K`, or a pole of the polar
//! chart. Radial ends come in three kinds:
//!
//! * `Wall`: a Dirichlet boundary one node spacing beyond the last unknown.
//! * `Axis`: the zero set of `K` (`beta = 0`) in a rotation, treated like a
//!   wall node whose ghost value follows the field parity.
//! * `Pole`: a zero of `alpha` (polar-coordinate singularity of the surface);
//!   unknowns are cell-centred there and the ghost row is the row across the
//!   pole, shifted by half a period in `psi`.

use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::geometry::GeometryKind;
use crate::solver::KLaplacianSolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndKind {
    Wall,
    Axis,
    Pole,
}

impl EndKind {
    fn offset(self) -> f64 {
        match self {
            EndKind::Wall | EndKind::Axis => 1.0,
            EndKind::Pole => 0.5,
        }
    }

    /// True for ends where the stream function takes its boundary value.
    pub fn is_dirichlet(self) -> bool {
        !matches!(self, EndKind::Pole)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiExtent {
    Periodic { period: f64 },
    Walls { min: f64, max: f64 },
}

/// Radial and angular extent of a (possibly truncated) quotient domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub r_min: f64,
    pub r_max: f64,
    pub psi: PsiExtent,
}

impl Domain {
    pub fn new(r_min: f64, r_max: f64, psi: PsiExtent) -> Result<Self> {
        if !(r_min < r_max) {
            return Err(Error::InvalidDomain(format!(
                "r_min = {r_min} must be below r_max = {r_max}"
            )));
        }
        match psi {
            PsiExtent::Periodic { period } if !(period > 0.0) => {
                return Err(Error::InvalidDomain(format!("psi period {period} must be positive")))
            }
            PsiExtent::Walls { min, max } if !(min < max) => {
                return Err(Error::InvalidDomain(format!("psi walls [{min}, {max}] are empty")))
            }
            _ => {}
        }
        Ok(Domain { r_min, r_max, psi })
    }

    pub fn periodic(r_min: f64, r_max: f64, period: f64) -> Result<Self> {
        Domain::new(r_min, r_max, PsiExtent::Periodic { period })
    }

    pub fn psi_periodic(&self) -> bool {
        matches!(self.psi, PsiExtent::Periodic { .. })
    }
}

/// Geometric coefficients of one grid row.
#[derive(Debug, Clone, Copy)]
pub struct RowGeometry {
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dalpha: f64,
    pub dbeta: f64,
    pub k_norm_sq: f64,
    pub phi: f64,
    pub mu: f64,
    /// `1 / (alpha beta)`, the Poisson-bracket prefactor.
    pub inv_mu: f64,
    /// `1 / (alpha^2 beta^2)`, the `d^2/dpsi^2` coefficient of the K-Laplacian.
    pub psi_coeff: f64,
}

#[derive(Debug)]
pub struct Grid {
    pub geometry: GeometryKind,
    pub domain: Domain,
    pub nr: usize,
    pub npsi: usize,
    pub hr: f64,
    pub hpsi: f64,
    pub inner: EndKind,
    pub outer: EndKind,
    pub r_nodes: Vec<f64>,
    pub psi_nodes: Vec<f64>,
    pub rows: Vec<RowGeometry>,
    /// `alpha / beta` on the `nr + 1` radial faces; face `i` lies below node `i`.
    pub faces: Vec<f64>,
    pub weights: Vec<f64>,
    solver: OnceLock<KLaplacianSolver>,
}

fn classify_end(geom: &GeometryKind, r: f64) -> Result<EndKind> {
    let w = geom.warp_profile(r)?;
    if w.beta.abs() < 1e-12 {
        Ok(EndKind::Axis)
    } else if w.alpha.abs() < 1e-12 {
        Ok(EndKind::Pole)
    } else {
        Ok(EndKind::Wall)
    }
}

impl Grid {
    pub fn new(geometry: GeometryKind, domain: Domain, nr: usize, npsi: usize) -> Result<Arc<Grid>> {
        if nr < 4 || npsi < 4 {
            return Err(Error::InvalidDomain(format!(
                "grid needs at least 4x4 unknowns, got {nr}x{npsi}"
            )));
        }
        geometry.check_radius(domain.r_min)?;
        geometry.check_radius(domain.r_max)?;
        let inner = classify_end(&geometry, domain.r_min)?;
        let outer = classify_end(&geometry, domain.r_max)?;
        let has_pole = inner == EndKind::Pole || outer == EndKind::Pole;
        match domain.psi {
            PsiExtent::Periodic { period } => {
                if npsi % 2 != 0 {
                    return Err(Error::InvalidDomain(format!(
                        "periodic psi needs an even npsi, got {npsi}"
                    )));
                }
                if has_pole && (period - TAU).abs() > 1e-9 {
                    return Err(Error::InvalidDomain(format!(
                        "a pole of the chart needs psi period 2 pi, got {period}"
                    )));
                }
            }
            PsiExtent::Walls { .. } if has_pole => {
                return Err(Error::InvalidDomain(
                    "a pole of the chart needs periodic psi".into(),
                ))
            }
            PsiExtent::Walls { .. } => {}
        }

        let span = domain.r_max - domain.r_min;
        let hr = span / (nr as f64 - 1.0 + inner.offset() + outer.offset());
        let r_nodes: Vec<f64> = (0..nr)
            .map(|i| domain.r_min + (inner.offset() + i as f64) * hr)
            .collect();
        let (hpsi, psi_nodes): (f64, Vec<f64>) = match domain.psi {
            PsiExtent::Periodic { period } => {
                let h = period / npsi as f64;
                (h, (0..npsi).map(|j| j as f64 * h).collect())
            }
            PsiExtent::Walls { min, max } => {
                let h = (max - min) / (npsi as f64 + 1.0);
                (h, (0..npsi).map(|j| min + (j as f64 + 1.0) * h).collect())
            }
        };

        let mut rows = Vec::with_capacity(nr);
        for &r in &r_nodes {
            let w = geometry.warp_profile(r)?;
            let kd = geometry.killing_data(r)?;
            let mu = w.alpha * w.beta;
            rows.push(RowGeometry {
                r,
                alpha: w.alpha,
                beta: w.beta,
                dalpha: w.dalpha,
                dbeta: w.dbeta,
                k_norm_sq: kd.k_norm_sq,
                phi: kd.phi,
                mu,
                inv_mu: 1.0 / mu,
                psi_coeff: 1.0 / (mu * mu),
            });
        }
        let mut faces = Vec::with_capacity(nr + 1);
        for i in 0..=nr {
            let r = domain.r_min + (inner.offset() + i as f64 - 0.5) * hr;
            let is_pole_face = (i == 0 && inner == EndKind::Pole) || (i == nr && outer == EndKind::Pole);
            if is_pole_face {
                faces.push(0.0);
            } else {
                let w = geometry.warp_profile(r.clamp(domain.r_min, domain.r_max))?;
                faces.push(w.alpha / w.beta);
            }
        }
        let weights = rows.iter().map(|g| g.mu * hr * hpsi).collect();

        Ok(Arc::new(Grid {
            geometry,
            domain,
            nr,
            npsi,
            hr,
            hpsi,
            inner,
            outer,
            r_nodes,
            psi_nodes,
            rows,
            faces,
            weights,
            solver: OnceLock::new(),
        }))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nr * self.npsi
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.npsi + j
    }

    pub fn psi_periodic(&self) -> bool {
        self.domain.psi_periodic()
    }

    pub fn psi_period(&self) -> Option<f64> {
        match self.domain.psi {
            PsiExtent::Periodic { period } => Some(period),
            PsiExtent::Walls { .. } => None,
        }
    }

    /// True when no edge of the quotient carries a Dirichlet condition.
    pub fn has_no_boundary(&self) -> bool {
        self.psi_periodic() && !self.inner.is_dirichlet() && !self.outer.is_dirichlet()
    }

    pub fn has_axis(&self) -> bool {
        self.inner == EndKind::Axis || self.outer == EndKind::Axis
    }

    pub fn has_pole(&self) -> bool {
        self.inner == EndKind::Pole || self.outer == EndKind::Pole
    }

    /// Quadrature weight `mu(r_i) hr hpsi` of any node in row `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Trapezoid/midpoint estimate of the area `int mu dr dpsi`, including
    /// the half-weights of wall nodes that are not stored as unknowns.
    pub fn total_measure(&self) -> f64 {
        let interior: f64 = self.weights.iter().sum::<f64>() * self.npsi as f64;
        let mut radial_edges = 0.0;
        for (end, r) in [(self.inner, self.domain.r_min), (self.outer, self.domain.r_max)] {
            if end == EndKind::Wall {
                let mu = self.geometry.volume_weight(r).unwrap_or(0.0);
                radial_edges += 0.5 * mu * self.hr * self.hpsi * self.npsi as f64;
            }
        }
        let psi_edges = if self.psi_periodic() {
            0.0
        } else {
            // two psi walls, each a half-weight column of the radial rule
            self.weights.iter().sum::<f64>()
        };
        interior + radial_edges + psi_edges
    }

    /// The shared, lazily factorized Dirichlet inverse of the K-Laplacian.
    pub fn solver(&self) -> &KLaplacianSolver {
        self.solver.get_or_init(|| KLaplacianSolver::new(self))
    }

    /// Fractional row coordinate of radius `r` (node `i` has coordinate `i`).
    #[inline]
    pub fn row_coordinate(&self, r: f64) -> f64 {
        (r - self.domain.r_min) / self.hr - self.inner.offset()
    }

    /// Fractional column coordinate of angle `psi`, wrapped when periodic.
    #[inline]
    pub fn column_coordinate(&self, psi: f64) -> f64 {
        match self.domain.psi {
            PsiExtent::Periodic { period } => {
                let x = psi.rem_euclid(period) / self.hpsi;
                if x >= self.npsi as f64 {
                    0.0
                } else {
                    x
                }
            }
            PsiExtent::Walls { min, .. } => (psi - min) / self.hpsi - 1.0,
        }
    }

    pub fn contains(&self, r: f64, psi: f64) -> bool {
        let inside_r = r >= self.domain.r_min - 1e-12 && r <= self.domain.r_max + 1e-12;
        let inside_psi = match self.domain.psi {
            PsiExtent::Periodic { .. } => true,
            PsiExtent::Walls { min, max } => psi >= min - 1e-12 && psi <= max + 1e-12,
        };
        inside_r && inside_psi
    }

    /// Radial spacing of the physical quotient metric, `min(hr, alpha hpsi)` over interior rows.
    pub fn min_spacing(&self) -> f64 {
        self.rows
            .iter()
            .map(|g| g.alpha.abs() * self.hpsi)
            .fold(self.hr, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Profile;
    use std::f64::consts::PI;

    fn rot() -> GeometryKind {
        GeometryKind::doubly_warped(Profile::EuclideanRotation)
    }

    #[test]
    fn end_kinds_follow_geometry() {
        let g = Grid::new(rot(), Domain::periodic(0.0, 1.0, 2.0).unwrap(), 8, 8).unwrap();
        assert_eq!((g.inner, g.outer), (EndKind::Axis, EndKind::Wall));
        assert!((g.r_nodes[0] - g.hr).abs() < 1e-15);
        assert!((g.r_nodes[7] + g.hr - 1.0).abs() < 1e-14);

        let fib = GeometryKind::fibration(0).unwrap();
        let g = Grid::new(fib, Domain::periodic(0.0, 2.0, TAU).unwrap(), 8, 8).unwrap();
        assert_eq!((g.inner, g.outer), (EndKind::Pole, EndKind::Wall));
        assert!((g.r_nodes[0] - 0.5 * g.hr).abs() < 1e-15);
        assert_eq!(g.faces[0], 0.0);

        let sphere = GeometryKind::fibration(1).unwrap();
        let g = Grid::new(sphere, Domain::periodic(0.0, PI, TAU).unwrap(), 8, 8).unwrap();
        assert!(g.has_no_boundary());
    }

    #[test]
    fn pole_requires_full_period() {
        let fib = GeometryKind::fibration(0).unwrap();
        assert!(Grid::new(fib, Domain::periodic(0.0, 2.0, 3.0).unwrap(), 8, 8).is_err());
        assert!(Grid::new(fib, Domain::periodic(0.0, 2.0, TAU).unwrap(), 8, 7).is_err());
    }

    #[test]
    fn bad_domains_rejected() {
        assert!(Domain::periodic(1.0, 1.0, 1.0).is_err());
        assert!(Domain::new(0.0, 1.0, PsiExtent::Walls { min: 1.0, max: 0.0 }).is_err());
        let s3 = GeometryKind::doubly_warped(Profile::Sphere3Rotation);
        assert!(Grid::new(s3, Domain::periodic(0.0, 2.0, TAU).unwrap(), 8, 8).is_err());
    }

    #[test]
    fn measure_converges_at_second_order() {
        // area of [0,1] x [0,2] under mu = r is 1; of the flat unit disc is pi
        let cases: Vec<(GeometryKind, Domain, f64)> = vec![
            (rot(), Domain::periodic(0.0, 1.0, 2.0).unwrap(), 1.0),
            (
                GeometryKind::fibration(0).unwrap(),
                Domain::periodic(0.0, 1.0, TAU).unwrap(),
                PI,
            ),
            (
                GeometryKind::doubly_warped(Profile::Sol),
                Domain::new(-0.5, 0.5, PsiExtent::Walls { min: 0.0, max: 1.0 }).unwrap(),
                1.0,
            ),
            (
                GeometryKind::doubly_warped(Profile::H3Rotation),
                Domain::new(0.0, 1.0, PsiExtent::Walls { min: -1.0, max: 1.0 }).unwrap(),
                1f64.sinh().powi(2),
            ),
        ];
        for (geom, dom, exact) in cases {
            let e32 = (Grid::new(geom, dom, 32, 32).unwrap().total_measure() - exact).abs();
            let e64 = (Grid::new(geom, dom, 64, 64).unwrap().total_measure() - exact).abs();
            assert!(e64 < 0.3 * e32 || e64 < 1e-13, "{geom}: {e32:e} -> {e64:e}");
        }
    }
}
