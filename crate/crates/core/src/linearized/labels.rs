//! Marker lattices that include boundary labels, their Jacobians, and the
//! projection of sampled vector fields back onto `(stream, swirl)` form.

use std::sync::Arc;

use crate::dynamics::{FlowMap, MarkerVelocity};
use crate::error::{Error, Result};
use crate::field::{Ghost, GhostRules, Padded, ScalarField};
use crate::grid::Grid;
use crate::operators::{invert_k_laplacian, AxisymField};

/// Node labels plus the wall and axis labels one spacing beyond them.
#[derive(Debug, Clone)]
pub struct LabelLattice {
    pub grid: Arc<Grid>,
    rows: usize,
    cols: usize,
    col_lo: isize,
}

impl LabelLattice {
    pub fn new(grid: &Arc<Grid>) -> Result<Self> {
        if grid.has_pole() {
            return Err(Error::Unsupported(
                "Lagrangian Jacobians need a grid without a chart pole".into(),
            ));
        }
        let (cols, col_lo) = if grid.psi_periodic() {
            (grid.npsi, 0)
        } else {
            (grid.npsi + 2, -1)
        };
        Ok(LabelLattice {
            grid: Arc::clone(grid),
            rows: grid.nr + 2,
            cols,
            col_lo,
        })
    }

    #[inline]
    fn index(&self, i: isize, j: isize) -> usize {
        (i + 1) as usize * self.cols + (j - self.col_lo) as usize
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Label coordinates in lattice order.
    pub fn seeds(&self) -> Vec<[f64; 2]> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(self.len());
        let r0 = g.r_nodes[0] - g.hr;
        let p0 = g.psi_nodes[0];
        for i in 0..self.rows {
            let r = (r0 + i as f64 * g.hr).clamp(g.domain.r_min, g.domain.r_max);
            for j in 0..self.cols {
                let jj = j as isize + self.col_lo;
                out.push([r, p0 + jj as f64 * g.hpsi]);
            }
        }
        out
    }

    pub fn flow_map(&self) -> FlowMap {
        FlowMap::from_seeds(&self.grid, self.seeds()).expect("labels lie in the closed domain")
    }
}

/// A label map `x -> (gamma(x), theta + Theta(x))` sampled on a lattice.
#[derive(Debug, Clone)]
pub struct LabelMap {
    pub lattice: LabelLattice,
    pub positions: Vec<[f64; 2]>,
    pub theta: Vec<f64>,
}

/// `A[a][b] = d gamma^a / d x^b` (`a, b` over `r, psi`) and `d Theta / d x^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelJacobian {
    pub a: [[f64; 2]; 2],
    pub grad_theta: [f64; 2],
}

impl LabelJacobian {
    pub fn inverse_apply(&self, v: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.a;
        let det = a * d - b * c;
        [(d * v[0] - b * v[1]) / det, (-c * v[0] + a * v[1]) / det]
    }
}

impl LabelMap {
    pub fn identity(lattice: &LabelLattice) -> Self {
        LabelMap {
            lattice: lattice.clone(),
            positions: lattice.seeds(),
            theta: vec![0.0; lattice.len()],
        }
    }

    pub fn from_flow_map(lattice: &LabelLattice, map: &FlowMap) -> Self {
        debug_assert_eq!(map.len(), lattice.len());
        LabelMap {
            lattice: lattice.clone(),
            positions: map.positions.clone(),
            theta: map.theta_shift.clone(),
        }
    }

    /// Position and `theta` shift of label `(i, j)`, unwrapping periodic columns.
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> ([f64; 2], f64) {
        let lat = &self.lattice;
        if let Some(period) = lat.grid.psi_period() {
            let n = lat.cols as isize;
            let wraps = j.div_euclid(n);
            let k = lat.index(i, j.rem_euclid(n));
            let p = self.positions[k];
            ([p[0], p[1] + wraps as f64 * period], self.theta[k])
        } else {
            let k = lat.index(i, j);
            (self.positions[k], self.theta[k])
        }
    }

    /// Node position `gamma(x_ij)` for `i < nr`, `j < npsi`.
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        self.at(i as isize, j as isize).0
    }

    /// Centred-difference Jacobian at node `(i, j)`.
    pub fn jacobian(&self, i: usize, j: usize) -> LabelJacobian {
        let g = &self.lattice.grid;
        let (i, j) = (i as isize, j as isize);
        let (rp, tp) = self.at(i + 1, j);
        let (rm, tm) = self.at(i - 1, j);
        let (pp, sp) = self.at(i, j + 1);
        let (pm, sm) = self.at(i, j - 1);
        let (dr, dp) = (2.0 * g.hr, 2.0 * g.hpsi);
        LabelJacobian {
            a: [
                [(rp[0] - rm[0]) / dr, (pp[0] - pm[0]) / dp],
                [(rp[1] - rm[1]) / dr, (pp[1] - pm[1]) / dp],
            ],
            grad_theta: [(tp - tm) / dr, (sp - sm) / dp],
        }
    }
}

/// Coordinate components of an axisymmetric vector field at the nodes.
#[derive(Debug, Clone)]
pub struct NodeVectors {
    pub r: Vec<f64>,
    pub psi: Vec<f64>,
    pub theta: Vec<f64>,
}

impl NodeVectors {
    pub fn zeros(n: usize) -> Self {
        NodeVectors {
            r: vec![0.0; n],
            psi: vec![0.0; n],
            theta: vec![0.0; n],
        }
    }
}

/// Lowers vector components with the full metric at each node row.
pub fn lower(grid: &Grid, v: &NodeVectors) -> Result<NodeVectors> {
    let np = grid.npsi;
    let mut out = NodeVectors::zeros(grid.len());
    for i in 0..grid.nr {
        let m = grid.geometry.metric_tensor(grid.rows[i].r)?;
        for j in 0..np {
            let k = i * np + j;
            let x = [v.r[k], v.psi[k], v.theta[k]];
            let low: Vec<f64> = (0..3).map(|a| (0..3).map(|b| m[a][b] * x[b]).sum()).collect();
            out.r[k] = low[0];
            out.psi[k] = low[1];
            out.theta[k] = low[2];
        }
    }
    Ok(out)
}

/// Metric-lowered components of an axisymmetric field at an arbitrary point.
pub fn covector_at(grid: &Grid, vel: &MarkerVelocity, r: f64, psi: f64) -> Result<[f64; 3]> {
    let v = vel.polar(r, psi);
    let m = grid.geometry.metric_tensor(r.clamp(grid.domain.r_min, grid.domain.r_max))?;
    Ok([
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ])
}

/// `L^2`-orthogonal projection of a one-form onto axisymmetric divergence-free fields.
///
/// The swirl is the `theta` component; the stream function solves
/// `Delta_K f = s (d_r Y_psi - d_psi Y_r) / mu` with `Y` the horizontal part.
pub fn project_covector(grid: &Arc<Grid>, x: &NodeVectors) -> Result<AxisymField> {
    let np = grid.npsi;
    let n = grid.len();
    let mut yr = vec![0.0; n];
    let mut yp = vec![0.0; n];
    for k in 0..n {
        let q = grid.geometry.connection_coefficient(grid.rows[k / np].r);
        yr[k] = x.r[k];
        yp[k] = x.psi[k] - q * x.theta[k];
    }
    let odd = GhostRules {
        r_wall: Ghost::Extrapolate,
        axis: Ghost::Zero,
        psi_wall: Ghost::Extrapolate,
    };
    let even = GhostRules {
        r_wall: Ghost::Extrapolate,
        axis: Ghost::Even,
        psi_wall: Ghost::Extrapolate,
    };
    let pr = Padded::with_rules(grid, &yr, odd);
    let pp = Padded::with_rules(grid, &yp, even);
    let s = f64::from(grid.geometry.orientation);
    let mut rho = vec![0.0; n];
    for i in 0..grid.nr {
        let c = s * grid.rows[i].inv_mu;
        for j in 0..np {
            let (ii, jj) = (i as isize, j as isize);
            let d_r = (pp.get(ii + 1, jj) - pp.get(ii - 1, jj)) / (2.0 * grid.hr);
            let d_p = (pr.get(ii, jj + 1) - pr.get(ii, jj - 1)) / (2.0 * grid.hpsi);
            rho[i * np + j] = c * (d_r - d_p);
        }
    }
    let rho = ScalarField::with_values(grid, rho, crate::field::Parity::Even, crate::field::Boundary::Free)?;
    let stream = invert_k_laplacian(&rho)?;
    let swirl = ScalarField::swirl(grid, x.theta.clone())?;
    Ok(AxisymField { stream, swirl })
}

pub fn project_vector(grid: &Arc<Grid>, v: &NodeVectors) -> Result<AxisymField> {
    project_covector(grid, &lower(grid, v)?)
}

/// Node components `(u_r, u_psi, u_theta)` of an axisymmetric field.
pub fn node_vectors(u: &AxisymField) -> NodeVectors {
    let grid = u.grid();
    let v = crate::operators::skew_gradient(&u.stream);
    let np = grid.npsi;
    let theta = (0..grid.len())
        .map(|k| {
            let rg = &grid.rows[k / np];
            u.swirl.values[k] / rg.k_norm_sq - grid.geometry.connection_coefficient(rg.r) * v.u_psi[k]
        })
        .collect();
    NodeVectors {
        r: v.u_r,
        psi: v.u_psi,
        theta,
    }
}

/// `Ad_{gamma^{-1}} v (x) = D gamma(x)^{-1} v(gamma(x))`, projected.
pub fn pull_vector(forward: &LabelMap, v: &AxisymField) -> Result<AxisymField> {
    let grid = &forward.lattice.grid;
    let vel = MarkerVelocity::new(v);
    let np = grid.npsi;
    let mut out = NodeVectors::zeros(grid.len());
    for i in 0..grid.nr {
        for j in 0..np {
            let y = forward.node(i, j);
            let w = vel.polar(y[0], y[1]);
            let jac = forward.jacobian(i, j);
            let q = jac.inverse_apply([w[0], w[1]]);
            let k = i * np + j;
            out.r[k] = q[0];
            out.psi[k] = q[1];
            out.theta[k] = w[2] - jac.grad_theta[0] * q[0] - jac.grad_theta[1] * q[1];
        }
    }
    project_vector(grid, &out)
}

/// `P[eta^* v^flat]` for a label map `eta`.
pub fn pull_covector(eta: &LabelMap, v: &AxisymField) -> Result<AxisymField> {
    let grid = &eta.lattice.grid;
    let vel = MarkerVelocity::new(v);
    let np = grid.npsi;
    let mut out = NodeVectors::zeros(grid.len());
    for i in 0..grid.nr {
        for j in 0..np {
            let y = eta.node(i, j);
            let a = covector_at(grid, &vel, y[0], y[1])?;
            let jac = eta.jacobian(i, j);
            let k = i * np + j;
            out.r[k] = a[0] * jac.a[0][0] + a[1] * jac.a[1][0] + a[2] * jac.grad_theta[0];
            out.psi[k] = a[0] * jac.a[0][1] + a[1] * jac.a[1][1] + a[2] * jac.grad_theta[1];
            out.theta[k] = a[2];
        }
    }
    project_covector(grid, &out)
}
