//! The `Phi = Omega - Gamma` construction from transported basis fields.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::basis::PerturbationBasis;
use super::labels::{pull_covector, pull_vector, LabelLattice, LabelMap};
use super::shooting::{refine_dt, step_indices};
use crate::dynamics::{advance_flow_map_through, step, FlowState, MarkerVelocity};
use crate::error::{Error, Result};
use crate::operators::{coadjoint, AxisymField};

/// Base geodesic with velocities stored at every half quadrature step.
pub struct BaseHistory {
    pub dt: f64,
    lattice: LabelLattice,
    velocity: Vec<MarkerVelocity>,
    pub states: Vec<FlowState>,
}

impl BaseHistory {
    /// Integrates the base flow for `steps` quadrature steps of length `dt`.
    pub fn compute(u0: &AxisymField, dt: f64, steps: usize) -> Result<Self> {
        let lattice = LabelLattice::new(u0.grid())?;
        let h = 0.5 * dt;
        let mut state = FlowState::from_field(0.0, u0.clone());
        let mut velocity = vec![MarkerVelocity::new(u0)];
        let mut states = vec![state.clone()];
        for n in 0..2 * steps {
            state = step(&state, h).map_err(|e| Error::Geodesic(format!("half step {n}: {e}")))?;
            velocity.push(MarkerVelocity::new(&state.field()));
            if n % 2 == 1 {
                states.push(state.clone());
            }
        }
        Ok(BaseHistory {
            dt,
            lattice,
            velocity,
            states,
        })
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    fn marker_step(&self, map: &mut crate::dynamics::FlowMap, k: usize, forward: bool) {
        let v = &self.velocity;
        if forward {
            advance_flow_map_through(map, [&v[2 * k], &v[2 * k + 1], &v[2 * k + 1], &v[2 * k + 2]], self.dt);
        } else {
            advance_flow_map_through(map, [&v[2 * k], &v[2 * k - 1], &v[2 * k - 1], &v[2 * k - 2]], -self.dt);
        }
    }

    /// `gamma(t_k)` for every quadrature node.
    pub fn forward_maps(&self) -> Vec<LabelMap> {
        let mut map = self.lattice.flow_map();
        let mut out = vec![LabelMap::from_flow_map(&self.lattice, &map)];
        for k in 0..self.steps() {
            self.marker_step(&mut map, k, true);
            out.push(LabelMap::from_flow_map(&self.lattice, &map));
        }
        out
    }

    /// `gamma(t_k)^{-1}`, by integrating markers backwards from `t_k` to 0.
    pub fn inverse_maps(&self) -> Vec<LabelMap> {
        (0..=self.steps())
            .into_par_iter()
            .map(|j| {
                let mut map = self.lattice.flow_map();
                for k in (1..=j).rev() {
                    self.marker_step(&mut map, k, false);
                }
                LabelMap::from_flow_map(&self.lattice, &map)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegralOptions {
    /// Output spacing; the quadrature step is refined below it as the CFL bound requires.
    pub dt: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest admissible `max |sigma|` of the base flow.
    pub swirl_limit: f64,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        IntegralOptions {
            dt: 0.02,
            tolerance: 1e-8,
            max_iterations: 200,
            swirl_limit: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegralSplit {
    pub times: Vec<f64>,
    pub omega: Vec<DMatrix<f64>>,
    pub gamma: Vec<DMatrix<f64>>,
    pub phi: Vec<DMatrix<f64>>,
    /// Smallest eigenvalue of the symmetric part of each `Omega`.
    pub omega_min_eigenvalue: Vec<f64>,
    pub iterations: usize,
}

/// Transport operator `T_k w = Ad_{gamma_k^{-1}} P (gamma_k^{-1})^* w^flat`.
struct Transport {
    forward: Vec<LabelMap>,
    inverse: Vec<LabelMap>,
}

impl Transport {
    fn apply(&self, k: usize, w: &AxisymField) -> Result<AxisymField> {
        pull_vector(&self.forward[k], &pull_covector(&self.inverse[k], w)?)
    }
}

fn cumulative_trapezoid(values: &[AxisymField], dt: f64) -> Vec<AxisymField> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = AxisymField::zeros(values[0].grid());
    out.push(acc.clone());
    for pair in values.windows(2) {
        acc.axpy(0.5 * dt, &pair[0]);
        acc.axpy(0.5 * dt, &pair[1]);
        out.push(acc.clone());
    }
    out
}

fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// `Omega(t)`, `Gamma(t)` and `Phi = Omega - Gamma` on `times`.
///
/// `Phi` solves `Phi(t) w = Omega(t) w - int_0^t T_s ad*_{Phi(s) w} u0 ds`
/// by Picard iteration started from `Omega`.
pub fn phi_by_integral(
    u0: &AxisymField,
    basis: &PerturbationBasis,
    times: &[f64],
    opts: IntegralOptions,
) -> Result<IntegralSplit> {
    let swirl = u0.swirl.max_abs();
    if swirl > opts.swirl_limit {
        return Err(Error::Precondition(format!(
            "integral route needs a swirl-free or small-swirl base flow (max |sigma| = {swirl:e})"
        )));
    }
    step_indices(times, opts.dt)?;
    let dt = 2.0 * refine_dt(u0, 0.5 * opts.dt, 0.8);
    let outputs = step_indices(times, dt)?;
    let steps = outputs.iter().copied().max().unwrap_or(0);
    let history = BaseHistory::compute(u0, dt, steps)?;
    let transport = Transport {
        forward: history.forward_maps(),
        inverse: history.inverse_maps(),
    };
    let n = basis.len();
    let scale = 1.0 / (n as f64).sqrt();

    type Column = (Vec<DVector<f64>>, Vec<DVector<f64>>, usize);
    let columns: Vec<Column> = basis
        .modes
        .par_iter()
        .map(|w| -> Result<Column> {
            let tw: Vec<AxisymField> = (0..=steps).map(|k| transport.apply(k, w)).collect::<Result<_>>()?;
            let omega = cumulative_trapezoid(&tw, dt);
            let project = |fields: &[AxisymField]| -> Vec<DVector<f64>> {
                outputs.iter().map(|&k| basis.coefficients(&fields[k])).collect()
            };
            let omega_c = project(&omega);
            let mut phi = omega.clone();
            let mut phi_c = omega_c.clone();
            let mut gamma_c = vec![DVector::zeros(n); outputs.len()];
            let (mut last, mut prev_update) = (f64::INFINITY, f64::INFINITY);
            for it in 1..=opts.max_iterations {
                let integrand: Vec<AxisymField> = (0..=steps)
                    .map(|k| transport.apply(k, &coadjoint(&phi[k], u0)?))
                    .collect::<Result<_>>()?;
                let gamma = cumulative_trapezoid(&integrand, dt);
                let next: Vec<AxisymField> = omega.iter().zip(&gamma).map(|(o, g)| o.sub(g)).collect();
                let next_c = project(&next);
                let (mut update, mut size) = (0.0f64, 0.0f64);
                for (a, b) in next_c.iter().zip(&phi_c) {
                    update = update.max((a - b).norm());
                    size = size.max(a.norm());
                }
                gamma_c = project(&gamma);
                phi = next;
                phi_c = next_c;
                if update < opts.tolerance * scale * size.max(1.0) {
                    return Ok((omega_c, gamma_c, it));
                }
                prev_update = last;
                last = update;
            }
            Err(Error::Volterra {
                iterations: opts.max_iterations,
                update: last,
                contraction: last / prev_update,
            })
        })
        .collect::<Result<_>>()?;

    let matrix = |k: usize, pick: &dyn Fn(&Column) -> &Vec<DVector<f64>>| {
        DMatrix::from_fn(n, n, |i, j| pick(&columns[j])[k][i])
    };
    let omega: Vec<DMatrix<f64>> = (0..outputs.len()).map(|k| matrix(k, &|c| &c.0)).collect();
    let gamma: Vec<DMatrix<f64>> = (0..outputs.len()).map(|k| matrix(k, &|c| &c.1)).collect();
    let phi = omega.iter().zip(&gamma).map(|(o, g)| o - g).collect();
    let omega_min_eigenvalue = omega.iter().map(min_symmetric_eigenvalue).collect();
    Ok(IntegralSplit {
        times: times.to_vec(),
        omega,
        gamma,
        phi,
        omega_min_eigenvalue,
        iterations: columns.iter().map(|c| c.2).max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GeometryKind, Profile};
    use crate::grid::{Domain, Grid};
    use crate::linearized::BasisSpec;
    use std::f64::consts::PI;

    #[test]
    fn zero_flow_has_trivial_split() {
        let g = Grid::new(
            GeometryKind::doubly_warped(Profile::EuclideanRotation),
            Domain::periodic(0.0, 1.0, 0.5 * PI).unwrap(),
            24,
            24,
        )
        .unwrap();
        let basis = PerturbationBasis::graded(&g, 4, BasisSpec::JACOBI).unwrap();
        let s = phi_by_integral(&AxisymField::zeros(&g), &basis, &[0.0, 0.5], IntegralOptions::default()).unwrap();
        assert!(s.gamma[1].norm() < 1e-12);
        assert!((&s.omega[1] - DMatrix::identity(4, 4) * 0.5).norm() < 2e-2);
        assert!(s.phi[0].norm() < 1e-14);
        assert!(s.omega_min_eigenvalue[1] > 0.45);
    }
}
