//! Jacobi fields by differentiating perturbed geodesics.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::basis::PerturbationBasis;
use super::labels::{project_vector, LabelLattice, LabelMap, NodeVectors};
use crate::dynamics::{admissible_dt, advance_flow_map, step_with_stages, FlowState};
use crate::error::{Error, Result};
use crate::operators::AxisymField;

/// Matrices `Phi(t_k)` in a basis, one per output time.
#[derive(Debug, Clone)]
pub struct JacobiHistory {
    pub times: Vec<f64>,
    pub phi: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    pub epsilon: f64,
    /// Output spacing; the geodesic step is refined below it to satisfy the CFL bound.
    pub dt: f64,
    /// Bound on `|Phi(eps) - Phi(eps/2)| / |Phi(eps/2)|` in the Frobenius norm.
    pub tolerance: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            epsilon: 1e-4,
            dt: 0.02,
            tolerance: 1e-4,
        }
    }
}

/// `dt / k` for the smallest integer `k` keeping `dt / k` within
/// `safety` times the admissible step of `u0`.
pub fn refine_dt(u0: &AxisymField, dt: f64, safety: f64) -> f64 {
    let adm = safety * admissible_dt(&FlowState::from_field(0.0, u0.clone()));
    if dt <= adm {
        dt
    } else {
        dt / (dt / adm).ceil()
    }
}

/// Step indices of `times` on a uniform `dt` lattice.
pub fn step_indices(times: &[f64], dt: f64) -> Result<Vec<usize>> {
    let mut prev = 0usize;
    times
        .iter()
        .map(|&t| {
            let k = (t / dt).round();
            if !(t >= 0.0) || (k * dt - t).abs() > 1e-9 * t.abs().max(1.0) {
                return Err(Error::Precondition(format!(
                    "output time {t} is not a multiple of dt = {dt}"
                )));
            }
            let k = k as usize;
            if k < prev {
                return Err(Error::Precondition("output times must be sorted".into()));
            }
            prev = k;
            Ok(k)
        })
        .collect()
}

/// Integrates a geodesic with coupled markers, recording label maps at `steps`.
pub fn record_geodesic(
    u0: &AxisymField,
    lattice: &LabelLattice,
    dt: f64,
    steps: &[usize],
) -> Result<Vec<LabelMap>> {
    let mut state = FlowState::from_field(0.0, u0.clone());
    let mut map = lattice.flow_map();
    let mut out = Vec::with_capacity(steps.len());
    let mut n = 0usize;
    for &target in steps {
        while n < target {
            let (next, stages) = step_with_stages(&state, dt)
                .map_err(|e| Error::Geodesic(format!("step {n}: {e}")))?;
            advance_flow_map(&mut map, &stages);
            state = next;
            n += 1;
        }
        out.push(LabelMap::from_flow_map(lattice, &map));
    }
    Ok(out)
}

/// `D gamma^{-1} (gamma_+ - gamma_-) / (2 eps)` at the nodes, projected.
fn difference_field(base: &LabelMap, plus: &LabelMap, minus: &LabelMap, eps: f64) -> Result<AxisymField> {
    let grid = &base.lattice.grid;
    let np = grid.npsi;
    let mut v = NodeVectors::zeros(grid.len());
    for i in 0..grid.nr {
        for j in 0..np {
            let (p, tp) = plus.at(i as isize, j as isize);
            let (m, tm) = minus.at(i as isize, j as isize);
            let d = [(p[0] - m[0]) / (2.0 * eps), (p[1] - m[1]) / (2.0 * eps)];
            let jac = base.jacobian(i, j);
            let q = jac.inverse_apply(d);
            let k = i * np + j;
            v.r[k] = q[0];
            v.psi[k] = q[1];
            v.theta[k] = (tp - tm) / (2.0 * eps) - jac.grad_theta[0] * q[0] - jac.grad_theta[1] * q[1];
        }
    }
    project_vector(grid, &v)
}

/// Largest `|a_k - b_k|` and the largest norms of each history.
fn frobenius_gap(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> (f64, f64, f64) {
    a.iter().zip(b).fold((0.0, 0.0, 0.0), |(d, nx, ny), (x, y)| {
        ((x - y).norm().max(d), x.norm().max(nx), y.norm().max(ny))
    })
}

/// `Phi(t)` on `times` by central differences of perturbed geodesics.
///
/// The result is the Richardson combination of steps `eps` and `eps/2`;
/// their largest disagreement must stay below `opts.tolerance` times the
/// largest norm over the history.
pub fn phi_by_shooting(
    u0: &AxisymField,
    basis: &PerturbationBasis,
    times: &[f64],
    opts: ShootingOptions,
) -> Result<JacobiHistory> {
    let grid = u0.grid();
    let lattice = LabelLattice::new(grid)?;
    step_indices(times, opts.dt)?;
    let dt = refine_dt(u0, opts.dt, 0.8);
    let steps = step_indices(times, dt)?;
    let base = record_geodesic(u0, &lattice, dt, &steps)?;
    let eps = opts.epsilon;
    let n = basis.len();
    // columns[j][s][k]: coefficient vector for column j, step size s, time k
    let columns: Vec<[Vec<nalgebra::DVector<f64>>; 2]> = basis
        .modes
        .par_iter()
        .map(|b| {
            let run = |a: f64| {
                let mut u = u0.clone();
                u.axpy(a, b);
                record_geodesic(&u, &lattice, dt, &steps)
            };
            let mut out: [Vec<nalgebra::DVector<f64>>; 2] = [Vec::new(), Vec::new()];
            for (s, e) in [eps, 0.5 * eps].into_iter().enumerate() {
                let (plus, minus) = (run(e)?, run(-e)?);
                for k in 0..steps.len() {
                    let v = difference_field(&base[k], &plus[k], &minus[k], e)?;
                    out[s].push(basis.coefficients(&v));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let assemble = |s: usize| -> Vec<DMatrix<f64>> {
        (0..steps.len())
            .map(|k| DMatrix::from_fn(n, n, |i, j| columns[j][s][k][i]))
            .collect()
    };
    let (coarse, fine) = (assemble(0), assemble(1));
    let (difference, norm_eps, norm_half) = frobenius_gap(&coarse, &fine);
    if difference > opts.tolerance * norm_half.max(f64::MIN_POSITIVE) {
        return Err(Error::EpsilonNonconvergence {
            difference,
            norm_eps,
            norm_half,
        });
    }
    let phi = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (f * 4.0 - c) / 3.0)
        .collect();
    Ok(JacobiHistory {
        times: times.to_vec(),
        phi,
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
    fn zero_flow_gives_t_times_identity() {
        let g = Grid::new(
            GeometryKind::doubly_warped(Profile::EuclideanRotation),
            Domain::periodic(0.0, 1.0, 0.5 * PI).unwrap(),
            32,
            32,
        )
        .unwrap();
        let basis = PerturbationBasis::graded(&g, 4, BasisSpec::JACOBI).unwrap();
        let u0 = AxisymField::zeros(&g);
        let h = phi_by_shooting(&u0, &basis, &[0.0, 0.2, 0.4], ShootingOptions::default()).unwrap();
        for (t, phi) in h.times.iter().zip(&h.phi) {
            let err = (phi - DMatrix::identity(4, 4) * *t).norm();
            assert!(err < 2e-2 * t.max(1e-3), "t = {t}: {err:e}");
        }
    }

    #[test]
    fn rejects_off_lattice_times() {
        assert!(step_indices(&[0.1, 0.25], 0.1).is_err());
        assert_eq!(step_indices(&[0.0, 0.3], 0.1).unwrap(), vec![0, 3]);
    }
}
