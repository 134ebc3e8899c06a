//! Spectral analysis of `Phi(t)`: conjugate-time detection, swirl sweeps
//! and tail norms of the coadjoint action.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::basis::PerturbationBasis;
use super::shooting::{phi_by_shooting, JacobiHistory, ShootingOptions};
use crate::error::Result;
use crate::operators::{coadjoint, inner_product, AxisymField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub det_sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub t: f64,
    pub sigma_min: f64,
    /// Whether `det Phi` itself changes sign across the bracketing interval.
    pub det_sign_change: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub trace: Vec<TraceRow>,
    /// `lim sigma_min(Phi_t) / t`, estimated at the first positive time.
    pub slope: f64,
    pub detections: Vec<Detection>,
}

impl ScanReport {
    pub const CSV_HEADER: &'static str = "t,sigma_min,sigma_max,det_sign";

    pub fn csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.trace {
            s.push_str(&format!("{:.6},{:.12e},{:.12e},{}\n", r.t, r.sigma_min, r.sigma_max, r.det_sign));
        }
        s
    }

    /// Smallest `sigma_min(t) / t` over positive times.
    pub fn min_relative_singular_value(&self) -> f64 {
        self.trace
            .iter()
            .filter(|r| r.t > 0.0)
            .map(|r| r.sigma_min / r.t)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// A crossing counts when `sigma_min < threshold * slope` at the refined time.
    pub threshold: f64,
    pub bisection_steps: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            threshold: 1e-3,
            bisection_steps: 60,
        }
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Cubic Lagrange interpolation of `Phi` on the four nodes around `t`.
fn interpolate(h: &JacobiHistory, t: f64) -> DMatrix<f64> {
    let n = h.times.len();
    if n < 4 {
        let k = h.times.partition_point(|&s| s <= t).clamp(1, n - 1);
        let (t0, t1) = (h.times[k - 1], h.times[k]);
        let w = (t - t0) / (t1 - t0);
        return &h.phi[k - 1] * (1.0 - w) + &h.phi[k] * w;
    }
    let k = h.times.partition_point(|&s| s <= t);
    let start = k.saturating_sub(2).min(n - 4);
    let nodes = start..start + 4;
    let mut out = DMatrix::zeros(h.phi[0].nrows(), h.phi[0].ncols());
    for a in nodes.clone() {
        let mut w = 1.0;
        for b in nodes.clone() {
            if a != b {
                w *= (t - h.times[b]) / (h.times[a] - h.times[b]);
            }
        }
        out += &h.phi[a] * w;
    }
    out
}

fn smallest_pair(m: &DMatrix<f64>) -> (f64, DVector<f64>, DVector<f64>) {
    let svd = m.clone().svd(true, true);
    let k = svd.singular_values.imin();
    let u = svd.u.as_ref().expect("left vectors").column(k).into_owned();
    let v = svd.v_t.as_ref().expect("right vectors").row(k).transpose();
    (svd.singular_values[k], u, v)
}

/// Singular-value trace and conjugate-time candidates of a `Phi` history.
///
/// A crossing is bracketed where the branch `u^T Phi(t) v` of the smallest
/// singular triplet `(u, v)` at the left node changes sign; it is located by
/// bisection on the interpolated history and accepted when `sigma_min` at the
/// refined time is below `threshold` times the initial slope.
pub fn conjugate_scan(h: &JacobiHistory, opts: ScanOptions) -> ScanReport {
    let trace: Vec<TraceRow> = h
        .times
        .iter()
        .zip(&h.phi)
        .map(|(&t, p)| {
            let sv = p.singular_values();
            TraceRow {
                t,
                sigma_min: sv.min(),
                sigma_max: sv.max(),
                det_sign: sign(p.determinant()),
            }
        })
        .collect();
    let slope = trace
        .iter()
        .find(|r| r.t > 0.0)
        .map(|r| r.sigma_min / r.t)
        .unwrap_or(0.0);
    let mut detections: Vec<Detection> = Vec::new();
    for k in 0..h.times.len().saturating_sub(1) {
        if h.times[k] <= 0.0 {
            continue;
        }
        let (_, u, v) = smallest_pair(&h.phi[k]);
        let branch = |t: f64| u.dot(&(interpolate(h, t) * &v));
        let (mut a, mut b) = (h.times[k], h.times[k + 1]);
        let (mut fa, fb) = (branch(a), branch(b));
        if sign(fa) * sign(fb) >= 0 {
            continue;
        }
        for _ in 0..opts.bisection_steps {
            let m = 0.5 * (a + b);
            let fm = branch(m);
            if sign(fm) == sign(fa) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        let t = 0.5 * (a + b);
        let sigma_min = interpolate(h, t).singular_values().min();
        if sigma_min < opts.threshold * slope {
            detections.push(Detection {
                t,
                sigma_min,
                det_sign_change: trace[k].det_sign * trace[k + 1].det_sign < 0,
            });
        }
    }
    ScanReport {
        trace,
        slope,
        detections,
    }
}

/// `true` when every detection of `coarse` lies within `rel` of one in `fine`.
pub fn detections_stable(coarse: &[Detection], fine: &[Detection], rel: f64) -> bool {
    coarse
        .iter()
        .all(|c| fine.iter().any(|f| (f.t - c.t).abs() <= rel * c.t))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub amplitude: f64,
    pub sigma_min: Option<f64>,
    pub error: Option<String>,
}

/// `sigma_min(Phi_t)` along the family `u0 + a * swirl`, one row per amplitude.
pub fn small_swirl_continuity(
    u0: &AxisymField,
    swirl: &AxisymField,
    amplitudes: &[f64],
    basis: &PerturbationBasis,
    t: f64,
    opts: ShootingOptions,
) -> Vec<SweepRow> {
    amplitudes
        .iter()
        .map(|&a| {
            let mut u = u0.clone();
            u.axpy(a, swirl);
            match phi_by_shooting(&u, basis, &[t], ShootingOptions { dt: t / (t / opts.dt).ceil(), ..opts }) {
                Ok(h) => SweepRow {
                    amplitude: a,
                    sigma_min: Some(h.phi[0].singular_values().min()),
                    error: None,
                },
                Err(e) => SweepRow {
                    amplitude: a,
                    sigma_min: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Operator norm of `w -> ad*_w u0` on the span of basis modes above each
/// frequency threshold.
pub fn tail_norms(u0: &AxisymField, basis: &PerturbationBasis, thresholds: &[usize]) -> Result<Vec<(usize, f64)>> {
    let images: Vec<AxisymField> = basis.modes.iter().map(|b| coadjoint(b, u0)).collect::<Result<_>>()?;
    Ok(thresholds
        .iter()
        .map(|&th| {
            let tail = basis.tail(th);
            let gram = DMatrix::from_fn(tail.len(), tail.len(), |i, j| inner_product(&images[tail[i]], &images[tail[j]]));
            let top = if tail.is_empty() {
                0.0
            } else {
                SymmetricEigen::new(gram).eigenvalues.max().max(0.0).sqrt()
            };
            (th, top)
        })
        .collect())
}
