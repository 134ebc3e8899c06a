//! Coadjoint-orbit membership on the Heisenberg geometry.
//!
//! Fields `u = g e_1 + skew-grad f` on the plane. For radial, decreasing
//! `g0`, `u` lies on the orbit of `u0` exactly when the superlevel sets of
//! `g` and `g0` have equal areas and the circle averages of `Delta f`,
//! pulled back by an area-preserving `Phi` with `g o Phi = g0`, match those
//! of `Delta f0`.

pub mod area;
pub mod circle;
pub mod maps;
pub mod presets;
pub mod sampler;

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

pub use area::area_distribution;
pub use circle::{circle_average_condition, CircleOptions};
pub use maps::{Identity, LinearMap, PlanarMap, Rearrangement, Twist};
pub use sampler::PolarSampler;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::GeometryKind;
use crate::grid::{Domain, Grid};

/// Decay threshold on the rim of the truncated plane.
pub const DECAY_THRESHOLD: f64 = 1e-8;

/// Polar disc of radius `radius` for the Heisenberg quotient.
pub fn heisenberg_disc(radius: f64, nr: usize, npsi: usize) -> Result<Arc<Grid>> {
    Grid::new(GeometryKind::fibration(0)?, Domain::periodic(0.0, radius, TAU)?, nr, npsi)
}

#[derive(Debug, Clone)]
pub struct OrbitDatum {
    pub f: ScalarField,
    pub g: ScalarField,
    /// Whether both fields fall below [`DECAY_THRESHOLD`] on the outer row.
    pub decays: bool,
}

impl OrbitDatum {
    pub fn new(f: ScalarField, g: ScalarField) -> Result<Self> {
        f.same_grid(&g)?;
        let grid = &f.grid;
        if grid.geometry.curvature_index() != Some(0) || !grid.has_pole() {
            return Err(Error::Unsupported(
                "orbit data live on the Heisenberg quotient disc".into(),
            ));
        }
        let np = grid.npsi;
        let rim = (grid.nr - 1) * np..grid.nr * np;
        let decays = f.values[rim.clone()]
            .iter()
            .chain(&g.values[rim])
            .all(|v| v.abs() <= DECAY_THRESHOLD);
        if !decays {
            log::warn!("orbit datum does not decay below {DECAY_THRESHOLD:e} at the rim");
        }
        Ok(OrbitDatum { f, g, decays })
    }

    fn grid(&self) -> &Arc<Grid> {
        &self.f.grid
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// Relative tolerance on superlevel areas.
    pub area: f64,
    /// Absolute tolerance on circle-average residuals.
    pub circle: f64,
    /// Tolerance on `|det D Phi - 1|` for the candidate map.
    pub map: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            area: 1e-3,
            circle: 1e-3,
            map: 5e-3,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OrbitOptions {
    pub tolerances: Tolerances,
    /// Levels as fractions of `sup g0`; defaults to twelve evenly spaced.
    pub levels: Option<Vec<f64>>,
    /// Circle radii; defaults to twelve radii inside `{g0 > sup g0 / 20}`.
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AreaCheck {
    pub levels: Vec<f64>,
    pub reference: Vec<f64>,
    pub candidate: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CircleCheck {
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub member: bool,
    pub area: AreaCheck,
    pub circle: CircleCheck,
    pub decays: [bool; 2],
    pub tolerances: Tolerances,
}

const RAYS: usize = 256;

/// Checks that `g0` is radial and decreasing; returns its profile.
fn radial_profile(g0: &ScalarField) -> Result<sampler::RadialProfile> {
    let np = g0.grid.npsi;
    let scale = g0.max_abs().max(f64::MIN_POSITIVE);
    for i in 0..g0.grid.nr {
        let row = &g0.values[i * np..(i + 1) * np];
        let (lo, hi) = row.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if hi - lo > 1e-10 * scale {
            return Err(Error::Unsupported(format!(
                "g0 is not radial (row {i} varies by {:e})",
                hi - lo
            )));
        }
    }
    let profile = PolarSampler::new(g0).row_means();
    if profile.means.windows(2).any(|w| w[1] > w[0] + 1e-12 * scale) {
        return Err(Error::Unsupported("g0 is not decreasing in r".into()));
    }
    Ok(profile)
}

/// Decides whether `u` lies on the coadjoint orbit of `u0`.
pub fn orbit_membership(u0: &OrbitDatum, u: &OrbitDatum, opts: &OrbitOptions) -> Result<Verdict> {
    u0.f.same_grid(&u.f)?;
    let profile = radial_profile(&u0.g)?;
    let top = profile.at(0.0);
    let tol = opts.tolerances.clone();

    let fractions = opts
        .levels
        .clone()
        .unwrap_or_else(|| (1..=12).map(|k| k as f64 / 13.0).collect());
    let levels: Vec<f64> = fractions.iter().map(|q| q * top).collect();
    let reference = area_distribution(&u0.g, &levels);
    let candidate = area_distribution(&u.g, &levels);
    let residuals: Vec<f64> = reference
        .iter()
        .zip(&candidate)
        .map(|(a, b)| (a - b).abs() / a.max(f64::MIN_POSITIVE))
        .collect();
    let max_area = residuals.iter().copied().fold(0.0, f64::max);
    let area = AreaCheck {
        levels,
        reference,
        candidate,
        residuals,
        max_residual: max_area,
        tolerance: tol.area,
        pass: max_area <= tol.area,
    };

    let radii = opts.radii.clone().unwrap_or_else(|| {
        let grid = u0.grid();
        let outer = grid
            .r_nodes
            .iter()
            .copied()
            .find(|&r| profile.at(r) < top / 20.0)
            .unwrap_or(grid.domain.r_max);
        (1..=12).map(|k| outer * k as f64 / 13.0).collect()
    });
    let circle = if area.pass {
        let map = Rearrangement::new(PolarSampler::new(&u.g), profile, RAYS);
        let copts = CircleOptions {
            map_tolerance: tol.map,
            ..CircleOptions::default()
        };
        match circle_average_condition(&u.f, &u0.f, &map, &radii, copts) {
            Ok(res) => {
                let m = res.iter().copied().fold(0.0, f64::max);
                CircleCheck {
                    radii,
                    residuals: res,
                    max_residual: m,
                    tolerance: tol.circle,
                    pass: m <= tol.circle,
                    note: None,
                }
            }
            Err(Error::Precondition(msg)) => CircleCheck {
                radii,
                residuals: Vec::new(),
                max_residual: f64::NAN,
                tolerance: tol.circle,
                pass: false,
                note: Some(msg),
            },
            Err(e) => return Err(e),
        }
    } else {
        CircleCheck {
            radii,
            residuals: Vec::new(),
            max_residual: f64::NAN,
            tolerance: tol.circle,
            pass: false,
            note: Some("area condition failed; no area-preserving candidate map exists".into()),
        }
    };
    Ok(Verdict {
        member: area.pass && circle.pass,
        area,
        circle,
        decays: [u0.decays, u.decays],
        tolerances: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc() -> Arc<Grid> {
        heisenberg_disc(4.5, 128, 256).unwrap()
    }

    #[test]
    fn self_membership() {
        let g = disc();
        let u0 = presets::gaussian(&g).unwrap();
        assert!(u0.decays);
        let v = orbit_membership(&u0, &u0, &OrbitOptions::default()).unwrap();
        assert!(v.member, "{v:?}");
        assert!(v.area.max_residual < 1e-14);
        assert!(v.circle.max_residual < 1e-4, "{}", v.circle.max_residual);
    }

    #[test]
    fn sheared_member_and_mismatched_area() {
        let g = disc();
        let u0 = presets::gaussian(&g).unwrap();
        let sheared = presets::sheared(&g, 0.5).unwrap();
        let v = orbit_membership(&u0, &sheared, &OrbitOptions::default()).unwrap();
        assert!(v.member, "{:?} {:?}", v.area.max_residual, v.circle);
        let bad = presets::area_mismatched(&g, 1.1).unwrap();
        let v = orbit_membership(&u0, &bad, &OrbitOptions::default()).unwrap();
        assert!(!v.member && v.area.max_residual > 10.0 * v.area.tolerance);
        assert!(v.circle.note.is_some());
    }

    #[test]
    fn twist_leaves_circle_residuals_unchanged() {
        let g = disc();
        let u0 = presets::gaussian(&g).unwrap();
        let radii = [0.4, 0.9, 1.5];
        let opts = CircleOptions::default();
        let id = circle_average_condition(&u0.f, &u0.f, &Identity, &radii, opts).unwrap();
        let tw = circle_average_condition(&u0.f, &u0.f, &Twist(|r: f64| 0.7 * r * r), &radii, opts).unwrap();
        for (a, b) in id.iter().zip(&tw) {
            assert!((a - b).abs() < 1e-5, "{a:e} {b:e}");
        }
    }

    #[test]
    fn bump_breaks_the_circle_condition() {
        let g = disc();
        let u0 = presets::gaussian(&g).unwrap();
        let u = presets::bumped(&g, 1.0, 0.05).unwrap();
        let v = orbit_membership(&u0, &u, &OrbitOptions::default()).unwrap();
        assert!(v.area.pass && !v.circle.pass && !v.member);
    }

    #[test]
    fn rejects_non_radial_reference() {
        let g = disc();
        let u0 = presets::sheared(&g, 0.5).unwrap();
        assert!(matches!(
            orbit_membership(&u0, &u0, &OrbitOptions::default()),
            Err(Error::Unsupported(_))
        ));
    }
}
