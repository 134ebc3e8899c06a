//! Named initial data for the flow solver and the Jacobi-field probes.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use crate::dynamics::FlowState;
use crate::error::{Error, Result};
use crate::field::{Boundary, Parity, ScalarField};
use crate::geometry::{GeometryKind, Profile};
use crate::grid::{Domain, EndKind, Grid, PsiExtent};
use crate::operators::AxisymField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowPreset {
    Zero,
    RadialSteady,
    GaussianVortex,
    TranslationProfile,
    RigidRotation,
    PerturbedJet,
}

/// Amplitudes shared by the presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetParams {
    /// Scale of the stream function.
    pub amplitude: f64,
    /// Scale of the swirl.
    pub swirl: f64,
    /// Gaussian width as a fraction of the radial extent.
    pub width: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams {
            amplitude: 1.0,
            swirl: 0.0,
            width: 0.25,
        }
    }
}

impl FlowPreset {
    pub const ALL: [FlowPreset; 6] = [
        FlowPreset::Zero,
        FlowPreset::RadialSteady,
        FlowPreset::GaussianVortex,
        FlowPreset::TranslationProfile,
        FlowPreset::RigidRotation,
        FlowPreset::PerturbedJet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlowPreset::Zero => "zero",
            FlowPreset::RadialSteady => "radial-steady",
            FlowPreset::GaussianVortex => "gaussian-vortex",
            FlowPreset::TranslationProfile => "translation-profile",
            FlowPreset::RigidRotation => "rigid-rotation",
            FlowPreset::PerturbedJet => "perturbed-jet",
        }
    }

    pub fn from_name(name: &str) -> Option<FlowPreset> {
        FlowPreset::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Geometry and domain used when a config leaves them unset.
    pub fn natural_setting(self) -> (GeometryKind, Domain) {
        let geom = GeometryKind::doubly_warped(Profile::EuclideanRotation);
        let period = match self {
            FlowPreset::TranslationProfile | FlowPreset::RigidRotation | FlowPreset::PerturbedJet => 0.5 * PI,
            _ => 1.0,
        };
        (geom, Domain::periodic(0.0, 1.0, period).expect("valid domain"))
    }

    /// The base flows of the Jacobi probes live on a rotation about an axis
    /// bounded by a wall.
    fn needs_axis(self) -> bool {
        matches!(
            self,
            FlowPreset::TranslationProfile | FlowPreset::RigidRotation | FlowPreset::PerturbedJet
        )
    }

    pub fn build(self, grid: &Arc<Grid>, p: PresetParams) -> Result<AxisymField> {
        if self.needs_axis() && !(grid.inner == EndKind::Axis && grid.outer == EndKind::Wall) {
            return Err(Error::Config(format!(
                "preset {:?} needs a grid from an axis to a wall",
                self.name()
            )));
        }
        let kind = Probe::new(grid);
        let (a, s) = (p.amplitude, p.swirl);
        let x = kind.unit();
        let stream = |f: &dyn Fn(f64, f64) -> f64| ScalarField::from_fn(grid, Parity::Even, Boundary::Dirichlet, f);
        let swirl = |f: &dyn Fn(f64, f64) -> f64| {
            ScalarField::from_fn(grid, Parity::KNormSqScaled, Boundary::Free, |r, q| kind.k2(r) * f(r, q))
        };
        let u = match self {
            FlowPreset::Zero => AxisymField::zeros(grid),
            FlowPreset::RadialSteady => AxisymField {
                stream: stream(&|r, _| a * kind.envelope(r)),
                swirl: swirl(&|r, _| s * (1.0 - 0.5 * x(r).powi(2))),
            },
            FlowPreset::GaussianVortex => {
                let bump = kind.gaussian(p.width);
                AxisymField {
                    stream: stream(&|r, q| a * kind.envelope(r) * kind.psi_envelope(q) * bump(r, q)),
                    swirl: swirl(&|r, q| s * kind.envelope(r) * kind.psi_envelope(q) * bump(r, q)),
                }
            }
            FlowPreset::TranslationProfile => AxisymField {
                stream: stream(&|r, _| 0.5 * a * x(r).powi(2) * (1.0 - x(r).powi(2))),
                swirl: swirl(&|_, _| s),
            },
            FlowPreset::RigidRotation => AxisymField {
                stream: stream(&|_, _| 0.0),
                swirl: swirl(&|_, _| a),
            },
            FlowPreset::PerturbedJet => AxisymField {
                stream: stream(&|r, q| {
                    let w = TAU * q / grid.psi_period().unwrap_or(1.0);
                    a * x(r).powi(2) * (1.0 - x(r).powi(2)).powi(2) * (1.0 + 0.3 * w.cos())
                }),
                swirl: swirl(&|_, _| s),
            },
        };
        Ok(u)
    }

    pub fn initial_state(self, grid: &Arc<Grid>, p: PresetParams) -> Result<FlowState> {
        Ok(FlowState::from_field(0.0, self.build(grid, p)?))
    }
}

/// Shape helpers adapted to the ends of a grid.
struct Probe<'a> {
    grid: &'a Arc<Grid>,
}

impl<'a> Probe<'a> {
    fn new(grid: &'a Arc<Grid>) -> Self {
        Probe { grid }
    }

    /// Radius rescaled to `[0, 1]`.
    fn unit(&self) -> impl Fn(f64) -> f64 {
        let d = self.grid.domain;
        move |r| (r - d.r_min) / (d.r_max - d.r_min)
    }

    fn k2(&self, r: f64) -> f64 {
        self.grid.geometry.killing_data(r).map(|k| k.k_norm_sq).unwrap_or(0.0)
    }

    /// Smooth radial factor vanishing quadratically at walls and axes.
    fn envelope(&self, r: f64) -> f64 {
        let x = self.unit()(r);
        match (self.grid.inner, self.grid.outer) {
            (EndKind::Pole, EndKind::Pole) => (PI * x).cos(),
            (EndKind::Pole, _) => (1.0 - x * x).powi(2),
            (_, EndKind::Pole) => (x * (2.0 - x)).powi(2),
            _ => (x * (1.0 - x)).powi(2) * 16.0,
        }
    }

    fn psi_envelope(&self, q: f64) -> f64 {
        match self.grid.domain.psi {
            PsiExtent::Periodic { .. } => 1.0,
            PsiExtent::Walls { min, max } => {
                let y = (q - min) / (max - min);
                (y * (1.0 - y)).powi(2) * 16.0
            }
        }
    }

    /// Gaussian bump at the centre of the domain (off-centre on a disc).
    fn gaussian(&self, width: f64) -> impl Fn(f64, f64) -> f64 {
        let g = Arc::clone(self.grid);
        let d = g.domain;
        let extent = d.r_max - d.r_min;
        let w = width * extent;
        let pole = g.inner == EndKind::Pole;
        let rc = if pole { d.r_min + 0.3 * extent } else { 0.5 * (d.r_min + d.r_max) };
        let (qc, period) = match d.psi {
            PsiExtent::Periodic { period } => (0.0, Some(period)),
            PsiExtent::Walls { min, max } => (0.5 * (min + max), None),
        };
        move |r: f64, q: f64| {
            let d2 = if pole {
                let (x, y) = (r * q.cos() - rc * qc.cos(), r * q.sin() - rc * qc.sin());
                x * x + y * y
            } else {
                let dq = match period {
                    Some(l) => (PI * (q - qc) / l).sin() * l / PI,
                    None => q - qc,
                };
                (r - rc).powi(2) + dq * dq
            };
            (-d2 / (w * w)).exp()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::euler_rhs;

    #[test]
    fn names_round_trip() {
        for p in FlowPreset::ALL {
            assert_eq!(FlowPreset::from_name(p.name()), Some(p));
        }
        assert_eq!(FlowPreset::from_name("nope"), None);
    }

    #[test]
    fn radial_steady_has_zero_tendency() {
        let (geom, dom) = FlowPreset::RadialSteady.natural_setting();
        let g = Grid::new(geom, dom, 16, 16).unwrap();
        let p = PresetParams { swirl: 0.7, ..Default::default() };
        let s = FlowPreset::RadialSteady.initial_state(&g, p).unwrap();
        let (df, ds) = euler_rhs(&s).unwrap();
        assert!(df.max_abs() < 1e-12 && ds.max_abs() < 1e-12);
        assert!(s.sigma.max_abs() > 0.1);
    }

    #[test]
    fn jacobi_bases_need_an_axis() {
        let g = Grid::new(GeometryKind::fibration(0).unwrap(), Domain::periodic(0.0, 1.0, TAU).unwrap(), 8, 8).unwrap();
        assert!(FlowPreset::RigidRotation.build(&g, PresetParams::default()).is_err());
        let s = FlowPreset::GaussianVortex.build(&g, PresetParams::default()).unwrap();
        assert!(s.stream.max_abs() > 0.1);
    }
}
