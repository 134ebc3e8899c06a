//! Run configuration: one JSON document per run.
//!
//! Every field may be omitted. Geometry, domain, grid size and horizon
//! default to the natural setting of the chosen preset; see
//! [`RunConfig::flow_grid`] and [`RunConfig::orbit_grid`].

use std::f64::consts::TAU;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::GeometryKind;
use crate::grid::{Domain, Grid, PsiExtent};
use crate::presets::{FlowPreset, PresetParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Catalog name, e.g. `"EuclideanRotation"` or `"Fibration"`.
    pub geometry: Option<String>,
    /// Curvature index of a fibration: -1, 0 or 1.
    pub curvature: Option<i8>,
    /// Orientation sign of the quotient surface.
    pub orientation: i8,
    pub r_range: Option<[f64; 2]>,
    /// Periodic `psi` with this period; exclusive with `psi_range`.
    pub psi_period: Option<f64>,
    /// `psi` between two walls.
    pub psi_range: Option<[f64; 2]>,
    pub nr: Option<usize>,
    pub npsi: Option<usize>,
    /// Fixed time step; defaults to `cfl` times the admissible step.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub horizon: Option<f64>,
    /// Flow preset (`simulate`, `jacobi`) or orbit preset (`orbit`).
    pub preset: String,
    pub amplitude: f64,
    pub swirl: f64,
    pub width: f64,
    /// Steps between diagnostics rows.
    pub cadence: usize,
    /// Number of evenly spaced snapshot times after the initial one; 0 disables.
    pub snapshots: usize,
    pub markers: bool,
    pub jacobi: JacobiConfig,
    pub orbit: OrbitConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: None,
            curvature: None,
            orientation: 1,
            r_range: None,
            psi_period: None,
            psi_range: None,
            nr: None,
            npsi: None,
            dt: None,
            cfl: 0.8,
            horizon: None,
            preset: "zero".into(),
            amplitude: 1.0,
            swirl: 0.0,
            width: 0.25,
            cadence: 1,
            snapshots: 0,
            markers: true,
            jacobi: JacobiConfig::default(),
            orbit: OrbitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Shooting,
    Integral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JacobiConfig {
    pub basis_size: usize,
    /// Second basis size for the refinement comparison; 0 disables it.
    pub compare_basis_size: usize,
    /// Relative agreement required of detections under the comparison.
    pub stability: f64,
    pub route: Route,
    pub epsilon: f64,
    pub dt: f64,
    /// Spacing of the sampled times `t_k`.
    pub sample_dt: f64,
    /// Detection threshold on `sigma_min` relative to the early-time slope.
    pub threshold: f64,
    pub shooting_tolerance: f64,
    pub integral_tolerance: f64,
    pub max_iterations: usize,
    pub swirl_limit: f64,
    /// Basis frequency cutoffs for the tail-norm table; empty disables it.
    pub tail_thresholds: Vec<usize>,
    /// Swirl amplitudes of the small-swirl sweep; empty disables it.
    pub sweep: Vec<f64>,
}

impl Default for JacobiConfig {
    fn default() -> Self {
        JacobiConfig {
            basis_size: 8,
            compare_basis_size: 0,
            stability: 0.05,
            route: Route::Shooting,
            epsilon: 1e-4,
            dt: 0.02,
            sample_dt: 0.1,
            threshold: 1e-3,
            shooting_tolerance: 1e-4,
            integral_tolerance: 1e-8,
            max_iterations: 200,
            swirl_limit: 0.1,
            tail_thresholds: Vec::new(),
            sweep: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitConfig {
    pub area_tolerance: f64,
    pub circle_tolerance: f64,
    pub map_tolerance: f64,
    /// Level fractions of `sup g0`; `null` selects the default ladder.
    pub levels: Option<Vec<f64>>,
    /// Test radii; `null` selects radii inside the support of `g0`.
    pub radii: Option<Vec<f64>>,
    /// Shear of the `sheared-datum` preset.
    pub shear: f64,
    /// Exponent `p` of the `area-mismatched` preset `g0^p`.
    pub exponent: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            area_tolerance: 1e-3,
            circle_tolerance: 1e-3,
            map_tolerance: 5e-3,
            levels: None,
            radii: None,
            shear: 0.5,
            exponent: 1.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitPreset {
    Identical,
    ShearedDatum,
    AreaMismatched,
}

impl OrbitPreset {
    pub const ALL: [OrbitPreset; 3] = [OrbitPreset::Identical, OrbitPreset::ShearedDatum, OrbitPreset::AreaMismatched];

    pub fn name(self) -> &'static str {
        match self {
            OrbitPreset::Identical => "identical",
            OrbitPreset::ShearedDatum => "sheared-datum",
            OrbitPreset::AreaMismatched => "area-mismatched",
        }
    }

    pub fn from_name(name: &str) -> Option<OrbitPreset> {
        OrbitPreset::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// Radius of the default orbit disc.
pub const ORBIT_RADIUS: f64 = 4.5;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    /// Parses a JSON document; errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    /// Reads `path` (or starts from defaults) and applies `KEY=VALUE`
    /// overrides of top-level fields. Values are parsed as JSON, falling back
    /// to a plain string.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let located = |p: &Path, e: serde_json::Error| {
            config_err(format!("{}: line {} column {}: {e}", p.display(), e.line(), e.column()))
        };
        let mut doc: Value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
                // typed parse first so field errors keep their position
                let typed: RunConfig = serde_json::from_str(&text).map_err(|e| located(p, e))?;
                if overrides.is_empty() {
                    typed.validate()?;
                    return Ok(typed);
                }
                serde_json::from_str(&text).map_err(|e| located(p, e))?
            }
            None => Value::Object(Default::default()),
        };
        let obj = doc
            .as_object_mut()
            .ok_or_else(|| config_err("the config document must be a JSON object"))?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| config_err(format!("override {o:?} is not KEY=VALUE")))?;
            let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
            obj.insert(k.trim().to_string(), value);
        }
        let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks ranges of every numeric field; names the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(config_err(format!("{name} must be finite")))
            }
        };
        let count = |name: &str, v: usize| {
            if v > 0 {
                Ok(())
            } else {
                Err(config_err(format!("{name} must be positive")))
            }
        };
        positive("cfl", self.cfl)?;
        positive("width", self.width)?;
        finite("amplitude", self.amplitude)?;
        finite("swirl", self.swirl)?;
        count("cadence", self.cadence)?;
        if let Some(v) = self.dt {
            positive("dt", v)?;
        }
        if let Some(v) = self.horizon {
            positive("horizon", v)?;
        }
        if let Some(v) = self.psi_period {
            positive("psi_period", v)?;
        }
        for (name, v) in [("nr", self.nr), ("npsi", self.npsi)] {
            if let Some(v) = v {
                count(name, v)?;
            }
        }
        if self.psi_period.is_some() && self.psi_range.is_some() {
            return Err(config_err("psi_period and psi_range are mutually exclusive"));
        }
        if self.orientation != 1 && self.orientation != -1 {
            return Err(config_err(format!("orientation must be 1 or -1, got {}", self.orientation)));
        }
        if FlowPreset::from_name(&self.preset).is_none() && OrbitPreset::from_name(&self.preset).is_none() {
            return Err(config_err(format!("unknown preset {:?}", self.preset)));
        }
        let j = &self.jacobi;
        count("jacobi.basis_size", j.basis_size)?;
        count("jacobi.max_iterations", j.max_iterations)?;
        for (name, v) in [
            ("jacobi.stability", j.stability),
            ("jacobi.epsilon", j.epsilon),
            ("jacobi.dt", j.dt),
            ("jacobi.sample_dt", j.sample_dt),
            ("jacobi.threshold", j.threshold),
            ("jacobi.shooting_tolerance", j.shooting_tolerance),
            ("jacobi.integral_tolerance", j.integral_tolerance),
            ("jacobi.swirl_limit", j.swirl_limit),
        ] {
            positive(name, v)?;
        }
        if let Some(&t) = j.tail_thresholds.iter().find(|&&t| t == 0) {
            return Err(config_err(format!("jacobi.tail_thresholds must be positive, got {t}")));
        }
        for &a in &j.sweep {
            finite("jacobi.sweep", a)?;
        }
        let o = &self.orbit;
        for (name, v) in [
            ("orbit.area_tolerance", o.area_tolerance),
            ("orbit.circle_tolerance", o.circle_tolerance),
            ("orbit.map_tolerance", o.map_tolerance),
            ("orbit.exponent", o.exponent),
        ] {
            positive(name, v)?;
        }
        finite("orbit.shear", o.shear)?;
        for (name, list) in [("orbit.levels", &o.levels), ("orbit.radii", &o.radii)] {
            if let Some(l) = list {
                for &v in l {
                    positive(name, v)?;
                }
            }
        }
        Ok(())
    }

    pub fn flow_preset(&self) -> Result<FlowPreset> {
        FlowPreset::from_name(&self.preset)
            .ok_or_else(|| config_err(format!("{:?} is not a flow preset", self.preset)))
    }

    pub fn orbit_preset(&self) -> Result<OrbitPreset> {
        OrbitPreset::from_name(&self.preset)
            .ok_or_else(|| config_err(format!("{:?} is not an orbit preset", self.preset)))
    }

    pub fn params(&self) -> PresetParams {
        PresetParams {
            amplitude: self.amplitude,
            swirl: self.swirl,
            width: self.width,
        }
    }

    /// Horizon, defaulting per preset.
    pub fn horizon_for(&self, preset: FlowPreset) -> f64 {
        self.horizon.unwrap_or(match preset {
            FlowPreset::TranslationProfile => 5.0,
            FlowPreset::RigidRotation => TAU,
            _ => 1.0,
        })
    }

    fn geometry_kind(&self, fallback: GeometryKind) -> Result<GeometryKind> {
        let g = match &self.geometry {
            Some(name) => GeometryKind::from_name(name, self.curvature)?,
            None => fallback,
        };
        Ok(g.with_orientation(self.orientation))
    }

    fn domain(&self, fallback: Domain) -> Result<Domain> {
        let [r0, r1] = self.r_range.unwrap_or([fallback.r_min, fallback.r_max]);
        let psi = match (self.psi_period, self.psi_range) {
            (Some(period), _) => PsiExtent::Periodic { period },
            (_, Some([min, max])) => PsiExtent::Walls { min, max },
            _ => fallback.psi,
        };
        Domain::new(r0, r1, psi).map_err(|e| config_err(e.to_string()))
    }

    /// Grid of a flow run, 64 x 64 by default.
    pub fn flow_grid(&self) -> Result<(Arc<Grid>, FlowPreset)> {
        self.flow_grid_with(64)
    }

    /// Grid of a Jacobi-field run, 32 x 32 by default.
    pub fn jacobi_grid(&self) -> Result<(Arc<Grid>, FlowPreset)> {
        self.flow_grid_with(32)
    }

    fn flow_grid_with(&self, n: usize) -> Result<(Arc<Grid>, FlowPreset)> {
        let preset = self.flow_preset()?;
        let (geom, dom) = preset.natural_setting();
        let grid = Grid::new(
            self.geometry_kind(geom)?,
            self.domain(dom)?,
            self.nr.unwrap_or(n),
            self.npsi.unwrap_or(n),
        )
        .map_err(|e| config_err(e.to_string()))?;
        Ok((grid, preset))
    }

    /// Sample times `k * sample_dt` up to the horizon; `sample_dt` must be a
    /// whole number of integration steps.
    pub fn jacobi_times(&self, preset: FlowPreset) -> Result<Vec<f64>> {
        let j = &self.jacobi;
        let ratio = j.sample_dt / j.dt;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(config_err(format!(
                "jacobi.sample_dt = {} must be a multiple of jacobi.dt = {}",
                j.sample_dt, j.dt
            )));
        }
        let count = (self.horizon_for(preset) / j.sample_dt + 1e-9).floor() as usize;
        if count == 0 {
            return Err(config_err("horizon is shorter than jacobi.sample_dt"));
        }
        Ok((0..=count).map(|k| k as f64 * j.sample_dt).collect())
    }

    /// Grid of an orbit run: by default the flat disc of radius
    /// [`ORBIT_RADIUS`] on 128 x 256 nodes.
    pub fn orbit_grid(&self) -> Result<(Arc<Grid>, OrbitPreset)> {
        let preset = self.orbit_preset()?;
        let geom = self.geometry_kind(GeometryKind::fibration(0)?)?;
        let dom = self.domain(Domain::periodic(0.0, ORBIT_RADIUS, TAU)?)?;
        let grid = Grid::new(geom, dom, self.nr.unwrap_or(128), self.npsi.unwrap_or(256))
            .map_err(|e| config_err(e.to_string()))?;
        Ok((grid, preset))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
        let (g, p) = c.flow_grid().unwrap();
        assert_eq!((g.nr, g.npsi, p), (64, 64, FlowPreset::Zero));
        assert_eq!(c.horizon_for(FlowPreset::RigidRotation), TAU);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let e = RunConfig::from_json("{\n  \"nr\": 8,\n  \"nrr\": 9\n}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3") && msg.contains("nrr"), "{msg}");
        assert!(RunConfig::from_json(r#"{"jacobi": {"basis": 4}}"#).is_err());
    }

    #[test]
    fn overrides_and_validation() {
        let c = RunConfig::load(None, &["nr=12".into(), "preset=rigid-rotation".into(), "cfl=0.5".into()]).unwrap();
        assert_eq!((c.nr, c.preset.as_str(), c.cfl), (Some(12), "rigid-rotation", 0.5));
        assert_eq!(c.flow_grid().unwrap().0.domain.psi, PsiExtent::Periodic { period: 0.5 * PI });
        for bad in ["cfl=0", "preset=nope", "nr=0", "dt=-1", "orientation=2", "bogus=1"] {
            assert!(matches!(RunConfig::load(None, &[bad.into()]), Err(Error::Config(_))), "{bad}");
        }
        let c = RunConfig::load(None, &["preset=sheared-datum".into()]).unwrap();
        let (g, p) = c.orbit_grid().unwrap();
        assert_eq!((g.nr, g.npsi, p), (128, 256, OrbitPreset::ShearedDatum));
        assert!(c.flow_grid().is_err());
    }

    #[test]
    fn jacobi_sampling() {
        let c = RunConfig::load(None, &["preset=rigid-rotation".into()]).unwrap();
        let t = c.jacobi_times(FlowPreset::RigidRotation).unwrap();
        assert_eq!(t.len(), 63);
        assert!((t[62] - 6.2).abs() < 1e-12);
        let c = RunConfig::load(None, &[r#"jacobi={"dt":0.03}"#.into()]).unwrap();
        assert!(c.jacobi_times(FlowPreset::Zero).is_err());
    }

    #[test]
    fn fibration_needs_curvature() {
        let c = RunConfig::load(None, &[r#"geometry="Fibration""#.into(), "r_range=[0,2]".into()]).unwrap();
        assert!(c.flow_grid().is_err());
        let c = RunConfig::load(None, &[r#"geometry="Fibration""#.into(), "curvature=-1".into(), "psi_period=6.283185307179586".into()]).unwrap();
        assert!(c.flow_grid().unwrap().0.has_pole());
    }
}
