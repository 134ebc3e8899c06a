//! Catalog of symmetric 3-manifold geometries.
//!
//! Every geometry is written in a chart `(r, psi, theta)` with the Killing
//! field `K = d/dtheta`. Doubly-warped geometries carry the metric
//! `dr^2 + alpha(r)^2 dpsi^2 + beta(r)^2 dtheta^2`; fibrations over the
//! constant-curvature surfaces `N_k` carry
//! `dr^2 + s_k(r)^2 dpsi^2 + (dtheta + 2 s_k(r/2)^2 dpsi)^2`. In both cases
//! the quotient surface has warp `alpha` and the fluid sees the area weight
//! `mu = alpha * beta`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Doubly-warped profiles of the Thurston geometries with `phi = 0`.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Profile {
    EuclideanTranslation,
    EuclideanRotation,
    Sphere3Rotation,
    H3Rotation,
    H3HyperbolicTranslation,
    H3ParabolicTranslation,
    S2xR_Translation,
    S2xR_Rotation,
    H2xR_Translation,
    H2xR_Hyperbolic,
    H2xR_Parabolic,
    Sol,
}

impl Profile {
    pub const ALL: [Profile; 12] = [
        Profile::EuclideanTranslation,
        Profile::EuclideanRotation,
        Profile::Sphere3Rotation,
        Profile::H3Rotation,
        Profile::H3HyperbolicTranslation,
        Profile::H3ParabolicTranslation,
        Profile::S2xR_Translation,
        Profile::S2xR_Rotation,
        Profile::H2xR_Translation,
        Profile::H2xR_Hyperbolic,
        Profile::H2xR_Parabolic,
        Profile::Sol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::EuclideanTranslation => "EuclideanTranslation",
            Profile::EuclideanRotation => "EuclideanRotation",
            Profile::Sphere3Rotation => "Sphere3Rotation",
            Profile::H3Rotation => "H3Rotation",
            Profile::H3HyperbolicTranslation => "H3HyperbolicTranslation",
            Profile::H3ParabolicTranslation => "H3ParabolicTranslation",
            Profile::S2xR_Translation => "S2xR_Translation",
            Profile::S2xR_Rotation => "S2xR_Rotation",
            Profile::H2xR_Translation => "H2xR_Translation",
            Profile::H2xR_Hyperbolic => "H2xR_Hyperbolic",
            Profile::H2xR_Parabolic => "H2xR_Parabolic",
            Profile::Sol => "Sol",
        }
    }

    pub fn from_name(name: &str) -> Option<Profile> {
        Profile::ALL.into_iter().find(|p| p.name() == name)
    }

    fn warps(self) -> (Warp, Warp) {
        use Warp::*;
        match self {
            Profile::EuclideanTranslation => (One, One),
            Profile::EuclideanRotation => (One, Linear),
            Profile::Sphere3Rotation => (Cos, Sin),
            Profile::H3Rotation => (Cosh, Sinh),
            Profile::H3HyperbolicTranslation => (Sinh, Cosh),
            Profile::H3ParabolicTranslation => (Exp(-2.0), Exp(-2.0)),
            Profile::S2xR_Translation => (Sin, One),
            Profile::S2xR_Rotation => (One, Sin),
            Profile::H2xR_Translation => (Sinh, One),
            Profile::H2xR_Hyperbolic => (One, Exp(-2.0)),
            Profile::H2xR_Parabolic => (Exp(-2.0), One),
            Profile::Sol => (Exp(-2.0), Exp(2.0)),
        }
    }

    /// Rotations have `theta` on a circle and `beta` odd through `r = 0`.
    pub fn is_rotation(self) -> bool {
        matches!(
            self,
            Profile::EuclideanRotation
                | Profile::Sphere3Rotation
                | Profile::H3Rotation
                | Profile::S2xR_Rotation
        )
    }

    fn radial_range(self) -> (f64, f64) {
        let inf = f64::INFINITY;
        match self {
            Profile::EuclideanRotation
            | Profile::H3Rotation
            | Profile::H3HyperbolicTranslation
            | Profile::H2xR_Translation => (0.0, inf),
            Profile::Sphere3Rotation => (0.0, FRAC_PI_2),
            Profile::S2xR_Translation | Profile::S2xR_Rotation => (0.0, PI),
            Profile::EuclideanTranslation
            | Profile::H3ParabolicTranslation
            | Profile::H2xR_Hyperbolic
            | Profile::H2xR_Parabolic
            | Profile::Sol => (-inf, inf),
        }
    }
}

/// Elementary warp functions appearing in the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Warp {
    One,
    Linear,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp(f64),
}

impl Warp {
    /// Value and first two derivatives.
    fn jet(self, r: f64) -> [f64; 3] {
        match self {
            Warp::One => [1.0, 0.0, 0.0],
            Warp::Linear => [r, 1.0, 0.0],
            Warp::Sin => [r.sin(), r.cos(), -r.sin()],
            Warp::Cos => [r.cos(), -r.sin(), -r.cos()],
            Warp::Sinh => [r.sinh(), r.cosh(), r.sinh()],
            Warp::Cosh => [r.cosh(), r.sinh(), r.cosh()],
            Warp::Exp(a) => {
                let e = (a * r).exp();
                [e, a * e, a * a * e]
            }
        }
    }
}

/// Curvature index of the quotient surface of a fibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Curvature {
    Sphere,
    Flat,
    Hyperbolic,
}

impl Curvature {
    pub fn from_index(k: i8) -> Option<Curvature> {
        match k {
            1 => Some(Curvature::Sphere),
            0 => Some(Curvature::Flat),
            -1 => Some(Curvature::Hyperbolic),
            _ => None,
        }
    }

    pub fn index(self) -> i8 {
        match self {
            Curvature::Sphere => 1,
            Curvature::Flat => 0,
            Curvature::Hyperbolic => -1,
        }
    }

    fn warp(self) -> Warp {
        match self {
            Curvature::Sphere => Warp::Sin,
            Curvature::Flat => Warp::Linear,
            Curvature::Hyperbolic => Warp::Sinh,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    DoublyWarped(Profile),
    Fibration(Curvature),
}

/// A catalog geometry together with the orientation of its chart.
///
/// Flipping the orientation replaces `K` by `-K`, which changes the sign of
/// the stream function and of the Poisson bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeometryKind {
    pub family: Family,
    pub orientation: i8,
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::DoublyWarped(p) => write!(f, "{}", p.name()),
            Family::Fibration(c) => write!(f, "Fibration(k={})", c.index()),
        }
    }
}

/// Warp profile values with analytic first derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpValues {
    pub alpha: f64,
    pub beta: f64,
    pub dalpha: f64,
    pub dbeta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillingData {
    pub k_norm_sq: f64,
    pub phi: f64,
    pub on_axis: bool,
}

/// `s_k`, `c_k` and `t_k = s_k / c_k`; `t` is `None` at a pole of `t_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTriple {
    pub s: f64,
    pub c: f64,
    pub t: Option<f64>,
}

impl TrigTriple {
    pub fn tangent(&self, k: i8, r: f64) -> Result<f64> {
        self.t.ok_or(Error::Pole { k, r })
    }
}

const POLE_EPS: f64 = 1e-12;

/// Generalized trigonometric functions of curvature index `k`.
pub fn generalized_trig(k: i8, r: f64) -> Result<TrigTriple> {
    let (s, c) = match k {
        1 => (r.sin(), r.cos()),
        0 => (r, 1.0),
        -1 => (r.sinh(), r.cosh()),
        _ => {
            return Err(Error::InvalidDomain(format!(
                "curvature index must be -1, 0 or 1, got {k}"
            )))
        }
    };
    let t = if c.abs() < POLE_EPS { None } else { Some(s / c) };
    Ok(TrigTriple { s, c, t })
}

impl GeometryKind {
    pub fn doubly_warped(profile: Profile) -> Self {
        GeometryKind {
            family: Family::DoublyWarped(profile),
            orientation: 1,
        }
    }

    pub fn fibration(k: i8) -> Result<Self> {
        let c = Curvature::from_index(k).ok_or_else(|| {
            Error::InvalidDomain(format!("curvature index must be -1, 0 or 1, got {k}"))
        })?;
        Ok(GeometryKind {
            family: Family::Fibration(c),
            orientation: 1,
        })
    }

    pub fn with_orientation(mut self, sign: i8) -> Self {
        self.orientation = if sign < 0 { -1 } else { 1 };
        self
    }

    /// Parses a catalog name; fibrations are `"Fibration"` with an index `k`.
    pub fn from_name(name: &str, k: Option<i8>) -> Result<Self> {
        if name == "Fibration" {
            let k = k.ok_or_else(|| Error::Config("Fibration needs a curvature index k".into()))?;
            return GeometryKind::fibration(k);
        }
        Profile::from_name(name)
            .map(GeometryKind::doubly_warped)
            .ok_or_else(|| Error::Config(format!("unknown geometry name {name:?}")))
    }

    pub fn is_fibration(&self) -> bool {
        matches!(self.family, Family::Fibration(_))
    }

    pub fn curvature_index(&self) -> Option<i8> {
        match self.family {
            Family::Fibration(c) => Some(c.index()),
            Family::DoublyWarped(_) => None,
        }
    }

    /// Closed admissible radial interval of the chart.
    pub fn radial_range(&self) -> (f64, f64) {
        match self.family {
            Family::DoublyWarped(p) => p.radial_range(),
            Family::Fibration(Curvature::Sphere) => (0.0, PI),
            Family::Fibration(_) => (0.0, f64::INFINITY),
        }
    }

    /// Whether `psi` naturally lives on a circle for this chart.
    pub fn psi_is_circle(&self) -> bool {
        match self.family {
            Family::Fibration(_) => true,
            Family::DoublyWarped(p) => matches!(
                p,
                Profile::Sphere3Rotation
                    | Profile::H3HyperbolicTranslation
                    | Profile::S2xR_Translation
                    | Profile::H2xR_Translation
            ),
        }
    }

    pub fn check_radius(&self, r: f64) -> Result<()> {
        let (lo, hi) = self.radial_range();
        let tol = 1e-12;
        if r.is_nan() || r < lo - tol || r > hi + tol {
            return Err(Error::Domain {
                geometry: self.to_string(),
                r,
                range: format!("[{lo}, {hi}]"),
            });
        }
        Ok(())
    }

    fn warps(&self) -> (Warp, Warp) {
        match self.family {
            Family::DoublyWarped(p) => p.warps(),
            Family::Fibration(c) => (c.warp(), Warp::One),
        }
    }

    /// Quotient warp profile `(alpha, beta)` and its first derivatives.
    pub fn warp_profile(&self, r: f64) -> Result<WarpValues> {
        self.check_radius(r)?;
        let (a, b) = self.warps();
        let ja = a.jet(r);
        let jb = b.jet(r);
        Ok(WarpValues {
            alpha: ja[0],
            beta: jb[0],
            dalpha: ja[1],
            dbeta: jb[1],
        })
    }

    /// Value, first and second derivatives of `alpha` and `beta`.
    pub fn warp_jet(&self, r: f64) -> Result<([f64; 3], [f64; 3])> {
        self.check_radius(r)?;
        let (a, b) = self.warps();
        Ok((a.jet(r), b.jet(r)))
    }

    /// `|K|^2` and the twist scalar `phi` defined by `curl(K/|K|^2) = phi K/|K|^2`.
    pub fn killing_data(&self, r: f64) -> Result<KillingData> {
        let w = self.warp_profile(r)?;
        Ok(match self.family {
            Family::Fibration(_) => KillingData {
                k_norm_sq: 1.0,
                phi: 1.0,
                on_axis: false,
            },
            Family::DoublyWarped(_) => {
                let k2 = w.beta * w.beta;
                KillingData {
                    k_norm_sq: k2,
                    phi: 0.0,
                    on_axis: k2 == 0.0,
                }
            }
        })
    }

    /// `d|K|^2/dr`.
    pub fn k_norm_sq_derivative(&self, r: f64) -> Result<f64> {
        let w = self.warp_profile(r)?;
        Ok(match self.family {
            Family::Fibration(_) => 0.0,
            Family::DoublyWarped(_) => 2.0 * w.beta * w.dbeta,
        })
    }

    /// Volume density `mu(r)` with `dV = mu dr dpsi dtheta`.
    pub fn volume_weight(&self, r: f64) -> Result<f64> {
        let w = self.warp_profile(r)?;
        Ok(w.alpha * w.beta)
    }

    /// Coefficient `2 s_k(r/2)^2` of `dpsi` in the contact form; zero for doubly-warped charts.
    pub fn connection_coefficient(&self, r: f64) -> f64 {
        match self.family {
            Family::Fibration(c) => {
                let s = generalized_trig(c.index(), 0.5 * r).map(|t| t.s).unwrap_or(0.0);
                2.0 * s * s
            }
            Family::DoublyWarped(_) => 0.0,
        }
    }

    /// Full 3x3 metric tensor in `(r, psi, theta)` coordinates.
    pub fn metric_tensor(&self, r: f64) -> Result<[[f64; 3]; 3]> {
        let w = self.warp_profile(r)?;
        Ok(match self.family {
            Family::DoublyWarped(_) => [
                [1.0, 0.0, 0.0],
                [0.0, w.alpha * w.alpha, 0.0],
                [0.0, 0.0, w.beta * w.beta],
            ],
            Family::Fibration(_) => {
                let q = self.connection_coefficient(r);
                [
                    [1.0, 0.0, 0.0],
                    [0.0, w.alpha * w.alpha + q * q, q],
                    [0.0, q, 1.0],
                ]
            }
        })
    }
}

/// Left-invariant frame `(e1, e2, e3)` of a fibration group in the chart
/// `(r, psi, theta)`, as coordinate component vectors.
pub fn fibration_frame(k: i8, r: f64, psi: f64, theta: f64) -> Result<[[f64; 3]; 3]> {
    let full = generalized_trig(k, r)?;
    let half = generalized_trig(k, 0.5 * r)?;
    let t_half = half.tangent(k, 0.5 * r)?;
    let phase = psi + f64::from(k) * theta;
    let (sn, cs) = phase.sin_cos();
    Ok([
        [0.0, 0.0, 1.0],
        [cs, -sn / full.s, t_half * sn],
        [sn, cs / full.s, -t_half * cs],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dw(p: Profile) -> GeometryKind {
        GeometryKind::doubly_warped(p)
    }

    #[test]
    fn euclidean_rotation_profile() {
        let w = dw(Profile::EuclideanRotation).warp_profile(0.5).unwrap();
        assert_eq!((w.alpha, w.beta, w.dalpha, w.dbeta), (1.0, 0.5, 0.0, 1.0));
    }

    #[test]
    fn sol_profile_at_origin() {
        let w = dw(Profile::Sol).warp_profile(0.0).unwrap();
        assert_eq!((w.alpha, w.beta, w.dalpha, w.dbeta), (1.0, 1.0, -2.0, 2.0));
    }

    #[test]
    fn sphere_profile_at_quarter_pi() {
        let w = dw(Profile::Sphere3Rotation)
            .warp_profile(std::f64::consts::FRAC_PI_4)
            .unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(w.alpha, h, epsilon = 1e-15);
        assert_abs_diff_eq!(w.beta, h, epsilon = 1e-15);
        assert_abs_diff_eq!(w.dalpha, -h, epsilon = 1e-15);
        assert_abs_diff_eq!(w.dbeta, h, epsilon = 1e-15);
    }

    #[test]
    fn out_of_range_radius_names_geometry() {
        let err = dw(Profile::Sphere3Rotation).warp_profile(2.0).unwrap_err();
        match err {
            Error::Domain { geometry, .. } => assert_eq!(geometry, "Sphere3Rotation"),
            e => panic!("unexpected {e:?}"),
        }
        assert!(dw(Profile::EuclideanRotation).warp_profile(-0.1).is_err());
        assert!(dw(Profile::Sol).warp_profile(-30.0).is_ok());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let h = 1e-6;
        for p in Profile::ALL {
            let g = dw(p);
            let r = 0.7;
            let wp = g.warp_profile(r + h).unwrap();
            let wm = g.warp_profile(r - h).unwrap();
            let w = g.warp_profile(r).unwrap();
            assert_abs_diff_eq!(w.dalpha, (wp.alpha - wm.alpha) / (2.0 * h), epsilon = 1e-7);
            assert_abs_diff_eq!(w.dbeta, (wp.beta - wm.beta) / (2.0 * h), epsilon = 1e-7);
            let (ja, jb) = g.warp_jet(r).unwrap();
            assert_abs_diff_eq!(ja[2], (wp.dalpha - wm.dalpha) / (2.0 * h), epsilon = 1e-7);
            assert_abs_diff_eq!(jb[2], (wp.dbeta - wm.dbeta) / (2.0 * h), epsilon = 1e-7);
        }
    }

    #[test]
    fn generalized_trig_examples() {
        let t = generalized_trig(1, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(t.s, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.c, 0.0, epsilon = 1e-15);
        assert!(matches!(t.tangent(1, FRAC_PI_2), Err(Error::Pole { .. })));

        let t = generalized_trig(0, 2.5).unwrap();
        assert_eq!((t.s, t.c, t.t), (2.5, 1.0, Some(2.5)));

        let t = generalized_trig(-1, 0.0).unwrap();
        assert_eq!((t.s, t.c, t.t), (0.0, 1.0, Some(0.0)));
        assert!(generalized_trig(2, 0.0).is_err());
    }

    #[test]
    fn trig_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in [-1i8, 0, 1] {
            for _ in 0..1000 {
                let r: f64 = rng.gen_range(-3.0..3.0);
                let t = generalized_trig(k, r).unwrap();
                let lhs = t.c * t.c + f64::from(k) * t.s * t.s;
                let tol = 1e-12 * (1.0 + t.c * t.c);
                assert!((lhs - 1.0).abs() <= tol, "k={k} r={r} lhs={lhs}");
            }
        }
    }

    #[test]
    fn killing_data_examples() {
        let fib = GeometryKind::fibration(1).unwrap();
        let kd = fib.killing_data(1.3).unwrap();
        assert_eq!((kd.k_norm_sq, kd.phi), (1.0, 1.0));
        let kd = dw(Profile::EuclideanRotation).killing_data(2.0).unwrap();
        assert_eq!((kd.k_norm_sq, kd.phi), (4.0, 0.0));
        let kd = dw(Profile::Sol).killing_data(1.0).unwrap();
        assert_abs_diff_eq!(kd.k_norm_sq, 4f64.exp(), epsilon = 1e-12);
        assert_eq!(kd.phi, 0.0);
        let kd = dw(Profile::EuclideanRotation).killing_data(0.0).unwrap();
        assert!(kd.on_axis);
        assert_eq!(kd.k_norm_sq, 0.0);
    }

    #[test]
    fn volume_weight_examples() {
        assert_eq!(dw(Profile::EuclideanRotation).volume_weight(3.0).unwrap(), 3.0);
        assert_eq!(GeometryKind::fibration(0).unwrap().volume_weight(2.0).unwrap(), 2.0);
        let v = dw(Profile::H3Rotation).volume_weight(1.0).unwrap();
        assert_abs_diff_eq!(v, 1f64.cosh() * 1f64.sinh(), epsilon = 1e-15);
        for p in Profile::ALL.into_iter().filter(|p| p.is_rotation()) {
            assert_eq!(dw(p).volume_weight(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn rotation_profiles_are_odd_at_axis() {
        for p in Profile::ALL.into_iter().filter(|p| p.is_rotation()) {
            let w = dw(p).warp_profile(0.0).unwrap();
            assert_eq!(w.beta, 0.0, "{p:?}");
            assert_eq!(w.dbeta, 1.0, "{p:?}");
        }
    }

    #[test]
    fn fibration_frame_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in [-1i8, 0, 1] {
            let g = GeometryKind::fibration(k).unwrap();
            for _ in 0..200 {
                let r: f64 = rng.gen_range(0.05..2.5);
                let psi: f64 = rng.gen_range(0.0..6.0);
                let theta: f64 = rng.gen_range(-3.0..3.0);
                let m = g.metric_tensor(r).unwrap();
                let e = fibration_frame(k, r, psi, theta).unwrap();
                for a in 0..3 {
                    for b in 0..3 {
                        let mut ip = 0.0;
                        for i in 0..3 {
                            for j in 0..3 {
                                ip += m[i][j] * e[a][i] * e[b][j];
                            }
                        }
                        let expect = if a == b { 1.0 } else { 0.0 };
                        assert!((ip - expect).abs() < 1e-12, "k={k} r={r} <e{a},e{b}>={ip}");
                    }
                }
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for p in Profile::ALL {
            assert_eq!(GeometryKind::from_name(p.name(), None).unwrap(), dw(p));
        }
        assert!(GeometryKind::from_name("Nil", None).is_err());
        assert!(GeometryKind::from_name("Fibration", Some(0)).unwrap().is_fibration());
    }
}
