//! Area-preserving maps of the plane used as orbit candidates.

use std::f64::consts::TAU;

use super::sampler::{PolarSampler, RadialProfile};
use crate::error::{Error, Result};

/// A planar map in Cartesian coordinates.
pub trait PlanarMap: Sync {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]>;

    /// Images of the points of the circle of radius `rho` at `angles`.
    fn apply_circle(&self, rho: f64, angles: &[f64]) -> Result<Vec<[f64; 2]>> {
        angles.iter().map(|&a| self.apply([rho * a.cos(), rho * a.sin()])).collect()
    }
}

pub struct Identity;

impl PlanarMap for Identity {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        Ok(p)
    }
}

/// `(r, theta) -> (r, theta + omega(r))`.
pub struct Twist<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> PlanarMap for Twist<F> {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let r = p[0].hypot(p[1]);
        let a = p[1].atan2(p[0]) + (self.0)(r);
        Ok([r * a.cos(), r * a.sin()])
    }
}

/// `p -> A p`.
#[derive(Debug, Clone, Copy)]
pub struct LinearMap(pub [[f64; 2]; 2]);

impl LinearMap {
    pub fn shear(s: f64) -> Self {
        LinearMap([[1.0, s], [0.0, 1.0]])
    }

    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        let det = a * d - b * c;
        LinearMap([[d / det, -b / det], [-c / det, a / det]])
    }

    pub fn map(&self, p: [f64; 2]) -> [f64; 2] {
        let m = self.0;
        [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]]
    }
}

impl PlanarMap for LinearMap {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        Ok(self.map(p))
    }
}

/// Sends each circle `S_rho` onto the level curve `{g = g0(rho)}`.
///
/// Along the curve, points are placed by equal fractions of the enclosed
/// sector area as seen from the origin, starting on the `psi = 0` ray. The
/// map is area preserving when the level curves of `g` are star-shaped and
/// homothetic, and it reduces to the identity when `g = g0`.
pub struct Rearrangement {
    g: PolarSampler,
    g0: RadialProfile,
    rays: usize,
    reach: f64,
}

/// Ray parametrisation of one level curve.
struct LevelCurve {
    dchi: f64,
    radius: Vec<f64>,
    /// Cumulative sector area at the ray nodes.
    sector: Vec<f64>,
    level: f64,
}

impl Rearrangement {
    pub fn new(g: PolarSampler, g0: RadialProfile, rays: usize) -> Self {
        let reach = g.radius();
        Rearrangement { g, g0, rays, reach }
    }

    /// Distance from the origin to `{g = c}` along the ray at angle `chi`.
    fn ray_root(&self, chi: f64, c: f64) -> Result<f64> {
        let (cs, sn) = (chi.cos(), chi.sin());
        let f = |r: f64| self.g.cartesian([r * cs, r * sn]) - c;
        let (mut a, mut b) = (0.0, self.reach);
        if f(a) < 0.0 || f(b) > 0.0 {
            return Err(Error::Precondition(format!(
                "level {c:e} is not crossed once along the ray at angle {chi:.4}"
            )));
        }
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if f(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }

    fn level_curve(&self, rho: f64) -> Result<LevelCurve> {
        let level = self.g0.at(rho);
        let m = self.rays;
        let dchi = TAU / m as f64;
        let radius: Vec<f64> = (0..=2 * m)
            .map(|k| self.ray_root(0.5 * dchi * k as f64, level))
            .collect::<Result<_>>()?;
        let q = |k: usize| 0.5 * radius[k] * radius[k];
        let mut sector = vec![0.0; m + 1];
        for k in 0..m {
            sector[k + 1] = sector[k] + dchi / 6.0 * (q(2 * k) + 4.0 * q(2 * k + 1) + q(2 * k + 2));
        }
        Ok(LevelCurve {
            dchi,
            radius,
            sector,
            level,
        })
    }

    fn place(&self, curve: &LevelCurve, psi: f64) -> Result<[f64; 2]> {
        let m = self.rays;
        let target = psi.rem_euclid(TAU) / TAU * curve.sector[m];
        let k = curve.sector.partition_point(|&s| s <= target).clamp(1, m) - 1;
        // cubic Hermite model of the sector area on [chi_k, chi_k+1]
        let h = curve.dchi;
        let (f0, f1) = (curve.sector[k], curve.sector[k + 1]);
        let (d0, d1) = (
            0.5 * curve.radius[2 * k].powi(2),
            0.5 * curve.radius[2 * k + 2].powi(2),
        );
        let herm = |s: f64| {
            let (s2, s3) = (s * s, s * s * s);
            (2.0 * s3 - 3.0 * s2 + 1.0) * f0
                + (s3 - 2.0 * s2 + s) * h * d0
                + (-2.0 * s3 + 3.0 * s2) * f1
                + (s3 - s2) * h * d1
        };
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..60 {
            let s = 0.5 * (a + b);
            if herm(s) < target {
                a = s;
            } else {
                b = s;
            }
        }
        let chi = (k as f64 + 0.5 * (a + b)) * h;
        let r = self.ray_root(chi, curve.level)?;
        Ok([r * chi.cos(), r * chi.sin()])
    }
}

impl PlanarMap for Rearrangement {
    fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let rho = p[0].hypot(p[1]);
        let curve = self.level_curve(rho)?;
        self.place(&curve, p[1].atan2(p[0]))
    }

    fn apply_circle(&self, rho: f64, angles: &[f64]) -> Result<Vec<[f64; 2]>> {
        let curve = self.level_curve(rho)?;
        angles.iter().map(|&a| self.place(&curve, a)).collect()
    }
}

/// Largest `|det D map - 1|` over `points`, by central differences.
pub fn area_defect(map: &dyn PlanarMap, points: &[[f64; 2]], step: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        let e = |dx: f64, dy: f64| map.apply([p[0] + dx, p[1] + dy]);
        let (xp, xm, yp, ym) = (e(step, 0.0)?, e(-step, 0.0)?, e(0.0, step)?, e(0.0, -step)?);
        let j = [
            [(xp[0] - xm[0]) / (2.0 * step), (yp[0] - ym[0]) / (2.0 * step)],
            [(xp[1] - xm[1]) / (2.0 * step), (yp[1] - ym[1]) / (2.0 * step)],
        ];
        worst = worst.max((j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Boundary, Parity, ScalarField};
    use crate::geometry::GeometryKind;
    use crate::grid::{Domain, Grid};

    fn sampled(f: impl Fn(f64, f64) -> f64) -> PolarSampler {
        let g = Grid::new(GeometryKind::fibration(0).unwrap(), Domain::periodic(0.0, 4.5, TAU).unwrap(), 192, 256).unwrap();
        PolarSampler::new(&ScalarField::from_fn(&g, Parity::Even, Boundary::Free, |r, p| {
            f(r * p.cos(), r * p.sin())
        }))
    }

    #[test]
    fn rearrangement_undoes_a_shear() {
        let s = LinearMap::shear(0.5);
        let si = s.inverse();
        let g0 = sampled(|x, y| (-(x * x + y * y)).exp());
        let g = sampled(|x, y| {
            let q = si.map([x, y]);
            (-(q[0] * q[0] + q[1] * q[1])).exp()
        });
        let map = Rearrangement::new(g, g0.row_means(), 256);
        let pts: Vec<[f64; 2]> = (0..12).map(|k| {
            let a = 0.5 * k as f64;
            let r = 0.3 + 0.15 * k as f64;
            [r * a.cos(), r * a.sin()]
        }).collect();
        let defect = area_defect(&map, &pts, 1e-4).unwrap();
        assert!(defect < 2e-3, "{defect:e}");
        for p in &pts {
            // g0 of S^{-1} of the image equals g0 of p
            let q = si.map(map.apply(*p).unwrap());
            let (a, b) = (q[0].hypot(q[1]), p[0].hypot(p[1]));
            assert!((a - b).abs() < 1e-3, "{a} {b}");
        }
    }

    #[test]
    fn twist_and_shear_preserve_area() {
        let t = Twist(|r: f64| 0.7 * r * r);
        let pts = [[0.3, 0.1], [-1.0, 0.5], [0.2, -1.4]];
        assert!(area_defect(&t, &pts, 1e-5).unwrap() < 1e-8);
        assert!(area_defect(&LinearMap::shear(0.8), &pts, 1e-5).unwrap() < 1e-9);
    }

    #[test]
    fn identity_rearrangement() {
        let g0 = sampled(|x, y| (-(x * x + y * y)).exp());
        let map = Rearrangement::new(g0.clone(), g0.row_means(), 256);
        let y = map.apply([0.8, -0.4]).unwrap();
        assert!((y[0] - 0.8).abs() < 1e-3 && (y[1] + 0.4).abs() < 1e-3, "{y:?}");
    }
}
