//! Discrete operators on the quotient surface.
//!
//! The Poisson bracket uses the Arakawa Jacobian, symmetrized so that
//! `{f,g} = -{g,f}` holds bit for bit. The K-Laplacian is written in flux
//! form, which makes it symmetric for the quadrature weights `W = mu hr hpsi`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Boundary, Padded, Parity, ScalarField};
use crate::grid::{EndKind, Grid};

/// Meridional components `(u_r, u_psi)` in the coordinate basis plus the swirl `sigma`.
#[derive(Debug, Clone)]
pub struct VectorFieldQS {
    pub grid: Arc<Grid>,
    pub u_r: Vec<f64>,
    pub u_psi: Vec<f64>,
    pub sigma: ScalarField,
}

/// An axisymmetric field `u = skew_gradient(stream) + swirl K / |K|^2`.
#[derive(Debug, Clone)]
pub struct AxisymField {
    pub stream: ScalarField,
    pub swirl: ScalarField,
}

impl AxisymField {
    pub fn new(stream: ScalarField, swirl: ScalarField) -> Result<Self> {
        stream.same_grid(&swirl)?;
        Ok(AxisymField { stream, swirl })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        AxisymField {
            stream: ScalarField::zeros(grid, Parity::Even, Boundary::Dirichlet),
            swirl: ScalarField::zeros(grid, Parity::KNormSqScaled, Boundary::Free),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.stream.grid
    }

    /// `g = sigma / |K|^2`, the coefficient of `K`.
    pub fn g(&self) -> ScalarField {
        swirl_coefficient(&self.swirl)
    }

    pub fn scale(&self, s: f64) -> Self {
        AxisymField {
            stream: &self.stream * s,
            swirl: &self.swirl * s,
        }
    }

    pub fn add(&self, o: &AxisymField) -> Self {
        AxisymField {
            stream: &self.stream + &o.stream,
            swirl: &self.swirl + &o.swirl,
        }
    }

    pub fn sub(&self, o: &AxisymField) -> Self {
        AxisymField {
            stream: &self.stream - &o.stream,
            swirl: &self.swirl - &o.swirl,
        }
    }

    pub fn axpy(&mut self, a: f64, x: &AxisymField) {
        for (y, v) in self.stream.values.iter_mut().zip(&x.stream.values) {
            *y += a * v;
        }
        for (y, v) in self.swirl.values.iter_mut().zip(&x.swirl.values) {
            *y += a * v;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.stream.max_abs().max(self.swirl.max_abs())
    }
}

/// `sigma / |K|^2` at the stored nodes (never on an axis).
pub fn swirl_coefficient(sigma: &ScalarField) -> ScalarField {
    let g = &sigma.grid;
    let n = g.npsi;
    let values = sigma
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| v / g.rows[k / n].k_norm_sq)
        .collect();
    ScalarField {
        grid: Arc::clone(g),
        values,
        parity: Parity::Even,
        boundary: Boundary::Free,
    }
}

fn orientation(grid: &Grid) -> f64 {
    f64::from(grid.geometry.orientation)
}

/// `K x grad f / |K|^2` in the coordinate basis.
pub fn skew_gradient(f: &ScalarField) -> VectorFieldQS {
    let g = &*f.grid;
    let p = f.padded();
    let s = orientation(g);
    let (nr, np) = (g.nr, g.npsi);
    let mut u_r = vec![0.0; nr * np];
    let mut u_psi = vec![0.0; nr * np];
    for i in 0..nr {
        let c = s * g.rows[i].inv_mu;
        for j in 0..np {
            let (ii, jj) = (i as isize, j as isize);
            let fr = (p.get(ii + 1, jj) - p.get(ii - 1, jj)) / (2.0 * g.hr);
            let fp = (p.get(ii, jj + 1) - p.get(ii, jj - 1)) / (2.0 * g.hpsi);
            u_r[i * np + j] = -c * fp;
            u_psi[i * np + j] = c * fr;
        }
    }
    VectorFieldQS {
        grid: Arc::clone(&f.grid),
        u_r,
        u_psi,
        sigma: ScalarField::zeros(&f.grid, Parity::KNormSqScaled, Boundary::Free),
    }
}

/// The velocity of an axisymmetric field, `skew_gradient(f)` with the swirl attached.
pub fn velocity(u: &AxisymField) -> VectorFieldQS {
    let mut v = skew_gradient(&u.stream);
    v.sigma = u.swirl.clone();
    v
}

/// `(1/mu) [d_r(mu u_r) + d_psi(mu u_psi)]` by centred differences.
///
/// Nodes whose stencil would leave the stored unknowns are reported as zero.
pub fn divergence(u: &VectorFieldQS) -> ScalarField {
    let g = &*u.grid;
    let (nr, np) = (g.nr, g.npsi);
    let mut out = vec![0.0; nr * np];
    let periodic = g.psi_periodic();
    for i in 1..nr - 1 {
        for j in 0..np {
            if !periodic && (j == 0 || j == np - 1) {
                continue;
            }
            let jp = (j + 1) % np;
            let jm = (j + np - 1) % np;
            let mr = |ii: usize| g.rows[ii].mu * u.u_r[ii * np + j];
            let dr = (mr(i + 1) - mr(i - 1)) / (2.0 * g.hr);
            let mu = g.rows[i].mu;
            let dp = mu * (u.u_psi[i * np + jp] - u.u_psi[i * np + jm]) / (2.0 * g.hpsi);
            out[i * np + j] = (dr + dp) / mu;
        }
    }
    ScalarField {
        grid: Arc::clone(&u.grid),
        values: out,
        parity: Parity::Even,
        boundary: Boundary::Free,
    }
}

/// Second-order Arakawa combination `S(f, g) = J++/2 + J+x`, unscaled.
#[inline]
fn arakawa_half(a: &Padded, b: &Padded, i: isize, j: isize) -> f64 {
    let jpp = (a.get(i + 1, j) - a.get(i - 1, j)) * (b.get(i, j + 1) - b.get(i, j - 1))
        - (a.get(i, j + 1) - a.get(i, j - 1)) * (b.get(i + 1, j) - b.get(i - 1, j));
    let jpx = a.get(i + 1, j) * (b.get(i + 1, j + 1) - b.get(i + 1, j - 1))
        - a.get(i - 1, j) * (b.get(i - 1, j + 1) - b.get(i - 1, j - 1))
        - a.get(i, j + 1) * (b.get(i + 1, j + 1) - b.get(i - 1, j + 1))
        + a.get(i, j - 1) * (b.get(i + 1, j - 1) - b.get(i - 1, j - 1));
    0.5 * jpp + jpx
}

type Stencil = [[f64; 3]; 3];

fn stencil(p: &Padded, i: isize, j: isize) -> Stencil {
    let mut s = [[0.0; 3]; 3];
    for (di, row) in s.iter_mut().enumerate() {
        for (dj, v) in row.iter_mut().enumerate() {
            *v = p.get(i + di as isize - 1, j + dj as isize - 1);
        }
    }
    s
}

/// The full Arakawa Jacobian `S(a, b) - S(b, a)` on a local stencil.
fn jac3(a: &Stencil, b: &Stencil) -> f64 {
    let half = |a: &Stencil, b: &Stencil| {
        let g = |s: &Stencil, i: isize, j: isize| s[(i + 1) as usize][(j + 1) as usize];
        let jpp = (g(a, 1, 0) - g(a, -1, 0)) * (g(b, 0, 1) - g(b, 0, -1))
            - (g(a, 0, 1) - g(a, 0, -1)) * (g(b, 1, 0) - g(b, -1, 0));
        let jpx = g(a, 1, 0) * (g(b, 1, 1) - g(b, 1, -1)) - g(a, -1, 0) * (g(b, -1, 1) - g(b, -1, -1))
            - g(a, 0, 1) * (g(b, 1, 1) - g(b, -1, 1))
            + g(a, 0, -1) * (g(b, 1, -1) - g(b, -1, -1));
        0.5 * jpp + jpx
    };
    half(a, b) - half(b, a)
}

/// Raw Jacobian on the row next to a pole, averaged over the three cyclic
/// placements of the output slot.
///
/// Across the pole the index lattice is glued with reversed radial
/// orientation, which breaks the cyclic symmetry of `sum k J(a, b)`. The
/// average restores it exactly and coincides with the plain Jacobian wherever
/// no stencil reaches across.
fn pole_row_jacobian(grid: &Grid, pa: &Padded, pb: &Padded, inner: bool) -> Vec<f64> {
    let (nr, np) = (grid.nr as isize, grid.npsi as isize);
    let (row, next) = if inner { (0, 1) } else { (nr - 1, nr - 2) };
    let ghost = 2 * row - next;
    let target = |i: isize, j: isize| -> Option<usize> {
        let (i, j) = if i == ghost { (row, j + np / 2) } else { (i, j) };
        (i == row).then(|| j.rem_euclid(np) as usize)
    };
    let mut acc = vec![0.0; np as usize];
    for j in 0..np {
        let (a, b) = (stencil(pa, row, j), stencil(pb, row, j));
        acc[j as usize] += jac3(&a, &b);
    }
    for q in [row, next] {
        for j in 0..np {
            let (a, b) = (stencil(pa, q, j), stencil(pb, q, j));
            let (aq, bq) = (pa.get(q, j), pb.get(q, j));
            for di in 0..3 {
                for dj in 0..3 {
                    let Some(t) = target(q + di as isize - 1, j + dj as isize - 1) else {
                        continue;
                    };
                    let mut e = [[0.0; 3]; 3];
                    e[di][dj] = 1.0;
                    acc[t] += aq * jac3(&b, &e) + bq * jac3(&e, &a);
                }
            }
        }
    }
    acc.iter().map(|v| v / 3.0).collect()
}

fn bracket_parity(a: Parity, b: Parity) -> Parity {
    match (a, b) {
        (Parity::KNormSqScaled, _) | (_, Parity::KNormSqScaled) => Parity::KNormSqScaled,
        (Parity::Odd, Parity::Even) | (Parity::Even, Parity::Odd) => Parity::Odd,
        _ => Parity::Even,
    }
}

/// `{f, g} = s (f_r g_psi - f_psi g_r) / (alpha beta)` via the Arakawa Jacobian.
pub fn poisson_bracket(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.same_grid(g)?;
    let grid = &*f.grid;
    let (pf, pg) = (f.padded(), g.padded());
    let s = orientation(grid);
    let np = grid.npsi;
    let scale = 1.0 / (12.0 * grid.hr * grid.hpsi);
    let mut values = vec![0.0; grid.len()];
    values.par_chunks_mut(np).enumerate().for_each(|(i, row)| {
        let c = s * scale * grid.rows[i].inv_mu;
        let ii = i as isize;
        for (j, v) in row.iter_mut().enumerate() {
            let jj = j as isize;
            let d = arakawa_half(&pf, &pg, ii, jj) - arakawa_half(&pg, &pf, ii, jj);
            *v = c * d;
        }
    });
    for (end, inner) in [(grid.inner, true), (grid.outer, false)] {
        if end != EndKind::Pole {
            continue;
        }
        let i = if inner { 0 } else { grid.nr - 1 };
        let c = s * scale * grid.rows[i].inv_mu;
        for (v, d) in values[i * np..(i + 1) * np].iter_mut().zip(pole_row_jacobian(grid, &pf, &pg, inner)) {
            *v = c * d;
        }
    }
    Ok(ScalarField {
        grid: Arc::clone(&f.grid),
        values,
        parity: bracket_parity(f.parity, g.parity),
        boundary: Boundary::Free,
    })
}

/// `Delta_K f = (1/(alpha beta)) d_r((alpha/beta) f_r) + f_psipsi / (alpha beta)^2`.
pub fn k_laplacian(f: &ScalarField) -> ScalarField {
    let g = &*f.grid;
    let p = f.padded();
    let np = g.npsi;
    let (h2r, h2p) = (g.hr * g.hr, g.hpsi * g.hpsi);
    let mut values = vec![0.0; g.len()];
    values.par_chunks_mut(np).enumerate().for_each(|(i, row)| {
        let rg = &g.rows[i];
        let (am, ap) = (g.faces[i], g.faces[i + 1]);
        let ii = i as isize;
        for (j, v) in row.iter_mut().enumerate() {
            let jj = j as isize;
            let c = p.get(ii, jj);
            let radial = (ap * (p.get(ii + 1, jj) - c) - am * (c - p.get(ii - 1, jj))) / (rg.mu * h2r);
            let angular = (p.get(ii, jj + 1) - 2.0 * c + p.get(ii, jj - 1)) / h2p;
            *v = radial + rg.psi_coeff * angular;
        }
    });
    ScalarField {
        grid: Arc::clone(&f.grid),
        values,
        parity: Parity::Even,
        boundary: Boundary::Free,
    }
}

/// Relative size of a weighted mean that is silently removed in the
/// boundary-free case; anything larger is reported as incompatible.
const COMPATIBILITY_TOL: f64 = 1e-6;

/// Solves `Delta_K f = rho` with `f = 0` on every wall and axis.
///
/// Without any Dirichlet edge the solution is normalized to zero weighted mean.
pub fn invert_k_laplacian(rho: &ScalarField) -> Result<ScalarField> {
    let g = &rho.grid;
    let solver = g.solver();
    let mut values = rho.values.clone();
    if solver.has_null_mode() {
        let mean = rho.weighted_mean();
        let scale = rho.max_abs().max(f64::MIN_POSITIVE);
        if mean.abs() > COMPATIBILITY_TOL * scale {
            return Err(Error::Compatibility { mean });
        }
        if mean != 0.0 {
            log::debug!("removing weighted mean {mean:e} before the K-Laplacian solve");
        }
        values.iter_mut().for_each(|v| *v -= mean);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::IterationLimit {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    solver.solve_in_place(&mut values);
    let mut f = ScalarField {
        grid: Arc::clone(g),
        values,
        parity: Parity::Even,
        boundary: Boundary::Dirichlet,
    };
    if solver.has_null_mode() {
        let m = f.weighted_mean();
        f.values.iter_mut().for_each(|v| *v -= m);
        f.boundary = Boundary::Free;
    }
    Ok(f)
}

/// Returns `(Delta_K f + phi g, |K|^2 g)` so that
/// `curl u = (Delta_K f + phi g) K - skew_gradient(|K|^2 g)`.
pub fn curl_axisymmetric(f: &ScalarField, g: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    f.same_grid(g)?;
    let grid = &f.grid;
    let lap = k_laplacian(f);
    let phi_component = lap.zip_rows(g, |i, l, gv| l + grid.rows[i].phi * gv);
    let potential = g
        .zip_rows(g, |i, gv, _| grid.rows[i].k_norm_sq * gv)
        .with_kind(Parity::KNormSqScaled, Boundary::Free);
    Ok((phi_component, potential))
}

/// The vorticity scalar `w = Delta_K f + phi sigma / |K|^2` of an axisymmetric field.
pub fn vorticity(u: &AxisymField) -> ScalarField {
    let grid = u.grid();
    let lap = k_laplacian(&u.stream);
    lap.zip_rows(&u.swirl, |i, l, s| {
        let rg = &grid.rows[i];
        l + rg.phi * s / rg.k_norm_sq
    })
}

/// Vector-field commutator `[u, v]` of `u = (f, g)` and `v = (h, j)`:
/// stream `{f,h}`, swirl `-phi {f,h} + |K|^2 ({f,j} - {h,g})`.
pub fn commutator(u: &AxisymField, v: &AxisymField) -> Result<AxisymField> {
    u.stream.same_grid(&v.stream)?;
    let grid = u.grid();
    let (gu, jv) = (u.g(), v.g());
    let fh = poisson_bracket(&u.stream, &v.stream)?;
    let fj = poisson_bracket(&u.stream, &jv)?;
    let hg = poisson_bracket(&v.stream, &gu)?;
    let np = grid.npsi;
    let swirl: Vec<f64> = (0..grid.len())
        .map(|k| {
            let rg = &grid.rows[k / np];
            -rg.phi * fh.values[k] + rg.k_norm_sq * (fj.values[k] - hg.values[k])
        })
        .collect();
    Ok(AxisymField {
        stream: fh.with_kind(Parity::Even, Boundary::Dirichlet),
        swirl: ScalarField::swirl(grid, swirl)?,
    })
}

/// `ad*_v u` for `v = (h, j)`, `u = (f, g)`, `sigma = |K|^2 g`:
/// swirl `{h, sigma}`, stream `-Delta_K^{-1}({j, sigma} + {Delta_K f + phi g, h})`.
pub fn coadjoint(v: &AxisymField, u: &AxisymField) -> Result<AxisymField> {
    u.stream.same_grid(&v.stream)?;
    let sigma = &u.swirl;
    let w = vorticity(u);
    let swirl = poisson_bracket(&v.stream, sigma)?.with_kind(Parity::KNormSqScaled, Boundary::Free);
    let js = poisson_bracket(&v.g(), sigma)?;
    let wh = poisson_bracket(&w, &v.stream)?;
    let rhs = (&js + &wh).map(|x| -x);
    let stream = invert_k_laplacian(&rhs)?;
    Ok(AxisymField { stream, swirl })
}

/// Energy-form bilinear `sum (grad a . grad b) / |K|^2 dmu` over cell faces.
///
/// For Dirichlet fields it equals `-sum W a Delta_K b` exactly.
pub fn gradient_form(a: &ScalarField, b: &ScalarField) -> f64 {
    let g = &*a.grid;
    let (pa, pb) = (a.padded(), b.padded());
    let (nr, np) = (g.nr as isize, g.npsi as isize);
    let mut radial = 0.0;
    for i in 0..=nr {
        let face = g.faces[i as usize];
        if face == 0.0 {
            continue;
        }
        for j in 0..np {
            let da = pa.get(i, j) - pa.get(i - 1, j);
            let db = pb.get(i, j) - pb.get(i - 1, j);
            radial += face * da * db;
        }
    }
    let mut angular = 0.0;
    let j_start = if g.psi_periodic() { 0 } else { -1 };
    for i in 0..nr {
        let c = g.rows[i as usize].inv_mu;
        let mut acc = 0.0;
        for j in j_start..np {
            let da = pa.get(i, j + 1) - pa.get(i, j);
            let db = pb.get(i, j + 1) - pb.get(i, j);
            acc += da * db;
        }
        angular += c * acc;
    }
    radial * g.hpsi / g.hr + angular * g.hr / g.hpsi
}

/// `L^2` inner product of axisymmetric fields (per unit length of the `K` orbit).
pub fn inner_product(u: &AxisymField, v: &AxisymField) -> f64 {
    let grid = u.grid();
    let np = grid.npsi;
    let swirl: f64 = u
        .swirl
        .values
        .chunks(np)
        .zip(v.swirl.values.chunks(np))
        .enumerate()
        .map(|(i, (a, b))| {
            grid.weight(i) / grid.rows[i].k_norm_sq * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
        })
        .sum();
    gradient_form(&u.stream, &v.stream) + swirl
}

/// Kinetic energy `1/2 <u, u>`.
pub fn energy(u: &AxisymField) -> f64 {
    0.5 * inner_product(u, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GeometryKind, Profile};
    use crate::grid::{Domain, PsiExtent};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn rot_walls(n: usize) -> Arc<Grid> {
        let dom = Domain::new(0.0, 1.0, PsiExtent::Walls { min: 0.0, max: 1.0 }).unwrap();
        Grid::new(GeometryKind::doubly_warped(Profile::EuclideanRotation), dom, n, n).unwrap()
    }

    fn disc(n: usize) -> Arc<Grid> {
        let dom = Domain::periodic(0.0, 1.0, TAU).unwrap();
        Grid::new(GeometryKind::fibration(0).unwrap(), dom, n, n).unwrap()
    }

    fn free(g: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        ScalarField::from_fn(g, Parity::Even, Boundary::Free, f)
    }

    fn random(g: &Arc<Grid>, rng: &mut ChaCha8Rng) -> ScalarField {
        let v = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::with_values(g, v, Parity::Even, Boundary::Free).unwrap()
    }

    #[test]
    fn skew_gradient_of_r_squared() {
        let g = rot_walls(16);
        let u = skew_gradient(&free(&g, |r, _| r * r));
        assert!(u.u_r.iter().all(|v| v.abs() < 1e-12));
        assert!(u.u_psi.iter().all(|v| (v - 2.0).abs() < 1e-12));
        let c = skew_gradient(&free(&g, |_, _| 3.0));
        assert!(c.u_r.iter().chain(&c.u_psi).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn bracket_examples() {
        let g = rot_walls(16);
        let b = poisson_bracket(&free(&g, |r, _| r * r), &free(&g, |_, p| p)).unwrap();
        assert!(b.values.iter().all(|v| (v - 2.0).abs() < 1e-11), "{}", b.max_abs());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (f, h) = (random(&g, &mut rng), random(&g, &mut rng));
        let ff = poisson_bracket(&f, &f).unwrap();
        assert_eq!(ff.max_abs(), 0.0);
        let fh = poisson_bracket(&f, &h).unwrap();
        let hf = poisson_bracket(&h, &f).unwrap();
        assert!(fh.values.iter().zip(&hf.values).all(|(a, b)| a + b == 0.0));
    }

    #[test]
    fn bracket_trilinear_form_is_cyclic_on_the_sphere() {
        let dom = Domain::periodic(0.0, PI, TAU).unwrap();
        let g = Grid::new(GeometryKind::fibration(1).unwrap(), dom, 12, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (a, b, c) = (random(&g, &mut rng), random(&g, &mut rng), random(&g, &mut rng));
        let t = |x: &ScalarField, y: &ScalarField, z: &ScalarField| x.weighted_dot(&poisson_bracket(y, z).unwrap());
        let abc = t(&a, &b, &c);
        assert!((abc - t(&b, &c, &a)).abs() < 1e-12 * abc.abs().max(1.0));
        assert!((abc - t(&c, &a, &b)).abs() < 1e-12 * abc.abs().max(1.0));
        assert!(t(&a, &a, &b).abs() < 1e-12);
    }

    #[test]
    fn orientation_flips_bracket() {
        let dom = Domain::new(0.0, 1.0, PsiExtent::Walls { min: 0.0, max: 1.0 }).unwrap();
        let geom = GeometryKind::doubly_warped(Profile::EuclideanRotation).with_orientation(-1);
        let g = Grid::new(geom, dom, 8, 8).unwrap();
        let b = poisson_bracket(&free(&g, |r, _| r * r), &free(&g, |_, p| p)).unwrap();
        assert!((b.values[10] + 2.0).abs() < 1e-11);
    }

    #[test]
    fn bracket_is_second_order() {
        let geom = GeometryKind::doubly_warped(Profile::Sol);
        let dom = Domain::periodic(-0.5, 0.5, 1.0).unwrap();
        let err = |n| {
            let g = Grid::new(geom, dom, n, n).unwrap();
            let f = free(&g, |r, p| (r * 2.0).sin() * (TAU * p).cos());
            let h = free(&g, |r, p| r * r + (TAU * p).sin());
            let b = poisson_bracket(&f, &h).unwrap();
            let mut e: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let (r, p) = (g.r_nodes[i], g.psi_nodes[j]);
                    let fr = 2.0 * (2.0 * r).cos() * (TAU * p).cos();
                    let fp = -TAU * (2.0 * r).sin() * (TAU * p).sin();
                    let exact = (fr * TAU * (TAU * p).cos() - fp * 2.0 * r) / g.rows[i].mu;
                    // skip the rows next to the extrapolated walls
                    if i > 1 && i + 2 < n {
                        e = e.max((b.at(i, j) - exact).abs());
                    }
                }
            }
            e
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 / e2 > 3.5, "{e1:e} {e2:e}");
    }

    #[test]
    fn k_laplacian_examples() {
        let g = rot_walls(16);
        assert!(k_laplacian(&free(&g, |r, _| r * r)).max_abs() < 1e-10);
        assert!(k_laplacian(&free(&g, |_, _| 1.0)).max_abs() < 1e-10);
        let d = disc(16);
        let l = k_laplacian(&free(&d, |r, _| r * r));
        assert!(l.values.iter().all(|v| (v - 4.0).abs() < 1e-9));
    }

    #[test]
    fn inverse_round_trip_and_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in [rot_walls(12), disc(12)] {
            let f = random(&g, &mut rng).with_kind(Parity::Even, Boundary::Dirichlet);
            let h = random(&g, &mut rng).with_kind(Parity::Even, Boundary::Dirichlet);
            let back = invert_k_laplacian(&k_laplacian(&f)).unwrap();
            let err = (&back - &f).max_abs();
            assert!(err < 1e-10, "{err:e}");
            let a = f.weighted_dot(&k_laplacian(&h));
            let b = h.weighted_dot(&k_laplacian(&f));
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
            assert!((gradient_form(&f, &h) + a).abs() < 1e-10 * a.abs().max(1.0));
        }
        let zero = ScalarField::zeros(&disc(8), Parity::Even, Boundary::Free);
        assert_eq!(invert_k_laplacian(&zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn manufactured_solution_converges() {
        let dom = Domain::periodic(0.0, 1.0, TAU).unwrap();
        let geom = GeometryKind::doubly_warped(Profile::EuclideanRotation);
        // a stream function must vanish on the axis, hence the r^2 factor
        let exact = |r: f64, p: f64| r * r * (1.0 - r * r).powi(2) * p.sin();
        // (f_rr - f_r / r + f_psipsi) / r^2 for alpha = 1, beta = r
        let rho = |r: f64, p: f64| {
            let (r2, s) = (r * r, p.sin());
            let frr = (2.0 - 24.0 * r2 + 30.0 * r2 * r2) * s;
            let fr_over_r = (2.0 - 8.0 * r2 + 6.0 * r2 * r2) * s;
            (frr - fr_over_r - exact(r, p)) / r2
        };
        let err = |n| {
            let g = Grid::new(geom, dom, n, n).unwrap();
            let src = free(&g, rho);
            let f = invert_k_laplacian(&src).unwrap();
            (&f - &free(&g, exact)).max_abs()
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < 1e-2 && e1 / e2 > 3.5, "{e1:e} {e2:e}");
    }

    #[test]
    fn closed_sphere_needs_compatible_data() {
        let dom = Domain::periodic(0.0, PI, TAU).unwrap();
        let g = Grid::new(GeometryKind::fibration(1).unwrap(), dom, 16, 16).unwrap();
        let ones = free(&g, |_, _| 1.0);
        assert!(matches!(invert_k_laplacian(&ones), Err(Error::Compatibility { .. })));
        let f = free(&g, |r, p| r.sin() * p.cos() + r.cos());
        let lf = k_laplacian(&f);
        let back = invert_k_laplacian(&lf).unwrap();
        assert!(back.weighted_mean().abs() < 1e-12);
        let shifted = &f - &free(&g, |_, _| f.weighted_mean());
        assert!((&back - &shifted).max_abs() < 1e-9);
    }

    #[test]
    fn curl_examples() {
        let d = Grid::new(
            GeometryKind::fibration(1).unwrap(),
            Domain::periodic(0.0, 1.0, TAU).unwrap(),
            8,
            8,
        )
        .unwrap();
        let zero = ScalarField::zeros(&d, Parity::Even, Boundary::Dirichlet);
        let (w, s) = curl_axisymmetric(&zero, &free(&d, |_, _| 1.0)).unwrap();
        assert!(w.values.iter().chain(&s.values).all(|v| (v - 1.0).abs() < 1e-14));
        let g = rot_walls(8);
        let f = free(&g, |r, p| r * r * p);
        let (w, s) = curl_axisymmetric(&f, &ScalarField::zeros(&g, Parity::Even, Boundary::Free)).unwrap();
        assert_eq!(s.max_abs(), 0.0);
        assert!((&w - &k_laplacian(&f)).max_abs() == 0.0);
    }

    #[test]
    fn commutator_and_coadjoint_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = disc(12);
        let stream = |rng: &mut ChaCha8Rng| random(&g, rng).with_kind(Parity::Even, Boundary::Dirichlet);
        let swirl = |rng: &mut ChaCha8Rng| random(&g, rng).with_kind(Parity::KNormSqScaled, Boundary::Free);
        let u = AxisymField::new(stream(&mut rng), swirl(&mut rng)).unwrap();
        assert_eq!(commutator(&u, &u).unwrap().max_abs(), 0.0);

        let zero = ScalarField::zeros(&g, Parity::Even, Boundary::Dirichlet);
        let a = AxisymField::new(zero.clone(), swirl(&mut rng)).unwrap();
        let b = AxisymField::new(zero, swirl(&mut rng)).unwrap();
        assert_eq!(commutator(&a, &b).unwrap().max_abs(), 0.0);

        // steady radial data on a doubly-warped chart
        let rg = Grid::new(
            GeometryKind::doubly_warped(Profile::EuclideanRotation),
            Domain::periodic(0.0, 1.0, 1.0).unwrap(),
            12,
            12,
        )
        .unwrap();
        let radial = AxisymField::new(
            ScalarField::from_fn(&rg, Parity::Even, Boundary::Dirichlet, |r, _| r * r * (1.0 - r)),
            ScalarField::from_fn(&rg, Parity::KNormSqScaled, Boundary::Free, |r, _| r * r),
        )
        .unwrap();
        assert!(coadjoint(&radial, &radial).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn skew_gradient_is_divergence_free() {
        let g = Grid::new(
            GeometryKind::doubly_warped(Profile::H3Rotation),
            Domain::periodic(0.0, 1.0, 2.0).unwrap(),
            24,
            24,
        )
        .unwrap();
        let f = ScalarField::from_fn(&g, Parity::Even, Boundary::Dirichlet, |r, p| {
            (1.0 - r * r) * r * r * (PI * p).cos()
        });
        assert!(divergence(&skew_gradient(&f)).max_abs() < 1e-12);
    }
}
