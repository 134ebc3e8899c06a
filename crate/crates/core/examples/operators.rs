//! Bracket, K-Laplacian and coadjoint operator on a Sol strip.

use axiflow::field::{Boundary, Parity, ScalarField};
use axiflow::geometry::{GeometryKind, Profile};
use axiflow::grid::{Domain, Grid};
use axiflow::operators::{coadjoint, invert_k_laplacian, k_laplacian, poisson_bracket, AxisymField};

fn main() -> axiflow::error::Result<()> {
    let grid = Grid::new(GeometryKind::doubly_warped(Profile::Sol), Domain::periodic(-0.5, 0.5, 1.0)?, 48, 48)?;
    let tau = std::f64::consts::TAU;
    let f = ScalarField::from_fn(&grid, Parity::Even, Boundary::Dirichlet, |r, p| (0.25 - r * r) * (1.0 + 0.4 * (tau * p).cos()));
    let g = ScalarField::from_fn(&grid, Parity::Even, Boundary::Free, |r, p| r + (tau * p).sin());

    let fg = poisson_bracket(&f, &g)?;
    let gf = poisson_bracket(&g, &f)?;
    let anti = fg.values.iter().zip(&gf.values).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
    println!("max |{{f,g}} + {{g,f}}| = {anti:.2e}");

    let back = invert_k_laplacian(&k_laplacian(&f))?;
    let err = back.values.iter().zip(&f.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("K-Laplacian round trip error = {err:.2e}");

    let sigma = ScalarField::swirl(&grid, g.values.iter().map(|v| 0.1 * v).collect())?;
    let u = AxisymField::new(f.clone(), sigma)?;
    let a = coadjoint(&u, &u)?;
    println!("ad*_u u: max |stream| = {:.3e}, max |swirl| = {:.3e}", a.stream.max_abs(), a.swirl.max_abs());
    Ok(())
}
