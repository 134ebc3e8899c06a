//! Direct inverse of the discrete K-Laplacian with homogeneous Dirichlet data.
//!
//! The `psi` second difference commutes with the radial operator, so it is
//! diagonalized once (real Fourier modes for periodic `psi`, sine modes
//! between walls) and every mode reduces to one tridiagonal radial system.

use std::f64::consts::PI;

use crate::grid::{Grid, PsiExtent};

#[derive(Debug)]
pub struct KLaplacianSolver {
    nr: usize,
    npsi: usize,
    /// Orthonormal `psi` eigenbasis, column-major: `basis[m * npsi + j]`.
    basis: Vec<f64>,
    /// Per-mode Thomas factorization: modified super-diagonal and inverse pivots.
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
    lower: Vec<f64>,
    /// Index of the singular (constant) mode when no edge carries Dirichlet data.
    null_mode: Option<usize>,
}

fn psi_modes(grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let n = grid.npsi;
    let h2 = grid.hpsi * grid.hpsi;
    let mut basis = vec![0.0; n * n];
    let mut eig = vec![0.0; n];
    match grid.domain.psi {
        PsiExtent::Periodic { .. } => {
            let nf = n as f64;
            let c0 = 1.0 / nf.sqrt();
            let c1 = (2.0 / nf).sqrt();
            for j in 0..n {
                basis[j] = c0;
                basis[(n - 1) * n + j] = if j % 2 == 0 { c0 } else { -c0 };
            }
            eig[0] = 0.0;
            eig[n - 1] = -4.0 / h2;
            for m in 1..n / 2 {
                let lam = -4.0 / h2 * (PI * m as f64 / nf).sin().powi(2);
                eig[2 * m - 1] = lam;
                eig[2 * m] = lam;
                for j in 0..n {
                    let x = 2.0 * PI * (m * j) as f64 / nf;
                    basis[(2 * m - 1) * n + j] = c1 * x.cos();
                    basis[2 * m * n + j] = c1 * x.sin();
                }
            }
        }
        PsiExtent::Walls { .. } => {
            let np1 = (n + 1) as f64;
            let c = (2.0 / np1).sqrt();
            for m in 0..n {
                let k = (m + 1) as f64;
                eig[m] = -4.0 / h2 * (0.5 * PI * k / np1).sin().powi(2);
                for j in 0..n {
                    basis[m * n + j] = c * (PI * k * (j + 1) as f64 / np1).sin();
                }
            }
        }
    }
    (basis, eig)
}

impl KLaplacianSolver {
    pub fn new(grid: &Grid) -> Self {
        let (nr, npsi) = (grid.nr, grid.npsi);
        let (basis, eig) = psi_modes(grid);
        let null_mode = if grid.has_no_boundary() { Some(0) } else { None };
        let h2 = grid.hr * grid.hr;
        let mut upper = vec![0.0; nr * npsi];
        let mut inv_pivot = vec![0.0; nr * npsi];
        let mut lower = vec![0.0; nr * npsi];
        for m in 0..npsi {
            let off = m * nr;
            // the singular mode is pinned at row 0 and solved on rows 1..nr
            let start = if null_mode == Some(m) { 1 } else { 0 };
            let mut prev_upper = 0.0;
            for i in start..nr {
                let s = 1.0 / (grid.rows[i].mu * h2);
                let lo = if i > start { grid.faces[i] * s } else { 0.0 };
                let up = if i + 1 < nr { grid.faces[i + 1] * s } else { 0.0 };
                let diag = -(grid.faces[i] + grid.faces[i + 1]) * s + grid.rows[i].psi_coeff * eig[m];
                let piv = diag - lo * prev_upper;
                let ip = 1.0 / piv;
                inv_pivot[off + i] = ip;
                lower[off + i] = lo;
                upper[off + i] = up * ip;
                prev_upper = upper[off + i];
            }
        }
        KLaplacianSolver {
            nr,
            npsi,
            basis,
            upper,
            inv_pivot,
            lower,
            null_mode,
        }
    }

    pub fn has_null_mode(&self) -> bool {
        self.null_mode.is_some()
    }

    /// Solves `L f = rho` in place (row-major `nr x npsi` values).
    ///
    /// In the singular case the caller is responsible for a compatible
    /// right-hand side; the result is then fixed up to a constant.
    pub fn solve_in_place(&self, values: &mut [f64]) {
        let (nr, n) = (self.nr, self.npsi);
        assert_eq!(values.len(), nr * n);
        // hat[m * nr + i]
        let mut hat = vec![0.0; nr * n];
        for i in 0..nr {
            let row = &values[i * n..(i + 1) * n];
            for m in 0..n {
                let q = &self.basis[m * n..(m + 1) * n];
                hat[m * nr + i] = row.iter().zip(q).map(|(a, b)| a * b).sum();
            }
        }
        for m in 0..n {
            let off = m * nr;
            let start = if self.null_mode == Some(m) { 1 } else { 0 };
            let x = &mut hat[off..off + nr];
            if start == 1 {
                x[0] = 0.0;
            }
            let mut prev = 0.0;
            for i in start..nr {
                let v = (x[i] - self.lower[off + i] * prev) * self.inv_pivot[off + i];
                x[i] = v;
                prev = v;
            }
            for i in (start..nr.saturating_sub(1)).rev() {
                x[i] -= self.upper[off + i] * x[i + 1];
            }
        }
        for i in 0..nr {
            for j in 0..n {
                let mut acc = 0.0;
                for m in 0..n {
                    acc += hat[m * nr + i] * self.basis[m * n + j];
                }
                values[i * n + j] = acc;
            }
        }
    }
}
