//! Frequency-graded orthonormal bases of axisymmetric perturbations.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::field::{Boundary, Parity, ScalarField};
use crate::grid::{Grid, PsiExtent};
use crate::operators::{inner_product, AxisymField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Stream,
    Swirl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Cos,
    Sin,
}

/// Quantum numbers of one basis field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeLabel {
    /// Harmonic index in `psi`.
    pub m: usize,
    /// Radial index, starting at 1 for the smoothest profile.
    pub n: usize,
    pub phase: Phase,
    pub kind: ModeKind,
    /// Integer frequency grade `m + n` used for tail subspaces.
    pub frequency: usize,
    /// Eigenvalue of `|K|^2 Delta_K` for this profile.
    pub eigenvalue: f64,
}

/// An `L^2`-orthonormal list of axisymmetric fields.
#[derive(Debug, Clone)]
pub struct PerturbationBasis {
    pub grid: Arc<Grid>,
    pub labels: Vec<ModeLabel>,
    pub modes: Vec<AxisymField>,
}

/// Radial profiles for harmonic `m`: eigenvectors of `|K|^2 L_m`, smoothest first.
fn radial_profiles(grid: &Grid, m: usize, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let nr = grid.nr;
    if count > nr {
        return Err(Error::Precondition(format!(
            "requested {count} radial profiles on {nr} rows"
        )));
    }
    let psi_eig = match grid.domain.psi {
        PsiExtent::Periodic { .. } => {
            -4.0 / (grid.hpsi * grid.hpsi) * (PI * m as f64 / grid.npsi as f64).sin().powi(2)
        }
        PsiExtent::Walls { .. } => {
            -4.0 / (grid.hpsi * grid.hpsi)
                * (0.5 * PI * m as f64 / (grid.npsi as f64 + 1.0)).sin().powi(2)
        }
    };
    let h2 = grid.hr * grid.hr;
    let mut a = DMatrix::<f64>::zeros(nr, nr);
    for i in 0..nr {
        let s = 1.0 / (grid.rows[i].mu * h2);
        a[(i, i)] = -(grid.faces[i] + grid.faces[i + 1]) * s + grid.rows[i].psi_coeff * psi_eig;
        if i > 0 {
            a[(i, i - 1)] = grid.faces[i] * s;
        }
        if i + 1 < nr {
            a[(i, i + 1)] = grid.faces[i + 1] * s;
        }
    }
    // |K|^2 L is self-adjoint for the weights d = mu / |K|^2
    let d: Vec<f64> = grid.rows.iter().map(|g| g.mu / g.k_norm_sq).collect();
    let mut sym = DMatrix::<f64>::zeros(nr, nr);
    for i in 0..nr {
        for j in 0..nr {
            if a[(i, j)] != 0.0 {
                sym[(i, j)] = d[i].sqrt() * grid.rows[i].k_norm_sq * a[(i, j)] / d[j].sqrt();
            }
        }
    }
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..nr).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    Ok(order
        .into_iter()
        .take(count)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            let mut p: Vec<f64> = (0..nr).map(|i| v[i] / d[i].sqrt()).collect();
            // fix the sign so profiles start positive near the inner end
            let lead = p.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
            if lead < 0.0 {
                p.iter_mut().for_each(|x| *x = -*x);
            }
            (eig.eigenvalues[k], p)
        })
        .collect())
}

fn harmonic(grid: &Grid, m: usize, phase: Phase, psi: f64) -> f64 {
    match grid.domain.psi {
        PsiExtent::Periodic { period } => {
            let x = 2.0 * PI * m as f64 * psi / period;
            match phase {
                Phase::Cos => x.cos(),
                Phase::Sin => x.sin(),
            }
        }
        PsiExtent::Walls { min, max } => (PI * m as f64 * (psi - min) / (max - min)).sin(),
    }
}

fn mode_field(grid: &Arc<Grid>, label: &ModeLabel, profile: &[f64]) -> AxisymField {
    let np = grid.npsi;
    let mut values = vec![0.0; grid.len()];
    for (i, p) in profile.iter().enumerate() {
        for j in 0..np {
            values[i * np + j] = p * harmonic(grid, label.m, label.phase, grid.psi_nodes[j]);
        }
    }
    let zero = vec![0.0; grid.len()];
    let (s, w) = match label.kind {
        ModeKind::Stream => (values, zero),
        ModeKind::Swirl => (zero, values),
    };
    AxisymField {
        stream: ScalarField {
            grid: Arc::clone(grid),
            values: s,
            parity: Parity::Even,
            boundary: Boundary::Dirichlet,
        },
        swirl: ScalarField {
            grid: Arc::clone(grid),
            values: w,
            parity: Parity::KNormSqScaled,
            boundary: Boundary::Free,
        },
    }
}

/// Options selecting which families enter a graded basis.
#[derive(Debug, Clone, Copy)]
pub struct BasisSpec {
    pub kinds: &'static [ModeKind],
    pub phases: &'static [Phase],
    pub min_harmonic: usize,
}

impl BasisSpec {
    /// Stream and swirl fields in both phases, `m >= 1`.
    pub const JACOBI: BasisSpec = BasisSpec {
        kinds: &[ModeKind::Stream, ModeKind::Swirl],
        phases: &[Phase::Cos, Phase::Sin],
        min_harmonic: 1,
    };
    /// Cosine stream fields only, `m >= 1`.
    pub const STREAM_COS: BasisSpec = BasisSpec {
        kinds: &[ModeKind::Stream],
        phases: &[Phase::Cos],
        min_harmonic: 1,
    };
}

impl PerturbationBasis {
    /// The first `size` fields ordered by frequency `m + n`, then `m`, phase and kind.
    pub fn graded(grid: &Arc<Grid>, size: usize, spec: BasisSpec) -> Result<Self> {
        Self::build(grid, spec, |labels| labels.truncate(size), Some(size))
    }

    /// Every field with frequency `m + n <= max_frequency`.
    pub fn up_to_frequency(grid: &Arc<Grid>, max_frequency: usize, spec: BasisSpec) -> Result<Self> {
        Self::build(grid, spec, |labels| labels.retain(|l| l.0 + l.1 <= max_frequency), None)
    }

    fn build(
        grid: &Arc<Grid>,
        spec: BasisSpec,
        select: impl FnOnce(&mut Vec<(usize, usize, Phase, ModeKind)>),
        expected: Option<usize>,
    ) -> Result<Self> {
        if grid.has_pole() {
            return Err(Error::Unsupported(
                "perturbation bases are built for grids without a chart pole".into(),
            ));
        }
        let phases: &[Phase] = if grid.psi_periodic() { spec.phases } else { &[Phase::Sin] };
        let nyquist = if grid.psi_periodic() { grid.npsi / 2 } else { grid.npsi };
        let mut candidates = Vec::new();
        for nu in (spec.min_harmonic + 1)..=(grid.nr + nyquist) {
            for m in spec.min_harmonic..nu {
                let n = nu - m;
                if m >= nyquist || n > grid.nr {
                    continue;
                }
                for &ph in phases {
                    for &k in spec.kinds {
                        candidates.push((m, n, ph, k));
                    }
                }
            }
            if let Some(e) = expected {
                if candidates.len() >= e {
                    break;
                }
            }
        }
        select(&mut candidates);
        if let Some(e) = expected {
            if candidates.len() < e {
                return Err(Error::Precondition(format!(
                    "grid {}x{} cannot host {e} basis fields",
                    grid.nr, grid.npsi
                )));
            }
        }
        let max_n = candidates.iter().map(|c| c.1).max().unwrap_or(0);
        let mut cache: std::collections::HashMap<usize, Vec<(f64, Vec<f64>)>> = Default::default();
        let mut labels = Vec::with_capacity(candidates.len());
        let mut modes = Vec::with_capacity(candidates.len());
        for (m, n, phase, kind) in candidates {
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(m) {
                e.insert(radial_profiles(grid, m, max_n)?);
            }
            let (eigenvalue, profile) = &cache[&m][n - 1];
            let label = ModeLabel {
                m,
                n,
                phase,
                kind,
                frequency: m + n,
                eigenvalue: *eigenvalue,
            };
            let field = mode_field(grid, &label, profile);
            let norm = inner_product(&field, &field).sqrt();
            labels.push(label);
            modes.push(field.scale(1.0 / norm));
        }
        Ok(PerturbationBasis {
            grid: Arc::clone(grid),
            labels,
            modes,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| inner_product(&self.modes[i], &self.modes[j]))
    }

    /// `<b_i, u>` for every basis field.
    pub fn coefficients(&self, u: &AxisymField) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.modes.iter().map(|b| inner_product(b, u)))
    }

    /// `sum_i c_i b_i`.
    pub fn synthesize(&self, c: &DVector<f64>) -> AxisymField {
        let mut out = AxisymField::zeros(&self.grid);
        for (ci, b) in c.iter().zip(&self.modes) {
            out.axpy(*ci, b);
        }
        out
    }

    /// Indices of fields whose frequency exceeds `threshold`.
    pub fn tail(&self, threshold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.labels[k].frequency > threshold).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GeometryKind, Profile};
    use crate::grid::Domain;

    fn cylinder(n: usize) -> Arc<Grid> {
        let dom = Domain::periodic(0.0, 1.0, 0.5 * PI).unwrap();
        Grid::new(GeometryKind::doubly_warped(Profile::EuclideanRotation), dom, n, n).unwrap()
    }

    #[test]
    fn basis_is_orthonormal() {
        for size in [4, 8, 16] {
            let b = PerturbationBasis::graded(&cylinder(24), size, BasisSpec::JACOBI).unwrap();
            assert_eq!(b.len(), size);
            let g = b.gram();
            let err = (&g - DMatrix::identity(size, size)).amax();
            assert!(err < 1e-8, "{size}: {err:e}");
        }
        let walls = Grid::new(
            GeometryKind::doubly_warped(Profile::Sol),
            Domain::new(-0.5, 0.5, PsiExtent::Walls { min: 0.0, max: 1.0 }).unwrap(),
            16,
            16,
        )
        .unwrap();
        let b = PerturbationBasis::graded(&walls, 8, BasisSpec::JACOBI).unwrap();
        assert!((b.gram() - DMatrix::identity(8, 8)).amax() < 1e-8);
    }

    #[test]
    fn smoothest_profile_resembles_bessel() {
        // the first radial profile of |K|^2 Delta_K on the unit cylinder is r J1(j11 r)
        let g = cylinder(64);
        let prof = radial_profiles(&g, 1, 1).unwrap();
        let (lam, p) = &prof[0];
        let k_z = 4.0;
        let j11 = 3.831_705_970_207_512;
        let expect = -(j11 * j11 + k_z * k_z);
        assert!((lam - expect).abs() / expect.abs() < 2e-3, "{lam} vs {expect}");
        let peak = p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| g.r_nodes[i])
            .unwrap();
        // r J1(j11 r) peaks near r = 0.63
        assert!((peak - 0.63).abs() < 0.03, "{peak}");
    }

    #[test]
    fn graded_order_and_tails() {
        let b = PerturbationBasis::up_to_frequency(&cylinder(32), 6, BasisSpec::STREAM_COS).unwrap();
        assert!(b.labels.windows(2).all(|w| w[0].frequency <= w[1].frequency));
        assert_eq!(b.len(), 15);
        assert_eq!(b.tail(4).len(), 9);
        let c = b.coefficients(&b.modes[3]);
        assert!((c[3] - 1.0).abs() < 1e-10);
        let back = b.synthesize(&c);
        assert!(back.sub(&b.modes[3]).max_abs() < 1e-10);
    }
}
