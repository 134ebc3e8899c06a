//! Output artifacts: diagnostics CSV, binary field snapshots, text tables.
//!
//! A snapshot file is little-endian: `nr` and `npsi` as `i64`, then
//! `r_min, r_max, psi_min, psi_max` as `f64`, then `nr * npsi` row-major
//! `f64` node values.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::dynamics::Diagnostics;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::PsiExtent;

/// Streams diagnostics rows to a CSV file.
pub struct DiagnosticsWriter {
    out: BufWriter<File>,
}

impl DiagnosticsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", Diagnostics::CSV_HEADER)?;
        Ok(DiagnosticsWriter { out })
    }

    pub fn row(&mut self, d: &Diagnostics) -> Result<()> {
        writeln!(self.out, "{}", d.csv_row())?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nr: usize,
    pub npsi: usize,
    pub r_range: [f64; 2],
    pub psi_range: [f64; 2],
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn of(field: &ScalarField) -> Self {
        let g = &field.grid;
        let psi_range = match g.domain.psi {
            PsiExtent::Periodic { period } => [0.0, period],
            PsiExtent::Walls { min, max } => [min, max],
        };
        Snapshot {
            nr: g.nr,
            npsi: g.npsi,
            r_range: [g.domain.r_min, g.domain.r_max],
            psi_range,
            values: field.values.clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(48 + 8 * self.values.len());
        b.extend((self.nr as i64).to_le_bytes());
        b.extend((self.npsi as i64).to_le_bytes());
        for v in self.r_range.iter().chain(&self.psi_range).chain(&self.values) {
            b.extend(v.to_le_bytes());
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::Io("truncated or malformed snapshot".into());
        let word = |k: usize| -> Result<[u8; 8]> {
            bytes.get(8 * k..8 * k + 8).and_then(|s| s.try_into().ok()).ok_or_else(bad)
        };
        let nr = i64::from_le_bytes(word(0)?);
        let npsi = i64::from_le_bytes(word(1)?);
        if nr <= 0 || npsi <= 0 {
            return Err(bad());
        }
        let (nr, npsi) = (nr as usize, npsi as usize);
        if bytes.len() != 48 + 8 * nr * npsi {
            return Err(bad());
        }
        let f = |k: usize| word(k).map(f64::from_le_bytes);
        Ok(Snapshot {
            nr,
            npsi,
            r_range: [f(2)?, f(3)?],
            psi_range: [f(4)?, f(5)?],
            values: (0..nr * npsi).map(|k| f(6 + k)).collect::<Result<_>>()?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        Snapshot::from_bytes(&bytes)
    }
}

/// Step indices at which `count` evenly spaced snapshots (after the initial
/// one) fall in a run of `steps` steps.
pub fn snapshot_steps(steps: usize, count: usize) -> Vec<usize> {
    if count == 0 {
        return Vec::new();
    }
    let mut s: Vec<usize> = (0..=count).map(|k| (k * steps + count / 2) / count).collect();
    s.dedup();
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Boundary, Parity};
    use crate::geometry::{GeometryKind, Profile};
    use crate::grid::{Domain, Grid};

    #[test]
    fn snapshot_round_trip_and_layout() {
        let g = Grid::new(GeometryKind::doubly_warped(Profile::Sol), Domain::periodic(0.0, 2.0, 6.0).unwrap(), 5, 4).unwrap();
        let f = ScalarField::from_fn(&g, Parity::Even, Boundary::Free, |r, p| r + 10.0 * p);
        let s = Snapshot::of(&f);
        let b = s.to_bytes();
        assert_eq!(b.len(), 48 + 8 * 20);
        assert_eq!(i64::from_le_bytes(b[0..8].try_into().unwrap()), 5);
        assert_eq!(f64::from_le_bytes(b[24..32].try_into().unwrap()), 2.0);
        assert_eq!(f64::from_le_bytes(b[40..48].try_into().unwrap()), 6.0);
        assert_eq!(f64::from_le_bytes(b[56..64].try_into().unwrap()), f.at(0, 1));
        assert_eq!(Snapshot::from_bytes(&b).unwrap(), s);
        assert!(Snapshot::from_bytes(&b[..50]).is_err());
    }

    #[test]
    fn snapshot_schedule() {
        assert!(snapshot_steps(10, 0).is_empty());
        assert_eq!(snapshot_steps(10, 2), vec![0, 5, 10]);
        assert_eq!(snapshot_steps(7, 3), vec![0, 2, 5, 7]);
        assert_eq!(snapshot_steps(2, 5), vec![0, 1, 2]);
    }
}
