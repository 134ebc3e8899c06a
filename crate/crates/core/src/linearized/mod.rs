//! Linearization of the geodesic flow: the operator `Phi_t` on a finite basis.

pub mod basis;
pub mod integral;
pub mod labels;
pub mod scan;
pub mod shooting;

pub use basis::{BasisSpec, ModeKind, ModeLabel, PerturbationBasis, Phase};
