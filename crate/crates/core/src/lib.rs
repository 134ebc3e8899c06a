//! Axisymmetric ideal flow on three-manifolds with a Killing symmetry.
//!
//! The 3D Euler equations reduce to a stream function `f` and swirl `sigma`
//! on a two-dimensional quotient. This crate discretizes that quotient,
//! integrates the reduced equations, and studies their linearization and
//! coadjoint orbits.

pub mod app;
pub mod check;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod linearized;
pub mod operators;
pub mod orbits;
pub mod presets;
pub mod simulate;
pub mod solver;

pub use error::{Error, Result};
