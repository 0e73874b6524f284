//! Quadratic differentials with second-order poles and the harmonic maps that
//! realize their measured foliations.
//!
//! The crate is organized bottom-up:
//!
//! - [`qd`]: differentials on planar charts, residues, lengths and measures
//! - [`foliation`]: horizontal leaves, collapsing values and SVG portraits
//! - [`cylinder`]: model cylindrical ends and the length–area bound
//! - [`tree`]: metric tree targets with distance and barycenter
//! - [`harmonic`]: discrete Dirichlet energy minimization on cylinder grids
//! - [`exhaust`]: growing-modulus exhaustion runs and the pole-order probe
//! - [`mf2`]: coordinates for foliations with centers and residue prescription
//! - [`io`]: JSON documents shared with the command-line tool

pub mod cylinder;
pub mod error;
pub mod exhaust;
pub mod foliation;
pub mod harmonic;
pub mod io;
pub mod mf2;
pub mod qd;
pub mod tree;

pub use error::{Error, Result};
pub use num_complex::Complex64;
