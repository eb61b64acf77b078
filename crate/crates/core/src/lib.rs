//! Scattering toolkit for Hamiltonians `H = P(-i grad) + V` with block-anisotropic
//! dispersion symbols, decay-class admissibility, Enss-type incoming/outgoing
//! decompositions, wave operators and discrete spectra on periodic lattices.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod cli;
pub mod enss;
pub mod error;
mod fft;
pub mod field;
mod linalg;
pub mod potential;
pub mod propagate;
pub mod rational;
pub mod report;
pub mod scatter;
pub mod spectrum;
pub mod symbol;

pub use error::{Error, Result};
