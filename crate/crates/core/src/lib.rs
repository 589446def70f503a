//! Exceptional points of non-Hermitian matrices: detection through
//! nilpotency, hierarchical composition by unidirectional coupling, spectral
//! response strengths, and perturbation-scaling experiments.
//!
//! The modules build on each other bottom-up:
//!
//! - [`cmatrix`]: dense complex matrices, SVD-based norms/rank/kernel/solves
//!   and a Hessenberg QR eigensolver.
//! - [`ep`]: EP detection, response strength, Green's function, splitting
//!   predictions and bounds.
//! - [`jordan`]: gauge-fixed Jordan chains and the coupling amplitude.
//! - [`compose`]: block composition of two EPs and its response strength.
//! - [`perturb`]: random perturbation ensembles, sweeps and slope fits.
//! - [`models`]: the PT-symmetric dimer and trimer.
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod cmatrix;
pub mod compose;
pub mod ep;
pub mod error;
pub mod jordan;
pub mod models;
pub mod perturb;

#[cfg(test)]
mod test_support;

pub use cmatrix::{ComplexMatrix, ComplexScalar, ComplexVector};
pub use error::{Error, Result};
