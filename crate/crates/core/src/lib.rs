//! Numerical laboratory for open-system thermalization of chaotic quantum systems.
//!
//! The crate builds, at desk scale, the machinery needed to study how a small
//! chaotic system relaxes to its Gibbs state:
//!
//! - [`spectrum`]: chaotic spin-chain Hamiltonians, exact diagonalization,
//!   rounding of the spectrum into energy bins, densities of states.
//! - [`bath`]: closed-form quasi-free fermionic bath functions (two-point
//!   correlator, spectral function, half-line transform, Lamb-shift kernel).
//! - [`superop`]: dense superoperator algebra with weighted inner products,
//!   adjoints, self/anti-self-adjoint splits, spectra and norm estimates.
//! - [`davies`]: the frequency-resolved Davies dissipator of a rounded
//!   Hamiltonian and the finite-coherence-width dissipator with Lamb shift.
//! - [`expander`]: local energy-block Lindbladians, their gaps, the
//!   cross-term-dropped expectation, and deviation scans.
//! - [`rmt`]: Gaussian ensemble sampling, closed-form expected block maps,
//!   and Monte Carlo checks of spectral-norm concentration.
//! - [`randomwalk`]: classical chains on the rounded spectrum, conductance,
//!   Cheeger bounds, and gap scaling of the pooled pair walk.
//! - [`metropolis`]: quantum Metropolis CP maps with a finite-resolution
//!   phase-estimation model, approximate detailed balance, and fixed points.

pub mod bath;
pub mod davies;
pub mod expander;
pub mod linalg;
pub mod metropolis;
pub mod pauli;
pub mod quad;
pub mod randomwalk;
pub mod rmt;
pub mod spectrum;
pub mod superop;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} = {got}, limit {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("sector refers to missing bin {label}")]
    MissingBin { label: f64 },
    #[error("operator basis mismatch: {left} vs {right}")]
    BasisMismatch { left: String, right: String },
    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
