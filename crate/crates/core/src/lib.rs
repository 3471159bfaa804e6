//! Numerical laboratory for spherically symmetric wave packets evolving under
//! the 3D point-interaction Hamiltonian (coupling `alpha`, center at the
//! origin), in units `hbar = 1`, `m = 1/2`.
//!
//! The crate evaluates the time-evolved wave function through two independent
//! routes (explicit propagator decompositions and generalized-eigenfunction
//! expansion), computes probability flux through distant spheres and cones,
//! and checks the flux-across-surfaces identity
//!
//! ```text
//!   lim_{R->inf} int_T^inf dt int_{Sigma_R} j . n dsigma
//!       = int_{C(Sigma)} |psi_out(k)|^2 d^3k
//! ```
//!
//! in all three coupling regimes, including the zero-energy resonance at
//! `alpha = 0`.

pub mod analysis;
pub mod config;
pub mod flux;
pub mod model;
pub mod numerics;
pub mod propagator;
pub mod spectral;

pub use num_complex::Complex64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
