//! Biphoton scattering through a resonant medium and the entanglement it
//! induces.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadrature`] builds Gauss-Legendre / Gauss-Laguerre grids and the
//!   Laguerre function basis.
//! * [`spectral`] evaluates frequency-domain single- and two-photon
//!   amplitudes, including the resummed perturbation series and its phase
//!   averages.
//! * [`cumulants`] holds the Kubo-Anderson second cumulants and the
//!   irreducible two-photon kernel in the time domain.
//! * [`schmidt`] performs weighted Schmidt decompositions and computes the
//!   von Neumann entropy, including the Laguerre-expansion route for the
//!   homogeneous kernel.
//! * [`stochastic`] samples correlated Ornstein-Uhlenbeck frequency noise
//!   and estimates dephasing factors by Monte Carlo.
//! * [`coincidence`] integrates the coincidence probability.

pub mod coincidence;
pub mod cumulants;
mod error;
pub mod quadrature;
pub mod schmidt;
pub mod spectral;
pub mod stochastic;

pub use error::{Error, Result};
pub use num_complex::Complex64;
