//! Approximation of the Koopman, Perron-Frobenius, and Koopman-von Neumann
//! generators of autonomous ODEs from data or quadrature, with spectral
//! analysis, unitary wavefunction propagation, and compilation of structured
//! projected propagators into quantum circuits.

extern crate blas_src;

pub mod error;
pub mod linalg;
pub mod systems;
pub mod dictionary;
pub mod archive;
pub mod estimator;
pub mod propagate;
pub mod qcircuit;
pub mod reference;
pub mod spectral;

pub use error::{KvnError, Result};
