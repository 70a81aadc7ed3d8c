//! Spectral toolkit for the Dirac equation on a two-dimensional cone
//! (the transverse section of a cosmic string).
//!
//! The crate decomposes spinor fields into angular modes, diagonalizes each
//! radial Dirac operator with a relativistic Hankel transform, evolves data
//! exactly in the spectral variable, evaluates the heat and Schrödinger
//! kernels in closed form, and measures dispersive decay rates.

pub mod eigenbasis;
pub mod estimates;
pub mod error;
pub mod extension;
pub mod grid;
pub mod hankel;
pub mod io;
pub mod propagator;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
