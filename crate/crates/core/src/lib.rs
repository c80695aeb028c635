//! Numerical toolkit for kinks of fractional phi^4 field equations with the
//! Riesz derivative D^alpha: stationary and traveling profiles, sharp tail
//! asymptotics, resolvent kernels, linearized spectra, and parabolic dynamics.

pub mod asym;
pub mod error;
pub mod evolve;
pub mod green;
pub mod io;
pub mod kink;
pub mod specops;
pub mod spectrum;

pub use error::{Error, Result};
