//! Spectra, trace maps, fractal-dimension bounds and transport bounds for
//! Sturmian Jacobi operators.

pub mod cf;
pub mod error;
pub mod numerics;
pub mod spectrum;
pub mod transport;
pub mod tracemap;

pub use error::{Error, Result};
