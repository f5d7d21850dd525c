pub mod battery;
pub mod cli;
pub mod connect;
pub mod error;
pub mod grassmann;
pub mod json;
pub mod linalg;
pub mod line;
pub mod matrix;
pub mod period;
pub mod rep;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use matrix::{CMatrix, Matrix, RMatrix};
pub use scalar::{Complex, Rational, Real, Scalar, DEFAULT_TOL};
