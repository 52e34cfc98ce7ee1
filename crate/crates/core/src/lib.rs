//! Slepian-function beam synthesis for uniform linear arrays.
//!
//! Weights are written as row vectors and applied unconjugated: the array
//! factor is `AF(s) = v . a(s)` with `a(s)[m] = exp(-j m kd s)` and
//! `s = cos(theta)`.

pub mod array_model;
pub mod capacity;
pub mod codebook;
pub mod concentration;
pub mod error;
pub mod format;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod synthesizers;
pub mod trig;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
