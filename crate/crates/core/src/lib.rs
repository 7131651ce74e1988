//! Numerical laboratory for fractional Hardy-Sobolev functionals.
//!
//! The crate evaluates weighted Lebesgue and Gagliardo-type functionals of
//! explicit trial functions, measures their behaviour under dilations,
//! scans Rayleigh quotients toward critical exponents and computes Grand
//! Lebesgue Space norms.

pub mod cli;
pub mod constants;
pub mod error;
pub mod gls;
pub mod model;
pub mod norms;
pub mod quad;
pub mod scaling;
pub mod trialfuncs;
pub mod verify;

pub use error::{Error, Result};
