//! Dirichlet p-Laplacian spectra and fundamental-eigenvalue-ratio bounds.
//!
//! The crate has five layers:
//! - [`bounds`]: regime constants and the closed-form ratio/gap bounds;
//! - [`one_d`]: exact 1D spectra on an interval via shooting;
//! - [`grid`]: meshed boxes, the discrete Rayleigh quotient and weighted
//!   moments;
//! - [`solver`]: principal eigenpairs by descent plus the genus-2 splitting
//!   upper estimate for the second eigenvalue;
//! - [`audit`]: per-inequality slack reports over computed eigenpairs.

pub mod audit;
pub mod bounds;
pub mod error;
pub mod grid;
pub mod one_d;
pub mod params;
pub mod solver;

pub use error::{Error, Result};
pub use params::ProblemParams;
