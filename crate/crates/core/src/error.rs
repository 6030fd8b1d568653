//! Error types shared across the solver and bound layers.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its domain (e.g. p <= 1, empty extent).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input data is malformed or degenerate (zero field, origin on a node, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// No bound of Theorem 1 applies to this (p, N) regime.
    #[error("no bound available: hypothesis \"{hypothesis}\" fails for p = {p}, N = {n_dim}")]
    NoBoundAvailable {
        hypothesis: &'static str,
        p: f64,
        n_dim: usize,
    },

    /// The initial eigenvalue sweep never straddled the target mode.
    #[error("bracket not found for mode {mode} after {expansions} expansions")]
    BracketNotFound { mode: usize, expansions: usize },

    /// Iteration budget exhausted before the convergence test was met.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        /// Best eigenvalue estimate reached before giving up.
        best_lambda: f64,
    },

    /// An internal consistency check failed (e.g. sign change in the principal mode).
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
