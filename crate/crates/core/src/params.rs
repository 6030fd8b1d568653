//! Problem parameters: the exponent p and the spatial dimension N.

use crate::error::{Error, Result};

/// The pair (p, N) together with the conjugate exponent p' = p/(p-1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub p: f64,
    pub n_dim: usize,
    pub p_conj: f64,
}

impl ProblemParams {
    pub fn new(p: f64, n_dim: usize) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "exponent p must be finite and > 1, got {p}"
            )));
        }
        if n_dim < 1 {
            return Err(Error::InvalidParameter(
                "dimension N must be >= 1".to_string(),
            ));
        }
        Ok(Self {
            p,
            n_dim,
            p_conj: p / (p - 1.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_identity() {
        for p in [1.1, 1.5, 2.0, 3.0, 10.0] {
            let params = ProblemParams::new(p, 2).unwrap();
            let rel = (params.p_conj * (p - 1.0) - p).abs() / p;
            assert!(rel <= 1e-12, "p = {p}: relative defect {rel}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ProblemParams::new(1.0, 1).is_err());
        assert!(ProblemParams::new(0.5, 1).is_err());
        assert!(ProblemParams::new(f64::NAN, 1).is_err());
        assert!(ProblemParams::new(2.0, 0).is_err());
    }
}
