//! Closed-form constants and eigenvalue-ratio bounds.
//!
//! The constants m, m-hat, k-hat depend on the regime (p vs 2, N vs 1) and
//! feed the two ratio bounds: one valid for p <= 2 with N > p, the other for
//! p >= 2.  Everything here is a pure function of (p, N) and evaluates in
//! microseconds; no discretization is involved.

use crate::error::{Error, Result};
use crate::params::ProblemParams;

/// Which row of the constants table applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    PLe2N1,
    PLe2NGe2,
    PGe2N1,
    PGe2NGe2,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::PLe2N1 => "P_LE_2_N1",
            Regime::PLe2NGe2 => "P_LE_2_NGE2",
            Regime::PGe2N1 => "P_GE_2_N1",
            Regime::PGe2NGe2 => "P_GE_2_NGE2",
        }
    }
}

/// The regime constants entering both gap bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub m: f64,
    pub m_hat: f64,
    pub k_hat: f64,
    pub regime: Regime,
}

/// Which gap the bound controls: the plain gap for p <= 2, the shifted
/// gap lambda_2 - k_hat * lambda_1 for p >= 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapKind {
    Lambda2MinusLambda1,
    Lambda2MinusKhatLambda1,
}

/// A gap bound together with the gap it applies to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBound {
    pub value: f64,
    pub kind: GapKind,
}

/// Ratio bounds for lambda_2 / lambda_1; branches populate per regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBound {
    /// Gap bound at lambda_1 = 1, same regime selection as [`gamma_bound`].
    pub gamma_bound: f64,
    pub gamma_kind: GapKind,
    /// Branch valid for p <= 2, N > p.
    pub ratio_bound_eq7: Option<f64>,
    /// Branch valid for p >= 2.
    pub ratio_bound_eq9: Option<f64>,
    /// Minimum over the populated branches.
    pub best: f64,
}

/// The integrand of the m constant: f(x) = (p - x) x^(p-1) + (1 - x)^p.
fn m_objective(x: f64, p: f64) -> f64 {
    (p - x) * x.powf(p - 1.0) + (1.0 - x).powf(p)
}

/// m(p) = (max_{0<=x<=1} f(x))^(1/p), located by a 1024-point coarse grid
/// followed by golden-section refinement to 1e-10 in x.
///
/// Intended for 1 < p <= 2; for p >= 2 the constants table uses m = p - 1
/// instead, but the maximization itself stays evaluable for diagnostics.
pub fn compute_m(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "compute_m requires p > 1, got {p}"
        )));
    }
    const GRID: usize = 1024;
    let mut best_i = 0;
    let mut best_f = f64::NEG_INFINITY;
    for i in 0..=GRID {
        let x = i as f64 / GRID as f64;
        let fx = m_objective(x, p);
        if fx > best_f {
            best_f = fx;
            best_i = i;
        }
    }
    // Bracket one cell either side of the coarse winner; endpoints stay
    // candidates because the bracket is clamped to [0, 1].
    let mut a = (best_i.saturating_sub(1)) as f64 / GRID as f64;
    let mut b = ((best_i + 1).min(GRID)) as f64 / GRID as f64;
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = m_objective(c, p);
    let mut fd = m_objective(d, p);
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = m_objective(c, p);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = m_objective(d, p);
        }
    }
    let x_star = 0.5 * (a + b);
    let max = best_f.max(m_objective(x_star, p));
    Ok(max.powf(1.0 / p))
}

/// Fill (m, m_hat, k_hat, regime) for the four regime rows.  At p = 2 the
/// two branches coincide; the p >= 2 row is used.
pub fn constants_table(params: &ProblemParams) -> Result<BoundConstants> {
    let p = params.p;
    let n = params.n_dim;
    if p >= 2.0 {
        let m = p - 1.0;
        let k = p.powf(2.0 - p) * (p - 1.0).powf(p - 1.0);
        if n == 1 {
            Ok(BoundConstants {
                m,
                m_hat: m,
                k_hat: k,
                regime: Regime::PGe2N1,
            })
        } else {
            Ok(BoundConstants {
                m,
                m_hat: 2.0_f64.powf((p - 2.0) / (2.0 * p)) * (p - 1.0),
                k_hat: 2.0_f64.powf((p - 2.0) / 2.0) * k,
                regime: Regime::PGe2NGe2,
            })
        }
    } else {
        let m = compute_m(p)?;
        if n == 1 {
            Ok(BoundConstants {
                m,
                m_hat: m,
                k_hat: 1.0,
                regime: Regime::PLe2N1,
            })
        } else {
            Ok(BoundConstants {
                m,
                m_hat: 2.0_f64.powf((2.0 - p) / (2.0 * p)) * m,
                k_hat: 1.0,
                regime: Regime::PLe2NGe2,
            })
        }
    }
}

/// Bound on the gap: lambda_2 - lambda_1 <= value for p <= 2 (with N > p),
/// lambda_2 - k_hat lambda_1 <= value for p >= 2.
pub fn gamma_bound(params: &ProblemParams, lambda1: f64) -> Result<GapBound> {
    if !(lambda1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda1 must be positive, got {lambda1}"
        )));
    }
    let consts = constants_table(params)?;
    let p = params.p;
    let n = params.n_dim as f64;
    if p >= 2.0 {
        Ok(GapBound {
            value: consts.m_hat.powf(p) * n.powf(-p / 2.0) * p.powf(p) * lambda1,
            kind: GapKind::Lambda2MinusKhatLambda1,
        })
    } else if n > p {
        Ok(GapBound {
            value: consts.m_hat.powf(p) * n * (p / (n - p)).powf(p) * lambda1,
            kind: GapKind::Lambda2MinusLambda1,
        })
    } else {
        Err(Error::NoBoundAvailable {
            hypothesis: "N > p",
            p,
            n_dim: params.n_dim,
        })
    }
}

/// Ratio bounds on lambda_2 / lambda_1; every applicable branch populates
/// and `best` is their minimum.
pub fn ratio_bound(params: &ProblemParams) -> Result<RatioBound> {
    let consts = constants_table(params)?;
    let p = params.p;
    let n = params.n_dim as f64;
    let eq7 = if p <= 2.0 && n > p {
        Some(1.0 + consts.m_hat.powf(p) * (p / (n - p)).powf(p) * n)
    } else {
        None
    };
    let eq9 = if p >= 2.0 {
        Some(consts.k_hat + consts.m_hat.powf(p) * n.powf(-p / 2.0) * p.powf(p))
    } else {
        None
    };
    let best = match (eq7, eq9) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => {
            return Err(Error::NoBoundAvailable {
                hypothesis: "N > p",
                p,
                n_dim: params.n_dim,
            })
        }
    };
    let gamma = gamma_bound(params, 1.0)?;
    Ok(RatioBound {
        gamma_bound: gamma.value,
        gamma_kind: gamma.kind,
        ratio_bound_eq7: eq7,
        ratio_bound_eq9: eq9,
        best,
    })
}

/// Outcome of the finite-p limit-inequality instance check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corollary4Check {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Finite-p check: (1/p) ratio^(1/p) <= m_hat / sqrt(N).
/// `ratio` is a computed or exact lambda_2 / lambda_1 at this p.
pub fn corollary4_check(params: &ProblemParams, ratio: f64) -> Result<Corollary4Check> {
    let consts = constants_table(params)?;
    let lhs = ratio.powf(1.0 / params.p) / params.p;
    let rhs = consts.m_hat / (params.n_dim as f64).sqrt();
    Ok(Corollary4Check {
        lhs,
        rhs,
        satisfied: lhs <= rhs,
    })
}
