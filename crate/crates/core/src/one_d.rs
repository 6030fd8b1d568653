//! Exact 1D Dirichlet spectra on an interval via shooting.
//!
//! The eigenvalue problem -(|u'|^(p-2) u')' = lambda |u|^(p-2) u with
//! u(a) = u(b) = 0 is integrated as the first-order system
//! u' = |v|^(p'-2) v, v' = -lambda |u|^(p-2) u,
//!
//! where v = |u'|^(p-2) u' and p' = p/(p-1).  This form keeps the right-hand
//! side continuous through critical points of u.  The n-th eigenvalue is the
//! lambda at which the n-th zero of u reaches b, located by bisection on the
//! interior zero count.

use crate::audit::AuditEntry;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Default number of RK4 steps; doubled until the eigenvalue stabilizes.
pub const BASE_STEPS: usize = 4096;
const MAX_STEPS: usize = 1 << 17;
const MAX_BRACKET_EXPANSIONS: usize = 60;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval1D {
    pub a: f64,
    pub b: f64,
}

impl Interval1D {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "interval requires b > a, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

/// One eigenmode: index, eigenvalue, interior zero count, and the sampled
/// eigenfunction (uniform nodes from a to b inclusive).
#[derive(Debug, Clone)]
pub struct Mode1D {
    pub index: usize,
    pub lambda: f64,
    pub zeros: usize,
    pub samples: Vec<f64>,
}

/// pi_p = 2 pi / (p sin(pi / p)); equals pi at p = 2.
pub fn pi_p(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "pi_p requires p > 1, got {p}"
        )));
    }
    Ok(2.0 * PI / (p * (PI / p).sin()))
}

/// Closed-form candidate lambda_n = (p-1) (n pi_p / L)^p.  Used as a
/// cross-check against the shooting solver, not as ground truth.
pub fn lambda_1d_closed_form(interval: &Interval1D, p: f64, n: usize) -> Result<f64> {
    let pip = pi_p(p)?;
    Ok((p - 1.0) * (n as f64 * pip / interval.length()).powf(p))
}

/// Exact 1D fundamental ratio lambda_2 / lambda_1 = 2^p.
pub fn ratio_1d(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "ratio_1d requires p > 1, got {p}"
        )));
    }
    Ok(2.0_f64.powf(p))
}

fn sgn_pow(x: f64, e: f64) -> f64 {
    x.signum() * x.abs().powf(e)
}

/// Integrate the shooting system over [0, L] with `steps` RK4 steps from
/// (u, v)(0) = (0, slope).  Returns the u samples at the step nodes.
fn integrate(p: f64, lambda: f64, length: f64, slope: f64, steps: usize) -> Vec<f64> {
    let pc = p / (p - 1.0);
    let eu = pc - 1.0; // u' = sgn(v) |v|^(p'-1)
    let ev = p - 1.0; // v' = -lambda sgn(u) |u|^(p-1)
    let h = length / steps as f64;
    let f = |u: f64, v: f64| (sgn_pow(v, eu), -lambda * sgn_pow(u, ev));
    let mut u = 0.0;
    let mut v = slope;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(u);
    for _ in 0..steps {
        let (k1u, k1v) = f(u, v);
        let (k2u, k2v) = f(u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = f(u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = f(u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        samples.push(u);
    }
    samples
}

/// Count sign changes over all cells (the last cell included, so a zero
/// passing through b is seen as soon as it enters).
fn crossings_all(samples: &[f64]) -> usize {
    samples.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

/// Count sign changes excluding the final cell: interior zeros only.
fn crossings_interior(samples: &[f64]) -> usize {
    samples[..samples.len() - 1]
        .windows(2)
        .filter(|w| w[0] * w[1] < 0.0)
        .count()
}

/// Locate lambda_n at a fixed step count by bisection on the zero count.
fn shoot_at_steps(p: f64, n: usize, length: f64, slope: f64, steps: usize, tol: f64) -> Result<f64> {
    let above = |lambda: f64| crossings_all(&integrate(p, lambda, length, slope, steps)) >= n;
    let scale = (n as f64 * PI / length).powf(p) * (p - 1.0).max(1.0);
    let mut lo = 1e-3 * scale;
    let mut hi = 10.0 * scale;
    let mut expansions = 0;
    while above(lo) {
        lo *= 0.1;
        expansions += 1;
        if expansions > MAX_BRACKET_EXPANSIONS {
            return Err(Error::BracketNotFound { mode: n, expansions });
        }
    }
    while !above(hi) {
        hi *= 10.0;
        expansions += 1;
        if expansions > MAX_BRACKET_EXPANSIONS {
            return Err(Error::BracketNotFound { mode: n, expansions });
        }
    }
    let mut iters = 0;
    while hi - lo > tol * 0.5 * (hi + lo) {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
        if iters > MAX_BISECTIONS {
            return Err(Error::NonConvergence {
                iterations: iters,
                residual: hi - lo,
                best_lambda: mid,
            });
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Shooting eigenvalue with a chosen initial slope v(a); eigenvalues are
/// slope-independent by homogeneity, which the tests assert.
pub fn shoot_eigenvalue_with_slope(
    interval: &Interval1D,
    p: f64,
    n: usize,
    tol: f64,
    slope: f64,
) -> Result<Mode1D> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "shooting requires p > 1, got {p}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("mode index n must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let length = interval.length();
    let mut steps = BASE_STEPS;
    let mut lambda = shoot_at_steps(p, n, length, slope, steps, tol)?;
    loop {
        let next = shoot_at_steps(p, n, length, slope, steps * 2, tol)?;
        let rel = (next - lambda).abs() / next.abs();
        steps *= 2;
        lambda = next;
        if rel < tol || steps >= MAX_STEPS {
            break;
        }
    }
    let samples = integrate(p, lambda, length, slope, steps);
    let zeros = crossings_interior(&samples);
    Ok(Mode1D {
        index: n,
        lambda,
        zeros,
        samples,
    })
}

/// Shooting eigenvalue for the n-th Dirichlet mode on the interval.
pub fn shoot_eigenvalue(interval: &Interval1D, p: f64, n: usize, tol: f64) -> Result<Mode1D> {
    shoot_eigenvalue_with_slope(interval, p, n, tol, 1.0)
}

/// 1D Hardy check: int |u/x|^p <= (p/(p-1))^p int |u'|^p, both by composite
/// midpoint quadrature over uniform samples of u on [0, L].
///
/// `samples` must include both endpoints and vanish there.
pub fn hardy_check_1d(samples: &[f64], length: f64, p: f64) -> Result<AuditEntry> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 samples".into()));
    }
    if !(length > 0.0) {
        return Err(Error::InvalidParameter("length must be positive".into()));
    }
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "hardy check requires p > 1, got {p}"
        )));
    }
    let scale = samples.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::InvalidInput("field is identically zero".into()));
    }
    let eps = 1e-12 * scale;
    if samples[0].abs() > eps || samples[samples.len() - 1].abs() > eps {
        return Err(Error::InvalidInput(
            "field must vanish at both endpoints".into(),
        ));
    }
    let cells = samples.len() - 1;
    let h = length / cells as f64;
    let mut lhs = 0.0;
    let mut grad = 0.0;
    for i in 0..cells {
        let x_mid = (i as f64 + 0.5) * h;
        let u_mid = 0.5 * (samples[i] + samples[i + 1]);
        lhs += (u_mid / x_mid).abs().powf(p) * h;
        grad += ((samples[i + 1] - samples[i]) / h).abs().powf(p) * h;
    }
    let rhs = (p / (p - 1.0)).powf(p) * grad;
    Ok(AuditEntry::checked("hardy_1d", lhs, rhs, 1e-6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pi_p_classical() {
        assert_relative_eq!(pi_p(2.0).unwrap(), PI, max_relative = 1e-14);
    }

    #[test]
    fn pi_p_rejects_bad_p() {
        assert!(pi_p(1.0).is_err());
    }

    #[test]
    fn ratio_values() {
        assert_relative_eq!(ratio_1d(2.0).unwrap(), 4.0);
        assert_relative_eq!(ratio_1d(3.0).unwrap(), 8.0);
        assert_relative_eq!(ratio_1d(1.5).unwrap(), 2.0_f64.powf(1.5));
    }

    #[test]
    fn classical_modes() {
        let iv = Interval1D::new(0.0, 1.0).unwrap();
        let m1 = shoot_eigenvalue(&iv, 2.0, 1, 1e-8).unwrap();
        assert_relative_eq!(m1.lambda, PI * PI, max_relative = 1e-6);
        assert_eq!(m1.zeros, 0);
        let m2 = shoot_eigenvalue(&iv, 2.0, 2, 1e-8).unwrap();
        assert_relative_eq!(m2.lambda, 4.0 * PI * PI, max_relative = 1e-6);
        assert_eq!(m2.zeros, 1);
    }

    #[test]
    fn p3_matches_closed_form() {
        let iv = Interval1D::new(0.0, 1.0).unwrap();
        let m = shoot_eigenvalue(&iv, 3.0, 1, 1e-8).unwrap();
        let cf = lambda_1d_closed_form(&iv, 3.0, 1).unwrap();
        assert_relative_eq!(m.lambda, cf, max_relative = 1e-6);
    }

    #[test]
    fn slope_invariance() {
        let iv = Interval1D::new(0.0, 1.0).unwrap();
        for p in [1.5, 3.0] {
            let a = shoot_eigenvalue_with_slope(&iv, p, 1, 1e-9, 1.0).unwrap();
            let b = shoot_eigenvalue_with_slope(&iv, p, 1, 1e-9, 2.5).unwrap();
            assert_relative_eq!(a.lambda, b.lambda, max_relative = 1e-7);
        }
    }

    #[test]
    fn sturm_zero_counts() {
        let iv = Interval1D::new(0.0, 1.0).unwrap();
        for p in [1.5, 2.0, 3.0] {
            for n in 1..=4 {
                let m = shoot_eigenvalue(&iv, p, n, 1e-7).unwrap();
                assert_eq!(m.zeros, n - 1, "p = {p}, n = {n}");
            }
        }
    }

    #[test]
    fn scaling_law() {
        for p in [1.5, 2.0, 3.0] {
            let unit = Interval1D::new(0.0, 1.0).unwrap();
            let long = Interval1D::new(0.0, 2.5).unwrap();
            let lu = shoot_eigenvalue(&unit, p, 1, 1e-8).unwrap().lambda;
            let ll = shoot_eigenvalue(&long, p, 1, 1e-8).unwrap().lambda;
            assert_relative_eq!(ll, lu * 2.5_f64.powf(-p), max_relative = 1e-6);
        }
    }

    #[test]
    fn hardy_polynomial_closed_form() {
        // u = x(1-x), p = 2: lhs = 1/3, rhs = 4/3, slack = 1.
        let m = 4096;
        let samples: Vec<f64> = (0..=m)
            .map(|i| {
                let x = i as f64 / m as f64;
                x * (1.0 - x)
            })
            .collect();
        let e = hardy_check_1d(&samples, 1.0, 2.0).unwrap();
        assert_relative_eq!(e.lhs, 1.0 / 3.0, max_relative = 1e-5);
        assert_relative_eq!(e.rhs, 4.0 / 3.0, max_relative = 1e-5);
        assert_relative_eq!(e.slack, 1.0, max_relative = 1e-4);
        assert!(e.satisfied);
    }

    #[test]
    fn hardy_sine() {
        let m = 4096;
        let samples: Vec<f64> = (0..=m)
            .map(|i| (PI * i as f64 / m as f64).sin())
            .collect();
        let e = hardy_check_1d(&samples, 1.0, 2.0).unwrap();
        assert!(e.slack > 0.0);
        assert!(e.rhs < 4.0 * PI * PI / 2.0 * 1.001, "rhs = {}", e.rhs);
    }

    #[test]
    fn hardy_on_principal_mode_p3() {
        let iv = Interval1D::new(0.0, 1.0).unwrap();
        let m = shoot_eigenvalue(&iv, 3.0, 1, 1e-8).unwrap();
        let mut samples = m.samples.clone();
        // Shooting lands u(b) near but not exactly at zero; pin the endpoint.
        *samples.last_mut().unwrap() = 0.0;
        let e = hardy_check_1d(&samples, 1.0, 3.0).unwrap();
        assert!(e.slack >= 0.0, "slack = {}", e.slack);
    }

    #[test]
    fn hardy_rejects_nonvanishing_endpoints() {
        let samples = vec![0.0, 1.0, 0.5];
        assert!(hardy_check_1d(&samples, 1.0, 2.0).is_err());
    }
}
