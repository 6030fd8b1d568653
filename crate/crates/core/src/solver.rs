//! Principal eigenpairs in N dimensions and the genus-2 splitting upper
//! estimate for the second eigenvalue.
//!
//! The principal pair is found by minimizing the discrete Rayleigh quotient
//! with a Sobolev-preconditioned descent direction (the raw nodal gradient
//! run through one inverse-Laplacian solve), backtracking line search
//! halving from 1.0, and renormalization int |u|^p = 1 after every step.
//! The preconditioner keeps the step count independent of the mesh size;
//! the accepted Rayleigh values are still monotone nonincreasing.

use crate::error::{Error, Result};
use crate::grid::{rayleigh, rayleigh_gradient, rayleigh_parts, MeshedDomain, ScalarField, Shape};
use std::f64::consts::PI;

/// A converged eigenpair under the normalization int |phi|^p = 1.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: f64,
    pub phi: ScalarField,
    /// Euclidean norm of the Rayleigh-quotient gradient at exit.
    pub residual: f64,
    pub iterations: usize,
}

/// Row-major cell weights |grad u|^(p-2) for the lagged-diffusion
/// preconditioner, floored away from zero so the p < 2 singular cells and
/// p > 2 degenerate cells stay usable.
fn cell_weights(field: &ScalarField, p: f64) -> Vec<f64> {
    let dom = &field.domain;
    let n = dom.n_dim;
    let cell_counts: Vec<usize> = dom.resolution.iter().map(|&r| r + 1).collect();
    let num_cells: usize = cell_counts.iter().product();
    let mut norms = Vec::with_capacity(num_cells);
    let mut cell = vec![0usize; n];
    let mut shifted = vec![0usize; n];
    let mut rms = 0.0;
    loop {
        let base = field.lattice_value(&cell);
        let mut g2 = 0.0;
        for a in 0..n {
            shifted.copy_from_slice(&cell);
            shifted[a] += 1;
            let d = (field.lattice_value(&shifted) - base) / dom.spacing[a];
            g2 += d * d;
        }
        rms += g2;
        norms.push(g2.sqrt());
        let mut done = true;
        for a in (0..n).rev() {
            cell[a] += 1;
            if cell[a] < cell_counts[a] {
                done = false;
                break;
            }
            cell[a] = 0;
        }
        if done {
            break;
        }
    }
    let floor = 1e-3 * (rms / num_cells as f64).sqrt();
    norms
        .iter()
        .map(|&g| g.max(floor).powf(p - 2.0))
        .collect()
}

/// Apply the weighted stiffness operator: the linearization of the
/// Rayleigh numerator at the current iterate, scaled so that a unit line
/// search step is Newton-like.  `weights` carries the per-cell coefficient
/// including all constant prefactors.
fn apply_weighted_stiffness(dom: &MeshedDomain, weights: &[f64], v: &[f64], out: &mut [f64]) {
    let strides = dom.strides();
    let res = &dom.resolution;
    let n = dom.n_dim;
    let cell_counts: Vec<usize> = res.iter().map(|&r| r + 1).collect();
    out.iter_mut().for_each(|o| *o = 0.0);
    let mut cell = vec![0usize; n];
    let mut ci = 0usize;
    loop {
        let w = weights[ci];
        // cell corner lattice point and its +e_a neighbors
        for a in 0..n {
            // forward difference along a at this cell
            let lo_interior = cell.iter().enumerate().all(|(b, &l)| l >= 1 && l <= res[b]);
            let hi_interior = cell
                .iter()
                .enumerate()
                .all(|(b, &l)| {
                    let l = if b == a { l + 1 } else { l };
                    l >= 1 && l <= res[b]
                });
            if !lo_interior && !hi_interior {
                continue;
            }
            let h = dom.spacing[a];
            let flat_of = |bump: usize| {
                let mut f = 0usize;
                for b in 0..n {
                    let l = if b == a { cell[b] + bump } else { cell[b] };
                    f += (l - 1) * strides[b];
                }
                f
            };
            let v_lo = if lo_interior { v[flat_of(0)] } else { 0.0 };
            let v_hi = if hi_interior { v[flat_of(1)] } else { 0.0 };
            let g = (v_hi - v_lo) / h;
            let t = w * g / h;
            if lo_interior {
                out[flat_of(0)] -= t;
            }
            if hi_interior {
                out[flat_of(1)] += t;
            }
        }
        ci += 1;
        let mut done = true;
        for a in (0..n).rev() {
            cell[a] += 1;
            if cell[a] < cell_counts[a] {
                done = false;
                break;
            }
            cell[a] = 0;
        }
        if done {
            break;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradient for the weighted stiffness system; SPD, so plain CG
/// suffices.
fn cg_solve(
    dom: &MeshedDomain,
    weights: &[f64],
    rhs: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let rhs_norm2 = dot(rhs, rhs);
    if rhs_norm2 == 0.0 {
        return x;
    }
    let mut rr = rhs_norm2;
    for _ in 0..max_iter {
        apply_weighted_stiffness(dom, weights, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new <= rel_tol * rel_tol * rhs_norm2 {
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    x
}

/// Initial guess: product of half-period sine bumps, positive everywhere.
fn sine_bump(domain: &MeshedDomain) -> ScalarField {
    let extents = domain.extents.clone();
    ScalarField::from_fn(domain, move |x| {
        extents
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &c)| (PI * (c - lo) / (hi - lo)).sin())
            .product()
    })
}

struct DescentOutcome {
    eigenpair: Eigenpair,
    converged: bool,
}

fn descend(domain: &MeshedDomain, p: f64, tol: f64, max_iter: usize) -> Result<DescentOutcome> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "descent requires p > 1, got {p}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let mut u = sine_bump(domain);
    u.normalize_lp(p)?;
    let mut r = rayleigh(&u, p)?;
    let mut history: Vec<f64> = vec![r];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let g = rayleigh_gradient(&u, p)?;
        residual = dot(&g.values, &g.values).sqrt();
        // Lagged-diffusion preconditioner: the numerator Hessian scale is
        // p |grad u|^(p-2) per cell times the cell volume over the
        // denominator, so with those factors folded in a unit step is
        // Newton-like and the line search rarely backtracks.
        let den = 1.0; // int |u|^p = 1 is maintained by renormalization
        let cell_vol: f64 = domain.spacing.iter().product();
        let scale = p * cell_vol / den;
        let weights: Vec<f64> = cell_weights(&u, p).iter().map(|w| w * scale).collect();
        let d = cg_solve(domain, &weights, &g.values, 1e-8, 400);
        let gd = dot(&g.values, &d);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand_values: Vec<f64> = u
                .values
                .iter()
                .zip(&d)
                .map(|(ui, di)| ui - t * di)
                .collect();
            // renormalize int |u|^p = 1 (leaves the quotient unchanged)
            let cand = match ScalarField::new(domain.clone(), std::mem::take(&mut cand_values)) {
                Ok(mut f) => {
                    if f.normalize_lp(p).is_err() {
                        t *= 0.5;
                        continue;
                    }
                    f
                }
                Err(_) => {
                    t *= 0.5;
                    continue;
                }
            };
            let rc = rayleigh(&cand, p)?;
            if rc <= r - 1e-4 * t * gd {
                u = cand;
                r = rc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Line search cannot decrease the quotient any further.
            converged = true;
            break;
        }
        history.push(r);
        if history.len() > 10 {
            let old = history[history.len() - 11];
            if (old - r).abs() < tol * r.abs() {
                converged = true;
                break;
            }
        }
    }
    let g = rayleigh_gradient(&u, p)?;
    residual = residual.min(dot(&g.values, &g.values).sqrt());
    Ok(DescentOutcome {
        eigenpair: Eigenpair {
            lambda: r,
            phi: u,
            residual,
            iterations,
        },
        converged,
    })
}

/// Principal eigenpair by Rayleigh-quotient descent.  Positivity of the
/// output is verified, not projected; a sign change at exit means the step
/// rule left the principal branch and is reported as an internal error.
pub fn principal_eigenpair(
    domain: &MeshedDomain,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Eigenpair> {
    let outcome = descend(domain, p, tol, max_iter)?;
    if !outcome.converged {
        return Err(Error::NonConvergence {
            iterations: outcome.eigenpair.iterations,
            residual: outcome.eigenpair.residual,
            best_lambda: outcome.eigenpair.lambda,
        });
    }
    let eig = outcome.eigenpair;
    if eig.phi.values.iter().any(|&v| v <= 0.0) {
        return Err(Error::Internal(
            "principal eigenfunction has a nonpositive interior node".into(),
        ));
    }
    Ok(eig)
}

/// Like [`principal_eigenpair`] but always returns the best iterate along
/// with a convergence flag.
pub fn principal_eigenpair_best(
    domain: &MeshedDomain,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Eigenpair, bool)> {
    let outcome = descend(domain, p, tol, max_iter)?;
    Ok((outcome.eigenpair, outcome.converged))
}

/// First Dirichlet Laplacian eigenvalue of the box (separable closed form).
pub fn lambda1_exact_p2(domain: &MeshedDomain) -> f64 {
    PI * PI
        * domain
            .extents
            .iter()
            .map(|&(lo, hi)| 1.0 / ((hi - lo) * (hi - lo)))
            .sum::<f64>()
}

/// Second Dirichlet Laplacian eigenvalue of the box: minimize
/// pi^2 sum (k_a / L_a)^2 over multi-indices k != (1, ..., 1).
pub fn lambda2_exact_p2(domain: &MeshedDomain) -> f64 {
    debug_assert!(matches!(
        domain.shape,
        Shape::Interval | Shape::Rectangle | Shape::Box
    ));
    let lengths: Vec<f64> = domain.extents.iter().map(|&(lo, hi)| hi - lo).collect();
    let n = lengths.len();
    let mut best = f64::INFINITY;
    let mut k = vec![1usize; n];
    loop {
        if k.iter().any(|&ki| ki != 1) {
            let v: f64 = k
                .iter()
                .zip(&lengths)
                .map(|(&ki, &l)| (ki as f64 / l).powi(2))
                .sum();
            best = best.min(PI * PI * v);
        }
        let mut done = true;
        for a in (0..n).rev() {
            k[a] += 1;
            if k[a] <= 10 {
                done = false;
                break;
            }
            k[a] = 1;
        }
        if done {
            break;
        }
    }
    best
}

/// Per-slab mass and coordinate along one axis, for the balancing search.
fn slab_masses(phi: &ScalarField, p: f64, axis: usize) -> (Vec<f64>, Vec<f64>) {
    let dom = &phi.domain;
    let res = dom.resolution[axis];
    let mut mass = vec![0.0; res];
    let vol = dom.node_volume();
    let strides = dom.strides();
    for (flat, &v) in phi.values.iter().enumerate() {
        let i = (flat / strides[axis]) % res;
        mass[i] += v.abs().powf(p) * vol;
    }
    let coords = (0..res).map(|i| dom.coord(axis, i)).collect();
    (mass, coords)
}

/// The two region ratios of the balancing argument at a given split:
/// (mass / weighted moment) over {x_axis < delta} and its complement.
pub fn region_ratios(phi: &ScalarField, p: f64, axis: usize, delta: f64) -> (f64, f64) {
    let (mass, coords) = slab_masses(phi, p, axis);
    let mut m_lo = 0.0;
    let mut w_lo = 0.0;
    let mut m_hi = 0.0;
    let mut w_hi = 0.0;
    for (i, &c) in coords.iter().enumerate() {
        let w = mass[i] * (c - delta).abs().powf(p);
        if c < delta {
            m_lo += mass[i];
            w_lo += w;
        } else {
            m_hi += mass[i];
            w_hi += w;
        }
    }
    let f_lo = if m_lo == 0.0 { f64::INFINITY } else { m_lo / w_lo };
    let f_hi = if m_hi == 0.0 { f64::INFINITY } else { m_hi / w_hi };
    (f_lo, f_hi)
}

/// Find the balancing split delta* where the two region ratios agree,
/// by bisection over the open extent of the axis.
pub fn find_delta_star(phi: &ScalarField, p: f64, axis: usize) -> Result<f64> {
    let dom = &phi.domain;
    if axis >= dom.n_dim {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} out of range for dimension {}",
            dom.n_dim
        )));
    }
    let h = dom.spacing[axis];
    let first = dom.coord(axis, 0);
    let last = dom.coord(axis, dom.resolution[axis] - 1);
    let diff = |delta: f64| {
        let (lo, hi) = region_ratios(phi, p, axis, delta);
        lo - hi
    };
    let mut a = first + 0.01 * h;
    let mut b = last - 0.01 * h;
    if !(diff(a) > 0.0 && diff(b) < 0.0) {
        return Err(Error::Internal(
            "balancing ratio shows no sign change across the axis".into(),
        ));
    }
    let span = dom.extents[axis].1 - dom.extents[axis].0;
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if diff(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 1e-9 * span {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// The genus-2 test family: phi_1 * (x_axis - delta) * (alpha on the lower
/// region, beta on the upper region) with |alpha|^p + |beta|^p = 1.
#[derive(Debug, Clone)]
pub struct SplitTestFamily {
    pub axis: usize,
    pub delta: f64,
    pub g: ScalarField,
    pub alpha: f64,
    pub beta: f64,
}

impl SplitTestFamily {
    pub fn new(
        domain: &MeshedDomain,
        axis: usize,
        delta: f64,
        p: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        if axis >= domain.n_dim {
            return Err(Error::InvalidParameter("axis out of range".into()));
        }
        let norm = alpha.abs().powf(p) + beta.abs().powf(p);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "|alpha|^p + |beta|^p = {norm}, expected 1"
            )));
        }
        let first = domain.coord(axis, 0);
        let last = domain.coord(axis, domain.resolution[axis] - 1);
        if !(delta > first && delta < last) {
            return Err(Error::InvalidParameter(
                "split leaves one region without interior nodes".into(),
            ));
        }
        let g = ScalarField::from_fn(domain, |x| x[axis] - delta);
        Ok(Self {
            axis,
            delta,
            g,
            alpha,
            beta,
        })
    }

    /// phi * g * (alpha chi_lower + beta chi_upper).
    pub fn test_function(&self, phi: &ScalarField) -> Result<ScalarField> {
        let dom = &phi.domain;
        if *dom != self.g.domain {
            return Err(Error::InvalidInput("domain mismatch".into()));
        }
        let coords = dom.node_coords();
        let values = phi
            .values
            .iter()
            .zip(&self.g.values)
            .zip(&coords)
            .map(|((&f, &g), x)| {
                let c = if x[self.axis] < self.delta {
                    self.alpha
                } else {
                    self.beta
                };
                f * g * c
            })
            .collect();
        ScalarField::new(dom.clone(), values)
    }
}

/// Which endpoint of the (alpha, beta) maximization won.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitEndpoint {
    LowerRegion,
    UpperRegion,
}

impl SplitEndpoint {
    pub fn label(&self) -> &'static str {
        match self {
            SplitEndpoint::LowerRegion => "LOWER",
            SplitEndpoint::UpperRegion => "UPPER",
        }
    }
}

/// Upper estimate of lambda_2 from the splitting construction.
#[derive(Debug, Clone)]
pub struct SplitUpperEstimate {
    pub value: f64,
    pub delta: f64,
    pub endpoint: SplitEndpoint,
    /// Rayleigh numerator/denominator of the lower-region endpoint.
    pub lower_parts: (f64, f64),
    /// Rayleigh numerator/denominator of the upper-region endpoint.
    pub upper_parts: (f64, f64),
}

/// Build the balanced genus-2 family on top of a converged principal
/// eigenfunction and evaluate the Rayleigh quotient at the two endpoints
/// (alpha, beta) = (1, 0) and (0, 1); the larger is a valid upper bound
/// for lambda_2.
pub fn lambda2_upper_via_splitting(
    p: f64,
    eig1: &Eigenpair,
    axis: usize,
) -> Result<SplitUpperEstimate> {
    let domain = &eig1.phi.domain;
    let delta = find_delta_star(&eig1.phi, p, axis)?;
    let lower = SplitTestFamily::new(domain, axis, delta, p, 1.0, 0.0)?;
    let upper = SplitTestFamily::new(domain, axis, delta, p, 0.0, 1.0)?;
    let u_lo = lower.test_function(&eig1.phi)?;
    let u_hi = upper.test_function(&eig1.phi)?;
    let lower_parts = rayleigh_parts(&u_lo, p)?;
    let upper_parts = rayleigh_parts(&u_hi, p)?;
    let r_lo = lower_parts.0 / lower_parts.1;
    let r_hi = upper_parts.0 / upper_parts.1;
    let (value, endpoint) = if r_lo >= r_hi {
        (r_lo, SplitEndpoint::LowerRegion)
    } else {
        (r_hi, SplitEndpoint::UpperRegion)
    };
    Ok(SplitUpperEstimate {
        value,
        delta,
        endpoint,
        lower_parts,
        upper_parts,
    })
}

/// Write an eigenpair snapshot: one metadata line (p, lambda, residual,
/// iterations) followed by the field snapshot.
pub fn write_eigenpair(
    eig: &Eigenpair,
    p: f64,
    w: &mut impl std::io::Write,
) -> std::io::Result<()> {
    writeln!(
        w,
        "{} {} {} {}",
        p, eig.lambda, eig.residual, eig.iterations
    )?;
    crate::grid::write_field(&eig.phi, w)
}
