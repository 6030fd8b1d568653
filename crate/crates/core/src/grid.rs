//! Axis-aligned grids in N <= 3 dimensions, nodal fields, and the discrete
//! Rayleigh quotient.
//!
//! Discretization: interior nodes only (Dirichlet values are implicit ghost
//! zeros), forward-difference gradients on cells, nodal quadrature for the
//! denominator and all weighted moments.  At p = 2 the numerator reduces to
//! the standard 5-point stencil energy, which is what makes the closed-form
//! oracles in the tests exact.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Interval,
    Rectangle,
    Box,
}

impl Shape {
    fn from_dim(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Shape::Interval),
            2 => Ok(Shape::Rectangle),
            3 => Ok(Shape::Box),
            _ => Err(Error::InvalidParameter(format!(
                "supported dimensions are 1..=3, got {n}"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Shape::Interval => "INTERVAL",
            Shape::Rectangle => "RECTANGLE",
            Shape::Box => "BOX",
        }
    }
}

/// Norm selector for weighted moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Lp,
}

/// Sign of the weight exponent in a weighted moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentSign {
    Plus,
    Minus,
}

/// An axis-aligned box with per-axis interior node counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshedDomain {
    pub n_dim: usize,
    pub shape: Shape,
    pub extents: Vec<(f64, f64)>,
    pub resolution: Vec<usize>,
    pub spacing: Vec<f64>,
}

impl MeshedDomain {
    pub fn new(extents: &[(f64, f64)], resolution: &[usize]) -> Result<Self> {
        let n = extents.len();
        let shape = Shape::from_dim(n)?;
        if resolution.len() != n {
            return Err(Error::InvalidParameter(
                "extents and resolution lengths differ".into(),
            ));
        }
        for &(lo, hi) in extents {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "degenerate extent ({lo}, {hi})"
                )));
            }
        }
        if resolution.iter().any(|&r| r < 3) {
            return Err(Error::InvalidParameter(
                "resolution must be >= 3 per axis".into(),
            ));
        }
        let spacing = extents
            .iter()
            .zip(resolution)
            .map(|(&(lo, hi), &r)| (hi - lo) / (r + 1) as f64)
            .collect();
        Ok(Self {
            n_dim: n,
            shape,
            extents: extents.to_vec(),
            resolution: resolution.to_vec(),
            spacing,
        })
    }

    pub fn interval(a: f64, b: f64, res: usize) -> Result<Self> {
        Self::new(&[(a, b)], &[res])
    }

    pub fn unit_square(res: usize) -> Result<Self> {
        Self::new(&[(0.0, 1.0), (0.0, 1.0)], &[res, res])
    }

    pub fn unit_cube(res: usize) -> Result<Self> {
        Self::new(&[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], &[res, res, res])
    }

    pub fn num_nodes(&self) -> usize {
        self.resolution.iter().product()
    }

    /// Quadrature weight of one interior node (product of spacings).
    pub fn node_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Coordinate of interior node index i along an axis.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.extents[axis].0 + (i + 1) as f64 * self.spacing[axis]
    }

    /// Row-major strides over interior nodes (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.n_dim];
        for a in (0..self.n_dim.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.resolution[a + 1];
        }
        s
    }

    /// Coordinates of every interior node, row-major.
    pub fn node_coords(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.num_nodes());
        let mut idx = vec![0usize; self.n_dim];
        loop {
            out.push(
                (0..self.n_dim)
                    .map(|a| self.coord(a, idx[a]))
                    .collect::<Vec<f64>>(),
            );
            if !advance(&mut idx, &self.resolution) {
                break;
            }
        }
        out
    }

    /// Geometric center of the domain.
    pub fn center(&self) -> Vec<f64> {
        self.extents.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect()
    }
}

/// Odometer increment over a multi-index with per-axis limits (exclusive).
/// Returns false when the index wraps back to zero.
fn advance(idx: &mut [usize], limits: &[usize]) -> bool {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < limits[a] {
            return true;
        }
        idx[a] = 0;
    }
    false
}

/// Nodal values over the interior of a domain, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub domain: MeshedDomain,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: MeshedDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.num_nodes() {
            return Err(Error::InvalidInput(format!(
                "value count {} does not match node count {}",
                values.len(),
                domain.num_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite field value".into()));
        }
        Ok(Self { domain, values })
    }

    pub fn zeros(domain: &MeshedDomain) -> Self {
        Self {
            domain: domain.clone(),
            values: vec![0.0; domain.num_nodes()],
        }
    }

    pub fn from_fn(domain: &MeshedDomain, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = domain.node_coords().iter().map(|x| f(x)).collect();
        Self {
            domain: domain.clone(),
            values,
        }
    }

    /// Lattice lookup with ghost zeros: `lat` ranges over 0..=res+1 per axis.
    pub(crate) fn lattice_value(&self, lat: &[usize]) -> f64 {
        let mut flat = 0usize;
        let strides = self.domain.strides();
        for a in 0..self.domain.n_dim {
            if lat[a] == 0 || lat[a] > self.domain.resolution[a] {
                return 0.0;
            }
            flat += (lat[a] - 1) * strides[a];
        }
        self.values[flat]
    }

    /// int |u|^p by nodal quadrature.
    pub fn lp_integral(&self, p: f64) -> f64 {
        let vol = self.domain.node_volume();
        self.values.iter().map(|v| v.abs().powf(p) * vol).sum()
    }

    /// Rescale so that int |u|^p = 1.
    pub fn normalize_lp(&mut self, p: f64) -> Result<()> {
        let i = self.lp_integral(p);
        if i <= 0.0 {
            return Err(Error::InvalidInput("cannot normalize zero field".into()));
        }
        let s = i.powf(-1.0 / p);
        for v in &mut self.values {
            *v *= s;
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// Numerator and denominator of the discrete Rayleigh quotient.
pub fn rayleigh_parts(field: &ScalarField, p: f64) -> Result<(f64, f64)> {
    let dom = &field.domain;
    let n = dom.n_dim;
    let cell_vol: f64 = dom.spacing.iter().product();
    let cell_limits: Vec<usize> = dom.resolution.iter().map(|&r| r + 1).collect();
    let mut num = 0.0;
    let mut cell = vec![0usize; n];
    let mut shifted = vec![0usize; n];
    loop {
        let base = field.lattice_value(&cell);
        let mut g2 = 0.0;
        for a in 0..n {
            shifted.copy_from_slice(&cell);
            shifted[a] += 1;
            let d = (field.lattice_value(&shifted) - base) / dom.spacing[a];
            g2 += d * d;
        }
        num += g2.sqrt().powf(p) * cell_vol;
        if !advance(&mut cell, &cell_limits) {
            break;
        }
    }
    let den = field.lp_integral(p);
    Ok((num, den))
}

/// Discrete Rayleigh quotient int |grad u|^p / int |u|^p.
pub fn rayleigh(field: &ScalarField, p: f64) -> Result<f64> {
    let (num, den) = rayleigh_parts(field, p)?;
    if den == 0.0 {
        return Err(Error::InvalidInput(
            "Rayleigh quotient of the zero field".into(),
        ));
    }
    Ok(num / den)
}

/// Nodal gradient of the discrete Rayleigh quotient.
///
/// Cells with |grad u| below 1e-12 contribute nothing: for p > 2 the flux
/// factor |grad u|^(p-2) vanishes there, and for p < 2 the singular cells
/// are skipped.
pub fn rayleigh_gradient(field: &ScalarField, p: f64) -> Result<ScalarField> {
    let dom = &field.domain;
    let n = dom.n_dim;
    let den = field.lp_integral(p);
    if den == 0.0 {
        return Err(Error::InvalidInput(
            "Rayleigh gradient of the zero field".into(),
        ));
    }
    let (num, _) = rayleigh_parts(field, p)?;
    let r = num / den;
    let cell_vol: f64 = dom.spacing.iter().product();
    let node_vol = dom.node_volume();
    let strides = dom.strides();
    let cell_limits: Vec<usize> = dom.resolution.iter().map(|&r| r + 1).collect();

    let mut dnum = vec![0.0; dom.num_nodes()];
    let mut cell = vec![0usize; n];
    let mut shifted = vec![0usize; n];
    let mut g = vec![0.0; n];
    loop {
        let base = field.lattice_value(&cell);
        let mut g2 = 0.0;
        for a in 0..n {
            shifted.copy_from_slice(&cell);
            shifted[a] += 1;
            g[a] = (field.lattice_value(&shifted) - base) / dom.spacing[a];
            g2 += g[a] * g[a];
        }
        let gnorm = g2.sqrt();
        if gnorm >= 1e-12 {
            let factor = p * gnorm.powf(p - 2.0) * cell_vol;
            for a in 0..n {
                let w = factor * g[a] / dom.spacing[a];
                // d g_a / d u_(cell + e_a) = +1/h_a, d g_a / d u_cell = -1/h_a
                if cell[a] >= 1 && cell[a] <= dom.resolution[a] {
                    let mut ok = true;
                    let mut flat = 0usize;
                    for b in 0..n {
                        let l = if b == a { cell[b] } else { cell[b] };
                        if l == 0 || l > dom.resolution[b] {
                            ok = false;
                            break;
                        }
                        flat += (l - 1) * strides[b];
                    }
                    if ok {
                        dnum[flat] -= w;
                    }
                }
                if cell[a] + 1 >= 1 && cell[a] + 1 <= dom.resolution[a] {
                    let mut ok = true;
                    let mut flat = 0usize;
                    for b in 0..n {
                        let l = if b == a { cell[b] + 1 } else { cell[b] };
                        if l == 0 || l > dom.resolution[b] {
                            ok = false;
                            break;
                        }
                        flat += (l - 1) * strides[b];
                    }
                    if ok {
                        dnum[flat] += w;
                    }
                }
            }
        }
        if !advance(&mut cell, &cell_limits) {
            break;
        }
    }

    let mut grad = Vec::with_capacity(dom.num_nodes());
    for (i, &u) in field.values.iter().enumerate() {
        let dden = p * u.abs().powf(p - 1.0) * u.signum() * node_vol;
        grad.push((dnum[i] - r * dden) / den);
    }
    Ok(ScalarField {
        domain: dom.clone(),
        values: grad,
    })
}

/// Vector p-norm (x_1^p + ... + x_N^p)^(1/p) of absolute components.
pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    x.iter().map(|c| c.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Weighted moment int |u|^p ||x - origin||^(+-p) by nodal quadrature.
///
/// With `Minus` the origin must lie strictly between nodes; the singular
/// weight is integrable for N > p and the quadrature simply never samples
/// the singularity.
pub fn weighted_moment(
    field: &ScalarField,
    p: f64,
    origin: &[f64],
    norm: NormKind,
    sign: ExponentSign,
) -> Result<f64> {
    let dom = &field.domain;
    if origin.len() != dom.n_dim {
        return Err(Error::InvalidInput("origin dimension mismatch".into()));
    }
    if sign == ExponentSign::Minus && origin_on_node(dom, origin) {
        return Err(Error::InvalidInput(
            "origin coincides with a grid node; offset it by h/2".into(),
        ));
    }
    let node_vol = dom.node_volume();
    let coords = dom.node_coords();
    let mut total = 0.0;
    let mut diff = vec![0.0; dom.n_dim];
    for (x, &u) in coords.iter().zip(&field.values) {
        for a in 0..dom.n_dim {
            diff[a] = x[a] - origin[a];
        }
        let r = match norm {
            NormKind::L2 => l2_norm(&diff),
            NormKind::Lp => lp_norm(&diff, p),
        };
        let w = match sign {
            ExponentSign::Plus => r.powf(p),
            ExponentSign::Minus => r.powf(-p),
        };
        total += u.abs().powf(p) * w * node_vol;
    }
    Ok(total)
}

/// True when the origin lies within 1e-9 h of a node in every coordinate.
pub fn origin_on_node(dom: &MeshedDomain, origin: &[f64]) -> bool {
    (0..dom.n_dim).all(|a| {
        let h = dom.spacing[a];
        let t = (origin[a] - dom.extents[a].0) / h - 1.0;
        let i = t.round();
        i >= 0.0 && i < dom.resolution[a] as f64 && (t - i).abs() * h < 1e-9 * h
    })
}

/// Nudge any coordinate that sits on a node line by half a spacing, so the
/// singular weight is never sampled at a node.
pub fn offset_origin(dom: &MeshedDomain, origin: &[f64]) -> Vec<f64> {
    let mut o = origin.to_vec();
    if origin_on_node(dom, &o) {
        for a in 0..dom.n_dim {
            let h = dom.spacing[a];
            if o[a] + 0.5 * h < dom.extents[a].1 {
                o[a] += 0.5 * h;
            } else {
                o[a] -= 0.5 * h;
            }
        }
    }
    o
}

/// Write a field snapshot: one header line (shape, extents, resolution),
/// then one value per line in row-major order.
pub fn write_field(field: &ScalarField, w: &mut impl Write) -> std::io::Result<()> {
    let dom = &field.domain;
    let mut header = String::from(dom.shape.label());
    for &(lo, hi) in &dom.extents {
        header.push_str(&format!(" {lo} {hi}"));
    }
    for &r in &dom.resolution {
        header.push_str(&format!(" {r}"));
    }
    writeln!(w, "{header}")?;
    for v in &field.values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

/// Read a field snapshot written by [`write_field`].
pub fn read_field(r: &mut impl BufRead) -> Result<ScalarField> {
    let mut header = String::new();
    r.read_line(&mut header)
        .map_err(|e| Error::InvalidInput(format!("read failure: {e}")))?;
    let mut tokens = header.split_whitespace();
    let shape = tokens
        .next()
        .ok_or_else(|| Error::InvalidInput("empty snapshot header".into()))?;
    let n = match shape {
        "INTERVAL" => 1,
        "RECTANGLE" => 2,
        "BOX" => 3,
        other => {
            return Err(Error::InvalidInput(format!("unknown shape {other}")));
        }
    };
    let nums: Vec<&str> = tokens.collect();
    if nums.len() != 3 * n {
        return Err(Error::InvalidInput("malformed snapshot header".into()));
    }
    let parse = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::InvalidInput(format!("bad number {s}")))
    };
    let mut extents = Vec::with_capacity(n);
    for a in 0..n {
        extents.push((parse(nums[2 * a])?, parse(nums[2 * a + 1])?));
    }
    let mut resolution = Vec::with_capacity(n);
    for a in 0..n {
        let r: usize = nums[2 * n + a]
            .parse()
            .map_err(|_| Error::InvalidInput("bad resolution".into()))?;
        resolution.push(r);
    }
    let domain = MeshedDomain::new(&extents, &resolution)?;
    let mut values = Vec::with_capacity(domain.num_nodes());
    for line in r.lines() {
        let line = line.map_err(|e| Error::InvalidInput(format!("read failure: {e}")))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        values.push(parse(t)?);
    }
    ScalarField::new(domain, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn single_node_rayleigh() {
        // One interior node at 0.5 with value 1, h = 1/2:
        // numerator (2^p + 2^p) / 2, denominator 1/2.
        let dom = MeshedDomain::new(&[(0.0, 1.0)], &[1]);
        // resolution >= 3 is the domain invariant; build the 1-node grid
        // directly for this hand-computed case.
        assert!(dom.is_err());
        let dom = MeshedDomain {
            n_dim: 1,
            shape: Shape::Interval,
            extents: vec![(0.0, 1.0)],
            resolution: vec![1],
            spacing: vec![0.5],
        };
        let field = ScalarField::new(dom, vec![1.0]).unwrap();
        assert_relative_eq!(rayleigh(&field, 2.0).unwrap(), 8.0, max_relative = 1e-14);
        assert_relative_eq!(rayleigh(&field, 3.0).unwrap(), 16.0, max_relative = 1e-14);
    }

    #[test]
    fn rayleigh_scale_invariance() {
        let dom = MeshedDomain::interval(0.0, 1.0, 17).unwrap();
        let f = ScalarField::from_fn(&dom, |x| (PI * x[0]).sin() + 0.3 * (2.0 * PI * x[0]).sin());
        for p in [1.5, 2.0, 3.0] {
            let r1 = rayleigh(&f, p).unwrap();
            let r2 = rayleigh(&f.scaled(-3.7), p).unwrap();
            assert_relative_eq!(r1, r2, max_relative = 1e-12);
        }
    }

    #[test]
    fn rayleigh_refinement_order() {
        // Sampled sin(pi x) on (0,1): discrete eigenvalue (2/h^2)(1 - cos(pi h))
        // converges to pi^2 at second order.
        let mut errs = Vec::new();
        for res in [31usize, 63, 127] {
            let dom = MeshedDomain::interval(0.0, 1.0, res).unwrap();
            let f = ScalarField::from_fn(&dom, |x| (PI * x[0]).sin());
            errs.push((rayleigh(&f, 2.0).unwrap() - PI * PI).abs());
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 >= 1.8, "observed order {order1}");
        assert!(order2 >= 1.8, "observed order {order2}");
    }

    #[test]
    fn zero_field_rejected() {
        let dom = MeshedDomain::interval(0.0, 1.0, 7).unwrap();
        let f = ScalarField::zeros(&dom);
        assert!(rayleigh(&f, 2.0).is_err());
        assert!(rayleigh_gradient(&f, 2.0).is_err());
    }

    #[test]
    fn moment_constant_field_converges() {
        // Constant 1 on the unit interval, weight x^2 from the left end:
        // integral -> 1/3 as h -> 0.
        let dom = MeshedDomain::interval(0.0, 1.0, 2047).unwrap();
        let f = ScalarField::from_fn(&dom, |_| 1.0);
        let m = weighted_moment(&f, 2.0, &[0.0], NormKind::L2, ExponentSign::Plus).unwrap();
        assert_relative_eq!(m, 1.0 / 3.0, max_relative = 1e-3);
    }

    #[test]
    fn moment_cosine_closed_form() {
        // phi = sqrt(2) cos(pi x) on (-1/2, 1/2): int x^2 phi^2 = 1/12 - 1/(2 pi^2).
        let dom = MeshedDomain::interval(-0.5, 0.5, 1023).unwrap();
        let f = ScalarField::from_fn(&dom, |x| 2.0_f64.sqrt() * (PI * x[0]).cos());
        let m = weighted_moment(&f, 2.0, &[0.0], NormKind::L2, ExponentSign::Plus).unwrap();
        assert_relative_eq!(m, 1.0 / 12.0 - 0.5 / (PI * PI), max_relative = 1e-4);
    }

    #[test]
    fn minus_weight_origin_on_node_rejected() {
        let dom = MeshedDomain::interval(0.0, 1.0, 9).unwrap();
        let f = ScalarField::from_fn(&dom, |_| 1.0);
        let node = dom.coord(0, 4);
        assert!(weighted_moment(&f, 2.0, &[node], NormKind::L2, ExponentSign::Minus).is_err());
        let off = offset_origin(&dom, &[node]);
        assert!(weighted_moment(&f, 2.0, &off, NormKind::L2, ExponentSign::Minus).is_ok());
    }

    #[test]
    fn norm_comparisons_on_random_points() {
        // p <= 2: ||x||_p >= ||x||_2;  p >= 2: ||x||_p >= N^(-(p-2)/(2p)) ||x||_2.
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for n in [2usize, 3] {
            for _ in 0..100 {
                let x: Vec<f64> = (0..n).map(|_| next()).collect();
                let l2 = l2_norm(&x);
                for p in [1.2, 1.5, 2.0] {
                    assert!(lp_norm(&x, p) >= l2 - 1e-12);
                }
                for p in [2.0, 3.0, 5.0] {
                    let c = (n as f64).powf(-(p - 2.0) / (2.0 * p));
                    assert!(lp_norm(&x, p) >= c * l2 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn snapshot_roundtrip() {
        let dom = MeshedDomain::new(&[(0.0, 2.0), (-1.0, 1.0)], &[5, 7]).unwrap();
        let f = ScalarField::from_fn(&dom, |x| x[0] * x[1] + 0.25);
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        let g = read_field(&mut buf.as_slice()).unwrap();
        assert_eq!(f.domain, g.domain);
        assert_eq!(f.values, g.values);
    }
}
