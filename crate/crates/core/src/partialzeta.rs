//! Partial zeta values `zeta(l; (c, x)) = sum_j lambda_j(c, x)^(-l)` of
//! Dirichlet truncations, by direct summation, by the Taylor coefficients of
//! the normalized Dirichlet solution, by the `u v r` trace integral and by
//! Liouville-Green integrals.

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::eigensolve::{EigenError, EigenList};
use crate::ode::{integrate, OdeError, OdeSystem};
use crate::problems::Problem;
use crate::propagate::{prufer_weight, propagate_through, PropagateError};
use crate::quad;
use crate::special::hurwitz_zeta_re;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartialZetaError {
    #[error("eigenvalue {j} is zero; apply a spectral shift")]
    ZeroEigenvalue { j: usize },
    #[error("order must be at least 1")]
    BadOrder,
    #[error("the normalized solution vanishes near x = {x}; choose another c or shift")]
    PhiZero { x: f64 },
    #[error("right endpoints must increase and exceed c = {c}")]
    BadGrid { c: f64 },
    #[error("point {0} is outside the problem interval")]
    OutOfRange(f64),
    #[error("quadrature did not converge on ({a}, {b})")]
    Quadrature { a: f64, b: f64 },
    #[error("solutions are not independent (normalized Wronskian {0:e})")]
    Wronskian(f64),
    #[error("q <= 0 at x = {x}")]
    NonPositivePotential { x: f64 },
    #[error("Liouville-Green integrals need p = r = 1")]
    NotSchrodinger,
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Recursive,
    Integral,
    Lg,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Recursive => "recursive",
            Method::Integral => "integral",
            Method::Lg => "lg",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PartialZetaTable {
    pub c: f64,
    pub xs: Vec<f64>,
    pub orders: Vec<usize>,
    /// `values[i][k]` is order `orders[i]` at `xs[k]`.
    pub values: Vec<Vec<f64>>,
    pub method: Method,
    pub shift: f64,
}

impl PartialZetaTable {
    pub fn get(&self, ell: usize, k: usize) -> Option<f64> {
        let i = self.orders.iter().position(|&o| o == ell)?;
        self.values[i].get(k).copied()
    }

    /// Values of one order across the grid.
    pub fn row(&self, ell: usize) -> Option<&[f64]> {
        let i = self.orders.iter().position(|&o| o == ell)?;
        Some(&self.values[i])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,ell,value,method,shift\n");
        for (k, x) in self.xs.iter().enumerate() {
            for (i, l) in self.orders.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    crate::fmt17(*x),
                    l,
                    crate::fmt17(self.values[i][k]),
                    self.method.as_str(),
                    crate::fmt17(self.shift)
                ));
            }
        }
        s
    }
}

/// Minimum number of computed eigenvalues before the Weyl tail is added.
pub const MIN_TAIL_N: usize = 50;

/// `sum_{n > N} (L / (n pi))^(2 l)` for the Weyl model `lambda_n ~ (n pi / L)^2`.
pub fn weyl_tail(eigs: &EigenList, ell: usize) -> f64 {
    let n = eigs.len();
    if n == 0 || ell == 0 || !(eigs.weyl_length > 0.0) || eigs.eigs[n - 1] <= 0.0 {
        return 0.0;
    }
    let s = 2.0 * ell as f64;
    let scale = (eigs.weyl_length / std::f64::consts::PI).powf(s);
    let t = scale * hurwitz_zeta_re(s, n as f64 + 1.0);
    if t.abs() < 1e-14 {
        0.0
    } else {
        t
    }
}

/// `sum_j lambda_j^(-l)` plus the Weyl tail once at least [`MIN_TAIL_N`]
/// eigenvalues are present.
pub fn zeta_direct(eigs: &EigenList, ell: usize) -> Result<f64, PartialZetaError> {
    if ell == 0 {
        return Err(PartialZetaError::BadOrder);
    }
    let mut s = 0.0;
    // smallest terms first
    for (j, l) in eigs.eigs.iter().enumerate().rev() {
        if *l == 0.0 {
            return Err(PartialZetaError::ZeroEigenvalue { j: j + eigs.index_base });
        }
        s += l.powi(-(ell as i32));
    }
    if eigs.len() >= MIN_TAIL_N {
        s += weyl_tail(eigs, ell);
    }
    Ok(s)
}

/// Shift for a list whose lowest eigenvalue is zero or negative: half a gap
/// below the bottom of the spectrum. Zero when no shift is needed.
pub fn default_shift(eigs: &[f64]) -> f64 {
    match eigs {
        [] => 0.0,
        [l0] => {
            if *l0 > 1e-8 {
                0.0
            } else {
                l0 - 0.5
            }
        }
        [l0, l1, ..] => {
            let gap = l1 - l0;
            if *l0 > 1e-8 * gap.max(1.0) {
                0.0
            } else {
                l0 - 0.5 * gap
            }
        }
    }
}

/// Taylor hierarchy of the Dirichlet solution `u` at `c` about `z = shift`,
/// divided by its leading term. State: `[w, A_1..A_L, psi_1..psi_L]` with
/// `w = u1 / u`, `psi_j = phi_j / phi_0` and `A_j = -p psi_j'`. Only the
/// logarithmic derivative of `u` enters, so its growth never has to be
/// resolved.
struct Hierarchy<'a> {
    prob: &'a Problem,
    shift: f64,
    orders: usize,
}

impl OdeSystem for Hierarchy<'_> {
    fn dim(&self) -> usize {
        1 + 2 * self.orders
    }

    fn rhs(&self, x: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OdeError> {
        let k = self.prob.coeffs(x).map_err(|err| OdeError::Coefficient { x, err })?;
        let l = self.orders;
        let w = y[0];
        dy[0] = (k.q - self.shift * k.r) - w * w / k.p;
        let g = 2.0 * w / k.p;
        for j in 0..l {
            let prev = if j == 0 { 1.0 } else { y[1 + l + j - 1] };
            dy[1 + j] = k.r * prev - g * y[1 + j];
            dy[1 + l + j] = -y[1 + j] / k.p;
        }
        Ok(())
    }

    fn error_norm(&self, x: f64, a: &[f64], b: &[f64], e: &[f64], tol: f64) -> f64 {
        let s = match self.prob.coeffs(x) {
            Ok(k) => prufer_weight(k.p, k.q, k.r, self.shift),
            Err(_) => 1.0,
        };
        let mut m = e[0].abs() / (tol * (a[0].abs().max(b[0].abs()) + s));
        for i in 1..a.len() {
            let sc = a[i].abs().max(b[i].abs()).max(1e-300);
            m = m.max(e[i].abs() / (tol * sc));
        }
        m
    }
}

/// Log-derivative coefficients `b_l` of `1 + sum_j psi_j z^j`.
pub fn log_coefficients(psi: &[f64]) -> Vec<f64> {
    let n = psi.len();
    let mut b = vec![0.0; n];
    for j in 1..=n {
        let mut v = psi[j - 1];
        for k in 1..j {
            v -= (k as f64 / j as f64) * psi[j - k - 1] * b[k - 1];
        }
        b[j - 1] = v;
    }
    b
}

/// Partial zeta values on `(c, x)` for every `x` in `xs`, from the Taylor
/// coefficients in `z` of the Dirichlet solution at `c`, in one sweep.
/// With `shift = s` the values refer to `tau - s`.
pub fn zeta_recursive(
    prob: &Problem,
    c: f64,
    xs: &[f64],
    ell_max: usize,
    shift: f64,
    tol: f64,
) -> Result<PartialZetaTable, PartialZetaError> {
    if ell_max == 0 {
        return Err(PartialZetaError::BadOrder);
    }
    if xs.is_empty() || xs[0] <= c || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PartialZetaError::BadGrid { c });
    }
    for &x in [c, *xs.last().unwrap()].iter() {
        if !prob.admits(x) {
            return Err(PartialZetaError::OutOfRange(x));
        }
    }
    let k0 = prob.coeffs(c).map_err(|err| OdeError::Coefficient { x: c, err })?;
    let l = ell_max;
    let h = 1e-7 * (xs[0] - c).min(1.0);
    let x0 = c + h;
    let mut y = vec![0.0; 1 + 2 * l];
    // Series start with frozen coefficients: u = h/p, psi_j = kappa_j h^(2j).
    y[0] = k0.p / h;
    let mut kappa = 1.0;
    for j in 1..=l {
        let jf = j as f64;
        y[j] = k0.r * kappa * h.powi(2 * j as i32 - 1) / (2.0 * jf + 1.0);
        kappa *= -k0.r / k0.p / (2.0 * jf * (2.0 * jf + 1.0));
        y[l + j] = kappa * h.powi(2 * j as i32);
    }
    let sys = Hierarchy { prob, shift, orders: l };
    let mut values = vec![vec![0.0; xs.len()]; l];
    let mut next = 0;
    integrate(&sys, x0, *xs.last().unwrap(), &mut y, xs, tol, f64::INFINITY, |info, y| {
        // u passes through zero exactly when w runs off to -infinity
        if !y[0].is_finite() || y[0] < -1e12 * (1.0 + y[0].abs().sqrt()) {
            return Err(OdeError::NonFinite { x: info.x });
        }
        while next < xs.len() && xs[next] == info.x {
            let b = log_coefficients(&y[1 + l..]);
            for (i, bl) in b.iter().enumerate() {
                values[i][next] = -((i + 1) as f64) * bl;
            }
            next += 1;
        }
        Ok(())
    })
    .map_err(|e| match e {
        OdeError::NonFinite { x } | OdeError::StepUnderflow { x } => PartialZetaError::PhiZero { x },
        other => other.into(),
    })?;
    Ok(PartialZetaTable {
        c,
        xs: xs.to_vec(),
        orders: (1..=l).collect(),
        values,
        method: Method::Recursive,
        shift,
    })
}

/// Direct sums over freshly computed Dirichlet eigenvalues of each `(c, x)`.
pub fn zeta_direct_table(
    prob: &Problem,
    c: f64,
    xs: &[f64],
    ell_max: usize,
    shift: f64,
    n: usize,
    tol: f64,
) -> Result<PartialZetaTable, PartialZetaError> {
    if ell_max == 0 {
        return Err(PartialZetaError::BadOrder);
    }
    if xs.is_empty() || xs[0] <= c || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PartialZetaError::BadGrid { c });
    }
    let mut values = vec![vec![0.0; xs.len()]; ell_max];
    for (k, &x) in xs.iter().enumerate() {
        let mut e = crate::eigensolve::dirichlet_eigs(prob, c, x, n, tol)?;
        for l in e.eigs.iter_mut() {
            *l -= shift;
        }
        for ell in 1..=ell_max {
            values[ell - 1][k] = zeta_direct(&e, ell)?;
        }
    }
    Ok(PartialZetaTable { c, xs: xs.to_vec(), orders: (1..=ell_max).collect(), values, method: Method::Direct, shift })
}

/// Quadrature nodes: Gauss-Legendre panels of width at most `w`.
fn panel_nodes(a: f64, b: f64, w: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = quad::gauss_legendre(order);
    let n = ((b - a).abs() / w).ceil().max(1.0) as usize;
    let mut xs = Vec::with_capacity(n * order);
    let mut ws = Vec::with_capacity(n * order);
    let h = (b - a) / n as f64;
    for i in 0..n {
        let lo = a + h * i as f64;
        for (t, wt) in gx.iter().zip(&gw) {
            xs.push(lo + 0.5 * h * (1.0 + t));
            ws.push(0.5 * h.abs() * wt);
        }
    }
    (xs, ws)
}

/// `int u v r` over `(c, x)`, with `u` principal at the endpoint the
/// integration runs toward and `W = 1` in the orientation that makes the
/// integrand positive. When `c` is itself a regular endpoint the roles are
/// those of that endpoint: `u` is the Dirichlet and `v` the Neumann solution.
pub fn zeta1_integral(prob: &Problem, lambda: f64, c: f64, x: f64, tol: f64) -> Result<f64, PartialZetaError> {
    for t in [c, x] {
        if !prob.admits(t) {
            return Err(PartialZetaError::OutOfRange(t));
        }
    }
    if c == x {
        return Ok(0.0);
    }
    let z = C64::new(lambda, 0.0);
    let (a, b) = if c < x { (c, x) } else { (x, c) };
    let (nodes, weights) = panel_nodes(a, b, 0.25, 10);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let at_end = prob.left_finite() == Some(c) || prob.right_finite() == Some(c);
    let eval = |u: &crate::propagate::Trajectory, v: &crate::propagate::Trajectory, flip: f64| -> Result<f64, PartialZetaError> {
        let mut sum = 0.0;
        for (t, w) in nodes.iter().zip(&weights) {
            let iu = u.node(*t).ok_or(PropagateError::NoSharedNode)?;
            let iv = v.node(*t).ok_or(PropagateError::NoSharedNode)?;
            let (u0, u1) = u.values[iu];
            let (v0, v1) = v.values[iv];
            let wr = flip * (v0.re * u1.re - v1.re * u0.re);
            let size = (v0.re * u1.re).abs() + (v1.re * u0.re).abs();
            if !(wr.abs() > 1e-10 * size) {
                return Err(PartialZetaError::Wronskian(wr / size.max(1e-300)));
            }
            let r = prob.r(*t).map_err(|err| OdeError::Coefficient { x: *t, err })?;
            sum += w * r * u0.re * v0.re / wr;
        }
        Ok(sum)
    };
    if at_end {
        let u = propagate_through(prob, z, c, zero, one, x, &nodes, tol)?;
        let v = propagate_through(prob, z, c, one, zero, x, &nodes, tol)?;
        let flip = if c < x { 1.0 } else { -1.0 };
        return eval(&u, &v, flip);
    }
    // Principal solution toward the far endpoint: propagate back from
    // increasingly distant points until the integral settles.
    let dir = if x > c { 1.0 } else { -1.0 };
    let v = propagate_through(prob, z, c, zero, one, x, &nodes, tol)?;
    let mut reach = (x - c).abs().max(10.0);
    let mut last: Option<f64> = None;
    for _ in 0..8 {
        let far = x + dir * reach;
        let far = if prob.admits(far) && prob.coeffs(far).map(|k| k.p > 1e-280 && k.r > 1e-280).unwrap_or(false) {
            far
        } else {
            match last {
                Some(v) => return Ok(v),
                None => return Err(PartialZetaError::OutOfRange(far)),
            }
        };
        let u = propagate_through(prob, z, far, zero, one, c, &nodes, tol)?;
        // W(u, v) > 0 for u decaying toward the far end and v growing.
        let val = eval(&u, &v, -dir)?;
        if let Some(prev) = last {
            if (val - prev).abs() <= 10.0 * tol * (1.0 + val.abs()) {
                return Ok(val);
            }
        }
        last = Some(val);
        reach *= 2.0;
    }
    last.ok_or(PartialZetaError::Quadrature { a, b })
}

/// `((2l - 3)!! / (2^l (l - 1)!))`, with `(-1)!! = 1`.
pub fn lg_coefficient(ell: usize) -> f64 {
    let mut dfact = 1.0;
    let mut k = 2 * ell as i64 - 3;
    while k > 1 {
        dfact *= k as f64;
        k -= 2;
    }
    let mut fact = 1.0;
    for i in 2..ell {
        fact *= i as f64;
    }
    dfact / (2f64.powi(ell as i32) * fact)
}

/// Liouville-Green partial sum `xi(l; (c, x))` for a Schrodinger problem.
pub fn lg_xi(prob: &Problem, ell: usize, c: f64, x: f64, tol: f64) -> Result<f64, PartialZetaError> {
    if ell == 0 {
        return Err(PartialZetaError::BadOrder);
    }
    if !prob.schrodinger {
        return Err(PartialZetaError::NotSchrodinger);
    }
    for t in [c, x] {
        if !prob.admits(t) {
            return Err(PartialZetaError::OutOfRange(t));
        }
    }
    let (a, b) = if c <= x { (c, x) } else { (x, c) };
    for i in 0..=256 {
        let t = a + (b - a) * i as f64 / 256.0;
        let q = prob.q(t).map_err(|err| OdeError::Coefficient { x: t, err })?;
        if !(q > 0.0) {
            return Err(PartialZetaError::NonPositivePotential { x: t });
        }
    }
    let ex = 0.5 - ell as f64;
    let mut bad = None;
    let r = quad::integrate(
        |t| match prob.q(t) {
            Ok(q) if q > 0.0 => q.powf(ex),
            _ => {
                bad.get_or_insert(t);
                0.0
            }
        },
        a,
        b,
        tol,
        tol,
    );
    if let Some(t) = bad {
        return Err(PartialZetaError::NonPositivePotential { x: t });
    }
    if !r.converged {
        return Err(PartialZetaError::Quadrature { a, b });
    }
    let v = lg_coefficient(ell) * r.value;
    Ok(if c <= x { v } else { -v })
}

/// Liouville-Green values on a grid, as a table.
pub fn lg_table(prob: &Problem, c: f64, xs: &[f64], ell_max: usize, tol: f64) -> Result<PartialZetaTable, PartialZetaError> {
    let mut values = vec![vec![0.0; xs.len()]; ell_max];
    for (k, &x) in xs.iter().enumerate() {
        for ell in 1..=ell_max {
            values[ell - 1][k] = lg_xi(prob, ell, c, x, tol)?;
        }
    }
    Ok(PartialZetaTable { c, xs: xs.to_vec(), orders: (1..=ell_max).collect(), values, method: Method::Lg, shift: 0.0 })
}

/// Trace-integral values on a grid (order 1 only), as a table.
pub fn integral_table(prob: &Problem, lambda: f64, c: f64, xs: &[f64], tol: f64) -> Result<PartialZetaTable, PartialZetaError> {
    let mut row = Vec::with_capacity(xs.len());
    for &x in xs {
        row.push(zeta1_integral(prob, lambda, c, x, tol)?);
    }
    Ok(PartialZetaTable { c, xs: xs.to_vec(), orders: vec![1], values: vec![row], method: Method::Integral, shift: lambda })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Divergent,
    Convergent,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    pub ell: usize,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    /// Fitted decay exponent of the increments over a doubling grid.
    pub alpha: f64,
    pub growth: Growth,
}

/// Margin on the increment decay exponent separating bounded from
/// (logarithmically or faster) divergent growth.
pub const DIVERGENCE_MARGIN: f64 = 0.05;

/// Classify `x -> lg_xi(l; (c, x))` as divergent or convergent from the
/// decay of its increments on the doubling grid `x0 * 2^k`, `k = 0..=steps`.
pub fn classify_lg(prob: &Problem, ell: usize, c: f64, x0: f64, steps: usize, tol: f64) -> Result<DivergenceReport, PartialZetaError> {
    let xs: Vec<f64> = (0..=steps.max(3)).map(|k| x0 * 2f64.powi(k as i32)).collect();
    let mut values = Vec::with_capacity(xs.len());
    let mut acc = lg_xi(prob, ell, c, xs[0], tol)?;
    values.push(acc);
    let mut incs = Vec::new();
    for w in xs.windows(2) {
        let d = lg_xi(prob, ell, w[0], w[1], tol)?;
        acc += d;
        values.push(acc);
        incs.push(d.abs().max(1e-300));
    }
    let half = incs.len() / 2;
    let tail = &incs[half..];
    let alpha = -(tail[tail.len() - 1] / tail[0]).log2() / (tail.len() - 1) as f64;
    let growth = if alpha > DIVERGENCE_MARGIN { Growth::Convergent } else { Growth::Divergent };
    Ok(DivergenceReport { ell, xs, values, alpha, growth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::free;

    #[test]
    fn log_coefficients_of_exp() {
        // 1 + sum z^j = 1/(1 - z) -> log = sum z^l / l
        let b = log_coefficients(&[1.0, 1.0, 1.0, 1.0]);
        for (l, v) in b.iter().enumerate() {
            assert!((v - 1.0 / (l + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn recursive_free() {
        let pi = std::f64::consts::PI;
        let t = zeta_recursive(&free(), 0.0, &[1.0, pi], 2, 0.0, 1e-12).unwrap();
        assert!((t.get(1, 0).unwrap() - 1.0 / 6.0).abs() < 1e-10);
        assert!((t.get(1, 1).unwrap() - pi * pi / 6.0).abs() < 1e-9);
        assert!((t.get(2, 1).unwrap() - pi.powi(4) / 90.0).abs() < 1e-9);
    }

    #[test]
    fn lg_coefficients() {
        assert_eq!(lg_coefficient(1), 0.5);
        assert_eq!(lg_coefficient(2), 0.25);
        assert_eq!(lg_coefficient(3), 3.0 / 16.0);
    }
}
