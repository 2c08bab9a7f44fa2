//! Propagation of solutions of `tau f = z f` in quasi-derivative form
//! `y' = y1/p`, `y1' = (q - z r) y`, with overflow-safe scaling.

use num_complex::Complex64;
use thiserror::Error;

use crate::ode::{integrate, OdeError, OdeSystem, StepInfo};
use crate::problems::Problem;

pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagateError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("range [{0}, {1}] is not inside the open interval")]
    OutOfRange(f64, f64),
    #[error("invalid tolerance {0}")]
    BadTol(f64),
    #[error("trajectories have different spectral parameters")]
    MismatchedZ,
    #[error("trajectories share no mesh node")]
    NoSharedNode,
}

/// Lower and upper bound on `max(|y|, |y1|)` for stored nodes.
pub const SCALE_LO: f64 = 1e-2;
pub const SCALE_HI: f64 = 1e2;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub z: C64,
    /// Node positions in increasing order.
    pub mesh: Vec<f64>,
    /// Scaled `(y, y1)`; the true pair is `(y, y1) * exp(logscale)`.
    pub values: Vec<(C64, C64)>,
    pub logscale: Vec<f64>,
    pub tol: f64,
    /// Where the propagation started.
    pub x_start: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// Index of the node at exactly `x`, if present.
    pub fn node(&self, x: f64) -> Option<usize> {
        self.mesh.iter().position(|&m| m == x)
    }

    /// Node where the propagation ended.
    pub fn end(&self) -> (f64, C64, C64, f64) {
        let i = if self.mesh[0] == self.x_start { self.len() - 1 } else { 0 };
        (self.mesh[i], self.values[i].0, self.values[i].1, self.logscale[i])
    }

    /// `ln y` (principal branch of the complex log) at node `i`.
    pub fn ln_y(&self, i: usize) -> C64 {
        self.values[i].0.ln() + self.logscale[i]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,re_y,im_y,re_y1,im_y1,logscale\n");
        for i in 0..self.len() {
            let (y, y1) = self.values[i];
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                crate::fmt17(self.mesh[i]),
                crate::fmt17(y.re),
                crate::fmt17(y.im),
                crate::fmt17(y1.re),
                crate::fmt17(y1.im),
                crate::fmt17(self.logscale[i])
            ));
        }
        s
    }
}

/// Local Prufer-type scale `S = sqrt(p (|q - Re(z) r| + r))`; errors in `y`
/// are weighted by `sqrt(S)` and errors in `y1` by `1/sqrt(S)`.
#[inline]
pub(crate) fn prufer_weight(p: f64, q: f64, r: f64, z_re: f64) -> f64 {
    let s = (p * ((q - z_re * r).abs() + r)).sqrt();
    if s.is_finite() && s > 0.0 {
        s
    } else {
        1.0
    }
}

pub(crate) struct LinearSystem<'a> {
    pub prob: &'a Problem,
    pub z: C64,
}

impl OdeSystem for LinearSystem<'_> {
    fn dim(&self) -> usize {
        4
    }

    #[inline]
    fn rhs(&self, x: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OdeError> {
        let c = self.prob.coeffs(x).map_err(|err| OdeError::Coefficient { x, err })?;
        let ip = 1.0 / c.p;
        let (a, b) = (c.q - self.z.re * c.r, -self.z.im * c.r);
        dy[0] = y[2] * ip;
        dy[1] = y[3] * ip;
        dy[2] = a * y[0] - b * y[1];
        dy[3] = a * y[1] + b * y[0];
        Ok(())
    }

    fn error_norm(&self, x: f64, a: &[f64], b: &[f64], e: &[f64], tol: f64) -> f64 {
        let s = match self.prob.coeffs(x) {
            Ok(c) => prufer_weight(c.p, c.q, c.r, self.z.re),
            Err(_) => 1.0,
        };
        let rs = s.sqrt();
        let rho = |v: &[f64]| (v[0].hypot(v[1]) * rs).max(v[2].hypot(v[3]) / rs);
        let scale = rho(a).max(rho(b)).max(1e-300);
        (e[0].hypot(e[1]) * rs).max(e[2].hypot(e[3]) / rs) / (tol * scale)
    }
}

/// Rescale so that `max(|y|, |y1|)` is 1 when it leaves `[SCALE_LO, SCALE_HI]`.
/// Returns the log of the factor removed.
#[inline]
pub(crate) fn rescale(y: &mut [f64]) -> f64 {
    let m = y[0].hypot(y[1]).max(y[2].hypot(y[3]));
    if (SCALE_LO..=SCALE_HI).contains(&m) || m == 0.0 || !m.is_finite() {
        return 0.0;
    }
    for v in y.iter_mut().take(4) {
        *v /= m;
    }
    m.ln()
}

fn check_range(prob: &Problem, x0: f64, x1: f64) -> Result<(), PropagateError> {
    let (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
    if !prob.admits(lo) || !prob.admits(hi) {
        return Err(PropagateError::OutOfRange(lo, hi));
    }
    Ok(())
}

/// Propagate initial data `(y0, y1_0)` at `x0` to `x1` (either direction).
pub fn propagate(
    prob: &Problem,
    z: C64,
    x0: f64,
    y0: C64,
    y1_0: C64,
    x1: f64,
    tol: f64,
) -> Result<Trajectory, PropagateError> {
    propagate_through(prob, z, x0, y0, y1_0, x1, &[], tol)
}

/// As [`propagate`], additionally landing exactly on every point of `stops`.
#[allow(clippy::too_many_arguments)]
pub fn propagate_through(
    prob: &Problem,
    z: C64,
    x0: f64,
    y0: C64,
    y1_0: C64,
    x1: f64,
    stops: &[f64],
    tol: f64,
) -> Result<Trajectory, PropagateError> {
    if !(tol > 0.0) {
        return Err(PropagateError::BadTol(tol));
    }
    check_range(prob, x0, x1)?;
    let sys = LinearSystem { prob, z };
    let mut y = [y0.re, y0.im, y1_0.re, y1_0.im];
    let mut ls = rescale(&mut y);
    let mut mesh = vec![x0];
    let mut values = vec![(C64::new(y[0], y[1]), C64::new(y[2], y[3]))];
    let mut logscale = vec![ls];
    integrate(&sys, x0, x1, &mut y, stops, tol, f64::INFINITY, |info: &StepInfo, y: &mut [f64]| {
        ls += rescale(y);
        mesh.push(info.x);
        values.push((C64::new(y[0], y[1]), C64::new(y[2], y[3])));
        logscale.push(ls);
        Ok(())
    })?;
    if x1 < x0 {
        mesh.reverse();
        values.reverse();
        logscale.reverse();
    }
    Ok(Trajectory { z, mesh, values, logscale, tol, x_start: x0 })
}

/// End state only: `(y, y1, logscale)` at `x1`, without storing the mesh.
pub fn shoot(
    prob: &Problem,
    z: C64,
    x0: f64,
    y0: C64,
    y1_0: C64,
    x1: f64,
    tol: f64,
) -> Result<(C64, C64, f64), PropagateError> {
    if !(tol > 0.0) {
        return Err(PropagateError::BadTol(tol));
    }
    check_range(prob, x0, x1)?;
    let sys = LinearSystem { prob, z };
    let mut y = [y0.re, y0.im, y1_0.re, y1_0.im];
    let mut ls = rescale(&mut y);
    integrate(&sys, x0, x1, &mut y, &[], tol, f64::INFINITY, |_, y: &mut [f64]| {
        ls += rescale(y);
        Ok(())
    })?;
    Ok((C64::new(y[0], y[1]), C64::new(y[2], y[3]), ls))
}

#[derive(Debug, Clone, Copy)]
pub struct WronskianValue {
    pub value: C64,
    pub drift: f64,
}

/// `W(f, g) = f g1 - f1 g` at the first shared node, with the maximal
/// relative deviation over all shared nodes.
pub fn wronskian(f: &Trajectory, g: &Trajectory) -> Result<WronskianValue, PropagateError> {
    if (f.z - g.z).norm() > 0.0 {
        return Err(PropagateError::MismatchedZ);
    }
    let mut shared = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < f.len() && j < g.len() {
        if f.mesh[i] == g.mesh[j] {
            shared.push((i, j));
            i += 1;
            j += 1;
        } else if f.mesh[i] < g.mesh[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    if shared.is_empty() {
        return Err(PropagateError::NoSharedNode);
    }
    // Work relative to the logscale at the start node to avoid overflow.
    let start = shared
        .iter()
        .position(|&(i, _)| f.mesh[i] == f.x_start)
        .or_else(|| shared.iter().position(|&(_, j)| g.mesh[j] == g.x_start))
        .unwrap_or(0);
    let w_at = |k: usize| -> (C64, f64) {
        let (i, j) = shared[k];
        let (fy, fy1) = f.values[i];
        let (gy, gy1) = g.values[j];
        (fy * gy1 - fy1 * gy, f.logscale[i] + g.logscale[j])
    };
    let (w0, l0) = w_at(start);
    let mut drift: f64 = 0.0;
    for k in 0..shared.len() {
        let (w, l) = w_at(k);
        let rel = (w * (l - l0).exp() - w0).norm() / w0.norm().max(1e-300);
        drift = drift.max(rel);
    }
    let value = if w0.norm() == 0.0 { C64::new(0.0, 0.0) } else { w0 * l0.exp() };
    Ok(WronskianValue { value, drift: if w0.norm() == 0.0 { 0.0 } else { drift } })
}

/// `ln y` and `ln y1` of a solution at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogState {
    pub x: f64,
    pub ln_y: C64,
    pub ln_y1: C64,
}

/// Projective form of the linear system. Chart 0 carries `(ln y, y1 / y)`,
/// chart 1 carries `(ln y1, y / y1)`; the chart is swapped whenever the
/// ratio leaves a band around the local scale, so neither ever blows up.
struct LogSystem<'a> {
    prob: &'a Problem,
    z: C64,
    chart: std::cell::Cell<u8>,
}

fn log_scale(prob: &Problem, x: f64, z: C64) -> Result<(f64, f64, f64, f64), OdeError> {
    let k = prob.coeffs(x).map_err(|err| OdeError::Coefficient { x, err })?;
    let m = C64::new(k.q, 0.0) - z * k.r;
    let s = (k.p * (m.norm() + k.r)).sqrt();
    Ok((k.p, k.q, k.r, if s.is_finite() && s > 0.0 { s } else { 1.0 }))
}

impl OdeSystem for LogSystem<'_> {
    fn dim(&self) -> usize {
        4
    }

    #[inline]
    fn rhs(&self, x: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OdeError> {
        let k = self.prob.coeffs(x).map_err(|err| OdeError::Coefficient { x, err })?;
        let m = C64::new(k.q, 0.0) - self.z * k.r;
        let t = C64::new(y[2], y[3]);
        let (dl, dt) = if self.chart.get() == 0 {
            // t = y1 / y
            (t / k.p, m - t * t / k.p)
        } else {
            // t = y / y1
            (m * t, 1.0 / k.p - m * t * t)
        };
        dy[0] = dl.re;
        dy[1] = dl.im;
        dy[2] = dt.re;
        dy[3] = dt.im;
        Ok(())
    }

    fn error_norm(&self, x: f64, a: &[f64], b: &[f64], e: &[f64], tol: f64) -> f64 {
        let s = log_scale(self.prob, x, self.z).map(|v| v.3).unwrap_or(1.0);
        let s = if self.chart.get() == 0 { s } else { 1.0 / s };
        let el = e[0].hypot(e[1]) / tol;
        let ta = a[2].hypot(a[3]).max(b[2].hypot(b[3]));
        el.max(e[2].hypot(e[3]) / (tol * (ta + s)))
    }
}

/// Propagate `(y0, y1_0)` from `x0` to `x1` in log form and report
/// `(ln y, ln y1)` at every point of `stops` inside the range and at `x1`.
/// Growth of any size costs nothing; zeros of `y` give `ln y = -inf`.
#[allow(clippy::too_many_arguments)]
pub fn log_propagate(
    prob: &Problem,
    z: C64,
    x0: f64,
    y0: C64,
    y1_0: C64,
    x1: f64,
    stops: &[f64],
    tol: f64,
) -> Result<Vec<LogState>, PropagateError> {
    if !(tol > 0.0) {
        return Err(PropagateError::BadTol(tol));
    }
    check_range(prob, x0, x1)?;
    let (_, _, _, s0) = log_scale(prob, x0, z)?;
    let sys = LogSystem { prob, z, chart: std::cell::Cell::new(0) };
    let (l, t) = if (y1_0 / s0).norm() <= y0.norm() {
        (y0.ln(), y1_0 / y0)
    } else {
        sys.chart.set(1);
        (y1_0.ln(), y0 / y1_0)
    };
    let mut y = [l.re, l.im, t.re, t.im];
    let mut out = Vec::new();
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let wanted = |x: f64| stops.contains(&x) || x == x1;
    let state = |x: f64, y: &[f64], chart: u8| -> LogState {
        let l = C64::new(y[0], y[1]);
        let t = C64::new(y[2], y[3]);
        if chart == 0 {
            LogState { x, ln_y: l, ln_y1: l + t.ln() }
        } else {
            LogState { x, ln_y: l + t.ln(), ln_y1: l }
        }
    };
    if stops.contains(&x0) {
        out.push(state(x0, &y, sys.chart.get()));
    }
    let mut fail = None;
    integrate(&sys, x0, x1, &mut y, stops, tol, f64::INFINITY, |info, y| {
        if wanted(info.x) && (info.x - x0) * dir > 0.0 {
            out.push(state(info.x, y, sys.chart.get()));
        }
        let s = match log_scale(prob, info.x, z) {
            Ok(v) => v.3,
            Err(e) => {
                fail = Some(e);
                return Ok(());
            }
        };
        let t = C64::new(y[2], y[3]);
        let swap = if sys.chart.get() == 0 { t.norm() > 4.0 * s } else { t.norm() * s > 4.0 };
        if swap {
            let nl = C64::new(y[0], y[1]) + t.ln();
            let nt = 1.0 / t;
            y[0] = nl.re;
            y[1] = nl.im;
            y[2] = nt.re;
            y[3] = nt.im;
            sys.chart.set(1 - sys.chart.get());
        }
        Ok(())
    })?;
    if let Some(e) = fail {
        return Err(e.into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{free, harmonic_full, laguerre};
    use std::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn free_sine() {
        let t = propagate(&free(), c(1.0), 1e-9, c(1e-9f64.sin()), c(1e-9f64.cos()), PI / 2.0, 1e-12).unwrap();
        let (_, y, y1, ls) = t.end();
        assert!((y * ls.exp() - 1.0).norm() < 1e-10);
        assert!((y1 * ls.exp()).norm() < 1e-10);
    }

    #[test]
    fn harmonic_ground_state() {
        let t = propagate(&harmonic_full(), c(1.0), 0.0, c(1.0), c(0.0), 2.0, 1e-12).unwrap();
        let (_, y, _, ls) = t.end();
        assert!((y.re * ls.exp() - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn laguerre_constant() {
        let t = propagate(&laguerre(1.0).unwrap(), c(0.0), 1.0, c(1.0), c(0.0), 5.0, 1e-12).unwrap();
        let (_, y, y1, ls) = t.end();
        assert!((y * ls.exp() - 1.0).norm() < 1e-12);
        assert!(y1.norm() < 1e-12);
    }

    #[test]
    fn scaling_invariant_holds() {
        let t = propagate(&harmonic_full(), c(1.0), 0.0, c(0.0), c(1.0), 12.0, 1e-10).unwrap();
        for &(y, y1) in &t.values {
            let m = y.norm().max(y1.norm());
            assert!((SCALE_LO..=SCALE_HI).contains(&m), "{m}");
        }
        assert!(*t.logscale.last().unwrap() > 60.0);
    }

    #[test]
    fn wronskian_free() {
        let stops: Vec<f64> = (1..10).map(|k| k as f64 * 0.3).collect();
        let f = propagate_through(&free(), c(1.0), 0.01, c(0.01f64.sin()), c(0.01f64.cos()), 3.0, &stops, 1e-11)
            .unwrap();
        let g =
            propagate_through(&free(), c(1.0), 0.01, c(0.01f64.cos()), c(-(0.01f64.sin())), 3.0, &stops, 1e-11)
                .unwrap();
        let w = wronskian(&f, &g).unwrap();
        assert!((w.value + 1.0).norm() < 1e-12);
        assert!(w.drift < 1e-9);
        assert_eq!(wronskian(&f, &f).unwrap().value.norm(), 0.0);
    }

    #[test]
    fn log_form_matches_linear() {
        let h = harmonic_full();
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let st = log_propagate(&h, one, 0.0, one, zero, 2.0, &[1.0], 1e-12).unwrap();
        assert_eq!(st.len(), 2);
        assert!((st[0].ln_y.re + 0.5).abs() < 1e-9);
        assert!((st[1].ln_y.re + 2.0).abs() < 1e-9);
        // through zeros of sin
        let f = free();
        let st = log_propagate(&f, one, 0.5, C64::new(0.5f64.sin(), 0.0), C64::new(0.5f64.cos(), 0.0), 3.0, &[], 1e-12).unwrap();
        let y = st[0].ln_y.exp();
        assert!((y.re - 3f64.sin()).abs() < 1e-9 && y.im.abs() < 1e-9);
        // complex z against the linear propagator
        let z = C64::new(3.0, 2.0);
        let a = log_propagate(&h, z, 0.0, zero, one, 5.0, &[], 1e-12).unwrap();
        let (y, _, ls) = shoot(&h, z, 0.0, zero, one, 5.0, 1e-12).unwrap();
        assert!((a[0].ln_y.exp() - y * ls.exp()).norm() < 1e-8 * (y * ls.exp()).norm());
    }
}
