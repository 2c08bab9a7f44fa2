//! Characteristic functions: Hadamard products, normalized principal and
//! nonprincipal solutions, truncated characteristic functions `G_c` and the
//! minimal-order characteristic function `F_0`, plus order estimators.
//!
//! Everything is carried as `ln F`; limits in the truncation point are taken
//! by stabilization on a geometric grid with at most one Aitken step.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::eigensolve::{count_eigs_below, dirichlet_eigs, principal_data, EigenError};
use crate::partialzeta::{zeta_recursive, PartialZetaError};
use crate::problems::{Bound, BoundaryCondition, Problem};
use crate::propagate::{log_propagate, PropagateError};
use crate::special::hurwitz_zeta_re;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharFnError {
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Zeta(#[from] PartialZetaError),
    #[error("zero list contains 0; count it in m0 instead")]
    ZeroInList,
    #[error("product diverges at genus {genus}: zeros grow like n^{beta:.3}")]
    Divergent { genus: u32, beta: f64 },
    #[error("need at least {need} values, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("truncation grid must be increasing, inside the interval and (toward an open end) at least two points")]
    BadGrid,
    #[error("no limit across the truncation grid at z = {z}: last change {change:e}")]
    NotConverged { z: C64, change: f64 },
    #[error("z = {0} is a truncated eigenvalue for every anchor tried")]
    EigenvalueHit(C64),
    #[error("radius {0} exceeds the cap |z| <= 30")]
    RadiusCap(f64),
    #[error("max modulus does not grow on the given circles")]
    NoGrowth,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Largest radius used for order estimation.
pub const ORDER_RADIUS_CAP: f64 = 30.0;

// ---------------------------------------------------------------------------
// Elementary factors and Hadamard products

/// `ln E(w, p)` with `E(w, p) = (1 - w) exp(sum_{j <= p} w^j / j)`.
pub fn ln_elementary_factor(w: C64, p: u32) -> C64 {
    if w.norm() < 0.5 {
        // -sum_{j > p} w^j / j
        let mut s = C64::new(0.0, 0.0);
        let mut wj = w.powu(p + 1);
        let mut j = p as f64 + 1.0;
        loop {
            let t = wj / j;
            s -= t;
            if t.norm() <= 1e-18 * s.norm().max(1e-300) || j > 200.0 {
                break;
            }
            wj *= w;
            j += 1.0;
        }
        s
    } else {
        let mut s = (C64::new(1.0, 0.0) - w).ln();
        let mut wj = C64::new(1.0, 0.0);
        for j in 1..=p {
            wj *= w;
            s += wj / j as f64;
        }
        s
    }
}

pub fn elementary_factor(w: C64, p: u32) -> C64 {
    ln_elementary_factor(w, p).exp()
}

/// Power-law model `lambda_j = scale (j - delta)^beta` for `j > n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub scale: f64,
    pub delta: f64,
    pub beta: f64,
    pub n: usize,
}

impl PowerLaw {
    pub fn zero(&self, j: usize) -> f64 {
        self.scale * (j as f64 - self.delta).powf(self.beta)
    }

    /// `sum_{j >= from} lambda_j^(-s)` under the model.
    pub fn power_sum(&self, s: f64, from: usize) -> f64 {
        self.scale.powf(-s) * hurwitz_zeta_re(self.beta * s, from as f64 - self.delta)
    }

    /// Complex-order version of [`PowerLaw::power_sum`].
    pub fn power_sum_c(&self, s: C64, from: usize) -> C64 {
        C64::new(self.scale, 0.0).powc(-s) * crate::special::hurwitz_zeta(s * self.beta, from as f64 - self.delta)
    }

    /// Fit through the values at indices `n/2`, `3n/4` and `n` (1-based) of
    /// an increasing positive list.
    pub fn fit(vals: &[f64]) -> Option<PowerLaw> {
        let n = vals.len();
        if n < 8 || vals.iter().any(|v| !(*v > 0.0)) {
            return None;
        }
        let idx = [n / 2, 3 * n / 4, n];
        let nf: Vec<f64> = idx.iter().map(|&i| i as f64).collect();
        let lv: Vec<f64> = idx.iter().map(|&i| vals[i - 1].ln()).collect();
        let slope = |d: f64, a: usize, b: usize| (lv[b] - lv[a]) / ((nf[b] - d).ln() - (nf[a] - d).ln());
        let f = |d: f64| slope(d, 1, 2) - slope(d, 0, 1);
        let (lo, hi) = (-nf[0], 0.9 * nf[0]);
        let mut delta = 0.0;
        let steps = 400;
        let mut prev = (lo, f(lo));
        for k in 1..=steps {
            let d = lo + (hi - lo) * k as f64 / steps as f64;
            let fd = f(d);
            if fd == 0.0 {
                delta = d;
                break;
            }
            if prev.1 * fd < 0.0 {
                let (mut a, mut b) = (prev.0, d);
                let fa = prev.1;
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if (f(m) < 0.0) == (fa < 0.0) {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                delta = 0.5 * (a + b);
                break;
            }
            prev = (d, fd);
        }
        let beta = slope(delta, 0, 2);
        if !(beta > 0.0) || !beta.is_finite() {
            return None;
        }
        let scale = (lv[2] - beta * (nf[2] - delta).ln()).exp();
        Some(PowerLaw { scale, delta, beta, n })
    }
}

/// `z^m0 prod_j E(z / lambda_j, genus)`, with the product continued past the
/// listed zeros by a fitted power-law model.
#[derive(Debug, Clone)]
pub struct HadamardProduct {
    pub zeros: Vec<f64>,
    pub genus: u32,
    pub m0: u32,
    pub tail: Option<PowerLaw>,
}

impl HadamardProduct {
    pub fn new(zeros: Vec<f64>, genus: u32, m0: u32) -> Result<HadamardProduct, CharFnError> {
        if zeros.contains(&0.0) {
            return Err(CharFnError::ZeroInList);
        }
        let increasing = zeros.windows(2).all(|w| w[1] > w[0]);
        let tail = if increasing { PowerLaw::fit(&zeros) } else { None };
        if let Some(t) = tail {
            if t.beta * (genus as f64 + 1.0) <= 1.0 + 1e-3 {
                return Err(CharFnError::Divergent { genus, beta: t.beta });
            }
        }
        Ok(HadamardProduct { zeros, genus, m0, tail })
    }

    pub fn without_tail(zeros: Vec<f64>, genus: u32, m0: u32) -> Result<HadamardProduct, CharFnError> {
        let mut h = HadamardProduct::new(zeros, genus, m0)?;
        h.tail = None;
        Ok(h)
    }

    /// First model index handled by the series remainder, and the explicit
    /// model zeros before it.
    fn model_split(&self, t: &PowerLaw, z: C64) -> usize {
        let mut j = t.n + 1;
        while t.zero(j) < 2.0 * z.norm() && j < t.n + 1_000_000 {
            j += 1;
        }
        j
    }

    pub fn ln_eval(&self, z: C64) -> C64 {
        let p = self.genus;
        let mut s = if self.m0 > 0 { z.ln() * self.m0 as f64 } else { C64::new(0.0, 0.0) };
        for l in self.zeros.iter().rev() {
            s += ln_elementary_factor(z / *l, p);
        }
        if let Some(t) = self.tail {
            let j0 = self.model_split(&t, z);
            for j in (t.n + 1..j0).rev() {
                s += ln_elementary_factor(z / t.zero(j), p);
            }
            let mut zl = z.powu(p);
            for ell in p + 1..p + 400 {
                zl *= z;
                let term = zl / ell as f64 * t.power_sum(ell as f64, j0);
                s -= term;
                if term.norm() < 1e-17 * (1.0 + s.norm()) {
                    break;
                }
            }
        }
        s
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.ln_eval(z).exp()
    }

    /// `d/dz ln` of the product, summed analytically.
    pub fn log_derivative(&self, z: C64) -> C64 {
        let p = self.genus;
        let term = |l: f64| {
            let mut v = 1.0 / (z - l);
            let mut zj = C64::new(1.0, 0.0);
            for j in 1..=p {
                v += zj / l.powi(j as i32);
                zj *= z;
            }
            v
        };
        let mut s = if self.m0 > 0 { self.m0 as f64 / z } else { C64::new(0.0, 0.0) };
        for l in self.zeros.iter().rev() {
            s += term(*l);
        }
        if let Some(t) = self.tail {
            let j0 = self.model_split(&t, z);
            for j in (t.n + 1..j0).rev() {
                s += term(t.zero(j));
            }
            let mut zl = z.powu(p);
            for ell in p + 1..p + 400 {
                let d = zl * t.power_sum(ell as f64, j0);
                s -= d;
                if d.norm() < 1e-17 * (1.0 + s.norm()) {
                    break;
                }
                zl *= z;
            }
        }
        s
    }
}

/// Hadamard product over `zeros` at genus `p`, evaluated at `z`.
pub fn hadamard_char(zeros: &[f64], p: u32, z: C64) -> Result<C64, CharFnError> {
    Ok(HadamardProduct::new(zeros.to_vec(), p, 0)?.eval(z))
}

// ---------------------------------------------------------------------------
// Evaluations and limits

/// One evaluation of a characteristic function, kept in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub z: C64,
    pub ln_value: C64,
    pub converged: bool,
    /// Change between the last two (extrapolated) grid values of `ln F`.
    pub last_ratio_change: f64,
}

impl Evaluation {
    pub fn value(&self) -> C64 {
        self.ln_value.exp()
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_value.re
    }

    pub fn to_json(&self) -> serde_json::Value {
        let v = self.value();
        json!({
            "z_re": self.z.re,
            "z_im": self.z.im,
            "ln_abs": self.ln_value.re,
            "arg": self.ln_value.im,
            "re": v.re,
            "im": v.im,
            "converged": self.converged,
            "last_ratio_change": self.last_ratio_change,
        })
    }
}

/// CSV `(z_re, z_im, re_f, im_f, converged)` in the given order.
pub fn evaluations_csv(evals: &[Evaluation]) -> String {
    let mut s = String::from("z_re,z_im,re_f,im_f,converged\n");
    for e in evals {
        let v = e.value();
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            crate::fmt17(e.z.re),
            crate::fmt17(e.z.im),
            crate::fmt17(v.re),
            crate::fmt17(v.im),
            e.converged
        ));
    }
    s
}

/// Something that can be evaluated in log form.
pub trait CharFn: Sync {
    fn evaluate(&self, z: C64) -> Result<Evaluation, CharFnError>;
}

impl CharFn for HadamardProduct {
    fn evaluate(&self, z: C64) -> Result<Evaluation, CharFnError> {
        Ok(Evaluation { z, ln_value: self.ln_eval(z), converged: true, last_ratio_change: 0.0 })
    }
}

/// Remove `2 pi` jumps between successive imaginary parts.
fn unwrap(v: &mut [C64]) {
    for k in 1..v.len() {
        let d = v[k].im - v[k - 1].im;
        v[k].im -= (d / TAU).round() * TAU;
    }
}

fn aitken(v0: C64, v1: C64, v2: C64) -> Option<C64> {
    let (d1, d2) = (v1 - v0, v2 - v1);
    if !(d1.norm() > 0.0) || !d2.norm().is_finite() {
        return None;
    }
    let rho = d2 / d1;
    if rho.norm() < 0.9 && rho.re > 0.0 {
        Some(v2 + d2 * rho / (1.0 - rho))
    } else {
        None
    }
}

/// Limit of a sequence on a geometric grid: the last value or one Aitken
/// step, with the change between the last two estimates.
pub fn settle(seq: &[C64]) -> (C64, f64) {
    let mut v = seq.to_vec();
    unwrap(&mut v);
    let n = v.len();
    match n {
        0 => (C64::new(f64::NAN, 0.0), f64::INFINITY),
        1 => (v[0], 0.0),
        2 => (v[1], (v[1] - v[0]).norm()),
        _ => {
            let raw = (v[n - 1] - v[n - 2]).norm();
            let a2 = aitken(v[n - 3], v[n - 2], v[n - 1]);
            let a1 = if n >= 4 { aitken(v[n - 4], v[n - 3], v[n - 2]) } else { None };
            match (a1, a2) {
                (Some(p), Some(q)) if (q - p).norm() < raw => (q, (q - p).norm()),
                (None, Some(q)) => (q, raw),
                _ => (v[n - 1], raw),
            }
        }
    }
}

/// Complex principal data `(u, u1 - z int r u)` near the left endpoint.
fn principal_data_c(prob: &Problem, x: f64, z: C64) -> Result<(C64, C64), CharFnError> {
    let (u, u1) = principal_data(prob, 0, x, 0.0)?;
    let (_, u1_one) = principal_data(prob, 0, x, 1.0)?;
    let acc = u1 - u1_one;
    Ok((C64::new(u, 0.0), C64::new(u1, 0.0) - z * acc))
}

fn zeta_factor(zeta: &[f64], w: C64) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    let mut wl = C64::new(1.0, 0.0);
    for (i, v) in zeta.iter().enumerate() {
        wl *= w;
        s += wl * (*v / (i + 1) as f64);
    }
    s
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `ln y` at each requested point from one log-form propagation.
fn ln_at(prob: &Problem, z: C64, x0: f64, y0: C64, y1: C64, points: &[f64], tol: f64) -> Result<Vec<C64>, CharFnError> {
    let far = points.iter().copied().fold(x0, |m, p| if (p - x0).abs() > (m - x0).abs() { p } else { m });
    let mut stops: Vec<f64> = points.to_vec();
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup();
    let states = if far == x0 {
        Vec::new()
    } else {
        log_propagate(prob, z, x0, y0, y1, far, &stops, tol)?
    };
    points
        .iter()
        .map(|p| {
            if *p == x0 {
                return Ok(if y0.norm() == 0.0 { C64::new(f64::NEG_INFINITY, 0.0) } else { y0.ln() });
            }
            states.iter().find(|s| s.x == *p).map(|s| s.ln_y).ok_or(CharFnError::BadGrid)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Partial zeta along truncation sequences

/// Partial zeta values along a truncation sequence. Orders above the rank
/// converge; they are added inside the limit and their own limits subtracted
/// again, which leaves the limit unchanged but removes its slowest terms.
#[derive(Debug, Clone)]
struct ZetaCache {
    rank: usize,
    /// `values[k][l - 1]` for orders `1..=orders` at grid point `k`.
    values: Vec<Vec<f64>>,
    /// Limits of orders `rank + 1..=orders` and their last change.
    limits: Vec<f64>,
    limit_change: Vec<f64>,
}

impl ZetaCache {
    fn empty(n: usize) -> Self {
        ZetaCache { rank: 0, values: vec![Vec::new(); n], limits: Vec::new(), limit_change: Vec::new() }
    }

    /// `rows` covers the grid (first `n_grid` rows) and its extension.
    fn from_rows(rows: Vec<Vec<f64>>, n_grid: usize, rank: usize) -> Self {
        let orders = rows.first().map_or(0, |r| r.len());
        let mut limits = Vec::new();
        let mut limit_change = Vec::new();
        for ell in rank + 1..=orders {
            let seq: Vec<C64> = rows.iter().map(|r| C64::new(r[ell - 1], 0.0)).collect();
            let (v, ch) = settle(&seq);
            limits.push(v.re);
            limit_change.push(ch);
        }
        ZetaCache { rank, values: rows[..n_grid].to_vec(), limits, limit_change }
    }

    fn factor(&self, k: usize, w: C64) -> C64 {
        let mut s = zeta_factor(&self.values[k], w);
        let mut wl = w.powu(self.rank as u32);
        for (i, l) in self.limits.iter().enumerate() {
            wl *= w;
            s -= wl * (*l / (self.rank + i + 1) as f64);
        }
        s
    }

    fn uncertainty(&self, w: C64) -> f64 {
        self.limit_change
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let ell = self.rank + i + 1;
                w.norm().powi(ell as i32) / ell as f64 * d
            })
            .sum()
    }
}

fn table_rows(t: &crate::partialzeta::PartialZetaTable) -> Vec<Vec<f64>> {
    (0..t.xs.len()).map(|k| t.orders.iter().map(|&l| t.get(l, k).unwrap()).collect()).collect()
}

/// Continue a right truncation sequence by `n` points with doubling steps
/// (halving distances to a finite endpoint).
fn extend_right(prob: &Problem, grid: &[f64], n: usize) -> Vec<f64> {
    if grid.len() < 2 {
        return Vec::new();
    }
    let mut x = grid[grid.len() - 1];
    let mut step = x - grid[grid.len() - 2];
    let mut out = Vec::new();
    for _ in 0..n {
        x = match prob.interval.1 {
            Bound::Finite(b) => b - 0.5 * (b - x),
            _ => {
                step *= 2.0;
                x + step
            }
        };
        if !prob.admits(x) || out.last() == Some(&x) {
            break;
        }
        out.push(x);
    }
    out
}

fn extend_left(prob: &Problem, lefts: &[f64], n: usize) -> Vec<f64> {
    if lefts.len() < 2 {
        return Vec::new();
    }
    let mut x = lefts[lefts.len() - 1];
    let mut step = lefts[lefts.len() - 2] - x;
    let mut out = Vec::new();
    for _ in 0..n {
        x = match prob.interval.0 {
            Bound::Finite(a) => a + 0.5 * (x - a),
            _ => {
                step *= 2.0;
                x - step
            }
        };
        if !prob.admits(x) || out.last() == Some(&x) {
            break;
        }
        out.push(x);
    }
    out
}

/// Number of extension points used for the limits of the convergent orders.
const EXTENSION: usize = 3;

fn anchored_zeta(prob: &Problem, c: f64, grid: &[f64], rank: u32, extra: u32, shift: f64, tol: f64) -> Result<ZetaCache, CharFnError> {
    let ext = extend_right(prob, grid, EXTENSION);
    // Far extension points may be out of the integrator's reach; drop them.
    for n_ext in (0..=ext.len()).rev() {
        let orders = if n_ext == 0 { rank } else { rank + extra };
        if orders == 0 {
            return Ok(ZetaCache::empty(grid.len()));
        }
        let mut pts = grid.to_vec();
        pts.extend(&ext[..n_ext]);
        match zeta_recursive(prob, c, &pts, orders as usize, shift, tol) {
            Ok(t) => return Ok(ZetaCache::from_rows(table_rows(&t), grid.len(), rank as usize)),
            Err(e) if n_ext == 0 => return Err(e.into()),
            Err(_) => {}
        }
    }
    unreachable!()
}

// ---------------------------------------------------------------------------
// Minimal-order characteristic function

#[derive(Debug, Clone)]
pub struct CharFnOptions {
    /// Declared tolerance on the change of `ln F` between the last two grid estimates.
    pub tol: f64,
    pub ode_tol: f64,
    pub rank: Option<u32>,
    pub anchor: Option<f64>,
    pub shift: Option<f64>,
    /// Offsets from a limit-circle left endpoint (three, halving).
    pub eps: f64,
    /// Convergent partial zeta orders carried inside the truncation limit.
    pub extra_orders: u32,
}

impl Default for CharFnOptions {
    fn default() -> Self {
        CharFnOptions { tol: 1e-6, ode_tol: 1e-10, rank: None, anchor: None, shift: None, eps: 1e-6, extra_orders: 2 }
    }
}

#[derive(Debug, Clone)]
enum Left {
    /// Launch data at a fixed regular point.
    Fixed { x: f64, y0: f64, y1: f64 },
    /// Principal data from the catalog hint at offsets from the endpoint.
    Hint { a: f64, eps: [f64; 3] },
    /// Dirichlet launch at points moving toward the endpoint, paired with the
    /// right truncation points.
    Moving(Vec<f64>),
}

/// `F(z) = lim ln phi_a(z, X) - ln phi_c(s, X) + sum_{l <= p} ((z - s)^l / l) zeta_s(l; (c, X))`.
#[derive(Debug, Clone)]
pub struct CharFnEval {
    prob: Problem,
    left: Left,
    pub bc_left: BoundaryCondition,
    pub x_sequence: Vec<f64>,
    pub anchor: f64,
    pub shift: f64,
    pub rank: u32,
    pub tol: f64,
    pub ode_tol: f64,
    base: Vec<C64>,
    zeta: ZetaCache,
    pub warnings: Vec<String>,
}

/// Default anchor `c` toward the right endpoint.
pub fn default_anchor(prob: &Problem) -> f64 {
    match (prob.interval.0, prob.interval.1) {
        (Bound::Finite(a), _) if prob.admits(a) => a,
        (Bound::Finite(a), Bound::Finite(b)) => a + (0.5 * (b - a)).min(1.0),
        (Bound::Finite(a), _) => a + 1.0,
        (_, Bound::Finite(b)) => b - 1.0,
        _ => 0.0,
    }
}

/// Least-squares slope of `ln n` against `ln lambda_n` over the top half.
pub fn exponent_of_convergence(eigs: &[f64]) -> Result<f64, CharFnError> {
    if eigs.len() < 20 {
        return Err(CharFnError::TooFew { need: 20, got: eigs.len() });
    }
    let n = eigs.len();
    let pts: Vec<(f64, f64)> = (n / 2..n).map(|i| (eigs[i].abs().ln(), ((i + 1) as f64).ln())).collect();
    Ok(ls_slope(&pts))
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Rank from the exponent of convergence of a truncated spectrum; the second
/// value is a warning when the exponent sits near an integer.
fn estimate_rank(prob: &Problem, c: f64, d: f64, tol: f64) -> Result<(u32, Option<String>), CharFnError> {
    let e = dirichlet_eigs(prob, c, d, 40, tol.max(1e-9))?;
    let kappa = exponent_of_convergence(&e.eigs)?;
    let warn = if (kappa - kappa.round()).abs() < 0.05 {
        Some(format!("exponent of convergence {kappa:.3} is near an integer; rank may be one lower"))
    } else {
        None
    };
    Ok((kappa.floor().max(0.0) as u32, warn))
}

/// Shift keeping the base solution `phi_c(s, .)` free of zeros on `(c, d)`.
fn choose_shift(prob: &Problem, c: f64, d: f64, tol: f64) -> Result<f64, CharFnError> {
    let below = count_eigs_below(prob, c, d, BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet, 0.0, tol)?;
    if below == 0 {
        return Ok(0.0);
    }
    let e = dirichlet_eigs(prob, c, d, 2, tol)?;
    Ok(e.eigs[0] - 0.5 * (e.eigs[1] - e.eigs[0]))
}

fn check_grid(prob: &Problem, grid: &[f64], above: f64) -> Result<(), CharFnError> {
    if grid.is_empty() || grid[0] <= above || grid.windows(2).any(|w| w[1] <= w[0]) || !grid.iter().all(|x| prob.admits(*x)) {
        return Err(CharFnError::BadGrid);
    }
    Ok(())
}

/// Minimal-order characteristic function of the realization with `bc_left`
/// at the left endpoint (and the limit-point/principal condition on the right).
pub fn charfn_f0(prob: &Problem, x_grid: &[f64], bc_left: BoundaryCondition, opts: &CharFnOptions) -> Result<CharFnEval, CharFnError> {
    let mut warnings = Vec::new();
    let right_fixed = prob.right_finite().filter(|b| prob.admits(*b));
    let mut grid: Vec<f64> = match right_fixed {
        Some(b) => vec![b],
        None => x_grid.to_vec(),
    };
    // one point gives no convergence evidence
    if right_fixed.is_none() && grid.len() < 2 {
        return Err(CharFnError::BadGrid);
    }
    let left = match prob.interval.0 {
        Bound::Finite(a) if prob.admits(a) => {
            let (y0, y1) = match bc_left {
                BoundaryCondition::FriedrichsPrincipal => (0.0, 1.0),
                other => other.launch().unwrap(),
            };
            Left::Fixed { x: a, y0, y1 }
        }
        Bound::Finite(a) if prob.endpoints[0].principal.is_some() => {
            match bc_left {
                BoundaryCondition::FriedrichsPrincipal | BoundaryCondition::Dirichlet => {}
                other => {
                    return Err(CharFnError::Unsupported(format!(
                        "condition {} at a singular endpoint needs a nonprincipal solution there",
                        other.label()
                    )))
                }
            }
            let e = opts.eps.min(1e-3 * (grid.first().copied().unwrap_or(a + 1.0) - a));
            Left::Hint { a, eps: [e, 0.5 * e, 0.25 * e] }
        }
        Bound::Finite(a) => {
            let c = opts.anchor.unwrap_or(default_anchor(prob));
            let k = grid.len().max(6);
            if right_fixed.is_some() {
                grid = vec![grid[0]; k];
            }
            Left::Moving((0..k).map(|i| a + (c - a) * 0.5f64.powi(i as i32 + 4)).collect())
        }
        _ => {
            if let Some(b) = right_fixed {
                grid = vec![b; 6];
                Left::Moving((0..grid.len()).map(|i| b - 4.0 * 2f64.powi(i as i32)).collect())
            } else {
                let c = opts.anchor.unwrap_or(0.0);
                Left::Moving(grid.iter().map(|x| c - (x - c)).collect())
            }
        }
    };
    let anchor = match &left {
        Left::Fixed { x, .. } => opts.anchor.unwrap_or(*x),
        Left::Hint { .. } => opts.anchor.unwrap_or(default_anchor(prob)),
        Left::Moving(l) => l[0],
    };
    match &left {
        Left::Moving(l) => {
            if grid.is_empty() || l.len() != grid.len() || l.iter().zip(&grid).any(|(a, b)| a >= b) || !l.iter().all(|x| prob.admits(*x)) {
                return Err(CharFnError::BadGrid);
            }
        }
        _ => check_grid(prob, &grid, anchor)?,
    }
    let (lo_last, hi_last) = match &left {
        Left::Moving(l) => (*l.last().unwrap(), *grid.last().unwrap()),
        _ => (anchor, *grid.last().unwrap()),
    };
    let rank = match opts.rank {
        Some(r) => r,
        None => {
            let hint_r = if right_fixed.is_some() { Some(0) } else { prob.endpoints[1].rank_hint };
            let hint_l = if matches!(left, Left::Moving(_)) { prob.endpoints[0].rank_hint } else { Some(0) };
            match (hint_l, hint_r) {
                (Some(l), Some(r)) => l.max(r),
                _ => {
                    let (r, w) = estimate_rank(prob, lo_last, hi_last, opts.ode_tol)?;
                    if let Some(w) = w {
                        warnings.push(w);
                    }
                    r
                }
            }
        }
    };
    let shift = match opts.shift {
        Some(s) => s,
        None => choose_shift(prob, lo_last, hi_last, opts.ode_tol)?,
    };
    let s = C64::new(shift, 0.0);
    let (base, zeta) = match &left {
        Left::Moving(l) => {
            let mut base = Vec::with_capacity(grid.len());
            for (lk, xk) in l.iter().zip(&grid) {
                base.push(ln_at(prob, s, *lk, zero(), one(), &[*xk], opts.ode_tol)?[0]);
            }
            let moving_right = grid.len() >= 2 && grid[0] != grid[1];
            let mut lefts = l.clone();
            let mut rights = grid.clone();
            let ext_l = extend_left(prob, l, EXTENSION);
            let ext_r = if moving_right { extend_right(prob, &grid, EXTENSION) } else { vec![grid[0]; ext_l.len()] };
            let n_ext = ext_l.len().min(ext_r.len());
            lefts.extend(&ext_l[..n_ext]);
            rights.extend(&ext_r[..n_ext]);
            let orders = if n_ext == 0 { rank } else { rank + opts.extra_orders };
            let zeta = if orders == 0 {
                ZetaCache::empty(grid.len())
            } else {
                let rows = lefts
                    .iter()
                    .zip(&rights)
                    .map(|(lk, xk)| Ok(table_rows(&zeta_recursive(prob, *lk, &[*xk], orders as usize, shift, opts.ode_tol)?).remove(0)))
                    .collect::<Result<Vec<_>, CharFnError>>()?;
                ZetaCache::from_rows(rows, grid.len(), rank as usize)
            };
            (base, zeta)
        }
        _ => {
            let base = ln_at(prob, s, anchor, zero(), one(), &grid, opts.ode_tol)?;
            let zeta = anchored_zeta(prob, anchor, &grid, rank, opts.extra_orders, shift, opts.ode_tol)?;
            (base, zeta)
        }
    };
    Ok(CharFnEval {
        prob: prob.clone(),
        left,
        bc_left,
        x_sequence: grid,
        anchor,
        shift,
        rank,
        tol: opts.tol,
        ode_tol: opts.ode_tol,
        base,
        zeta,
        warnings,
    })
}

/// `G_c(z)` for the Dirichlet condition at `c`, as a reusable evaluator.
pub fn truncated_charfn_eval(prob: &Problem, c: f64, x_grid: &[f64], opts: &CharFnOptions) -> Result<CharFnEval, CharFnError> {
    if !prob.admits(c) {
        return Err(CharFnError::BadGrid);
    }
    let rank = match opts.rank {
        Some(r) => r,
        None => match prob.endpoints[1].rank_hint {
            Some(r) => r,
            None => estimate_rank(prob, c, *x_grid.last().ok_or(CharFnError::BadGrid)?, opts.ode_tol)?.0,
        },
    };
    let mut eval = charfn_f0(
        &restricted(prob, c)?,
        x_grid,
        BoundaryCondition::Dirichlet,
        &CharFnOptions { rank: Some(rank), anchor: Some(c), shift: Some(0.0), ..opts.clone() },
    )?;
    eval.prob = prob.clone();
    Ok(eval)
}

/// `G_c(z)` evaluated once.
pub fn truncated_charfn(prob: &Problem, c: f64, x_grid: &[f64], z: C64, opts: &CharFnOptions) -> Result<Evaluation, CharFnError> {
    truncated_charfn_eval(prob, c, x_grid, opts)?.evaluate(z)
}

/// The same expression on `(c, b)`, with `c` a regular left endpoint.
fn restricted(prob: &Problem, c: f64) -> Result<Problem, CharFnError> {
    if prob.left_finite() == Some(c) {
        return Ok(prob.clone());
    }
    let mut endpoints = prob.endpoints.clone();
    endpoints[0].classification = crate::problems::EndpointClass::Regular;
    endpoints[0].rank_hint = Some(0);
    endpoints[0].principal = None;
    Problem::new(
        &prob.name,
        prob.p_expr.clone(),
        prob.q_expr.clone(),
        prob.r_expr.clone(),
        (Bound::Finite(c), prob.interval.1),
        prob.params.clone(),
        endpoints,
        None,
    )
    .map_err(|e| CharFnError::Unsupported(e.to_string()))
}

impl CharFnEval {
    pub fn problem(&self) -> &Problem {
        &self.prob
    }

    /// `ln F(z; X_k)` for every grid point.
    pub fn sequence(&self, z: C64) -> Result<Vec<C64>, CharFnError> {
        let w = z - self.shift;
        let finish = |k: usize, ln_phi: C64| ln_phi - self.base[k] + self.zeta.factor(k, w);
        match &self.left {
            Left::Fixed { x, y0, y1 } => {
                let l = ln_at(&self.prob, z, *x, C64::new(*y0, 0.0), C64::new(*y1, 0.0), &self.x_sequence, self.ode_tol)?;
                Ok(l.into_iter().enumerate().map(|(k, v)| finish(k, v)).collect())
            }
            Left::Hint { a, eps } => {
                let runs: Vec<Vec<C64>> = eps
                    .iter()
                    .map(|e| {
                        let (u, u1) = principal_data_c(&self.prob, a + e, z)?;
                        let mut l = ln_at(&self.prob, z, a + e, u, u1, &self.x_sequence, self.ode_tol)?;
                        unwrap(&mut l);
                        Ok(l)
                    })
                    .collect::<Result<_, CharFnError>>()?;
                Ok((0..self.x_sequence.len())
                    .map(|k| {
                        let mut v = [runs[0][k], runs[1][k], runs[2][k]];
                        unwrap(&mut v);
                        finish(k, aitken(v[0], v[1], v[2]).unwrap_or(v[2]))
                    })
                    .collect())
            }
            Left::Moving(l) => l
                .iter()
                .zip(&self.x_sequence)
                .enumerate()
                .map(|(k, (lk, xk))| Ok(finish(k, ln_at(&self.prob, z, *lk, zero(), one(), &[*xk], self.ode_tol)?[0])))
                .collect(),
        }
    }

    /// Evaluate at many points in parallel; order is preserved.
    pub fn evaluate_many(&self, zs: &[C64]) -> Result<Vec<Evaluation>, CharFnError> {
        zs.par_iter().map(|z| self.evaluate(*z)).collect()
    }

    pub fn diagnostics(&self) -> serde_json::Value {
        json!({
            "problem": self.prob.name,
            "bc_left": self.bc_left.label(),
            "x_sequence": self.x_sequence,
            "anchor": self.anchor,
            "shift": self.shift,
            "rank": self.rank,
            "tol": self.tol,
            "zeta_limits": self.zeta.limits,
            "zeta_limit_change": self.zeta.limit_change,
            "warnings": self.warnings,
        })
    }
}

impl CharFn for CharFnEval {
    fn evaluate(&self, z: C64) -> Result<Evaluation, CharFnError> {
        let seq = self.sequence(z)?;
        let (v, change) = settle(&seq);
        let change = change + self.zeta.uncertainty(z - self.shift);
        Ok(Evaluation { z, ln_value: v, converged: change < self.tol, last_ratio_change: change })
    }
}

// ---------------------------------------------------------------------------
// Normalized solutions

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

/// `ln` of a normalized solution at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedValue {
    pub z: C64,
    pub x: f64,
    pub ln_value: C64,
    pub anchor: f64,
    pub converged: bool,
    pub last_change: f64,
}

impl NormalizedValue {
    pub fn value(&self) -> C64 {
        self.ln_value.exp()
    }
}

#[derive(Debug, Clone, Default)]
pub struct NormOptions {
    pub charfn: CharFnOptions,
    /// Truncation points toward the endpoint; a doubling grid when `None`.
    pub grid: Option<Vec<f64>>,
}

fn doubling(from: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| from * 2f64.powi(k as i32)).collect()
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Principal solution at the right endpoint: Dirichlet launches at far points
/// `X`, normalized to 1 at the anchor for `z = 0` and regularized by the
/// partial zeta values of `(c, X)`. Caches are built once.
#[derive(Debug, Clone)]
pub struct PrincipalFamily {
    prob: Problem,
    anchor: f64,
    grid: Vec<f64>,
    base: Vec<C64>,
    zeta: ZetaCache,
    tol: f64,
    ode_tol: f64,
}

impl PrincipalFamily {
    /// Family usable for `x < grid[0]`.
    pub fn new(prob: &Problem, opts: &NormOptions, x_max: f64) -> Result<PrincipalFamily, CharFnError> {
        let c = opts.charfn.anchor.unwrap_or(default_anchor(prob));
        let rank = opts.charfn.rank.unwrap_or(prob.right_rank());
        let grid = match (prob.right_finite().filter(|b| prob.admits(*b)), &opts.grid) {
            (Some(b), _) => vec![b],
            (None, Some(g)) => g.clone(),
            (None, None) => doubling(2.0 * x_max.max(c).abs().max(1.0), 3),
        };
        check_grid(prob, &grid, x_max.max(c))?;
        let tol = opts.charfn.ode_tol;
        let base = grid
            .iter()
            .map(|xk| Ok(ln_at(prob, zero(), *xk, zero(), one(), &[c], tol)?[0]))
            .collect::<Result<Vec<_>, CharFnError>>()?;
        let zeta = if grid.len() > 1 {
            anchored_zeta(prob, c, &grid, rank, opts.charfn.extra_orders, 0.0, tol)?
        } else {
            ZetaCache::empty(1)
        };
        Ok(PrincipalFamily { prob: prob.clone(), anchor: c, grid, base, zeta, tol: opts.charfn.tol, ode_tol: tol })
    }

    pub fn values(&self, z: C64, xs: &[f64]) -> Result<Vec<NormalizedValue>, CharFnError> {
        if xs.iter().any(|x| *x >= self.grid[0] || !self.prob.admits(*x)) {
            return Err(CharFnError::BadGrid);
        }
        let mut seqs = vec![Vec::with_capacity(self.grid.len()); xs.len()];
        for (k, xk) in self.grid.iter().enumerate() {
            let l = ln_at(&self.prob, z, *xk, zero(), one(), xs, self.ode_tol)?;
            let add = -self.base[k] + self.zeta.factor(k, z);
            for (i, v) in l.into_iter().enumerate() {
                seqs[i].push(v + add);
            }
        }
        let unc = self.zeta.uncertainty(z);
        Ok(xs
            .iter()
            .zip(seqs)
            .map(|(x, s)| {
                let (v, ch) = settle(&s);
                let ch = ch + unc;
                NormalizedValue { z, x: *x, ln_value: v, anchor: self.anchor, converged: ch < self.tol, last_change: ch }
            })
            .collect())
    }
}

/// Principal solution at the left endpoint at every `x` in `xs`: launched from
/// hint data at halving offsets (extrapolated), or from Dirichlet data at
/// points approaching the endpoint.
fn principal_left(prob: &Problem, z: C64, xs: &[f64], opts: &NormOptions) -> Result<Vec<NormalizedValue>, CharFnError> {
    let rank = opts.charfn.rank.unwrap_or(prob.left_rank());
    let c = match opts.charfn.anchor {
        Some(c) => c,
        None => {
            let c = default_anchor(prob);
            if prob.left_finite() == Some(c) {
                c + prob.right_finite().map(|b| 0.5 * (b - c)).unwrap_or(1.0).min(1.0)
            } else {
                c
            }
        }
    };
    if !prob.admits(c) || xs.iter().any(|x| !prob.admits(*x)) {
        return Err(CharFnError::BadGrid);
    }
    let lo = min_of(xs).min(c);
    let tol = opts.charfn.ode_tol;
    let (launches, hint): (Vec<f64>, bool) = match prob.interval.0 {
        Bound::Finite(a) if prob.admits(a) => (vec![a], false),
        Bound::Finite(a) if prob.endpoints[0].principal.is_some() => {
            let e = opts.charfn.eps.min(1e-2 * (lo - a));
            (vec![a + e, a + 0.5 * e, a + 0.25 * e], true)
        }
        Bound::Finite(a) => ((0..6).map(|i| a + (lo - a) * 0.5f64.powi(i + 4)).collect(), false),
        _ => match &opts.grid {
            Some(g) => (g.clone(), false),
            None => ((0..5).map(|i| lo - 2.0 * lo.abs().max(1.0) * 2f64.powi(i)).collect(), false),
        },
    };
    let mut pts = xs.to_vec();
    pts.push(c);
    let mut seqs = vec![Vec::with_capacity(launches.len()); xs.len()];
    for &l in &launches {
        if !prob.admits(l) || l > lo {
            return Err(CharFnError::BadGrid);
        }
        let (vals, base) = if hint {
            let (u, u1) = principal_data_c(prob, l, z)?;
            let (u0, u10) = principal_data_c(prob, l, zero())?;
            (ln_at(prob, z, l, u, u1, &pts, tol)?, ln_at(prob, zero(), l, u0, u10, &[c], tol)?[0])
        } else {
            (ln_at(prob, z, l, zero(), one(), &pts, tol)?, ln_at(prob, zero(), l, zero(), one(), &[c], tol)?[0])
        };
        let zf = if rank > 0 && l < c {
            table_rows(&zeta_recursive(prob, l, &[c], rank as usize, 0.0, tol)?).remove(0)
        } else {
            Vec::new()
        };
        let add = -base + zeta_factor(&zf, z);
        for i in 0..xs.len() {
            seqs[i].push(vals[i] + add);
        }
    }
    Ok(xs
        .iter()
        .zip(seqs)
        .map(|(x, mut s)| {
            let (v, ch) = if hint {
                unwrap(&mut s);
                (aitken(s[0], s[1], s[2]).unwrap_or(s[2]), (s[2] - s[1]).norm())
            } else {
                settle(&s)
            };
            NormalizedValue { z, x: *x, ln_value: v, anchor: c, converged: ch < opts.charfn.tol, last_change: ch }
        })
        .collect())
}

/// Principal solution at `endpoint` at every `x` in `xs`, normalized as in
/// [`PrincipalFamily`] (products over matched power-sum tuples tend to 1).
pub fn principal_values(prob: &Problem, endpoint: Endpoint, z: C64, xs: &[f64], opts: &NormOptions) -> Result<Vec<NormalizedValue>, CharFnError> {
    match endpoint {
        Endpoint::Right => PrincipalFamily::new(prob, opts, max_of(xs))?.values(z, xs),
        Endpoint::Left => principal_left(prob, z, xs, opts),
    }
}

pub fn principal_normalized(prob: &Problem, endpoint: Endpoint, z: C64, x: f64, opts: &NormOptions) -> Result<NormalizedValue, CharFnError> {
    Ok(principal_values(prob, endpoint, z, &[x], opts)?[0])
}

/// Nonprincipal solution at the right endpoint, `theta(z, x) = phi_c(z, x) / G_c(z)`.
#[derive(Debug, Clone)]
pub struct NonprincipalFamily {
    prob: Problem,
    anchor: f64,
    grid: Vec<f64>,
    g: CharFnEval,
    opts: CharFnOptions,
}

impl NonprincipalFamily {
    pub fn new(prob: &Problem, opts: &NormOptions, x_max: f64) -> Result<NonprincipalFamily, CharFnError> {
        let c = opts.charfn.anchor.unwrap_or(default_anchor(prob));
        let grid = match &opts.grid {
            Some(g) => g.clone(),
            None => doubling(2.0 * x_max.abs().max(c.abs() + 1.0), 4),
        };
        let g = truncated_charfn_eval(prob, c, &grid, &opts.charfn)?;
        Ok(NonprincipalFamily { prob: prob.clone(), anchor: c, grid, g, opts: opts.charfn.clone() })
    }

    /// Values at every `x` in `xs`. When `z` is numerically an eigenvalue of
    /// the anchored truncation the anchor is moved to `c'` and the result
    /// rescaled so that `phi_c'(0, x) / phi_c(0, x) -> 1`.
    pub fn values(&self, z: C64, xs: &[f64]) -> Result<Vec<NormalizedValue>, CharFnError> {
        if xs.iter().any(|x| *x <= self.anchor || !self.prob.admits(*x)) {
            return Err(CharFnError::BadGrid);
        }
        let floor = (1e-8f64).ln();
        let mut g = self.g.evaluate(z)?;
        let mut c = self.anchor;
        let mut rescale = zero();
        if g.ln_value.re < floor {
            let span = (min_of(xs) - self.anchor).min(1.0);
            let mut found = false;
            for k in 1..4 {
                let c2 = self.anchor + span * k as f64 / 8.0;
                let g2 = truncated_charfn_eval(&self.prob, c2, &self.grid, &self.opts)?;
                let e = g2.evaluate(z)?;
                if e.ln_value.re >= floor {
                    let n = self.grid.len() - 1;
                    rescale = self.g.base[n] - g2.base[n];
                    g = e;
                    c = c2;
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(CharFnError::EigenvalueHit(z));
            }
        }
        let phi = ln_at(&self.prob, z, c, zero(), one(), xs, self.opts.ode_tol)?;
        Ok(xs
            .iter()
            .zip(phi)
            .map(|(x, p)| NormalizedValue {
                z,
                x: *x,
                ln_value: p + rescale - g.ln_value,
                anchor: c,
                converged: g.converged,
                last_change: g.last_ratio_change,
            })
            .collect())
    }
}

pub fn nonprincipal_values(prob: &Problem, endpoint: Endpoint, z: C64, xs: &[f64], opts: &NormOptions) -> Result<Vec<NormalizedValue>, CharFnError> {
    if endpoint == Endpoint::Left {
        return Err(CharFnError::Unsupported("nonprincipal normalization is built toward the right endpoint".into()));
    }
    NonprincipalFamily::new(prob, opts, max_of(xs))?.values(z, xs)
}

pub fn nonprincipal_normalized(prob: &Problem, endpoint: Endpoint, z: C64, x: f64, opts: &NormOptions) -> Result<NormalizedValue, CharFnError> {
    Ok(nonprincipal_values(prob, endpoint, z, &[x], opts)?[0])
}

/// `ln prod f(z_j, x) - ln prod f(w_j, x)` at every point of a family's grid.
pub fn tuple_log_ratios<F>(f: F, zs: &[C64], ws: &[C64]) -> Result<Vec<C64>, CharFnError>
where
    F: Fn(C64) -> Result<Vec<NormalizedValue>, CharFnError>,
{
    let mut acc: Option<Vec<C64>> = None;
    for (z, sign) in zs.iter().map(|z| (z, 1.0)).chain(ws.iter().map(|w| (w, -1.0))) {
        let v = f(*z)?;
        let a = acc.get_or_insert_with(|| vec![zero(); v.len()]);
        for (s, n) in a.iter_mut().zip(&v) {
            *s += n.ln_value * sign;
        }
    }
    let mut out = acc.unwrap_or_default();
    for s in out.iter_mut() {
        s.im -= (s.im / TAU).round() * TAU;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Order estimation

#[derive(Debug, Clone)]
pub struct OrderEstimate {
    pub order: f64,
    pub radii: Vec<f64>,
    /// `ln max_{|z| = r} |F|` per radius.
    pub ln_max: Vec<f64>,
    pub angles: usize,
}

/// Slope of `ln ln max|F|` against `ln r` by least squares, sampling each
/// circle at `angles` (at least 64) points offset from the real axis.
pub fn estimate_order(f: &dyn CharFn, radii: &[f64], angles: usize) -> Result<OrderEstimate, CharFnError> {
    if radii.len() < 2 {
        return Err(CharFnError::TooFew { need: 2, got: radii.len() });
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(CharFnError::BadGrid);
    }
    if let Some(r) = radii.iter().find(|r| **r > ORDER_RADIUS_CAP) {
        return Err(CharFnError::RadiusCap(*r));
    }
    let m = angles.max(64);
    let mut ln_max = Vec::with_capacity(radii.len());
    for (i, r) in radii.iter().enumerate() {
        let zs: Vec<C64> = (0..m).map(|k| C64::from_polar(*r, PI * (2 * k + 1) as f64 / m as f64)).collect();
        let evals: Vec<Evaluation> = zs.par_iter().map(|z| f.evaluate(*z)).collect::<Result<_, _>>()?;
        if i + 1 == radii.len() {
            if let Some(e) = evals.iter().find(|e| !e.converged) {
                return Err(CharFnError::NotConverged { z: e.z, change: e.last_ratio_change });
            }
        }
        ln_max.push(evals.iter().map(|e| e.ln_value.re).fold(f64::NEG_INFINITY, f64::max));
    }
    if ln_max.iter().any(|v| !(*v > 0.0)) {
        return Err(CharFnError::NoGrowth);
    }
    let pts: Vec<(f64, f64)> = radii.iter().zip(&ln_max).map(|(r, l)| (r.ln(), l.ln())).collect();
    Ok(OrderEstimate { order: ls_slope(&pts), radii: radii.to_vec(), ln_max, angles: m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_examples() {
        assert_eq!(elementary_factor(C64::new(0.0, 0.0), 3), C64::new(1.0, 0.0));
        assert!(elementary_factor(C64::new(1.0, 0.0), 0).norm() < 1e-300);
        let e = elementary_factor(C64::new(0.1, 0.0), 1);
        assert!((e.re - 0.9 * 0.1f64.exp()).abs() < 1e-15);
        // both branches agree near the switch
        for w in [C64::new(0.49, 0.1), C64::new(-0.3, 0.39)] {
            let a = ln_elementary_factor(w, 2);
            let b = (C64::new(1.0, 0.0) - w).ln() + w + w * w / 2.0;
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn settle_geometric() {
        let seq: Vec<C64> = (0..5).map(|k| C64::new(2.0 + 0.5f64.powi(k), 0.0)).collect();
        let (v, ch) = settle(&seq);
        assert!((v.re - 2.0).abs() < 1e-14 && ch < 1e-14);
    }
}
