//! Spectral zeta functions: direct eigenvalue sums with a fitted power-law
//! tail, and the contour representation built from a characteristic function.
//!
//! Contour convention (checked against direct sums): `z^(-s)` has its cut
//! along the ray `arg z = psi` and `arg z` runs over `(psi - 2 pi, psi)`, so
//! positive eigenvalues carry their principal powers. The circle is traversed
//! counterclockwise from `arg z = psi - 2 pi`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde_json::json;
use thiserror::Error;

use crate::charfn::{exponent_of_convergence, CharFn, CharFnError, CharFnEval, Evaluation, HadamardProduct, PowerLaw};
use crate::eigensolve::{dirichlet_eigs, EigenError};
use crate::quad::gauss_legendre;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZetaError {
    #[error(transparent)]
    CharFn(#[from] CharFnError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("Re s = {re} does not exceed the convergence exponent {kappa:.4}")]
    Refused { re: f64, kappa: f64 },
    #[error("eigenvalue list contains 0")]
    ZeroEigenvalue,
    #[error("s = {0} is within 1e-3 of a positive integer; use the direct sum")]
    IntegerS(C64),
    #[error("invalid query: {0}")]
    BadQuery(String),
    #[error("F vanishes within 2h of z = {0}")]
    VanishesNear(C64),
    #[error("quadrature did not settle: {0}")]
    NotConverged(String),
}

/// Parameters of one contour evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaQuery {
    pub s: C64,
    /// Ray angle in `(pi/2, pi)`.
    pub psi: f64,
    /// Circle radius, below the smallest eigenvalue modulus.
    pub r: f64,
    /// Multiplicity of the zero eigenvalue.
    pub m0: u32,
    pub tol: f64,
    /// Order of `F`; estimated from the spectrum when `None`.
    pub order: Option<f64>,
    /// Last ray node; beyond it the ray integral uses a fitted asymptotic model.
    pub t_max: Option<f64>,
}

impl ZetaQuery {
    pub fn new(s: C64) -> ZetaQuery {
        ZetaQuery { s, psi: 0.75 * PI, r: 0.5, m0: 0, tol: 1e-8, order: None, t_max: None }
    }

    fn check(&self) -> Result<(), ZetaError> {
        if !(self.psi > 0.5 * PI && self.psi < PI) {
            return Err(ZetaError::BadQuery(format!("psi = {} outside (pi/2, pi)", self.psi)));
        }
        if !(self.r > 0.0) || !(self.tol > 0.0) {
            return Err(ZetaError::BadQuery("R and tol must be positive".into()));
        }
        let k = self.s.re.round();
        if k >= 1.0 && (self.s - k).norm() < 1e-3 {
            return Err(ZetaError::IntegerS(self.s));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Direct sums

/// `lambda^(-s)`, with `e^(-i pi s) |lambda|^(-s)` for negative eigenvalues.
fn power(l: f64, s: C64) -> C64 {
    let m = C64::new(l.abs(), 0.0).powc(-s);
    if l > 0.0 {
        m
    } else {
        m * (C64::new(0.0, -PI) * s).exp()
    }
}

/// Tail only from lists long enough for the power-law fit to be asymptotic.
const TAIL_MIN: usize = 50;

/// `sum lambda_n^(-s)` over the list plus a power-law model of the rest.
pub fn zeta_sum(eigs: &[f64], s: C64) -> Result<C64, ZetaError> {
    if eigs.contains(&0.0) {
        return Err(ZetaError::ZeroEigenvalue);
    }
    if eigs.len() >= 20 {
        let kappa = exponent_of_convergence(eigs)?;
        if s.re <= kappa {
            return Err(ZetaError::Refused { re: s.re, kappa });
        }
    }
    let mut sum = C64::new(0.0, 0.0);
    for l in eigs.iter().rev() {
        sum += power(*l, s);
    }
    if eigs.len() >= TAIL_MIN && eigs.windows(2).all(|w| w[1] > w[0]) {
        if let Some(t) = PowerLaw::fit(eigs) {
            sum += t.power_sum_c(s, eigs.len() + 1);
        }
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// Logarithmic derivatives

/// A characteristic function handed to the zeta routines.
#[derive(Clone, Copy)]
pub enum CharFnRef<'a> {
    Eval(&'a CharFnEval),
    Hadamard(&'a HadamardProduct),
    Other(&'a dyn CharFn),
}

impl<'a> CharFnRef<'a> {
    fn ln(&self, z: C64) -> Result<(C64, f64), ZetaError> {
        Ok(match self {
            CharFnRef::Hadamard(h) => (h.ln_eval(z), 0.0),
            CharFnRef::Eval(f) => {
                let e = f.evaluate(z)?;
                (e.ln_value, e.last_ratio_change)
            }
            CharFnRef::Other(f) => {
                let e = f.evaluate(z)?;
                (e.ln_value, e.last_ratio_change)
            }
        })
    }

    fn ln_many(&self, zs: &[C64]) -> Result<(Vec<C64>, f64), ZetaError> {
        match self {
            CharFnRef::Eval(f) => {
                let e = f.evaluate_many(zs)?;
                let worst = e.iter().map(|e| e.last_ratio_change).fold(0.0, f64::max);
                Ok((e.into_iter().map(|e| e.ln_value).collect(), worst))
            }
            _ => {
                let mut out = Vec::with_capacity(zs.len());
                let mut worst = 0.0f64;
                for z in zs {
                    let (v, c) = self.ln(*z)?;
                    out.push(v);
                    worst = worst.max(c);
                }
                Ok((out, worst))
            }
        }
    }
}

impl<'a> From<&'a CharFnEval> for CharFnRef<'a> {
    fn from(f: &'a CharFnEval) -> Self {
        CharFnRef::Eval(f)
    }
}

impl<'a> From<&'a HadamardProduct> for CharFnRef<'a> {
    fn from(f: &'a HadamardProduct) -> Self {
        CharFnRef::Hadamard(f)
    }
}

/// Memoized evaluations, for several contour queries sharing nodes
/// (different `s` at the same `psi` and `R`).
pub struct Memo<'a> {
    inner: &'a dyn CharFn,
    seen: Mutex<HashMap<(u64, u64), Evaluation>>,
}

impl<'a> Memo<'a> {
    pub fn new(inner: &'a dyn CharFn) -> Memo<'a> {
        Memo { inner, seen: Mutex::new(HashMap::new()) }
    }
}

impl CharFn for Memo<'_> {
    fn evaluate(&self, z: C64) -> Result<Evaluation, CharFnError> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(e) = self.seen.lock().unwrap().get(&key) {
            return Ok(*e);
        }
        let e = self.inner.evaluate(z)?;
        self.seen.lock().unwrap().insert(key, e);
        Ok(e)
    }
}

fn nearest(a: C64, b: C64) -> C64 {
    C64::new(b.re, b.im - ((b.im - a.im) / (2.0 * PI)).round() * 2.0 * PI)
}

/// `d/dz ln F(z)`: the analytic series for a Hadamard product, otherwise
/// fourth-order central differences at steps `h` and `h/2` with a Richardson
/// combination.
pub fn logderiv_charfn(f: CharFnRef, z: C64, h: f64) -> Result<C64, ZetaError> {
    if let CharFnRef::Hadamard(p) = f {
        if p.zeros.iter().any(|l| (z - *l).norm() < 2.0 * h) || (p.m0 > 0 && z.norm() < 2.0 * h) {
            return Err(ZetaError::VanishesNear(z));
        }
        return Ok(p.log_derivative(z));
    }
    let c = f.ln(z)?.0;
    let at = |d: f64| -> Result<C64, ZetaError> { Ok(nearest(c, f.ln(z + d)?.0)) };
    let d4 = |h: f64, fm2: C64, fm1: C64, fp1: C64, fp2: C64| (fm2 - fp2 + 8.0 * (fp1 - fm1)) / (12.0 * h);
    let (m2, m1, mh, ph, p1, p2) = (at(-2.0 * h)?, at(-h)?, at(-0.5 * h)?, at(0.5 * h)?, at(h)?, at(2.0 * h)?);
    let coarse = d4(h, m2, m1, p1, p2);
    let fine = d4(0.5 * h, m1, mh, ph, p1);
    let diff = (fine - coarse).norm();
    if diff > 1e-2 * fine.norm().max(1.0) {
        return Err(ZetaError::VanishesNear(z));
    }
    Ok(fine + (fine - coarse) / 15.0)
}

// ---------------------------------------------------------------------------
// Contour representation

#[derive(Debug, Clone, PartialEq)]
pub struct ContourResult {
    pub s: C64,
    pub value: C64,
    pub ray_part: C64,
    pub circle_part: C64,
    /// Part of the ray integral beyond `t_max`, from the fitted model.
    pub tail_part: C64,
    pub psi: f64,
    pub r: f64,
    pub tol: f64,
    pub t_max: f64,
    pub order: f64,
    /// Quadrature and tail-fit error estimates (before the prefactor).
    pub ray_error: f64,
    pub tail_error: f64,
    /// Largest reported change among the characteristic-function evaluations.
    pub eval_change: f64,
}

impl ContourResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "s": [self.s.re, self.s.im],
            "value_re": self.value.re,
            "value_im": self.value.im,
            "ray_part": [self.ray_part.re, self.ray_part.im],
            "circle_part": [self.circle_part.re, self.circle_part.im],
            "tail_part": [self.tail_part.re, self.tail_part.im],
            "psi": self.psi,
            "R": self.r,
            "tol": self.tol,
            "t_max": self.t_max,
            "order": self.order,
            "ray_error": self.ray_error,
            "tail_error": self.tail_error,
            "eval_change": self.eval_change,
        })
    }
}

/// Snap to a fraction with denominator at most 12 when one is close.
fn snap_order(rho: f64) -> f64 {
    let mut best = (f64::INFINITY, rho);
    for q in 1..=12 {
        let p = (rho * q as f64).round();
        let d = (rho - p / q as f64).abs();
        if d < best.0 - 1e-12 {
            best = (d, p / q as f64);
        }
    }
    if best.0 < 1e-2 {
        best.1
    } else {
        rho
    }
}

/// Order of `F` from the growth of its zeros.
pub fn model_order(f: CharFnRef) -> Result<f64, ZetaError> {
    let beta = match f {
        CharFnRef::Hadamard(h) => h.tail.map(|t| t.beta).or_else(|| PowerLaw::fit(&h.zeros).map(|t| t.beta)),
        CharFnRef::Eval(e) => {
            let d = *e.x_sequence.last().unwrap();
            let c = if e.anchor < d { e.anchor } else { d - 1.0 };
            let eigs = dirichlet_eigs(e.problem(), c, d, 40, e.ode_tol.max(1e-9))?;
            PowerLaw::fit(&eigs.eigs).map(|t| t.beta)
        }
        CharFnRef::Other(_) => None,
    };
    match beta {
        Some(b) if b > 0.0 => Ok(snap_order(1.0 / b)),
        _ => Err(ZetaError::BadQuery("order of F unknown; set it in the query".into())),
    }
}

/// Basis of the large-`t` model of `ln F(t e^{i psi})`: powers `t^rho`,
/// `t^k` (`k` up to the genus), `ln t`, `1` and decaying powers.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Term {
    Pow(f64),
    PowLog(f64),
}

fn model_terms(rho: f64) -> Vec<Term> {
    let mut t = vec![Term::Pow(rho)];
    if (rho - rho.round()).abs() < 1e-12 {
        t.push(Term::PowLog(rho));
    }
    let genus = rho.floor() as i32;
    for k in (1..=genus).rev() {
        if (k as f64 - rho).abs() > 1e-12 {
            t.push(Term::Pow(k as f64));
        }
    }
    t.push(Term::PowLog(0.0));
    t.push(Term::Pow(0.0));
    t.push(Term::Pow(-rho));
    t.push(Term::Pow(-2.0 * rho));
    t
}

impl Term {
    fn at(&self, t: f64) -> f64 {
        match *self {
            Term::Pow(e) => t.powf(e),
            Term::PowLog(e) => t.powf(e) * t.ln(),
        }
    }

    /// `s int_T^inf t^(-s-1) basis(t) dt`.
    fn tail(&self, s: C64, big: f64) -> C64 {
        let tb = C64::new(big, 0.0);
        match *self {
            Term::Pow(e) => s * tb.powc(e - s) / (s - e),
            Term::PowLog(e) => {
                let a = s - e;
                s * tb.powc(-a) * (big.ln() / a + 1.0 / (a * a))
            }
        }
    }
}

/// Least-squares fit of `values` at real `ts` on the model basis; returns the
/// tail integral beyond `big`.
fn fitted_tail(terms: &[Term], ts: &[f64], values: &[C64], s: C64, big: f64) -> C64 {
    let m = terms.len();
    let a = DMatrix::from_fn(ts.len(), m, |i, k| C64::new(terms[k].at(ts[i]) / terms[k].at(big), 0.0));
    let b = DVector::from_iterator(values.len(), values.iter().copied());
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("svd with vectors");
    (0..m).map(|k| sol[k] / terms[k].at(big) * terms[k].tail(s, big)).sum()
}

struct RayNodes {
    t: Vec<f64>,
    w: Vec<f64>,
    panel: Vec<usize>,
}

fn ray_nodes(r: f64, big: f64, n: usize) -> RayNodes {
    let (x, w) = gauss_legendre(n);
    let mut out = RayNodes { t: Vec::new(), w: Vec::new(), panel: Vec::new() };
    let mut a = r;
    let mut k = 0;
    while a < big * (1.0 - 1e-12) {
        let b = (2.0 * a).min(big);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (xi, wi) in x.iter().zip(&w) {
            out.t.push(c + h * xi);
            out.w.push(h * wi);
            out.panel.push(k);
        }
        a = b;
        k += 1;
    }
    out
}

const RAY_ORDERS: [usize; 2] = [10, 16];
const CIRCLE_PANELS: usize = 16;
const CIRCLE_ORDER: usize = 16;

/// `zeta(s)` from the contour representation: ray term
/// `e^{is(pi - psi)} (sin(pi s)/pi) int_R^inf t^(-s) d/dt[ln F(t e^{i psi}) - m0 ln t] dt`
/// minus `(1/2 pi i)` times the circle integral of `z^(-s) (F'/F - m0/z)`.
/// Both integrals are taken by parts, so only `ln F` is evaluated.
pub fn zeta_contour(f: CharFnRef, q: &ZetaQuery) -> Result<ContourResult, ZetaError> {
    q.check()?;
    let s = q.s;
    let rho = match q.order {
        Some(r) => r,
        None => model_order(f)?,
    };
    if s.re <= rho {
        return Err(ZetaError::Refused { re: s.re, kappa: rho });
    }
    let big = q.t_max.unwrap_or(match f {
        CharFnRef::Hadamard(_) => 1000.0,
        _ => 30.0,
    });
    if big <= 4.0 * q.r {
        return Err(ZetaError::BadQuery(format!("t_max = {big} must exceed 4R")));
    }
    let m0 = q.m0 as f64;
    let dir = C64::from_polar(1.0, q.psi);
    let h_of = |t: f64, lnf: C64| lnf - m0 * (C64::new(t.ln(), q.psi));

    // Circle, counterclockwise from arg = psi - 2 pi, by parts.
    let (gx, gw) = gauss_legendre(CIRCLE_ORDER);
    let th0 = q.psi - 2.0 * PI;
    let dth = 2.0 * PI / CIRCLE_PANELS as f64;
    let mut thetas = vec![th0];
    let mut weights = vec![0.0];
    for k in 0..CIRCLE_PANELS {
        let c = th0 + (k as f64 + 0.5) * dth;
        for (x, w) in gx.iter().zip(&gw) {
            thetas.push(c + 0.5 * dth * x);
            weights.push(0.5 * dth * w);
        }
    }
    thetas.push(q.psi);
    weights.push(0.0);
    let zc: Vec<C64> = thetas.iter().map(|th| C64::from_polar(q.r, *th)).collect();
    let (mut lnc, mut worst) = f.ln_many(&zc)?;
    for i in 1..lnc.len() {
        lnc[i] = nearest(lnc[i - 1], lnc[i]);
    }
    let hc: Vec<C64> = lnc.iter().zip(&thetas).map(|(l, th)| l - m0 * C64::new(q.r.ln(), *th)).collect();
    let wind = (hc[hc.len() - 1].im - hc[0].im) / (2.0 * PI);
    if wind.abs() > 0.25 {
        return Err(ZetaError::BadQuery(format!(
            "ln F winds {wind:.2} times around |z| = {}; R must lie below the smallest eigenvalue modulus and m0 must match",
            q.r
        )));
    }
    let rs = C64::new(q.r, 0.0).powc(-s);
    let zs = |th: f64| rs * (C64::new(0.0, -th) * s).exp();
    let mut circ = zs(q.psi) * hc[hc.len() - 1] - zs(th0) * hc[0];
    let mut acc = C64::new(0.0, 0.0);
    for i in 1..thetas.len() - 1 {
        acc += weights[i] * zs(thetas[i]) * hc[i];
    }
    circ += s * C64::i() * acc;
    let circle_part = -circ / (2.0 * PI * C64::i());

    // Ray, by parts: -R^(-s) H(R) + s int_R^T t^(-s-1) H dt + model tail.
    let h_r0 = h_of(q.r, f.ln(dir * q.r)?.0);
    let mut h_r = h_r0;
    let terms = model_terms(rho);
    let mut ray = Vec::new();
    for &n in &RAY_ORDERS {
        let nodes = ray_nodes(q.r, big, n);
        let zr: Vec<C64> = nodes.t.iter().map(|t| dir * *t).collect();
        let (lnr, w) = f.ln_many(&zr)?;
        worst = worst.max(w);
        let hr: Vec<C64> = nodes.t.iter().zip(&lnr).map(|(t, l)| h_of(*t, *l)).collect();
        h_r = nearest(hr[0], h_r0);
        let mut integral = C64::new(0.0, 0.0);
        for i in 0..hr.len() {
            integral += nodes.w[i] * C64::new(nodes.t[i], 0.0).powc(-s - 1.0) * hr[i];
        }
        let last = *nodes.panel.last().unwrap();
        let pick = |from: usize| -> (Vec<f64>, Vec<C64>) {
            let idx: Vec<usize> = (0..hr.len()).filter(|i| nodes.panel[*i] + from > last).collect();
            (idx.iter().map(|i| nodes.t[*i]).collect(), idx.iter().map(|i| hr[*i]).collect())
        };
        let (t2, v2) = pick(2);
        let (t1, v1) = pick(1);
        let tail2 = fitted_tail(&terms, &t2, &v2, s, big);
        let tail1 = if t1.len() > terms.len() { fitted_tail(&terms, &t1, &v1, s, big) } else { tail2 };
        ray.push((s * integral, tail2, (tail2 - tail1).norm()));
    }
    let (int_hi, tail, tail_error) = ray[1];
    let ray_error = (ray[1].0 - ray[0].0).norm();
    let pre = (C64::i() * s * (PI - q.psi)).exp() * (PI * s).sin() / PI;
    let ray_part = pre * (-rs * h_r + int_hi + tail);
    let value = ray_part + circle_part;
    let result = ContourResult {
        s,
        value,
        ray_part,
        circle_part,
        tail_part: pre * tail,
        psi: q.psi,
        r: q.r,
        tol: q.tol,
        t_max: big,
        order: rho,
        ray_error,
        tail_error,
        eval_change: worst,
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(ZetaError::NotConverged(format!("non-finite value {value}")));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping() {
        assert_eq!(snap_order(1.4999), 1.5);
        assert_eq!(snap_order(0.5003), 0.5);
        assert_eq!(snap_order(1.0), 1.0);
        assert_eq!(snap_order(0.7049), 0.7);
    }

    #[test]
    fn integer_s_refused() {
        let h = HadamardProduct::new((1..200).map(|n| (n * n) as f64).collect(), 0, 0).unwrap();
        let q = ZetaQuery::new(C64::new(2.0, 0.0));
        assert!(matches!(zeta_contour((&h).into(), &q), Err(ZetaError::IntegerS(_))));
    }
}
