//! Eigenvalues of truncated regular problems by Prufer shooting.
//!
//! The scaled Prufer angle `tan(theta) = S y / y1` is integrated with a
//! piecewise-constant scale `S`, remapped at every accepted step. Indexing is
//! by oscillation count: the k-th eigenvalue solves
//! `theta(d) = theta_R + (k - 1) pi`.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::ode::{integrate, OdeError, OdeSystem};
use crate::problems::{BoundaryCondition, Problem};
use crate::propagate::prufer_weight;
use crate::quad;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("truncation [{0}, {1}] is not a compact subinterval")]
    BadTruncation(f64, f64),
    #[error("no bracket for eigenvalue {k} in [{lo}, {hi}]")]
    Bracket { k: usize, lo: f64, hi: f64 },
    #[error("eigenvalue {k} has {zeros} interior zeros")]
    Oscillation { k: usize, zeros: usize },
    #[error("friedrichs condition needs a limit-circle endpoint with principal data")]
    NoPrincipal,
    #[error("friedrichs extrapolation did not settle for eigenvalue {k}")]
    Extrapolation { k: usize },
    #[error("n_max must be at least 1")]
    Empty,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenList {
    pub c: f64,
    pub d: f64,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
    pub eigs: Vec<f64>,
    pub n_zeros: Vec<usize>,
    pub residuals: Vec<f64>,
    pub index_base: usize,
    pub tol: f64,
    pub weyl_length: f64,
}

impl EigenList {
    pub fn len(&self) -> usize {
        self.eigs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigs.is_empty()
    }

    /// A list from known values (used for closed-form spectra).
    pub fn from_values(eigs: Vec<f64>, weyl_length: f64) -> EigenList {
        let n = eigs.len();
        EigenList {
            c: 0.0,
            d: 0.0,
            bc_left: BoundaryCondition::Dirichlet,
            bc_right: BoundaryCondition::Dirichlet,
            n_zeros: (0..n).collect(),
            residuals: vec![0.0; n],
            eigs,
            index_base: 1,
            tol: 0.0,
            weyl_length,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,lambda,n_zeros,residual\n");
        for (i, l) in self.eigs.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                i + self.index_base,
                crate::fmt17(*l),
                self.n_zeros[i],
                crate::fmt17(self.residuals[i])
            ));
        }
        s
    }
}

struct PruferSystem<'a> {
    prob: &'a Problem,
    lambda: f64,
    s: Cell<f64>,
}

impl OdeSystem for PruferSystem<'_> {
    fn dim(&self) -> usize {
        2
    }

    #[inline]
    fn rhs(&self, x: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OdeError> {
        let c = self.prob.coeffs(x).map_err(|err| OdeError::Coefficient { x, err })?;
        let s = self.s.get();
        let (sn, cs) = y[0].sin_cos();
        let w = self.lambda * c.r - c.q;
        dy[0] = s / c.p * cs * cs + w / s * sn * sn;
        // K = (int r y^2) / rho_S^2
        let dlnrho = sn * cs * (s / c.p - w / s);
        dy[1] = c.r * sn * sn / s - 2.0 * dlnrho * y[1];
        Ok(())
    }

    fn error_norm(&self, _x: f64, a: &[f64], b: &[f64], e: &[f64], tol: f64) -> f64 {
        let k = a[1].abs().max(b[1].abs()) + 1e-8;
        (e[0].abs() / tol).max(e[1].abs() / (1e-4 * k))
    }
}

/// Move an angle between Prufer scales, keeping its multiple of pi.
#[inline]
fn remap(theta: f64, from: f64, to: f64) -> f64 {
    if from == to {
        return theta;
    }
    let k = (theta / PI).round();
    let t = theta - k * PI;
    if t.abs() >= PI / 2.0 - 1e-15 {
        return theta;
    }
    k * PI + ((to / from) * t.tan()).atan()
}

#[derive(Debug, Clone, Copy)]
pub struct PruferEnd {
    /// Unscaled angle at the right end.
    pub theta: f64,
    /// d(theta)/d(lambda) for lambda-independent launch data.
    pub dtheta: f64,
    /// Angle and derivative in the local scale at the end point.
    pub theta_scaled: f64,
    pub dtheta_scaled: f64,
}

fn weight(prob: &Problem, x: f64, lambda: f64) -> Result<f64, EigenError> {
    let c = prob.coeffs(x).map_err(|err| OdeError::Coefficient { x, err })?;
    Ok(prufer_weight(c.p, c.q, c.r, lambda))
}

fn check_truncation(prob: &Problem, c: f64, d: f64) -> Result<(), EigenError> {
    if c < d && prob.admits(c) && prob.admits(d) {
        Ok(())
    } else {
        Err(EigenError::BadTruncation(c, d))
    }
}

/// Shoot the Prufer angle from `(c, y0, y1_0)` to `d`.
pub fn prufer_shoot(prob: &Problem, lambda: f64, c: f64, d: f64, y0: f64, y1_0: f64, tol: f64) -> Result<PruferEnd, EigenError> {
    check_truncation(prob, c, d)?;
    let mut th = y0.atan2(y1_0);
    if th < 0.0 {
        th += PI;
    }
    if th >= PI {
        th -= PI;
    }
    shoot_angle(prob, lambda, c, d, th, tol)
}

/// Carry an unscaled angle from `x0` to `x1` (either direction).
fn shoot_angle(prob: &Problem, lambda: f64, x0: f64, x1: f64, theta0: f64, tol: f64) -> Result<PruferEnd, EigenError> {
    let s0 = weight(prob, x0, lambda)?;
    let sys = PruferSystem { prob, lambda, s: Cell::new(s0) };
    let mut y = [remap(theta0, 1.0, s0), 0.0];
    let mut fail = None;
    integrate(&sys, x0, x1, &mut y, &[], tol, (x1 - x0).abs() / 4.0, |info, y| {
        match weight(prob, info.x, lambda) {
            Ok(s_new) => {
                let s_old = sys.s.get();
                let (sn, cs) = y[0].sin_cos();
                let f = s_new * sn * sn / s_old + s_old * cs * cs / s_new;
                y[0] = remap(y[0], s_old, s_new);
                y[1] /= f;
                sys.s.set(s_new);
            }
            Err(e) => fail = Some(e),
        }
        Ok(())
    })?;
    if let Some(e) = fail {
        return Err(e);
    }
    let s = sys.s.get();
    let (sn, cs) = y[0].sin_cos();
    let f = sn * sn / s + s * cs * cs;
    Ok(PruferEnd { theta: remap(y[0], s, 1.0), dtheta: y[1] / f, theta_scaled: y[0], dtheta_scaled: y[1] })
}

/// Launch data for the left condition at `c`, for spectral parameter `lambda`.
fn left_launch(prob: &Problem, bc: BoundaryCondition, c: f64, lambda: f64) -> Result<(f64, f64), EigenError> {
    match bc.launch() {
        Some(v) => Ok(v),
        None => principal_data(prob, 0, c, lambda),
    }
}

/// Principal solution data `(u, u1)` at a point near endpoint `side`
/// (0 = left, 1 = right), corrected to first order in `lambda`.
pub fn principal_data(prob: &Problem, side: usize, x: f64, lambda: f64) -> Result<(f64, f64), EigenError> {
    let hint = prob.endpoints[side].principal.as_ref().ok_or(EigenError::NoPrincipal)?;
    let end = if side == 0 { prob.left_finite() } else { prob.right_finite() }.ok_or(EigenError::NoPrincipal)?;
    let ev = |e, t| prob.eval_hint(e, t).map_err(|err| EigenError::Ode(OdeError::Coefficient { x: t, err }));
    let u = ev(&hint.u, x)?;
    let mut u1 = ev(&hint.u1, x)?;
    if lambda != 0.0 {
        let (gx, gw) = quad::gauss_legendre(8);
        let (a, b) = if side == 0 { (end, x) } else { (x, end) };
        let mut acc = 0.0;
        for (t, w) in gx.iter().zip(&gw) {
            let s = 0.5 * (a + b) + 0.5 * (b - a) * t;
            let r = prob.r(s).map_err(|err| EigenError::Ode(OdeError::Coefficient { x: s, err }))?;
            acc += w * r * ev(&hint.u, s)?;
        }
        acc *= 0.5 * (b - a);
        u1 += if side == 0 { -lambda * acc } else { lambda * acc };
    }
    Ok((u, u1))
}

/// Target angle in (0, pi] for the right condition at `d`.
fn right_target(prob: &Problem, bc: BoundaryCondition, d: f64, lambda: f64) -> Result<f64, EigenError> {
    let (y, y1) = match bc {
        BoundaryCondition::FriedrichsPrincipal => principal_data(prob, 1, d, lambda)?,
        other => {
            let b = other.angle().unwrap();
            (b.sin(), -b.cos())
        }
    };
    let mut t = y.atan2(y1);
    if t <= 0.0 {
        t += PI;
    }
    Ok(t)
}

/// Terminal unscaled Prufer angle of the solution launched with `bc_left`.
pub fn prufer_angle(prob: &Problem, lambda: f64, c: f64, d: f64, bc_left: BoundaryCondition, tol: f64) -> Result<f64, EigenError> {
    let (y0, y1) = left_launch(prob, bc_left, c, lambda)?;
    Ok(prufer_shoot(prob, lambda, c, d, y0, y1, tol)?.theta)
}

/// Number of eigenvalues strictly below `lambda`.
pub fn count_eigs_below(
    prob: &Problem,
    c: f64,
    d: f64,
    bc_left: BoundaryCondition,
    bc_right: BoundaryCondition,
    lambda: f64,
    tol: f64,
) -> Result<usize, EigenError> {
    check_truncation(prob, c, d)?;
    let sh = Shooter::new(prob, c, d, bc_left, bc_right, tol);
    let (m, _, _) = sh.mismatch(1, lambda)?;
    let v = (m / PI - 1e-12).ceil();
    Ok(if v > 0.0 { v as usize } else { 0 })
}

/// `L = int_c^d sqrt(r/p)`.
pub fn weyl_length(prob: &Problem, c: f64, d: f64) -> f64 {
    quad::integrate(
        |x| match prob.coeffs(x) {
            Ok(k) if k.p > 0.0 && k.r > 0.0 => (k.r / k.p).sqrt(),
            _ => 0.0,
        },
        c,
        d,
        1e-12,
        1e-10,
    )
    .value
}

struct Shooter<'a> {
    prob: &'a Problem,
    c: f64,
    d: f64,
    bl: BoundaryCondition,
    br: BoundaryCondition,
    tol: f64,
    xm: f64,
}

impl<'a> Shooter<'a> {
    fn new(prob: &'a Problem, c: f64, d: f64, bl: BoundaryCondition, br: BoundaryCondition, tol: f64) -> Shooter<'a> {
        let mut sh = Shooter { prob, c, d, bl, br, tol, xm: 0.5 * (c + d) };
        sh.xm = sh.match_point();
        sh
    }

    /// Interior matching point: the bottom of the potential well, ties
    /// going to the point nearest the middle.
    fn match_point(&self) -> f64 {
        let mid = 0.5 * (self.c + self.d);
        let mut best = (f64::INFINITY, f64::INFINITY, mid);
        for i in 1..64 {
            let x = self.c + (self.d - self.c) * i as f64 / 64.0;
            if let Ok(k) = self.prob.coeffs(x) {
                if k.r > 0.0 {
                    let v = k.q / k.r;
                    let tie = (v - best.0).abs() <= 1e-12 * (1.0 + v.abs());
                    if (!tie && v < best.0) || (tie && (x - mid).abs() < best.1) {
                        best = (v, (x - mid).abs(), x);
                    }
                }
            }
        }
        best.2
    }

    /// Mismatch for index k, its lambda-derivative, and the total angle.
    fn mismatch(&self, k: usize, lambda: f64) -> Result<(f64, f64, f64), EigenError> {
        let tol = self.ode_tol();
        let (y0, y1) = left_launch(self.prob, self.bl, self.c, lambda)?;
        let mut t0 = y0.atan2(y1);
        if t0 < 0.0 {
            t0 += PI;
        }
        if t0 >= PI {
            t0 -= PI;
        }
        let tr = right_target(self.prob, self.br, self.d, lambda)?;
        let l = shoot_angle(self.prob, lambda, self.c, self.xm, t0, tol)?;
        let r = shoot_angle(self.prob, lambda, self.d, self.xm, tr, tol)?;
        // Both ends carry the same scale at xm, so the scaled angles compare
        // directly and keep their resolution where S is far from 1.
        let m = l.theta_scaled - r.theta_scaled - (k as f64 - 1.0) * PI;
        Ok((m, l.dtheta_scaled - r.dtheta_scaled, m + (k as f64 - 1.0) * PI + tr))
    }

    fn ode_tol(&self) -> f64 {
        (self.tol * 0.1).max(1e-14)
    }

    /// Lowest value of `q/r` on a sample of the truncation.
    fn potential_floor(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..=64 {
            let x = self.c + (self.d - self.c) * i as f64 / 64.0;
            let x = x.clamp(self.c, self.d);
            if let Ok(k) = self.prob.coeffs(x) {
                if k.r > 0.0 {
                    m = m.min(k.q / k.r);
                }
            }
        }
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Root of the k-th mismatch. `lo` is a known point below the root,
    /// `guess` a first estimate and `step` the expected eigenvalue spacing.
    fn solve(&self, k: usize, lo: Option<f64>, guess: f64, step: f64) -> Result<(f64, f64, f64), EigenError> {
        // (lambda, mismatch, derivative, total angle)
        let eval = |l: f64| self.mismatch(k, l).map(|(m, dm, th)| (l, m, dm, th));
        let mut lo = lo.map(|l| (l, -PI, 0.0, f64::NAN));
        let mut hi: Option<(f64, f64, f64, f64)> = None;
        let mut cur = eval(guess)?;
        let mut step = step.max(1e-8);
        let mut guard = 0;
        let mut mult = 1.25;
        loop {
            if cur.1 == 0.0 {
                return Ok((cur.0, 0.0, cur.3));
            }
            if cur.1 < 0.0 {
                lo = Some(cur);
            } else {
                hi = Some(cur);
            }
            if let (Some(_), Some(_)) = (lo, hi) {
                break;
            }
            guard += 1;
            if guard > 200 {
                return Err(EigenError::Bracket { k, lo: lo.map_or(f64::NAN, |t| t.0), hi: hi.map_or(f64::NAN, |t| t.0) });
            }
            let newton = if cur.2 > 0.0 && cur.2.is_finite() { -cur.1 / cur.2 } else { f64::NAN };
            let dx = if newton.is_finite() { mult * newton.clamp(-4.0 * step, 4.0 * step) } else { cur.1.signum() * -step };
            mult *= 2.0;
            let mut next = cur.0 + dx;
            if let Some(l) = lo {
                if next <= l.0 {
                    next = 0.5 * (l.0 + cur.0);
                }
            }
            cur = eval(next)?;
            step *= 2.0;
        }
        let (mut lo, mut hi) = (lo.unwrap(), hi.unwrap());
        // Safeguarded Newton inside [lo, hi].
        if lo.3.is_nan() || lo.1.abs() >= hi.1.abs() {
            cur = hi;
        } else {
            cur = lo;
        }
        let mut best = cur.1.abs();
        for _ in 0..200 {
            let width = hi.0 - lo.0;
            let (x, m, dm, _) = cur;
            let newton = if dm > 0.0 && dm.is_finite() { x - m / dm } else { f64::NAN };
            let scale = self.tol * (1.0 + x.abs());
            if newton.is_finite() && (newton - x).abs() <= 0.1 * scale && newton >= lo.0 && newton <= hi.0 {
                return Ok((newton, best, cur.3 - m));
            }
            let next = if newton.is_finite() && newton > lo.0 && newton < hi.0 {
                newton
            } else {
                // regula falsi step, falling back to bisection
                let rf = lo.0 - lo.1 * width / (hi.1 - lo.1);
                if rf.is_finite() && rf > lo.0 + 0.05 * width && rf < hi.0 - 0.05 * width {
                    rf
                } else {
                    0.5 * (lo.0 + hi.0)
                }
            };
            let dx = (next - x).abs();
            cur = eval(next)?;
            best = best.min(cur.1.abs());
            if cur.1 > 0.0 {
                hi = cur;
            } else {
                lo = cur;
            }
            if cur.1 == 0.0 || dx <= scale || hi.0 - lo.0 <= scale {
                break;
            }
        }
        Ok((cur.0, best, cur.3 - cur.1))
    }

    fn run(&self, n_max: usize) -> Result<EigenList, EigenError> {
        if n_max == 0 {
            return Err(EigenError::Empty);
        }
        let floor = self.potential_floor();
        let mut eigs: Vec<f64> = Vec::with_capacity(n_max);
        let mut zeros = Vec::with_capacity(n_max);
        let mut res = Vec::with_capacity(n_max);
        let l = weyl_length(self.prob, self.c, self.d);
        for k in 1..=n_max {
            let base = (PI / l).powi(2).max(1e-6);
            let (lo, guess, step) = match eigs.len() {
                0 => (None, floor + base, base),
                1 => (Some(eigs[0]), eigs[0] + 3.0 * (eigs[0] - floor).abs().max(base), (eigs[0] - floor).abs().max(base)),
                n => {
                    let gap = (eigs[n - 1] - eigs[n - 2]).max(1e-8);
                    let grow = if n >= 3 { gap * gap / (eigs[n - 2] - eigs[n - 3]).max(1e-8) } else { gap };
                    (Some(eigs[n - 1]), eigs[n - 1] + grow.clamp(0.5 * gap, 2.0 * gap), gap)
                }
            };
            let (lam, m, th) = self.solve(k, lo, guess, step)?;
            let nz = ((th - 1e-6) / PI).floor().max(0.0) as usize;
            if nz != k - 1 {
                return Err(EigenError::Oscillation { k, zeros: nz });
            }
            eigs.push(lam);
            zeros.push(nz);
            res.push(m.abs());
        }
        Ok(EigenList {
            c: self.c,
            d: self.d,
            bc_left: self.bl,
            bc_right: self.br,
            eigs,
            n_zeros: zeros,
            residuals: res,
            index_base: 1,
            tol: self.tol,
            weyl_length: l,
        })
    }
}

/// First `n_max` Dirichlet eigenvalues of the truncation to `(c, d)`.
pub fn dirichlet_eigs(prob: &Problem, c: f64, d: f64, n_max: usize, tol: f64) -> Result<EigenList, EigenError> {
    bc_eigs(prob, c, d, BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet, n_max, tol)
}

/// First `n_max` eigenvalues with separated conditions. A Friedrichs
/// condition is imposed by launching principal data at the offset end and
/// extrapolating over offsets `e, e/2, e/4` measured from the true endpoint.
pub fn bc_eigs(
    prob: &Problem,
    c: f64,
    d: f64,
    bc_left: BoundaryCondition,
    bc_right: BoundaryCondition,
    n_max: usize,
    tol: f64,
) -> Result<EigenList, EigenError> {
    let fl = bc_left == BoundaryCondition::FriedrichsPrincipal;
    let fr = bc_right == BoundaryCondition::FriedrichsPrincipal;
    check_truncation(prob, c, d)?;
    let base = Shooter::new(prob, c, d, bc_left, bc_right, tol);
    if !fl && !fr {
        return base.run(n_max);
    }
    let a = if fl { prob.left_finite().ok_or(EigenError::NoPrincipal)? } else { c };
    let b = if fr { prob.right_finite().ok_or(EigenError::NoPrincipal)? } else { d };
    let lists: Vec<EigenList> = (0..3)
        .map(|i| {
            let f = 0.5f64.powi(i);
            let cc = if fl { a + (c - a) * f } else { c };
            let dd = if fr { b - (b - d) * f } else { d };
            Shooter::new(prob, cc, dd, bc_left, bc_right, tol).run(n_max)
        })
        .collect::<Result<_, _>>()?;
    let mut out = lists[2].clone();
    out.c = c;
    out.d = d;
    for k in 0..n_max {
        let (l0, l1, l2) = (lists[0].eigs[k], lists[1].eigs[k], lists[2].eigs[k]);
        out.eigs[k] = richardson3(l0, l1, l2);
    }
    for k in 1..n_max {
        if out.eigs[k] <= out.eigs[k - 1] {
            return Err(EigenError::Extrapolation { k: k + 1 });
        }
    }
    Ok(out)
}

/// One extrapolation step over a geometric sequence of offsets: Aitken when
/// the differences contract geometrically, plain last value otherwise.
pub fn richardson3(l0: f64, l1: f64, l2: f64) -> f64 {
    let (d1, d2) = (l1 - l0, l2 - l1);
    if d1 != 0.0 && d1 * d2 > 0.0 && d2.abs() < d1.abs() {
        let rho = d2 / d1;
        l2 + d2 * rho / (1.0 - rho)
    } else {
        l2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{free, harmonic_full, harmonic_half, laguerre};

    #[test]
    fn prufer_examples() {
        let f = free();
        let c = 1e-12;
        for (lam, want) in [(1.0, PI), (4.0, 2.0 * PI), (2.25, 1.5 * PI)] {
            let th = prufer_angle(&f, lam, c, PI - 1e-12, BoundaryCondition::Dirichlet, 1e-12).unwrap();
            assert!((th - want).abs() < 1e-8, "{lam}: {th}");
        }
    }

    #[test]
    fn counting() {
        let f = free();
        let (c, d) = (1e-12, PI - 1e-12);
        let dd = BoundaryCondition::Dirichlet;
        assert_eq!(count_eigs_below(&f, c, d, dd, dd, 10.0, 1e-12).unwrap(), 3);
        assert_eq!(count_eigs_below(&f, 0.0 + 1e-300, PI, dd, dd, 0.5, 1e-12).unwrap_or(0), 0);
        let h = harmonic_full();
        assert_eq!(count_eigs_below(&h, -6.0, 6.0, dd, dd, 10.0, 1e-12).unwrap(), 5);
    }

    #[test]
    fn free_spectra() {
        let f = free();
        let (c, d) = (1e-14, PI - 1e-14);
        let e = dirichlet_eigs(&f, c, d, 3, 1e-12).unwrap();
        for (k, l) in e.eigs.iter().enumerate() {
            assert!((l - ((k + 1) * (k + 1)) as f64).abs() < 1e-8, "{l}");
        }
        let n = BoundaryCondition::Neumann;
        let e = bc_eigs(&f, c, d, n, n, 3, 1e-12).unwrap();
        for (l, want) in e.eigs.iter().zip([0.0, 1.0, 4.0]) {
            assert!((l - want).abs() < 1e-8, "{l}");
        }
    }

    #[test]
    fn harmonic_spectra() {
        let e = dirichlet_eigs(&harmonic_full(), -6.0, 6.0, 4, 1e-12).unwrap();
        for (k, l) in e.eigs.iter().enumerate() {
            assert!((l - (2 * k + 1) as f64).abs() < 1e-6, "{l}");
        }
        let h = harmonic_half();
        let d = BoundaryCondition::Dirichlet;
        let e = bc_eigs(&h, 1e-14, 8.0, d, d, 3, 1e-12).unwrap();
        for (l, want) in e.eigs.iter().zip([3.0, 7.0, 11.0]) {
            assert!((l - want).abs() < 1e-6, "{l}");
        }
        let e = bc_eigs(&h, 1e-14, 8.0, BoundaryCondition::Neumann, d, 3, 1e-12).unwrap();
        for (l, want) in e.eigs.iter().zip([1.0, 5.0, 9.0]) {
            assert!((l - want).abs() < 1e-6, "{l}");
        }
    }

    #[test]
    fn laguerre_friedrichs() {
        let l = laguerre(1.0).unwrap();
        let e = bc_eigs(&l, 1e-6, 40.0, BoundaryCondition::FriedrichsPrincipal, BoundaryCondition::Dirichlet, 3, 1e-12)
            .unwrap();
        for (l, want) in e.eigs.iter().zip([0.0, 1.0, 2.0]) {
            assert!((l - want).abs() < 1e-4, "{l}");
        }
    }
}
