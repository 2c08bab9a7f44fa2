//! Dormand-Prince 5(4) integrator with PI step control.
//!
//! Systems supply their own error norm so that each caller can measure the
//! local error in the metric it cares about (Prufer energy for solution
//! pairs, plain relative error for accumulators).

use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("coefficient evaluation failed at x = {x}: {err}")]
    Coefficient { x: f64, err: ExprError },
    #[error("step budget exhausted at x = {x}")]
    MaxSteps { x: f64 },
    #[error("non-finite state at x = {x}")]
    NonFinite { x: f64 },
}

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, x: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OdeError>;
    /// Error estimate scaled so that 1.0 is exactly at tolerance.
    fn error_norm(&self, x: f64, y_old: &[f64], y_new: &[f64], err: &[f64], tol: f64) -> f64;
}

/// Outcome of an accepted step handed to the observer.
pub struct StepInfo {
    pub x: f64,
    pub at_stop: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub const MAX_STEPS: usize = 2_000_000;

/// Integrate `y` from `x0` to `x1` (either direction). Every point of `stops`
/// lying strictly between the two is hit exactly. `observe` runs after each
/// accepted step and may rescale the state in place.
pub fn integrate<S, F>(
    sys: &S,
    x0: f64,
    x1: f64,
    y: &mut [f64],
    stops: &[f64],
    tol: f64,
    h_max: f64,
    mut observe: F,
) -> Result<OdeStats, OdeError>
where
    S: OdeSystem,
    F: FnMut(&StepInfo, &mut [f64]) -> Result<(), OdeError>,
{
    let n = sys.dim();
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let mut targets: Vec<f64> = stops
        .iter()
        .copied()
        .filter(|&s| (s - x0) * dir > 0.0 && (x1 - s) * dir > 0.0)
        .collect();
    targets.sort_by(|a, b| (a * dir).partial_cmp(&(b * dir)).unwrap());
    targets.dedup();
    targets.push(x1);
    let mut stats = OdeStats { accepted: 0, rejected: 0 };
    if x0 == x1 {
        return Ok(stats);
    }

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut x = x0;
    sys.rhs(x, y, &mut k[0])?;
    let span = (x1 - x0).abs();
    let h_cap = h_max.min(span);
    let mut h = initial_step(sys, x, y, &k[0], dir, tol, h_cap)?;
    let mut err_prev: f64 = 1e-4;
    let mut ti = 0;

    while ti < targets.len() {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(OdeError::MaxSteps { x });
        }
        let target = targets[ti];
        let remaining = (target - x).abs();
        let mut step = h.min(h_cap);
        let mut hit = false;
        if step >= remaining * (1.0 - 1e-12) {
            step = remaining;
            hit = true;
        } else if step > 0.5 * remaining && step < remaining {
            step = 0.5 * remaining;
        }
        let hs = step * dir;
        if step <= 1e-15 * x.abs().max(1e-300) || step < 1e-300 {
            return Err(OdeError::StepUnderflow { x });
        }

        let (k0, rest) = k.split_at_mut(1);
        let k0 = &k0[0];
        for i in 0..n {
            tmp[i] = y[i] + hs * A21 * k0[i];
        }
        sys.rhs(x + C2 * hs, &tmp, &mut rest[0])?;
        for i in 0..n {
            tmp[i] = y[i] + hs * (A31 * k0[i] + A32 * rest[0][i]);
        }
        sys.rhs(x + C3 * hs, &tmp, &mut rest[1])?;
        for i in 0..n {
            tmp[i] = y[i] + hs * (A41 * k0[i] + A42 * rest[0][i] + A43 * rest[1][i]);
        }
        sys.rhs(x + C4 * hs, &tmp, &mut rest[2])?;
        for i in 0..n {
            tmp[i] = y[i] + hs * (A51 * k0[i] + A52 * rest[0][i] + A53 * rest[1][i] + A54 * rest[2][i]);
        }
        sys.rhs(x + C5 * hs, &tmp, &mut rest[3])?;
        for i in 0..n {
            tmp[i] = y[i]
                + hs * (A61 * k0[i] + A62 * rest[0][i] + A63 * rest[1][i] + A64 * rest[2][i] + A65 * rest[3][i]);
        }
        let xn = if hit { target } else { x + hs };
        sys.rhs(xn, &tmp, &mut rest[4])?;
        for i in 0..n {
            ynew[i] = y[i]
                + hs * (B1 * k0[i] + B3 * rest[1][i] + B4 * rest[2][i] + B5 * rest[3][i] + B6 * rest[4][i]);
        }
        sys.rhs(xn, &ynew, &mut rest[5])?;
        for i in 0..n {
            err[i] = hs
                * (E1 * k0[i] + E3 * rest[1][i] + E4 * rest[2][i] + E5 * rest[3][i] + E6 * rest[4][i]
                    + E7 * rest[5][i]);
        }
        let e = sys.error_norm(xn, y, &ynew, &err, tol);
        if !e.is_finite() {
            if ynew.iter().any(|v| !v.is_finite()) && step < 1e-12 * span {
                return Err(OdeError::NonFinite { x });
            }
            h = step * 0.1;
            stats.rejected += 1;
            continue;
        }
        if e <= 1.0 {
            stats.accepted += 1;
            x = xn;
            y.copy_from_slice(&ynew);
            let info = StepInfo { x, at_stop: hit && ti + 1 < targets.len() };
            let before = y.to_vec();
            observe(&info, y)?;
            if y != before.as_slice() {
                sys.rhs(x, y, &mut k[0])?;
            } else {
                let last = k[6].clone();
                k[0].copy_from_slice(&last);
            }
            let e = e.max(1e-10);
            let fac = 0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h = step * fac.clamp(0.2, 5.0);
            err_prev = e;
            if hit {
                ti += 1;
            }
        } else {
            stats.rejected += 1;
            let fac = (0.9 * e.powf(-1.0 / 5.0)).clamp(0.1, 0.9);
            h = step * fac;
        }
    }
    Ok(stats)
}

fn initial_step<S: OdeSystem>(
    sys: &S,
    x: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    tol: f64,
    h_cap: f64,
) -> Result<f64, OdeError> {
    let n = sys.dim();
    let zero = vec![0.0; n];
    // Norms measured with the system's own error metric: treat y and f as "errors".
    let d0 = sys.error_norm(x, y, y, y, tol) * tol;
    let d1 = sys.error_norm(x, y, y, f0, tol) * tol;
    let h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 * h_cap.max(1e-300) } else { 0.01 * d0 / d1 };
    let h0 = h0.min(h_cap);
    let mut y1 = vec![0.0; n];
    for i in 0..n {
        y1[i] = y[i] + dir * h0 * f0[i];
    }
    let mut f1 = vec![0.0; n];
    sys.rhs(x + dir * h0, &y1, &mut f1)?;
    for i in 0..n {
        f1[i] -= f0[i];
    }
    let d2 = sys.error_norm(x, y, y, &f1, tol) * tol / h0;
    let _ = zero;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * h0)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(h_cap).max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Expo;
    impl OdeSystem for Expo {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OdeError> {
            dy[0] = y[0];
            Ok(())
        }
        fn error_norm(&self, _x: f64, a: &[f64], b: &[f64], e: &[f64], tol: f64) -> f64 {
            e[0].abs() / (tol * a[0].abs().max(b[0].abs()).max(1e-300))
        }
    }

    #[test]
    fn exponential_and_stops() {
        let mut y = [1.0];
        let mut seen = Vec::new();
        integrate(&Expo, 0.0, 2.0, &mut y, &[0.5, 1.0], 1e-12, f64::INFINITY, |s, y| {
            if s.at_stop {
                seen.push((s.x, y[0]));
            }
            Ok(())
        })
        .unwrap();
        assert!((y[0] - 2f64.exp()).abs() < 1e-10 * 2f64.exp());
        assert_eq!(seen.len(), 2);
        assert_eq!(seen[0].0, 0.5);
        assert!((seen[1].1 - 1f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn backward() {
        let mut y = [1.0];
        integrate(&Expo, 1.0, -1.0, &mut y, &[], 1e-11, f64::INFINITY, |_, _| Ok(())).unwrap();
        assert!((y[0] - (-2f64).exp()).abs() < 1e-10);
    }
}
