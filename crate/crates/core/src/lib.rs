//! Numerical spectral analysis for singular Sturm-Liouville operators
//! `tau f = (1/r)(-(p f')' + q f)` with Schatten-class resolvents.
//!
//! Modules, bottom up: [`expr`] and [`problems`] describe an operator,
//! [`propagate`] integrates solutions, [`eigensolve`] computes truncated
//! spectra, [`partialzeta`] the partial zeta values, [`charfn`] the
//! characteristic functions, [`speczeta`] the spectral zeta function and
//! [`convrate`] the truncation convergence laws. [`validate`] bundles the
//! acceptance checks used by the `slz validate` command.

pub mod expr;
pub mod ode;
pub mod problems;
pub mod propagate;
pub mod quad;
pub mod eigensolve;
pub mod partialzeta;
pub mod special;
pub mod charfn;
pub mod speczeta;
pub mod convrate;
pub mod validate;

/// Format with 17 significant digits (round-trip exact).
pub fn fmt17(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.16e}")
}
