//! Closed-form and independently computed reference values. Frozen values
//! come from 30-digit evaluations of the stated closed forms.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use slz_core::charfn::{elementary_factor, hadamard_char, CharFn, CharFnError, Evaluation, HadamardProduct};
use slz_core::convrate::{truncation_sweep, LimitSource};
use slz_core::eigensolve::{bc_eigs, count_eigs_below, dirichlet_eigs};
use slz_core::expr::{eval_expr, parse_expr};
use slz_core::partialzeta::{zeta_direct, zeta_recursive};
use slz_core::problems::{catalog, BoundaryCondition};
use slz_core::speczeta::{logderiv_charfn, zeta_contour, zeta_sum, CharFnRef, ZetaQuery};
use slz_core::validate::airy_f0;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn prob(name: &str) -> slz_core::problems::Problem {
    catalog(name, &BTreeMap::new()).unwrap()
}

#[test]
fn basel_direct() {
    let e = dirichlet_eigs(&prob("free"), 0.0, PI, 200, 1e-12).unwrap();
    assert!((zeta_direct(&e, 1).unwrap() - PI * PI / 6.0).abs() < 1e-8);
}

#[test]
fn free_partial_zeta_is_x2_over_6() {
    let xs = [1.0, 2.0, 3.0];
    let t = zeta_recursive(&prob("free"), 0.0, &xs, 2, 0.0, 1e-12).unwrap();
    for (k, x) in xs.iter().enumerate() {
        assert!((t.get(1, k).unwrap() - x * x / 6.0).abs() < 1e-9);
        assert!((t.get(2, k).unwrap() - x.powi(4) / 90.0).abs() < 1e-9);
    }
}

#[test]
fn half_line_harmonic_spectra() {
    let hh = prob("harmonic_half");
    let d = bc_eigs(&hh, 0.0, 8.0, BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet, 4, 1e-12).unwrap();
    let n = bc_eigs(&hh, 0.0, 8.0, BoundaryCondition::Neumann, BoundaryCondition::Dirichlet, 4, 1e-12).unwrap();
    for k in 0..4 {
        assert!((d.eigs[k] - (4 * k + 3) as f64).abs() < 1e-6);
        assert!((n.eigs[k] - (4 * k + 1) as f64).abs() < 1e-6);
    }
}

#[test]
fn eigenvalue_counting() {
    let free = prob("free");
    let dd = BoundaryCondition::Dirichlet;
    assert_eq!(count_eigs_below(&free, 0.0, PI, dd, dd, 10.0, 1e-10).unwrap(), 3);
    assert_eq!(count_eigs_below(&free, 0.0, PI, dd, dd, 0.5, 1e-10).unwrap(), 0);
}

#[test]
fn laguerre_friedrichs_spectrum() {
    let lag = catalog("laguerre", &BTreeMap::from([("gamma".to_string(), 1.0)])).unwrap();
    let f = BoundaryCondition::FriedrichsPrincipal;
    let e = bc_eigs(&lag, 1e-6, 40.0, f, BoundaryCondition::Dirichlet, 3, 1e-12).unwrap();
    for (j, l) in e.eigs.iter().enumerate() {
        assert!((l - j as f64).abs() < 1e-4, "{l}");
    }
}

#[test]
fn elementary_factor_value() {
    assert!((elementary_factor(c(0.1), 1) - c(0.9 * 0.1f64.exp())).norm() < 1e-15);
}

#[test]
fn hadamard_squares_is_sinc() {
    // prod (1 - z/n^2) = sin(pi sqrt z) / (pi sqrt z); at z = -2.5 the sinh form
    let zeros: Vec<f64> = (1..=400).map(|n| (n * n) as f64).collect();
    let v = hadamard_char(&zeros, 0, c(-2.5)).unwrap();
    assert!((v.re - 14.457643410867451).abs() < 1e-6 * 14.46, "{v}");
    let v = hadamard_char(&zeros, 0, c(2.5)).unwrap();
    assert!((v.re + 0.19481174061549261).abs() < 1e-6, "{v}");
}

#[test]
fn zeta_sum_half_line_harmonic() {
    // sum (4n+3)^-2 = psi'(3/4) / 16
    let eigs: Vec<f64> = (0..200).map(|n| (4 * n + 3) as f64).collect();
    let v = zeta_sum(&eigs, c(2.0)).unwrap();
    assert!((v.re - 0.15886747797947541).abs() < 1e-8, "{v}");
}

#[test]
fn contour_matches_riemann_zeta() {
    // squares: zeta(s) = zeta_R(2 s); zeta_R(1.6)
    let zeros: Vec<f64> = (1..=400).map(|n| (n * n) as f64).collect();
    let h = HadamardProduct::new(zeros, 0, 0).unwrap();
    let r = zeta_contour(CharFnRef::Hadamard(&h), &ZetaQuery::new(c(0.8))).unwrap();
    assert!((r.value - c(2.2857656656801296)).norm() < 1e-5, "{}", r.value);
}

struct Exp;

impl CharFn for Exp {
    fn evaluate(&self, z: C64) -> Result<Evaluation, CharFnError> {
        Ok(Evaluation { z, ln_value: z, converged: true, last_ratio_change: 0.0 })
    }
}

#[test]
fn logderiv_of_exp_is_one() {
    let d = logderiv_charfn(CharFnRef::Other(&Exp), C64::new(0.3, -0.2), 1e-2).unwrap();
    assert!((d - c(1.0)).norm() < 1e-10);
}

#[test]
fn airy_f0_closed_form() {
    // ln F0(z) = ln(Ai(-z)/Ai(0)) + z Ai'(0)/Ai(0) at z = -5
    let f = airy_f0(4, 1e-4).unwrap();
    let e = f.evaluate(c(-5.0)).unwrap();
    assert!((e.ln_value.re + 4.4495811236537285).abs() < 1e-4, "{}", e.ln_value);
}

#[test]
fn free_truncation_sweep_exact() {
    // lambda_j(x) on (0, x) is (j pi / x)^2
    let xs = [2.0, 2.5, 3.0];
    let s = truncation_sweep(&prob("free"), &[1, 2], &xs, BoundaryCondition::Dirichlet, Some(0.0), 1e-12).unwrap();
    assert_eq!(s.limit_source, LimitSource::Reference);
    for j in 1..=2 {
        for (k, x) in xs.iter().enumerate() {
            let exact = (j as f64 * PI / x).powi(2);
            assert!((s.lam[j - 1][k] - exact).abs() < 1e-8 * exact);
        }
    }
}

#[test]
fn expression_with_parameter() {
    let names = ["gamma".to_string()].into_iter().collect();
    let e = parse_expr("x^2 + gamma*exp(-x)", &names).unwrap();
    let p = BTreeMap::from([("gamma".to_string(), 2.0)]);
    assert!((eval_expr(&e, 1.5, &p).unwrap() - (2.25 + 2.0 * (-1.5f64).exp())).abs() < 1e-15);
}
