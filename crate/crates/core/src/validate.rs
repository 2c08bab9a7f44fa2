//! Acceptance checks with closed-form or independently computed targets.
//! Each criterion runs a fixed configuration and reports its sub-checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::charfn::{
    charfn_f0, estimate_order, exponent_of_convergence, tuple_log_ratios, CharFn, CharFnEval, CharFnOptions,
    NonprincipalFamily, NormOptions, PrincipalFamily,
};
use crate::convrate::{decay_products, decreasing_on_top_half, fig1_statistics, propconv_residual, total_variation, truncation_sweep};
use crate::eigensolve::{bc_eigs, dirichlet_eigs};
use crate::partialzeta::{classify_lg, lg_xi, zeta_direct, zeta_recursive, Growth};
use crate::problems::{catalog, BoundaryCondition, Problem};
use crate::propagate::{propagate_through, wronskian};
use crate::speczeta::{model_order, zeta_contour, zeta_sum, CharFnRef, Memo, ZetaQuery};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub title: String,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub seconds: f64,
    pub budget: f64,
    pub passed: bool,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.ok).map(|c| c.name.as_str()).collect();
        let mut s = format!(
            "{} criterion {:2} {} ({:.1} s / {:.0} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.budget
        );
        if let Some(e) = &self.error {
            s.push_str(&format!(": error: {e}"));
        } else if !failed.is_empty() {
            s.push_str(&format!(": failed {}", failed.join(", ")));
        } else if self.seconds > self.budget {
            s.push_str(": over time budget");
        }
        s
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn below(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.0.push(Check { name: name.into(), value, limit: format!("< {limit:e}"), ok: value < limit });
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.0.push(Check { name: name.into(), value: ok as u8 as f64, limit: "true".into(), ok });
    }

    fn within(&mut self, name: impl Into<String>, value: f64, target: f64, tol: f64) {
        self.0.push(Check {
            name: name.into(),
            value,
            limit: format!("{target} +- {tol}"),
            ok: (value - target).abs() <= tol,
        });
    }
}

type Outcome = Result<Checks, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn prob(name: &str, params: &[(&str, f64)]) -> Result<Problem, String> {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    catalog(name, &p).map_err(err)
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn strictly_monotone(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0]) || v.windows(2).all(|w| w[1] < w[0])
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

pub const TITLES: [&str; 11] = [
    "Basel oracle",
    "harmonic spectra",
    "Laguerre spectrum and f_j, g_j statistics",
    "partial zeta asymptotics",
    "Liouville-Green agreement",
    "characteristic function zeros and gauge",
    "normalization tuple tests",
    "order and exponent estimators",
    "spectral zeta cross-validation",
    "rate residual and decay products",
    "numerical hygiene",
];

pub const BUDGETS: [f64; 11] = [5.0, 20.0, 90.0, 60.0, 30.0, 60.0, 30.0, 60.0, 60.0, 60.0, 30.0];

/// Run one criterion (1-based). Criterion 11 here covers the Wronskian part;
/// the command-line driver adds its artifact determinism check.
pub fn run_criterion(id: usize) -> CriterionReport {
    let t = Instant::now();
    let outcome = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(),
        7 => c7(),
        8 => c8(),
        9 => c9(),
        10 => c10(),
        11 => c11(),
        _ => Err(format!("no criterion {id}")),
    };
    let seconds = t.elapsed().as_secs_f64();
    let budget = BUDGETS.get(id.wrapping_sub(1)).copied().unwrap_or(0.0);
    let (checks, error) = match outcome {
        Ok(ch) => (ch.0, None),
        Err(e) => (Vec::new(), Some(e)),
    };
    let passed = error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.ok) && seconds <= budget;
    CriterionReport {
        id,
        title: TITLES.get(id.wrapping_sub(1)).copied().unwrap_or("unknown").to_string(),
        checks,
        error,
        seconds,
        budget,
        passed,
    }
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=11).map(run_criterion).collect()
}

fn c1() -> Outcome {
    let mut ch = Checks::default();
    let free = prob("free", &[])?;
    let eigs = dirichlet_eigs(&free, 0.0, PI, 200, 1e-12).map_err(err)?;
    let z1 = zeta_direct(&eigs, 1).map_err(err)?;
    let z2 = zeta_direct(&eigs, 2).map_err(err)?;
    let rec = zeta_recursive(&free, 0.0, &[PI], 2, 0.0, 1e-12).map_err(err)?;
    let (b1, b2) = (PI * PI / 6.0, PI.powi(4) / 90.0);
    ch.below("direct zeta(1) error", (z1 - b1).abs(), 1e-8);
    ch.below("recursive zeta(1) error", (rec.get(1, 0).unwrap() - b1).abs(), 1e-8);
    ch.below("direct zeta(2) error", (z2 - b2).abs(), 1e-8);
    ch.below("recursive zeta(2) error", (rec.get(2, 0).unwrap() - b2).abs(), 1e-8);
    Ok(ch)
}

fn c2() -> Outcome {
    let mut ch = Checks::default();
    let hf = prob("harmonic_full", &[])?;
    let e = dirichlet_eigs(&hf, -6.0, 6.0, 9, 1e-12).map_err(err)?;
    let worst = e.eigs.iter().enumerate().map(|(n, l)| (l - (2 * n + 1) as f64).abs()).fold(0.0, f64::max);
    ch.below("(-6,6) vs 2n+1, n<=8", worst, 1e-6);
    let hh = prob("harmonic_half", &[])?;
    for (bc, off, name) in [(BoundaryCondition::Dirichlet, 3.0, "dirichlet vs 4n+3"), (BoundaryCondition::Neumann, 1.0, "neumann vs 4n+1")] {
        let e = bc_eigs(&hh, 0.0, 8.0, bc, BoundaryCondition::Dirichlet, 4, 1e-12).map_err(err)?;
        let worst = e.eigs.iter().enumerate().map(|(n, l)| (l - (4.0 * n as f64 + off)).abs()).fold(0.0, f64::max);
        ch.below(format!("half line {name}, n<=3"), worst, 1e-6);
    }
    Ok(ch)
}

/// Nine logarithmically spaced points on `[20, 100]`.
pub fn fig1_grid() -> Vec<f64> {
    (0..9).map(|k| 20.0 * 5f64.powf(k as f64 / 8.0)).collect()
}

fn c3() -> Outcome {
    let mut ch = Checks::default();
    let lag = prob("laguerre", &[("gamma", 1.0)])?;
    let f = BoundaryCondition::FriedrichsPrincipal;
    let e = bc_eigs(&lag, 1e-6, 40.0, f, BoundaryCondition::Dirichlet, 5, 1e-12).map_err(err)?;
    let worst = e.eigs.iter().enumerate().map(|(j, l)| (l - j as f64).abs()).fold(0.0, f64::max);
    ch.below("lambda_j vs j-1 on (1e-6, 40), j<=5", worst, 1e-4);
    let sweep = truncation_sweep(&lag, &[1, 2, 4, 8], &fig1_grid(), f, None, 1e-13).map_err(err)?;
    for s in fig1_statistics(&sweep) {
        if s.j > 1 {
            ch.within(format!("slope of f_{} vs ln x", s.j), s.f_slope.unwrap_or(f64::NAN), 1.0, 0.1);
        }
        let g: Vec<f64> = s.g.iter().flatten().copied().collect();
        ch.flag(format!("g_{} increasing ({} resolved cells)", s.j, g.len()), g.len() >= 2 && g.windows(2).all(|w| w[1] > w[0]));
    }
    Ok(ch)
}

const C4_GRID: [f64; 3] = [10.0, 20.0, 40.0];

fn c4() -> Outcome {
    let mut ch = Checks::default();
    let hf = prob("harmonic_full", &[])?;
    let t = zeta_recursive(&hf, 1.0, &C4_GRID, 1, 0.0, 1e-11).map_err(err)?;
    let v: Vec<f64> = C4_GRID.iter().enumerate().map(|(k, x)| t.get(1, k).unwrap() - 0.5 * x.ln()).collect();
    ch.below("harmonic zeta(1) - ln(x)/2 variation", total_variation(&v), 0.05);
    let lag = prob("laguerre", &[("gamma", 1.0)])?;
    let t = zeta_recursive(&lag, 1.0, &C4_GRID, 1, -0.5, 1e-11).map_err(err)?;
    let v: Vec<f64> = C4_GRID.iter().enumerate().map(|(k, x)| t.get(1, k).unwrap() - x.ln()).collect();
    ch.below("laguerre zeta(1) - ln x variation", total_variation(&v), 0.05);
    let airy = prob("airy", &[])?;
    let t = zeta_recursive(&airy, 1.0, &C4_GRID, 1, 0.0, 1e-11).map_err(err)?;
    let v: Vec<f64> = C4_GRID.iter().enumerate().map(|(k, x)| t.get(1, k).unwrap() - x.sqrt()).collect();
    ch.below("airy zeta(1) - sqrt(x) variation", total_variation(&v), 0.1);
    Ok(ch)
}

fn c5() -> Outcome {
    let mut ch = Checks::default();
    let xs: Vec<f64> = (0..7).map(|k| 10.0 + 5.0 * k as f64).collect();
    for name in ["harmonic_full", "airy"] {
        let p = prob(name, &[])?;
        let t = zeta_recursive(&p, 1.0, &xs, 1, 0.0, 1e-11).map_err(err)?;
        let mut v = Vec::new();
        for (k, x) in xs.iter().enumerate() {
            v.push(lg_xi(&p, 1, 1.0, *x, 1e-11).map_err(err)? - t.get(1, k).unwrap());
        }
        ch.below(format!("{name} lg_xi(1) - zeta(1) variation on [10,40]"), total_variation(&v), 0.1);
    }
    for d in [1.0, 2.0] {
        let p = prob("power", &[("d", d)])?;
        let r1 = classify_lg(&p, 1, 1.0, 10.0, 6, 1e-11).map_err(err)?;
        let r2 = classify_lg(&p, 2, 1.0, 10.0, 6, 1e-11).map_err(err)?;
        ch.flag(format!("d={d}: l=1 divergent (alpha {:.3})", r1.alpha), r1.growth == Growth::Divergent);
        ch.flag(format!("d={d}: l=2 convergent (alpha {:.3})", r2.alpha), r2.growth == Growth::Convergent);
    }
    Ok(ch)
}

fn doubling(from: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| from * 2f64.powi(k as i32)).collect()
}

/// Airy `F_0` with Dirichlet at 0 on a doubling grid.
pub fn airy_f0(top: usize, tol: f64) -> Result<CharFnEval, String> {
    let airy = prob("airy", &[])?;
    charfn_f0(&airy, &doubling(40.0, top), BoundaryCondition::Dirichlet, &CharFnOptions { tol, ..Default::default() }).map_err(err)
}

fn c6() -> Outcome {
    let mut ch = Checks::default();
    let airy = prob("airy", &[])?;
    let eigs = dirichlet_eigs(&airy, 0.0, 40.0, 3, 1e-12).map_err(err)?.eigs;
    ch.within("first airy eigenvalue", eigs[0], 2.33811, 1e-4);
    let f = airy_f0(5, 1e-4)?;
    for (k, l) in eigs.iter().enumerate() {
        let at = f.evaluate(c(*l)).map_err(err)?.ln_abs();
        let around: Vec<f64> = [-0.4, -0.3, -0.2, 0.2, 0.3, 0.4]
            .iter()
            .map(|d| f.evaluate(c(l + d)).map(|e| e.ln_abs()))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let med = median(around);
        ch.below(format!("|F0(lambda_{})| / neighborhood median", k + 1), (at - med).exp(), 1e-3);
    }

    let hf = prob("harmonic_full", &[])?;
    let grid: Vec<f64> = (0..5).map(|k| 4.0 + 2.0 * k as f64).collect();
    let f = charfn_f0(&hf, &grid, BoundaryCondition::Dirichlet, &CharFnOptions::default()).map_err(err)?;
    let zs: Vec<f64> = (0..8).map(|k| -3.0 + 0.5 * k as f64).collect();
    let vals: Vec<f64> = f
        .evaluate_many(&zs.iter().map(|z| c(*z)).collect::<Vec<_>>())
        .map_err(err)?
        .iter()
        .zip(&zs)
        .map(|(e, z)| e.ln_abs() + ln_gamma((1.0 - z) / 2.0))
        .collect();
    let d2 = vals.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).abs()).fold(0.0, f64::max);
    ch.below("harmonic ln|F0 Gamma((1-z)/2)| second differences", d2, 1e-3);

    let lag = prob("laguerre", &[("gamma", 1.0)])?;
    let opts = CharFnOptions { anchor: Some(1.0), shift: Some(0.0), rank: Some(1), ..Default::default() };
    let f = charfn_f0(&lag, &doubling(10.0, 4), BoundaryCondition::FriedrichsPrincipal, &opts).map_err(err)?;
    for target in [0.0, 1.0, 2.0] {
        let z = real_zero(&f, target - 0.25, target + 0.25)?;
        ch.within(format!("laguerre F0 zero near {target}"), z, target, 1e-3);
    }
    Ok(ch)
}

/// Sign change of the real function `F` on `[lo, hi]` by bisection.
fn real_zero(f: &CharFnEval, lo: f64, hi: f64) -> Result<f64, String> {
    let sign = |x: f64| -> Result<f64, String> {
        let e = f.evaluate(c(x)).map_err(err)?;
        Ok(if e.ln_value.re < -600.0 { 0.0 } else { e.ln_value.im.cos().signum() })
    };
    let (mut a, mut b) = (lo, hi);
    let sa = sign(a)?;
    if sa * sign(b)? >= 0.0 {
        return Err(format!("no sign change on [{lo}, {hi}]"));
    }
    for _ in 0..30 {
        let m = 0.5 * (a + b);
        let sm = sign(m)?;
        if sm == 0.0 {
            return Ok(m);
        }
        if sm == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn tuple_checks(ch: &mut Checks, name: &str, p: &Problem, xs: &[f64], principal_xs: &[f64]) -> Result<(), String> {
    let opts = NormOptions::default();
    let np = NonprincipalFamily::new(p, &opts, *xs.last().unwrap()).map_err(err)?;
    let matched = tuple_log_ratios(|z| np.values(z, xs), &[c(1.0), c(-1.0)], &[c(0.0), c(0.0)]).map_err(err)?;
    let last = matched.last().unwrap();
    ch.below(format!("{name} nonprincipal {{1,-1}}/{{0,0}} at x={}", xs.last().unwrap()), (last.exp() - 1.0).norm(), 2e-2);
    let mis = tuple_log_ratios(|z| np.values(z, xs), &[c(1.0)], &[c(0.0)]).map_err(err)?;
    let re: Vec<f64> = mis.iter().map(|v| v.re).collect();
    ch.flag(format!("{name} nonprincipal {{1}}/{{0}} log trend monotone"), strictly_monotone(&re));
    let pf = PrincipalFamily::new(p, &opts, *principal_xs.last().unwrap()).map_err(err)?;
    let pr = tuple_log_ratios(|z| pf.values(z, principal_xs), &[c(1.0), c(-1.0)], &[c(0.0), c(0.0)]).map_err(err)?;
    let mags: Vec<f64> = pr.iter().map(|v| (v.exp() - 1.0).norm()).collect();
    ch.below(format!("{name} principal {{1,-1}}/{{0,0}} at x={}", principal_xs.last().unwrap()), *mags.last().unwrap(), 2e-2);
    ch.flag(format!("{name} principal tuple ratio approaches 1"), mags.windows(2).all(|w| w[1] < w[0]));
    Ok(())
}

fn c7() -> Outcome {
    let mut ch = Checks::default();
    let hf = prob("harmonic_full", &[])?;
    tuple_checks(&mut ch, "harmonic", &hf, &[2.0, 4.0, 6.0, 8.0], &[2.0, 4.0, 6.0, 8.0])?;
    let airy = prob("airy", &[])?;
    tuple_checks(&mut ch, "airy", &airy, &[40.0, 160.0, 640.0, 1280.0], &[40.0, 160.0, 640.0, 1280.0])?;
    Ok(ch)
}

fn c8() -> Outcome {
    let mut ch = Checks::default();
    let sq: Vec<f64> = (1..=200).map(|n| (n * n) as f64).collect();
    ch.within("exponent of convergence {n^2}", exponent_of_convergence(&sq).map_err(err)?, 0.5, 0.05);
    let hf = prob("harmonic_full", &[])?;
    let e = dirichlet_eigs(&hf, -12.0, 12.0, 40, 1e-10).map_err(err)?;
    ch.within("exponent of convergence harmonic", exponent_of_convergence(&e.eigs).map_err(err)?, 1.0, 0.05);
    let airy = prob("airy", &[])?;
    let e = dirichlet_eigs(&airy, 0.0, 60.0, 40, 1e-10).map_err(err)?;
    ch.within("exponent of convergence airy", exponent_of_convergence(&e.eigs).map_err(err)?, 1.5, 0.1);
    let f = airy_f0(5, 1e-2)?;
    let o = estimate_order(&f, &[10.0, 15.0, 20.0, 25.0, 30.0], 64).map_err(err)?;
    ch.within("estimate_order airy F0", o.order, 1.5, 0.15);
    Ok(ch)
}

fn c9() -> Outcome {
    let mut ch = Checks::default();
    let tol = 1e-5;
    let query = |s: f64, psi: f64, r: f64| ZetaQuery { psi: psi * PI, r, tol, ..ZetaQuery::new(c(s)) };
    let rel = |a: C64, b: C64| ((a - b) / b).norm();

    let free = prob("free", &[])?;
    let ff = charfn_f0(&free, &[], BoundaryCondition::Dirichlet, &CharFnOptions::default()).map_err(err)?;
    let sq: Vec<f64> = (1..=200).map(|n| (n * n) as f64).collect();
    for s in [0.8, 1.5] {
        let direct = zeta_sum(&sq, c(s)).map_err(err)?;
        let base = zeta_contour(CharFnRef::Eval(&ff), &query(s, 0.75, 0.5)).map_err(err)?;
        ch.below(format!("free s={s} contour vs sum (relative)"), rel(base.value, direct), 1e-3);
        invariance(&mut ch, &format!("free s={s}"), CharFnRef::Eval(&ff), &query(s, 0.75, 0.5), base.value)?;
        let mut far = query(s, 0.75, 0.5);
        far.t_max = Some(2.0 * base.t_max);
        let doubled = zeta_contour(CharFnRef::Eval(&ff), &far).map_err(err)?;
        ch.below(format!("free s={s} ray integral change when T doubles"), (doubled.ray_part - base.ray_part).norm(), tol);
    }

    let airy = prob("airy", &[])?;
    let eigs = dirichlet_eigs(&airy, 0.0, 200.0, 100, 1e-11).map_err(err)?.eigs;
    let airy_f = airy_f0(5, 1e-6)?;
    let order = model_order(CharFnRef::Eval(&airy_f)).map_err(err)?;
    let memo = Memo::new(&airy_f);
    for s in [1.8, 2.5] {
        let direct = zeta_sum(&eigs, c(s)).map_err(err)?;
        let q = ZetaQuery { order: Some(order), ..query(s, 0.75, 1.0) };
        let base = zeta_contour(CharFnRef::Other(&memo), &q).map_err(err)?;
        ch.below(format!("airy s={s} contour vs sum (relative)"), rel(base.value, direct), 1e-3);
        invariance(&mut ch, &format!("airy s={s}"), CharFnRef::Other(&memo), &q, base.value)?;
    }
    Ok(ch)
}

/// Psi in {0.6, 0.9} pi and halved R against the base query.
fn invariance(ch: &mut Checks, name: &str, f: CharFnRef, q: &ZetaQuery, base: C64) -> Result<(), String> {
    for psi in [0.6, 0.9] {
        let v = zeta_contour(f, &ZetaQuery { psi: psi * PI, ..q.clone() }).map_err(err)?.value;
        ch.below(format!("{name} psi={psi}pi vs 0.75pi"), (v - base).norm(), 3.0 * q.tol);
    }
    let v = zeta_contour(f, &ZetaQuery { r: 0.5 * q.r, ..q.clone() }).map_err(err)?.value;
    ch.below(format!("{name} R halved"), (v - base).norm(), 3.0 * q.tol);
    Ok(())
}

fn c10() -> Outcome {
    let mut ch = Checks::default();
    let lag = prob("laguerre", &[("gamma", 1.0)])?;
    let f = BoundaryCondition::FriedrichsPrincipal;
    let xs = fig1_grid();
    let sweep = truncation_sweep(&lag, &[2, 4], &xs, f, None, 1e-13).map_err(err)?;
    let z = zeta_recursive(&lag, 1.0, &xs, 1, -0.5, 1e-11).map_err(err)?;
    let r = propconv_residual(&sweep, 2, 4, &z, 1).map_err(err)?;
    ch.below("(2,4) residual total variation on [20,100]", r.total_variation.unwrap_or(f64::NAN), 0.2);
    let xs: Vec<f64> = (0..7).map(|k| 16.0 + 2.0 * k as f64).collect();
    let sweep = truncation_sweep(&lag, &[1, 2, 4], &xs, f, None, 1e-13).map_err(err)?;
    for j in [1, 2, 4] {
        for k in [2.0, 5.0, 10.0] {
            ch.flag(format!("(lambda_{j}(x) - lambda_{j}) x^{k} decreasing on top half"), decreasing_on_top_half(&decay_products(&sweep, j, k)));
        }
    }
    Ok(ch)
}

/// Truncation used for the Wronskian check of each catalog problem.
fn hygiene_span(name: &str) -> (f64, f64) {
    match name {
        "free" => (0.0, PI),
        "harmonic_full" => (-8.0, 8.0),
        "laguerre" => (1e-3, 40.0),
        _ => (0.0, 40.0),
    }
}

/// Largest relative Wronskian drift per unit length over the catalog at `tol`.
pub fn wronskian_drifts(tol: f64) -> Result<Vec<(String, f64)>, String> {
    let entries: [(&str, &[(&str, f64)]); 7] = [
        ("free", &[]),
        ("harmonic_full", &[]),
        ("harmonic_half", &[]),
        ("airy", &[]),
        ("power", &[("d", 2.0)]),
        ("laguerre", &[("gamma", 1.0)]),
        ("laguerre", &[("gamma", 0.5)]),
    ];
    let mut out = Vec::new();
    for (name, params) in entries {
        let p = prob(name, params)?;
        let (a, b) = hygiene_span(name);
        let stops: Vec<f64> = (1..64).map(|k| a + (b - a) * k as f64 / 64.0).collect();
        let mut worst = 0.0f64;
        for z in [c(1.5), C64::new(-2.0, 3.0)] {
            let f = propagate_through(&p, z, a, c(0.0), c(1.0), b, &stops, tol).map_err(err)?;
            // launched from the other end, so the pair stays independent in both directions
            let g = propagate_through(&p, z, b, c(0.0), c(1.0), a, &stops, tol).map_err(err)?;
            worst = worst.max(wronskian(&f, &g).map_err(err)?.drift / (b - a));
        }
        let label = if params.is_empty() { name.to_string() } else { format!("{name}({})", params[0].1) };
        out.push((label, worst));
    }
    Ok(out)
}

fn c11() -> Outcome {
    let mut ch = Checks::default();
    for (name, d) in wronskian_drifts(1e-10)? {
        ch.below(format!("{name} Wronskian drift per unit length"), d, 1e-8);
    }
    Ok(ch)
}
