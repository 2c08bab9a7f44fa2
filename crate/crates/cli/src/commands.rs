//! Command implementations. Artifacts are written in a fixed order with
//! 17 significant digits in CSV.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde_json::{json, Value};
use slz_core::charfn::{charfn_f0, evaluations_csv, truncated_charfn_eval, CharFnEval, CharFnOptions};
use slz_core::convrate::{default_left, fig1_statistics, gnuplot_script, sweep_csv, truncation_sweep};
use slz_core::eigensolve::{bc_eigs, dirichlet_eigs};
use slz_core::fmt17;
use slz_core::partialzeta::{lg_table, zeta_direct_table, zeta_recursive};
use slz_core::problems::{load_problem, BoundaryCondition, EndpointClass, Problem};
use slz_core::speczeta::{zeta_contour, zeta_sum, CharFnRef, ZetaQuery};
use slz_core::validate::{run_criterion, CriterionReport};

use crate::opts::{parse_bc, parse_complex, parse_indices, parse_spec, Fail, Opts, Res};

pub fn dispatch(name: &str, o: &Opts) -> Res<u8> {
    match name {
        "eig" => eig(o),
        "zeta-partial" => zeta_partial(o),
        "charfn" => charfn(o),
        "spectral-zeta" => spectral_zeta(o),
        "convrate" => convrate(o),
        "validate" => validate(o),
        other => Err(Fail::Usage(format!("unknown command '{other}'"))),
    }
}

pub fn write(dir: &Path, name: &str, content: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)
}

fn put(o: &Opts, name: &str, content: &str) -> Res<()> {
    write(&o.out, name, content).map_err(|e| Fail::Usage(format!("cannot write {}: {e}", o.out.join(name).display())))
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap();
    s.push('\n');
    s
}

fn problem(o: &Opts) -> Res<Problem> {
    Ok(load_problem(&o.problem_doc()?)?)
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> Res<&'a T> {
    v.as_ref().ok_or_else(|| Fail::Usage(format!("missing {flag}")))
}

/// Friedrichs at a finite limit-circle left endpoint, Dirichlet otherwise.
fn left_bc(o: &Opts, p: &Problem) -> Res<BoundaryCondition> {
    match &o.bc_left {
        Some(s) => parse_bc(s),
        None if p.left_finite().is_some() && p.endpoints[0].classification == EndpointClass::LimitCircle => {
            Ok(BoundaryCondition::FriedrichsPrincipal)
        }
        None => Ok(BoundaryCondition::Dirichlet),
    }
}

fn left_point(o: &Opts, p: &Problem, bc: BoundaryCondition) -> f64 {
    o.truncate.first().copied().unwrap_or_else(|| default_left(p, bc))
}

fn check_tol(t: f64) -> Res<f64> {
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(Fail::Usage(format!("tolerance {t} outside (0, 1)")))
    }
}

fn eig(o: &Opts) -> Res<u8> {
    let p = problem(o)?;
    let (c, d) = match o.truncate.as_slice() {
        [c, d] => (*c, *d),
        _ => match (p.left_finite().filter(|a| p.admits(*a)), p.right_finite().filter(|b| p.admits(*b))) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Fail::Usage("--truncate C D is required for a singular problem".into())),
        },
    };
    let n = o.n.unwrap_or(10);
    let tol = check_tol(o.tol.unwrap_or(1e-10))?;
    let bc = match &o.bc_left {
        Some(s) => parse_bc(s)?,
        None => BoundaryCondition::Dirichlet,
    };
    let list = if bc == BoundaryCondition::Dirichlet {
        dirichlet_eigs(&p, c, d, n, tol)?
    } else {
        bc_eigs(&p, c, d, bc, BoundaryCondition::Dirichlet, n, tol)?
    };
    put(o, "eig.csv", &list.to_csv())?;
    Ok(0)
}

fn zeta_partial(o: &Opts) -> Res<u8> {
    let p = problem(o)?;
    let xs = parse_spec(need(&o.x, "--x")?)?;
    let c = left_point(o, &p, BoundaryCondition::Dirichlet);
    let ell = o.n.unwrap_or(3);
    let tol = check_tol(o.tol.unwrap_or(1e-10))?;
    let shift = o.shift.unwrap_or(0.0);
    let table = match o.method.as_deref().unwrap_or("recursive") {
        "recursive" => zeta_recursive(&p, c, &xs, ell, shift, tol)?,
        "direct" => zeta_direct_table(&p, c, &xs, ell, shift, 200, tol)?,
        "lg" => lg_table(&p, c, &xs, ell, tol)?,
        m => return Err(Fail::Usage(format!("unknown method '{m}'"))),
    };
    put(o, "zeta_partial.csv", &table.to_csv())?;
    Ok(0)
}

fn charfn_options(o: &Opts, default_tol: f64) -> Res<CharFnOptions> {
    Ok(CharFnOptions {
        tol: check_tol(o.tol.unwrap_or(default_tol))?,
        rank: o.rank,
        anchor: o.anchor,
        shift: o.shift,
        ..Default::default()
    })
}

/// `G_c` when `--truncate C` is given, else `F_0`.
fn build_charfn(o: &Opts, p: &Problem, default_tol: f64) -> Res<CharFnEval> {
    let grid = parse_spec(need(&o.x, "--x")?)?;
    let opts = charfn_options(o, default_tol)?;
    Ok(match o.truncate.first() {
        Some(c) => truncated_charfn_eval(p, *c, &grid, &opts)?,
        None => charfn_f0(p, &grid, left_bc(o, p)?, &opts)?,
    })
}

fn charfn(o: &Opts) -> Res<u8> {
    let p = problem(o)?;
    let zs: Vec<C64> = parse_spec(need(&o.z, "--z")?)?.into_iter().map(|z| C64::new(z, 0.0)).collect();
    let f = build_charfn(o, &p, 1e-6)?;
    let evals = f.evaluate_many(&zs)?;
    put(o, "charfn.csv", &evaluations_csv(&evals))?;
    let doc = json!({
        "diagnostics": f.diagnostics(),
        "evaluations": evals.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
    });
    put(o, "charfn.json", &pretty(&doc))?;
    let bad: Vec<String> = evals.iter().filter(|e| !e.converged).map(|e| format!("{}", e.z.re)).collect();
    if !bad.is_empty() {
        return Err(Fail::Numeric(format!("not converged at z = {}", bad.join(", "))));
    }
    Ok(0)
}

fn spectral_zeta(o: &Opts) -> Res<u8> {
    let p = problem(o)?;
    let s = parse_complex(need(&o.s, "--s")?)?;
    let f = build_charfn(o, &p, 1e-6)?;
    let mut q = ZetaQuery::new(s);
    q.tol = f.tol.max(1e-8);
    if let Some(psi) = o.psi {
        q.psi = psi * PI;
    }
    if let Some(r) = o.radius {
        q.r = r;
    }
    q.t_max = o.t_max;
    let res = zeta_contour(CharFnRef::Eval(&f), &q)?;
    let mut doc = json!({ "contour": res.to_json(), "diagnostics": f.diagnostics() });
    if let Some(n) = o.n {
        let eigs = match (&p.reference, o.truncate.as_slice()) {
            (Some(r), []) => r.spectrum.first(n),
            (_, [c, d]) => dirichlet_eigs(&p, *c, *d, n, 1e-12)?.eigs,
            _ => return Err(Fail::Usage("--n needs a reference spectrum or --truncate C D".into())),
        };
        let sum = zeta_sum(&eigs, s)?;
        doc["sum"] = json!({ "n": n, "value_re": sum.re, "value_im": sum.im });
    }
    put(o, "spectral_zeta.json", &pretty(&doc))?;
    Ok(0)
}

fn convrate(o: &Opts) -> Res<u8> {
    let p = problem(o)?;
    let js = parse_indices(need(&o.j, "--j")?)?;
    let xs = parse_spec(need(&o.x, "--x")?)?;
    let bc = left_bc(o, &p)?;
    let tol = check_tol(o.tol.unwrap_or(1e-12))?;
    let mut all = js.clone();
    if !all.contains(&1) {
        all.insert(0, 1);
    }
    all.sort_unstable();
    let sweep = truncation_sweep(&p, &all, &xs, bc, o.truncate.first().copied(), tol)?;
    let stats: Vec<_> = fig1_statistics(&sweep).into_iter().filter(|s| js.contains(&s.j)).collect();
    put(o, "convrate.csv", &sweep_csv(&sweep, &stats, None))?;
    put(o, "convrate.gp", &gnuplot_script("convrate.csv", &js))?;
    let mut limits = String::from("j,lambda_limit\n");
    for j in &js {
        limits.push_str(&format!("{j},{}\n", fmt17(sweep.lam_limit[j - 1])));
    }
    put(o, "convrate_limits.csv", &limits)?;
    let doc = json!({
        "problem": sweep.problem,
        "c": sweep.c,
        "bc_left": sweep.bc_left.label(),
        "limit_source": sweep.limit_source,
        "noise_floor": sweep.noise_floor(),
        "f_slopes": stats.iter().map(|s| json!({ "j": s.j, "slope": s.f_slope })).collect::<Vec<_>>(),
    });
    put(o, "convrate.json", &pretty(&doc))?;
    Ok(0)
}

/// Two in-process runs of fixed configurations, compared byte for byte.
pub fn determinism_check() -> Result<bool, String> {
    let base = std::env::temp_dir().join(format!("slz-determinism-{}", std::process::id()));
    let configs = [
        ("eig", "harmonic_full", vec![-6.0, 6.0], None, None),
        ("convrate", "laguerre", vec![], Some("2,4"), Some("20:40:log3")),
    ];
    let mut same = true;
    for (cmd, prob, truncate, j, x) in configs {
        let mut outs = Vec::new();
        for run in 0..2 {
            let out = base.join(format!("{cmd}-{run}"));
            let o = Opts {
                problem: Some(prob.into()),
                truncate: truncate.clone(),
                n: Some(8),
                j: j.map(String::from),
                x: x.map(String::from),
                out: out.clone(),
                ..Default::default()
            };
            dispatch(cmd, &o).map_err(|e| format!("{cmd}: {e:?}"))?;
            let mut files: Vec<_> = std::fs::read_dir(&out).map_err(|e| e.to_string())?.flatten().map(|e| e.path()).collect();
            files.sort();
            let bytes: Vec<(String, Vec<u8>)> = files
                .iter()
                .map(|f| (f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(f).unwrap_or_default()))
                .collect();
            outs.push(bytes);
        }
        same &= outs[0] == outs[1] && !outs[0].is_empty();
    }
    let _ = std::fs::remove_dir_all(&base);
    Ok(same)
}

/// Criterion 11 with the artifact determinism check added.
pub fn criterion(id: usize) -> CriterionReport {
    let mut r = run_criterion(id);
    if id == 11 {
        let t = std::time::Instant::now();
        let (ok, value) = match determinism_check() {
            Ok(ok) => (ok, ok as u8 as f64),
            Err(e) => {
                r.error.get_or_insert(e);
                (false, 0.0)
            }
        };
        r.checks.push(slz_core::validate::Check {
            name: "CLI artifacts byte-identical on rerun".into(),
            value,
            limit: "true".into(),
            ok,
        });
        r.seconds += t.elapsed().as_secs_f64();
        r.passed = r.error.is_none() && r.checks.iter().all(|c| c.ok) && r.seconds <= r.budget;
    }
    r
}

fn validate(o: &Opts) -> Res<u8> {
    let ids = match &o.only {
        Some(s) => parse_indices(s)?,
        None => (1..=11).collect(),
    };
    if let Some(bad) = ids.iter().find(|i| !(1..=11).contains(*i)) {
        return Err(Fail::Usage(format!("no criterion {bad}")));
    }
    let mut reports = Vec::new();
    for id in ids {
        let r = criterion(id);
        println!("{}", r.line());
        reports.push(r);
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", reports.len());
    put(o, "validate.json", &pretty(&serde_json::to_value(&reports).unwrap()))?;
    Ok(if passed == reports.len() { 0 } else { 1 })
}
