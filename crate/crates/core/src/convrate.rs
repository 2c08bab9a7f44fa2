//! Truncation convergence rates: sweeps of `lambda_j(x)` toward the right
//! endpoint, the statistics `f_j`, `g_j`, the rate-relation residual and the
//! super-polynomial decay products.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::eigensolve::{bc_eigs, EigenError};
use crate::fmt17;
use crate::partialzeta::PartialZetaTable;
use crate::problems::{Bound, BoundaryCondition, Problem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("x grid must be increasing, inside the interval and right of c = {0}")]
    BadGrid(f64),
    #[error("eigenvalue indices start at 1")]
    BadIndex,
    #[error("lambda_{j}({x}) increased along the sweep")]
    NotMonotone { j: usize, x: f64 },
    #[error("residual needs two distinct indices from the sweep")]
    SameIndex,
    #[error("zeta table grid does not match the sweep")]
    TableMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitSource {
    /// Closed-form reference spectrum.
    Reference,
    /// Eigenvalue of the truncation at twice the largest grid point (model dependent).
    Extrapolated,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationSweep {
    pub problem: String,
    pub c: f64,
    pub bc_left: BoundaryCondition,
    pub j_list: Vec<usize>,
    pub x_grid: Vec<f64>,
    /// `lam[j - 1][k]` for every index up to the largest requested.
    pub lam: Vec<Vec<f64>>,
    pub lam_limit: Vec<f64>,
    pub limit_source: LimitSource,
    pub tol: f64,
}

impl TruncationSweep {
    pub fn gap(&self, j: usize, k: usize) -> f64 {
        self.lam[j - 1][k] - self.lam_limit[j - 1]
    }

    /// Differences at or below this are noise.
    pub fn noise_floor(&self) -> f64 {
        10.0 * self.tol
    }

    fn resolved(&self, j: usize, k: usize) -> Option<f64> {
        let g = self.gap(j, k);
        (g > self.noise_floor()).then_some(g)
    }
}

/// Default left truncation point: the endpoint when regular, a tiny offset
/// from a limit-circle endpoint with a Friedrichs condition, else one unit in.
pub fn default_left(prob: &Problem, bc_left: BoundaryCondition) -> f64 {
    match prob.interval.0 {
        Bound::Finite(a) if prob.admits(a) => a,
        Bound::Finite(a) if bc_left == BoundaryCondition::FriedrichsPrincipal => a + 1e-6,
        Bound::Finite(a) => a + 1.0,
        _ => -1.0,
    }
}

/// `lambda_j(x)` for `j <= max(j_list)` over the grid, Dirichlet at `x`.
pub fn truncation_sweep(
    prob: &Problem,
    j_list: &[usize],
    x_grid: &[f64],
    bc_left: BoundaryCondition,
    c: Option<f64>,
    tol: f64,
) -> Result<TruncationSweep, ConvError> {
    let c = c.unwrap_or(default_left(prob, bc_left));
    if j_list.is_empty() || j_list.contains(&0) {
        return Err(ConvError::BadIndex);
    }
    if x_grid.is_empty() || x_grid[0] <= c || x_grid.windows(2).any(|w| w[1] <= w[0]) || !x_grid.iter().all(|x| prob.admits(*x)) {
        return Err(ConvError::BadGrid(c));
    }
    let n = *j_list.iter().max().unwrap();
    let cols: Vec<Vec<f64>> = x_grid
        .par_iter()
        .map(|x| Ok(bc_eigs(prob, c, *x, bc_left, BoundaryCondition::Dirichlet, n, tol)?.eigs))
        .collect::<Result<_, EigenError>>()?;
    let lam: Vec<Vec<f64>> = (0..n).map(|j| cols.iter().map(|col| col[j]).collect()).collect();
    let (lam_limit, limit_source) = match &prob.reference {
        Some(r) if bc_left != BoundaryCondition::Neumann || r.neumann.is_some() => {
            let spec = if bc_left == BoundaryCondition::Neumann { r.neumann.as_ref().unwrap() } else { &r.spectrum };
            (spec.first(n), LimitSource::Reference)
        }
        _ => {
            let far = 2.0 * x_grid.last().unwrap() - c;
            let far = if prob.admits(far) { far } else { prob.right_finite().map_or(far, |b| 0.5 * (b + x_grid.last().unwrap())) };
            (bc_eigs(prob, c, far, bc_left, BoundaryCondition::Dirichlet, n, tol)?.eigs, LimitSource::Extrapolated)
        }
    };
    let sweep = TruncationSweep {
        problem: prob.name.clone(),
        c,
        bc_left,
        j_list: j_list.to_vec(),
        x_grid: x_grid.to_vec(),
        lam,
        lam_limit,
        limit_source,
        tol,
    };
    for j in 1..=n {
        for k in 1..x_grid.len() {
            if sweep.lam[j - 1][k] > sweep.lam[j - 1][k - 1] + sweep.noise_floor() {
                return Err(ConvError::NotMonotone { j, x: x_grid[k] });
            }
        }
    }
    Ok(sweep)
}

/// Per-index statistics; `None` marks cells at the noise floor.
#[derive(Debug, Clone, Serialize)]
pub struct Fig1Series {
    pub j: usize,
    pub f: Vec<Option<f64>>,
    pub g: Vec<Option<f64>>,
    /// Least-squares slope of `f_j` against `ln x` over the resolved cells.
    pub f_slope: Option<f64>,
}

/// `f_j = [ln(lambda_j(x) - lambda_j) - ln(lambda_1(x) - lambda_1)] / (2 (lambda_j - lambda_1))`
/// and `g_j = -ln(lambda_j(x) - lambda_j) / ln x`.
pub fn fig1_statistics(sweep: &TruncationSweep) -> Vec<Fig1Series> {
    sweep
        .j_list
        .iter()
        .map(|&j| {
            let nx = sweep.x_grid.len();
            let g: Vec<Option<f64>> = (0..nx).map(|k| sweep.resolved(j, k).map(|d| -d.ln() / sweep.x_grid[k].ln())).collect();
            let f: Vec<Option<f64>> = (0..nx)
                .map(|k| {
                    if j == 1 {
                        return None;
                    }
                    let (dj, d1) = (sweep.resolved(j, k)?, sweep.resolved(1, k)?);
                    Some((dj.ln() - d1.ln()) / (2.0 * (sweep.lam_limit[j - 1] - sweep.lam_limit[0])))
                })
                .collect();
            let pts: Vec<(f64, f64)> = f.iter().zip(&sweep.x_grid).filter_map(|(v, x)| v.map(|v| (x.ln(), v))).collect();
            let f_slope = (pts.len() >= 2).then(|| ls_slope(&pts));
            Fig1Series { j, f, g, f_slope }
        })
        .collect()
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub j: usize,
    pub m: usize,
    pub values: Vec<Option<f64>>,
    /// Total variation over the resolved cells.
    pub total_variation: Option<f64>,
}

/// `ln[(lambda_j(x) - lambda_j) / (lambda_m(x) - lambda_m)] - 2 sum_{l <= rank} ((mu_j^l - mu_m^l) / l) zeta(l; (c, x))`
/// with `mu = lambda - shift` for a table computed with a shift.
pub fn propconv_residual(sweep: &TruncationSweep, j: usize, m: usize, zeta: &PartialZetaTable, rank: usize) -> Result<Residual, ConvError> {
    if j == m {
        return Err(ConvError::SameIndex);
    }
    let n = sweep.lam.len();
    if j == 0 || m == 0 || j > n || m > n {
        return Err(ConvError::BadIndex);
    }
    if zeta.xs.len() != sweep.x_grid.len() || zeta.xs.iter().zip(&sweep.x_grid).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0)) {
        return Err(ConvError::TableMismatch);
    }
    if rank > zeta.orders.len() {
        return Err(ConvError::TableMismatch);
    }
    let mj = sweep.lam_limit[j - 1] - zeta.shift;
    let mm = sweep.lam_limit[m - 1] - zeta.shift;
    let values: Vec<Option<f64>> = (0..sweep.x_grid.len())
        .map(|k| {
            let (dj, dm) = (sweep.resolved(j, k)?, sweep.resolved(m, k)?);
            let mut corr = 0.0;
            for ell in 1..=rank {
                let e = ell as i32;
                corr += (mj.powi(e) - mm.powi(e)) / ell as f64 * zeta.get(ell, k)?;
            }
            Some((dj / dm).ln() - 2.0 * corr)
        })
        .collect();
    let kept: Vec<f64> = values.iter().flatten().copied().collect();
    let total_variation = (kept.len() >= 2).then(|| total_variation(&kept));
    Ok(Residual { j, m, values, total_variation })
}

pub fn total_variation(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// `(lambda_j(x) - lambda_j) x^K` over the grid; `None` at the noise floor.
pub fn decay_products(sweep: &TruncationSweep, j: usize, k_pow: f64) -> Vec<Option<f64>> {
    (0..sweep.x_grid.len()).map(|k| sweep.resolved(j, k).map(|d| d * sweep.x_grid[k].powf(k_pow))).collect()
}

/// Strict decrease over the top half of the grid; false if any cell there is unresolved.
pub fn decreasing_on_top_half(products: &[Option<f64>]) -> bool {
    let top = &products[products.len() / 2..];
    if top.len() < 2 || top.iter().any(|v| v.is_none()) {
        return false;
    }
    top.windows(2).all(|w| w[1].unwrap() < w[0].unwrap())
}

/// Rows `(x, j, lambda, f_j, g_j, residual)`; empty fields for unresolved
/// cells. The residual column is filled on rows of its index `j`.
pub fn sweep_csv(sweep: &TruncationSweep, stats: &[Fig1Series], residual: Option<&Residual>) -> String {
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let mut s = String::from("x,j,lambda,f_j,g_j,residual\n");
    for (k, x) in sweep.x_grid.iter().enumerate() {
        for st in stats {
            let res = residual.filter(|r| r.j == st.j).and_then(|r| r.values[k]);
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt17(*x),
                st.j,
                fmt17(sweep.lam[st.j - 1][k]),
                opt(st.f[k]),
                opt(st.g[k]),
                opt(res)
            ));
        }
    }
    s
}

/// Gnuplot script plotting `f_j` and `g_j` against `ln x` from `csv_name`.
pub fn gnuplot_script(csv_name: &str, j_list: &[usize]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key left top\nset xlabel 'ln x'\n");
    s.push_str("set terminal pngcairo size 1200,500\nset output 'convrate.png'\nset multiplot layout 1,2\n");
    let series = |col: usize, name: &str| {
        j_list
            .iter()
            .map(|j| format!("'{csv_name}' using ($2=={j} ? log($1) : 1/0):{col} with linespoints title '{name}_{j}'"))
            .collect::<Vec<_>>()
            .join(", \\\n     ")
    };
    s.push_str(&format!("set ylabel 'f_j'\nplot {}\n", series(4, "f")));
    s.push_str(&format!("set ylabel 'g_j'\nplot {}\n", series(5, "g")));
    s.push_str("unset multiplot\n");
    s
}
