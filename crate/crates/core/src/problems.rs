//! Problem catalog, boundary conditions and configuration ingestion.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::expr::{parse_expr, ExprError, ExprNode};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("unknown catalog name '{0}'")]
    UnknownCatalog(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("coefficient {which} fails positivity at x = {x}")]
    NotPositive { which: &'static str, x: f64 },
    #[error("coefficient {which}: {err}")]
    Expr { which: &'static str, err: ExprError },
    #[error("config: {0}")]
    Config(String),
}

/// Interval endpoint; infinities are kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    Finite(f64),
    NegInf,
    PosInf,
}

impl Bound {
    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    fn as_key(self) -> f64 {
        match self {
            Bound::Finite(v) => v,
            Bound::NegInf => f64::NEG_INFINITY,
            Bound::PosInf => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointClass {
    Regular,
    LimitCircle,
    LimitPoint,
    Unknown,
}

/// Leading behaviour of the principal solution at spectral parameter 0,
/// given as expressions for `u` and `p u'`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalHint {
    pub u: ExprNode,
    pub u1: ExprNode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointInfo {
    pub classification: EndpointClass,
    pub rank_hint: Option<u32>,
    pub principal: Option<PrincipalHint>,
}

impl EndpointInfo {
    fn new(classification: EndpointClass, rank_hint: Option<u32>) -> Self {
        EndpointInfo { classification, rank_hint, principal: None }
    }

    fn unknown() -> Self {
        EndpointInfo::new(EndpointClass::Unknown, None)
    }
}

/// Closed-form eigenvalue families: `slope * n + offset`, or `(n + offset)^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RefSpectrum {
    Affine { slope: f64, offset: f64 },
    Squares { offset: f64 },
}

impl RefSpectrum {
    /// `j`-th eigenvalue, `j >= 1`.
    pub fn eig(&self, j: usize) -> f64 {
        let n = (j - 1) as f64;
        match *self {
            RefSpectrum::Affine { slope, offset } => slope * n + offset,
            RefSpectrum::Squares { offset } => (n + 1.0 + offset).powi(2),
        }
    }

    pub fn first(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|j| self.eig(j)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    /// Spectrum of the default realization (Dirichlet or Friedrichs at the ends).
    pub spectrum: RefSpectrum,
    /// Spectrum with a Neumann condition at a regular left endpoint, if known.
    pub neumann: Option<RefSpectrum>,
}

/// Separated boundary condition `cos(a) y + sin(a) y^[1] = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Robin(f64),
    FriedrichsPrincipal,
}

impl BoundaryCondition {
    pub fn robin(alpha: f64) -> Result<Self, ProblemError> {
        if !(0.0..PI).contains(&alpha) {
            return Err(ProblemError::InvalidParam(format!("robin angle {alpha} outside [0, pi)")));
        }
        Ok(BoundaryCondition::Robin(alpha))
    }

    /// Angle alpha of the condition; `None` for the Friedrichs condition.
    pub fn angle(self) -> Option<f64> {
        match self {
            BoundaryCondition::Dirichlet => Some(0.0),
            BoundaryCondition::Neumann => Some(PI / 2.0),
            BoundaryCondition::Robin(a) => Some(a),
            BoundaryCondition::FriedrichsPrincipal => None,
        }
    }

    /// Initial data `(y, y^[1])` satisfying the condition at a regular point.
    pub fn launch(self) -> Option<(f64, f64)> {
        match self {
            BoundaryCondition::Dirichlet => Some((0.0, 1.0)),
            BoundaryCondition::Neumann => Some((1.0, 0.0)),
            BoundaryCondition::Robin(a) => Some((a.sin(), -a.cos())),
            BoundaryCondition::FriedrichsPrincipal => None,
        }
    }

    pub fn label(self) -> String {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet".into(),
            BoundaryCondition::Neumann => "neumann".into(),
            BoundaryCondition::Robin(a) => format!("robin({a})"),
            BoundaryCondition::FriedrichsPrincipal => "friedrichs".into(),
        }
    }
}

/// A Sturm-Liouville expression `(1/r)(-(p y')' + q y)` on `(a, b)`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub p_expr: ExprNode,
    pub q_expr: ExprNode,
    pub r_expr: ExprNode,
    pub interval: (Bound, Bound),
    pub params: BTreeMap<String, f64>,
    pub endpoints: [EndpointInfo; 2],
    pub reference: Option<Reference>,
    /// True when `p = r = 1` identically (Schrodinger form).
    pub schrodinger: bool,
    p: ExprNode,
    q: ExprNode,
    r: ExprNode,
}

#[derive(Debug, Clone, Copy)]
pub struct Coeffs {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Problem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        p_expr: ExprNode,
        q_expr: ExprNode,
        r_expr: ExprNode,
        interval: (Bound, Bound),
        params: BTreeMap<String, f64>,
        endpoints: [EndpointInfo; 2],
        reference: Option<Reference>,
    ) -> Result<Problem, ProblemError> {
        if interval.0.as_key() >= interval.1.as_key() {
            return Err(ProblemError::InvalidInterval("need a < b".into()));
        }
        if matches!(interval.0, Bound::PosInf) || matches!(interval.1, Bound::NegInf) {
            return Err(ProblemError::InvalidInterval("misplaced infinity".into()));
        }
        let bind = |e: &ExprNode, which| e.bind(&params).map_err(|err| ProblemError::Expr { which, err });
        let p = bind(&p_expr, "p")?;
        let q = bind(&q_expr, "q")?;
        let r = bind(&r_expr, "r")?;
        let schrodinger = p == ExprNode::Const(1.0) && r == ExprNode::Const(1.0);
        let prob = Problem {
            name: name.to_string(),
            p_expr,
            q_expr,
            r_expr,
            interval,
            params,
            endpoints,
            reference,
            schrodinger,
            p,
            q,
            r,
        };
        prob.check_positivity(1000)?;
        Ok(prob)
    }

    #[inline]
    pub fn coeffs(&self, x: f64) -> Result<Coeffs, ExprError> {
        Ok(Coeffs { p: self.p.eval_bound(x)?, q: self.q.eval_bound(x)?, r: self.r.eval_bound(x)? })
    }

    pub fn p(&self, x: f64) -> Result<f64, ExprError> {
        self.p.eval_bound(x)
    }

    pub fn q(&self, x: f64) -> Result<f64, ExprError> {
        self.q.eval_bound(x)
    }

    pub fn r(&self, x: f64) -> Result<f64, ExprError> {
        self.r.eval_bound(x)
    }

    /// Evaluate a hint expression with this problem's parameters.
    pub fn eval_hint(&self, e: &ExprNode, x: f64) -> Result<f64, ExprError> {
        crate::expr::eval_expr(e, x, &self.params)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.interval.0.as_key() && x < self.interval.1.as_key()
    }

    /// Interior points plus finite endpoints where `p, r > 0` still hold.
    pub fn admits(&self, x: f64) -> bool {
        if self.contains(x) {
            return true;
        }
        let at_end = self.left_finite() == Some(x) || self.right_finite() == Some(x);
        at_end && matches!(self.coeffs(x), Ok(k) if k.p > 0.0 && k.r > 0.0)
    }

    /// Sample mesh of the open interval; infinite rays are sampled up to 200
    /// units from the finite anchor (or the origin).
    pub fn sample_mesh(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = match (self.interval.0, self.interval.1) {
            (Bound::Finite(a), Bound::Finite(b)) => (a, b),
            (Bound::Finite(a), _) => (a, a + 200.0),
            (_, Bound::Finite(b)) => (b - 200.0, b),
            _ => (-200.0, 200.0),
        };
        (1..=n).map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64).collect()
    }

    fn check_positivity(&self, n: usize) -> Result<(), ProblemError> {
        for x in self.sample_mesh(n) {
            let c = match self.coeffs(x) {
                Ok(c) => c,
                Err(err) => {
                    // An underflowing weight far out on an infinite ray is not a violation.
                    if matches!(err, ExprError::Overflow(_)) {
                        continue;
                    }
                    return Err(ProblemError::Expr { which: "p/q/r", err });
                }
            };
            if c.p <= 0.0 && c.p.abs() > f64::MIN_POSITIVE {
                return Err(ProblemError::NotPositive { which: "p", x });
            }
            if c.r <= 0.0 && c.r.abs() > f64::MIN_POSITIVE {
                return Err(ProblemError::NotPositive { which: "r", x });
            }
            if c.p == 0.0 || c.r == 0.0 {
                // underflow on a decaying weight
                if x.abs() < 100.0 {
                    return Err(ProblemError::NotPositive { which: if c.p == 0.0 { "p" } else { "r" }, x });
                }
            }
        }
        Ok(())
    }

    pub fn left_finite(&self) -> Option<f64> {
        self.interval.0.finite()
    }

    pub fn right_finite(&self) -> Option<f64> {
        self.interval.1.finite()
    }

    /// Rank of the right endpoint (number of regularising partial-zeta terms).
    pub fn right_rank(&self) -> u32 {
        self.endpoints[1].rank_hint.unwrap_or(0)
    }

    pub fn left_rank(&self) -> u32 {
        self.endpoints[0].rank_hint.unwrap_or(0)
    }
}

fn c(v: f64) -> ExprNode {
    ExprNode::Const(v)
}

fn parse(src: &str, params: &BTreeMap<String, f64>) -> ExprNode {
    let names: BTreeSet<String> = params.keys().cloned().collect();
    parse_expr(src, &names).expect("catalog expression")
}

pub fn free() -> Problem {
    Problem::new(
        "free",
        c(1.0),
        c(0.0),
        c(1.0),
        (Bound::Finite(0.0), Bound::Finite(PI)),
        BTreeMap::new(),
        [
            EndpointInfo::new(EndpointClass::Regular, Some(0)),
            EndpointInfo::new(EndpointClass::Regular, Some(0)),
        ],
        Some(Reference { spectrum: RefSpectrum::Squares { offset: 0.0 }, neumann: None }),
    )
    .unwrap()
}

pub fn harmonic_full() -> Problem {
    let params = BTreeMap::new();
    Problem::new(
        "harmonic_full",
        c(1.0),
        parse("x^2", &params),
        c(1.0),
        (Bound::NegInf, Bound::PosInf),
        params,
        [
            EndpointInfo::new(EndpointClass::LimitPoint, Some(1)),
            EndpointInfo::new(EndpointClass::LimitPoint, Some(1)),
        ],
        Some(Reference { spectrum: RefSpectrum::Affine { slope: 2.0, offset: 1.0 }, neumann: None }),
    )
    .unwrap()
}

pub fn harmonic_half() -> Problem {
    let params = BTreeMap::new();
    Problem::new(
        "harmonic_half",
        c(1.0),
        parse("x^2", &params),
        c(1.0),
        (Bound::Finite(0.0), Bound::PosInf),
        params,
        [
            EndpointInfo::new(EndpointClass::Regular, Some(0)),
            EndpointInfo::new(EndpointClass::LimitPoint, Some(1)),
        ],
        Some(Reference {
            spectrum: RefSpectrum::Affine { slope: 4.0, offset: 3.0 },
            neumann: Some(RefSpectrum::Affine { slope: 4.0, offset: 1.0 }),
        }),
    )
    .unwrap()
}

/// `q = x^d` on the half line; `d = 1` is the Airy operator.
pub fn power(d: f64) -> Result<Problem, ProblemError> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(ProblemError::InvalidParam(format!("power exponent d = {d} must be positive")));
    }
    let mut params = BTreeMap::new();
    params.insert("d".to_string(), d);
    let kappa = (d + 2.0) / (2.0 * d);
    Problem::new(
        "power",
        c(1.0),
        parse("x^d", &params),
        c(1.0),
        (Bound::Finite(0.0), Bound::PosInf),
        params,
        [
            EndpointInfo::new(EndpointClass::Regular, Some(0)),
            EndpointInfo::new(EndpointClass::LimitPoint, Some(kappa.floor() as u32)),
        ],
        None,
    )
}

pub fn airy() -> Problem {
    let mut p = power(1.0).unwrap();
    p.name = "airy".into();
    p
}

/// Laguerre operator with `p = x^g e^-x`, `r = x^(g-1) e^-x`, `q = 0`.
pub fn laguerre(gamma: f64) -> Result<Problem, ProblemError> {
    if !gamma.is_finite() {
        return Err(ProblemError::InvalidParam("gamma must be finite".into()));
    }
    let mut params = BTreeMap::new();
    params.insert("gamma".to_string(), gamma);
    let lc = gamma > 0.0 && gamma < 2.0;
    let mut left = EndpointInfo::new(
        if lc { EndpointClass::LimitCircle } else { EndpointClass::LimitPoint },
        Some(0),
    );
    left.principal = Some(if gamma >= 1.0 {
        PrincipalHint { u: c(1.0), u1: c(0.0) }
    } else {
        PrincipalHint { u: parse("x^(1 - gamma)/(1 - gamma)", &params), u1: c(1.0) }
    });
    let spectrum = if gamma >= 1.0 {
        RefSpectrum::Affine { slope: 1.0, offset: 0.0 }
    } else {
        RefSpectrum::Affine { slope: 1.0, offset: 1.0 - gamma }
    };
    Problem::new(
        "laguerre",
        parse("x^gamma*exp(-x)", &params),
        c(0.0),
        parse("x^(gamma - 1)*exp(-x)", &params),
        (Bound::Finite(0.0), Bound::PosInf),
        params,
        [left, EndpointInfo::new(EndpointClass::LimitPoint, Some(1))],
        Some(Reference { spectrum, neumann: None }),
    )
}

/// Look up a catalog entry. Accepts `power(d)` / `laguerre(g)` call syntax.
pub fn catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<Problem, ProblemError> {
    let (base, inline) = match name.find('(') {
        Some(i) if name.ends_with(')') => {
            let v: f64 = name[i + 1..name.len() - 1]
                .trim()
                .parse()
                .map_err(|_| ProblemError::InvalidParam(format!("bad inline parameter in '{name}'")))?;
            (&name[..i], Some(v))
        }
        _ => (name, None),
    };
    let get = |key: &str, default: Option<f64>| -> Result<f64, ProblemError> {
        inline
            .or_else(|| params.get(key).copied())
            .or(default)
            .ok_or_else(|| ProblemError::InvalidParam(format!("missing parameter '{key}'")))
    };
    match base {
        "free" => Ok(free()),
        "airy" => Ok(airy()),
        "harmonic_full" => Ok(harmonic_full()),
        "harmonic_half" => Ok(harmonic_half()),
        "power" => power(get("d", None)?),
        "laguerre" => laguerre(get("gamma", Some(1.0))?),
        other => Err(ProblemError::UnknownCatalog(other.to_string())),
    }
}

fn parse_bound(v: &Value) -> Result<Bound, ProblemError> {
    match v {
        Value::Number(n) => Ok(Bound::Finite(n.as_f64().unwrap())),
        Value::String(s) => match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(Bound::PosInf),
            "-inf" | "-infinity" => Ok(Bound::NegInf),
            t => t
                .parse::<f64>()
                .map(Bound::Finite)
                .map_err(|_| ProblemError::Config(format!("bad interval endpoint '{t}'"))),
        },
        _ => Err(ProblemError::Config("interval endpoints must be numbers or \"inf\"".into())),
    }
}

fn parse_class(s: &str) -> Result<EndpointClass, ProblemError> {
    Ok(match s {
        "regular" => EndpointClass::Regular,
        "limit-circle" | "limit_circle" => EndpointClass::LimitCircle,
        "limit-point" | "limit_point" => EndpointClass::LimitPoint,
        "unknown" => EndpointClass::Unknown,
        o => return Err(ProblemError::Config(format!("unknown endpoint classification '{o}'"))),
    })
}

/// Build a problem from a JSON document with keys `problem`, `params`,
/// `interval` and (custom only) `expressions`.
pub fn load_problem(config: &Value) -> Result<Problem, ProblemError> {
    let obj = config.as_object().ok_or_else(|| ProblemError::Config("expected an object".into()))?;
    let name = obj
        .get("problem")
        .and_then(Value::as_str)
        .ok_or_else(|| ProblemError::Config("missing 'problem'".into()))?;
    let mut params = BTreeMap::new();
    if let Some(p) = obj.get("params") {
        let p = p.as_object().ok_or_else(|| ProblemError::Config("'params' must be an object".into()))?;
        for (k, v) in p {
            let v = v.as_f64().ok_or_else(|| ProblemError::Config(format!("param '{k}' is not a number")))?;
            params.insert(k.clone(), v);
        }
    }
    let interval = match obj.get("interval") {
        Some(Value::Array(a)) if a.len() == 2 => Some((parse_bound(&a[0])?, parse_bound(&a[1])?)),
        Some(_) => return Err(ProblemError::Config("'interval' must be a two-element array".into())),
        None => None,
    };
    let mut prob = if name == "custom" {
        let ex = obj
            .get("expressions")
            .and_then(Value::as_object)
            .ok_or_else(|| ProblemError::Config("custom problem needs 'expressions'".into()))?;
        let names: BTreeSet<String> = params.keys().cloned().collect();
        let get = |k: &'static str, default: &str| -> Result<ExprNode, ProblemError> {
            let src = ex.get(k).and_then(Value::as_str).unwrap_or(default);
            parse_expr(src, &names).map_err(|err| ProblemError::Expr { which: k, err })
        };
        let interval = interval.ok_or_else(|| ProblemError::Config("custom problem needs 'interval'".into()))?;
        let mut endpoints = [EndpointInfo::unknown(), EndpointInfo::unknown()];
        if let Some(Value::Array(eps)) = obj.get("endpoints") {
            for (i, e) in eps.iter().take(2).enumerate() {
                if let Some(cl) = e.get("classification").and_then(Value::as_str) {
                    endpoints[i].classification = parse_class(cl)?;
                }
                if let Some(r) = e.get("rank").and_then(Value::as_u64) {
                    endpoints[i].rank_hint = Some(r as u32);
                }
            }
        }
        return Problem::new("custom", get("p", "1")?, get("q", "0")?, get("r", "1")?, interval, params, endpoints, None);
    } else {
        catalog(name, &params)?
    };
    if let Some(iv) = interval {
        prob = Problem::new(
            &prob.name,
            prob.p_expr.clone(),
            prob.q_expr.clone(),
            prob.r_expr.clone(),
            iv,
            prob.params.clone(),
            prob.endpoints.clone(),
            prob.reference.clone(),
        )?;
    }
    Ok(prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn catalog_entries() {
        let h = load_problem(&json!({"problem": "harmonic_full"})).unwrap();
        assert_eq!(h.interval, (Bound::NegInf, Bound::PosInf));
        assert_eq!(h.reference.as_ref().unwrap().spectrum.first(3), vec![1.0, 3.0, 5.0]);
        let l = load_problem(&json!({"problem": "laguerre", "params": {"gamma": 1}})).unwrap();
        let cf = l.coeffs(1.0).unwrap();
        assert!((cf.p - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(cf.q, 0.0);
        assert_eq!(l.endpoints[0].classification, EndpointClass::LimitCircle);
        assert_eq!(l.reference.as_ref().unwrap().spectrum.first(3), vec![0.0, 1.0, 2.0]);
        let f = load_problem(&json!({"problem": "free"})).unwrap();
        assert_eq!(f.reference.unwrap().spectrum.first(3), vec![1.0, 4.0, 9.0]);
    }

    #[test]
    fn laguerre_classification() {
        assert_eq!(laguerre(2.5).unwrap().endpoints[0].classification, EndpointClass::LimitPoint);
        assert_eq!(laguerre(0.5).unwrap().endpoints[0].classification, EndpointClass::LimitCircle);
        assert_eq!(laguerre(-0.5).unwrap().endpoints[0].classification, EndpointClass::LimitPoint);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            load_problem(&json!({"problem": "nosuch"})),
            Err(ProblemError::UnknownCatalog(_))
        ));
        assert!(matches!(power(0.0), Err(ProblemError::InvalidParam(_))));
        assert!(matches!(power(-1.0), Err(ProblemError::InvalidParam(_))));
        let bad = json!({"problem": "custom", "interval": [0, 1], "expressions": {"p": "x - 0.5"}});
        assert!(matches!(load_problem(&bad), Err(ProblemError::NotPositive { which: "p", .. })));
    }

    #[test]
    fn custom_with_params() {
        let cfg = json!({
            "problem": "custom",
            "params": {"g": 1.0},
            "interval": [0, "inf"],
            "expressions": {"p": "x^g * exp(-x)", "r": "exp(-x)"},
            "endpoints": [{"classification": "limit-circle", "rank": 0}, {"classification": "limit-point"}]
        });
        let p = load_problem(&cfg).unwrap();
        assert_eq!(p.interval.1, Bound::PosInf);
        assert_eq!(p.endpoints[0].classification, EndpointClass::LimitCircle);
        assert_eq!(p.endpoints[1].rank_hint, None);
    }

    #[test]
    fn inline_catalog_params() {
        let p = catalog("power(2)", &BTreeMap::new()).unwrap();
        assert_eq!(p.params["d"], 2.0);
        assert_eq!(p.right_rank(), 1);
        assert_eq!(airy().right_rank(), 1);
    }
}
