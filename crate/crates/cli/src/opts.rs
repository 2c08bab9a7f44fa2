//! Options shared by all commands, from flags or a JSON config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};
use slz_core::charfn::CharFnError;
use slz_core::convrate::ConvError;
use slz_core::eigensolve::EigenError;
use slz_core::partialzeta::PartialZetaError;
use slz_core::problems::{BoundaryCondition, ProblemError};
use slz_core::speczeta::ZetaError;

use crate::Common;

#[derive(Debug)]
pub enum Fail {
    /// Bad input: exit 2.
    Usage(String),
    /// Non-convergence or other numerical failure: exit 3.
    Numeric(String),
}

pub type Res<T> = Result<T, Fail>;

impl From<ProblemError> for Fail {
    fn from(e: ProblemError) -> Fail {
        Fail::Usage(e.to_string())
    }
}

impl From<EigenError> for Fail {
    fn from(e: EigenError) -> Fail {
        match e {
            EigenError::BadTruncation(..) | EigenError::NoPrincipal | EigenError::Empty => Fail::Usage(e.to_string()),
            _ => Fail::Numeric(e.to_string()),
        }
    }
}

impl From<PartialZetaError> for Fail {
    fn from(e: PartialZetaError) -> Fail {
        use PartialZetaError::*;
        match e {
            Eigen(e) => e.into(),
            BadOrder | BadGrid { .. } | OutOfRange(_) | NotSchrodinger | ZeroEigenvalue { .. } | NonPositivePotential { .. } => {
                Fail::Usage(e.to_string())
            }
            _ => Fail::Numeric(e.to_string()),
        }
    }
}

impl From<CharFnError> for Fail {
    fn from(e: CharFnError) -> Fail {
        use CharFnError::*;
        match e {
            Eigen(e) => e.into(),
            Zeta(e) => e.into(),
            BadGrid | ZeroInList | TooFew { .. } | RadiusCap(_) | Unsupported(_) | Divergent { .. } => Fail::Usage(e.to_string()),
            _ => Fail::Numeric(e.to_string()),
        }
    }
}

impl From<ZetaError> for Fail {
    fn from(e: ZetaError) -> Fail {
        use ZetaError::*;
        match e {
            CharFn(e) => e.into(),
            Eigen(e) => e.into(),
            Refused { .. } | ZeroEigenvalue | IntegerS(_) | BadQuery(_) => Fail::Usage(e.to_string()),
            _ => Fail::Numeric(e.to_string()),
        }
    }
}

impl From<ConvError> for Fail {
    fn from(e: ConvError) -> Fail {
        match e {
            ConvError::Eigen(e) => e.into(),
            ConvError::NotMonotone { .. } => Fail::Numeric(e.to_string()),
            _ => Fail::Usage(e.to_string()),
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(Fail::Usage(msg.into()))
}

#[derive(Debug, Clone, Default)]
pub struct Opts {
    pub problem: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub expr: [Option<String>; 3],
    pub interval: Option<[String; 2]>,
    pub truncate: Vec<f64>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub x: Option<String>,
    pub z: Option<String>,
    pub s: Option<String>,
    pub j: Option<String>,
    pub bc_left: Option<String>,
    pub method: Option<String>,
    pub shift: Option<f64>,
    pub rank: Option<u32>,
    pub anchor: Option<f64>,
    pub psi: Option<f64>,
    pub radius: Option<f64>,
    pub t_max: Option<f64>,
    pub only: Option<String>,
    pub out: PathBuf,
}

const COMMANDS: [&str; 6] = ["eig", "zeta-partial", "charfn", "spectral-zeta", "convrate", "validate"];

impl Opts {
    pub fn from_args(c: Common) -> Res<Opts> {
        let mut params = BTreeMap::new();
        for kv in &c.params {
            let Some((k, v)) = kv.split_once('=') else {
                return usage(format!("--param expects k=v, got '{kv}'"));
            };
            let v: f64 = v.trim().parse().map_err(|_| Fail::Usage(format!("parameter '{k}' is not a number")))?;
            params.insert(k.trim().to_string(), v);
        }
        if let Some(g) = c.gamma {
            params.insert("gamma".into(), g);
        }
        if let Some(d) = c.d {
            params.insert("d".into(), d);
        }
        let interval = c.interval.map(|v| [v[0].clone(), v[1].clone()]);
        Ok(Opts {
            problem: c.problem,
            params,
            expr: [c.expr_p, c.expr_q, c.expr_r],
            interval,
            truncate: c.truncate.unwrap_or_default(),
            n: c.n,
            tol: c.tol,
            x: c.x,
            z: c.z,
            s: c.s,
            j: c.j,
            bc_left: c.bc_left,
            method: c.method,
            shift: c.shift,
            rank: c.rank,
            anchor: c.anchor,
            psi: c.psi,
            radius: c.radius,
            t_max: c.t_max,
            only: c.only,
            out: c.out,
        })
    }

    /// Config keys mirror the long flags (`expressions` holds p, q, r).
    pub fn from_config(path: &Path) -> Res<(&'static str, Opts)> {
        let text = std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", path.display())))?;
        let doc: Value = serde_json::from_str(&text).map_err(|e| Fail::Usage(format!("config is not JSON: {e}")))?;
        let obj = doc.as_object().ok_or_else(|| Fail::Usage("config must be an object".into()))?;
        let cmd = obj.get("command").and_then(Value::as_str).ok_or_else(|| Fail::Usage("config needs 'command'".into()))?;
        let name = COMMANDS
            .iter()
            .find(|c| **c == cmd)
            .copied()
            .ok_or_else(|| Fail::Usage(format!("unknown command '{cmd}'")))?;
        let mut o = Opts { out: PathBuf::from("."), ..Default::default() };
        for (k, v) in obj {
            match k.as_str() {
                "command" => {}
                "problem" => o.problem = Some(text_of(k, v)?),
                "params" => {
                    let m = v.as_object().ok_or_else(|| Fail::Usage("'params' must be an object".into()))?;
                    for (pk, pv) in m {
                        o.params.insert(pk.clone(), num(pk, pv)?);
                    }
                }
                "gamma" | "d" => {
                    o.params.insert(k.clone(), num(k, v)?);
                }
                "expressions" => {
                    let m = v.as_object().ok_or_else(|| Fail::Usage("'expressions' must be an object".into()))?;
                    for (i, key) in ["p", "q", "r"].iter().enumerate() {
                        if let Some(e) = m.get(*key) {
                            o.expr[i] = Some(text_of(key, e)?);
                        }
                    }
                }
                "interval" => match v.as_array() {
                    Some(a) if a.len() == 2 => o.interval = Some([text_of(k, &a[0])?, text_of(k, &a[1])?]),
                    _ => return usage("'interval' must have two entries"),
                },
                "truncate" => match v {
                    Value::Array(a) if (1..=2).contains(&a.len()) => {
                        o.truncate = a.iter().map(|e| num(k, e)).collect::<Res<_>>()?;
                    }
                    Value::Number(_) => o.truncate = vec![num(k, v)?],
                    _ => return usage("'truncate' must be a number or one or two numbers"),
                },
                "n" => o.n = Some(v.as_u64().ok_or_else(|| Fail::Usage("'n' must be a nonnegative integer".into()))? as usize),
                "rank" => o.rank = Some(v.as_u64().ok_or_else(|| Fail::Usage("'rank' must be a nonnegative integer".into()))? as u32),
                "tol" => o.tol = Some(num(k, v)?),
                "shift" => o.shift = Some(num(k, v)?),
                "anchor" => o.anchor = Some(num(k, v)?),
                "psi" => o.psi = Some(num(k, v)?),
                "radius" => o.radius = Some(num(k, v)?),
                "t_max" => o.t_max = Some(num(k, v)?),
                "x" => o.x = Some(list_text(k, v)?),
                "z" => o.z = Some(list_text(k, v)?),
                "s" => o.s = Some(list_text(k, v)?),
                "j" => o.j = Some(list_text(k, v)?),
                "only" => o.only = Some(list_text(k, v)?),
                "bc_left" => o.bc_left = Some(text_of(k, v)?),
                "method" => o.method = Some(text_of(k, v)?),
                "out" => o.out = PathBuf::from(text_of(k, v)?),
                other => return usage(format!("unknown config key '{other}'")),
            }
        }
        Ok((name, o))
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        let mut put = |k: &str, v: Value| {
            if !v.is_null() {
                m.insert(k.to_string(), v);
            }
        };
        put("problem", json!(self.problem));
        put("params", json!(self.params));
        put("expressions", json!({"p": self.expr[0], "q": self.expr[1], "r": self.expr[2]}));
        put("interval", json!(self.interval));
        put("truncate", json!(self.truncate));
        put("n", json!(self.n));
        put("tol", json!(self.tol));
        put("x", json!(self.x));
        put("z", json!(self.z));
        put("s", json!(self.s));
        put("j", json!(self.j));
        put("bc_left", json!(self.bc_left));
        put("method", json!(self.method));
        put("shift", json!(self.shift));
        put("rank", json!(self.rank));
        put("anchor", json!(self.anchor));
        put("psi", json!(self.psi));
        put("radius", json!(self.radius));
        put("t_max", json!(self.t_max));
        Value::Object(m)
    }

    /// Document accepted by `load_problem`.
    pub fn problem_doc(&self) -> Res<Value> {
        let custom = self.expr.iter().any(Option::is_some);
        let name = match (&self.problem, custom) {
            (Some(p), true) if p != "custom" => return usage("expressions are only allowed with a custom problem"),
            (Some(p), _) => p.clone(),
            (None, true) => "custom".to_string(),
            (None, false) => return usage("missing --problem"),
        };
        let mut doc = json!({ "problem": name, "params": self.params });
        if let Some([a, b]) = &self.interval {
            doc["interval"] = json!([a, b]);
        }
        if custom {
            let mut ex = Map::new();
            for (k, e) in ["p", "q", "r"].iter().zip(&self.expr) {
                if let Some(e) = e {
                    ex.insert(k.to_string(), json!(e));
                }
            }
            doc["expressions"] = Value::Object(ex);
        }
        Ok(doc)
    }
}

fn num(k: &str, v: &Value) -> Res<f64> {
    match v {
        Value::Number(n) => Ok(n.as_f64().unwrap()),
        Value::String(s) => s.trim().parse().map_err(|_| Fail::Usage(format!("'{k}' is not a number"))),
        _ => usage(format!("'{k}' is not a number")),
    }
}

fn text_of(k: &str, v: &Value) -> Res<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => usage(format!("'{k}' must be a string")),
    }
}

/// A string, or an array joined with commas.
fn list_text(k: &str, v: &Value) -> Res<String> {
    match v {
        Value::Array(a) => Ok(a.iter().map(|e| text_of(k, e)).collect::<Res<Vec<_>>>()?.join(",")),
        _ => text_of(k, v),
    }
}

/// `start:stop:linN`, `start:stop:logN` or a comma list.
pub fn parse_spec(spec: &str) -> Res<Vec<f64>> {
    let bad = || Fail::Usage(format!("bad grid spec '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let (log, n) = if let Some(n) = parts[2].strip_prefix("lin") {
            (false, n)
        } else if let Some(n) = parts[2].strip_prefix("log") {
            (true, n)
        } else {
            return Err(bad());
        };
        let n: usize = n.parse().map_err(|_| bad())?;
        if n == 0 || !a.is_finite() || !b.is_finite() || (log && (a <= 0.0 || b <= 0.0)) {
            return Err(bad());
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        let t = |k: usize| k as f64 / (n - 1) as f64;
        return Ok((0..n)
            .map(|k| {
                if k == n - 1 {
                    b
                } else if log {
                    a * (b / a).powf(t(k))
                } else {
                    a + (b - a) * t(k)
                }
            })
            .collect());
    }
    if parts.len() != 1 {
        return Err(bad());
    }
    spec.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
}

pub fn parse_indices(spec: &str) -> Res<Vec<usize>> {
    spec.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|_| Fail::Usage(format!("bad index list '{spec}'"))))
        .collect()
}

/// `RE,IM` or `RE`.
pub fn parse_complex(spec: &str) -> Res<C64> {
    let bad = || Fail::Usage(format!("bad complex value '{spec}'"));
    let v: Vec<f64> = spec.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Res<_>>()?;
    match v.as_slice() {
        [re] => Ok(C64::new(*re, 0.0)),
        [re, im] => Ok(C64::new(*re, *im)),
        _ => Err(bad()),
    }
}

pub fn parse_bc(spec: &str) -> Res<BoundaryCondition> {
    match spec.trim() {
        "dirichlet" => Ok(BoundaryCondition::Dirichlet),
        "neumann" => Ok(BoundaryCondition::Neumann),
        "friedrichs" => Ok(BoundaryCondition::FriedrichsPrincipal),
        s => match s.strip_prefix("robin:") {
            Some(a) => {
                let a: f64 = a.parse().map_err(|_| Fail::Usage(format!("bad robin angle in '{s}'")))?;
                Ok(BoundaryCondition::robin(a)?)
            }
            None => usage(format!("unknown boundary condition '{s}'")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs() {
        assert_eq!(parse_spec("0:1:lin3").unwrap(), vec![0.0, 0.5, 1.0]);
        let g = parse_spec("20:100:log10").unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!((g[0], g[9]), (20.0, 100.0));
        assert_eq!(parse_spec("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_spec("0:1:log3").is_err());
        assert!(parse_spec("a:b").is_err());
        assert_eq!(parse_complex("1.5,-2").unwrap(), C64::new(1.5, -2.0));
        assert!(parse_indices("2,x").is_err());
    }
}
