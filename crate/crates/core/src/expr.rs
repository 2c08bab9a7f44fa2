//! Coefficient expressions: a tiny arithmetic grammar over `x` and named
//! parameters.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := ("-")? power
//! power  := atom ("^" factor)?
//! atom   := number | "x" | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! `pow` is the only two-argument function and is written `pow(a, b)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("undeclared parameter '{0}'")]
    UndeclaredParam(String),
    #[error("unbound parameter '{0}'")]
    UnboundParam(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow evaluating {0}")]
    Overflow(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Pow,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        if self == Func::Pow {
            2
        } else {
            1
        }
    }
}

/// Parse tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Const(f64),
    X,
    Param(String),
    Neg(Box<ExprNode>),
    Binary(BinOp, Box<ExprNode>, Box<ExprNode>),
    Call(Func, Vec<ExprNode>),
}

impl ExprNode {
    pub fn constant(v: f64) -> ExprNode {
        ExprNode::Const(v)
    }

    /// Names of all parameters referenced by the tree.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            ExprNode::Param(n) => {
                out.insert(n.clone());
            }
            ExprNode::Neg(a) => a.collect_params(out),
            ExprNode::Binary(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            ExprNode::Call(_, args) => args.iter().for_each(|a| a.collect_params(out)),
            ExprNode::Const(_) | ExprNode::X => {}
        }
    }

    /// Replace parameter references by their values.
    pub fn bind(&self, params: &BTreeMap<String, f64>) -> Result<ExprNode, ExprError> {
        Ok(match self {
            ExprNode::Param(n) => match params.get(n) {
                Some(v) => ExprNode::Const(*v),
                None => return Err(ExprError::UnboundParam(n.clone())),
            },
            ExprNode::Neg(a) => ExprNode::Neg(Box::new(a.bind(params)?)),
            ExprNode::Binary(op, a, b) => {
                ExprNode::Binary(*op, Box::new(a.bind(params)?), Box::new(b.bind(params)?))
            }
            ExprNode::Call(f, args) => ExprNode::Call(
                *f,
                args.iter().map(|a| a.bind(params)).collect::<Result<_, _>>()?,
            ),
            other => other.clone(),
        })
    }

    /// Evaluate a tree with no free parameters. Hot path for the integrators.
    #[inline]
    pub fn eval_bound(&self, x: f64) -> Result<f64, ExprError> {
        let v = match self {
            ExprNode::Const(c) => *c,
            ExprNode::X => x,
            ExprNode::Param(n) => return Err(ExprError::UnboundParam(n.clone())),
            ExprNode::Neg(a) => -a.eval_bound(x)?,
            ExprNode::Binary(op, a, b) => {
                let (a, b) = (a.eval_bound(x)?, b.eval_bound(x)?);
                apply_bin(*op, a, b)?
            }
            ExprNode::Call(f, args) => {
                let a = args[0].eval_bound(x)?;
                let b = if args.len() > 1 { args[1].eval_bound(x)? } else { 0.0 };
                apply_func(*f, a, b)?
            }
        };
        Ok(v)
    }
}

fn apply_bin(op: BinOp, a: f64, b: f64) -> Result<f64, ExprError> {
    let v = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == 0.0 {
                return Err(ExprError::Domain("division by zero".into()));
            }
            a / b
        }
        BinOp::Pow => return power(a, b),
    };
    finite(v, op.symbol())
}

fn power(a: f64, b: f64) -> Result<f64, ExprError> {
    if a < 0.0 && b.fract() != 0.0 {
        return Err(ExprError::Domain(format!("{a} raised to non-integer power {b}")));
    }
    if a == 0.0 && b < 0.0 {
        return Err(ExprError::Domain("zero raised to a negative power".into()));
    }
    let v = if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    };
    finite(v, "^")
}

fn apply_func(f: Func, a: f64, b: f64) -> Result<f64, ExprError> {
    let v = match f {
        Func::Exp => a.exp(),
        Func::Ln => {
            if a <= 0.0 {
                return Err(ExprError::Domain(format!("ln of nonpositive value {a}")));
            }
            a.ln()
        }
        Func::Sqrt => {
            if a < 0.0 {
                return Err(ExprError::Domain(format!("sqrt of negative value {a}")));
            }
            a.sqrt()
        }
        Func::Abs => a.abs(),
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Pow => return power(a, b),
    };
    finite(v, f.name())
}

fn finite(v: f64, what: &str) -> Result<f64, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else if v.is_nan() {
        Err(ExprError::Domain(format!("{what} produced NaN")))
    } else {
        Err(ExprError::Overflow(what.to_string()))
    }
}

/// Evaluate with explicit parameter values.
pub fn eval_expr(e: &ExprNode, x: f64, params: &BTreeMap<String, f64>) -> Result<f64, ExprError> {
    match e {
        ExprNode::Param(n) => params
            .get(n)
            .copied()
            .ok_or_else(|| ExprError::UnboundParam(n.clone())),
        ExprNode::Const(_) | ExprNode::X => e.eval_bound(x),
        ExprNode::Neg(a) => Ok(-eval_expr(a, x, params)?),
        ExprNode::Binary(op, a, b) => apply_bin(*op, eval_expr(a, x, params)?, eval_expr(b, x, params)?),
        ExprNode::Call(f, args) => {
            let a = eval_expr(&args[0], x, params)?;
            let b = if args.len() > 1 { eval_expr(&args[1], x, params)? } else { 0.0 };
            apply_func(*f, a, b)
        }
    }
}

/// Fully parenthesised rendering; re-parses to the same tree.
impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprNode::Const(c) => {
                if *c < 0.0 {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            ExprNode::X => write!(f, "x"),
            ExprNode::Param(n) => write!(f, "{n}"),
            ExprNode::Neg(a) => write!(f, "(-{a})"),
            ExprNode::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            ExprNode::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            let end = t.0 == Tok::End;
            out.push(t);
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len() && (self.src[end].is_ascii_digit() || self.src[end] == b'.') {
                    end += 1;
                }
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut k = end + 1;
                    if k < self.src.len() && (self.src[k] == b'+' || self.src[k] == b'-') {
                        k += 1;
                    }
                    if k < self.src.len() && self.src[k].is_ascii_digit() {
                        while k < self.src.len() && self.src[k].is_ascii_digit() {
                            k += 1;
                        }
                        end = k;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let v: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    msg: format!("malformed number '{text}'"),
                })?;
                self.pos = end;
                return Ok((Tok::Num(v), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos;
                while end < self.src.len() && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_') {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                return Ok((Tok::Ident(name), start));
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                return Err(ExprError::Syntax {
                    offset: start,
                    msg: format!("unexpected character '{}'", c as char),
                })
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    declared: &'a BTreeSet<String>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax { offset: self.offset(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<ExprNode, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ExprNode::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<ExprNode, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = ExprNode::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<ExprNode, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            let inner = self.power()?;
            return Ok(ExprNode::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprNode, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.factor()?;
            return Ok(ExprNode::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprNode, ExprError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(ExprNode::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let Some(f) = Func::from_name(&name) else {
                        return Err(ExprError::Syntax { offset: at, msg: format!("unknown function '{name}'") });
                    };
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "')'")?;
                    if args.len() != f.arity() {
                        return Err(ExprError::Syntax {
                            offset: at,
                            msg: format!("{} takes {} argument(s)", f.name(), f.arity()),
                        });
                    }
                    return Ok(ExprNode::Call(f, args));
                }
                if name == "x" {
                    return Ok(ExprNode::X);
                }
                if !self.declared.contains(&name) {
                    return Err(ExprError::UndeclaredParam(name));
                }
                Ok(ExprNode::Param(name))
            }
            Tok::End => self.err("unexpected end of input"),
            other => self.err(format!("unexpected token {other:?}")),
        }
    }
}

/// Parse `src` into a tree; identifiers other than `x` must be declared.
pub fn parse_expr(src: &str, declared_params: &BTreeSet<String>) -> Result<ExprNode, ExprError> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser { toks, i: 0, declared: declared_params };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn precedence() {
        let e = parse_expr("-x^2", &set(&[])).unwrap();
        assert_eq!(e.eval_bound(3.0).unwrap(), -9.0);
        let e = parse_expr("2^3^2", &set(&[])).unwrap();
        assert_eq!(e.eval_bound(0.0).unwrap(), 512.0);
        let e = parse_expr("2^-1", &set(&[])).unwrap();
        assert_eq!(e.eval_bound(0.0).unwrap(), 0.5);
        let e = parse_expr("1 - 2 - 3", &set(&[])).unwrap();
        assert_eq!(e.eval_bound(0.0).unwrap(), -4.0);
    }

    #[test]
    fn syntax_offset() {
        match parse_expr("2 + * x", &set(&[])) {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn undeclared() {
        assert_eq!(
            parse_expr("x^g", &set(&[])),
            Err(ExprError::UndeclaredParam("g".into()))
        );
    }

    #[test]
    fn scientific_literals() {
        let e = parse_expr("1.5e-3*x", &set(&[])).unwrap();
        assert!((e.eval_bound(2.0).unwrap() - 3e-3).abs() < 1e-18);
    }

    #[test]
    fn overflow_is_error() {
        let e = parse_expr("exp(x)", &set(&[])).unwrap();
        assert!(matches!(e.eval_bound(1000.0), Err(ExprError::Overflow(_))));
    }
}
