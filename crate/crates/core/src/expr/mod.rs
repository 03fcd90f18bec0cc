//! Expression trees for phase and amplitude functions.
//!
//! Expressions are parsed from infix text (see [`parse`]), evaluated at
//! complex points, differentiated symbolically and Taylor-expanded into
//! [`TruncatedSeries`](crate::multiseries::TruncatedSeries).

mod parse;
mod taylor;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

pub use parse::{parse, parse_with, ParseError, ParseErrorKind};
pub use taylor::{gradient_at, taylor, ExpansionPoint, TaylorError};

/// Values closer to zero than this count as hitting a singularity.
pub(crate) const SINGULAR_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Func::Exp => z.exp(),
            Func::Log => z.ln(),
            Func::Sqrt => z.sqrt(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{op} is singular at subexpression `{subexpr}`")]
    Singular { op: &'static str, subexpr: Expr },
    #[error("variable index {index} out of range for {dim} coordinates")]
    VariableOutOfRange { index: usize, dim: usize },
}

impl Expr {
    pub fn constant(c: Complex64) -> Self {
        Expr::Const(c)
    }

    pub fn real(x: f64) -> Self {
        Expr::Const(Complex64::new(x, 0.0))
    }

    pub fn var(j: usize) -> Self {
        Expr::Var(j)
    }

    pub fn func(f: Func, arg: Expr) -> Self {
        Expr::Func(f, Box::new(arg))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, n: i32) -> Self {
        Expr::Pow(Box::new(a), n)
    }

    pub fn neg(a: Expr) -> Self {
        Expr::Neg(Box::new(a))
    }

    /// One more than the largest variable index used, or 0 for constants.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(j) => j + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
            Expr::Pow(a, _) | Expr::Neg(a) | Expr::Func(_, a) => a.arity(),
        }
    }

    /// Replace every `Var(j)` by `values[j]`.
    pub fn substitute(&self, values: &[Expr]) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(j) => values[*j].clone(),
            Expr::Add(a, b) => Expr::add(a.substitute(values), b.substitute(values)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(values), b.substitute(values)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(values), b.substitute(values)),
            Expr::Div(a, b) => Expr::div(a.substitute(values), b.substitute(values)),
            Expr::Pow(a, n) => Expr::pow(a.substitute(values), *n),
            Expr::Neg(a) => Expr::neg(a.substitute(values)),
            Expr::Func(f, a) => Expr::func(*f, a.substitute(values)),
        }
    }

    /// Evaluate, reporting division by zero and logarithms of zero.
    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(j) => *point.get(*j).ok_or(EvalError::VariableOutOfRange {
                index: *j,
                dim: point.len(),
            })?,
            Expr::Add(a, b) => a.eval(point)? + b.eval(point)?,
            Expr::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            Expr::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            Expr::Div(a, b) => {
                let den = b.eval(point)?;
                if den.norm() <= SINGULAR_TOL {
                    return Err(self.singular("division"));
                }
                a.eval(point)? / den
            }
            Expr::Pow(a, n) => {
                let base = a.eval(point)?;
                if *n < 0 && base.norm() <= SINGULAR_TOL {
                    return Err(self.singular("negative power"));
                }
                base.powi(*n)
            }
            Expr::Neg(a) => -a.eval(point)?,
            Expr::Func(f, a) => {
                let z = a.eval(point)?;
                if *f == Func::Log && z.norm() <= SINGULAR_TOL {
                    return Err(self.singular("log"));
                }
                f.apply(z)
            }
        })
    }

    /// Evaluate without singularity checks (infinities and NaN propagate).
    pub fn eval_unchecked(&self, point: &[Complex64]) -> Complex64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(j) => point[*j],
            Expr::Add(a, b) => a.eval_unchecked(point) + b.eval_unchecked(point),
            Expr::Sub(a, b) => a.eval_unchecked(point) - b.eval_unchecked(point),
            Expr::Mul(a, b) => a.eval_unchecked(point) * b.eval_unchecked(point),
            Expr::Div(a, b) => a.eval_unchecked(point) / b.eval_unchecked(point),
            Expr::Pow(a, n) => a.eval_unchecked(point).powi(*n),
            Expr::Neg(a) => -a.eval_unchecked(point),
            Expr::Func(f, a) => f.apply(a.eval_unchecked(point)),
        }
    }

    fn singular(&self, op: &'static str) -> EvalError {
        EvalError::Singular {
            op,
            subexpr: self.clone(),
        }
    }

    /// Symbolic partial derivative along `axis`, with trivial zero/one folding.
    pub fn derivative(&self, axis: usize) -> Expr {
        match self {
            Expr::Const(_) => zero(),
            Expr::Var(j) => {
                if *j == axis {
                    one()
                } else {
                    zero()
                }
            }
            Expr::Add(a, b) => s_add(a.derivative(axis), b.derivative(axis)),
            Expr::Sub(a, b) => s_sub(a.derivative(axis), b.derivative(axis)),
            Expr::Mul(a, b) => s_add(
                s_mul(a.derivative(axis), (**b).clone()),
                s_mul((**a).clone(), b.derivative(axis)),
            ),
            Expr::Div(a, b) => {
                // (a/b)' = a'/b - a b' / b^2
                let first = s_div(a.derivative(axis), (**b).clone());
                let db = b.derivative(axis);
                if is_zero(&db) {
                    first
                } else {
                    s_sub(
                        first,
                        s_div(s_mul((**a).clone(), db), Expr::pow((**b).clone(), 2)),
                    )
                }
            }
            Expr::Pow(a, n) => {
                if *n == 0 {
                    return zero();
                }
                let inner = if *n == 1 {
                    one()
                } else {
                    Expr::pow((**a).clone(), n - 1)
                };
                s_mul(s_mul(Expr::real(*n as f64), inner), a.derivative(axis))
            }
            Expr::Neg(a) => {
                let d = a.derivative(axis);
                if is_zero(&d) {
                    zero()
                } else {
                    Expr::neg(d)
                }
            }
            Expr::Func(f, a) => {
                let da = a.derivative(axis);
                if is_zero(&da) {
                    return zero();
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Exp => Expr::func(Func::Exp, a),
                    Func::Log => Expr::div(one(), a),
                    Func::Sqrt => {
                        Expr::div(one(), Expr::mul(Expr::real(2.0), Expr::func(Func::Sqrt, a)))
                    }
                    Func::Sin => Expr::func(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::func(Func::Sin, a)),
                };
                s_mul(outer, da)
            }
        }
    }

    /// Render as text that [`parse`] reads back into the same tree.
    pub fn to_text(&self, names: &[&str]) -> String {
        let mut out = String::new();
        self.write_text(&mut out, &|j| match names.get(j) {
            Some(n) => String::from(*n),
            None => format!("x{}", j + 1),
        });
        out
    }

    fn write_text(&self, out: &mut String, name: &dyn Fn(usize) -> String) {
        match self {
            Expr::Const(c) => out.push_str(&format_const(*c)),
            Expr::Var(j) => out.push_str(&name(*j)),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => " * ",
                    _ => " / ",
                };
                out.push('(');
                a.write_text(out, name);
                out.push_str(op);
                b.write_text(out, name);
                out.push(')');
            }
            Expr::Pow(a, n) => {
                if matches!(**a, Expr::Var(_)) {
                    a.write_text(out, name);
                } else {
                    out.push('(');
                    a.write_text(out, name);
                    out.push(')');
                }
                out.push_str(&format!("^{n}"));
            }
            Expr::Neg(a) => {
                out.push_str("(-");
                a.write_text(out, name);
                out.push(')');
            }
            Expr::Func(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write_text(out, name);
                out.push(')');
            }
        }
    }
}

fn format_const(c: Complex64) -> String {
    let nonneg = |x: f64| x >= 0.0 && x.is_sign_positive();
    if c.im == 0.0 && nonneg(c.re) {
        format!("{:?}", c.re)
    } else if c.re == 0.0 && nonneg(c.im) {
        format!("{:?}i", c.im)
    } else {
        format!("({:?} + {:?}i)", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&[]))
    }
}

fn zero() -> Expr {
    Expr::Const(Complex64::zero())
}

fn one() -> Expr {
    Expr::Const(Complex64::one())
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.is_zero())
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.is_one())
}

fn s_add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        b
    } else if is_zero(&b) {
        a
    } else {
        Expr::add(a, b)
    }
}

fn s_sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        a
    } else if is_zero(&a) {
        Expr::neg(b)
    } else {
        Expr::sub(a, b)
    }
}

fn s_mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        zero()
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        Expr::mul(a, b)
    }
}

fn s_div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        zero()
    } else {
        Expr::div(a, b)
    }
}

/// Fallback variable names `x1..xd`.
pub fn default_names(dim: usize) -> Vec<String> {
    (0..dim).map(|j| format!("x{}", j + 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_and_derivative() {
        let e = parse("x^2 + i*x^3", &["x"]).unwrap();
        let v = e.eval(&[c(1.0, 0.0)]).unwrap();
        assert_eq!(v, c(1.0, 1.0));
        let d = e.derivative(0);
        assert!((d.eval(&[c(1.0, 0.0)]).unwrap() - c(2.0, 3.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_singular_log() {
        let e = parse("log(1 + t)", &["t"]).unwrap();
        let err = e.eval(&[c(-1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, EvalError::Singular { op: "log", .. }));
    }

    #[test]
    fn substitute_composes() {
        let v = parse("z^2", &["z"]).unwrap();
        let inner = parse("exp(i*t)", &["t"]).unwrap();
        let e = v.substitute(&[inner]);
        let t = 0.3;
        let got = e.eval(&[c(t, 0.0)]).unwrap();
        assert!((got - c(0.0, 2.0 * t).exp()).norm() < 1e-15);
    }

    #[test]
    fn printer_handles_constants() {
        assert_eq!(format_const(c(2.0, 0.0)), "2.0");
        assert_eq!(format_const(c(0.0, 1.5)), "1.5i");
        assert_eq!(format_const(c(-1.0, 2.0)), "(-1.0 + 2.0i)");
        let e = Expr::Const(c(-1.0, 2.0));
        let back = parse(&e.to_text(&[]), &[]).unwrap();
        assert_eq!(back.eval(&[]).unwrap(), c(-1.0, 2.0));
    }
}
