//! Taylor expansion of expression trees into truncated series.
//!
//! The series is built bottom-up: every node combines the series of its
//! children with multiseries arithmetic, and elementary functions are applied
//! through their Taylor coefficients at the child's constant term.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{EvalError, Expr, Func, SINGULAR_TOL};
use crate::multiseries::{SeriesError, TruncatedSeries};

/// Where (and to which order) to expand.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionPoint {
    pub coords: Vec<Complex64>,
    pub order: u32,
}

impl ExpansionPoint {
    pub fn new(coords: Vec<Complex64>, order: u32) -> Self {
        ExpansionPoint { coords, order }
    }

    pub fn real(coords: &[f64], order: u32) -> Self {
        ExpansionPoint {
            coords: coords.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaylorError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Expand `e` around `at.coords`, in the shifted variables `u = x - at.coords`.
///
/// `log` and `sqrt` use the principal branch at the expansion point.
pub fn taylor(e: &Expr, at: &ExpansionPoint) -> Result<TruncatedSeries, TaylorError> {
    let d = at.coords.len();
    if d == 0 || d > crate::multiseries::MAX_DIM {
        return Err(SeriesError::UnsupportedDimension(d).into());
    }
    expand(e, at)
}

fn singular(e: &Expr, op: &'static str) -> TaylorError {
    EvalError::Singular {
        op,
        subexpr: e.clone(),
    }
    .into()
}

fn expand(e: &Expr, at: &ExpansionPoint) -> Result<TruncatedSeries, TaylorError> {
    let d = at.coords.len();
    let n = at.order;
    Ok(match e {
        Expr::Const(c) => TruncatedSeries::constant(d, n, *c),
        Expr::Var(j) => {
            if *j >= d {
                return Err(EvalError::VariableOutOfRange { index: *j, dim: d }.into());
            }
            let v = TruncatedSeries::variable(d, n, *j);
            if n == 0 {
                TruncatedSeries::constant(d, n, at.coords[*j])
            } else {
                v.add_constant(at.coords[*j])
            }
        }
        Expr::Add(a, b) => expand(a, at)?.add(&expand(b, at)?)?,
        Expr::Sub(a, b) => expand(a, at)?.sub(&expand(b, at)?)?,
        Expr::Mul(a, b) => expand(a, at)?.mul(&expand(b, at)?)?,
        Expr::Div(a, b) => {
            let den = expand(b, at)?;
            if den.constant_term().norm() <= SINGULAR_TOL {
                return Err(singular(e, "division"));
            }
            expand(a, at)?.div(&den)?
        }
        Expr::Pow(a, k) => {
            let base = expand(a, at)?;
            if *k >= 0 {
                base.powi(*k as u32)
            } else {
                if base.constant_term().norm() <= SINGULAR_TOL {
                    return Err(singular(e, "negative power"));
                }
                base.reciprocal()?.powi(k.unsigned_abs())
            }
        }
        Expr::Neg(a) => expand(a, at)?.neg(),
        Expr::Func(f, a) => {
            let inner = expand(a, at)?;
            let z0 = inner.constant_term();
            match f {
                Func::Sqrt => {
                    if z0.norm() <= SINGULAR_TOL {
                        return Err(singular(e, "sqrt"));
                    }
                    inner.sqrt_series(z0.sqrt())?
                }
                _ => {
                    if *f == Func::Log && z0.norm() <= SINGULAR_TOL {
                        return Err(singular(e, "log"));
                    }
                    inner.apply_univariate(&function_coefficients(*f, z0, n))
                }
            }
        }
    })
}

/// Taylor coefficients of `f` at `z0`, through degree `n`.
fn function_coefficients(f: Func, z0: Complex64, n: u32) -> Vec<Complex64> {
    let len = n as usize + 1;
    let mut out = Vec::with_capacity(len);
    match f {
        Func::Exp => {
            let mut c = z0.exp();
            for k in 0..len {
                out.push(c);
                c /= (k + 1) as f64;
            }
        }
        Func::Log => {
            out.push(z0.ln());
            let inv = z0.inv();
            let mut p = inv;
            for k in 1..len {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                out.push(p * (sign / k as f64));
                p *= inv;
            }
        }
        Func::Sin | Func::Cos => {
            let (s, c) = (z0.sin(), z0.cos());
            // derivative cycle of sin: sin, cos, -sin, -cos
            let cycle = [s, c, -s, -c];
            let offset = if f == Func::Sin { 0 } else { 1 };
            let mut fact = 1.0;
            for k in 0..len {
                if k > 0 {
                    fact *= k as f64;
                }
                out.push(cycle[(k + offset) % 4] / fact);
            }
        }
        Func::Sqrt => {
            // handled through sqrt_series; kept for completeness
            let r = z0.sqrt();
            let inv = z0.inv();
            let mut binom = Complex64::one();
            let mut p = r;
            for k in 0..len {
                out.push(p * binom);
                binom *= (0.5 - k as f64) / (k as f64 + 1.0);
                p *= inv;
            }
        }
    }
    if out.is_empty() {
        out.push(Complex64::zero());
    }
    out
}

/// Gradient of `e` at `point` by symbolic differentiation.
pub fn gradient_at(e: &Expr, point: &[Complex64]) -> Result<Vec<Complex64>, EvalError> {
    e.eval(point)?;
    (0..point.len())
        .map(|j| e.derivative(j).eval(point))
        .collect()
}
