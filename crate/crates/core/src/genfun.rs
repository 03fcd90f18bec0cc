//! Coefficients of `F(z,w) = 1/((1 - w v₁(z))(1 - w v₂(z)))`.
//!
//! Writing `a_rs` as a double Cauchy integral and taking the `w` residues
//! leaves `a_rs ≈ (s+1)/(2π) ∫∫ e^{-sφ(p,t)} dp dt` with
//! `φ(p,t) = iκt - log[(1-p) v₁(e^{it}) + p v₂(e^{it})]` on `[0,1] × [-½,½]`.
//! For `κ = r/s` strictly between `v₁'(1)` and `v₂'(1)` the single stationary
//! point gives `a_rs → 1/|v₁'(1) - v₂'(1)|`; on the edge `κ = v₁'(1)` the limit
//! becomes a normal CDF.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// shadowed by inherent methods whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;
use thiserror::Error;

use crate::expansion::{expand_problem, Domain, ExpandOptions, ExpansionError};
use crate::expr::{taylor, EvalError, ExpansionPoint, Expr, Func, TaylorError};
use crate::multiseries::{MultiIndex, SeriesError, TruncatedSeries};

/// Half-width of the `t` window.
pub const T_WINDOW: f64 = 0.5;
/// Largest `R·S` accepted by [`exact_coefficients`].
pub const MAX_TABLE_SIZE: usize = 1_000_000;
/// Agreement required between the saddle pipeline and the closed form.
pub const PIPELINE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenFunError {
    #[error("v{which}(1) = {value} but must equal 1")]
    NotNormalized { which: u8, value: Complex64 },
    #[error("v{which}'(1) = {value} must be positive real")]
    BadDerivative { which: u8, value: Complex64 },
    #[error("v1'(1) = v2'(1); the two divisors do not separate")]
    EqualDerivatives,
    #[error("kappa = {kappa} sits on the boundary value {edge}; use the boundary limit")]
    Boundary { kappa: f64, edge: f64 },
    #[error(
        "kappa = {kappa} lies outside ({lo}, {hi}); coefficients are exponentially small there"
    )]
    Outside { kappa: f64, lo: f64, hi: f64 },
    #[error("Maclaurin coefficients of v{which} grow like {growth:.3}^n; radius of convergence must exceed 1")]
    RadiusViolation { which: u8, growth: f64 },
    #[error("table of {rows} x {cols} coefficients exceeds the size limit")]
    TooLarge { rows: usize, cols: usize },
    #[error("v1 has zero variance at z = 1; the boundary scaling is degenerate")]
    DegenerateBoundary,
    #[error("saddle pipeline gives {pipeline} but the closed form is {closed}")]
    PipelineMismatch { pipeline: Complex64, closed: f64 },
    #[error("expected one stationary point, found {0}")]
    StationaryCount(usize),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Taylor(#[from] TaylorError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenFunProblem {
    pub v1: Expr,
    pub v2: Expr,
    pub kappa: f64,
    /// Default truncation for coefficient tables.
    pub series_order: usize,
}

fn at_one(e: &Expr) -> Result<Complex64, EvalError> {
    e.eval(&[Complex64::new(1.0, 0.0)])
}

impl GenFunProblem {
    pub fn new(v1: Expr, v2: Expr, kappa: f64, series_order: usize) -> Result<Self, GenFunError> {
        let p = GenFunProblem {
            v1,
            v2,
            kappa,
            series_order,
        };
        for (which, v) in [(1u8, &p.v1), (2, &p.v2)] {
            let value = at_one(v)?;
            if (value - 1.0).norm() > 1e-12 {
                return Err(GenFunError::NotNormalized { which, value });
            }
            let value = at_one(&v.derivative(0))?;
            if value.im.abs() > 1e-12 || value.re <= 0.0 {
                return Err(GenFunError::BadDerivative { which, value });
            }
        }
        let (a, b) = p.derivatives();
        if (a - b).abs() <= 1e-12 {
            return Err(GenFunError::EqualDerivatives);
        }
        Ok(p)
    }

    /// `(v₁'(1), v₂'(1))`.
    pub fn derivatives(&self) -> (f64, f64) {
        let d = |v: &Expr| at_one(&v.derivative(0)).map(|c| c.re).unwrap_or(f64::NAN);
        (d(&self.v1), d(&self.v2))
    }

    /// `|v₁'(1) - v₂'(1)|`.
    pub fn delta(&self) -> f64 {
        let (a, b) = self.derivatives();
        (a - b).abs()
    }

    /// Stationary `p` for the current `κ`.
    pub fn stationary_p(&self) -> f64 {
        let (a, b) = self.derivatives();
        (self.kappa - a) / (b - a)
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        GenFunProblem {
            kappa,
            ..self.clone()
        }
    }

    /// `φ(p,t)` with `p = x0`, `t = x1`.
    pub fn phase(&self) -> Expr {
        let i = Complex64::new(0.0, 1.0);
        let t = Expr::var(1);
        let p = Expr::var(0);
        let z = Expr::func(Func::Exp, Expr::mul(Expr::constant(i), t.clone()));
        let mix = Expr::add(
            Expr::mul(
                Expr::sub(Expr::real(1.0), p.clone()),
                self.v1.substitute(&[z.clone()]),
            ),
            Expr::mul(p, self.v2.substitute(&[z])),
        );
        Expr::sub(
            Expr::mul(Expr::constant(i * self.kappa), t),
            Expr::func(Func::Log, mix),
        )
    }

    pub fn domain(&self) -> Domain {
        Domain {
            bounds: alloc::vec![(0.0, 1.0), (-T_WINDOW, T_WINDOW)],
        }
    }
}

/// `a_rs` for `0 ≤ r ≤ R`, `0 ≤ s ≤ S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub r_max: usize,
    pub s_max: usize,
    data: Vec<Complex64>,
}

impl CoefficientTable {
    pub fn get(&self, r: usize, s: usize) -> Complex64 {
        assert!(
            r <= self.r_max && s <= self.s_max,
            "({r},{s}) outside table"
        );
        self.data[s * (self.r_max + 1) + r]
    }
}

fn maclaurin(v: &Expr, order: usize) -> Result<Vec<Complex64>, GenFunError> {
    let s = taylor(v, &ExpansionPoint::real(&[0.0], order as u32))?;
    Ok((0..=order).map(|k| s.coeff_of(&[k as u16])).collect())
}

fn mul_truncated(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut out = alloc::vec![Complex64::zero(); n];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().take(n - i).enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Root test on the upper half of the coefficients.
fn growth_rate(c: &[Complex64]) -> f64 {
    let n = c.len();
    c.iter()
        .enumerate()
        .skip((n / 2).max(8))
        .filter(|(_, x)| x.norm() > 0.0)
        .map(|(k, x)| x.norm().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
}

/// Exact `a_rs` from `[w^s] F = Σ_{j=0}^s v₁^j v₂^{s-j}`, built by the
/// recurrence `T_s = v₂ T_{s-1} + v₁^s` on Maclaurin series truncated at `z^R`.
pub fn exact_coefficients(
    p: &GenFunProblem,
    r_max: usize,
    s_max: usize,
) -> Result<CoefficientTable, GenFunError> {
    if (r_max + 1) * (s_max + 1) > MAX_TABLE_SIZE {
        return Err(GenFunError::TooLarge {
            rows: r_max + 1,
            cols: s_max + 1,
        });
    }
    let v1 = maclaurin(&p.v1, r_max)?;
    let v2 = maclaurin(&p.v2, r_max)?;
    for (which, c) in [(1u8, &v1), (2, &v2)] {
        let growth = growth_rate(c);
        if growth > 1.05 {
            return Err(GenFunError::RadiusViolation { which, growth });
        }
    }
    let mut data = Vec::with_capacity((r_max + 1) * (s_max + 1));
    let mut t = alloc::vec![Complex64::zero(); r_max + 1];
    t[0] = Complex64::new(1.0, 0.0);
    let mut v1_pow = t.clone();
    data.extend_from_slice(&t);
    for _ in 1..=s_max {
        v1_pow = mul_truncated(&v1_pow, &v1);
        t = mul_truncated(&t, &v2);
        for (x, y) in t.iter_mut().zip(&v1_pow) {
            *x += y;
        }
        data.extend_from_slice(&t);
    }
    Ok(CoefficientTable { r_max, s_max, data })
}

/// `a_rs` for `r, s < n` by inverting the bivariate series of
/// `(1 - w v₁)(1 - w v₂)` directly.
pub fn direct_coefficients(
    p: &GenFunProblem,
    n: usize,
) -> Result<Vec<Vec<Complex64>>, GenFunError> {
    let order = 2 * n as u32;
    let lift = |v: &Expr| -> Result<TruncatedSeries, GenFunError> {
        let s = taylor(v, &ExpansionPoint::real(&[0.0], order))?;
        Ok(TruncatedSeries::from_terms(
            2,
            order,
            s.terms()
                .map(|(k, c)| (MultiIndex::new(&[k.get(0), 0]), *c)),
        ))
    };
    let w = TruncatedSeries::variable(2, order, 1);
    let one = TruncatedSeries::constant(2, order, Complex64::new(1.0, 0.0));
    let f1 = one.sub(&w.mul(&lift(&p.v1)?)?)?;
    let f2 = one.sub(&w.mul(&lift(&p.v2)?)?)?;
    let f = f1.mul(&f2)?.reciprocal()?;
    Ok((0..n)
        .map(|s| (0..n).map(|r| f.coeff_of(&[r as u16, s as u16])).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddlePrediction {
    /// `1/|v₁'(1) - v₂'(1)|`.
    pub value: f64,
    /// `c_0/(2π)` from the stationary-point expansion of `φ`.
    pub pipeline: Complex64,
    pub stationary_point: (f64, f64),
}

/// Leading asymptotic of `a_rs` for `r/s → κ` inside the interval.
pub fn saddle_prediction(p: &GenFunProblem) -> Result<SaddlePrediction, GenFunError> {
    let (a, b) = p.derivatives();
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    for edge in [lo, hi] {
        if (p.kappa - edge).abs() <= 1e-12 * edge.max(1.0) {
            return Err(GenFunError::Boundary {
                kappa: p.kappa,
                edge,
            });
        }
    }
    if p.kappa < lo || p.kappa > hi {
        return Err(GenFunError::Outside {
            kappa: p.kappa,
            lo,
            hi,
        });
    }
    let value = 1.0 / (a - b).abs();
    let phi = p.phase();
    let one = Expr::real(1.0);
    let e = expand_problem(&phi, &one, &p.domain(), None, 0, ExpandOptions::default())?;
    if e.points.len() != 1 {
        return Err(GenFunError::StationaryCount(e.points.len()));
    }
    let pipeline = e.points[0].coefficients[0] / (2.0 * PI);
    if (pipeline - value).norm() > PIPELINE_TOL {
        return Err(GenFunError::PipelineMismatch {
            pipeline,
            closed: value,
        });
    }
    let x = e.points[0].report.real_location();
    Ok(SaddlePrediction {
        value,
        pipeline,
        stationary_point: (x[0], x[1]),
    })
}

/// Standard normal CDF.
pub fn normal_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / core::f64::consts::SQRT_2)
}

/// `Φ(u)/|v₁'(1) - v₂'(1)|`, the limit of `a_rs` near `r/s = v₁'(1)`.
pub fn boundary_limit(p: &GenFunProblem, u: f64) -> f64 {
    normal_cdf(u) / p.delta()
}

/// Scaled distance of `(r, s)` from the edge `r/s = v₁'(1)`:
/// `u = (r/s - v₁'(1)) √s / σ₁`, positive towards the interior, where
/// `σ₁² = v₁''(1) + v₁'(1) - v₁'(1)²` is the variance of the step law `v₁`.
pub fn boundary_u(p: &GenFunProblem, r: usize, s: usize) -> Result<f64, GenFunError> {
    let (a, b) = p.derivatives();
    let offset = r as f64 / s as f64 - a;
    if offset == 0.0 {
        return Ok(0.0);
    }
    let second = at_one(&p.v1.derivative(0).derivative(0))?.re;
    let var = second + a - a * a;
    if var <= 1e-12 {
        return Err(GenFunError::DegenerateBoundary);
    }
    Ok(offset * (s as f64).sqrt() / var.sqrt() * (b - a).signum())
}
