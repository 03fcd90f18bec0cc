//! Truncated multivariate power series with complex coefficients.
//!
//! A [`TruncatedSeries`] stores the coefficients of all monomials of total
//! degree `<= order` in `dim` variables. Coefficients that are not stored are
//! exactly zero. Binary operations truncate to the smaller of the two orders,
//! so a result never claims more accuracy than its least accurate input.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::CMatrix;

/// Largest number of variables a series may carry.
pub const MAX_DIM: usize = 6;

/// Relative size below which a constant term is treated as zero when a
/// series is required to vanish at the origin.
const ZERO_CONSTANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} series or coordinates, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("inner series {index} has a nonzero constant term")]
    NonzeroConstant { index: usize },
    #[error("linear part of the map is singular")]
    SingularLinearPart,
    #[error("series has a zero constant term")]
    ZeroConstant,
    #[error("branch value does not square to the constant term")]
    BranchMismatch,
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("truncation order too low for this operation")]
    OrderTooLow,
    #[error("dimension {0} is not supported (1..={MAX_DIM})")]
    UnsupportedDimension(usize),
}

/// Exponent vector of a monomial `x_1^{r_1} ... x_d^{r_d}`.
///
/// Ordering is lexicographic on the exponents.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    exps: [u16; MAX_DIM],
    len: u8,
}

impl MultiIndex {
    pub fn new(exps: &[u16]) -> Self {
        assert!(exps.len() <= MAX_DIM, "multi-index longer than MAX_DIM");
        let mut e = [0u16; MAX_DIM];
        e[..exps.len()].copy_from_slice(exps);
        MultiIndex {
            exps: e,
            len: exps.len() as u8,
        }
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "multi-index longer than MAX_DIM");
        MultiIndex {
            exps: [0; MAX_DIM],
            len: dim as u8,
        }
    }

    /// The index of the monomial `x_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut m = Self::zero(dim);
        m.exps[axis] = 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.len as usize
    }

    pub fn degree(&self) -> u32 {
        self.as_slice().iter().map(|&e| e as u32).sum()
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.exps[..self.len as usize]
    }

    pub fn get(&self, axis: usize) -> u16 {
        self.as_slice()[axis]
    }

    pub fn with(mut self, axis: usize, exp: u16) -> Self {
        assert!(axis < self.dim());
        self.exps[axis] = exp;
        self
    }

    pub fn plus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        for (o, e) in out.exps.iter_mut().zip(other.exps.iter()) {
            *o += *e;
        }
        out
    }

    /// `self - other`, or `None` if some component would go negative.
    pub fn checked_minus(&self, other: &Self) -> Option<Self> {
        let mut out = *self;
        for (o, e) in out.exps.iter_mut().zip(other.exps.iter()) {
            *o = o.checked_sub(*e)?;
        }
        Some(out)
    }

    pub fn all_even(&self) -> bool {
        self.as_slice().iter().all(|e| e % 2 == 0)
    }

    /// All multi-indices in `dim` variables of total degree at most `order`.
    pub fn all_up_to(dim: usize, order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = Self::zero(dim);
        fill_indices(&mut out, &mut cur, 0, order);
        out
    }
}

fn fill_indices(out: &mut Vec<MultiIndex>, cur: &mut MultiIndex, axis: usize, budget: u32) {
    if axis == cur.dim() {
        out.push(*cur);
        return;
    }
    for e in 0..=budget {
        cur.exps[axis] = e as u16;
        fill_indices(out, cur, axis + 1, budget - e);
    }
    cur.exps[axis] = 0;
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_slice())
    }
}

/// A power series in `dim` variables known through total degree `order`.
#[derive(Clone, PartialEq)]
pub struct TruncatedSeries {
    dim: usize,
    order: u32,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl TruncatedSeries {
    pub fn zero(dim: usize, order: u32) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        TruncatedSeries {
            dim,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, order: u32, c: Complex64) -> Self {
        let mut s = Self::zero(dim, order);
        s.set(MultiIndex::zero(dim), c);
        s
    }

    /// The coordinate function `x_axis`.
    pub fn variable(dim: usize, order: u32, axis: usize) -> Self {
        assert!(axis < dim);
        let mut s = Self::zero(dim, order);
        s.set(MultiIndex::unit(dim, axis), Complex64::one());
        s
    }

    /// Build from `(exponents, coefficient)` pairs; terms above `order` are dropped
    /// and repeated exponents are summed.
    pub fn from_terms<I>(dim: usize, order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut s = Self::zero(dim, order);
        for (idx, c) in terms {
            assert_eq!(
                idx.dim(),
                dim,
                "term dimension differs from series dimension"
            );
            if idx.degree() <= order {
                *s.coeffs.entry(idx).or_insert_with(Complex64::zero) += c;
            }
        }
        s.coeffs.retain(|_, c| !c.is_zero());
        s
    }

    /// 1-D convenience: coefficients of `1, x, x^2, ...`.
    pub fn univariate(order: u32, coeffs: &[Complex64]) -> Self {
        Self::from_terms(
            1,
            order,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (MultiIndex::new(&[k as u16]), c)),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, idx: &MultiIndex) -> Complex64 {
        self.coeffs
            .get(idx)
            .copied()
            .unwrap_or_else(Complex64::zero)
    }

    /// Coefficient addressed by a raw exponent slice.
    pub fn coeff_of(&self, exps: &[u16]) -> Complex64 {
        self.coeff(&MultiIndex::new(exps))
    }

    pub fn set(&mut self, idx: MultiIndex, c: Complex64) {
        assert_eq!(idx.dim(), self.dim);
        if idx.degree() > self.order {
            return;
        }
        if c.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, c);
        }
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&MultiIndex::zero(self.dim))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Lower the truncation order, discarding terms above it.
    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        TruncatedSeries {
            dim: self.dim,
            order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.degree() <= order)
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    /// Part of the series of exactly total degree `deg`.
    pub fn homogeneous_part(&self, deg: u32) -> Self {
        TruncatedSeries {
            dim: self.dim,
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.degree() == deg)
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    /// Drop coefficients smaller than `rel` times the largest magnitude.
    pub fn prune(&self, rel: f64) -> Self {
        let cut = rel * self.max_abs();
        let mut out = self.clone();
        out.coeffs.retain(|_, c| c.norm() >= cut && !c.is_zero());
        out
    }

    /// Largest coefficient difference over the common truncation order.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        match self.sub(other) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    fn check_dim(&self, other: &Self) -> Result<(), SeriesError> {
        if self.dim != other.dim {
            return Err(SeriesError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_dim(other)?;
        let order = self.order.min(other.order);
        let mut out = self.truncate(order);
        for (k, v) in other.coeffs.iter().filter(|(k, _)| k.degree() <= order) {
            *out.coeffs.entry(*k).or_insert_with(Complex64::zero) += *v;
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-Complex64::one())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        if c.is_zero() {
            out.coeffs.clear();
            return out;
        }
        for v in out.coeffs.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn add_constant(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        let z = MultiIndex::zero(self.dim);
        let v = out.constant_term() + c;
        out.set(z, v);
        out
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_dim(other)?;
        let order = self.order.min(other.order);
        let a = self.by_degree(order);
        let b = other.by_degree(order);
        let mut out: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (da, ta) in a.iter().enumerate() {
            for (ka, va) in ta {
                for tb in b.iter().take(order as usize - da + 1) {
                    for (kb, vb) in tb {
                        *out.entry(ka.plus(kb)).or_insert_with(Complex64::zero) += va * vb;
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(TruncatedSeries {
            dim: self.dim,
            order,
            coeffs: out,
        })
    }

    fn by_degree(&self, order: u32) -> Vec<Vec<(MultiIndex, Complex64)>> {
        let mut buckets = vec![Vec::new(); order as usize + 1];
        for (k, v) in &self.coeffs {
            let d = k.degree();
            if d <= order {
                buckets[d as usize].push((*k, *v));
            }
        }
        buckets
    }

    /// Multiply by the coordinate `x_axis`. The result is known one degree further.
    pub fn mul_var(&self, axis: usize) -> Result<Self, SeriesError> {
        if axis >= self.dim {
            return Err(SeriesError::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        let unit = MultiIndex::unit(self.dim, axis);
        Ok(TruncatedSeries {
            dim: self.dim,
            order: self.order + 1,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (k.plus(&unit), *v))
                .collect(),
        })
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut result = Self::constant(self.dim, self.order, Complex64::one());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same dimension");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same dimension");
            }
        }
        result
    }

    /// `g(f)` where `taylor[k]` is the k-th Taylor coefficient of `g` at `f(0)`.
    ///
    /// `taylor` must have at least `order + 1` entries; extra entries are ignored.
    pub fn apply_univariate(&self, taylor: &[Complex64]) -> Self {
        let f0 = self.constant_term();
        let u = self.add_constant(-f0);
        let n = (self.order as usize).min(taylor.len().saturating_sub(1));
        let mut acc = Self::constant(self.dim, self.order, taylor[n]);
        for k in (0..n).rev() {
            acc = acc.mul(&u).expect("same dimension").add_constant(taylor[k]);
        }
        acc
    }

    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let f0 = self.constant_term();
        if f0.is_zero() {
            return Err(SeriesError::ZeroConstant);
        }
        let inv = f0.inv();
        let mut t = Vec::with_capacity(self.order as usize + 1);
        let mut p = inv;
        for _ in 0..=self.order {
            t.push(p);
            p = -p * inv;
        }
        Ok(self.apply_univariate(&t))
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        self.mul(&other.reciprocal()?)
    }

    /// Square root with the constant term pinned to `branch`.
    pub fn sqrt_series(&self, branch: Complex64) -> Result<Self, SeriesError> {
        let f0 = self.constant_term();
        if f0.is_zero() {
            return Err(SeriesError::ZeroConstant);
        }
        if (branch * branch - f0).norm() > 1e-10 * f0.norm() {
            return Err(SeriesError::BranchMismatch);
        }
        // sqrt(f0 + u) = branch * sum_k binom(1/2, k) (u / f0)^k
        let inv = f0.inv();
        let mut t = Vec::with_capacity(self.order as usize + 1);
        let mut binom = 1.0;
        let mut p = branch;
        for k in 0..=self.order {
            t.push(p * binom);
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
            p *= inv;
        }
        Ok(self.apply_univariate(&t))
    }

    /// Formal partial derivative along `axis` (0-based).
    pub fn diff(&self, axis: usize) -> Result<Self, SeriesError> {
        if axis >= self.dim {
            return Err(SeriesError::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        if self.order == 0 {
            return Err(SeriesError::OrderTooLow);
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| k.get(axis) > 0)
            .map(|(k, v)| {
                let e = k.get(axis);
                (k.with(axis, e - 1), v * e as f64)
            })
            .collect();
        Ok(TruncatedSeries {
            dim: self.dim,
            order: self.order - 1,
            coeffs,
        })
    }

    /// Evaluate the retained polynomial at `point`.
    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64, SeriesError> {
        if point.len() != self.dim {
            return Err(SeriesError::LengthMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        let powers: Vec<Vec<Complex64>> = point
            .iter()
            .map(|&p| {
                let mut v = Vec::with_capacity(self.order as usize + 1);
                let mut acc = Complex64::one();
                for _ in 0..=self.order {
                    v.push(acc);
                    acc *= p;
                }
                v
            })
            .collect();
        Ok(self
            .coeffs
            .iter()
            .map(|(k, c)| {
                k.as_slice()
                    .iter()
                    .enumerate()
                    .fold(*c, |acc, (j, &e)| acc * powers[j][e as usize])
            })
            .sum())
    }

    /// `self(inner_1, ..., inner_d)`; every inner series must vanish at the origin.
    pub fn compose(&self, inner: &[TruncatedSeries]) -> Result<Self, SeriesError> {
        if inner.len() != self.dim {
            return Err(SeriesError::LengthMismatch {
                expected: self.dim,
                found: inner.len(),
            });
        }
        let out_dim = inner[0].dim;
        let mut order = self.order;
        let mut cleaned = Vec::with_capacity(inner.len());
        for (i, g) in inner.iter().enumerate() {
            if g.dim != out_dim {
                return Err(SeriesError::DimensionMismatch {
                    left: out_dim,
                    right: g.dim,
                });
            }
            let c0 = g.constant_term();
            if c0.norm() > ZERO_CONSTANT_TOL * g.max_abs().max(1.0) {
                return Err(SeriesError::NonzeroConstant { index: i });
            }
            let mut g = g.clone();
            g.coeffs.remove(&MultiIndex::zero(out_dim));
            order = order.min(g.order);
            cleaned.push(g.truncate(order));
        }
        let terms: Vec<(MultiIndex, Complex64)> = self
            .coeffs
            .iter()
            .filter(|(k, _)| k.degree() <= order)
            .map(|(k, v)| (*k, *v))
            .collect();
        Ok(horner(&terms, 0, &cleaned, out_dim, order))
    }
}

/// Nested Horner evaluation of `terms` on the variables `var..` replaced by `inner`.
fn horner(
    terms: &[(MultiIndex, Complex64)],
    var: usize,
    inner: &[TruncatedSeries],
    dim: usize,
    order: u32,
) -> TruncatedSeries {
    if var == inner.len() {
        let c: Complex64 = terms.iter().map(|(_, v)| *v).sum();
        return TruncatedSeries::constant(dim, order, c);
    }
    let max_e = terms
        .iter()
        .map(|(k, _)| k.get(var))
        .max()
        .unwrap_or(0)
        .min(order as u16);
    let mut acc = TruncatedSeries::zero(dim, order);
    for e in (0..=max_e).rev() {
        if e < max_e {
            acc = acc.mul(&inner[var]).expect("same dimension");
        }
        let slice: Vec<(MultiIndex, Complex64)> = terms
            .iter()
            .filter(|(k, _)| k.get(var) == e)
            .copied()
            .collect();
        if !slice.is_empty() {
            let part = horner(&slice, var + 1, inner, dim, order);
            acc = acc.add(&part).expect("same dimension");
        }
    }
    acc
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedSeries(d={}, N={}) {{", self.dim, self.order)?;
        for (k, v) in &self.coeffs {
            write!(f, " {:?}: {}{:+}i,", k, v.re, v.im)?;
        }
        write!(f, " }}")
    }
}

/// The identity map `y -> y` as `dim` series.
pub fn identity_map(dim: usize, order: u32) -> Vec<TruncatedSeries> {
    (0..dim)
        .map(|j| TruncatedSeries::variable(dim, order, j))
        .collect()
}

/// The linear map `x_i = sum_j m[i][j] y_j` as series in `y`.
pub fn linear_map(m: &CMatrix, order: u32) -> Vec<TruncatedSeries> {
    let d = m.dim();
    (0..d)
        .map(|i| {
            TruncatedSeries::from_terms(
                d,
                order,
                (0..d).map(|j| (MultiIndex::unit(d, j), m[(i, j)])),
            )
        })
        .collect()
}

/// Compose two maps: `(outer ∘ inner)_i = outer_i(inner)`.
pub fn compose_map(
    outer: &[TruncatedSeries],
    inner: &[TruncatedSeries],
) -> Result<Vec<TruncatedSeries>, SeriesError> {
    outer.iter().map(|f| f.compose(inner)).collect()
}

/// Linear coefficients `m[i][j] = [x_j] f_i`.
pub fn linear_part(f: &[TruncatedSeries]) -> CMatrix {
    let d = f.len();
    let mut m = CMatrix::zeros(d);
    for (i, fi) in f.iter().enumerate() {
        for j in 0..d {
            m[(i, j)] = fi.coeff(&MultiIndex::unit(fi.dim(), j));
        }
    }
    m
}

/// Series reversion: `g` with `f ∘ g = id` through the common truncation order.
///
/// Works degree by degree: with `L` the linear part and `R = f - L`,
/// iterate `g <- L^{-1} (y - R ∘ g)`; each pass fixes one more degree.
pub fn invert_map(f: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>, SeriesError> {
    let d = f.len();
    if d == 0 {
        return Err(SeriesError::LengthMismatch {
            expected: 1,
            found: 0,
        });
    }
    let mut order = u32::MAX;
    for (i, fi) in f.iter().enumerate() {
        if fi.dim() != d {
            return Err(SeriesError::DimensionMismatch {
                left: d,
                right: fi.dim(),
            });
        }
        if fi.constant_term().norm() > ZERO_CONSTANT_TOL * fi.max_abs().max(1.0) {
            return Err(SeriesError::NonzeroConstant { index: i });
        }
        order = order.min(fi.order());
    }
    if order == 0 {
        return Err(SeriesError::OrderTooLow);
    }
    let lin = linear_part(f);
    let lin_inv = lin.inverse().ok_or(SeriesError::SingularLinearPart)?;
    let nonlinear: Vec<TruncatedSeries> = f
        .iter()
        .map(|fi| {
            let mut r = fi.truncate(order);
            r.coeffs.retain(|k, _| k.degree() >= 2);
            r
        })
        .collect();
    let y = identity_map(d, order);
    let mut g = linear_map(&lin_inv, order);
    for _ in 1..order {
        let r = compose_map(&nonlinear, &g)?;
        let rhs: Vec<TruncatedSeries> = y
            .iter()
            .zip(r.iter())
            .map(|(yi, ri)| yi.sub(ri).expect("same dimension"))
            .collect();
        g = apply_matrix(&lin_inv, &rhs);
    }
    Ok(g)
}

/// `out_i = sum_j m[i][j] v_j`.
pub fn apply_matrix(m: &CMatrix, v: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
    let d = m.dim();
    (0..d)
        .map(|i| {
            let mut acc = TruncatedSeries::zero(v[0].dim(), v[0].order());
            for (j, vj) in v.iter().enumerate() {
                let c = m[(i, j)];
                if !c.is_zero() {
                    acc = acc.add(&vj.scale(c)).expect("same dimension");
                }
            }
            acc
        })
        .collect()
}

/// Determinant of a square matrix of series by cofactor expansion.
pub fn series_det(m: &[Vec<TruncatedSeries>]) -> TruncatedSeries {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let dim = m[0][0].dim();
    let order = m.iter().flatten().map(|s| s.order()).min().unwrap_or(0);
    let mut acc = TruncatedSeries::zero(dim, order);
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<TruncatedSeries>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != col)
                    .map(|(_, s)| s.clone())
                    .collect()
            })
            .collect();
        let term = m[0][col].mul(&series_det(&minor)).expect("same dimension");
        acc = if col % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        }
        .expect("same dimension");
    }
    acc
}

/// Jacobian matrix `[∂ f_i / ∂ y_j]` of a map given as series.
pub fn jacobian(f: &[TruncatedSeries]) -> Result<Vec<Vec<TruncatedSeries>>, SeriesError> {
    f.iter()
        .map(|fi| (0..fi.dim()).map(|j| fi.diff(j)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn uni(order: u32, cs: &[f64]) -> TruncatedSeries {
        let v: Vec<C> = cs.iter().map(|&x| c(x, 0.0)).collect();
        TruncatedSeries::univariate(order, &v)
    }

    fn assert_close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) {
        let d = a.max_abs_diff(b);
        assert!(d <= tol, "series differ by {d}: {a:?} vs {b:?}");
    }

    #[test]
    fn add_cancels_and_identity() {
        let a = uni(3, &[1.0, 1.0]);
        let b = uni(3, &[2.0, -1.0]);
        assert_eq!(a.add(&b).unwrap(), uni(3, &[3.0]));
        let z = TruncatedSeries::zero(1, 3);
        assert_eq!(a.add(&z).unwrap(), a);
    }

    #[test]
    fn add_disjoint_supports() {
        let x2 = TruncatedSeries::from_terms(2, 2, [(MultiIndex::new(&[2, 0]), c(1.0, 0.0))]);
        let iy2 = TruncatedSeries::from_terms(2, 2, [(MultiIndex::new(&[0, 2]), c(0.0, 1.0))]);
        let s = x2.add(&iy2).unwrap();
        assert_eq!(s.coeff_of(&[2, 0]), c(1.0, 0.0));
        assert_eq!(s.coeff_of(&[0, 2]), c(0.0, 1.0));
        assert_eq!(s.num_terms(), 2);
    }

    #[test]
    fn add_dimension_mismatch() {
        let a = TruncatedSeries::zero(1, 2);
        let b = TruncatedSeries::zero(2, 2);
        assert!(matches!(
            a.add(&b),
            Err(SeriesError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            a.mul(&b),
            Err(SeriesError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mul_examples() {
        let p = uni(2, &[1.0, 1.0]).mul(&uni(2, &[1.0, -1.0])).unwrap();
        assert_eq!(p, uni(2, &[1.0, 0.0, -1.0]));

        let x = TruncatedSeries::variable(1, 1, 0);
        assert!(x.mul(&x).unwrap().is_zero());

        // (1 + ix)^2 = 1 + 2ix - x^2, checked against the binomial expansion
        let f = TruncatedSeries::univariate(2, &[c(1.0, 0.0), c(0.0, 1.0)]);
        let sq = f.mul(&f).unwrap();
        let binom = [1.0, 2.0, 1.0];
        for (k, b) in binom.iter().enumerate() {
            assert_eq!(sq.coeff_of(&[k as u16]), C::i().powu(k as u32) * *b);
        }
    }

    #[test]
    fn mul_takes_min_order() {
        let a = uni(5, &[1.0, 1.0]);
        let b = uni(2, &[1.0, 1.0]);
        assert_eq!(a.mul(&b).unwrap().order(), 2);
    }

    #[test]
    fn compose_examples() {
        // x^2 at (x+y)
        let outer = uni(2, &[0.0, 0.0, 1.0]);
        let inner = TruncatedSeries::variable(2, 2, 0)
            .add(&TruncatedSeries::variable(2, 2, 1))
            .unwrap();
        let r = outer.compose(&[inner]).unwrap();
        assert_eq!(r.coeff_of(&[2, 0]), c(1.0, 0.0));
        assert_eq!(r.coeff_of(&[1, 1]), c(2.0, 0.0));
        assert_eq!(r.coeff_of(&[0, 2]), c(1.0, 0.0));

        // identity outer
        let f = uni(4, &[0.0, 1.0, 3.0, -2.0]);
        let id = uni(4, &[0.0, 1.0]);
        assert_eq!(id.compose(&[f.clone()]).unwrap(), f);

        // exp(x) truncated at 4 composed with x^2: term-by-term substitution
        let exp4 = uni(4, &[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0]);
        let r = exp4.compose(&[uni(4, &[0.0, 0.0, 1.0])]).unwrap();
        let mut oracle = vec![0.0; 5];
        for (k, ck) in [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0].iter().enumerate() {
            if 2 * k <= 4 {
                oracle[2 * k] += ck;
            }
        }
        assert_close(&r, &uni(4, &oracle), 1e-15);
    }

    #[test]
    fn compose_errors() {
        let outer = uni(2, &[0.0, 1.0]);
        let bad = uni(2, &[1.0, 1.0]);
        assert_eq!(
            outer.compose(&[bad]),
            Err(SeriesError::NonzeroConstant { index: 0 })
        );
        let x = uni(2, &[0.0, 1.0]);
        assert!(matches!(
            outer.compose(&[x.clone(), x]),
            Err(SeriesError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn invert_examples() {
        let g = invert_map(&[uni(3, &[0.0, 2.0])]).unwrap();
        assert_close(&g[0], &uni(3, &[0.0, 0.5]), 1e-15);

        // x + x^2: Lagrange inversion gives [y^n] g = (-1)^{n-1} C(2n-2, n-1)/n
        let g = invert_map(&[uni(3, &[0.0, 1.0, 1.0])]).unwrap();
        let lagrange = |n: u64| -> f64 {
            let mut binom = 1.0;
            for k in 0..(n - 1) {
                binom = binom * (2 * n - 2 - k) as f64 / (k + 1) as f64;
            }
            let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binom / n as f64
        };
        assert_close(
            &g[0],
            &uni(3, &[0.0, lagrange(1), lagrange(2), lagrange(3)]),
            1e-14,
        );
        assert_close(&g[0], &uni(3, &[0.0, 1.0, -1.0, 2.0]), 1e-14);

        // unipotent linear [x + y, y]
        let x = TruncatedSeries::variable(2, 2, 0);
        let y = TruncatedSeries::variable(2, 2, 1);
        let g = invert_map(&[x.add(&y).unwrap(), y.clone()]).unwrap();
        assert_close(&g[0], &x.sub(&y).unwrap(), 1e-15);
        assert_close(&g[1], &y, 1e-15);
    }

    #[test]
    fn invert_singular() {
        let x = TruncatedSeries::variable(2, 2, 0);
        assert_eq!(
            invert_map(&[x.clone(), x]),
            Err(SeriesError::SingularLinearPart)
        );
    }

    #[test]
    fn sqrt_examples() {
        let f = uni(2, &[1.0, 2.0, 1.0]);
        assert_close(
            &f.sqrt_series(c(1.0, 0.0)).unwrap(),
            &uni(2, &[1.0, 1.0]),
            1e-15,
        );

        let four = uni(3, &[4.0]);
        assert_close(
            &four.sqrt_series(c(-2.0, 0.0)).unwrap(),
            &uni(3, &[-2.0]),
            1e-15,
        );

        // binomial series of (1 + x)^{1/2}
        let g = uni(3, &[1.0, 1.0]).sqrt_series(c(1.0, 0.0)).unwrap();
        assert_close(&g, &uni(3, &[1.0, 0.5, -0.125, 0.0625]), 1e-15);
    }

    #[test]
    fn sqrt_errors() {
        assert_eq!(
            uni(3, &[0.0, 1.0]).sqrt_series(c(0.0, 0.0)),
            Err(SeriesError::ZeroConstant)
        );
        assert_eq!(
            uni(3, &[4.0]).sqrt_series(c(3.0, 0.0)),
            Err(SeriesError::BranchMismatch)
        );
    }

    #[test]
    fn diff_examples() {
        let x2y = TruncatedSeries::from_terms(2, 4, [(MultiIndex::new(&[2, 1]), c(1.0, 0.0))]);
        let dx = x2y.diff(0).unwrap();
        assert_eq!(dx.coeff_of(&[1, 1]), c(2.0, 0.0));
        assert_eq!(dx.order(), 3);
        let x2 = TruncatedSeries::from_terms(2, 4, [(MultiIndex::new(&[2, 0]), c(1.0, 0.0))]);
        assert!(x2.diff(1).unwrap().is_zero());
        let ix3 =
            TruncatedSeries::univariate(4, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(ix3.diff(0).unwrap().coeff_of(&[2]), c(0.0, 3.0));
        assert_eq!(
            x2.diff(2),
            Err(SeriesError::AxisOutOfRange { axis: 2, dim: 2 })
        );
    }

    #[test]
    fn eval_examples() {
        let f = uni(2, &[1.0, 1.0, 1.0]);
        assert_eq!(f.eval(&[c(1.0, 0.0)]).unwrap(), c(3.0, 0.0));
        let g = uni(3, &[7.0, 2.0, -1.0]);
        assert_eq!(g.eval(&[c(0.0, 0.0)]).unwrap(), c(7.0, 0.0));
        // (x + iy)^2 at (1, 1) = 2i
        let x = TruncatedSeries::variable(2, 2, 0);
        let iy = TruncatedSeries::variable(2, 2, 1).scale(C::i());
        let s = x.add(&iy).unwrap();
        let sq = s.mul(&s).unwrap();
        let v = sq.eval(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((v - c(0.0, 2.0)).norm() < 1e-15);
        assert!(matches!(
            sq.eval(&[c(1.0, 0.0)]),
            Err(SeriesError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn mul_var_raises_order() {
        let f = uni(2, &[1.0, 1.0]);
        let g = f.mul_var(0).unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g, uni(3, &[0.0, 1.0, 1.0]));
    }

    #[test]
    fn all_up_to_counts() {
        assert_eq!(MultiIndex::all_up_to(3, 8).len(), 165);
        assert_eq!(MultiIndex::all_up_to(1, 4).len(), 5);
    }

    #[test]
    fn series_det_2x2() {
        let x = TruncatedSeries::variable(1, 3, 0);
        let one = TruncatedSeries::constant(1, 3, c(1.0, 0.0));
        let m = vec![vec![one.clone(), x.clone()], vec![x.clone(), one.clone()]];
        let d = series_det(&m);
        assert_eq!(d, uni(3, &[1.0, 0.0, -1.0]));
    }
}
