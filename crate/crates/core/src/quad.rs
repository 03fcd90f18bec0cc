//! Adaptive tensor-product Gauss–Kronrod quadrature over boxes (d ≤ 3).
//!
//! Each cell is integrated with the 15-point Kronrod rule on every axis. The
//! error along one axis is estimated by swapping that axis to the embedded
//! 7-point Gauss rule; the cell error is the sum over axes and the cell with
//! the largest error is bisected along its worst axis.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
// shadowed by inherent methods whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;
use thiserror::Error;

use crate::expr::Expr;

pub const MAX_QUAD_DIM: usize = 3;

/// Default evaluation budget.
pub const MAX_EVALUATIONS: u64 = 10_000_000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Nodes on [-1, 1] with Kronrod and Gauss weights (Gauss weight 0 off the Gauss nodes).
fn rule() -> ([f64; 15], [f64; 15], [f64; 15]) {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for i in 0..7 {
        let g = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        x[2 * i] = -XGK[i];
        x[2 * i + 1] = XGK[i];
        wk[2 * i] = WGK[i];
        wk[2 * i + 1] = WGK[i];
        wg[2 * i] = g;
        wg[2 * i + 1] = g;
    }
    x[14] = 0.0;
    wk[14] = WGK[7];
    wg[14] = WG[3];
    (x, wk, wg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evaluations: u64,
    /// Cells per axis before adapting; 0 picks 16, 8 or 4 for d = 1, 2, 3.
    pub initial_divisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 0.0,
            max_evaluations: MAX_EVALUATIONS,
            initial_divisions: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("evaluation budget exceeded; best estimate {} ± {:.3e}", .0.value, .0.abs_error_estimate)]
    BudgetExceeded(QuadratureResult),
    #[error("quadrature supports 1..={MAX_QUAD_DIM} dimensions, got {0}")]
    UnsupportedDimension(usize),
    #[error("integration bounds must be finite with lo < hi")]
    BadBounds,
    #[error("need at least 3 positive error values to fit a slope, have {0}")]
    TooFewPoints(usize),
}

#[derive(Clone)]
struct Cell {
    lo: [f64; MAX_QUAD_DIM],
    hi: [f64; MAX_QUAD_DIM],
    value: Complex64,
    err: f64,
    axis_err: [f64; MAX_QUAD_DIM],
    id: u64,
}

struct Pending(Cell);

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .err
            .total_cmp(&other.0.err)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

struct Integrator<'a, F> {
    f: &'a F,
    d: usize,
    x: [f64; 15],
    wk: [f64; 15],
    wg: [f64; 15],
    evals: u64,
}

impl<F: Fn(&[f64]) -> Complex64> Integrator<'_, F> {
    fn cell(&mut self, lo: [f64; MAX_QUAD_DIM], hi: [f64; MAX_QUAD_DIM], id: u64) -> Cell {
        let d = self.d;
        let mut mid = [0.0; MAX_QUAD_DIM];
        let mut half = [0.0; MAX_QUAD_DIM];
        for a in 0..d {
            mid[a] = 0.5 * (lo[a] + hi[a]);
            half[a] = 0.5 * (hi[a] - lo[a]);
        }
        let jac: f64 = half[..d].iter().product();
        let total = 15usize.pow(d as u32);
        let mut k = Complex64::zero();
        let mut g_axis = [Complex64::zero(); MAX_QUAD_DIM];
        let mut abs_sum = 0.0;
        let mut idx = [0usize; MAX_QUAD_DIM];
        let mut p = [0.0; MAX_QUAD_DIM];
        for flat in 0..total {
            let mut rem = flat;
            for a in 0..d {
                idx[a] = rem % 15;
                rem /= 15;
                p[a] = mid[a] + half[a] * self.x[idx[a]];
            }
            let v = (self.f)(&p[..d]);
            let v = if v.is_finite() { v } else { Complex64::zero() };
            let wk: f64 = idx[..d].iter().map(|&i| self.wk[i]).product();
            k += v * wk;
            abs_sum += v.norm() * wk;
            for a in 0..d {
                let i = idx[a];
                if self.wg[i] != 0.0 {
                    g_axis[a] += v * (wk / self.wk[i] * self.wg[i]);
                }
            }
        }
        self.evals += total as u64;
        let mut axis_err = [0.0; MAX_QUAD_DIM];
        let mut err = 0.0;
        for a in 0..d {
            axis_err[a] = ((k - g_axis[a]) * jac).norm();
            // below this the estimate is roundoff, not truncation
            let floor = 50.0 * f64::EPSILON * abs_sum * jac;
            if axis_err[a] < floor {
                axis_err[a] = 0.0;
            }
            err += axis_err[a];
        }
        Cell {
            lo,
            hi,
            value: k * jac,
            err,
            axis_err,
            id,
        }
    }
}

/// Integrate an arbitrary complex function over a box.
pub fn integrate_fn<F>(
    f: &F,
    bounds: &[(f64, f64)],
    cfg: &QuadConfig,
) -> Result<QuadratureResult, QuadError>
where
    F: Fn(&[f64]) -> Complex64,
{
    let d = bounds.len();
    if d == 0 || d > MAX_QUAD_DIM {
        return Err(QuadError::UnsupportedDimension(d));
    }
    if bounds
        .iter()
        .any(|&(a, b)| !(a.is_finite() && b.is_finite() && a < b))
    {
        return Err(QuadError::BadBounds);
    }
    let (x, wk, wg) = rule();
    let mut it = Integrator {
        f,
        d,
        x,
        wk,
        wg,
        evals: 0,
    };
    let mut lo = [0.0; MAX_QUAD_DIM];
    let mut hi = [0.0; MAX_QUAD_DIM];
    for (a, &(l, h)) in bounds.iter().enumerate() {
        lo[a] = l;
        hi[a] = h;
    }
    let divisions = match cfg.initial_divisions {
        0 => [16, 8, 4][d - 1],
        n => n,
    };
    let mut next_id = 0u64;
    let mut done: Vec<Cell> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::zero();
    let mut total_err = 0.0;
    for flat in 0..divisions.pow(d as u32) {
        let mut rem = flat;
        let mut clo = [0.0; MAX_QUAD_DIM];
        let mut chi = [0.0; MAX_QUAD_DIM];
        for a in 0..d {
            let k = rem % divisions;
            rem /= divisions;
            let w = (hi[a] - lo[a]) / divisions as f64;
            clo[a] = lo[a] + k as f64 * w;
            chi[a] = if k + 1 == divisions {
                hi[a]
            } else {
                lo[a] + (k + 1) as f64 * w
            };
        }
        let c = it.cell(clo, chi, next_id);
        next_id += 1;
        total += c.value;
        total_err += c.err;
        if c.err == 0.0 {
            done.push(c);
        } else {
            heap.push(Pending(c));
        }
    }

    let per_cell = 15u64.pow(d as u32);
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * total.norm());
        if total_err <= target {
            break;
        }
        let Some(Pending(worst)) = heap.pop() else {
            break;
        };
        if it.evals + 2 * per_cell > cfg.max_evaluations {
            heap.push(Pending(worst));
            let result = finish(done, heap, it.evals);
            return Err(QuadError::BudgetExceeded(result));
        }
        let axis = (0..d)
            .max_by(|&a, &b| worst.axis_err[a].total_cmp(&worst.axis_err[b]))
            .unwrap_or(0);
        let m = 0.5 * (worst.lo[axis] + worst.hi[axis]);
        let mut hi_left = worst.hi;
        hi_left[axis] = m;
        let mut lo_right = worst.lo;
        lo_right[axis] = m;
        let left = it.cell(worst.lo, hi_left, next_id);
        let right = it.cell(lo_right, worst.hi, next_id + 1);
        next_id += 2;
        total = total - worst.value + left.value + right.value;
        total_err = total_err - worst.err + left.err + right.err;
        for c in [left, right] {
            if c.err == 0.0 {
                done.push(c);
            } else {
                heap.push(Pending(c));
            }
        }
        // refresh running sums now and then to stop drift
        if next_id % 1024 == 0 {
            total = done.iter().map(|c| c.value).sum::<Complex64>()
                + heap.iter().map(|c| c.0.value).sum::<Complex64>();
            total_err = heap.iter().map(|c| c.0.err).sum();
        }
    }
    Ok(finish(done, heap, it.evals))
}

/// Sum all cells in creation order so the result does not depend on heap layout.
fn finish(done: Vec<Cell>, heap: BinaryHeap<Pending>, evals: u64) -> QuadratureResult {
    let mut cells: Vec<Cell> = done;
    cells.extend(heap.into_iter().map(|p| p.0));
    cells.sort_by_key(|c| c.id);
    let mut value = Complex64::zero();
    let mut err = 0.0;
    for c in &cells {
        value += c.value;
        err += c.err;
    }
    QuadratureResult {
        value,
        abs_error_estimate: err,
        evaluations: evals,
    }
}

/// `∫_box e^{-λφ(x)} A(x) dx` to absolute tolerance `tol`.
pub fn integrate(
    phi: &Expr,
    a: &Expr,
    bounds: &[(f64, f64)],
    lambda: f64,
    tol: f64,
) -> Result<QuadratureResult, QuadError> {
    let cfg = QuadConfig {
        abs_tol: tol,
        ..QuadConfig::default()
    };
    integrate_with(phi, a, bounds, lambda, &cfg)
}

pub fn integrate_with(
    phi: &Expr,
    a: &Expr,
    bounds: &[(f64, f64)],
    lambda: f64,
    cfg: &QuadConfig,
) -> Result<QuadratureResult, QuadError> {
    let f = |x: &[f64]| {
        let mut z = [Complex64::zero(); MAX_QUAD_DIM];
        for (zi, &xi) in z.iter_mut().zip(x) {
            *zi = Complex64::new(xi, 0.0);
        }
        let z = &z[..x.len()];
        (-lambda * phi.eval_unchecked(z)).exp() * a.eval_unchecked(z)
    };
    integrate_fn(&f, bounds, cfg)
}

/// Least-squares slope of `log(error)` against `log(λ)`.
///
/// Non-positive or non-finite errors are skipped; at least three must remain.
pub fn decay_slope(values: &[(f64, f64)]) -> Result<f64, QuadError> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .filter(|(l, e)| *l > 0.0 && *e > 0.0 && e.is_finite())
        .map(|&(l, e)| (l.ln(), e.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(QuadError::TooFewPoints(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}
