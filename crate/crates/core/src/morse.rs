//! Constructive Morse lemma: a change of variables `x = ψ(y)` with
//! `φ(ψ(y)) = Σ y_j²`, built by completing squares one variable at a time.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// shadowed by inherent methods whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::hessian::{hessian_of, HessianError};
use crate::linalg::CMatrix;
use crate::multiseries::{
    apply_matrix, compose_map, invert_map, linear_map, linear_part, MultiIndex, SeriesError,
    TruncatedSeries,
};

/// Relative pivot magnitude below which a rotation is applied first.
pub const PIVOT_TOL: f64 = 1e-6;

/// Relative residual of `φ∘ψ - S` above which precision loss is flagged.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MorseError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Hessian(#[from] HessianError),
    #[error("phase has nonzero constant or linear terms")]
    NonzeroLowOrder,
    #[error("Hessian is singular")]
    SingularHessian,
    #[error("Hessian restricted to the boundary face is singular")]
    SingularFaceHessian,
    #[error("pivot {stage} vanished after rotation")]
    VanishingPivot { stage: usize },
    #[error("truncation order {0} too low (need at least 3)")]
    OrderTooLow(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorseData {
    /// `x = ψ(y)`, in the original coordinates.
    pub psi: Vec<TruncatedSeries>,
    /// `y = y(x)`, the completed squares.
    pub forward: Vec<TruncatedSeries>,
    pub jac_det_at_0: Complex64,
    /// Orthogonal matrix `U` applied before completing squares (`x = U x'`).
    pub unitary_pre_rotation: CMatrix,
    /// Constant term of `φ_{r,r}^{1/2}` chosen at each stage.
    pub branches: Vec<Complex64>,
    /// Largest coefficient of `φ∘ψ - S`, relative to the largest coefficient of `φ`.
    pub residual: f64,
    pub precision_loss: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MorseOptions {
    /// Use the negative square root at the first stage.
    pub flip_first_branch: bool,
    /// Keep this axis out of the rotation and complete its square last, so that
    /// `{x_axis = 0}` maps onto `{y_last = 0}`.
    pub boundary_axis: Option<usize>,
}

fn check_low_order(phi: &TruncatedSeries) -> Result<(), MorseError> {
    let d = phi.dim();
    let scale = phi.max_abs().max(1.0);
    let mut low = phi.constant_term().norm();
    for j in 0..d {
        low = low.max(phi.coeff(&MultiIndex::unit(d, j)).norm());
    }
    if low > 1e-10 * scale {
        return Err(MorseError::NonzeroLowOrder);
    }
    Ok(())
}

/// Split `φ = Σ_{j,k} x_j x_k φ_{jk}` with `φ_{jk}(0) = ½ Hess_{jk}`.
///
/// A monomial `a_r x^r` is shared out with weights `r_j (r_k - δ_jk) / (|r|(|r|-1))`.
pub fn quadratic_decomposition(
    phi: &TruncatedSeries,
) -> Result<Vec<Vec<TruncatedSeries>>, MorseError> {
    check_low_order(phi)?;
    let d = phi.dim();
    if phi.order() < 2 {
        return Err(MorseError::OrderTooLow(phi.order()));
    }
    let order = phi.order() - 2;
    let mut terms: Vec<Vec<Vec<(MultiIndex, Complex64)>>> =
        alloc::vec![alloc::vec![Vec::new(); d]; d];
    for (r, &a) in phi.terms() {
        let n = r.degree();
        if n < 2 {
            continue;
        }
        let denom = (n * (n - 1)) as f64;
        for j in 0..d {
            let rj = r.get(j);
            if rj == 0 {
                continue;
            }
            let rest = r.with(j, rj - 1);
            for k in 0..d {
                let rk = rest.get(k);
                if rk == 0 {
                    continue;
                }
                let w = rj as f64 * rk as f64 / denom;
                terms[j][k].push((rest.with(k, rk - 1), a * w));
            }
        }
    }
    Ok(terms
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|t| TruncatedSeries::from_terms(d, order, t))
                .collect()
        })
        .collect())
}

/// Pivots of Gaussian elimination without row exchanges (ratios of leading minors).
pub fn schur_pivots(h: &CMatrix) -> Vec<Complex64> {
    let n = h.dim();
    let mut a = h.clone();
    let mut out = Vec::with_capacity(n);
    for r in 0..n {
        let p = a[(r, r)];
        out.push(p);
        if p.is_zero() {
            break;
        }
        for i in r + 1..n {
            let f = a[(i, r)] / p;
            for j in r..n {
                let v = a[(r, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    while out.len() < n {
        out.push(Complex64::zero());
    }
    out
}

fn givens(n: usize, i: usize, j: usize, theta: f64) -> CMatrix {
    let mut g = CMatrix::identity(n);
    let (s, c) = theta.sin_cos();
    g[(i, i)] = Complex64::new(c, 0.0);
    g[(j, j)] = Complex64::new(c, 0.0);
    g[(i, j)] = Complex64::new(-s, 0.0);
    g[(j, i)] = Complex64::new(s, 0.0);
    g
}

/// Smallest of the first `upto` diagonal entries and elimination pivots.
fn min_pivot(h: &CMatrix, upto: usize) -> f64 {
    let diag = (0..upto).map(|i| h[(i, i)].norm());
    schur_pivots(h)
        .iter()
        .take(upto)
        .map(|p| p.norm())
        .chain(diag)
        .fold(f64::INFINITY, f64::min)
}

/// Rotation `U` among the first `free` axes so that the diagonal entries and
/// elimination pivots of `UᵀHU` have magnitude at least `PIVOT_TOL·‖H‖`.
/// Entries beyond the free axes are not checked.
fn choose_rotation(h: &CMatrix, free: usize) -> Result<CMatrix, MorseError> {
    let n = h.dim();
    let threshold = PIVOT_TOL * h.frobenius_norm();
    let checked = free;
    let mut u = CMatrix::identity(n);
    let mut best = min_pivot(h, checked);
    let mut sweeps = 0;
    while best < threshold {
        sweeps += 1;
        if sweeps > 12 || free < 2 {
            return Err(if free < n {
                MorseError::SingularFaceHessian
            } else {
                MorseError::SingularHessian
            });
        }
        let mut cand_best = (best, None);
        for i in 0..free {
            for j in i + 1..free {
                for k in 1..12 {
                    let g = givens(n, i, j, k as f64 * PI / 12.0);
                    let uc = u.mul(&g);
                    let hc = uc.transpose().mul(h).mul(&uc);
                    let m = min_pivot(&hc, checked);
                    if m > cand_best.0 * (1.0 + 1e-12) {
                        cand_best = (m, Some(uc));
                    }
                }
            }
        }
        match cand_best.1 {
            Some(uc) => {
                u = uc;
                best = cand_best.0;
            }
            None => {
                return Err(if free < n {
                    MorseError::SingularFaceHessian
                } else {
                    MorseError::SingularHessian
                })
            }
        }
    }
    Ok(u)
}

/// Returns `(φ∘U, U)` with `U` orthogonal and all elimination pivots of the
/// rotated Hessian bounded away from zero; `U = I` when none is needed.
pub fn pre_rotate_if_needed(
    phi: &TruncatedSeries,
) -> Result<(TruncatedSeries, CMatrix), MorseError> {
    let h = hessian_of(phi)?;
    if h.matrix.det().norm() <= 1e-14 * h.matrix.frobenius_norm().powi(h.dim() as i32) {
        return Err(MorseError::SingularHessian);
    }
    let u = choose_rotation(&h.matrix, phi.dim())?;
    if u == CMatrix::identity(phi.dim()) {
        return Ok((phi.clone(), u));
    }
    let rotated = phi.compose(&linear_map(&u, phi.order()))?;
    Ok((rotated, u))
}

fn permutation_to_last(d: usize, axis: usize) -> CMatrix {
    let mut p = CMatrix::identity(d);
    if axis != d - 1 {
        p[(axis, axis)] = Complex64::zero();
        p[(d - 1, d - 1)] = Complex64::zero();
        p[(axis, d - 1)] = Complex64::one();
        p[(d - 1, axis)] = Complex64::one();
    }
    p
}

/// Complete squares with principal branches and no boundary constraint.
pub fn complete_squares(phi: &TruncatedSeries) -> Result<MorseData, MorseError> {
    complete_squares_with(phi, MorseOptions::default())
}

pub fn complete_squares_with(
    phi: &TruncatedSeries,
    opts: MorseOptions,
) -> Result<MorseData, MorseError> {
    check_low_order(phi)?;
    let d = phi.dim();
    let n = phi.order();
    if n < 3 {
        return Err(MorseError::OrderTooLow(n));
    }
    let h = hessian_of(phi)?;
    if h.is_degenerate() {
        return Err(MorseError::SingularHessian);
    }

    // x = U x'
    let u = match opts.boundary_axis {
        Some(axis) => {
            let p = permutation_to_last(d, axis);
            let hp = p.transpose().mul(&h.matrix).mul(&p);
            p.mul(&choose_rotation(&hp, d - 1)?)
        }
        None => choose_rotation(&h.matrix, d)?,
    };
    let rotated = if u == CMatrix::identity(d) {
        phi.clone()
    } else {
        phi.compose(&linear_map(&u, n))?
    };

    let mut hm = quadratic_decomposition(&rotated)?;
    let scale = h.matrix.frobenius_norm();
    let mut forward: Vec<TruncatedSeries> = Vec::with_capacity(d);
    let mut branches = Vec::with_capacity(d);
    for r in 0..d {
        let hrr = hm[r][r].clone();
        let c0 = hrr.constant_term();
        if c0.norm() <= 1e-3 * PIVOT_TOL * scale {
            return Err(MorseError::VanishingPivot { stage: r });
        }
        let mut branch = c0.sqrt();
        if r == 0 && opts.flip_first_branch {
            branch = -branch;
        }
        branches.push(branch);
        let root = hrr.sqrt_series(branch)?;
        let inv = hrr.reciprocal()?;
        let root_over = root.mul(&inv)?;
        let mut y = root.mul_var(r)?;
        for k in r + 1..d {
            let t = root_over.mul(&hm[r][k])?.mul_var(k)?;
            y = y.add(&t)?;
        }
        forward.push(y);
        for j in r + 1..d {
            for k in j..d {
                let corr = hm[r][j].mul(&hm[r][k])?.mul(&inv)?;
                let v = hm[j][k].sub(&corr)?;
                hm[j][k] = v.clone();
                hm[k][j] = v;
            }
        }
    }

    // y'(x') -> y(x) = y'(Uᵀx); ψ = U ψ'
    let psi_rot = invert_map(&forward)?;
    let psi = apply_matrix(&u, &psi_rot);
    let forward = if u == CMatrix::identity(d) {
        forward
    } else {
        compose_map(&forward, &linear_map(&u.transpose(), n - 1))?
    };
    let jac_det_at_0 = linear_part(&psi).det();

    let composed = phi.compose(&psi)?;
    let s = standard_phase_series(d, composed.order());
    let residual = composed.max_abs_diff(&s) / phi.max_abs().max(f64::min_positive_value());

    Ok(MorseData {
        psi,
        forward,
        jac_det_at_0,
        unitary_pre_rotation: u,
        branches,
        residual,
        precision_loss: residual > RESIDUAL_TOL,
    })
}

/// `S(y) = Σ y_j²`.
pub fn standard_phase_series(d: usize, order: u32) -> TruncatedSeries {
    TruncatedSeries::from_terms(
        d,
        order,
        (0..d).map(|j| {
            let u = MultiIndex::unit(d, j);
            (u.plus(&u), Complex64::one())
        }),
    )
}

/// `[ψ'(0), ψ''(0), ψ'''(0)]` for a 1-D phase from its derivatives at the
/// critical point, by solving `φ(ψ(y)) = y²` degree by degree.
///
/// `phi_derivs = [φ'', φ''', φ'''']`.
pub fn psi_derivatives_1d(phi_derivs: [Complex64; 3]) -> [Complex64; 3] {
    let [f2, f3, f4] = phi_derivs;
    let p1 = (Complex64::new(2.0, 0.0) / f2).sqrt();
    let p2 = -f3 * 2.0 / (f2 * f2 * 3.0);
    // f2^{7/2} taken on the same branch as p1 = √2 f2^{-1/2}
    let f2_72 = f2 * f2 * f2 * (Complex64::new(2.0, 0.0).sqrt() / p1);
    let p3 = (f3 * f3 * 5.0 - f2 * f4 * 3.0) / (f2_72 * 3.0 * 2f64.sqrt());
    [p1, p2, p3]
}
