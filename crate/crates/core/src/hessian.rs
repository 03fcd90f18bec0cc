//! Hessians at critical points and the sign-resolved `(det H)^{-1/2}`.

use alloc::vec::Vec;

use num_complex::Complex64;
// shadowed by inherent methods whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::One;
use thiserror::Error;

use crate::expr::Expr;
use crate::linalg::CMatrix;
use crate::multiseries::{MultiIndex, TruncatedSeries};

/// Relative size below which the smallest eigenvalue makes a Hessian degenerate.
pub const DEGENERACY_TOL: f64 = 1e-7;

/// Radius of the sphere sampled by [`admissibility_spot_check`].
pub const SPOT_CHECK_RADIUS: f64 = 1e-2;

/// Number of directions sampled by [`admissibility_spot_check`].
pub const SPOT_CHECK_DIRECTIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HessianError {
    #[error("series order {0} is too low to read a Hessian (need at least 2)")]
    OrderTooLow(u32),
    #[error("phase has a nonzero linear term at the expansion point")]
    NonzeroLinearPart,
    #[error("eigenvalue {0} lies on the closed negative real axis")]
    NegativeRealEigenvalue(Complex64),
    #[error("Hessian is degenerate (smallest eigenvalue modulus {0:.3e})")]
    Degenerate(f64),
    #[error("Re phi = {value:.3e} < 0 near the critical point")]
    Inadmissible { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianData {
    pub matrix: CMatrix,
    pub eigenvalues: Vec<Complex64>,
    pub det: Complex64,
}

impl HessianData {
    pub fn from_matrix(matrix: CMatrix) -> Self {
        let eigenvalues = matrix.eigenvalues();
        let det = matrix.det();
        HessianData {
            matrix,
            eigenvalues,
            det,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_degenerate(&self) -> bool {
        let (lo, hi) = self.eigen_extent();
        lo <= DEGENERACY_TOL * hi.max(1.0)
    }

    fn eigen_extent(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for e in &self.eigenvalues {
            lo = lo.min(e.norm());
            hi = hi.max(e.norm());
        }
        (lo, hi)
    }

    pub fn check_nondegenerate(&self) -> Result<(), HessianError> {
        if self.is_degenerate() {
            Err(HessianError::Degenerate(self.eigen_extent().0))
        } else {
            Ok(())
        }
    }

    /// `∏ λ_k^{-1/2}` over the eigenvalues, with principal square roots.
    pub fn inv_sqrt_det(&self) -> Result<Complex64, HessianError> {
        inv_sqrt_det(self)
    }
}

/// Hessian of a series at the origin: `M_ij = ∂_i ∂_j φ(0)`.
pub fn hessian_of(phi: &TruncatedSeries) -> Result<HessianData, HessianError> {
    if phi.order() < 2 {
        return Err(HessianError::OrderTooLow(phi.order()));
    }
    let d = phi.dim();
    let scale = phi.max_abs().max(1.0);
    for j in 0..d {
        if phi.coeff(&MultiIndex::unit(d, j)).norm() > 1e-10 * scale {
            return Err(HessianError::NonzeroLinearPart);
        }
    }
    let mut m = CMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let idx = MultiIndex::unit(d, i).plus(&MultiIndex::unit(d, j));
            let c = phi.coeff(&idx);
            m[(i, j)] = if i == j { c * 2.0 } else { c };
        }
    }
    Ok(HessianData::from_matrix(m))
}

/// Product of the inverse principal square roots of the eigenvalues.
///
/// Fails when an eigenvalue sits on the closed negative real axis, where the
/// principal root is discontinuous and the sign rule is undefined.
pub fn inv_sqrt_det(h: &HessianData) -> Result<Complex64, HessianError> {
    let scale = h.eigenvalues.iter().fold(1.0f64, |m, e| m.max(e.norm()));
    let mut acc = Complex64::one();
    for &e in &h.eigenvalues {
        if e.re <= 0.0 && e.im.abs() <= 1e-12 * scale {
            if e.norm() <= DEGENERACY_TOL * scale {
                return Err(HessianError::Degenerate(e.norm()));
            }
            return Err(HessianError::NegativeRealEigenvalue(e));
        }
        acc /= e.sqrt();
    }
    Ok(acc)
}

/// Deterministic, roughly uniform unit vectors in `d` dimensions.
pub fn quasi_random_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
    let mut out = Vec::with_capacity(count);
    if d == 1 {
        for k in 0..count {
            out.push(alloc::vec![if k % 2 == 0 { 1.0 } else { -1.0 }]);
        }
        return out;
    }
    let mut k = 1u64;
    while out.len() < count {
        let v: Vec<f64> = (0..d)
            .map(|j| 2.0 * radical_inverse(k, PRIMES[j]) - 1.0)
            .collect();
        k += 1;
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut r = 0.0;
    while k > 0 {
        r += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    r
}

/// Sample `Re φ` on a small sphere around `point` and require it to be
/// nonnegative up to `-1e-9`.
///
/// `inward` restricts the sample to a half-sphere: `(axis, sign)` keeps the
/// directions whose `axis` component has the given sign (or is zero).
pub fn admissibility_spot_check(
    phi: &Expr,
    point: &[f64],
    inward: Option<(usize, f64)>,
) -> Result<(), HessianError> {
    let d = point.len();
    let mut worst = f64::INFINITY;
    for mut dir in quasi_random_directions(d, SPOT_CHECK_DIRECTIONS) {
        if let Some((axis, sign)) = inward {
            if dir[axis] * sign < 0.0 {
                dir[axis] = -dir[axis];
            }
        }
        let z: Vec<Complex64> = point
            .iter()
            .zip(&dir)
            .map(|(x, u)| Complex64::new(x + SPOT_CHECK_RADIUS * u, 0.0))
            .collect();
        let re = phi.eval_unchecked(&z).re;
        if re.is_nan() {
            continue;
        }
        worst = worst.min(re);
    }
    if worst < -1e-9 {
        Err(HessianError::Inadmissible { value: worst })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, taylor, ExpansionPoint};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn series(text: &str, names: &[&str]) -> TruncatedSeries {
        let e = parse(text, names).unwrap();
        taylor(&e, &ExpansionPoint::real(&alloc::vec![0.0; names.len()], 4)).unwrap()
    }

    #[test]
    fn hessian_examples() {
        let h = hessian_of(&series("x^2", &["x"])).unwrap();
        assert_eq!(h.matrix, CMatrix::from_real(&[alloc::vec![2.0]]));
        let h = hessian_of(&series("x^2 + x*y + y^2", &["x", "y"])).unwrap();
        assert_eq!(
            h.matrix,
            CMatrix::from_real(&[alloc::vec![2.0, 1.0], alloc::vec![1.0, 2.0]])
        );
        let h = hessian_of(&series("(1+i)*x^2", &["x"])).unwrap();
        assert_eq!(h.matrix[(0, 0)], c(2.0, 2.0));
    }

    #[test]
    fn hessian_rejects_low_order_and_linear() {
        let s = TruncatedSeries::variable(1, 1, 0);
        assert_eq!(hessian_of(&s), Err(HessianError::OrderTooLow(1)));
        assert_eq!(
            hessian_of(&series("x + x^2", &["x"])),
            Err(HessianError::NonzeroLinearPart)
        );
    }

    #[test]
    fn inv_sqrt_det_examples() {
        let h = HessianData::from_matrix(CMatrix::from_real(&[
            alloc::vec![2.0, 0.0],
            alloc::vec![0.0, 2.0],
        ]));
        assert!((h.inv_sqrt_det().unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        let h = HessianData::from_matrix(CMatrix::from_rows(&[alloc::vec![c(0.0, 2.0)]]));
        assert!((h.inv_sqrt_det().unwrap() - c(0.5, -0.5)).norm() < 1e-15);
        let h = HessianData::from_matrix(CMatrix::from_real(&[alloc::vec![-2.0]]));
        assert!(matches!(
            h.inv_sqrt_det(),
            Err(HessianError::NegativeRealEigenvalue(_))
        ));
    }

    #[test]
    fn degeneracy() {
        let h = hessian_of(&series("x^4 + y^2", &["x", "y"])).unwrap();
        assert!(h.is_degenerate());
        assert!(h.check_nondegenerate().is_err());
        let h = hessian_of(&series("x^2 + y^2", &["x", "y"])).unwrap();
        assert!(!h.is_degenerate());
    }

    #[test]
    fn spot_check() {
        let good = parse("x^2 + i*x^3 + y^2", &["x", "y"]).unwrap();
        assert!(admissibility_spot_check(&good, &[0.0, 0.0], None).is_ok());
        let bad = parse("x^2 - y^2", &["x", "y"]).unwrap();
        assert!(admissibility_spot_check(&bad, &[0.0, 0.0], None).is_err());
        // x is only negative to the left, which the half-sphere excludes
        let half = parse("x", &["x"]).unwrap();
        assert!(admissibility_spot_check(&half, &[0.0], None).is_err());
        assert!(admissibility_spot_check(&half, &[0.0], Some((0, 1.0))).is_ok());
    }

    #[test]
    fn directions_are_unit() {
        for d in 1..=3 {
            let dirs = quasi_random_directions(d, 100);
            assert_eq!(dirs.len(), 100);
            for v in dirs {
                let n: f64 = v.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }

    fn arb_alpha(d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            proptest::collection::vec(-1.0f64..1.0, d * d),
            proptest::collection::vec(-1.0f64..1.0, d * d),
        )
    }

    fn pi_t(re: &[f64], im: &[f64], d: usize, t: f64) -> CMatrix {
        let rows: Vec<Vec<Complex64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| c(re[i * d + j], (1.0 - t) * im[i * d + j]))
                    .collect()
            })
            .collect();
        CMatrix::from_rows(&rows)
    }

    proptest! {
        #[test]
        fn principal_root_product_tracks_det(
            d in 1usize..=3,
            seed in arb_alpha(3),
            shrink in 0.05f64..0.9,
        ) {
            let (mut re, im) = seed;
            re.truncate(d * d);
            let mut im: Vec<f64> = im.into_iter().take(d * d).collect();
            // make the real part well conditioned with positive determinant
            for i in 0..d {
                re[i * d + i] += 3.0;
            }
            let real = pi_t(&re, &im, d, 1.0);
            prop_assume!(real.det().re > 0.5);
            // scale the imaginary part so that Re(αᵀα) stays positive definite
            let r = real.transpose().mul(&real);
            let min_eig = r.eigenvalues().iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
            let bnorm: f64 = im.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            let factor = shrink * min_eig.sqrt() / bnorm;
            for v in im.iter_mut() {
                *v *= factor;
            }
            for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let a = pi_t(&re, &im, d, t);
                let m = a.transpose().mul(&a);
                let h = HessianData::from_matrix(m);
                let prod = h.inv_sqrt_det().unwrap().inv();
                let det = a.det();
                prop_assert!((prod - det).norm() <= 1e-8 * det.norm().max(1.0),
                    "t={} det={} prod={}", t, det, prod);
            }
        }

        #[test]
        fn eigen_product_is_det(
            d in 1usize..=4,
            vals in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 16),
        ) {
            let rows: Vec<Vec<Complex64>> = (0..d)
                .map(|i| (0..d).map(|j| {
                    let (a, b) = vals[(i.min(j)) * 4 + i.max(j)];
                    c(a, b)
                }).collect())
                .collect();
            let h = HessianData::from_matrix(CMatrix::from_rows(&rows));
            let prod = h.eigenvalues.iter().fold(Complex64::one(), |p, e| p * e);
            let scale = h.det.norm().max(h.matrix.max_abs().powi(d as i32)).max(1e-300);
            prop_assert!((prod - h.det).norm() <= 1e-9 * scale);
            prop_assert!(h.matrix.symmetry_defect() <= 1e-12);
        }
    }
}
