//! Gaussian monomial integrals and the expansion for the standard phase
//! `S(x) = Σ x_j²`.
//!
//! The constants are the analytically correct ones:
//! `∫_ℝ xⁿ e^{-λx²} dx = Γ((n+1)/2) λ^{-(n+1)/2}` for even `n` (zero for odd),
//! and `β_r = ∏_j Γ((r_j+1)/2) = π^{d/2} ∏_j r_j! / ((r_j/2)! 2^{r_j})`.

use alloc::vec::Vec;

use num_complex::Complex64;
// shadowed by inherent methods whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::expansion::{assemble, CriticalPointReport, Expansion, PointExpansion};
use crate::hessian::HessianData;
use crate::linalg::CMatrix;
use crate::multiseries::{MultiIndex, SeriesError, TruncatedSeries};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// `Γ((n+1)/2)`, by the recurrence `Γ(x+1) = xΓ(x)` from `Γ(1/2)` and `Γ(1)`.
pub fn gamma_half(n: u32) -> f64 {
    let mut g = if n % 2 == 0 { SQRT_PI } else { 1.0 };
    let mut k = n % 2;
    while k < n {
        g *= (k + 1) as f64 / 2.0;
        k += 2;
    }
    g
}

/// `∫_{-∞}^{∞} xⁿ e^{-λx²} dx`.
pub fn monomial_integral_1d(n: u32, lambda: f64) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    gamma_half(n) * lambda.powf(-(n as f64 + 1.0) / 2.0)
}

/// `∫_0^∞ xⁿ e^{-λx²} dx`, valid for every `n`.
pub fn half_monomial_integral_1d(n: u32, lambda: f64) -> f64 {
    0.5 * gamma_half(n) * lambda.powf(-(n as f64 + 1.0) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonomialConstant {
    pub index: MultiIndex,
    pub beta: f64,
}

impl MonomialConstant {
    pub fn new(index: MultiIndex) -> Self {
        MonomialConstant {
            index,
            beta: beta(&index),
        }
    }
}

/// The constant with `∫_{ℝ^d} x^r e^{-λS(x)} dx = β_r λ^{-(d+|r|)/2}`.
pub fn beta(r: &MultiIndex) -> f64 {
    if !r.all_even() {
        return 0.0;
    }
    r.as_slice().iter().map(|&k| gamma_half(k as u32)).product()
}

/// Constant for the half-space `{σ y_axis ≥ 0}`:
/// `∫ y^r e^{-λS(y)} dy = β^½_r λ^{-(d+|r|)/2}`.
///
/// `sigma` must be `±1`. Odd exponents along `axis` contribute.
pub fn beta_half(r: &MultiIndex, axis: usize, sigma: f64) -> f64 {
    let mut b = 1.0;
    for (j, &k) in r.as_slice().iter().enumerate() {
        let k = k as u32;
        if j == axis {
            b *= 0.5 * gamma_half(k) * if k % 2 == 1 { sigma } else { 1.0 };
        } else if k % 2 == 1 {
            return 0.0;
        } else {
            b *= gamma_half(k);
        }
    }
    b
}

/// `c_n = Σ_{|r|=n} a_r · weight(r)` for `n = 0..=l`.
pub fn moment_coefficients<F>(
    a: &TruncatedSeries,
    l: u32,
    weight: F,
) -> Result<Vec<Complex64>, SeriesError>
where
    F: Fn(&MultiIndex) -> f64,
{
    if a.order() < l {
        return Err(SeriesError::OrderTooLow);
    }
    let mut c = alloc::vec![Complex64::zero(); l as usize + 1];
    for (idx, &v) in a.terms() {
        let n = idx.degree();
        if n <= l {
            let w = weight(idx);
            if w != 0.0 {
                c[n as usize] += v * w;
            }
        }
    }
    Ok(c)
}

/// Coefficients `c_0..=c_l` of `∫ A e^{-λS} ~ Σ c_n λ^{-(d+n)/2}`.
pub fn standard_phase_coefficients(
    a: &TruncatedSeries,
    l: u32,
) -> Result<Vec<Complex64>, SeriesError> {
    moment_coefficients(a, l, beta)
}

/// [`standard_phase_coefficients`] packaged as an [`Expansion`] with one
/// interior point at the origin (`φ = 0`, Hessian `2I`).
pub fn standard_phase_expansion(a: &TruncatedSeries, l: u32) -> Result<Expansion, SeriesError> {
    let d = a.dim();
    let coefficients = standard_phase_coefficients(a, l)?;
    let report = CriticalPointReport {
        location: alloc::vec![Complex64::zero(); d],
        phi_value: Complex64::zero(),
        hessian: HessianData::from_matrix(CMatrix::identity(d).scale(Complex64::new(2.0, 0.0))),
        boundary: None,
        boundary_half: false,
        amplitude_at: a.constant_term(),
        gradient_residual: 0.0,
    };
    let point = PointExpansion {
        report,
        available: coefficients.len(),
        coefficients,
        extrapolated: false,
        orientation: 1.0,
        morse_residual: 0.0,
    };
    Ok(assemble(d, alloc::vec![point], l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            let x = a + k as f64 * h;
            s += f(x) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(0) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(1), 1.0);
        assert!((gamma_half(2) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(gamma_half(3), 1.0);
        assert!((gamma_half(4) - 0.75 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(5), 2.0);
        // Γ((n+1)/2) = √π n! / ((n/2)! 2^n) for even n
        let fact = |k: u32| (1..=k).map(|j| j as f64).product::<f64>();
        for n in (0..16).step_by(2) {
            let closed = PI.sqrt() * fact(n) / (fact(n / 2) * 2f64.powi(n as i32));
            assert!((gamma_half(n) - closed).abs() < 1e-12 * closed);
        }
    }

    #[test]
    fn monomial_integrals_match_quadrature() {
        assert_eq!(monomial_integral_1d(1, 7.0), 0.0);
        assert!((monomial_integral_1d(0, 1.0) - 1.7724539).abs() < 1e-7);
        assert!((monomial_integral_1d(2, 1.0) - 0.8862269).abs() < 1e-7);
        for n in 0..8u32 {
            for lambda in [0.5, 1.0, 3.0] {
                let f = |x: f64| x.powi(n as i32) * (-lambda * x * x).exp();
                let full = simpson(f, -20.0, 20.0, 20_000);
                let half = simpson(f, 0.0, 20.0, 20_000);
                let want = monomial_integral_1d(n, lambda);
                assert!((full - want).abs() < 1e-10, "n={n} λ={lambda}");
                let want = half_monomial_integral_1d(n, lambda);
                assert!((half - want).abs() < 1e-10, "half n={n} λ={lambda}");
            }
        }
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta(&MultiIndex::new(&[1, 0])), 0.0);
        assert!((beta(&MultiIndex::new(&[0, 0])) - PI).abs() < 1e-14);
        assert!((beta(&MultiIndex::new(&[2, 0])) - PI / 2.0).abs() < 1e-14);
        let mc = MonomialConstant::new(MultiIndex::new(&[2, 4]));
        assert!((mc.beta - PI * 0.5 * 0.75).abs() < 1e-14);
    }

    #[test]
    fn beta_half_examples() {
        let r = MultiIndex::new(&[0, 1]);
        assert!((beta_half(&r, 1, 1.0) - 0.5 * PI.sqrt()).abs() < 1e-15);
        assert!((beta_half(&r, 1, -1.0) + 0.5 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(beta_half(&r, 0, 1.0), 0.0);
        let r = MultiIndex::new(&[2, 2]);
        assert!((beta_half(&r, 0, -1.0) - 0.5 * beta(&r)).abs() < 1e-15);
    }

    #[test]
    fn expansion_examples() {
        let c1 = Complex64::new(1.0, 0.0);
        let one = TruncatedSeries::constant(1, 4, c1);
        let c = standard_phase_coefficients(&one, 4).unwrap();
        assert!((c[0].re - PI.sqrt()).abs() < 1e-15);
        assert!(c[1..].iter().all(|v| v.is_zero()));

        let x = TruncatedSeries::univariate(4, &[Complex64::zero(), c1]);
        let c = standard_phase_coefficients(&x, 4).unwrap();
        assert!(c.iter().all(|v| v.is_zero()));

        let a = TruncatedSeries::univariate(4, &[c1, Complex64::zero(), c1]);
        let c = standard_phase_coefficients(&a, 4).unwrap();
        assert!((c[0].re - PI.sqrt()).abs() < 1e-15);
        assert!((c[2].re - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!(c[1].is_zero() && c[3].is_zero());

        assert_eq!(
            standard_phase_coefficients(&a, 5),
            Err(SeriesError::OrderTooLow)
        );

        let e = standard_phase_expansion(&a, 4).unwrap();
        let lambda = 9.0;
        let want = PI.sqrt() / 3.0 + PI.sqrt() / 2.0 / 27.0;
        assert!((e.evaluate_partial_sum(lambda, 5).unwrap().re - want).abs() < 1e-14);
    }
}
