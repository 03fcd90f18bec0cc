//! Asymptotic expansions `I(λ) ~ Σ_x e^{-λφ(x)} Σ_ℓ c_ℓ(x) λ^{-(d+ℓ)/2}`.
//!
//! Each stationary point is handled separately: re-centre, build the Morse
//! change of variables, push the amplitude forward, and integrate the result
//! against the standard Gaussian (or the half-Gaussian on a boundary face).

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use num_complex::Complex64;
// shadowed by inherent methods whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;
use thiserror::Error;

use crate::expr::{gradient_at, taylor, EvalError, ExpansionPoint, Expr, TaylorError};
use crate::hessian::{admissibility_spot_check, hessian_of, HessianData, HessianError};
use crate::linalg::CMatrix;
use crate::morse::{complete_squares_with, psi_derivatives_1d, MorseError, MorseOptions};
use crate::multiseries::{jacobian, series_det, SeriesError, TruncatedSeries};
use crate::standard_phase::{beta, beta_half, moment_coefficients};

/// Newton stopping tolerance on `‖∇φ‖`.
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 60;
/// Grid seeds per axis when none are supplied.
pub const GRID_SEEDS_PER_AXIS: usize = 9;
/// Distance under which two roots are the same point, or a root lies on a face.
pub const LOCATION_TOL: f64 = 1e-8;
/// Largest accepted `‖∇φ‖` at a reported point.
pub const GRADIENT_RESIDUAL_TOL: f64 = 1e-10;
/// Points with `Re φ` above this are exponentially negligible and dropped.
pub const STATIONARY_RE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpansionError {
    #[error(transparent)]
    Taylor(#[from] TaylorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error(transparent)]
    Hessian(#[from] HessianError),
    #[error("degenerate stationary point at {location:?} (smallest Hessian eigenvalue {min_eigenvalue:.3e})")]
    Degenerate {
        location: Vec<f64>,
        min_eigenvalue: f64,
    },
    #[error("no stationary point with Re phi = 0 in the domain (best gradient residual {best_residual:.3e})")]
    NoCriticalPoints { best_residual: f64 },
    #[error("stationary point {location:?} lies on a corner of the domain (faces {axes:?}); only interior and single-face points are supported")]
    Corner {
        location: Vec<f64>,
        axes: Vec<usize>,
    },
    #[error("Re phi = {value:.3e} < 0 at {location:?}; the phase is not admissible")]
    NegativeRealPart { location: Vec<f64>, value: f64 },
    #[error("domain must have 1..=6 finite intervals with lo < hi")]
    BadDomain,
    #[error("requested {requested} terms but only {available} are available")]
    TooManyTerms { requested: usize, available: usize },
    #[error("series leading coefficient {series} disagrees with closed form {closed}")]
    LeadingTermMismatch {
        series: Complex64,
        closed: Complex64,
    },
    #[error("half-space image is tangent to the imaginary axis; orientation undefined")]
    BoundaryOrientation,
    #[error("closed-form oracle needs a 1-D problem")]
    NotOneDimensional,
}

/// A box `∏ [lo_j, hi_j]`. A stationary point on exactly one face gives a
/// half-space contribution; points on two or more faces are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    /// `true` for the face `x_axis = lo` (domain on the positive side).
    pub lower: bool,
}

impl Face {
    /// `+1` if the domain lies on the positive side of the face.
    pub fn inward_sign(&self) -> f64 {
        if self.lower {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    Interior,
    Face(Face),
    Corner(Vec<usize>),
    Outside,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, ExpansionError> {
        if bounds.is_empty()
            || bounds.len() > crate::multiseries::MAX_DIM
            || bounds
                .iter()
                .any(|&(a, b)| !(a.is_finite() && b.is_finite() && a < b))
        {
            return Err(ExpansionError::BadDomain);
        }
        Ok(Domain { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn locate(&self, x: &[f64]) -> Location {
        let mut faces = Vec::new();
        let mut face = None;
        for (j, (&(lo, hi), &v)) in self.bounds.iter().zip(x).enumerate() {
            if v < lo - LOCATION_TOL || v > hi + LOCATION_TOL {
                return Location::Outside;
            }
            if (v - lo).abs() <= LOCATION_TOL {
                faces.push(j);
                face = Some(Face {
                    axis: j,
                    lower: true,
                });
            } else if (v - hi).abs() <= LOCATION_TOL {
                faces.push(j);
                face = Some(Face {
                    axis: j,
                    lower: false,
                });
            }
        }
        match (faces.len(), face) {
            (0, _) => Location::Interior,
            (1, Some(f)) => Location::Face(f),
            _ => Location::Corner(faces),
        }
    }

    fn grid_seeds(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let m = GRID_SEEDS_PER_AXIS;
        let total = m.pow(d as u32);
        (0..total)
            .map(|flat| {
                let mut rem = flat;
                self.bounds
                    .iter()
                    .map(|&(lo, hi)| {
                        let k = rem % m;
                        rem /= m;
                        lo + (hi - lo) * k as f64 / (m - 1) as f64
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPointReport {
    pub location: Vec<Complex64>,
    /// `φ(x)`; the point contributes with the factor `ω = e^{-λφ(x)}`.
    pub phi_value: Complex64,
    pub hessian: HessianData,
    pub boundary: Option<Face>,
    pub boundary_half: bool,
    pub amplitude_at: Complex64,
    pub gradient_residual: f64,
}

impl CriticalPointReport {
    pub fn real_location(&self) -> Vec<f64> {
        self.location.iter().map(|z| z.re).collect()
    }
}

/// One Newton run on `∇φ = 0`; returns the final point and gradient norm.
fn newton(phi: &Expr, seed: &[f64]) -> Option<(Vec<Complex64>, f64)> {
    let d = seed.len();
    let mut z: Vec<Complex64> = seed.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let scale = seed.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut last = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let s = taylor(phi, &ExpansionPoint::new(z.clone(), 2)).ok()?;
        let g: Vec<Complex64> = (0..d)
            .map(|j| s.coeff(&crate::multiseries::MultiIndex::unit(d, j)))
            .collect();
        let gn = norm(&g);
        last = gn;
        if !gn.is_finite() {
            return None;
        }
        if gn <= NEWTON_TOL {
            break;
        }
        let mut h = CMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let idx = crate::multiseries::MultiIndex::unit(d, i)
                    .plus(&crate::multiseries::MultiIndex::unit(d, j));
                let c = s.coeff(&idx);
                h[(i, j)] = if i == j { c * 2.0 } else { c };
            }
        }
        let step = h.inverse()?.mul_vec(&g);
        for (zi, si) in z.iter_mut().zip(&step) {
            *zi -= si;
        }
        if z.iter().any(|v| !v.is_finite() || v.norm() > 1e6 * scale) {
            return None;
        }
    }
    Some((z, last))
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Stationary points of `φ` in the closed box with `Re φ = 0`.
///
/// Newton's method runs from `seeds`, or from a `9^d` grid. Roots must be real
/// (to `1e-8`), inside the box, nondegenerate and on at most one face.
pub fn find_critical_points(
    phi: &Expr,
    amplitude: &Expr,
    dom: &Domain,
    seeds: Option<&[Vec<f64>]>,
) -> Result<Vec<CriticalPointReport>, ExpansionError> {
    let d = dom.dim();
    let seeds: Vec<Vec<f64>> = match seeds {
        Some(s) if !s.is_empty() => s.to_vec(),
        _ => dom.grid_seeds(),
    };
    let mut best_residual = f64::INFINITY;
    let mut roots: Vec<Vec<f64>> = Vec::new();
    for seed in &seeds {
        if seed.len() != d {
            return Err(ExpansionError::BadDomain);
        }
        let Some((z, res)) = newton(phi, seed) else {
            continue;
        };
        best_residual = best_residual.min(res);
        if res > NEWTON_TOL * 10.0 {
            continue;
        }
        if z.iter().any(|v| v.im.abs() > LOCATION_TOL) {
            continue;
        }
        let x: Vec<f64> = z.iter().map(|v| v.re).collect();
        if dom.locate(&x) == Location::Outside {
            continue;
        }
        if roots
            .iter()
            .any(|r| r.iter().zip(&x).all(|(a, b)| (a - b).abs() <= LOCATION_TOL))
        {
            continue;
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });

    let mut out = Vec::new();
    for mut x in roots {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let phi_value = phi.eval(&z)?;
        if phi_value.re > STATIONARY_RE_TOL {
            continue;
        }
        if phi_value.re < -STATIONARY_RE_TOL {
            return Err(ExpansionError::NegativeRealPart {
                location: x,
                value: phi_value.re,
            });
        }
        let boundary = match dom.locate(&x) {
            Location::Interior => None,
            Location::Face(f) => {
                // snap onto the face
                x[f.axis] = if f.lower {
                    dom.bounds[f.axis].0
                } else {
                    dom.bounds[f.axis].1
                };
                Some(f)
            }
            Location::Corner(axes) => return Err(ExpansionError::Corner { location: x, axes }),
            Location::Outside => continue,
        };
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let s = taylor(phi, &ExpansionPoint::new(z.clone(), 2))?;
        let s = s.add_constant(-s.constant_term());
        let hessian = hessian_of(&s)?;
        if hessian.is_degenerate() {
            let min_eigenvalue = hessian
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |m, e| m.min(e.norm()));
            return Err(ExpansionError::Degenerate {
                location: x,
                min_eigenvalue,
            });
        }
        admissibility_spot_check(phi, &x, boundary.map(|f| (f.axis, f.inward_sign())))?;
        let gradient_residual = norm(&gradient_at(phi, &z)?);
        if gradient_residual > GRADIENT_RESIDUAL_TOL {
            continue;
        }
        out.push(CriticalPointReport {
            location: z.clone(),
            phi_value,
            hessian,
            boundary,
            boundary_half: boundary.is_some(),
            amplitude_at: amplitude.eval(&z)?,
            gradient_residual,
        });
    }
    if out.is_empty() {
        return Err(ExpansionError::NoCriticalPoints { best_residual });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExpandOptions {
    /// Take the negative square root at the first completing-squares stage.
    pub flip_first_branch: bool,
}

/// Coefficients contributed by one stationary point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointExpansion {
    pub report: CriticalPointReport,
    /// `c_0..=c_L`; entries at index `>= available` are not computed.
    pub coefficients: Vec<Complex64>,
    pub available: usize,
    /// Half-space terms with `ℓ ≥ 1` extrapolate past the proven leading term.
    pub extrapolated: bool,
    /// Orientation sign applied to the Gaussian moments.
    pub orientation: f64,
    pub morse_residual: f64,
}

/// `(2π)^{d/2} A(x) (det H)^{-1/2}`, halved on a boundary face.
pub fn leading_coefficient(report: &CriticalPointReport) -> Result<Complex64, ExpansionError> {
    let d = report.hessian.dim() as i32;
    let mut c0 =
        report.amplitude_at * report.hessian.inv_sqrt_det()? * (2.0 * PI).powf(d as f64 / 2.0);
    if report.boundary_half {
        c0 *= 0.5;
    }
    Ok(c0)
}

/// Truncation order needed for the phase series to reach `c_L`.
pub fn phase_order_for(l: u32) -> u32 {
    (l + 2).max(3)
}

/// Expand one point. `phi` and `a` are Taylor series at `report.location`
/// (`phi` may carry its constant term, which is removed here).
pub fn expand_at(
    phi: &TruncatedSeries,
    a: &TruncatedSeries,
    report: &CriticalPointReport,
    l: u32,
    opts: ExpandOptions,
) -> Result<PointExpansion, ExpansionError> {
    let d = phi.dim();
    if phi.order() < phase_order_for(l) || a.order() < l {
        return Err(SeriesError::OrderTooLow.into());
    }
    let phi = phi.add_constant(-phi.constant_term());
    let face = report.boundary;
    let morse_opts = MorseOptions {
        flip_first_branch: opts.flip_first_branch,
        boundary_axis: face.map(|f| f.axis),
    };
    let md = match complete_squares_with(&phi, morse_opts) {
        Ok(md) => md,
        Err(MorseError::SingularFaceHessian) if face.is_some() => {
            // the leading half-space term needs only the full Hessian
            let mut interior = report.clone();
            interior.boundary = None;
            interior.boundary_half = false;
            let full = expand_at(&phi, a, &interior, 0, opts)?;
            let mut coefficients = alloc::vec![Complex64::zero(); l as usize + 1];
            coefficients[0] = full.coefficients[0] * 0.5;
            return Ok(PointExpansion {
                report: report.clone(),
                coefficients,
                available: 1,
                extrapolated: false,
                orientation: full.orientation,
                morse_residual: full.morse_residual,
            });
        }
        Err(e) => return Err(e.into()),
    };

    let a_pushed = a.compose(&md.psi)?;
    let jac = series_det(&jacobian(&md.psi)?);
    let a_tilde = a_pushed.mul(&jac)?;

    let reference = report.hessian.inv_sqrt_det()? * 2f64.powf(d as f64 / 2.0);
    let orientation =
        if (md.jac_det_at_0 - reference).norm() <= (md.jac_det_at_0 + reference).norm() {
            1.0
        } else {
            -1.0
        };

    let raw = match face {
        None => moment_coefficients(&a_tilde, l, beta)?,
        Some(f) => {
            let root = md.branches[d - 1];
            if root.re.abs() <= 1e-12 * root.norm() {
                return Err(ExpansionError::BoundaryOrientation);
            }
            let sigma = f.inward_sign() * root.re.signum();
            moment_coefficients(&a_tilde, l, |r| beta_half(r, d - 1, sigma))?
        }
    };
    let coefficients: Vec<Complex64> = raw.into_iter().map(|c| c * orientation).collect();

    if report.amplitude_at.norm() > 1e-12 {
        let closed = leading_coefficient(report)?;
        if (coefficients[0] - closed).norm() > 1e-9 * closed.norm() {
            return Err(ExpansionError::LeadingTermMismatch {
                series: coefficients[0],
                closed,
            });
        }
    }

    Ok(PointExpansion {
        report: report.clone(),
        available: coefficients.len(),
        coefficients,
        extrapolated: face.is_some() && l >= 1,
        orientation,
        morse_residual: md.residual,
    })
}

/// Per-point contributions, kept apart because each has its own `e^{-λφ(x)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub d: usize,
    pub order: u32,
    pub points: Vec<PointExpansion>,
}

/// Collect per-point expansions into one [`Expansion`].
pub fn assemble(d: usize, points: Vec<PointExpansion>, l: u32) -> Expansion {
    Expansion {
        d,
        order: l,
        points,
    }
}

impl Expansion {
    /// Number of leading terms known at every point.
    pub fn available_terms(&self) -> usize {
        self.points
            .iter()
            .map(|p| p.available)
            .min()
            .unwrap_or(self.order as usize + 1)
    }

    /// `Σ_x c_ℓ(x)` with the `ω` factors left out; meaningful as a single
    /// series when every point has the same `φ(x)`.
    pub fn terms(&self) -> Vec<(u32, Complex64)> {
        (0..self.available_terms())
            .map(|k| {
                let c = self.points.iter().map(|p| p.coefficients[k]).sum();
                (k as u32, c)
            })
            .collect()
    }

    /// `λ`-exponent of the term `ℓ`: `-(d+ℓ)/2`.
    pub fn exponent(&self, l: u32) -> f64 {
        -((self.d as f64) + l as f64) / 2.0
    }

    /// `Σ_x e^{-λφ(x)} Σ_{ℓ<N} c_ℓ(x) λ^{-(d+ℓ)/2}`.
    pub fn evaluate_partial_sum(&self, lambda: f64, n: usize) -> Result<Complex64, ExpansionError> {
        evaluate_partial_sum(self, lambda, n)
    }
}

pub fn evaluate_partial_sum(
    e: &Expansion,
    lambda: f64,
    n: usize,
) -> Result<Complex64, ExpansionError> {
    let available = e.available_terms();
    if n > available {
        return Err(ExpansionError::TooManyTerms {
            requested: n,
            available,
        });
    }
    let mut total = Complex64::zero();
    for p in &e.points {
        let omega = (-p.report.phi_value * lambda).exp();
        let mut s = Complex64::zero();
        for (k, c) in p.coefficients.iter().take(n).enumerate() {
            s += c * lambda.powf(e.exponent(k as u32));
        }
        total += omega * s;
    }
    Ok(total)
}

/// Find every stationary point of `φ` in `dom` and expand `∫ A e^{-λφ}` to order `l`.
pub fn expand_problem(
    phi: &Expr,
    a: &Expr,
    dom: &Domain,
    seeds: Option<&[Vec<f64>]>,
    l: u32,
    opts: ExpandOptions,
) -> Result<Expansion, ExpansionError> {
    let reports = find_critical_points(phi, a, dom, seeds)?;
    let mut points = Vec::with_capacity(reports.len());
    for r in reports {
        let at = ExpansionPoint::new(r.location.clone(), phase_order_for(l));
        let phi_s = taylor(phi, &at)?;
        let a_s = taylor(a, &ExpansionPoint::new(r.location.clone(), l))?;
        points.push(expand_at(&phi_s, &a_s, &r, l, opts)?);
    }
    Ok(assemble(dom.dim(), points, l))
}

/// 1-D oracle: `(c_0, c_2)` from the closed-form derivatives of `ψ`.
///
/// `c_2` is the `λ^{-3/2}` coefficient `(√π/4)(A''ψ'³ + 3A'ψ'ψ'' + Aψ''')`.
pub fn higher_order_1d_closed_form(
    phi: &TruncatedSeries,
    a: &TruncatedSeries,
) -> Result<(Complex64, Complex64), ExpansionError> {
    if phi.dim() != 1 || a.dim() != 1 {
        return Err(ExpansionError::NotOneDimensional);
    }
    if phi.order() < 4 || a.order() < 2 {
        return Err(SeriesError::OrderTooLow.into());
    }
    let f2 = phi.coeff_of(&[2]) * 2.0;
    if f2.norm() <= 1e-12 {
        return Err(ExpansionError::Degenerate {
            location: alloc::vec![0.0],
            min_eigenvalue: f2.norm(),
        });
    }
    let f3 = phi.coeff_of(&[3]) * 6.0;
    let f4 = phi.coeff_of(&[4]) * 24.0;
    let [p1, p2, p3] = psi_derivatives_1d([f2, f3, f4]);
    let a0 = a.coeff_of(&[0]);
    let a1 = a.coeff_of(&[1]);
    let a2 = a.coeff_of(&[2]) * 2.0;
    let sqrt_pi = PI.sqrt();
    let c0 = a0 * p1 * sqrt_pi;
    let c2 = (a2 * p1 * p1 * p1 + a1 * p1 * p2 * 3.0 + a0 * p3) * (sqrt_pi / 4.0);
    Ok((c0, c2))
}
