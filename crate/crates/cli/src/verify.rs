use std::fmt::Write;
use std::path::Path;

use num_complex::Complex64;
use saddle_core::expansion::Expansion;
use saddle_core::quad::{decay_slope, integrate_with, QuadConfig, QuadError, QuadratureResult};

use crate::error::CliError;
use crate::expand::compute;
use crate::fmt::sci;
use crate::problem::Problem;
use crate::Overrides;

pub const DEFAULT_TOL: f64 = 1e-13;
/// Allowed excess of the fitted slope over `-(d+N)/2`.
pub const SLOPE_SLACK: f64 = 0.15;

pub struct Row {
    pub lambda: f64,
    pub n: usize,
    pub quad: Complex64,
    pub sum: Complex64,
    pub err: f64,
}

pub enum Verdict {
    Pass(f64),
    /// Every remainder sits at the quadrature noise level.
    Exact,
    Fail(f64),
}

fn apply_overrides(problem: &Problem, e: &mut Expansion) -> Result<(), CliError> {
    for o in &problem.file.override_coefficients {
        let c = e
            .points
            .get_mut(o.point)
            .and_then(|p| p.coefficients.get_mut(o.l as usize))
            .ok_or_else(|| {
                CliError::Invalid(format!(
                    "override c_{} at point {} does not exist",
                    o.l,
                    o.point + 1
                ))
            })?;
        *c = o.value.into();
    }
    Ok(())
}

pub fn run(
    problem: &Problem,
    ov: &Overrides,
    csv_path: Option<&Path>,
    out: &mut String,
) -> Result<(), CliError> {
    let ladder = &problem.file.lambdas;
    if ladder.len() < 3 || ladder.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(CliError::Invalid(
            "verify needs at least three positive lambdas".into(),
        ));
    }
    let mut e = compute(problem, ov)?;
    apply_overrides(problem, &mut e)?;
    let terms = problem.file.verify_terms.min(e.available_terms());
    if terms == 0 {
        return Err(CliError::Invalid("verify_terms must be at least 1".into()));
    }
    let tol = ov.tol.unwrap_or(DEFAULT_TOL);
    let mut cfg = QuadConfig {
        abs_tol: tol,
        ..QuadConfig::default()
    };
    if let Some(m) = problem.file.max_evaluations {
        cfg.max_evaluations = m;
    }

    let mut quads: Vec<(f64, QuadratureResult)> = Vec::new();
    let mut budget = None;
    for &lambda in ladder {
        match integrate_with(
            &problem.phase,
            &problem.amplitude,
            &problem.domain.bounds,
            lambda,
            &cfg,
        ) {
            Ok(q) => quads.push((lambda, q)),
            Err(QuadError::BudgetExceeded(best)) => {
                budget = Some((lambda, best));
                break;
            }
            Err(err) => return Err(err.into()),
        }
    }

    let mut rows = Vec::new();
    for (lambda, q) in &quads {
        for n in 1..=terms {
            let sum = e.evaluate_partial_sum(*lambda, n)?;
            rows.push(Row {
                lambda: *lambda,
                n,
                quad: q.value,
                sum,
                err: (q.value - sum).norm(),
            });
        }
    }
    let floor = quads
        .iter()
        .map(|(_, q)| 10.0 * (q.abs_error_estimate + tol))
        .fold(0.0, f64::max);
    let mut verdicts = Vec::new();
    if budget.is_none() {
        for n in 1..=terms {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.n == n && r.err > floor)
                .map(|r| (r.lambda, r.err))
                .collect();
            let bound = -((e.d + n) as f64) / 2.0 + SLOPE_SLACK;
            let v = if pts.len() < 3 {
                Verdict::Exact
            } else {
                let slope = decay_slope(&pts)?;
                if slope <= bound {
                    Verdict::Pass(slope)
                } else {
                    Verdict::Fail(slope)
                }
            };
            verdicts.push((n, bound, v));
        }
    }

    writeln!(
        out,
        "{:>10}  {:>2}  {:>18}  {:>18}  {:>18}  {:>18}  {:>18}",
        "lambda", "N", "quad_re", "quad_im", "sum_re", "sum_im", "abs_error"
    )
    .unwrap();
    for r in &rows {
        writeln!(
            out,
            "{:>10}  {:>2}  {:>18}  {:>18}  {:>18}  {:>18}  {:>18}",
            sci(r.lambda),
            r.n,
            sci(r.quad.re),
            sci(r.quad.im),
            sci(r.sum.re),
            sci(r.sum.im),
            sci(r.err)
        )
        .unwrap();
    }
    let mut failed = Vec::new();
    for (n, bound, v) in &verdicts {
        let line = match v {
            Verdict::Pass(s) => format!("N={n}: slope {} <= {}  PASS", sci(*s), sci(*bound)),
            Verdict::Exact => format!("N={n}: remainder at quadrature noise level  PASS"),
            Verdict::Fail(s) => {
                failed.push(*n);
                format!("N={n}: slope {} > {}  FAIL", sci(*s), sci(*bound))
            }
        };
        writeln!(out, "{line}").unwrap();
    }

    if let Some(path) = csv_path {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "lambda",
            "N",
            "quadrature_re",
            "quadrature_im",
            "partial_sum_re",
            "partial_sum_im",
            "abs_error",
            "fitted_slope_per_N",
        ])?;
        for r in &rows {
            let slope = verdicts
                .iter()
                .find(|(n, _, _)| *n == r.n)
                .and_then(|(_, _, v)| match v {
                    Verdict::Pass(s) | Verdict::Fail(s) => Some(sci(*s)),
                    Verdict::Exact => None,
                })
                .unwrap_or_default();
            w.write_record([
                sci(r.lambda),
                r.n.to_string(),
                sci(r.quad.re),
                sci(r.quad.im),
                sci(r.sum.re),
                sci(r.sum.im),
                sci(r.err),
                slope,
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
    }

    if let Some((lambda, best)) = budget {
        writeln!(
            out,
            "quadrature budget exceeded at lambda = {}; partial report",
            sci(lambda)
        )
        .unwrap();
        return Err(QuadError::BudgetExceeded(best).into());
    }
    if !failed.is_empty() {
        return Err(CliError::Failed(format!(
            "decay check failed for N = {failed:?}"
        )));
    }
    Ok(())
}
