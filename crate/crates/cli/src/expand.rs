use std::fmt::Write;

use num_complex::Complex64;
use saddle_core::expansion::{expand_problem, ExpandOptions, Expansion};

use crate::error::CliError;
use crate::fmt::{cplx, power, sci};
use crate::problem::{CoefficientValue, Problem};
use crate::Overrides;

pub fn compute(problem: &Problem, ov: &Overrides) -> Result<Expansion, CliError> {
    let order = ov.order.unwrap_or(problem.file.order);
    let seeds = match &ov.seed {
        Some(s) => vec![s.clone()],
        None => problem.file.seeds.clone(),
    };
    let seeds = (!seeds.is_empty()).then_some(seeds);
    Ok(expand_problem(
        &problem.phase,
        &problem.amplitude,
        &problem.domain,
        seeds.as_deref(),
        order,
        ExpandOptions::default(),
    )?)
}

pub fn write_report(problem: &Problem, e: &Expansion, out: &mut String) {
    let names = problem.names();
    let plural = if e.points.len() == 1 { "" } else { "s" };
    writeln!(
        out,
        "dimension {}, order {}, {} stationary point{plural}",
        e.d,
        e.order,
        e.points.len()
    )
    .unwrap();
    for (k, p) in e.points.iter().enumerate() {
        let r = &p.report;
        let at: Vec<String> = names
            .iter()
            .zip(r.real_location())
            .map(|(n, x)| format!("{n} = {}", sci(x)))
            .collect();
        let kind = match r.boundary {
            None => "interior".to_string(),
            Some(f) => format!(
                "boundary face {} = {}, half-space",
                names[f.axis],
                if f.lower {
                    "lower bound"
                } else {
                    "upper bound"
                }
            ),
        };
        writeln!(out, "point {}: {} ({kind})", k + 1, at.join(", ")).unwrap();
        writeln!(out, "  phi(x)            = {}", cplx(r.phi_value)).unwrap();
        writeln!(out, "  A(x)              = {}", cplx(r.amplitude_at)).unwrap();
        writeln!(out, "  det Hess          = {}", cplx(r.hessian.det)).unwrap();
        writeln!(out, "  gradient residual = {}", sci(r.gradient_residual)).unwrap();
        writeln!(
            out,
            "  orientation       = {}",
            if p.orientation > 0.0 { "+1" } else { "-1" }
        )
        .unwrap();
        writeln!(out, "  {:>3}  {:>18}  {:>18}  lambda^", "l", "re", "im").unwrap();
        for (l, c) in p.coefficients.iter().enumerate() {
            let mark = if l >= p.available {
                "  unavailable"
            } else if p.extrapolated && l >= 1 {
                "  *"
            } else {
                ""
            };
            writeln!(
                out,
                "  {l:>3}  {:>18}  {:>18}  {}{mark}",
                sci(c.re),
                sci(c.im),
                power(e.d, l as u32)
            )
            .unwrap();
        }
    }
    if e.points.iter().any(|p| p.extrapolated) {
        writeln!(
            out,
            "* half-space terms beyond the leading one are extrapolated"
        )
        .unwrap();
    }
}

/// Compare against embedded expectations, appending one line per check.
pub fn check_expectations(
    problem: &Problem,
    e: &Expansion,
    out: &mut String,
) -> Result<(), CliError> {
    let ex = &problem.file.expect;
    let mut failures = Vec::new();
    if let Some(n) = ex.points {
        let ok = n == e.points.len();
        writeln!(
            out,
            "expect {n} stationary points: {}",
            if ok { "ok" } else { "MISMATCH" }
        )
        .unwrap();
        if !ok {
            failures.push(format!("found {} stationary points", e.points.len()));
        }
    }
    for CoefficientValue {
        point,
        l,
        value,
        tol,
    } in &ex.coefficients
    {
        let got = e
            .points
            .get(*point)
            .and_then(|p| p.coefficients.get(*l as usize));
        let want: Complex64 = (*value).into();
        let ok = got.is_some_and(|g| (g - want).norm() <= *tol);
        writeln!(
            out,
            "expect c_{l} at point {} = {} (tol {}): {}",
            point + 1,
            cplx(want),
            sci(*tol),
            if ok { "ok" } else { "MISMATCH" }
        )
        .unwrap();
        if !ok {
            failures.push(format!("c_{l} at point {}", point + 1));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "expectation mismatch: {}",
            failures.join(", ")
        )))
    }
}

pub fn run(problem: &Problem, ov: &Overrides, out: &mut String) -> Result<(), CliError> {
    let e = compute(problem, ov)?;
    write_report(problem, &e, out);
    check_expectations(problem, &e, out)
}
