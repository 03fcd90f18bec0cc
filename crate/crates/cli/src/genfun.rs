use std::fmt::Write;
use std::path::Path;

use saddle_core::genfun::{
    boundary_limit, boundary_u, exact_coefficients, saddle_prediction, GenFunError, GenFunProblem,
};

use crate::error::CliError;
use crate::fmt::sci;
use crate::problem::{parse_field, read_json, GenFunFile};

pub fn run(path: &Path, out: &mut String) -> Result<(), CliError> {
    let file: GenFunFile = read_json(path)?;
    if file.kappas.is_empty() || file.s_values.is_empty() || file.s_values.contains(&0) {
        return Err(CliError::Invalid(
            "genfun needs nonempty kappas and positive s_values".into(),
        ));
    }
    if file.kappas.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(CliError::Invalid("kappas must be positive".into()));
    }
    let v1 = parse_field("v1", &file.v1, &["z"], &[])?;
    let v2 = parse_field("v2", &file.v2, &["z"], &[])?;
    let s_max = *file.s_values.iter().max().unwrap();
    let base = GenFunProblem::new(v1, v2, file.kappas[0], s_max)?;
    let (d1, d2) = base.derivatives();
    let top = file.kappas.iter().copied().fold(d1.max(d2), f64::max);
    let r_max = (top * s_max as f64).ceil() as usize + 1;
    let table = exact_coefficients(&base, r_max, s_max)?;
    let delta = base.delta();

    writeln!(
        out,
        "v1'(1) = {}, v2'(1) = {}, 1/|v1'(1) - v2'(1)| = {}",
        sci(d1),
        sci(d2),
        sci(1.0 / delta)
    )
    .unwrap();
    for &kappa in &file.kappas {
        let p = base.with_kappa(kappa);
        let (label, predicted) = match saddle_prediction(&p) {
            Ok(pred) => (
                format!(
                    "interior, stationary point p = {}, expansion c0/(2 pi) = {}",
                    sci(pred.stationary_point.0),
                    sci(pred.pipeline.re)
                ),
                Some(pred.value),
            ),
            Err(GenFunError::Boundary { edge, .. }) => (
                format!(
                    "boundary branch at kappa = {}; limit is half the interior value",
                    sci(edge)
                ),
                Some(0.5 / delta),
            ),
            Err(GenFunError::Outside { lo, hi, .. }) => (
                format!(
                    "outside ({}, {}); coefficients are exponentially small",
                    sci(lo),
                    sci(hi)
                ),
                None,
            ),
            Err(e) => return Err(e.into()),
        };
        writeln!(out, "kappa = {}: {label}", sci(kappa)).unwrap();
        writeln!(
            out,
            "  {:>6}  {:>6}  {:>18}  {:>18}  {:>18}",
            "s", "r", "a_rs", "prediction", "ratio"
        )
        .unwrap();
        for &s in &file.s_values {
            let r = (kappa * s as f64).round() as usize;
            let a = table.get(r, s).re;
            let (pred, ratio) = match predicted {
                Some(v) => (sci(v), sci(a / v)),
                None => ("-".into(), "-".into()),
            };
            writeln!(
                out,
                "  {s:>6}  {r:>6}  {:>18}  {pred:>18}  {ratio:>18}",
                sci(a)
            )
            .unwrap();
        }
    }
    if file.boundary {
        writeln!(out, "edge r = round(v1'(1) s):").unwrap();
        writeln!(
            out,
            "  {:>6}  {:>6}  {:>18}  {:>18}  {:>18}  {:>18}",
            "s", "r", "u", "a_rs", "prediction", "ratio"
        )
        .unwrap();
        for &s in &file.s_values {
            let r = (d1 * s as f64).round() as usize;
            let a = table.get(r, s).re;
            match boundary_u(&base, r, s) {
                Ok(u) => {
                    let pred = boundary_limit(&base, u);
                    writeln!(
                        out,
                        "  {s:>6}  {r:>6}  {:>18}  {:>18}  {:>18}  {:>18}",
                        sci(u),
                        sci(a),
                        sci(pred),
                        sci(a / pred)
                    )
                    .unwrap();
                }
                Err(GenFunError::DegenerateBoundary) => {
                    writeln!(
                        out,
                        "  {s:>6}  {r:>6}  {:>18}  {:>18}  {:>18}  {:>18}",
                        "degenerate",
                        sci(a),
                        "-",
                        "-"
                    )
                    .unwrap();
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    if let Some(want) = file.expect.prediction {
        let got = 1.0 / delta;
        let ok = (got - want).abs() <= 1e-9 * want.abs().max(1.0);
        writeln!(
            out,
            "expect prediction {}: {}",
            sci(want),
            if ok { "ok" } else { "MISMATCH" }
        )
        .unwrap();
        if !ok {
            return Err(CliError::Failed(format!(
                "prediction {} differs from expected {}",
                sci(got),
                sci(want)
            )));
        }
    }
    Ok(())
}
