//! Problem files: one JSON object per problem, with optional embedded expectations.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use saddle_core::expansion::Domain;
use saddle_core::expr::{parse_with, Expr, Func};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexValue {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        Complex64::new(v.re, v.im)
    }
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientValue {
    /// Index into the reported stationary points, in print order.
    #[serde(default)]
    pub point: usize,
    pub l: u32,
    pub value: ComplexValue,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    /// Exit status the problem should produce; checked by the test suite, not the binary.
    pub exit_code: Option<i32>,
    pub points: Option<usize>,
    #[serde(default)]
    pub coefficients: Vec<CoefficientValue>,
    /// Leading genfun prediction `1/|v1'(1) - v2'(1)|`.
    pub prediction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub csv: Option<PathBuf>,
}

fn default_amplitude() -> String {
    "1".into()
}

fn default_order() -> u32 {
    2
}

fn default_verify_terms() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    pub variables: Vec<String>,
    pub phase: String,
    #[serde(default = "default_amplitude")]
    pub amplitude: String,
    pub domain: Vec<[f64; 2]>,
    #[serde(default)]
    pub seeds: Vec<Vec<f64>>,
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_verify_terms")]
    pub verify_terms: usize,
    /// Named complex constants usable in the expressions.
    #[serde(default)]
    pub parameters: BTreeMap<String, ComplexValue>,
    pub max_evaluations: Option<u64>,
    /// Replace computed coefficients before verifying (negative controls).
    #[serde(default)]
    pub override_coefficients: Vec<CoefficientValue>,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub expect: Expectations,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenFunFile {
    pub v1: String,
    pub v2: String,
    pub kappas: Vec<f64>,
    pub s_values: Vec<usize>,
    /// Also tabulate the edge `r = round(v1'(1) s)`.
    #[serde(default)]
    pub boundary: bool,
    #[serde(default)]
    pub expect: Expectations,
}

/// A problem file with its expressions parsed.
#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    pub phase: Expr,
    pub amplitude: Expr,
    pub domain: Domain,
}

const RESERVED: [&str; 2] = ["i", "pi"];

fn check_names(names: &[String]) -> Result<(), CliError> {
    for (k, n) in names.iter().enumerate() {
        let valid = n
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid || RESERVED.contains(&n.as_str()) || Func::from_name(n).is_some() {
            return Err(CliError::Invalid(format!("`{n}` cannot be used as a name")));
        }
        if names[..k].contains(n) {
            return Err(CliError::Invalid(format!("name `{n}` declared twice")));
        }
    }
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Json(path.to_path_buf(), e))
}

pub fn parse_field(
    field: &'static str,
    text: &str,
    names: &[&str],
    bindings: &[(&str, Expr)],
) -> Result<Expr, CliError> {
    parse_with(text, names, bindings).map_err(|source| CliError::Expression {
        field,
        text: text.to_string(),
        source,
    })
}

impl Problem {
    pub fn load(path: &Path) -> Result<Problem, CliError> {
        Problem::from_file(read_json(path)?)
    }

    pub fn from_file(file: ProblemFile) -> Result<Problem, CliError> {
        let d = file.dimension;
        if d == 0 || file.variables.len() != d || file.domain.len() != d {
            return Err(CliError::Invalid(format!(
                "dimension {d} needs {d} variables and {d} domain intervals"
            )));
        }
        let params: Vec<String> = file.parameters.keys().cloned().collect();
        let mut all = file.variables.clone();
        all.extend(params.iter().cloned());
        check_names(&all)?;
        for s in &file.seeds {
            if s.len() != d {
                return Err(CliError::Invalid(format!(
                    "seed {s:?} has the wrong length"
                )));
            }
        }
        let names: Vec<&str> = file.variables.iter().map(String::as_str).collect();
        let bindings: Vec<(&str, Expr)> = file
            .parameters
            .iter()
            .map(|(k, v)| (k.as_str(), Expr::constant((*v).into())))
            .collect();
        let phase = parse_field("phase", &file.phase, &names, &bindings)?;
        let amplitude = parse_field("amplitude", &file.amplitude, &names, &bindings)?;
        let domain = Domain::new(file.domain.iter().map(|b| (b[0], b[1])).collect())
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        Ok(Problem {
            file,
            phase,
            amplitude,
            domain,
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.file.variables.iter().map(String::as_str).collect()
    }
}

/// `"x=0.1,y=-2"` into a point ordered like `names`.
pub fn parse_seed(text: &str, names: &[&str]) -> Result<Vec<f64>, CliError> {
    let mut point = vec![None; names.len()];
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("seed entry `{part}` is not name=value")))?;
        let k = names
            .iter()
            .position(|n| *n == name.trim())
            .ok_or_else(|| {
                CliError::Invalid(format!("seed names unknown variable `{}`", name.trim()))
            })?;
        let v: f64 = value.trim().parse().map_err(|_| {
            CliError::Invalid(format!("seed value `{}` is not a number", value.trim()))
        })?;
        point[k] = Some(v);
    }
    point
        .into_iter()
        .zip(names)
        .map(|(v, n)| v.ok_or_else(|| CliError::Invalid(format!("seed is missing `{n}`"))))
        .collect()
}
