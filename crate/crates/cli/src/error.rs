use std::path::PathBuf;

use saddle_core::expansion::ExpansionError;
use saddle_core::expr::ParseError;
use saddle_core::genfun::GenFunError;
use saddle_core::hessian::HessianError;
use saddle_core::morse::MorseError;
use saddle_core::quad::QuadError;
use thiserror::Error;

pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_NO_STATIONARY: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}: malformed problem file: {1}")]
    Json(PathBuf, serde_json::Error),
    #[error("{field} `{text}`: {source}")]
    Expression {
        field: &'static str,
        text: String,
        source: ParseError,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    GenFun(#[from] GenFunError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Failed(String),
}

fn is_degenerate(e: &ExpansionError) -> bool {
    matches!(
        e,
        ExpansionError::Degenerate { .. }
            | ExpansionError::Hessian(HessianError::Degenerate(_))
            | ExpansionError::Morse(MorseError::Hessian(HessianError::Degenerate(_)))
            | ExpansionError::Morse(MorseError::SingularHessian)
    )
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(..)
            | CliError::Json(..)
            | CliError::Expression { .. }
            | CliError::Invalid(_) => EXIT_INPUT,
            CliError::Expansion(e) | CliError::GenFun(GenFunError::Expansion(e))
                if is_degenerate(e) =>
            {
                EXIT_DEGENERATE
            }
            CliError::Expansion(ExpansionError::NoCriticalPoints { .. })
            | CliError::GenFun(GenFunError::Expansion(ExpansionError::NoCriticalPoints {
                ..
            })) => EXIT_NO_STATIONARY,
            CliError::GenFun(
                GenFunError::NotNormalized { .. }
                | GenFunError::BadDerivative { .. }
                | GenFunError::EqualDerivatives,
            ) => EXIT_INPUT,
            CliError::Quadrature(QuadError::BudgetExceeded(_)) => EXIT_BUDGET,
            _ => EXIT_FAILED_CHECK,
        }
    }
}
