//! Asymptotic expansions of saddle-point integrals
//! `I(λ) = ∫ e^{-λφ(x)} A(x) dx` with complex analytic phase.
#![no_std]

#[cfg_attr(test, macro_use)]
extern crate alloc;

pub mod expansion;
pub mod expr;
pub mod genfun;
pub mod hessian;
pub mod linalg;
pub mod morse;
pub mod multiseries;
pub mod quad;
pub mod standard_phase;

use thiserror::Error;

/// Any failure from the library, for callers that do not need to distinguish modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] expr::ParseError),
    #[error(transparent)]
    Expansion(#[from] expansion::ExpansionError),
    #[error(transparent)]
    Quadrature(#[from] quad::QuadError),
    #[error(transparent)]
    GenFun(#[from] genfun::GenFunError),
}
