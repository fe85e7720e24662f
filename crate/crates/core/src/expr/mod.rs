//! Scalar expressions in `x1, x2, x3` and their jet evaluation.

mod ast;
mod jet;
mod parser;

use thiserror::Error;

pub use ast::{BinaryOp, Expr, UnaryOp, Var};
pub use jet::{Jet, JetShape};
pub use parser::{parse_expression, ParseError};

/// An intermediate value left the domain of its operation.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{reason} in `{subexpression}` (argument {value})")]
pub struct DomainError {
    pub subexpression: String,
    pub reason: String,
    pub value: f64,
}

impl DomainError {
    pub(crate) fn new(expr: &Expr, reason: &str, value: f64) -> DomainError {
        DomainError { subexpression: expr.to_string(), reason: reason.to_string(), value }
    }
}
