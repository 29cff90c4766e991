//! Exact multivariate rational-function algebra.
//!
//! Polynomials have rational coefficients and are stored sparsely in a fixed
//! graded-lexicographic order, so equal values have identical
//! representations. Rational expressions are reduced by polynomial gcd with
//! a monic denominator, which makes `==` a decision procedure for identities.

pub mod algebraic;
pub mod closed;
pub mod gcd;
pub mod parse;
pub mod poly;
mod print;
pub mod rational;
pub mod scalar;
pub mod symbol;

pub use closed::{Atom, AtomKind, ClosedForm};
pub use parse::{parse_closed, parse_expr, Context};
pub use poly::{Monomial, Poly};
pub use rational::{Bindings, Frac, RationalExpr};
pub use scalar::Scalar;
pub use symbol::{Var, VarKind};

/// Errors raised by the symbolic kernel.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("undeclared identifier '{0}'")]
    Undeclared(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole: {0}")]
    Pole(String),
    #[error("unbound symbol {0}")]
    Unbound(String),
    #[error("not rational: {0}")]
    NonRational(String),
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
}

/// Numeric evaluation of either carrier at a point given by `f`.
pub fn eval_numeric(e: &ClosedForm, f: &dyn Fn(Var) -> Option<f64>) -> Result<f64, ExprError> {
    e.eval_f64(f)
}

/// Quotient-rule derivative of `e` in `v`, normalized.
pub fn differentiate(e: &RationalExpr, v: Var) -> RationalExpr {
    e.differentiate(v)
}
