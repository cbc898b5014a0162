//! Canonicalization of comparisons into a single signal `f` with `f(s) >= 0`.

use thiserror::Error;

use super::ast::{CmpOp, Comparison, Expr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("`==` needs a tolerance band, e.g. `x == 1.0 tol 0.01`")]
    MissingTolerance,
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(String),
    #[error("`tol` only applies to `==` comparisons")]
    UnexpectedTolerance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeWarning {
    /// `>`/`<` evaluated as `>=`/`<=`.
    StrictComparison,
    /// The normalized signal does not depend on the state.
    TrivialPredicate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub f: Expr,
    pub strict: bool,
    pub warnings: Vec<NormalizeWarning>,
}

fn difference(a: &Expr, b: &Expr) -> Expr {
    if a == b {
        return Expr::Num(0.0);
    }
    match b {
        Expr::Num(z) if *z == 0.0 => a.clone(),
        _ => Expr::sub(a.clone(), b.clone()),
    }
}

/// `a >= b` → `a - b`, `a <= b` → `b - a`, `a == b tol e` → `e - |a - b|`.
/// Strict forms map like their non-strict counterparts.
pub fn normalize_comparison(c: &Comparison) -> Result<Normalized, NormalizeError> {
    let mut warnings = Vec::new();
    if c.op.is_strict() {
        warnings.push(NormalizeWarning::StrictComparison);
    }
    if c.op != CmpOp::Eq && c.tol.is_some() {
        return Err(NormalizeError::UnexpectedTolerance);
    }
    let f = match c.op {
        CmpOp::Ge | CmpOp::Gt => difference(&c.lhs, &c.rhs),
        CmpOp::Le | CmpOp::Lt => difference(&c.rhs, &c.lhs),
        CmpOp::Eq => {
            let tol = c.tol.ok_or(NormalizeError::MissingTolerance)?;
            if !(tol > 0.0) {
                return Err(NormalizeError::NonPositiveTolerance(tol.to_string()));
            }
            let gap = if c.lhs == c.rhs {
                Expr::Num(0.0)
            } else {
                Expr::Abs(Box::new(Expr::sub(c.lhs.clone(), c.rhs.clone())))
            };
            if gap == Expr::Num(0.0) {
                Expr::Num(tol)
            } else {
                Expr::sub(Expr::Num(tol), gap)
            }
        }
    };
    if f.is_constant() {
        warnings.push(NormalizeWarning::TrivialPredicate);
    }
    Ok(Normalized {
        f,
        strict: c.op.is_strict(),
        warnings,
    })
}
