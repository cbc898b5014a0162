//! The requirements language: lexing, parsing, normalization to `f(s) >= 0`
//! and signal-bound inference.

mod ast;
mod diag;
mod interval;
mod lexer;
mod normalize;
mod parser;
mod pretty;

pub use ast::{
    BinOp, Bounds, CmpOp, Comparison, Expr, RequirementClass, RequirementSpec, TaskSpecDraft,
    Tier, VarDecl,
};
pub use diag::{DiagCode, Diagnostic, Diagnostics, Severity};
pub use interval::{enclose, infer_bounds, BoundsError, Interval};
pub use lexer::{tokenize, Tok, Token};
pub use normalize::{normalize_comparison, NormalizeError, NormalizeWarning, Normalized};
pub use parser::parse_spec;
pub use pretty::{pretty_print, pretty_requirement};
