//! Line-oriented recursive-descent parser for `.req` files.
//!
//! Each non-empty line holds one declaration:
//!
//! ```text
//! var d_walls in [-0.5, 5.0]
//! const v_max = 3.5
//! ensure "no_collision": d_walls > 0
//! achieve "lap": L == 1.0 tol 0.01
//! encourage "speed_max": v <= v_max bounds [-6.5, 3.5]
//! ```
//!
//! Names must be declared before use. Errors are collected per line and the
//! parser resumes at the next line, so one call reports every bad line.

use std::collections::HashMap;

use super::ast::{BinOp, CmpOp, Comparison, Expr, RequirementClass, RequirementSpec, TaskSpecDraft, VarDecl};
use super::diag::{DiagCode, Diagnostic, Diagnostics};
use super::interval::{infer_bounds, BoundsError};
use super::lexer::{tokenize, Tok, Token};
use super::normalize::{normalize_comparison, NormalizeError, NormalizeWarning};

const MAX_DEPTH: usize = 128;

const RESERVED: &[&str] = &[
    "var", "const", "in", "tol", "bounds", "ensure", "achieve", "conquer", "encourage", "abs",
    "min", "max", "and", "or", "not",
];

/// Parses a spec file into an unvalidated draft.
///
/// Total: any input yields either a draft or a non-empty diagnostic list.
pub fn parse_spec(text: &str) -> Result<TaskSpecDraft, Diagnostics> {
    let tokens = tokenize(text);
    let mut state = Parser::default();
    for line in tokens.split(|t| matches!(t.tok, Tok::Newline | Tok::Eof)) {
        if line.is_empty() {
            continue;
        }
        if let Err(d) = state.line(line) {
            state.errors.push(d);
        }
    }
    if state.errors.is_empty() {
        Ok(TaskSpecDraft {
            decls: state.decls,
            requirements: state.requirements,
            warnings: state.warnings,
        })
    } else {
        Err(Diagnostics(state.errors))
    }
}

#[derive(Default)]
struct Parser {
    decls: Vec<VarDecl>,
    var_index: HashMap<String, usize>,
    consts: HashMap<String, f64>,
    requirement_names: HashMap<String, usize>,
    requirements: Vec<RequirementSpec>,
    warnings: Vec<Diagnostic>,
    errors: Vec<Diagnostic>,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(v) => format!("number {v}"),
        Tok::Str(s) => format!("string \"{s}\""),
        Tok::Newline | Tok::Eof => "end of line".into(),
        Tok::Error(m) => m.clone(),
        other => format!("{other:?}"),
    }
}

/// Cursor over the tokens of one line.
struct Line<'a> {
    toks: &'a [Token],
    pos: usize,
    depth: usize,
    end: (usize, usize),
}

impl<'a> Line<'a> {
    fn new(toks: &'a [Token]) -> Self {
        let last = toks.last().expect("non-empty line");
        let width = match &last.tok {
            Tok::Ident(s) | Tok::Str(s) => s.chars().count(),
            _ => 1,
        };
        Self {
            toks,
            pos: 0,
            depth: 0,
            end: (last.line, last.col + width),
        }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_tok(&self) -> Option<&'a Tok> {
        self.peek().map(|t| &t.tok)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or(self.end)
    }

    fn error(&self, code: DiagCode, msg: impl Into<String>) -> Diagnostic {
        let (line, col) = self.here();
        Diagnostic::new(code, line, col, msg)
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        match self.peek_tok() {
            Some(Tok::Connective(op)) => self.error(
                DiagCode::NonNormalizablePredicate,
                format!("logical connective `{op}` is not part of the requirement language"),
            ),
            Some(Tok::Ident(w)) if matches!(w.as_str(), "and" | "or" | "not") => self.error(
                DiagCode::NonNormalizablePredicate,
                format!("logical connective `{w}` is not part of the requirement language"),
            ),
            Some(t) => self.error(
                DiagCode::SyntaxError,
                format!("expected {expected}, found {}", describe(t)),
            ),
            None => self.error(
                DiagCode::SyntaxError,
                format!("expected {expected}, found end of line"),
            ),
        }
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), Diagnostic> {
        if self.peek_tok() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), Diagnostic> {
        match self.peek_tok() {
            Some(Tok::Ident(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek_tok(), Some(Tok::Ident(w)) if w == kw)
    }

    fn ident(&mut self, what: &str) -> Result<(String, (usize, usize)), Diagnostic> {
        let pos = self.here();
        match self.peek_tok() {
            Some(Tok::Ident(name)) => {
                if RESERVED.contains(&name.as_str()) {
                    return Err(self.error(
                        DiagCode::SyntaxError,
                        format!("`{name}` is a reserved word"),
                    ));
                }
                self.pos += 1;
                Ok((name.clone(), pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn finish(&self) -> Result<(), Diagnostic> {
        match self.peek_tok() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of line")),
        }
    }
}

impl Parser {
    fn line(&mut self, toks: &[Token]) -> Result<(), Diagnostic> {
        let mut l = Line::new(toks);
        let head = match l.peek_tok() {
            Some(Tok::Ident(w)) => w.clone(),
            _ => return Err(l.unexpected("`var`, `const` or a requirement keyword")),
        };
        match head.as_str() {
            "var" => self.var_decl(&mut l),
            "const" => self.const_decl(&mut l),
            kw => match RequirementClass::from_keyword(kw) {
                Some(class) => self.requirement(&mut l, class),
                None => Err(l.unexpected("`var`, `const` or a requirement keyword")),
            },
        }
    }

    fn check_fresh_name(&self, name: &str, pos: (usize, usize)) -> Result<(), Diagnostic> {
        if self.var_index.contains_key(name) || self.consts.contains_key(name) {
            return Err(Diagnostic::new(
                DiagCode::DuplicateName,
                pos.0,
                pos.1,
                format!("`{name}` is already declared"),
            ));
        }
        Ok(())
    }

    fn var_decl(&mut self, l: &mut Line) -> Result<(), Diagnostic> {
        l.bump();
        let (name, pos) = l.ident("a variable name")?;
        self.check_fresh_name(&name, pos)?;
        l.expect_keyword("in")?;
        let range_pos = l.here();
        let (lo, hi) = self.range(l)?;
        l.finish()?;
        if !(lo < hi) {
            return Err(Diagnostic::new(
                DiagCode::InvalidRange,
                range_pos.0,
                range_pos.1,
                format!("empty range [{lo}, {hi}] for `{name}`: need lo < hi"),
            ));
        }
        self.var_index.insert(name.clone(), self.decls.len());
        self.decls.push(VarDecl::new(name, lo, hi));
        Ok(())
    }

    fn const_decl(&mut self, l: &mut Line) -> Result<(), Diagnostic> {
        l.bump();
        let (name, pos) = l.ident("a constant name")?;
        self.check_fresh_name(&name, pos)?;
        l.expect(&Tok::Assign, "`=`")?;
        let value = self.const_expr(l)?;
        l.finish()?;
        self.consts.insert(name, value);
        Ok(())
    }

    fn range(&self, l: &mut Line) -> Result<(f64, f64), Diagnostic> {
        l.expect(&Tok::LBracket, "`[`")?;
        let lo = self.const_expr(l)?;
        l.expect(&Tok::Comma, "`,`")?;
        let hi = self.const_expr(l)?;
        l.expect(&Tok::RBracket, "`]`")?;
        Ok((lo, hi))
    }

    fn const_expr(&self, l: &mut Line) -> Result<f64, Diagnostic> {
        let pos = l.here();
        let e = self.expr(l)?;
        if !e.is_constant() {
            return Err(Diagnostic::new(
                DiagCode::SyntaxError,
                pos.0,
                pos.1,
                "expected a constant expression",
            ));
        }
        let v = e.eval(&[]);
        if !v.is_finite() {
            return Err(Diagnostic::new(
                DiagCode::SyntaxError,
                pos.0,
                pos.1,
                format!("constant expression evaluates to {v}"),
            ));
        }
        Ok(v)
    }

    fn requirement(&mut self, l: &mut Line, class: RequirementClass) -> Result<(), Diagnostic> {
        let line_no = l.here().0;
        l.bump();
        let name_pos = l.here();
        let name = match l.peek_tok() {
            Some(Tok::Str(s)) => {
                l.pos += 1;
                s.clone()
            }
            _ => return Err(l.unexpected("a quoted requirement name")),
        };
        if name.is_empty() {
            return Err(Diagnostic::new(
                DiagCode::SyntaxError,
                name_pos.0,
                name_pos.1,
                "requirement name must not be empty",
            ));
        }
        if let Some(prev) = self.requirement_names.get(&name) {
            return Err(Diagnostic::new(
                DiagCode::DuplicateName,
                name_pos.0,
                name_pos.1,
                format!("requirement \"{name}\" already declared on line {prev}"),
            ));
        }
        l.expect(&Tok::Colon, "`:`")?;
        let pred_pos = l.here();
        let lhs = self.expr(l)?;
        let op_pos = l.here();
        let op = match l.peek_tok() {
            Some(Tok::Ge) => CmpOp::Ge,
            Some(Tok::Gt) => CmpOp::Gt,
            Some(Tok::Le) => CmpOp::Le,
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::EqEq) => CmpOp::Eq,
            _ => return Err(l.unexpected("a comparison (`>=`, `>`, `<=`, `<`, `==`)")),
        };
        l.pos += 1;
        let rhs = self.expr(l)?;
        if matches!(
            l.peek_tok(),
            Some(Tok::Ge | Tok::Gt | Tok::Le | Tok::Lt | Tok::EqEq)
        ) {
            return Err(l.error(
                DiagCode::NonNormalizablePredicate,
                "chained comparisons are conjunctions; write one requirement per comparison",
            ));
        }
        let mut tol = None;
        if l.at_keyword("tol") {
            l.pos += 1;
            tol = Some(self.const_expr(l)?);
        }
        let mut explicit = None;
        if l.at_keyword("bounds") {
            l.pos += 1;
            explicit = Some(self.range(l)?);
        }
        l.finish()?;

        let normalized = normalize_comparison(&Comparison { lhs, op, rhs, tol }).map_err(|e| {
            let code = match e {
                NormalizeError::MissingTolerance | NormalizeError::UnexpectedTolerance => {
                    DiagCode::NonNormalizablePredicate
                }
                NormalizeError::NonPositiveTolerance(_) => DiagCode::SyntaxError,
            };
            Diagnostic::new(code, op_pos.0, op_pos.1, e.to_string())
        })?;
        for w in &normalized.warnings {
            let (code, msg) = match w {
                NormalizeWarning::StrictComparison => (
                    DiagCode::StrictComparison,
                    format!("strict `{op}` is evaluated as its non-strict form"),
                ),
                NormalizeWarning::TrivialPredicate => (
                    DiagCode::TrivialPredicate,
                    "predicate does not depend on the state".to_string(),
                ),
            };
            self.warnings
                .push(Diagnostic::new(code, op_pos.0, op_pos.1, msg));
        }
        let bounds = infer_bounds(&normalized.f, &self.decls, explicit).map_err(|e| {
            let code = match e {
                BoundsError::TriviallySatisfied { .. } => DiagCode::TriviallySatisfied,
                BoundsError::TriviallyViolated { .. } => DiagCode::TriviallyViolated,
                BoundsError::UnboundedSignal(_) => DiagCode::UnboundedSignal,
            };
            Diagnostic::new(code, pred_pos.0, pred_pos.1, e.to_string())
        })?;

        self.requirement_names.insert(name.clone(), line_no);
        self.requirements.push(RequirementSpec {
            class,
            name,
            f: normalized.f,
            bounds,
            strict: normalized.strict,
            explicit_bounds: explicit.is_some(),
            line: line_no,
        });
        Ok(())
    }

    // expr := term (('+' | '-') term)*
    fn expr(&self, l: &mut Line) -> Result<Expr, Diagnostic> {
        l.depth += 1;
        if l.depth > MAX_DEPTH {
            return Err(l.error(DiagCode::SyntaxError, "expression nested too deeply"));
        }
        let mut acc = self.term(l)?;
        loop {
            let op = match l.peek_tok() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            l.pos += 1;
            let rhs = self.term(l)?;
            acc = Expr::bin(op, acc, rhs);
        }
        l.depth -= 1;
        Ok(acc)
    }

    // term := unary (('*' | '/') unary)*
    fn term(&self, l: &mut Line) -> Result<Expr, Diagnostic> {
        let mut acc = self.unary(l)?;
        loop {
            let op = match l.peek_tok() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            l.pos += 1;
            let rhs = self.unary(l)?;
            acc = Expr::bin(op, acc, rhs);
        }
        Ok(acc)
    }

    // unary := '-' unary | primary ; negated literals fold into the literal
    fn unary(&self, l: &mut Line) -> Result<Expr, Diagnostic> {
        if l.peek_tok() == Some(&Tok::Minus) {
            l.pos += 1;
            l.depth += 1;
            if l.depth > MAX_DEPTH {
                return Err(l.error(DiagCode::SyntaxError, "expression nested too deeply"));
            }
            let inner = self.unary(l)?;
            l.depth -= 1;
            return Ok(match inner {
                Expr::Num(v) => Expr::Num(-v),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.primary(l)
    }

    fn primary(&self, l: &mut Line) -> Result<Expr, Diagnostic> {
        let pos = l.here();
        match l.peek_tok() {
            Some(Tok::Number(v)) => {
                l.pos += 1;
                Ok(Expr::Num(*v))
            }
            Some(Tok::LParen) => {
                l.pos += 1;
                let e = self.expr(l)?;
                l.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Pipe) => {
                l.pos += 1;
                let e = self.expr(l)?;
                l.expect(&Tok::Pipe, "closing `|`")?;
                Ok(Expr::Abs(Box::new(e)))
            }
            Some(Tok::Ident(name)) if matches!(name.as_str(), "abs" | "min" | "max") => {
                let func = name.clone();
                l.pos += 1;
                l.expect(&Tok::LParen, &format!("`(` after `{func}`"))?;
                let mut args = vec![self.expr(l)?];
                while l.peek_tok() == Some(&Tok::Comma) {
                    l.pos += 1;
                    args.push(self.expr(l)?);
                }
                l.expect(&Tok::RParen, "`)`")?;
                match (func.as_str(), args.len()) {
                    ("abs", 1) => Ok(Expr::Abs(Box::new(args.pop().expect("one arg")))),
                    ("abs", n) => Err(Diagnostic::new(
                        DiagCode::SyntaxError,
                        pos.0,
                        pos.1,
                        format!("`abs` takes one argument, got {n}"),
                    )),
                    (_, 1) => Err(Diagnostic::new(
                        DiagCode::SyntaxError,
                        pos.0,
                        pos.1,
                        format!("`{func}` needs at least two arguments"),
                    )),
                    ("min", _) => Ok(Expr::Min(args)),
                    _ => Ok(Expr::Max(args)),
                }
            }
            Some(Tok::Ident(name)) if !RESERVED.contains(&name.as_str()) => {
                l.pos += 1;
                if l.peek_tok() == Some(&Tok::LParen) {
                    return Err(Diagnostic::new(
                        DiagCode::SyntaxError,
                        pos.0,
                        pos.1,
                        format!("unknown function `{name}` (available: abs, min, max)"),
                    ));
                }
                if let Some(v) = self.consts.get(name) {
                    Ok(Expr::Num(*v))
                } else if let Some(&index) = self.var_index.get(name) {
                    Ok(Expr::var(name.clone(), index))
                } else {
                    Err(Diagnostic::new(
                        DiagCode::UnknownVariable,
                        pos.0,
                        pos.1,
                        format!("`{name}` is not a declared variable or constant"),
                    ))
                }
            }
            _ => Err(l.unexpected("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(text: &str) -> TaskSpecDraft {
        parse_spec(text).unwrap_or_else(|d| panic!("unexpected diagnostics:\n{d}"))
    }

    fn parse_err(text: &str) -> Diagnostics {
        parse_spec(text).expect_err("expected diagnostics")
    }

    #[test]
    fn empty_input_is_empty_draft() {
        let d = parse_ok("");
        assert!(d.decls.is_empty() && d.requirements.is_empty());
        assert!(parse_ok("# only a comment\n\n").requirements.is_empty());
    }

    #[test]
    fn ensure_strict_wall_distance() {
        let d = parse_ok("var d_walls in [-0.5, 5.0]\nensure \"no_collision\": d_walls > 0\n");
        let r = &d.requirements[0];
        assert_eq!(r.class, RequirementClass::Safety);
        assert_eq!(r.name, "no_collision");
        assert_eq!(r.f, Expr::var("d_walls", 0));
        assert!(r.strict);
        assert_eq!((r.bounds.lo, r.bounds.hi), (-0.5, 5.0));
        assert_eq!(d.warnings[0].code, DiagCode::StrictComparison);
    }

    #[test]
    fn achieve_with_tolerance() {
        let d = parse_ok("var L in [0, 1]\nachieve \"lap\": L == 1.0 tol 0.01");
        let r = &d.requirements[0];
        assert_eq!(r.class, RequirementClass::TargetAchieve);
        assert_eq!(r.f.to_string(), "0.01 - abs(L - 1)");
        assert!((r.bounds.lo + 0.99).abs() < 1e-12);
        assert!((r.bounds.hi - 0.01).abs() < 1e-12);
    }

    #[test]
    fn explicit_bounds_and_constants() {
        let d = parse_ok(
            "var v in [0.0, 10.0]\nconst v_max = 7 / 2\nencourage \"speed_max\": v <= v_max bounds [-6.5, 3.5]",
        );
        let r = &d.requirements[0];
        assert_eq!(r.class, RequirementClass::Comfort);
        assert_eq!(r.f.to_string(), "3.5 - v");
        assert!(r.explicit_bounds);
    }

    #[test]
    fn pipes_and_unicode() {
        let d = parse_ok("var α in [-1, 1]\nencourage \"steer\": |α| ≤ 0.1");
        assert_eq!(d.requirements[0].f.to_string(), "0.1 - abs(α)");
    }

    #[test]
    fn conquer_keyword() {
        let d = parse_ok("var x in [-2, 2]\nconquer \"hold\": x >= 1");
        assert_eq!(d.requirements[0].class, RequirementClass::TargetConquer);
    }

    #[test]
    fn error_codes() {
        assert!(parse_err("ensure \"a\": x > 0").has(DiagCode::UnknownVariable));
        assert!(parse_err("var x in [0,1]\nvar x in [0,2]").has(DiagCode::DuplicateName));
        assert!(parse_err("var x in [-1,1]\nensure \"a\": x > 0\nensure \"a\": x < 0.5")
            .has(DiagCode::DuplicateName));
        assert!(parse_err("var x in [-1,1]\nensure \"a\": x > 0 or x < -0.5")
            .has(DiagCode::NonNormalizablePredicate));
        assert!(parse_err("var x in [-1,1]\nensure \"a\": x > 0 || x < -0.5")
            .has(DiagCode::NonNormalizablePredicate));
        assert!(parse_err("var x in [-1,1]\nensure \"a\": x != 0")
            .has(DiagCode::NonNormalizablePredicate));
        assert!(parse_err("var x in [-1,1]\nachieve \"a\": x == 0")
            .has(DiagCode::NonNormalizablePredicate));
        assert!(parse_err("var x in [-1,1]\nensure \"a\": -1 < x < 0")
            .has(DiagCode::NonNormalizablePredicate));
        assert!(parse_err("var x in [1,1]").has(DiagCode::InvalidRange));
        assert!(parse_err("var x in [0,1]\nensure \"a\": x >= 0").has(DiagCode::TriviallySatisfied));
        assert!(parse_err("var x in [0,1]\nensure \"a\": x >= x").has(DiagCode::TriviallySatisfied));
        assert!(parse_err("var x in [0,1]\nensure \"a\": x <= 0").has(DiagCode::TriviallyViolated));
        assert!(parse_err("var x in [-1,1]\nensure \"a\": 1 / x >= 0").has(DiagCode::UnboundedSignal));
        assert!(parse_err("var x in [0,1]\nensure x > 0").has(DiagCode::SyntaxError));
        assert!(parse_err("var in in [0,1]").has(DiagCode::SyntaxError));
        assert!(parse_err("var x in [0,1]\nensure \"a\": foo(x) > 0").has(DiagCode::SyntaxError));
    }

    #[test]
    fn identity_comparison_is_rejected_by_bounds() {
        let errs = parse_err("var x in [0,1]\nensure \"a\": x >= x");
        assert_eq!(errs.codes(), vec![DiagCode::TriviallySatisfied]);
    }

    #[test]
    fn reports_every_bad_line_with_positions() {
        let errs = parse_err("var x in [0,1]\nensure \"a\": y > 0\n\nvar 3 in [0,1]\n");
        assert_eq!(errs.0.len(), 2);
        assert_eq!((errs.0[0].line, errs.0[0].col), (2, 13));
        assert_eq!((errs.0[1].line, errs.0[1].col), (4, 5));
        assert_eq!(
            errs.0[0].render("f.req"),
            "f.req:2:13: unknown-variable: `y` is not a declared variable or constant"
        );
    }

    #[test]
    fn deep_nesting_is_a_diagnostic() {
        let text = format!("var x in [-1,1]\nensure \"a\": {}x{} > 0", "(".repeat(5000), ")".repeat(5000));
        assert!(parse_err(&text).has(DiagCode::SyntaxError));
        let text = format!("var x in [-1,1]\nensure \"a\": {}x > 0", "-".repeat(5000));
        assert!(parse_err(&text).has(DiagCode::SyntaxError));
    }

    #[test]
    fn precedence_and_associativity() {
        let d = parse_ok("var a in [-1,1]\nvar b in [1,2]\nensure \"p\": a - b - 1 + 2 * a / b >= -2.5");
        let f = &d.requirements[0].f;
        assert_eq!(f.to_string(), "a - b - 1 + 2 * a / b - -2.5");
        let vals = [0.5, 1.5];
        let expected = 0.5 - 1.5 - 1.0 + 2.0 * 0.5 / 1.5 + 2.5;
        assert!((f.eval(&vals) - expected).abs() < 1e-12);
    }
}
