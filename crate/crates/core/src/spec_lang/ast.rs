//! Syntax tree for requirement predicates and the declarations of a spec file.

use std::fmt;

/// A state variable together with the box it ranges over.
#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            lo,
            hi,
        }
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Real-valued expression over declared variables.
///
/// Variable references carry the index of their declaration so evaluation
/// works on a dense valuation slice ordered like the declarations.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var { name: String, index: usize },
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>, index: usize) -> Self {
        Expr::Var {
            name: name.into(),
            index,
        }
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn sub(lhs: Expr, rhs: Expr) -> Self {
        Self::bin(BinOp::Sub, lhs, rhs)
    }

    /// Evaluates the expression. `values[i]` is the value of declaration `i`.
    pub fn eval(&self, values: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var { index, .. } => values[*index],
            Expr::Neg(e) => -e.eval(values),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(values), b.eval(values));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Abs(e) => e.eval(values).abs(),
            Expr::Min(args) => args
                .iter()
                .map(|e| e.eval(values))
                .fold(f64::INFINITY, f64::min),
            Expr::Max(args) => args
                .iter()
                .map(|e| e.eval(values))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// True when the expression references no variable.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var { .. } => false,
            Expr::Neg(e) | Expr::Abs(e) => e.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
            Expr::Min(args) | Expr::Max(args) => args.iter().all(Expr::is_constant),
        }
    }

    /// Names of referenced variables, in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
            match e {
                Expr::Num(_) => {}
                Expr::Var { name, .. } => {
                    if !out.contains(&name.as_str()) {
                        out.push(name);
                    }
                }
                Expr::Neg(e) | Expr::Abs(e) => walk(e, out),
                Expr::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Expr::Min(args) | Expr::Max(args) => args.iter().for_each(|a| walk(a, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Num(v) if *v < 0.0 => 3,
            _ => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let parens = self.precedence() < min_prec;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(v) => write!(f, "{v}")?,
            Expr::Var { name, .. } => f.write_str(name)?,
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_prec(f, 3)?;
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                a.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                // Right operands of equal precedence need parentheses to keep
                // the tree shape under left-associative reparsing.
                b.fmt_prec(f, p + 1)?;
            }
            Expr::Abs(e) => {
                f.write_str("abs(")?;
                e.fmt_prec(f, 0)?;
                f.write_str(")")?;
            }
            Expr::Min(args) | Expr::Max(args) => {
                f.write_str(if matches!(self, Expr::Min(_)) { "min(" } else { "max(" })?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt_prec(f, 0)?;
                }
                f.write_str(")")?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl CmpOp {
    pub fn is_strict(self) -> bool {
        matches!(self, CmpOp::Gt | CmpOp::Lt)
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "==",
        })
    }
}

/// A comparison as written in the source, before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
    /// Tolerance band for `==`.
    pub tol: Option<f64>,
}

/// Requirement classes, one per keyword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RequirementClass {
    /// `ensure p`
    Safety,
    /// `achieve p`
    TargetAchieve,
    /// `conquer p`
    TargetConquer,
    /// `encourage p`
    Comfort,
}

/// The three tiers of the precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Safety,
    Target,
    Comfort,
}

impl RequirementClass {
    pub fn keyword(self) -> &'static str {
        match self {
            RequirementClass::Safety => "ensure",
            RequirementClass::TargetAchieve => "achieve",
            RequirementClass::TargetConquer => "conquer",
            RequirementClass::Comfort => "encourage",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "ensure" => RequirementClass::Safety,
            "achieve" => RequirementClass::TargetAchieve,
            "conquer" => RequirementClass::TargetConquer,
            "encourage" => RequirementClass::Comfort,
            _ => return None,
        })
    }

    pub fn tier(self) -> Tier {
        match self {
            RequirementClass::Safety => Tier::Safety,
            RequirementClass::TargetAchieve | RequirementClass::TargetConquer => Tier::Target,
            RequirementClass::Comfort => Tier::Comfort,
        }
    }
}

impl fmt::Display for RequirementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Safety => "safety",
            Tier::Target => "target",
            Tier::Comfort => "comfort",
        })
    }
}

/// Closed value range `[lo, hi]` of a normalized signal, `lo < 0 < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.lo, self.hi)
    }
}

/// One parsed requirement: satisfied at a state iff `f(s) >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RequirementSpec {
    pub class: RequirementClass,
    pub name: String,
    pub f: Expr,
    pub bounds: Bounds,
    /// Source used a strict comparison (`>` or `<`); evaluated as non-strict.
    pub strict: bool,
    /// Bounds came from a `bounds [l, u]` annotation rather than inference.
    pub explicit_bounds: bool,
    /// 1-based source line.
    pub line: usize,
}

impl RequirementSpec {
    pub fn signal(&self, values: &[f64]) -> f64 {
        self.f.eval(values)
    }

    pub fn tier(&self) -> Tier {
        self.class.tier()
    }
}

/// Parsed but not yet validated spec file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskSpecDraft {
    pub decls: Vec<VarDecl>,
    pub requirements: Vec<RequirementSpec>,
    /// Non-fatal diagnostics collected while parsing.
    pub warnings: Vec<super::Diagnostic>,
}

impl TaskSpecDraft {
    /// Structural equality ignoring source positions and warnings.
    pub fn same_structure(&self, other: &TaskSpecDraft) -> bool {
        self.decls == other.decls
            && self.requirements.len() == other.requirements.len()
            && self
                .requirements
                .iter()
                .zip(&other.requirements)
                .all(|(a, b)| {
                    a.class == b.class
                        && a.name == b.name
                        && a.f == b.f
                        && a.bounds == b.bounds
                        && a.strict == b.strict
                        && a.explicit_bounds == b.explicit_bounds
                })
    }
}
