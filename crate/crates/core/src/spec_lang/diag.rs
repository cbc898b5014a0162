use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Severity {
    Error,
    Warning,
}

/// Diagnostic codes emitted by the spec front-end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagCode {
    SyntaxError,
    UnknownVariable,
    DuplicateName,
    NonNormalizablePredicate,
    InvalidRange,
    TriviallySatisfied,
    TriviallyViolated,
    UnboundedSignal,
    // warnings
    StrictComparison,
    TrivialPredicate,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::SyntaxError => "syntax-error",
            DiagCode::UnknownVariable => "unknown-variable",
            DiagCode::DuplicateName => "duplicate-name",
            DiagCode::NonNormalizablePredicate => "non-normalizable-predicate",
            DiagCode::InvalidRange => "invalid-range",
            DiagCode::TriviallySatisfied => "trivially-satisfied",
            DiagCode::TriviallyViolated => "trivially-violated",
            DiagCode::UnboundedSignal => "unbounded-signal",
            DiagCode::StrictComparison => "strict-comparison",
            DiagCode::TrivialPredicate => "trivial-predicate",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            DiagCode::StrictComparison | DiagCode::TrivialPredicate => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A positioned message. Lines and columns are 1-based; columns count chars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: DiagCode, line: usize, col: usize, message: impl Into<String>) -> Self {
        Self {
            code,
            line,
            col,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.code.severity() == Severity::Error
    }

    /// `file:line:col: code: message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: {}: {}",
            file, self.line, self.col, self.code, self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.col, self.code, self.message
        )
    }
}

/// The error diagnostics of a failed parse, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter()
    }

    pub fn codes(&self) -> Vec<DiagCode> {
        self.0.iter().map(|d| d.code).collect()
    }

    pub fn has(&self, code: DiagCode) -> bool {
        self.0.iter().any(|d| d.code == code)
    }

    pub fn render(&self, file: &str) -> String {
        self.0
            .iter()
            .map(|d| d.render(file))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}
