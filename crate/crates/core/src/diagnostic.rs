//! Structured errors shared by the kernel, the elaborator and the CLI.

use std::fmt;

use crate::telescope::{CoreError, Telescope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    SyntaxError,
    UnboundName,
    AmbiguousBinderKind,
    CannotInfer,
    UnboundVariable,
    KindMismatch,
    PositionNotAffine,
    CaptureViolation,
    AffinityViolation,
    GelFreshnessViolation,
    NotAFunction,
    MotiveMismatch,
    UniverseExpected,
    TypeMismatch,
    IllFormedEntryType,
    IllFormedConstructor,
    DuplicateName,
    NegativeOccurrence,
    NestedOccurrence,
    BudgetExceeded,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        use ErrorCode::*;
        match self {
            SyntaxError => "SyntaxError",
            UnboundName => "UnboundName",
            AmbiguousBinderKind => "AmbiguousBinderKind",
            CannotInfer => "CannotInfer",
            UnboundVariable => "UnboundVariable",
            KindMismatch => "KindMismatch",
            PositionNotAffine => "PositionNotAffine",
            CaptureViolation => "CaptureViolation",
            AffinityViolation => "AffinityViolation",
            GelFreshnessViolation => "GelFreshnessViolation",
            NotAFunction => "NotAFunction",
            MotiveMismatch => "MotiveMismatch",
            UniverseExpected => "UniverseExpected",
            TypeMismatch => "TypeMismatch",
            IllFormedEntryType => "IllFormedEntryType",
            IllFormedConstructor => "IllFormedConstructor",
            DuplicateName => "DuplicateName",
            NegativeOccurrence => "NegativeOccurrence",
            NestedOccurrence => "NestedOccurrence",
            BudgetExceeded => "BudgetExceeded",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Byte range into a source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    /// 1-based line and column (in characters) of `start` within `src`.
    pub fn line_col(&self, src: &str) -> (usize, usize) {
        let start = self.start.min(src.len());
        let before = &src[..start];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub code: ErrorCode,
    pub message: String,
    pub span: Option<Span>,
    /// Context at the point of failure, when known.
    pub telescope: Option<Telescope>,
    /// Declaration being checked.
    pub decl: Option<String>,
}

impl Diagnostic {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            span: None,
            telescope: None,
            decl: None,
        }
    }

    pub fn with_span(mut self, span: Span) -> Self {
        self.span.get_or_insert(span);
        self
    }

    pub fn with_telescope(mut self, tele: &Telescope) -> Self {
        self.telescope.get_or_insert_with(|| tele.clone());
        self
    }

    pub fn in_decl(mut self, name: &str) -> Self {
        self.decl.get_or_insert_with(|| name.to_string());
        self
    }

    /// `ERROR <code> <file>:<line>:<col> <message>`
    pub fn render(&self, file: &str, src: &str) -> String {
        let (line, col) = self.span.map_or((1, 1), |s| s.line_col(src));
        let msg = match &self.decl {
            Some(d) => format!("in `{d}`: {}", self.message),
            None => self.message.clone(),
        };
        format!("ERROR {} {file}:{line}:{col} {msg}", self.code)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for Diagnostic {}

impl From<CoreError> for Diagnostic {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::PositionNotAffine(_) => ErrorCode::PositionNotAffine,
            CoreError::OutOfScope(_) => ErrorCode::UnboundVariable,
            CoreError::CaptureViolation { .. } => ErrorCode::CaptureViolation,
        };
        Diagnostic::new(code, e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_col_counts_chars() {
        let src = "ab\nλx.y";
        let s = Span::new(src.find('y').unwrap(), src.len());
        assert_eq!(s.line_col(src), (2, 4));
    }

    #[test]
    fn render_format() {
        let d = Diagnostic::new(ErrorCode::TypeMismatch, "boom").with_span(Span::new(3, 4));
        assert_eq!(d.render("f.npt", "ab\ncd"), "ERROR TypeMismatch f.npt:2:1 boom");
    }
}
