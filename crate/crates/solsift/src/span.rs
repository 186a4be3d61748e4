//! Source locations. Findings are reported per line, so every AST node,
//! diagnostic and verdict carries one of these.

use serde::Serialize;
use std::fmt;

/// A half-open byte range into one source file, with 1-based line/column
/// endpoints for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub line_start: u32,
    pub col_start: u32,
    pub line_end: u32,
    pub col_end: u32,
    pub byte_start: usize,
    pub byte_end: usize,
}

impl Span {
    pub const DUMMY: Span = Span {
        line_start: 1,
        col_start: 1,
        line_end: 1,
        col_end: 1,
        byte_start: 0,
        byte_end: 0,
    };

    pub fn new(
        line_start: u32,
        col_start: u32,
        line_end: u32,
        col_end: u32,
        byte_start: usize,
        byte_end: usize,
    ) -> Self {
        Span {
            line_start,
            col_start,
            line_end,
            col_end,
            byte_start,
            byte_end,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(self, other: Span) -> Span {
        let (ls, cs, bs) =
            if (self.line_start, self.col_start) <= (other.line_start, other.col_start) {
                (self.line_start, self.col_start, self.byte_start)
            } else {
                (other.line_start, other.col_start, other.byte_start)
            };
        let (le, ce, be) = if (self.line_end, self.col_end) >= (other.line_end, other.col_end) {
            (self.line_end, self.col_end, self.byte_end)
        } else {
            (other.line_end, other.col_end, other.byte_end)
        };
        Span::new(ls, cs, le, ce, bs, be)
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.byte_start <= other.byte_start && other.byte_end <= self.byte_end
    }

    /// Structural well-formedness against the file it points into.
    pub fn is_valid_for(&self, text: &str) -> bool {
        let ordered = self.line_start <= self.line_end
            && (self.line_start != self.line_end || self.col_start <= self.col_end)
            && self.byte_start <= self.byte_end;
        ordered && self.byte_end <= text.len() && self.line_start >= 1 && self.col_start >= 1
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.byte_start..self.byte_end]
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line_start, self.col_start)
    }
}

/// A span qualified with the file it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SourceSpan {
    pub file: String,
    #[serde(flatten)]
    pub span: Span,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, span: Span) -> Self {
        SourceSpan {
            file: file.into(),
            span,
        }
    }

    pub fn line(&self) -> u32 {
        self.span.line_start
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.span)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_orders_endpoints() {
        let a = Span::new(1, 5, 1, 9, 4, 8);
        let b = Span::new(2, 1, 2, 4, 10, 13);
        let j = a.to(b);
        assert_eq!((j.line_start, j.col_start), (1, 5));
        assert_eq!((j.line_end, j.col_end), (2, 4));
        assert_eq!((j.byte_start, j.byte_end), (4, 13));
    }

    #[test]
    fn validity_checks_bounds() {
        let text = "contract C {}";
        assert!(Span::new(1, 1, 1, 14, 0, 13).is_valid_for(text));
        assert!(!Span::new(1, 1, 1, 20, 0, 99).is_valid_for(text));
        assert!(!Span::new(2, 1, 1, 1, 0, 0).is_valid_for(text));
    }
}
