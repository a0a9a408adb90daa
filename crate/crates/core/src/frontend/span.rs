use serde::{Deserialize, Serialize};

/// A byte range in the original source text, with the 1-based line and
/// column of its first byte. Columns count bytes, not characters.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    /// The smallest span covering both `self` and `other`.
    pub fn to(&self, other: Span) -> Span {
        let (first, last_end) = if self.offset <= other.offset {
            (*self, self.end().max(other.end()))
        } else {
            (other, self.end().max(other.end()))
        };
        Span {
            offset: first.offset,
            len: last_end - first.offset,
            line: first.line,
            column: first.column,
        }
    }

    pub fn contains(&self, other: &Span) -> bool {
        other.offset >= self.offset && other.end() <= self.end()
    }

    pub fn contains_offset(&self, offset: usize) -> bool {
        offset >= self.offset && offset < self.end()
    }

    pub fn slice<'a>(&self, text: &'a [u8]) -> &'a [u8] {
        &text[self.offset..self.end()]
    }
}

/// Maps byte offsets to (line, column) pairs.
#[derive(Debug, Clone)]
pub struct LineIndex {
    line_starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(text: &[u8]) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(
            text.iter()
                .enumerate()
                .filter(|(_, b)| **b == b'\n')
                .map(|(i, _)| i + 1),
        );
        LineIndex { line_starts }
    }

    pub fn line_col(&self, offset: usize) -> (u32, u32) {
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (
            (line + 1) as u32,
            (offset - self.line_starts[line] + 1) as u32,
        )
    }

    pub fn span(&self, offset: usize, len: usize) -> Span {
        let (line, column) = self.line_col(offset);
        Span {
            offset,
            len,
            line,
            column,
        }
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Recovered,
    SkippedFile,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
    pub severity: Severity,
}

/// Diagnostics collected while lexing, preprocessing and parsing one unit.
/// Empty iff no error recovery was needed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnitDiagnostics {
    pub entries: Vec<Diagnostic>,
}

impl UnitDiagnostics {
    pub fn push(&mut self, span: Span, message: impl Into<String>) {
        self.entries.push(Diagnostic {
            span,
            message: message.into(),
            severity: Severity::Recovered,
        });
    }

    pub fn extend(&mut self, other: UnitDiagnostics) {
        self.entries.extend(other.entries);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}
