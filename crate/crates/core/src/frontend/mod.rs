//! C/C++ front end: comment/directive blanking, lexing and tolerant parsing.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod preprocess;
pub mod span;

pub use ast::*;
pub use lexer::{lex, Token, TokenKind};
pub use parser::parse;
pub use preprocess::{preprocess_lite, Include, Preprocessed};
pub use span::{Diagnostic, LineIndex, Severity, Span, UnitDiagnostics};

/// File extensions treated as C or C++ sources (compared case-insensitively).
pub const SOURCE_EXTENSIONS: &[&str] = &["c", "h", "cc", "cpp", "cxx", "hpp", "hh"];

pub fn is_source_path(path: &std::path::Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| SOURCE_EXTENSIONS.iter().any(|s| s.eq_ignore_ascii_case(e)))
}

/// One source file after preprocessing, lexing and parsing.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub preprocessed: Preprocessed,
    pub tokens: Vec<Token>,
    pub unit: TranslationUnit,
    pub diagnostics: UnitDiagnostics,
}

impl SourceUnit {
    pub fn parse(text: &[u8]) -> SourceUnit {
        let preprocessed = preprocess_lite(text);
        let (tokens, lex_diags) = lex(&preprocessed.text);
        let (unit, parse_diags) = parse(&tokens);
        let mut diagnostics = preprocessed.diagnostics.clone();
        diagnostics.extend(lex_diags);
        diagnostics.extend(parse_diags);
        SourceUnit {
            preprocessed,
            tokens,
            unit,
            diagnostics,
        }
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.unit.items.iter().filter_map(|i| match i {
            Item::Function(f) => Some(f),
            _ => None,
        })
    }
}
