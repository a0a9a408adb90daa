//! Byte-oriented C/C++ tokenizer.
//!
//! The lexer never fails: bytes that cannot start a token become
//! single-byte punctuators and a diagnostic is recorded. Token spans
//! always index into the bytes that were passed in, so running it on the
//! output of [`preprocess_lite`](super::preprocess_lite) keeps offsets valid
//! for the original file.

use super::span::{LineIndex, Span, UnitDiagnostics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    IntLiteral,
    FloatLiteral,
    StringLiteral,
    WideStringLiteral,
    CharLiteral,
    Punctuator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punctuator && self.lexeme == p
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.kind == TokenKind::Keyword && self.lexeme == k
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Identifier
    }
}

pub const KEYWORDS: &[&str] = &[
    "auto",
    "break",
    "case",
    "char",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extern",
    "float",
    "for",
    "goto",
    "if",
    "inline",
    "int",
    "long",
    "register",
    "restrict",
    "return",
    "short",
    "signed",
    "sizeof",
    "static",
    "struct",
    "switch",
    "typedef",
    "union",
    "unsigned",
    "void",
    "volatile",
    "while",
    "_Bool",
    "_Complex",
    "_Alignof",
    "_Alignas",
    "_Atomic",
    "_Noreturn",
    "_Static_assert",
    "_Thread_local",
    "__inline",
    "__inline__",
    "__restrict",
    "__restrict__",
    "__attribute__",
    "__extension__",
    "__asm__",
    "asm",
    "__declspec",
    // C++ words that only matter as recovery triggers
    "class",
    "template",
    "namespace",
    "using",
    "public",
    "private",
    "protected",
    "operator",
    "virtual",
    "new",
    "delete",
    "try",
    "catch",
    "throw",
];

const PUNCTUATORS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "*=",
    "/=", "%=", "+=", "-=", "&=", "^=", "|=", "::", "##", "[", "]", "(", ")", "{", "}", ".", "&",
    "*", "+", "-", "~", "!", "/", "%", "<", ">", "^", "|", "?", ":", ";", "=", ",", "#",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Tokenize `text`. Comments are skipped here too, so the lexer is usable
/// on raw source as well as on preprocessed text.
pub fn lex(text: &[u8]) -> (Vec<Token>, UnitDiagnostics) {
    let index = LineIndex::new(text);
    let mut lexer = Lexer {
        text,
        pos: 0,
        index: &index,
        tokens: Vec::new(),
        diags: UnitDiagnostics::default(),
    };
    lexer.run();
    (lexer.tokens, lexer.diags)
}

struct Lexer<'a> {
    text: &'a [u8],
    pos: usize,
    index: &'a LineIndex,
    tokens: Vec<Token>,
    diags: UnitDiagnostics,
}

impl<'a> Lexer<'a> {
    fn peek(&self, ahead: usize) -> Option<u8> {
        self.text.get(self.pos + ahead).copied()
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        let lexeme = String::from_utf8_lossy(&self.text[start..self.pos]).into_owned();
        let span = self.index.span(start, self.pos - start);
        self.tokens.push(Token { kind, lexeme, span });
    }

    fn run(&mut self) {
        while let Some(b) = self.peek(0) {
            let start = self.pos;
            match b {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'/' if self.peek(1) == Some(b'/') => {
                    while let Some(c) = self.peek(0) {
                        if c == b'\n' {
                            break;
                        }
                        self.pos += 1;
                    }
                }
                b'/' if self.peek(1) == Some(b'*') => {
                    self.pos += 2;
                    loop {
                        match self.peek(0) {
                            None => {
                                let span = self.index.span(start, self.pos - start);
                                self.diags.push(span, "unterminated block comment");
                                break;
                            }
                            Some(b'*') if self.peek(1) == Some(b'/') => {
                                self.pos += 2;
                                break;
                            }
                            Some(_) => self.pos += 1,
                        }
                    }
                }
                b'"' => self.quoted(start, b'"', TokenKind::StringLiteral),
                b'\'' => self.quoted(start, b'\'', TokenKind::CharLiteral),
                b'0'..=b'9' => self.number(start),
                b'.' if self.peek(1).is_some_and(|c| c.is_ascii_digit()) => self.number(start),
                c if is_ident_start(c) => self.word(start),
                _ => self.punct(start),
            }
        }
    }

    fn word(&mut self, start: usize) {
        while self.peek(0).is_some_and(is_ident_continue) {
            self.pos += 1;
        }
        let word = &self.text[start..self.pos];
        // encoding prefixes: L"..", u"..", U"..", u8"..", and the char forms
        if matches!(word, b"L" | b"u" | b"U" | b"u8") {
            match self.peek(0) {
                Some(b'"') => {
                    let kind = if word == b"u8" {
                        TokenKind::StringLiteral
                    } else {
                        TokenKind::WideStringLiteral
                    };
                    self.quoted(start, b'"', kind);
                    return;
                }
                Some(b'\'') => {
                    self.quoted(start, b'\'', TokenKind::CharLiteral);
                    return;
                }
                _ => {}
            }
        }
        let kind = if is_keyword(std::str::from_utf8(word).unwrap_or("")) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        self.push(kind, start);
    }

    fn number(&mut self, start: usize) {
        let hex = self.peek(0) == Some(b'0') && matches!(self.peek(1), Some(b'x' | b'X'));
        let mut float = false;
        while let Some(c) = self.peek(0) {
            let exponent = if hex {
                matches!(c, b'p' | b'P')
            } else {
                matches!(c, b'e' | b'E')
            };
            if exponent && matches!(self.peek(1), Some(b'+' | b'-')) {
                float = true;
                self.pos += 2;
            } else if c == b'.' {
                float = true;
                self.pos += 1;
            } else if is_ident_continue(c) {
                if exponent {
                    float = true;
                }
                self.pos += 1;
            } else {
                break;
            }
        }
        let kind = if float {
            TokenKind::FloatLiteral
        } else {
            TokenKind::IntLiteral
        };
        self.push(kind, start);
    }

    /// Consume a quoted literal whose opening quote is at `self.pos`
    /// (after any encoding prefix). Unterminated literals stop at the end
    /// of the line.
    fn quoted(&mut self, start: usize, quote: u8, kind: TokenKind) {
        self.pos += 1;
        loop {
            match self.peek(0) {
                None | Some(b'\n') => {
                    let span = self.index.span(start, self.pos - start);
                    self.diags.push(span, "unterminated literal");
                    break;
                }
                Some(b'\\') => {
                    self.pos += 1;
                    if self.peek(0).is_some_and(|c| c != b'\n') {
                        self.pos += 1;
                    }
                }
                Some(c) if c == quote => {
                    self.pos += 1;
                    break;
                }
                Some(_) => self.pos += 1,
            }
        }
        self.push(kind, start);
    }

    fn punct(&mut self, start: usize) {
        let rest = &self.text[start..];
        if let Some(p) = PUNCTUATORS.iter().find(|p| rest.starts_with(p.as_bytes())) {
            self.pos += p.len();
        } else {
            self.pos += 1;
            let span = self.index.span(start, 1);
            self.diags
                .push(span, format!("unexpected byte 0x{:02x}", self.text[start]));
        }
        self.push(TokenKind::Punctuator, start);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexemes(src: &str) -> Vec<String> {
        lex(src.as_bytes())
            .0
            .into_iter()
            .map(|t| t.lexeme)
            .collect()
    }

    #[test]
    fn free_call() {
        let (toks, diags) = lex(b"free(data);");
        assert!(diags.is_empty());
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Identifier,
                TokenKind::Punctuator,
                TokenKind::Identifier,
                TokenKind::Punctuator,
                TokenKind::Punctuator
            ]
        );
        assert_eq!(lexemes("free(data);"), vec!["free", "(", "data", ")", ";"]);
    }

    #[test]
    fn wide_strings() {
        let (toks, _) = lex(br#"wprintf(L"%ls", L"s");"#);
        let wide = toks
            .iter()
            .filter(|t| t.kind == TokenKind::WideStringLiteral)
            .count();
        assert_eq!(wide, 2);
    }

    #[test]
    fn empty_input() {
        let (toks, diags) = lex(b"");
        assert!(toks.is_empty());
        assert!(diags.is_empty());
    }

    #[test]
    fn multi_char_punctuators() {
        assert_eq!(
            lexemes("a->b <<= c ... x++"),
            vec!["a", "->", "b", "<<=", "c", "...", "x", "++"]
        );
    }

    #[test]
    fn numbers() {
        let (toks, _) = lex(b"0x1F 10UL 1.5e-3 .5 1e10");
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::IntLiteral,
                TokenKind::IntLiteral,
                TokenKind::FloatLiteral,
                TokenKind::FloatLiteral,
                TokenKind::FloatLiteral
            ]
        );
        assert_eq!(toks[2].lexeme, "1.5e-3");
    }

    #[test]
    fn unknown_bytes_become_punctuators() {
        let (toks, diags) = lex(b"int x = @@;");
        assert_eq!(diags.len(), 2);
        assert_eq!(toks[3].lexeme, "@");
        assert_eq!(toks[3].kind, TokenKind::Punctuator);
    }

    #[test]
    fn invalid_utf8_is_not_fatal() {
        let (toks, diags) = lex(b"a \xff\xfe b");
        assert_eq!(toks.len(), 4);
        assert_eq!(diags.len(), 2);
        assert_eq!(toks[3].span.offset, 5);
    }

    #[test]
    fn spans_track_lines() {
        let (toks, _) = lex(b"int\n  x;");
        assert_eq!((toks[1].span.line, toks[1].span.column), (2, 3));
        assert_eq!(toks[1].span.offset, 6);
    }

    #[test]
    fn comments_skipped() {
        assert_eq!(lexemes("a /* b */ c // d\ne"), vec!["a", "c", "e"]);
        let (_, diags) = lex(b"x /* never closed");
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn escaped_quote_in_string() {
        assert_eq!(
            lexemes(r#"puts("a\"b"); 'x'"#),
            vec!["puts", "(", r#""a\"b""#, ")", ";", "'x'"]
        );
    }
}
