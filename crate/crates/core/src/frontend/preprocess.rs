use super::span::{LineIndex, Span, UnitDiagnostics};

/// An `#include` (or `#import`) directive target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Include {
    pub target: String,
    pub line: u32,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct Preprocessed {
    /// Same length as the input; comments and directive lines are blanked
    /// to spaces, newlines are kept.
    pub text: Vec<u8>,
    pub includes: Vec<Include>,
    pub lines: LineIndex,
    pub diagnostics: UnitDiagnostics,
}

#[derive(Clone, Copy, PartialEq)]
enum State {
    Code,
    Quoted(u8),
    LineComment,
    BlockComment,
    Directive,
}

/// Blank comments and preprocessor directives without changing byte
/// offsets. No macro expansion happens.
pub fn preprocess_lite(text: &[u8]) -> Preprocessed {
    let lines = LineIndex::new(text);
    let mut out = text.to_vec();
    let mut includes = Vec::new();
    let mut diagnostics = UnitDiagnostics::default();

    let mut state = State::Code;
    let mut line_start = true;
    let mut comment_start = 0;
    let mut directive_start = 0;
    let mut i = 0;

    let blank = |out: &mut Vec<u8>, at: usize| {
        if out[at] != b'\n' {
            out[at] = b' ';
        }
    };

    while i < text.len() {
        let b = text[i];
        match state {
            State::Code => {
                if b == b'#' && line_start {
                    state = State::Directive;
                    directive_start = i;
                    continue;
                }
                if b == b'/' && text.get(i + 1) == Some(&b'/') {
                    state = State::LineComment;
                    continue;
                }
                if b == b'/' && text.get(i + 1) == Some(&b'*') {
                    state = State::BlockComment;
                    comment_start = i;
                    blank(&mut out, i);
                    blank(&mut out, i + 1);
                    i += 2;
                    continue;
                }
                if b == b'"' || b == b'\'' {
                    state = State::Quoted(b);
                }
                if b == b'\n' {
                    line_start = true;
                } else if !matches!(b, b' ' | b'\t' | b'\r' | 0x0b | 0x0c) {
                    line_start = false;
                }
                i += 1;
            }
            State::Quoted(q) => {
                if b == b'\\' && i + 1 < text.len() && text[i + 1] != b'\n' {
                    i += 2;
                    continue;
                }
                if b == q || b == b'\n' {
                    state = State::Code;
                    line_start = b == b'\n';
                }
                i += 1;
            }
            State::LineComment => {
                if b == b'\n' {
                    state = State::Code;
                    line_start = true;
                } else {
                    blank(&mut out, i);
                }
                i += 1;
            }
            State::BlockComment => {
                if b == b'*' && text.get(i + 1) == Some(&b'/') {
                    blank(&mut out, i);
                    blank(&mut out, i + 1);
                    i += 2;
                    state = State::Code;
                    continue;
                }
                blank(&mut out, i);
                i += 1;
            }
            State::Directive => {
                // a directive runs to the first newline not preceded by a
                // line-continuation backslash
                let mut end = i;
                while end < text.len() {
                    if text[end] == b'\n' {
                        let mut j = end;
                        while j > directive_start && text[j - 1] == b'\r' {
                            j -= 1;
                        }
                        if j > directive_start && text[j - 1] == b'\\' {
                            end += 1;
                            continue;
                        }
                        break;
                    }
                    end += 1;
                }
                if let Some(target) = include_target(&text[directive_start..end]) {
                    let (line, column) = lines.line_col(directive_start);
                    includes.push(Include {
                        target,
                        line,
                        span: Span {
                            offset: directive_start,
                            len: end - directive_start,
                            line,
                            column,
                        },
                    });
                }
                for at in directive_start..end {
                    blank(&mut out, at);
                }
                i = end;
                state = State::Code;
            }
        }
    }
    if state == State::BlockComment {
        diagnostics.push(
            lines.span(comment_start, text.len() - comment_start),
            "unterminated block comment",
        );
    }

    Preprocessed {
        text: out,
        includes,
        lines,
        diagnostics,
    }
}

fn include_target(directive: &[u8]) -> Option<String> {
    let s = String::from_utf8_lossy(directive);
    let rest = s.trim_start_matches('#').trim_start();
    let rest = ["include_next", "include", "import"]
        .iter()
        .find_map(|kw| rest.strip_prefix(kw))?
        .trim_start();
    let (open, close) = match rest.chars().next()? {
        '<' => ('<', '>'),
        '"' => ('"', '"'),
        _ => return None,
    };
    let body = &rest[open.len_utf8()..];
    let end = body.find(close)?;
    let target = body[..end].trim();
    if target.is_empty() {
        None
    } else {
        Some(target.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn include_line_blanked_and_recorded() {
        let src = b"#include <stdio.h>\nint x;";
        let pp = preprocess_lite(src);
        assert_eq!(&pp.text[..18], &[b' '; 18][..]);
        assert_eq!(&pp.text[18..], b"\nint x;");
        assert_eq!(pp.includes.len(), 1);
        assert_eq!(pp.includes[0].target, "stdio.h");
        assert_eq!(pp.includes[0].line, 1);
    }

    #[test]
    fn block_comment_keeps_length() {
        let pp = preprocess_lite(b"/* a */ x;");
        assert_eq!(pp.text, b"        x;");
    }

    #[test]
    fn emscripten_header_recorded() {
        let pp = preprocess_lite(b"#include <emscripten.h>\n#  include \"emscripten/html5.h\"\n");
        let targets: Vec<_> = pp.includes.iter().map(|i| i.target.as_str()).collect();
        assert_eq!(targets, vec!["emscripten.h", "emscripten/html5.h"]);
        assert_eq!(pp.includes[1].line, 2);
    }

    #[test]
    fn newlines_preserved_in_multiline_comment() {
        let src = b"a /* x\ny\nz */ b\n#define F(x) \\\n  x\nc";
        let pp = preprocess_lite(src);
        assert_eq!(pp.text.len(), src.len());
        let count = |t: &[u8]| t.iter().filter(|b| **b == b'\n').count();
        assert_eq!(count(&pp.text), count(src));
        let kept: String = String::from_utf8_lossy(&pp.text)
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        assert_eq!(kept, "a b c");
    }

    #[test]
    fn unterminated_comment_blanks_to_eof() {
        let pp = preprocess_lite(b"x; /* open\nstill");
        assert_eq!(pp.diagnostics.len(), 1);
        assert_eq!(String::from_utf8_lossy(&pp.text).trim(), "x;");
    }

    #[test]
    fn comment_markers_inside_strings_are_kept() {
        let pp = preprocess_lite(b"puts(\"// not a comment\");");
        assert_eq!(pp.text, b"puts(\"// not a comment\");");
    }

    #[test]
    fn hash_mid_line_is_not_a_directive() {
        let pp = preprocess_lite(b"a # b");
        assert_eq!(pp.text, b"a # b");
    }
}
