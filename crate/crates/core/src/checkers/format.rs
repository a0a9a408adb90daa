//! printf-family format strings: argument count and clear type mismatches.

use super::typing::{infer, ValueType};
use crate::engine::RawFinding;
use crate::flow::SymbolTable;
use crate::frontend::{Expr, ExprKind, Literal};

/// Format functions and the index of their format argument.
pub const FORMAT_FUNCTIONS: &[(&str, usize)] = &[
    ("printf", 0),
    ("fprintf", 1),
    ("sprintf", 1),
    ("snprintf", 2),
    ("dprintf", 1),
    ("syslog", 1),
    ("wprintf", 0),
    ("fwprintf", 1),
    ("swprintf", 2),
];

pub fn format_index(callee: &str) -> Option<usize> {
    FORMAT_FUNCTIONS
        .iter()
        .find(|(name, _)| *name == callee)
        .map(|(_, i)| *i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Int,
    Float,
    Str,
    WideStr,
    Pointer,
    /// `%n`: a pointer to an integer; not type-checked.
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conversion {
    pub spec: String,
    pub expect: Expect,
}

/// Argument expectations of a format string in order, with `*` widths and
/// precisions included as `Int`.
pub fn parse_format(fmt: &str) -> Vec<Conversion> {
    let b = fmt.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if b[i] != b'%' {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        if b.get(i) == Some(&b'%') {
            i += 1;
            continue;
        }
        while i < b.len() && matches!(b[i], b'-' | b'+' | b' ' | b'#' | b'0' | b'\'') {
            i += 1;
        }
        let star = |i: &mut usize, out: &mut Vec<Conversion>| {
            if b.get(*i) == Some(&b'*') {
                out.push(Conversion {
                    spec: "*".into(),
                    expect: Expect::Int,
                });
                *i += 1;
            } else {
                while *i < b.len() && b[*i].is_ascii_digit() {
                    *i += 1;
                }
            }
        };
        star(&mut i, &mut out);
        if b.get(i) == Some(&b'.') {
            i += 1;
            star(&mut i, &mut out);
        }
        let len_start = i;
        while i < b.len() && matches!(b[i], b'h' | b'l' | b'L' | b'q' | b'j' | b'z' | b't') {
            i += 1;
        }
        let wide = fmt[len_start..i].contains('l');
        let Some(&conv) = b.get(i) else { break };
        i += 1;
        let expect = match conv {
            b'd' | b'i' | b'u' | b'o' | b'x' | b'X' | b'c' | b'C' => Expect::Int,
            b'f' | b'F' | b'e' | b'E' | b'g' | b'G' | b'a' | b'A' => Expect::Float,
            b's' if wide => Expect::WideStr,
            b's' => Expect::Str,
            b'S' => Expect::WideStr,
            b'p' => Expect::Pointer,
            b'n' => Expect::Any,
            // unknown conversion (or `%m`): consumes nothing
            _ => continue,
        };
        out.push(Conversion {
            spec: String::from_utf8_lossy(&b[start..i]).into_owned(),
            expect,
        });
    }
    out
}

fn mismatch(expect: Expect, got: ValueType) -> bool {
    use ValueType::*;
    match expect {
        Expect::Int => matches!(got, Float | Str | WideStr | Pointer),
        Expect::Float => matches!(got, Int | Str | WideStr | Pointer),
        Expect::Str => matches!(got, Int | Float | WideStr),
        Expect::WideStr => matches!(got, Int | Float | Str),
        Expect::Pointer => matches!(got, Int | Float),
        Expect::Any => false,
    }
}

fn describe(t: ValueType) -> &'static str {
    match t {
        ValueType::Int => "an integer",
        ValueType::Float => "a floating-point value",
        ValueType::Str => "a char string",
        ValueType::WideStr => "a wide string",
        ValueType::Pointer => "a pointer",
        ValueType::Unknown => "an unknown value",
    }
}

pub struct FormatResult {
    pub count: Vec<RawFinding>,
    pub types: Vec<RawFinding>,
    pub skipped: bool,
}

/// Check one call expression. Returns `None` for non-format calls.
pub fn check_call(call: &Expr, table: &SymbolTable) -> Option<FormatResult> {
    let callee = call.callee_name()?;
    let idx = format_index(callee)?;
    let ExprKind::Call { args, .. } = &call.kind else {
        return None;
    };
    let mut res = FormatResult {
        count: vec![],
        types: vec![],
        skipped: false,
    };
    let fmt = match args.get(idx).map(|a| &a.strip_parens_and_casts().kind) {
        Some(ExprKind::Literal(Literal::Str { value, .. })) => value,
        _ => {
            res.skipped = true;
            return Some(res);
        }
    };
    let convs = parse_format(fmt);
    let given = &args[idx + 1..];
    if given.len() < convs.len() {
        res.count.push(RawFinding {
            checker: "format-arg-count".into(),
            span: call.span,
            message: format!(
                "{callee} format expects {} argument{} but {} given",
                convs.len(),
                if convs.len() == 1 { "" } else { "s" },
                given.len()
            ),
            path_note: None,
        });
    }
    for (pos, (conv, arg)) in convs.iter().zip(given).enumerate() {
        let got = infer(arg, table);
        if mismatch(conv.expect, got) {
            res.types.push(RawFinding {
                checker: "format-arg-type".into(),
                span: arg.span,
                message: format!(
                    "{callee} argument {} has type {} but '{}' expects {}",
                    idx + 2 + pos,
                    describe(got),
                    conv.spec,
                    match conv.expect {
                        Expect::Int => "an integer",
                        Expect::Float => "a floating-point value",
                        Expect::Str => "a char string",
                        Expect::WideStr => "a wide string",
                        Expect::Pointer => "a pointer",
                        Expect::Any => "anything",
                    }
                ),
                path_note: None,
            });
        }
    }
    Some(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expects(fmt: &str) -> Vec<Expect> {
        parse_format(fmt).into_iter().map(|c| c.expect).collect()
    }

    #[test]
    fn grammar() {
        use Expect::*;
        assert_eq!(expects("%s %s\\n"), vec![Str, Str]);
        assert_eq!(expects("100%% done"), vec![]);
        assert_eq!(expects("%-*.*f|%5d"), vec![Int, Int, Float, Int]);
        assert_eq!(expects("%ld %lld %hhx %zu"), vec![Int, Int, Int, Int]);
        assert_eq!(
            expects("%ls %S %p %n"),
            vec![WideStr, WideStr, Pointer, Any]
        );
        assert_eq!(
            expects("%c%e%g%X%o%i%u"),
            vec![Int, Float, Float, Int, Int, Int, Int]
        );
        assert_eq!(expects("trailing %"), vec![]);
        assert_eq!(expects("%m %d"), vec![Int]);
    }

    #[test]
    fn clear_mismatches_only() {
        assert!(mismatch(Expect::Str, ValueType::Int));
        assert!(mismatch(Expect::WideStr, ValueType::Str));
        assert!(!mismatch(Expect::Int, ValueType::Int));
        assert!(!mismatch(Expect::Str, ValueType::Unknown));
        assert!(!mismatch(Expect::Pointer, ValueType::Str));
    }
}
