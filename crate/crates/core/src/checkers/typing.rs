//! Coarse expression typing for the structural checks. Anything that cannot
//! be classified with confidence is `Unknown`, and checks treat `Unknown`
//! as compatible with everything.

use crate::flow::SymbolTable;
use crate::frontend::{BinOp, DeclType, Expr, ExprKind, Literal, UnaryOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    Int,
    Float,
    /// `char *` or `char[]`.
    Str,
    /// `wchar_t *` or `wchar_t[]`.
    WideStr,
    Pointer,
    Unknown,
}

impl ValueType {
    pub fn is_pointer_like(self) -> bool {
        matches!(
            self,
            ValueType::Str | ValueType::WideStr | ValueType::Pointer
        )
    }
}

fn base_words(base: &str) -> Vec<&str> {
    base.split_whitespace()
        .filter(|w| !matches!(*w, "const" | "volatile" | "static" | "extern" | "register"))
        .collect()
}

/// Classify `ty` after `derefs` levels of indirection are removed.
pub fn classify(ty: &DeclType, derefs: u32) -> ValueType {
    if ty.is_function {
        return ValueType::Unknown;
    }
    let levels = ty.pointer_depth + ty.is_array as u32;
    if derefs > levels {
        return ValueType::Unknown;
    }
    let remaining = levels - derefs;
    let words = base_words(&ty.base);
    let is_char = !words.is_empty()
        && words
            .iter()
            .all(|w| matches!(*w, "char" | "signed" | "unsigned"))
        && words.contains(&"char");
    let is_wchar = words == ["wchar_t"];
    match remaining {
        0 => {
            let scalar = DeclType {
                base: ty.base.clone(),
                ..Default::default()
            };
            if scalar.is_integer() {
                ValueType::Int
            } else if scalar.is_floating() {
                ValueType::Float
            } else {
                ValueType::Unknown
            }
        }
        1 if is_char => ValueType::Str,
        1 if is_wchar => ValueType::WideStr,
        _ => ValueType::Pointer,
    }
}

fn known_return(callee: &str) -> ValueType {
    match callee {
        "getenv" | "strchr" | "strrchr" | "strstr" | "strdup" | "strcpy" | "strcat" | "strncpy"
        | "strerror" => ValueType::Str,
        "strlen" | "strcmp" | "strncmp" | "atoi" | "atol" | "abs" | "labs" | "fputs" | "puts"
        | "putchar" | "getchar" | "fgetc" | "fputc" | "printf" | "sprintf" | "snprintf" => {
            ValueType::Int
        }
        "atof" | "strtod" | "sqrt" | "pow" | "fabs" | "sin" | "cos" | "floor" | "ceil" => {
            ValueType::Float
        }
        "malloc" | "calloc" | "realloc" | "alloca" | "fopen" | "freopen" => ValueType::Pointer,
        _ => ValueType::Unknown,
    }
}

/// Type of `e`, resolving identifiers through `table`.
pub fn infer(e: &Expr, table: &SymbolTable) -> ValueType {
    infer_deref(e, table, 0)
}

fn infer_deref(e: &Expr, table: &SymbolTable, derefs: u32) -> ValueType {
    let apply = |t: ValueType| -> ValueType {
        match (derefs, t) {
            (0, t) => t,
            (1, ValueType::Str) => ValueType::Int,
            (1, ValueType::WideStr) => ValueType::Int,
            _ => ValueType::Unknown,
        }
    };
    match &e.kind {
        ExprKind::Ident(name) => match table.type_of(name, e.span.offset) {
            Some(ty) => classify(ty, derefs),
            None => ValueType::Unknown,
        },
        ExprKind::Literal(lit) => apply(match lit {
            Literal::Int(_) | Literal::Char => ValueType::Int,
            Literal::Float => ValueType::Float,
            Literal::Str { wide: false, .. } => ValueType::Str,
            Literal::Str { wide: true, .. } => ValueType::WideStr,
            Literal::Null => ValueType::Pointer,
        }),
        ExprKind::Cast { ty, .. } => classify(ty, derefs),
        ExprKind::Unary { op, operand } => match op {
            UnaryOp::Deref => infer_deref(operand, table, derefs + 1),
            UnaryOp::AddrOf => apply(ValueType::Pointer),
            UnaryOp::Not => apply(ValueType::Int),
            UnaryOp::Neg | UnaryOp::Plus | UnaryOp::BitNot => match infer(operand, table) {
                t @ (ValueType::Int | ValueType::Float) => apply(t),
                _ => ValueType::Unknown,
            },
            _ => infer_deref(operand, table, derefs),
        },
        ExprKind::Index { base, .. } => infer_deref(base, table, derefs + 1),
        ExprKind::Sizeof(_) => apply(ValueType::Int),
        ExprKind::Call { .. } => apply(e.callee_name().map_or(ValueType::Unknown, known_return)),
        ExprKind::Binary { op, lhs, rhs } => {
            if op.is_comparison() || matches!(op, BinOp::LogAnd | BinOp::LogOr) {
                return apply(ValueType::Int);
            }
            let l = infer(lhs, table);
            let r = infer(rhs, table);
            let t = match (op, l, r) {
                (BinOp::Sub, a, b) if a.is_pointer_like() && b.is_pointer_like() => ValueType::Int,
                (BinOp::Add | BinOp::Sub, a, ValueType::Int) if a.is_pointer_like() => a,
                (BinOp::Add, ValueType::Int, b) if b.is_pointer_like() => b,
                (_, ValueType::Int, ValueType::Int) => ValueType::Int,
                (
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div,
                    ValueType::Float,
                    ValueType::Int | ValueType::Float,
                )
                | (
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div,
                    ValueType::Int,
                    ValueType::Float,
                ) => ValueType::Float,
                _ => ValueType::Unknown,
            };
            apply(t)
        }
        ExprKind::Conditional { then, els, .. } => {
            let a = infer_deref(then, table, derefs);
            if a == infer_deref(els, table, derefs) {
                a
            } else {
                ValueType::Unknown
            }
        }
        ExprKind::Assign { target, .. } => infer_deref(target, table, derefs),
        ExprKind::Comma { rhs, .. } => infer_deref(rhs, table, derefs),
        ExprKind::Member { .. } | ExprKind::InitList(_) => ValueType::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::resolve_decl_types;
    use crate::frontend::{walk, NodeRef, SourceUnit};

    /// Types of all arguments of the first call to `sink` in the body.
    fn arg_types(body: &str) -> Vec<ValueType> {
        let src = format!(
            "void f(int i, double d, char *s, char a[], wchar_t *w, int **pp) {{ {body} }}"
        );
        let su = SourceUnit::parse(src.as_bytes());
        let func = su.functions().next().unwrap();
        let table = resolve_decl_types(func);
        let mut out = None;
        walk(NodeRef::Function(func), &mut |n, _| {
            if let NodeRef::Expr(e) = n {
                if out.is_none() && e.callee_name() == Some("sink") {
                    if let ExprKind::Call { args, .. } = &e.kind {
                        out = Some(args.iter().map(|a| infer(a, &table)).collect());
                    }
                }
            }
        });
        out.unwrap()
    }

    #[test]
    fn declared_and_literal_types() {
        use ValueType::*;
        assert_eq!(
            arg_types(r#"sink(i, d, s, a, w, pp, 5, 1.5, "x", L"y", 'c', NULL);"#),
            vec![Int, Float, Str, Str, WideStr, Pointer, Int, Float, Str, WideStr, Int, Pointer]
        );
    }

    #[test]
    fn derived_types() {
        use ValueType::*;
        assert_eq!(
            arg_types("sink(s - a, s + 1, *s, a[0], *pp, **pp, (long)s, sizeof(s), i * d, &i, getenv(\"X\"), foo());"),
            vec![Int, Str, Int, Int, Pointer, Int, Int, Int, Float, Pointer, Str, Unknown]
        );
    }
}
