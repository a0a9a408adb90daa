//! Checks over the syntax tree of one function: environment access, pointer
//! subtraction and format strings.

use super::format;
use super::typing::infer;
use super::CheckerSet;
use crate::engine::RawFinding;
use crate::flow::SymbolTable;
use crate::frontend::{walk, BinOp, Expr, ExprKind, FunctionDef, NodeRef};

pub struct StructuralResult {
    pub findings: Vec<RawFinding>,
    pub skipped_sites: usize,
}

fn raw(checker: &str, e: &Expr, message: String) -> RawFinding {
    RawFinding {
        checker: checker.into(),
        span: e.span,
        message,
        path_note: None,
    }
}

pub fn check_structural(
    func: &FunctionDef,
    table: &SymbolTable,
    set: &CheckerSet,
) -> StructuralResult {
    let mut findings = Vec::new();
    let mut skipped_sites = 0;
    walk(NodeRef::Function(func), &mut |node, _| {
        let NodeRef::Expr(e) = node else { return };
        match &e.kind {
            ExprKind::Call { args, .. } => {
                let callee = e.callee_name();
                if callee == Some("getenv") && set.contains("access-env") {
                    let what = match args.first().map(|a| &a.kind) {
                        Some(ExprKind::Literal(crate::frontend::Literal::Str {
                            value, ..
                        })) => {
                            format!(" for \"{value}\"")
                        }
                        _ => String::new(),
                    };
                    findings.push(raw(
                        "access-env",
                        e,
                        format!("call to getenv{what} reads the execution environment"),
                    ));
                }
                let wants_count = set.contains("format-arg-count");
                let wants_type = set.contains("format-arg-type");
                if wants_count || wants_type {
                    if let Some(res) = format::check_call(e, table) {
                        if res.skipped {
                            skipped_sites += 1;
                        }
                        if wants_count {
                            findings.extend(res.count);
                        }
                        if wants_type {
                            findings.extend(res.types);
                        }
                    }
                }
            }
            ExprKind::Binary {
                op: BinOp::Sub,
                lhs,
                rhs,
            } if set.contains("pointer-subtraction") => {
                let l = infer(lhs, table);
                let r = infer(rhs, table);
                if l.is_pointer_like() && r.is_pointer_like() {
                    let name = |x: &Expr| {
                        x.strip_parens_and_casts()
                            .ident()
                            .map(|n| format!("'{n}'"))
                            .unwrap_or_else(|| "pointer".into())
                    };
                    findings.push(raw(
                        "pointer-subtraction",
                        e,
                        format!(
                            "subtraction of two pointers {} and {}",
                            name(lhs),
                            name(rhs)
                        ),
                    ));
                }
            }
            _ => {}
        }
    });
    StructuralResult {
        findings,
        skipped_sites,
    }
}
