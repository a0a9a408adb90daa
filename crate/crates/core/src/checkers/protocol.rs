//! Call-protocol checks (fputs results, fwide before wprintf) and the
//! uninitialized-read check.

use crate::engine::{CallSite, Checker, ComparisonSite, HookContext, InitState, VarRead};
use crate::frontend::BinOp;

pub struct BadFputsComparison;

impl Checker for BadFputsComparison {
    fn id(&self) -> &str {
        "bad-fputs-comparison"
    }

    fn comparison(&self, cx: &mut HookContext<'_>, cmp: &ComparisonSite) {
        if !matches!(cmp.op, BinOp::Eq | BinOp::Ne) {
            return;
        }
        let is_fputs = |id| cx.state.symbol(id).is_call_to("fputs");
        let is_zero = |id| cx.state.symbol(id).literal == Some(0);
        if (is_fputs(cmp.lhs) && is_zero(cmp.rhs)) || (is_fputs(cmp.rhs) && is_zero(cmp.lhs)) {
            cx.emit(
                cmp.span,
                "fputs result compared against 0; success is any non-negative value",
            );
        }
    }
}

pub struct WideString;

impl Checker for WideString {
    fn id(&self) -> &str {
        "wide-string"
    }

    fn pre_call(&self, cx: &mut HookContext<'_>, call: &CallSite<'_>) {
        if call.callee == "wprintf" && !cx.state.events().iter().any(|e| e.callee == "fwide") {
            cx.emit(call.span, "wprintf without a preceding call to fwide");
        }
    }
}

pub struct UninitializedVariable;

impl Checker for UninitializedVariable {
    fn id(&self) -> &str {
        "uninitialized-variable"
    }

    fn variable_read(&self, cx: &mut HookContext<'_>, read: &VarRead<'_>) {
        let Some(decl) = read.decl else { return };
        if decl.is_parameter || decl.is_global || !decl.ty.is_scalar_or_pointer() {
            return;
        }
        if cx.state.symbol(read.symbol).init != InitState::Uninit
            || !cx.slice.marked.insert(read.symbol)
        {
            return;
        }
        cx.emit(read.span, format!("'{}' is used uninitialized", read.name));
    }
}
