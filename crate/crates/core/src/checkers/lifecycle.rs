//! Allocation and file-handle lifecycle checks.

use crate::engine::{
    CallSite, Checker, FileOrigin, HookContext, NullConstraint, Origin, ResourceState,
};
use crate::frontend::Expr;

/// `'name'` for a plain identifier argument, a generic noun otherwise.
pub(crate) fn describe_arg(args: &[Expr], fallback: &str) -> String {
    args.first()
        .and_then(|a| a.strip_parens_and_casts().ident())
        .filter(|n| !n.starts_with('$'))
        .map(|n| format!("'{n}'"))
        .unwrap_or_else(|| fallback.to_string())
}

pub struct DoubleFree;

impl Checker for DoubleFree {
    fn id(&self) -> &str {
        "double-free"
    }

    fn pre_call(&self, cx: &mut HookContext<'_>, call: &CallSite<'_>) {
        if call.callee != "free" {
            return;
        }
        let Some(&arg) = call.arg_symbols.first() else {
            return;
        };
        if cx.state.symbol(arg).resource == ResourceState::Freed {
            let what = describe_arg(call.args, "memory");
            cx.emit(call.span, format!("{what} is freed twice"));
        }
    }
}

pub struct DoubleFclose;

impl Checker for DoubleFclose {
    fn id(&self) -> &str {
        "double-fclose"
    }

    fn pre_call(&self, cx: &mut HookContext<'_>, call: &CallSite<'_>) {
        if call.callee != "fclose" {
            return;
        }
        let Some(&arg) = call.arg_symbols.first() else {
            return;
        };
        if cx.state.symbol(arg).resource == ResourceState::FileClosed {
            let what = describe_arg(call.args, "stream");
            cx.emit(call.span, format!("{what} is closed twice with fclose"));
        }
    }
}

pub struct ErrorWithoutAction;

impl Checker for ErrorWithoutAction {
    fn id(&self) -> &str {
        "error-without-action"
    }

    fn pre_call(&self, cx: &mut HookContext<'_>, call: &CallSite<'_>) {
        if call.callee != "fclose" {
            return;
        }
        let Some(&arg) = call.arg_symbols.first() else {
            return;
        };
        let s = cx.state.symbol(arg);
        let opener = match s.resource {
            ResourceState::FileOpen(FileOrigin::Fopen) => "fopen",
            ResourceState::FileOpen(FileOrigin::Freopen) => "freopen",
            _ => return,
        };
        if s.null != NullConstraint::NonNull {
            let what = describe_arg(call.args, "stream");
            cx.emit(
                call.span,
                format!("fclose on {what} from {opener} without checking it against NULL"),
            );
        }
    }
}

pub struct ImproperResourceShutdown;

impl Checker for ImproperResourceShutdown {
    fn id(&self) -> &str {
        "improper-resource-shutdown"
    }

    fn pre_call(&self, cx: &mut HookContext<'_>, call: &CallSite<'_>) {
        if call.callee != "fclose" {
            return;
        }
        let Some(&arg) = call.arg_symbols.first() else {
            return;
        };
        if !cx.state.symbol(arg).is_call_to("open") {
            return;
        }
        // the variable must not be declared as a pointer
        if let Some(arg_expr) = call.args.first().map(|a| a.strip_parens_and_casts()) {
            if let Some(name) = arg_expr.ident() {
                if let Some(ty) = cx.table.type_of(name, arg_expr.span.offset) {
                    if !ty.is_integer() {
                        return;
                    }
                }
            }
        }
        let what = describe_arg(call.args, "value");
        cx.emit(
            call.span,
            format!("fclose on file descriptor {what} returned by open; use close"),
        );
    }
}

pub struct AllocaFree;

impl Checker for AllocaFree {
    fn id(&self) -> &str {
        "alloca-free"
    }

    fn pre_call(&self, cx: &mut HookContext<'_>, call: &CallSite<'_>) {
        if call.callee != "free" {
            return;
        }
        let Some(&arg) = call.arg_symbols.first() else {
            return;
        };
        if cx.state.symbol(arg).resource == ResourceState::StackAllocated {
            let what = describe_arg(call.args, "memory");
            cx.emit(
                call.span,
                format!("free of {what} allocated on the stack by alloca"),
            );
        }
    }
}

pub struct OffsetFree;

impl Checker for OffsetFree {
    fn id(&self) -> &str {
        "offset-free"
    }

    fn pre_call(&self, cx: &mut HookContext<'_>, call: &CallSite<'_>) {
        if call.callee != "free" {
            return;
        }
        let Some(&arg) = call.arg_symbols.first() else {
            return;
        };
        if let Origin::Derived {
            offset: Some(k), ..
        } = cx.state.symbol(arg).origin
        {
            if k != 0 {
                let what = describe_arg(call.args, "pointer");
                let n = k.unsigned_abs();
                let unit = if n == 1 { "element" } else { "elements" };
                let side = if k > 0 { "past" } else { "before" };
                cx.emit(
                    call.span,
                    format!(
                        "free of {what} which points {n} {unit} {side} the start of its allocation"
                    ),
                );
            }
        }
    }
}
