//! Register a checker of your own next to the built-in ones. This one
//! flags writes through a `malloc` result on paths where it was never
//! compared against NULL.
//!
//!     cargo run --example custom_checker

use std::sync::Arc;

use wasmsmell::analyze::{analyze_source, AnalysisConfig};
use wasmsmell::checkers::CheckerSet;
use wasmsmell::engine::{CallSite, Checker, HookContext, NullConstraint};
use wasmsmell::report::{render_report, Format};

struct UncheckedAllocWrite;

impl Checker for UncheckedAllocWrite {
    fn id(&self) -> &str {
        "unchecked-alloc-write"
    }

    fn pre_call(&self, cx: &mut HookContext<'_>, call: &CallSite<'_>) {
        if !matches!(call.callee, "memcpy" | "memset" | "strcpy") {
            return;
        }
        let Some(&dst) = call.arg_symbols.first() else {
            return;
        };
        let sym = cx.state.symbol(dst);
        if sym.is_call_to("malloc") && sym.null == NullConstraint::Unknown {
            cx.emit(
                call.span,
                format!("{} into a malloc result that may be NULL", call.callee),
            );
        }
    }
}

const SRC: &str = r#"#include <stdlib.h>
#include <string.h>

char *copy(const char *s, size_t n) {
    char *out = malloc(n + 1);
    memcpy(out, s, n);
    return out;
}

char *copy_checked(const char *s, size_t n) {
    char *out = malloc(n + 1);
    if (out == NULL)
        return NULL;
    memcpy(out, s, n);
    return out;
}
"#;

fn main() {
    let config = AnalysisConfig {
        checkers: CheckerSet::none(),
        extra: vec![Arc::new(UncheckedAllocWrite)],
        ..Default::default()
    };
    let report = analyze_source(SRC.as_bytes(), "copy.c", &config);
    print!("{}", render_report(&report, Format::Text));
}
