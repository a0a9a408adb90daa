//! Walk the flow graph of a loop under different unroll budgets and show
//! how many paths the engine completes, truncates and prunes.
//!
//!     cargo run --example engine_paths

use wasmsmell::engine::{analyze_function, Budget};
use wasmsmell::flow::{build_cfg, resolve_decl_types, Terminator};
use wasmsmell::frontend::SourceUnit;

const SRC: &str = "void drain(int c) {
    char *buf = malloc(64);
    while (c) {
        c = c - 1;
    }
    if (buf == NULL) {
        if (buf != NULL) free(buf);
    }
    free(buf);
}";

fn main() {
    let su = SourceUnit::parse(SRC.as_bytes());
    let func = su.functions().next().expect("one function");
    let graph = build_cfg(func);
    let table = resolve_decl_types(func);

    println!("{} blocks, {} edges", graph.blocks.len(), graph.edges.len());
    for (i, b) in graph.blocks.iter().enumerate() {
        let term = match &b.terminator {
            Terminator::Fallthrough(next) => format!("fallthrough -> {next}"),
            Terminator::Branch {
                on_true, on_false, ..
            } => format!("branch -> {on_true} / {on_false}"),
            Terminator::Return { .. } => "return".to_string(),
        };
        println!("  block {i}: {} statements, {term}", b.stmts.len());
    }

    for unroll in 0..4 {
        let r = analyze_function(
            &graph,
            &table,
            &[],
            Budget {
                max_paths: 4096,
                unroll,
            },
        )
        .report;
        println!(
            "unroll={unroll}: {} completed, {} truncated, {} infeasible",
            r.paths_completed, r.paths_truncated, r.paths_infeasible
        );
    }
}
