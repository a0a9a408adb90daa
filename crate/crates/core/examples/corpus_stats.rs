//! Analyze several small projects and summarize them as corpus statistics.
//!
//!     cargo run --example corpus_stats

use wasmsmell::analyze::{analyze_source, AnalysisConfig};
use wasmsmell::report::{compute_corpus_stats, merge_findings, render_stats, Format};

const PROJECTS: &[(&str, &[(&str, &str)])] = &[
    (
        "env-reader",
        &[(
            "main.c",
            "void f(void) { char *a = getenv(\"A\"); char *b = getenv(\"B\"); }",
        )],
    ),
    (
        "logger",
        &[
            (
                "log.c",
                "void g(void) { FILE *f = fopen(\"l\", \"a\"); fclose(f); }",
            ),
            ("env.c", "void h(void) { char *p = getenv(\"LOG\"); }"),
        ],
    ),
    (
        "clean",
        &[("ok.c", "int add(int a, int b) { return a + b; }")],
    ),
];

fn main() {
    let config = AnalysisConfig::default();
    let reports: Vec<_> = PROJECTS
        .iter()
        .map(|(id, files)| {
            let parts: Vec<_> = files
                .iter()
                .map(|(name, src)| analyze_source(src.as_bytes(), name, &config))
                .collect();
            merge_findings(id, &parts).expect("same schema")
        })
        .collect();
    let stats = compute_corpus_stats(&reports).expect("unique project ids");
    print!("{}", render_stats(&stats, Format::Text));
}
