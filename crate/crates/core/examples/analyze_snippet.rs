//! Analyze a C source string (or a file given as the first argument) with
//! the default checkers and print one line per finding.
//!
//!     cargo run --example analyze_snippet [-- path/to/file.c]

use wasmsmell::analyze::{analyze_source, AnalysisConfig};
use wasmsmell::report::{render_report, Format};

const SNIPPET: &str = r#"#include <stdio.h>
#include <stdlib.h>

int main(void) {
    FILE *log = fopen("run.log", "w");
    char *home = getenv("HOME");
    fprintf(log, "%s %d\n", home);
    fclose(log);
    if (fputs("done\n", stdout) == 0)
        return 1;
    return 0;
}
"#;

fn main() {
    let (name, text) = match std::env::args().nth(1) {
        Some(path) => {
            let text = std::fs::read(&path).expect("readable source file");
            (path, text)
        }
        None => ("snippet.c".to_string(), SNIPPET.as_bytes().to_vec()),
    };
    let report = analyze_source(&text, &name, &AnalysisConfig::default());
    print!("{}", render_report(&report, Format::Text));
    println!(
        "{} findings, {} paths explored",
        report.findings.len(),
        report.budget.paths_completed
    );
}
