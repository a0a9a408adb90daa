//! Rank the words of a README and decide whether it is about WebAssembly.
//!
//!     cargo run --example rank_readme [-- README.md]

use wasmsmell::relevance::{is_relevant, RankParams, DEFAULT_KEYWORDS};

const README: &str = "# pdfkit-wasm

A port of the pdfkit renderer to WebAssembly. The WebAssembly module is built
with Emscripten and loaded in the browser, so PDF pages render without a
server. See the build notes for the Emscripten toolchain version.
";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable README"),
        None => README.to_string(),
    };
    let r = is_relevant(&text, DEFAULT_KEYWORDS, 15, RankParams::default());
    println!("relevant: {} (matched {:?})", r.relevant, r.matched);
    for (i, w) in r.top.iter().enumerate() {
        println!("{:>3}. {:<16} {:.4}", i + 1, w.word, w.score);
    }
}
