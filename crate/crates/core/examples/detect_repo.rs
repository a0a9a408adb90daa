//! Classify a repository as WebAssembly-targeting from its build scripts,
//! includes and JavaScript. Without an argument a small demo repository is
//! created in a temporary directory.
//!
//!     cargo run --example detect_repo [-- path/to/repo]

use std::fs;
use std::path::PathBuf;

use wasmsmell::detector::classify_repo;

fn main() {
    let demo = tempfile::tempdir().expect("temporary directory");
    let root = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let root = demo.path().to_path_buf();
            fs::create_dir_all(root.join("src")).unwrap();
            fs::create_dir_all(root.join("web")).unwrap();
            fs::write(
                root.join("Makefile"),
                "web/app.js: src/app.c\n\temcc -O2 src/app.c -o web/app.js\n",
            )
            .unwrap();
            fs::write(
                root.join("src/app.c"),
                "#include <emscripten/emscripten.h>\nint main(void) { return 0; }\n",
            )
            .unwrap();
            fs::write(
                root.join("web/boot.js"),
                "WebAssembly.instantiateStreaming(fetch('app.wasm'));\n",
            )
            .unwrap();
            root
        }
    };
    let evidence = classify_repo(&root).expect("repository directory");
    println!("verdict: {:?}", evidence.verdict);
    for (name, hits) in [
        ("h1", &evidence.h1),
        ("h2", &evidence.h2),
        ("h3", &evidence.h3),
    ] {
        for h in hits {
            println!("  {name} {}:{} {}", h.file, h.line, h.text);
        }
    }
}
