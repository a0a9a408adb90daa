//! Run the build orchestration over a repository. The demo substitutes
//! `true` for the Emscripten wrappers so it runs without a toolchain.
//!
//!     cargo run --example build_repo [-- path/to/repo]

use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use wasmsmell::dataset::{orchestrate_build, BuildConfig};
use wasmsmell::report::to_canonical_json;

fn main() {
    let demo = tempfile::tempdir().expect("temporary directory");
    let (root, config) = match std::env::args().nth(1) {
        Some(p) => (PathBuf::from(p), BuildConfig::default()),
        None => {
            let root = demo.path().to_path_buf();
            fs::create_dir_all(root.join("engine")).unwrap();
            fs::create_dir_all(root.join("tools")).unwrap();
            fs::write(root.join("engine/CMakeLists.txt"), "project(engine C)\n").unwrap();
            fs::write(root.join("tools/Makefile"), "all:\n\t@echo tools\n").unwrap();
            let config = BuildConfig {
                cmake_wrapper: "true".into(),
                make_wrapper: "true".into(),
                timeout: Duration::from_secs(30),
            };
            (root, config)
        }
    };
    print!("{}", to_canonical_json(&orchestrate_build(&root, &config)));
}
