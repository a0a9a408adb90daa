//! Collect `.wasm` files from a tree into a content-addressed dataset
//! directory and print the resulting index.
//!
//!     cargo run --example collect_binaries [-- repo/ dataset/]

use std::fs;
use std::path::PathBuf;

use wasmsmell::dataset::{collect, BinaryIndex};
use wasmsmell::report::to_canonical_json;

fn main() {
    let demo = tempfile::tempdir().expect("temporary directory");
    let mut args = std::env::args().skip(1);
    let (root, dest) = match (args.next(), args.next()) {
        (Some(r), Some(d)) => (PathBuf::from(r), PathBuf::from(d)),
        _ => {
            let root = demo.path().join("repo");
            fs::create_dir_all(root.join("dist")).unwrap();
            fs::create_dir_all(root.join("examples")).unwrap();
            fs::write(root.join("dist/app.wasm"), b"\0asm\x01\0\0\0").unwrap();
            fs::write(root.join("examples/app.wasm"), b"\0asm\x01\0\0\0").unwrap();
            fs::write(
                root.join("dist/worker.wasm"),
                b"\0asm\x01\0\0\0\x01\x04\x01\x60\0\0",
            )
            .unwrap();
            (root, demo.path().join("dataset"))
        }
    };
    let summary = collect(&root, &dest, "demo", None).expect("collect binaries");
    println!(
        "stored {} new binaries from {} files",
        summary.stored.len(),
        summary.wasm_files
    );
    print!("{}", to_canonical_json(&BinaryIndex::load(&dest).unwrap()));
}
