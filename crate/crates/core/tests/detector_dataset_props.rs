use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use proptest::prelude::*;

use wasmsmell::dataset::{collect, scan_binaries, sha256_hex, BinaryIndex, INDEX_FILE};
use wasmsmell::detector::{classify_repo, Hit};

const NAMES: &[&str] = &[
    "Makefile",
    "CMakeLists.txt",
    "build.sh",
    "src/main.c",
    "src/app.h",
    "web/index.js",
    "web/page.html",
    "README.md",
    "docs/notes.txt",
    "lib/util.cpp",
];

const LINES: &[&str] = &[
    "all: main",
    "\temcc -O2 main.c -o main.js",
    "CXX = em++",
    "clang --target=wasm32 -c x.c",
    "#include <emscripten.h>",
    "#include <emscripten/html5.h>",
    "#include <stdio.h>",
    "// emcc is mentioned in a comment",
    "const m = await WebAssembly.instantiate(bytes);",
    "new WebAssembly.Instance(mod);",
    "WebAssembly is a binary format",
    "int main(void) { return 0; }",
    "",
];

fn repo_files() -> impl Strategy<Value = BTreeMap<&'static str, Vec<&'static str>>> {
    prop::collection::btree_map(
        prop::sample::select(NAMES),
        prop::collection::vec(prop::sample::select(LINES), 0..6),
        0..5,
    )
}

fn write_repo(root: &Path, files: &BTreeMap<&str, Vec<&str>>) {
    for (name, lines) in files {
        let p = root.join(name);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, lines.join("\n") + "\n").unwrap();
    }
}

fn hits_point_at_text(root: &Path, hits: &[Hit], needle: impl Fn(&Hit) -> String) {
    for h in hits {
        let text = fs::read_to_string(root.join(&h.file)).unwrap();
        let line = text.lines().nth(h.line as usize - 1).unwrap();
        assert!(
            line.contains(&needle(h)),
            "{h:?} does not point at its token: {line:?}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adding_a_file_keeps_targeting(files in repo_files(), extra_name in prop::sample::select(NAMES),
                                     extra in prop::collection::vec(prop::sample::select(LINES), 0..4)) {
        let tmp = tempfile::tempdir().unwrap();
        write_repo(tmp.path(), &files);
        let before = classify_repo(tmp.path()).unwrap();
        let mut more = files.clone();
        more.entry(extra_name).or_default().extend(extra);
        write_repo(tmp.path(), &more);
        let after = classify_repo(tmp.path()).unwrap();
        prop_assert!(!before.is_targeting() || after.is_targeting());
    }

    #[test]
    fn evidence_points_at_tokens(files in repo_files()) {
        let tmp = tempfile::tempdir().unwrap();
        write_repo(tmp.path(), &files);
        let ev = classify_repo(tmp.path()).unwrap();
        hits_point_at_text(tmp.path(), &ev.h1, |h| h.text.clone());
        hits_point_at_text(tmp.path(), &ev.h2, |h| h.text.clone());
        hits_point_at_text(tmp.path(), &ev.h3, |h| h.text.clone());
        for hits in [&ev.h1, &ev.h2, &ev.h3] {
            prop_assert!(hits.windows(2).all(|w| w[0] <= w[1]));
        }
        prop_assert_eq!(ev.is_targeting(), !(ev.h1.is_empty() && ev.h2.is_empty() && ev.h3.is_empty()));
        prop_assert_eq!(classify_repo(tmp.path()).unwrap(), ev);
    }

    #[test]
    fn dedup_store_properties(files in prop::collection::btree_map("[a-c]{1,2}/[a-d]{1,3}\\.(wasm|WASM)", 0u8..4, 0..8)) {
        let tmp = tempfile::tempdir().unwrap();
        let repo = tmp.path().join("repo");
        let dest = tmp.path().join("dest");
        fs::create_dir_all(&repo).unwrap();
        // names differing only in case would collide on some file systems
        let mut seen = BTreeSet::new();
        let files: BTreeMap<String, u8> = files
            .into_iter()
            .filter(|(n, _)| seen.insert(n.to_lowercase()))
            .collect();
        for (name, content) in &files {
            let p = repo.join(name);
            fs::create_dir_all(p.parent().unwrap()).unwrap();
            fs::write(p, [0u8, b'a', b's', b'm', *content]).unwrap();
        }
        prop_assert_eq!(scan_binaries(&repo).len(), files.len());

        collect(&repo, &dest, "r", None).unwrap();
        let index_bytes = fs::read(dest.join(INDEX_FILE)).unwrap();
        let stored: Vec<_> = fs::read_dir(&dest)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "wasm"))
            .collect();
        for p in &stored {
            let stem = p.file_stem().unwrap().to_str().unwrap();
            prop_assert_eq!(sha256_hex(&fs::read(p).unwrap()), stem);
        }
        let distinct: BTreeSet<u8> = files.values().copied().collect();
        prop_assert_eq!(stored.len(), distinct.len());
        let index = BinaryIndex::load(&dest).unwrap();
        prop_assert_eq!(index.origin_count(), files.len());
        prop_assert_eq!(index.origin_count() == stored.len(), distinct.len() == files.len());

        collect(&repo, &dest, "r", None).unwrap();
        prop_assert_eq!(fs::read(dest.join(INDEX_FILE)).unwrap(), index_bytes);
    }
}
