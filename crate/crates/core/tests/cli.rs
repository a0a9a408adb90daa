use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn wasmsmell(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wasmsmell"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(root: &Path, rel: &str, text: &str) {
    let p = root.join(rel);
    fs::create_dir_all(p.parent().unwrap()).unwrap();
    fs::write(p, text).unwrap();
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_exit_codes_and_filter() {
    let tmp = tempfile::tempdir().unwrap();
    let proj = tmp.path().join("proj");
    write(&proj, "src/env.c", "#include <stdio.h>\n#include <stdlib.h>\nvoid f(void) {\n    printf(\"%s\\n\", getenv(\"PATH\"));\n}\n");
    write(&proj, "src/io.c", "#include <stdio.h>\nvoid g(void) {\n    FILE *f = fopen(\"a\", \"r\");\n    fclose(f);\n}\n");
    write(&proj, "data.bin.c", "\0\0\0binary");
    let (code, out, _) = wasmsmell(&["analyze", s(&proj), "--format", "json"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["project"], "proj");
    assert_eq!(v["files_analyzed"], 2);
    assert_eq!(v["files_skipped"], 1);
    let checkers: Vec<&str> = v["findings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["checker"].as_str().unwrap())
        .collect();
    assert_eq!(checkers, vec!["access-env", "error-without-action"]);
    assert_eq!(v["findings"][0]["file"], "src/env.c");
    assert_eq!(v["findings"][0]["cwe"], Value::Null);
    assert_eq!(v["findings"][1]["cwe"], 390);

    let (code, out, _) = wasmsmell(&["analyze", s(&proj), "--checkers", "access-env"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["findings"].as_array().unwrap().len(), 1);

    let (code, _, _) = wasmsmell(&[
        "analyze",
        s(&proj),
        "--no-checkers",
        "access-env,error-without-action",
    ]);
    assert_eq!(code, 0);

    let clean = tmp.path().join("clean");
    write(&clean, "ok.c", "int add(int a, int b) { return a + b; }\n");
    let (code, out, _) = wasmsmell(&["analyze", s(&clean), "--format", "text"]);
    assert_eq!((code, out.as_str()), (0, ""));

    let (code, _, err) = wasmsmell(&["analyze", s(&tmp.path().join("missing"))]);
    assert_eq!(code, 2);
    assert!(err.contains("no such file"));

    let report = tmp.path().join("r.json");
    let (code, out, _) = wasmsmell(&["analyze", s(&proj), "--out", s(&report), "--detect-target"]);
    assert_eq!((code, out.as_str()), (1, ""));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["wasm_target"]["verdict"], "not-targeting");
}

#[test]
fn analyze_single_file() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "one.c",
        "void f(void) { char *p = malloc(2); free(p); free(p); }\n",
    );
    let (code, out, _) = wasmsmell(&["analyze", s(&tmp.path().join("one.c")), "--format", "text"]);
    assert_eq!(code, 1);
    assert_eq!(out, "one.c:1:46: [double-free] 'p' is freed twice\n");
}

#[test]
fn detect_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = tmp.path().join("repo");
    write(&repo, "Makefile", "app.js: app.c\n\temcc app.c -o app.js\n");
    let (code, out, _) = wasmsmell(&["detect-wasm", s(&repo)]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["h1"][0]["file"], "Makefile");
    assert_eq!(v["h1"][0]["line"], 2);
    let (_, text, _) = wasmsmell(&["detect-wasm", s(&repo), "--format", "text"]);
    assert_eq!(text, "targeting\nh1 Makefile:2: emcc\n");

    let empty = tmp.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    assert_eq!(wasmsmell(&["detect-wasm", s(&empty)]).0, 1);
    assert_eq!(
        wasmsmell(&["detect-wasm", s(&tmp.path().join("nope"))]).0,
        2
    );
}

#[test]
fn rank_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let wasm = tmp.path().join("WASM.md");
    fs::write(
        &wasm,
        "# wasm-sqlite\nA WebAssembly build of SQLite. The WebAssembly module runs in the browser.\n\
         Compile the WebAssembly module with Emscripten, then load the WebAssembly binary.\n",
    )
    .unwrap();
    let (code, out, _) = wasmsmell(&["rank-readme", s(&wasm)]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["top"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w["word"] == "webassembly"));
    assert_eq!(v["relevant"], true);

    let other = tmp.path().join("OTHER.md");
    fs::write(
        &other,
        "# Recipes\nA cooking app with recipes, shopping lists and meal plans.\n",
    )
    .unwrap();
    assert_eq!(wasmsmell(&["rank-readme", s(&other)]).0, 1);

    let foo = tmp.path().join("FOO.md");
    fs::write(
        &foo,
        "foo is a tool. Use foo to convert foo files into foo archives.\n",
    )
    .unwrap();
    assert_eq!(
        wasmsmell(&["rank-readme", s(&foo), "--keywords", "foo"]).0,
        0
    );
    let (code, text, _) = wasmsmell(&[
        "rank-readme",
        s(&foo),
        "--keywords",
        "foo",
        "--top-k",
        "2",
        "--format",
        "text",
    ]);
    assert_eq!(code, 0);
    assert!(text.starts_with("relevant (foo)\n  1. foo"));

    assert_eq!(
        wasmsmell(&["rank-readme", s(&tmp.path().join("missing.md"))]).0,
        2
    );
    assert_eq!(
        wasmsmell(&["rank-readme", s(&foo), "--damping", "1.5"]).0,
        2
    );
}

#[test]
fn collect_dedup_wat_and_integrity() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = tmp.path().join("repo");
    let dest = tmp.path().join("dataset");
    write(&repo, "a.wasm", "\0asm-one");
    write(&repo, "dist/a.wasm", "\0asm-one");
    write(&repo, "b.wasm", "\0asm-two");
    write(&repo, "good.wat", "(module)");
    write(&repo, "bad.wat", "(module");

    // stand-in converter: copies its input, or fails on an unbalanced module
    let script = tmp.path().join("convert.sh");
    fs::write(
        &script,
        "if grep -q '(module)' \"$1\"; then cp \"$1\" \"$2\"; else echo \"syntax error in $1\" >&2; exit 1; fi\n",
    )
    .unwrap();
    let template = format!("sh {} {{in}} {{out}}", s(&script));
    let (code, out, err) = wasmsmell(&[
        "collect",
        s(&repo),
        "--dest",
        s(&dest),
        "--wat2wasm",
        &template,
    ]);
    assert_eq!(code, 0, "{err}");
    let summary: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(summary["wasm_files"], 3);
    assert_eq!(summary["wat_converted"], 1);
    assert_eq!(summary["wat_unconverted"], 1);
    assert_eq!(summary["index_entries"], 3);
    assert_eq!(summary["index_origins"], 4);

    let index: Value =
        serde_json::from_str(&fs::read_to_string(dest.join("index.json")).unwrap()).unwrap();
    assert_eq!(index["wat"]["converted"], 1);
    assert_eq!(index["wat"]["unconverted"][0]["path"], "bad.wat");
    assert!(index["wat"]["unconverted"][0]["stderr"]
        .as_str()
        .unwrap()
        .contains("syntax error"));
    let before = fs::read(dest.join("index.json")).unwrap();

    let (code, _, _) = wasmsmell(&[
        "collect",
        s(&repo),
        "--dest",
        s(&dest),
        "--wat2wasm",
        &template,
    ]);
    assert_eq!(code, 0);
    assert_eq!(fs::read(dest.join("index.json")).unwrap(), before);

    let other = tmp.path().join("other");
    let (code, out, _) = wasmsmell(&[
        "collect",
        s(&repo),
        "--dest",
        s(&other),
        "--wat2wasm",
        "no-such-converter {in} {out}",
    ]);
    assert_eq!(code, 0);
    let summary: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        (
            summary["wat_skipped"].as_u64(),
            summary["index_entries"].as_u64()
        ),
        (Some(2), Some(2))
    );

    // corrupt the stored binaries, then collect again
    for e in index["entries"].as_array().unwrap() {
        fs::write(
            dest.join(format!("{}.wasm", e["hash"].as_str().unwrap())),
            "tampered",
        )
        .unwrap();
    }
    let (code, _, err) = wasmsmell(&[
        "collect",
        s(&repo),
        "--dest",
        s(&dest),
        "--wat2wasm",
        "none",
    ]);
    assert_eq!(code, 3, "{err}");
    assert!(!dest.join(".lock").exists());

    assert_eq!(
        wasmsmell(&["collect", s(&tmp.path().join("gone")), "--dest", s(&dest)]).0,
        2
    );
}

#[test]
fn collect_respects_lock() {
    let tmp = tempfile::tempdir().unwrap();
    let dest = tmp.path().join("d");
    fs::create_dir_all(&dest).unwrap();
    fs::write(dest.join(".lock"), "").unwrap();
    let (code, _, err) = wasmsmell(&[
        "collect",
        s(tmp.path()),
        "--dest",
        s(&dest),
        "--wat2wasm",
        "none",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("locked"));
}

#[test]
fn build_statuses() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = tmp.path().join("repo");
    write(&repo, "app/CMakeLists.txt", "project(x C)\n");
    write(
        &repo,
        "app/third_party/lib/CMakeLists.txt",
        "add_library(y y.c)\n",
    );
    write(&repo, "app/gen/Makefile", "all:\n\ttrue\n");
    write(&repo, "tools/Makefile", "all:\n\ttrue\n");

    let (code, out, _) = wasmsmell(&[
        "build",
        s(&repo),
        "--cmake-wrapper",
        "no-such-emcmake cmake .",
        "--make-wrapper",
        "no-such-emmake make",
    ]);
    assert_eq!(code, 0);
    let log: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(log["status"], "toolchain-unavailable");
    let dirs: Vec<&str> = log["steps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["dir"].as_str().unwrap())
        .collect();
    assert_eq!(dirs, vec!["app", "tools"]);

    let (_, out, _) = wasmsmell(&[
        "build",
        s(&repo),
        "--cmake-wrapper",
        "true",
        "--make-wrapper",
        "true",
    ]);
    let log: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(log["status"], "ok");
    assert_eq!(log["steps"].as_array().unwrap().len(), 3);

    let (_, out, _) = wasmsmell(&[
        "build",
        s(&repo),
        "--cmake-wrapper",
        "sh -c exit",
        "--make-wrapper",
        "false",
    ]);
    let log: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(log["status"], "failed");

    let (_, out, _) = wasmsmell(&[
        "build",
        s(&repo),
        "--cmake-wrapper",
        "sleep 5",
        "--make-wrapper",
        "true",
        "--timeout",
        "1",
    ]);
    let log: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(log["steps"][0]["status"], "timeout");

    let bare = tmp.path().join("bare");
    fs::create_dir_all(&bare).unwrap();
    let (code, out, _) = wasmsmell(&["build", s(&bare)]);
    assert_eq!(code, 0);
    assert!(out.contains("\"no-build-system\""));
}

#[test]
fn stats_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{").unwrap();
    assert_eq!(wasmsmell(&["stats", s(&bad)]).0, 2);
    assert_eq!(wasmsmell(&["stats"]).0, 2);

    let proj = tmp.path().join("p");
    write(&proj, "a.c", "void f(void) {}\n");
    let r = tmp.path().join("p.json");
    wasmsmell(&["analyze", s(&proj), "--out", s(&r)]);
    let (code, _, err) = wasmsmell(&["stats", s(&r), s(&r)]);
    assert_eq!(code, 2);
    assert!(err.contains("duplicate project"));
}

#[test]
fn help_and_usage() {
    let (code, out, _) = wasmsmell(&["--help"]);
    assert_eq!(code, 0);
    for sub in [
        "analyze",
        "detect-wasm",
        "rank-readme",
        "collect",
        "build",
        "stats",
    ] {
        assert!(out.contains(sub), "{sub}");
    }
    assert_eq!(wasmsmell(&[]).0, 2);
    assert_eq!(wasmsmell(&["frobnicate"]).0, 2);
    assert_eq!(wasmsmell(&["analyze", ".", "--jobs", "many"]).0, 2);
    assert_eq!(wasmsmell(&["--version"]).0, 0);
}
