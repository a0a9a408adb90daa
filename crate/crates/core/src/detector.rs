//! Textual heuristics that mark a repository as targeting WebAssembly:
//! compiler references in build scripts (h1), Emscripten header includes
//! (h2) and JavaScript WebAssembly API calls (h3).

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::frontend::{is_source_path, preprocess_lite};

const MAX_TEXT_FILE: u64 = 1 << 20;
const SNIFF_LEN: usize = 8 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hit {
    /// Repository-relative, `/`-separated.
    pub file: String,
    pub line: u32,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Targeting,
    NotTargeting,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoEvidence {
    pub h1: Vec<Hit>,
    pub h2: Vec<Hit>,
    pub h3: Vec<Hit>,
    pub verdict: Verdict,
}

impl RepoEvidence {
    pub fn is_targeting(&self) -> bool {
        self.verdict == Verdict::Targeting
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DetectError {
    #[error("{0}: no such directory")]
    MissingRoot(PathBuf),
}

/// `/`-separated path of `path` relative to `root`.
pub fn relative_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Regular files under `root` in sorted order, skipping `.git`.
pub(crate) fn walk_files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let walker = WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || e.file_name() != ".git");
    for entry in walker {
        match entry {
            Ok(e) if e.file_type().is_file() => out.push(e.into_path()),
            Ok(_) => {}
            Err(err) => log::warn!("skipping unreadable entry: {err}"),
        }
    }
    out
}

/// Text content of `path`, or `None` for unreadable or binary files.
pub(crate) fn read_text(path: &Path) -> Option<String> {
    let meta = fs::metadata(path).ok()?;
    if meta.len() > MAX_TEXT_FILE {
        return None;
    }
    let mut bytes = Vec::new();
    if let Err(err) = fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)) {
        log::warn!("skipping {}: {err}", path.display());
        return None;
    }
    if bytes[..bytes.len().min(SNIFF_LEN)].contains(&0) {
        return None;
    }
    Some(String::from_utf8_lossy(&bytes).into_owned())
}

fn is_build_script(path: &Path) -> bool {
    let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
        return false;
    };
    name.starts_with("Makefile")
        || name.starts_with("makefile")
        || name == "GNUmakefile"
        || name == "CMakeLists.txt"
        || [".mk", ".sh", ".cmake"]
            .iter()
            .any(|ext| name.ends_with(ext))
}

fn is_js_like(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| {
        matches!(
            e.to_ascii_lowercase().as_str(),
            "js" | "mjs" | "ts" | "html"
        )
    })
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Whether `token` occurs in `line` delimited by non-word bytes.
fn contains_word(line: &str, token: &str) -> bool {
    let bytes = line.as_bytes();
    line.match_indices(token).any(|(at, _)| {
        let before = at == 0 || !is_word_byte(bytes[at - 1]);
        let end = at + token.len();
        // `em+` ends in a non-word byte, so check the byte after explicitly
        let after = end >= bytes.len() || !(is_word_byte(bytes[end]) || bytes[end] == b'+');
        before && after
    })
}

/// Compiler tokens found on one build-script line.
pub fn build_tokens(line: &str) -> Vec<&'static str> {
    let mut out = Vec::new();
    for tok in ["emcc", "em++"] {
        if contains_word(line, tok) {
            out.push(tok);
        }
    }
    for tok in ["-target cheerp-wasm", "--target=wasm32"] {
        if line.contains(tok) {
            out.push(tok);
        }
    }
    out
}

const WASM_API: &[&str] = &[
    "instantiate",
    "instantiateStreaming",
    "compile",
    "compileStreaming",
    "Module",
    "Instance",
];

/// `WebAssembly.<api>` calls on one line, as matched text.
pub fn js_api_uses(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    for (at, m) in line.match_indices("WebAssembly.") {
        let rest = &line[at + m.len()..];
        let ident: String = rest
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_' || *c == '$')
            .collect();
        if WASM_API.contains(&ident.as_str()) {
            out.push(format!("WebAssembly.{ident}"));
        }
    }
    out
}

fn scan_lines(
    root: &Path,
    filter: fn(&Path) -> bool,
    matcher: impl Fn(&str) -> Vec<String>,
) -> Vec<Hit> {
    let mut hits = Vec::new();
    for path in walk_files(root).into_iter().filter(|p| filter(p)) {
        let Some(text) = read_text(&path) else {
            continue;
        };
        let file = relative_path(root, &path);
        for (i, line) in text.lines().enumerate() {
            for m in matcher(line) {
                hits.push(Hit {
                    file: file.clone(),
                    line: i as u32 + 1,
                    text: m,
                });
            }
        }
    }
    hits.sort();
    hits
}

pub fn scan_build_scripts(root: &Path) -> Vec<Hit> {
    scan_lines(root, is_build_script, |line| {
        build_tokens(line).into_iter().map(String::from).collect()
    })
}

pub fn scan_js(root: &Path) -> Vec<Hit> {
    scan_lines(root, is_js_like, js_api_uses)
}

pub fn scan_sources(root: &Path) -> Vec<Hit> {
    let mut hits = Vec::new();
    for path in walk_files(root).into_iter().filter(|p| is_source_path(p)) {
        let Some(text) = read_text(&path) else {
            continue;
        };
        let pp = preprocess_lite(text.as_bytes());
        for inc in pp.includes {
            let last = inc.target.rsplit(['/', '\\']).next().unwrap_or("");
            if last == "emscripten.h" || last == "html5.h" {
                hits.push(Hit {
                    file: relative_path(root, &path),
                    line: inc.line,
                    text: inc.target,
                });
            }
        }
    }
    hits.sort();
    hits
}

pub fn classify_repo(root: &Path) -> Result<RepoEvidence, DetectError> {
    if !root.is_dir() {
        return Err(DetectError::MissingRoot(root.to_path_buf()));
    }
    let h1 = scan_build_scripts(root);
    let h2 = scan_sources(root);
    let h3 = scan_js(root);
    let verdict = if h1.is_empty() && h2.is_empty() && h3.is_empty() {
        Verdict::NotTargeting
    } else {
        Verdict::Targeting
    };
    Ok(RepoEvidence {
        h1,
        h2,
        h3,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_tokens_word_boundaries() {
        assert_eq!(build_tokens("\temcc -O2 main.c -o main.js"), vec!["emcc"]);
        assert_eq!(build_tokens("CXX=em++ $(FLAGS)"), vec!["em++"]);
        assert_eq!(
            build_tokens("clang --target=wasm32 -c x.c"),
            vec!["--target=wasm32"]
        );
        assert_eq!(
            build_tokens("clang++ -target cheerp-wasm a.cpp"),
            vec!["-target cheerp-wasm"]
        );
        assert!(build_tokens("gcc -O2 main.c").is_empty());
        assert!(build_tokens("run myemcc_wrapper").is_empty());
        assert!(build_tokens("emccx").is_empty());
        assert_eq!(build_tokens("/opt/emsdk/emcc.py"), vec!["emcc"]);
        assert!(build_tokens("em+++").is_empty());
    }

    #[test]
    fn js_api_matching() {
        assert_eq!(
            js_api_uses("const m = await WebAssembly.instantiate(buf);"),
            vec!["WebAssembly.instantiate"]
        );
        assert_eq!(
            js_api_uses("new WebAssembly.Instance(mod)"),
            vec!["WebAssembly.Instance"]
        );
        assert_eq!(
            js_api_uses("WebAssembly.instantiateStreaming(fetch(u))"),
            vec!["WebAssembly.instantiateStreaming"]
        );
        assert!(js_api_uses("WebAssembly is a binary format").is_empty());
        assert!(js_api_uses("WebAssembly.validate(b)").is_empty());
    }

    #[test]
    fn build_script_names() {
        for n in [
            "Makefile",
            "Makefile.am",
            "makefile",
            "CMakeLists.txt",
            "rules.mk",
            "build.sh",
            "x.cmake",
        ] {
            assert!(is_build_script(Path::new(n)), "{n}");
        }
        assert!(!is_build_script(Path::new("README.md")));
    }
}
