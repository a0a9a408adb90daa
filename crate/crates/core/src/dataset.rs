//! Collection of WebAssembly binaries into a content-addressed directory,
//! `.wat` conversion, and Emscripten build orchestration.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detector::{relative_path, walk_files};
use crate::report::to_canonical_json;

pub const INDEX_SCHEMA_VERSION: u32 = 1;
pub const INDEX_FILE: &str = "index.json";
pub const LOCK_FILE: &str = ".lock";
pub const DEFAULT_WAT2WASM: &str = "wat2wasm --enable-all {in} -o {out}";
pub const DEFAULT_CMAKE_WRAPPER: &str = "emcmake cmake .";
pub const DEFAULT_MAKE_WRAPPER: &str = "emmake make";
pub const DEFAULT_BUILD_TIMEOUT: Duration = Duration::from_secs(600);
const OUTPUT_LIMIT: usize = 64 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}: stored file does not match its content hash")]
    Integrity(PathBuf),
    #[error("{0} is locked by another writer")]
    Locked(PathBuf),
    #[error("{path}: malformed index: {message}")]
    BadIndex { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryKind {
    Wasm,
    Wat,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BinaryFile {
    /// Root-relative, `/`-separated.
    pub rel: String,
    pub path: PathBuf,
    pub kind: BinaryKind,
}

/// `.wasm` and `.wat` files under `root` (extension case-insensitive),
/// sorted by relative path.
pub fn scan_binaries(root: &Path) -> Vec<BinaryFile> {
    let mut out: Vec<BinaryFile> = walk_files(root)
        .into_iter()
        .filter_map(|path| {
            let ext = path.extension()?.to_str()?.to_ascii_lowercase();
            let kind = match ext.as_str() {
                "wasm" => BinaryKind::Wasm,
                "wat" => BinaryKind::Wat,
                _ => return None,
            };
            Some(BinaryFile {
                rel: relative_path(root, &path),
                path,
                kind,
            })
        })
        .collect();
    out.sort();
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Origin {
    pub repo: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub hash: String,
    pub origins: Vec<Origin>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Unconverted {
    pub repo: String,
    pub path: String,
    pub stderr: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatSummary {
    /// `.wat` origins whose conversion was stored.
    pub converted: usize,
    pub unconverted: Vec<Unconverted>,
    /// `.wat` files seen while no converter was available.
    #[serde(default)]
    pub skipped: Vec<Origin>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryIndex {
    pub schema_version: u32,
    pub entries: Vec<IndexEntry>,
    pub wat: WatSummary,
}

impl Default for BinaryIndex {
    fn default() -> Self {
        BinaryIndex {
            schema_version: INDEX_SCHEMA_VERSION,
            entries: vec![],
            wat: WatSummary::default(),
        }
    }
}

impl BinaryIndex {
    pub fn load(dest: &Path) -> Result<BinaryIndex, DatasetError> {
        let path = dest.join(INDEX_FILE);
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| DatasetError::BadIndex {
                path,
                message: e.to_string(),
            }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(BinaryIndex::default()),
            Err(e) => Err(DatasetError::Io { path, source: e }),
        }
    }

    pub fn origin_count(&self) -> usize {
        self.entries.iter().map(|e| e.origins.len()).sum()
    }

    fn add(&mut self, hash: &str, origin: Origin) {
        match self.entries.binary_search_by(|e| e.hash.as_str().cmp(hash)) {
            Ok(i) => {
                let o = &mut self.entries[i].origins;
                if let Err(j) = o.binary_search(&origin) {
                    o.insert(j, origin);
                }
            }
            Err(i) => self.entries.insert(
                i,
                IndexEntry {
                    hash: hash.to_string(),
                    origins: vec![origin],
                },
            ),
        }
    }

    fn recount(&mut self) {
        self.wat.converted = self
            .entries
            .iter()
            .flat_map(|e| &e.origins)
            .filter(|o| o.path.to_ascii_lowercase().ends_with(".wat"))
            .count();
        self.wat.unconverted.sort();
        self.wat.unconverted.dedup();
        self.wat.skipped.sort();
        self.wat.skipped.dedup();
    }

    fn save(&mut self, dest: &Path) -> Result<(), DatasetError> {
        self.recount();
        let path = dest.join(INDEX_FILE);
        let tmp = dest.join(".index.json.tmp");
        fs::write(&tmp, to_canonical_json(self)).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))
    }
}

/// Exclusive writer access to a dataset directory; released on drop.
pub struct DatasetLock {
    path: PathBuf,
}

impl DatasetLock {
    pub fn acquire(dest: &Path) -> Result<DatasetLock, DatasetError> {
        fs::create_dir_all(dest).map_err(io_err(dest))?;
        let path = dest.join(LOCK_FILE);
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(_) => Ok(DatasetLock { path }),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                Err(DatasetError::Locked(dest.to_path_buf()))
            }
            Err(e) => Err(DatasetError::Io { path, source: e }),
        }
    }
}

impl Drop for DatasetLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StoreDelta {
    /// Hashes newly written to the directory.
    pub stored: Vec<String>,
    /// Origins added to the index (new or already known hashes).
    pub origins_added: usize,
}

/// Store `files` (paths with their repo-relative names) under
/// `<sha256>.wasm` in `dest` and record their origins in `index`.
/// The caller holds the [`DatasetLock`].
pub fn store_into(
    index: &mut BinaryIndex,
    files: &[(PathBuf, String)],
    dest: &Path,
    repo: &str,
) -> Result<StoreDelta, DatasetError> {
    let mut delta = StoreDelta::default();
    for (path, rel) in files {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let hash = sha256_hex(&bytes);
        let target = dest.join(format!("{hash}.wasm"));
        match fs::read(&target) {
            Ok(existing) => {
                if existing != bytes {
                    return Err(DatasetError::Integrity(target));
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                let tmp = dest.join(format!(".{hash}.tmp"));
                fs::write(&tmp, &bytes).map_err(io_err(&tmp))?;
                fs::rename(&tmp, &target).map_err(io_err(&target))?;
                delta.stored.push(hash.clone());
            }
            Err(e) => {
                return Err(DatasetError::Io {
                    path: target,
                    source: e,
                })
            }
        }
        let before = index.origin_count();
        index.add(
            &hash,
            Origin {
                repo: repo.to_string(),
                path: rel.clone(),
            },
        );
        delta.origins_added += index.origin_count() - before;
    }
    Ok(delta)
}

/// Lock `dest`, store `files`, and rewrite the index.
pub fn store_dedup(
    files: &[(PathBuf, String)],
    dest: &Path,
    repo: &str,
) -> Result<StoreDelta, DatasetError> {
    let _lock = DatasetLock::acquire(dest)?;
    let mut index = BinaryIndex::load(dest)?;
    let delta = store_into(&mut index, files, dest, repo)?;
    index.save(dest)?;
    Ok(delta)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WatOutcome {
    /// (source `.wat` relative path, converted output path)
    pub converted: Vec<(String, PathBuf)>,
    /// (relative path, converter stderr)
    pub unconverted: Vec<(String, String)>,
    pub skipped: Vec<String>,
}

fn split_template(template: &str, input: &Path, output: &Path) -> Vec<String> {
    template
        .split_whitespace()
        .map(|arg| {
            arg.replace("{in}", &input.to_string_lossy())
                .replace("{out}", &output.to_string_lossy())
        })
        .collect()
}

/// Convert `.wat` files with the command `template` (`{in}`/`{out}`
/// placeholders) writing outputs into `work`. `None` or a missing program
/// marks every file as skipped.
pub fn convert_wat(
    files: &[BinaryFile],
    template: Option<&str>,
    work: &Path,
) -> Result<WatOutcome, DatasetError> {
    let mut out = WatOutcome::default();
    let wats: Vec<&BinaryFile> = files.iter().filter(|f| f.kind == BinaryKind::Wat).collect();
    let Some(template) = template.filter(|t| !t.trim().is_empty()) else {
        out.skipped = wats.iter().map(|f| f.rel.clone()).collect();
        return Ok(out);
    };
    if wats.is_empty() {
        return Ok(out);
    }
    fs::create_dir_all(work).map_err(io_err(work))?;
    for (i, f) in wats.iter().enumerate() {
        let output = work.join(format!("{i}.wasm"));
        let argv = split_template(template, &f.path, &output);
        let result = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::null())
            .output();
        match result {
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                log::warn!("converter '{}' not found; skipping .wat files", argv[0]);
                out.converted.clear();
                out.unconverted.clear();
                out.skipped = wats.iter().map(|f| f.rel.clone()).collect();
                return Ok(out);
            }
            Err(e) => out.unconverted.push((f.rel.clone(), e.to_string())),
            Ok(o) if o.status.success() && output.is_file() => {
                out.converted.push((f.rel.clone(), output))
            }
            Ok(o) => {
                let mut stderr = String::from_utf8_lossy(&o.stderr).into_owned();
                if stderr.is_empty() {
                    stderr = format!("converter exited with {}", o.status);
                }
                out.unconverted.push((f.rel.clone(), stderr));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollectSummary {
    pub repo: String,
    pub wasm_files: usize,
    pub wat_files: usize,
    pub stored: Vec<String>,
    pub origins_added: usize,
    pub wat_converted: usize,
    pub wat_unconverted: usize,
    pub wat_skipped: usize,
    pub index_entries: usize,
    pub index_origins: usize,
}

/// Scan `root`, convert its `.wat` files, and store all binaries in `dest`.
pub fn collect(
    root: &Path,
    dest: &Path,
    repo: &str,
    converter: Option<&str>,
) -> Result<CollectSummary, DatasetError> {
    if !root.is_dir() {
        return Err(DatasetError::Io {
            path: root.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotFound, "no such directory"),
        });
    }
    let files = scan_binaries(root);
    log::info!("{repo}: {} binaries found", files.len());
    let _lock = DatasetLock::acquire(dest)?;
    let mut index = BinaryIndex::load(dest)?;

    let wasm: Vec<(PathBuf, String)> = files
        .iter()
        .filter(|f| f.kind == BinaryKind::Wasm)
        .map(|f| (f.path.clone(), f.rel.clone()))
        .collect();
    let mut delta = store_into(&mut index, &wasm, dest, repo)?;

    let work = dest.join(".wat-work");
    let wat = convert_wat(&files, converter, &work)?;
    let converted: Vec<(PathBuf, String)> = wat
        .converted
        .iter()
        .map(|(rel, p)| (p.clone(), rel.clone()))
        .collect();
    let wat_delta = store_into(&mut index, &converted, dest, repo);
    let _ = fs::remove_dir_all(&work);
    let wat_delta = wat_delta?;
    delta.stored.extend(wat_delta.stored);
    delta.origins_added += wat_delta.origins_added;
    for (path, stderr) in &wat.unconverted {
        index
            .wat
            .unconverted
            .retain(|u| !(u.repo == repo && &u.path == path));
        index.wat.unconverted.push(Unconverted {
            repo: repo.to_string(),
            path: path.clone(),
            stderr: stderr.clone(),
        });
    }
    for path in &wat.skipped {
        index.wat.skipped.push(Origin {
            repo: repo.to_string(),
            path: path.clone(),
        });
    }
    index.save(dest)?;
    delta.stored.sort();
    Ok(CollectSummary {
        repo: repo.to_string(),
        wasm_files: wasm.len(),
        wat_files: files.len() - wasm.len(),
        stored: delta.stored,
        origins_added: delta.origins_added,
        wat_converted: wat.converted.len(),
        wat_unconverted: wat.unconverted.len(),
        wat_skipped: wat.skipped.len(),
        index_entries: index.entries.len(),
        index_origins: index.origin_count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuildStatus {
    Ok,
    Failed,
    Timeout,
    ToolchainUnavailable,
    NoBuildSystem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuildStep {
    /// Directory relative to the repository root (`.` for the root).
    pub dir: String,
    pub command: String,
    pub status: BuildStatus,
    pub exit_code: Option<i32>,
    pub duration_ms: u64,
    /// Combined stdout and stderr, truncated to the last 64 KiB.
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuildLog {
    pub status: BuildStatus,
    pub steps: Vec<BuildStep>,
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub cmake_wrapper: String,
    pub make_wrapper: String,
    pub timeout: Duration,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            cmake_wrapper: DEFAULT_CMAKE_WRAPPER.into(),
            make_wrapper: DEFAULT_MAKE_WRAPPER.into(),
            timeout: DEFAULT_BUILD_TIMEOUT,
        }
    }
}

fn truncate_tail(mut bytes: Vec<u8>) -> String {
    if bytes.len() > OUTPUT_LIMIT {
        bytes.drain(..bytes.len() - OUTPUT_LIMIT);
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

/// Run `command` in `dir` with a timeout.
pub fn run_step(dir: &Path, rel: &str, command: &str, timeout: Duration) -> BuildStep {
    log::info!("{rel}: running {command}");
    let start = Instant::now();
    let argv: Vec<&str> = command.split_whitespace().collect();
    let step = |status, exit_code, output: String| BuildStep {
        dir: rel.to_string(),
        command: command.to_string(),
        status,
        exit_code,
        duration_ms: start.elapsed().as_millis() as u64,
        output,
    };
    if argv.is_empty() {
        return step(
            BuildStatus::ToolchainUnavailable,
            None,
            "empty command".into(),
        );
    }
    let child = Command::new(argv[0])
        .args(&argv[1..])
        .current_dir(dir)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return step(
                BuildStatus::ToolchainUnavailable,
                None,
                format!("{}: not found", argv[0]),
            )
        }
        Err(e) => return step(BuildStatus::Failed, None, e.to_string()),
    };
    let readers: Vec<_> = [
        child
            .stdout
            .take()
            .map(|s| Box::new(s) as Box<dyn Read + Send>),
        child
            .stderr
            .take()
            .map(|s| Box::new(s) as Box<dyn Read + Send>),
    ]
    .into_iter()
    .flatten()
    .map(|mut r| {
        std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = r.read_to_end(&mut buf);
            buf
        })
    })
    .collect();
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(20)),
            Err(_) => break None,
        }
    };
    let mut output = Vec::new();
    for r in readers {
        output.extend(r.join().unwrap_or_default());
    }
    let output = truncate_tail(output);
    match status {
        None => step(BuildStatus::Timeout, None, output),
        Some(s) if s.success() => step(BuildStatus::Ok, s.code(), output),
        Some(s) => step(BuildStatus::Failed, s.code(), output),
    }
}

/// Top-most directories containing any of `names`, not nested under a
/// directory already selected.
fn build_dirs(root: &Path, names: &[&str], exclude: &[PathBuf]) -> Vec<PathBuf> {
    let mut dirs: BTreeSet<PathBuf> = BTreeSet::new();
    for f in walk_files(root) {
        let name = f.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if names.contains(&name) {
            if let Some(d) = f.parent() {
                dirs.insert(d.to_path_buf());
            }
        }
    }
    let mut out: Vec<PathBuf> = Vec::new();
    for d in dirs {
        let nested = out.iter().chain(exclude).any(|p| d.starts_with(p));
        if !nested {
            out.push(d);
        }
    }
    out
}

/// Run the cmake wrapper then the make wrapper in each CMake project
/// directory, and the make wrapper alone in each standalone Makefile
/// directory. Tool failures are recorded, never raised.
pub fn orchestrate_build(root: &Path, config: &BuildConfig) -> BuildLog {
    let cmake_dirs = build_dirs(root, &["CMakeLists.txt"], &[]);
    let make_dirs = build_dirs(root, &["Makefile", "makefile", "GNUmakefile"], &cmake_dirs);
    let mut plan: BTreeMap<PathBuf, bool> = BTreeMap::new();
    for d in &cmake_dirs {
        plan.insert(d.clone(), true);
    }
    for d in &make_dirs {
        plan.insert(d.clone(), false);
    }
    if plan.is_empty() {
        return BuildLog {
            status: BuildStatus::NoBuildSystem,
            steps: vec![],
        };
    }
    let mut steps = Vec::new();
    for (dir, is_cmake) in plan {
        let rel = match relative_path(root, &dir) {
            s if s.is_empty() => ".".to_string(),
            s => s,
        };
        if is_cmake {
            let s = run_step(&dir, &rel, &config.cmake_wrapper, config.timeout);
            let proceed = s.status == BuildStatus::Ok;
            steps.push(s);
            if !proceed {
                continue;
            }
        }
        steps.push(run_step(&dir, &rel, &config.make_wrapper, config.timeout));
    }
    let status = if steps.iter().all(|s| s.status == BuildStatus::Ok) {
        BuildStatus::Ok
    } else if steps
        .iter()
        .all(|s| s.status == BuildStatus::ToolchainUnavailable)
    {
        BuildStatus::ToolchainUnavailable
    } else if steps.iter().any(|s| s.status == BuildStatus::Timeout) {
        BuildStatus::Timeout
    } else {
        BuildStatus::Failed
    };
    BuildLog { status, steps }
}
