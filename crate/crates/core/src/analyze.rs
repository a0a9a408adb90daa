//! Project-level driver: collect sources, analyze each file, merge.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::checkers::{check_function, lookup, CheckerSet};
use crate::detector::{classify_repo, read_text, relative_path, walk_files};
use crate::engine::{Budget, Checker};
use crate::flow::resolve_with_globals;
use crate::frontend::{is_source_path, SourceUnit};
use crate::report::{merge_findings, Finding, ProjectReport, ReportError};

#[derive(Clone, Default)]
pub struct AnalysisConfig {
    pub checkers: CheckerSet,
    pub budget: Budget,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    /// Checkers registered in addition to `checkers`.
    pub extra: Vec<Arc<dyn Checker>>,
    /// Attach the WebAssembly-target evidence for directory inputs.
    pub detect_target: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("{0}: no such file or directory")]
    MissingPath(PathBuf),
    #[error("{0}")]
    Report(#[from] ReportError),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Source files under `path` as (absolute path, project-relative name),
/// sorted. A file argument yields itself named by its file name.
pub fn collect_sources(path: &Path) -> Result<Vec<(PathBuf, String)>, AnalyzeError> {
    if path.is_file() {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        return Ok(vec![(path.to_path_buf(), name)]);
    }
    if !path.is_dir() {
        return Err(AnalyzeError::MissingPath(path.to_path_buf()));
    }
    Ok(walk_files(path)
        .into_iter()
        .filter(|p| is_source_path(p))
        .map(|p| {
            let rel = relative_path(path, &p);
            (p, rel)
        })
        .collect())
}

/// Analyze one file's text into a single-file partial report.
pub fn analyze_source(text: &[u8], file: &str, config: &AnalysisConfig) -> ProjectReport {
    let su = SourceUnit::parse(text);
    let mut part = ProjectReport::new("");
    part.files_analyzed = 1;
    for func in su.functions() {
        let table = resolve_with_globals(&su.unit, func);
        let result = check_function(func, &table, &config.checkers, &config.extra, config.budget);
        part.budget.merge(&result.report);
        part.findings
            .extend(result.findings.into_iter().map(|f| Finding {
                cwe: lookup(&f.checker).and_then(|d| d.cwe),
                checker: f.checker,
                file: file.to_string(),
                line: f.span.line,
                column: f.span.column,
                message: f.message,
                path_note: f.path_note,
            }));
    }
    part.normalize();
    part
}

fn analyze_file(path: &Path, rel: &str, config: &AnalysisConfig) -> ProjectReport {
    match read_text(path) {
        Some(text) => analyze_source(text.as_bytes(), rel, config),
        None => {
            log::warn!("skipping {rel}: unreadable or not text");
            let mut part = ProjectReport::new("");
            part.files_skipped = 1;
            part
        }
    }
}

/// Default project id: the directory or file name of `path`.
pub fn project_id(path: &Path) -> String {
    let canonical = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
    canonical
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| ".".into())
}

pub fn analyze_path(
    path: &Path,
    project: &str,
    config: &AnalysisConfig,
) -> Result<ProjectReport, AnalyzeError> {
    let files = collect_sources(path)?;
    log::info!("{project}: {} source files", files.len());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| AnalyzeError::Pool(e.to_string()))?;
    let parts: Vec<ProjectReport> = pool.install(|| {
        files
            .par_iter()
            .map(|(p, rel)| analyze_file(p, rel, config))
            .collect()
    });
    let mut report = merge_findings(project, &parts)?;
    if config.detect_target && path.is_dir() {
        report.wasm_target = classify_repo(path).ok();
    }
    Ok(report)
}
