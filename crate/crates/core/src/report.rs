//! Findings, per-project reports, corpus statistics and their canonical
//! JSON and text renderings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::checkers::CHECKERS;
use crate::detector::RepoEvidence;
use crate::engine::BudgetReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub checker: String,
    pub cwe: Option<u32>,
    /// Project-relative, `/`-separated.
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_note: Option<String>,
}

impl Finding {
    fn sort_key(&self) -> (&str, u32, u32, &str, &str) {
        (
            &self.file,
            self.line,
            self.column,
            &self.checker,
            &self.message,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectReport {
    pub schema_version: u32,
    pub project: String,
    pub files_analyzed: usize,
    pub files_skipped: usize,
    pub findings: Vec<Finding>,
    /// Occurrences per checker id; every built-in id is present.
    pub stats: BTreeMap<String, usize>,
    pub budget: BudgetReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wasm_target: Option<RepoEvidence>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("schema version {found} does not match {expected}")]
    SchemaMismatch { expected: u32, found: u32 },
    #[error("duplicate project id '{0}'")]
    DuplicateProject(String),
}

impl ProjectReport {
    pub fn new(project: impl Into<String>) -> Self {
        let mut r = ProjectReport {
            schema_version: SCHEMA_VERSION,
            project: project.into(),
            files_analyzed: 0,
            files_skipped: 0,
            findings: vec![],
            stats: BTreeMap::new(),
            budget: BudgetReport::default(),
            wasm_target: None,
        };
        r.normalize();
        r
    }

    /// Deduplicate and sort findings, then recompute stats.
    pub fn normalize(&mut self) {
        self.findings
            .sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut seen = BTreeSet::new();
        self.findings.retain(|f| {
            seen.insert((
                f.checker.clone(),
                f.file.clone(),
                f.line,
                f.column,
                f.message.clone(),
            ))
        });
        self.stats = CHECKERS.iter().map(|d| (d.id.to_string(), 0)).collect();
        for f in &self.findings {
            *self.stats.entry(f.checker.clone()).or_insert(0) += 1;
        }
    }

    pub fn has_findings(&self) -> bool {
        !self.findings.is_empty()
    }
}

/// Combine partial reports (for example one per file) into one report for
/// `project`. Order of `parts` does not affect the result.
pub fn merge_findings(
    project: &str,
    parts: &[ProjectReport],
) -> Result<ProjectReport, ReportError> {
    let mut out = ProjectReport::new(project);
    for p in parts {
        if p.schema_version != SCHEMA_VERSION {
            return Err(ReportError::SchemaMismatch {
                expected: SCHEMA_VERSION,
                found: p.schema_version,
            });
        }
        out.files_analyzed += p.files_analyzed;
        out.files_skipped += p.files_skipped;
        out.budget.merge(&p.budget);
        out.findings.extend(p.findings.iter().cloned());
        if out.wasm_target.is_none() {
            out.wasm_target = p.wasm_target.clone();
        }
    }
    out.normalize();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckerStats {
    pub occurences: usize,
    pub repositories_affected: usize,
    pub fraction_affected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub schema_version: u32,
    pub projects: usize,
    pub checkers: BTreeMap<String, CheckerStats>,
    pub total_occurences: usize,
    pub projects_with_any_smell: usize,
    pub fraction_with_any_smell: f64,
}

fn fraction(n: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        n as f64 / total as f64
    }
}

pub fn compute_corpus_stats(reports: &[ProjectReport]) -> Result<CorpusStats, ReportError> {
    let mut ids = BTreeSet::new();
    for r in reports {
        if r.schema_version != SCHEMA_VERSION {
            return Err(ReportError::SchemaMismatch {
                expected: SCHEMA_VERSION,
                found: r.schema_version,
            });
        }
        if !ids.insert(r.project.as_str()) {
            return Err(ReportError::DuplicateProject(r.project.clone()));
        }
    }
    let mut occ: BTreeMap<String, (usize, usize)> = CHECKERS
        .iter()
        .map(|d| (d.id.to_string(), (0, 0)))
        .collect();
    let mut any = 0;
    for r in reports {
        let mut affected = false;
        for (id, n) in &r.stats {
            let e = occ.entry(id.clone()).or_insert((0, 0));
            e.0 += n;
            if *n > 0 {
                e.1 += 1;
                affected = true;
            }
        }
        any += affected as usize;
    }
    let total = reports.len();
    Ok(CorpusStats {
        schema_version: SCHEMA_VERSION,
        projects: total,
        total_occurences: occ.values().map(|v| v.0).sum(),
        checkers: occ
            .into_iter()
            .map(|(id, (o, a))| {
                (
                    id,
                    CheckerStats {
                        occurences: o,
                        repositories_affected: a,
                        fraction_affected: fraction(a, total),
                    },
                )
            })
            .collect(),
        projects_with_any_smell: any,
        fraction_with_any_smell: fraction(any, total),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// Canonical JSON: object keys sorted, two-space indent, trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("json value serializes");
    s.push('\n');
    s
}

pub fn render_report(report: &ProjectReport, format: Format) -> String {
    match format {
        Format::Json => to_canonical_json(report),
        Format::Text => report
            .findings
            .iter()
            .map(|f| {
                format!(
                    "{}:{}:{}: [{}] {}\n",
                    f.file, f.line, f.column, f.checker, f.message
                )
            })
            .collect(),
    }
}

pub fn render_stats(stats: &CorpusStats, format: Format) -> String {
    match format {
        Format::Json => to_canonical_json(stats),
        Format::Text => {
            let width = stats
                .checkers
                .keys()
                .map(|k| k.len())
                .max()
                .unwrap_or(7)
                .max(7);
            let mut s = format!(
                "{:<width$}  {:>10}  {:>21}\n",
                "checker", "occurences", "repositories_affected"
            );
            for (id, c) in &stats.checkers {
                s += &format!(
                    "{id:<width$}  {:>10}  {:>21}\n",
                    c.occurences, c.repositories_affected
                );
            }
            s += &format!(
                "projects: {}, with any smell: {} ({:.1}%)\n",
                stats.projects,
                stats.projects_with_any_smell,
                100.0 * stats.fraction_with_any_smell
            );
            s
        }
    }
}

pub fn parse_report(text: &str) -> Result<ProjectReport, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn finding(checker: &str, file: &str, line: u32) -> Finding {
        Finding {
            checker: checker.into(),
            cwe: crate::checkers::lookup(checker).and_then(|d| d.cwe),
            file: file.into(),
            line,
            column: 1,
            message: format!("{checker} at {line}"),
            path_note: None,
        }
    }

    fn part(findings: Vec<Finding>) -> ProjectReport {
        let mut r = ProjectReport::new("p");
        r.files_analyzed = 1;
        r.findings = findings;
        r.normalize();
        r
    }

    fn project(id: &str, findings: Vec<Finding>) -> ProjectReport {
        let mut r = part(findings);
        r.project = id.into();
        r
    }

    #[test]
    fn merge_sorts_and_dedups() {
        let f1 = finding("access-env", "b.c", 3);
        let f2 = finding("double-free", "a.c", 9);
        let r = merge_findings("p", &[part(vec![f1.clone()]), part(vec![f2.clone()])]).unwrap();
        assert_eq!(r.findings, vec![f2.clone(), f1.clone()]);
        assert_eq!(r.files_analyzed, 2);
        let r = merge_findings("p", &[part(vec![f1.clone()]), part(vec![f1.clone()])]).unwrap();
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.stats["access-env"], 1);
    }

    #[test]
    fn empty_merge_has_zero_stats() {
        let r = merge_findings("p", &[]).unwrap();
        assert!(r.findings.is_empty());
        assert_eq!(r.stats.len(), 13);
        assert!(r.stats.values().all(|v| *v == 0));
    }

    #[test]
    fn schema_mismatch_is_error() {
        let mut bad = part(vec![]);
        bad.schema_version = 2;
        assert!(matches!(
            merge_findings("p", &[bad]),
            Err(ReportError::SchemaMismatch { found: 2, .. })
        ));
    }

    #[test]
    fn corpus_stats_hand_count() {
        let p1 = project(
            "P1",
            vec![
                finding("access-env", "a.c", 1),
                finding("access-env", "a.c", 2),
                finding("error-without-action", "a.c", 3),
            ],
        );
        let p2 = project("P2", vec![finding("error-without-action", "b.c", 1)]);
        let s = compute_corpus_stats(&[p1.clone(), p2]).unwrap();
        let ae = &s.checkers["access-env"];
        assert_eq!((ae.occurences, ae.repositories_affected), (2, 1));
        let ewa = &s.checkers["error-without-action"];
        assert_eq!((ewa.occurences, ewa.repositories_affected), (2, 2));
        assert_eq!(s.projects_with_any_smell, 2);
        assert_eq!(s.total_occurences, 4);
        assert!(matches!(
            compute_corpus_stats(&[p1.clone(), p1]),
            Err(ReportError::DuplicateProject(_))
        ));
        let empty = compute_corpus_stats(&[]).unwrap();
        assert_eq!(empty.projects_with_any_smell, 0);
        assert!(empty.checkers.values().all(|c| c.occurences == 0));
    }

    #[test]
    fn stats_json_uses_table_column_names() {
        let s = compute_corpus_stats(&[]).unwrap();
        let json = render_stats(&s, Format::Json);
        assert!(json.contains("\"occurences\""));
        assert!(json.contains("\"repositories_affected\""));
    }

    #[test]
    fn canonical_json_fixed_point() {
        let mut r = part(vec![finding("access-env", "src/a.c", 3)]);
        r.findings[0].path_note = Some("branches: line 2 true".into());
        let once = render_report(&r, Format::Json);
        let again = render_report(&parse_report(&once).unwrap(), Format::Json);
        assert_eq!(once, again);
        assert!(once.ends_with("}\n"));
        assert!(!once.contains('\r'));
        // keys sorted
        let budget = once.find("\"budget\"").unwrap();
        let findings = once.find("\"findings\"").unwrap();
        assert!(budget < findings);
    }

    #[test]
    fn text_format_line() {
        let mut f = finding("access-env", "src/a.c", 3);
        f.column = 14;
        f.message = "call to getenv reads the execution environment".into();
        let r = part(vec![f]);
        assert_eq!(
            render_report(&r, Format::Text),
            "src/a.c:3:14: [access-env] call to getenv reads the execution environment\n"
        );
    }
}
