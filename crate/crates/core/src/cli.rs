//! The `wasmsmell` command line.
//!
//! Exit codes: 0 success (no findings, relevant, targeting), 1 findings or
//! a negative verdict, 2 usage or I/O error, 3 dataset integrity error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::analyze::{analyze_path, project_id, AnalysisConfig};
use crate::checkers::{lookup, CheckerSet};
use crate::dataset::{self, BuildConfig, DatasetError};
use crate::detector::{classify_repo, RepoEvidence};
use crate::engine::Budget;
use crate::relevance::{is_relevant, RankParams, Relevance, DEFAULT_KEYWORDS};
use crate::report::{
    compute_corpus_stats, parse_report, render_report, render_stats, to_canonical_json, Format,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTEGRITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "wasmsmell",
    version,
    about = "Detect WebAssembly compilation smells in C/C++ projects"
)]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a C/C++ file or source tree and report smells.
    Analyze(AnalyzeArgs),
    /// Decide whether a repository targets WebAssembly.
    DetectWasm(DetectArgs),
    /// Rank README keywords and test WebAssembly relevance.
    RankReadme(RankArgs),
    /// Collect .wasm/.wat binaries into a deduplicated directory.
    Collect(CollectArgs),
    /// Run the Emscripten cmake/make wrappers over a repository.
    Build(BuildArgs),
    /// Summarize per-project reports into corpus statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn checker_id(s: &str) -> Result<String, String> {
    match lookup(s) {
        Some(d) => Ok(d.id.to_string()),
        None => Err(format!("unknown checker id '{s}'")),
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Source file or directory.
    pub path: PathBuf,
    /// Run only these checkers (comma-separated ids).
    #[arg(long, value_delimiter = ',', value_parser = checker_id, value_name = "IDS")]
    pub checkers: Option<Vec<String>>,
    /// Disable these checkers (comma-separated ids).
    #[arg(long, value_delimiter = ',', value_parser = checker_id, value_name = "IDS")]
    pub no_checkers: Vec<String>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Path budget per function.
    #[arg(long, default_value_t = Budget::default().max_paths)]
    pub max_paths: usize,
    /// Times each loop back-edge may be taken on one path.
    #[arg(long, default_value_t = Budget::default().unroll)]
    pub unroll: u32,
    /// Project id recorded in the report (default: directory name).
    #[arg(long)]
    pub project: Option<String>,
    /// Also record WebAssembly-target evidence in the report.
    #[arg(long)]
    pub detect_target: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Repository root.
    pub path: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// README file.
    pub path: PathBuf,
    /// Relevance keywords (comma-separated).
    #[arg(long, value_delimiter = ',', value_name = "WORDS")]
    pub keywords: Option<Vec<String>>,
    /// Number of top-ranked words a keyword must appear among.
    #[arg(long, default_value_t = 15)]
    pub top_k: usize,
    /// Co-occurrence window in tokens.
    #[arg(long, default_value_t = RankParams::default().window)]
    pub window: usize,
    /// PageRank damping factor.
    #[arg(long, default_value_t = RankParams::default().damping)]
    pub damping: f64,
    /// Convergence threshold on the L1 change per iteration.
    #[arg(long, default_value_t = RankParams::default().eps)]
    pub eps: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = RankParams::default().max_iter)]
    pub max_iter: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// Repository or directory to scan.
    pub root: PathBuf,
    /// Dataset directory.
    #[arg(long)]
    pub dest: PathBuf,
    /// Repository id recorded for each origin (default: directory name).
    #[arg(long)]
    pub repo: Option<String>,
    /// Converter command with {in} and {out} placeholders, or "none".
    #[arg(long, default_value = dataset::DEFAULT_WAT2WASM, value_name = "TEMPLATE")]
    pub wat2wasm: String,
    /// Write the summary to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Repository root.
    pub root: PathBuf,
    /// Command run in each CMake project directory.
    #[arg(long, default_value = dataset::DEFAULT_CMAKE_WRAPPER, value_name = "CMD")]
    pub cmake_wrapper: String,
    /// Command run after cmake and in each Makefile directory.
    #[arg(long, default_value = dataset::DEFAULT_MAKE_WRAPPER, value_name = "CMD")]
    pub make_wrapper: String,
    /// Per-command timeout in seconds.
    #[arg(long, default_value_t = dataset::DEFAULT_BUILD_TIMEOUT.as_secs())]
    pub timeout: u64,
    /// Write the build log to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Project report files (JSON from `analyze`).
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure carrying its exit code and message.
struct Fail(i32, String);

fn usage(msg: impl std::fmt::Display) -> Fail {
    Fail(EXIT_USAGE, msg.to_string())
}

fn emit(out: &mut dyn Write, dest: Option<&Path>, text: &str) -> Result<(), Fail> {
    match dest {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(usage),
    }
}

/// Parse `args` (including the program name) and run the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    log::set_max_level(match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    });
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "wasmsmell: {msg}");
            code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Fail> {
    match command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::DetectWasm(a) => cmd_detect(a, out),
        Command::RankReadme(a) => cmd_rank(a, out),
        Command::Collect(a) => cmd_collect(a, out),
        Command::Build(a) => cmd_build(a, out),
        Command::Stats(a) => cmd_stats(a, out),
    }
}

fn checker_set(only: Option<&[String]>, disabled: &[String]) -> Result<CheckerSet, Fail> {
    let mut set = match only {
        Some(ids) => CheckerSet::only(ids).map_err(usage)?,
        None => CheckerSet::default(),
    };
    for id in disabled {
        set.disable(id).map_err(usage)?;
    }
    Ok(set)
}

fn cmd_analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    let config = AnalysisConfig {
        checkers: checker_set(a.checkers.as_deref(), &a.no_checkers)?,
        budget: Budget {
            max_paths: a.max_paths,
            unroll: a.unroll,
        },
        jobs: a.jobs,
        extra: vec![],
        detect_target: a.detect_target,
    };
    let project = a.project.unwrap_or_else(|| project_id(&a.path));
    let report = analyze_path(&a.path, &project, &config).map_err(usage)?;
    emit(
        out,
        a.output.out.as_deref(),
        &render_report(&report, a.output.format),
    )?;
    Ok(if report.has_findings() {
        EXIT_NEGATIVE
    } else {
        EXIT_OK
    })
}

fn render_evidence(ev: &RepoEvidence, format: Format) -> String {
    match format {
        Format::Json => to_canonical_json(ev),
        Format::Text => {
            let verdict = if ev.is_targeting() {
                "targeting"
            } else {
                "not-targeting"
            };
            let mut s = format!("{verdict}\n");
            for (name, hits) in [("h1", &ev.h1), ("h2", &ev.h2), ("h3", &ev.h3)] {
                for h in hits {
                    s += &format!("{name} {}:{}: {}\n", h.file, h.line, h.text);
                }
            }
            s
        }
    }
}

fn cmd_detect(a: DetectArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    let ev = classify_repo(&a.path).map_err(usage)?;
    emit(
        out,
        a.output.out.as_deref(),
        &render_evidence(&ev, a.output.format),
    )?;
    Ok(if ev.is_targeting() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn render_relevance(r: &Relevance, format: Format) -> String {
    match format {
        Format::Json => to_canonical_json(r),
        Format::Text => {
            let verdict = if r.relevant {
                "relevant"
            } else {
                "not-relevant"
            };
            let mut s = verdict.to_string();
            if !r.matched.is_empty() {
                s += &format!(" ({})", r.matched.join(", "));
            }
            s.push('\n');
            for (i, w) in r.top.iter().enumerate() {
                s += &format!("{:>3}. {:<24} {:.6}\n", i + 1, w.word, w.score);
            }
            s
        }
    }
}

fn cmd_rank(a: RankArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    let bytes = fs::read(&a.path).map_err(|e| usage(format!("{}: {e}", a.path.display())))?;
    let text = String::from_utf8_lossy(&bytes);
    let keywords: Vec<String> = match a.keywords {
        Some(k) => k
            .into_iter()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        None => DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
    };
    if keywords.is_empty() {
        return Err(usage("--keywords needs at least one keyword"));
    }
    let params = RankParams {
        window: a.window,
        damping: a.damping,
        eps: a.eps,
        max_iter: a.max_iter,
    };
    if !(0.0..1.0).contains(&params.damping) || params.window < 2 {
        return Err(usage("--damping must be in [0, 1) and --window at least 2"));
    }
    let r = is_relevant(&text, &keywords, a.top_k, params);
    emit(
        out,
        a.output.out.as_deref(),
        &render_relevance(&r, a.output.format),
    )?;
    Ok(if r.relevant { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_collect(a: CollectArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    let converter = match a.wat2wasm.trim() {
        "none" | "" => None,
        t => Some(t),
    };
    let repo = a.repo.unwrap_or_else(|| project_id(&a.root));
    match dataset::collect(&a.root, &a.dest, &repo, converter) {
        Ok(summary) => {
            emit(out, a.out.as_deref(), &to_canonical_json(&summary))?;
            Ok(EXIT_OK)
        }
        Err(e @ DatasetError::Integrity(_)) => Err(Fail(EXIT_INTEGRITY, e.to_string())),
        Err(e) => Err(usage(e)),
    }
}

fn cmd_build(a: BuildArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    if !a.root.is_dir() {
        return Err(usage(format!("{}: no such directory", a.root.display())));
    }
    let config = BuildConfig {
        cmake_wrapper: a.cmake_wrapper,
        make_wrapper: a.make_wrapper,
        timeout: Duration::from_secs(a.timeout),
    };
    let log = dataset::orchestrate_build(&a.root, &config);
    emit(out, a.out.as_deref(), &to_canonical_json(&log))?;
    Ok(EXIT_OK)
}

fn cmd_stats(a: StatsArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    let mut reports = Vec::new();
    for p in &a.reports {
        let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        reports.push(parse_report(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?);
    }
    let stats = compute_corpus_stats(&reports).map_err(usage)?;
    emit(
        out,
        a.output.out.as_deref(),
        &render_stats(&stats, a.output.format),
    )?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("wasmsmell").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("analyze"));
    }

    #[test]
    fn unknown_checker_is_usage_error() {
        let (code, _, err) = run_args(&["analyze", ".", "--checkers", "nope"]);
        assert_eq!(code, 2);
        assert!(err.contains("unknown checker id"));
    }

    #[test]
    fn missing_path_is_usage_error() {
        let (code, _, err) = run_args(&["analyze", "/definitely/not/here"]);
        assert_eq!(code, 2);
        assert!(err.contains("no such file"));
    }

    #[test]
    fn subcommand_help_lists_flags() {
        let expect: &[(&str, &[&str])] = &[
            (
                "analyze",
                &[
                    "--checkers",
                    "--no-checkers",
                    "--format",
                    "--out",
                    "--jobs",
                    "--max-paths",
                    "--unroll",
                ],
            ),
            (
                "rank-readme",
                &["--keywords", "--top-k", "--format", "--out"],
            ),
            ("collect", &["--wat2wasm", "--dest", "--out"]),
            (
                "build",
                &["--cmake-wrapper", "--make-wrapper", "--timeout", "--out"],
            ),
            ("stats", &["--format", "--out"]),
            ("detect-wasm", &["--format", "--out"]),
        ];
        for (cmd, flags) in expect {
            let (code, out, _) = run_args(&[cmd, "--help"]);
            assert_eq!(code, 0);
            for f in *flags {
                assert!(out.contains(f), "{cmd} --help lacks {f}");
            }
        }
    }
}
