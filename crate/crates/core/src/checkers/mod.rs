//! Smell checkers and the registry that selects them.

pub mod format;
pub mod lifecycle;
pub mod protocol;
pub mod structural;
pub mod typing;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::engine::{analyze_function, Budget, Checker, FunctionAnalysis};
use crate::flow::{build_cfg, SymbolTable};
use crate::frontend::FunctionDef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    /// Runs over the syntax tree.
    Structural,
    /// Runs on the path-sensitive engine.
    Flow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CheckerDef {
    pub id: &'static str,
    pub cwe: Option<u32>,
    pub tier: Tier,
    pub default_enabled: bool,
    pub description: &'static str,
}

const fn def(
    id: &'static str,
    cwe: Option<u32>,
    tier: Tier,
    default_enabled: bool,
    description: &'static str,
) -> CheckerDef {
    CheckerDef {
        id,
        cwe,
        tier,
        default_enabled,
        description,
    }
}

pub const CHECKERS: &[CheckerDef] = &[
    def("access-env", None, Tier::Structural, true, "call to getenv"),
    def(
        "wide-string",
        None,
        Tier::Flow,
        true,
        "wprintf without a preceding fwide",
    ),
    def(
        "bad-fputs-comparison",
        Some(253),
        Tier::Flow,
        true,
        "fputs result compared against 0",
    ),
    def(
        "error-without-action",
        Some(390),
        Tier::Flow,
        true,
        "fclose on an fopen result that may be NULL",
    ),
    def(
        "improper-resource-shutdown",
        Some(404),
        Tier::Flow,
        true,
        "fclose on a descriptor from open",
    ),
    def(
        "double-free",
        Some(415),
        Tier::Flow,
        true,
        "free on already freed memory",
    ),
    def(
        "double-fclose",
        Some(675),
        Tier::Flow,
        true,
        "fclose on an already closed stream",
    ),
    def(
        "uninitialized-variable",
        Some(457),
        Tier::Flow,
        true,
        "read of an uninitialized local",
    ),
    def(
        "pointer-subtraction",
        Some(469),
        Tier::Structural,
        true,
        "subtraction of two pointers",
    ),
    def(
        "format-arg-count",
        Some(685),
        Tier::Structural,
        true,
        "too few arguments for a format string",
    ),
    def(
        "format-arg-type",
        Some(688),
        Tier::Structural,
        true,
        "argument type does not match its conversion",
    ),
    def(
        "alloca-free",
        Some(590),
        Tier::Flow,
        false,
        "free on memory from alloca",
    ),
    def(
        "offset-free",
        Some(761),
        Tier::Flow,
        false,
        "free on a pointer past the start of its allocation",
    ),
];

pub fn lookup(id: &str) -> Option<&'static CheckerDef> {
    CHECKERS.iter().find(|d| d.id == id)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown checker id '{0}'")]
pub struct UnknownChecker(pub String);

/// The enabled checker ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckerSet {
    ids: BTreeSet<&'static str>,
}

impl Default for CheckerSet {
    fn default() -> Self {
        CheckerSet {
            ids: CHECKERS
                .iter()
                .filter(|d| d.default_enabled)
                .map(|d| d.id)
                .collect(),
        }
    }
}

impl CheckerSet {
    pub fn all() -> Self {
        CheckerSet {
            ids: CHECKERS.iter().map(|d| d.id).collect(),
        }
    }

    pub fn none() -> Self {
        CheckerSet {
            ids: BTreeSet::new(),
        }
    }

    pub fn only<S: AsRef<str>>(ids: &[S]) -> Result<Self, UnknownChecker> {
        let mut set = CheckerSet::none();
        for id in ids {
            set.enable(id.as_ref())?;
        }
        Ok(set)
    }

    pub fn enable(&mut self, id: &str) -> Result<(), UnknownChecker> {
        let d = lookup(id).ok_or_else(|| UnknownChecker(id.to_string()))?;
        self.ids.insert(d.id);
        Ok(())
    }

    pub fn disable(&mut self, id: &str) -> Result<(), UnknownChecker> {
        let d = lookup(id).ok_or_else(|| UnknownChecker(id.to_string()))?;
        self.ids.remove(d.id);
        Ok(())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ids.contains(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.ids.iter().copied()
    }

    /// Engine checkers for the enabled flow-tier ids.
    pub fn flow_checkers(&self) -> Vec<Box<dyn Checker>> {
        let mut out: Vec<Box<dyn Checker>> = Vec::new();
        for id in &self.ids {
            let c: Box<dyn Checker> = match *id {
                "wide-string" => Box::new(protocol::WideString),
                "bad-fputs-comparison" => Box::new(protocol::BadFputsComparison),
                "uninitialized-variable" => Box::new(protocol::UninitializedVariable),
                "error-without-action" => Box::new(lifecycle::ErrorWithoutAction),
                "improper-resource-shutdown" => Box::new(lifecycle::ImproperResourceShutdown),
                "double-free" => Box::new(lifecycle::DoubleFree),
                "double-fclose" => Box::new(lifecycle::DoubleFclose),
                "alloca-free" => Box::new(lifecycle::AllocaFree),
                "offset-free" => Box::new(lifecycle::OffsetFree),
                _ => continue,
            };
            out.push(c);
        }
        out
    }
}

/// Run the enabled structural checks and the engine (with the enabled flow
/// checkers plus `extra`) over one function.
pub fn check_function(
    func: &FunctionDef,
    table: &SymbolTable,
    set: &CheckerSet,
    extra: &[std::sync::Arc<dyn Checker>],
    budget: Budget,
) -> FunctionAnalysis {
    let structural = structural::check_structural(func, table, set);
    let mut checkers = set.flow_checkers();
    for c in extra {
        checkers.push(Box::new(Shared(c.clone())));
    }
    let graph = build_cfg(func);
    let mut result = analyze_function(&graph, table, &checkers, budget);
    result.report.skipped_sites += structural.skipped_sites;
    result.findings.extend(structural.findings);
    result.findings.sort_by(|a, b| {
        (a.span.line, a.span.column, &a.checker, &a.message).cmp(&(
            b.span.line,
            b.span.column,
            &b.checker,
            &b.message,
        ))
    });
    result
        .findings
        .dedup_by(|a, b| a.checker == b.checker && a.span == b.span && a.message == b.message);
    result
}

struct Shared(std::sync::Arc<dyn Checker>);

impl Checker for Shared {
    fn id(&self) -> &str {
        self.0.id()
    }
    fn pre_call(
        &self,
        cx: &mut crate::engine::HookContext<'_>,
        call: &crate::engine::CallSite<'_>,
    ) {
        self.0.pre_call(cx, call)
    }
    fn post_call(
        &self,
        cx: &mut crate::engine::HookContext<'_>,
        call: &crate::engine::CallSite<'_>,
    ) {
        self.0.post_call(cx, call)
    }
    fn branch_assumed(
        &self,
        cx: &mut crate::engine::HookContext<'_>,
        b: &crate::engine::BranchSite<'_>,
    ) {
        self.0.branch_assumed(cx, b)
    }
    fn variable_read(
        &self,
        cx: &mut crate::engine::HookContext<'_>,
        r: &crate::engine::VarRead<'_>,
    ) {
        self.0.variable_read(cx, r)
    }
    fn comparison(
        &self,
        cx: &mut crate::engine::HookContext<'_>,
        c: &crate::engine::ComparisonSite,
    ) {
        self.0.comparison(cx, c)
    }
    fn end_of_path(&self, cx: &mut crate::engine::HookContext<'_>, exit: crate::frontend::Span) {
        self.0.end_of_path(cx, exit)
    }
}
