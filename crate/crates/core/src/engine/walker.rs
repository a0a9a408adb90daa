use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::state::*;
use crate::flow::{BlockId, DeclInfo, FlowGraph, FlowStmt, SymbolTable, Terminator};
use crate::frontend::{BinOp, Expr, ExprKind, Literal, Span, UnaryOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_paths: usize,
    /// How often each back-edge may be taken on one path.
    pub unroll: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_paths: 4096,
            unroll: 2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub functions: usize,
    pub paths_completed: usize,
    /// Paths cut off at the unroll limit.
    pub paths_truncated: usize,
    pub paths_infeasible: usize,
    /// Functions whose exploration stopped at `max_paths`.
    pub functions_exhausted: usize,
    pub exhausted: bool,
    /// Call sites a checker could not evaluate (non-literal format strings).
    pub skipped_sites: usize,
}

impl BudgetReport {
    pub fn merge(&mut self, other: &BudgetReport) {
        self.functions += other.functions;
        self.paths_completed += other.paths_completed;
        self.paths_truncated += other.paths_truncated;
        self.paths_infeasible += other.paths_infeasible;
        self.functions_exhausted += other.functions_exhausted;
        self.exhausted |= other.exhausted;
        self.skipped_sites += other.skipped_sites;
    }
}

/// A finding before it is attached to a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFinding {
    pub checker: String,
    pub span: Span,
    pub message: String,
    pub path_note: Option<String>,
}

pub struct CallSite<'a> {
    pub callee: &'a str,
    pub args: &'a [Expr],
    pub arg_symbols: &'a [SymbolId],
    /// Only set for post-call hooks.
    pub result: Option<SymbolId>,
    pub span: Span,
}

pub struct BranchSite<'a> {
    pub cond: &'a Expr,
    pub taken: bool,
}

pub struct VarRead<'a> {
    pub name: &'a str,
    pub decl: Option<&'a DeclInfo>,
    pub symbol: SymbolId,
    pub span: Span,
}

pub struct ComparisonSite {
    pub op: BinOp,
    pub lhs: SymbolId,
    pub rhs: SymbolId,
    pub span: Span,
}

pub struct HookContext<'a> {
    pub state: &'a PathState,
    pub table: &'a SymbolTable,
    pub slice: &'a mut CheckerSlice,
    checker: &'a str,
    out: &'a mut Vec<(String, Span, String)>,
}

impl HookContext<'_> {
    pub fn emit(&mut self, span: Span, message: impl Into<String>) {
        self.out
            .push((self.checker.to_string(), span, message.into()));
    }
}

/// A path-sensitive checker. Hooks run in statement order along each
/// explored path; per-path memory lives in [`HookContext::slice`].
pub trait Checker: Send + Sync {
    fn id(&self) -> &str;
    fn pre_call(&self, _cx: &mut HookContext<'_>, _call: &CallSite<'_>) {}
    fn post_call(&self, _cx: &mut HookContext<'_>, _call: &CallSite<'_>) {}
    fn branch_assumed(&self, _cx: &mut HookContext<'_>, _branch: &BranchSite<'_>) {}
    fn variable_read(&self, _cx: &mut HookContext<'_>, _read: &VarRead<'_>) {}
    fn comparison(&self, _cx: &mut HookContext<'_>, _cmp: &ComparisonSite) {}
    fn end_of_path(&self, _cx: &mut HookContext<'_>, _exit: Span) {}
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FunctionAnalysis {
    pub findings: Vec<RawFinding>,
    pub report: BudgetReport,
}

#[derive(Clone)]
struct Frame {
    block: BlockId,
    state: PathState,
    slices: Vec<CheckerSlice>,
    back_edges: BTreeMap<(BlockId, BlockId), u32>,
    trace: Vec<(u32, bool)>,
}

struct Interp<'a> {
    table: &'a SymbolTable,
    checkers: &'a [Box<dyn Checker>],
    next_id: u32,
    seen: HashSet<(String, Span, String)>,
    findings: Vec<RawFinding>,
}

/// Enumerate paths of `graph` depth-first (true branch first) within
/// `budget`, running `checkers` along each.
pub fn analyze_function(
    graph: &FlowGraph,
    table: &SymbolTable,
    checkers: &[Box<dyn Checker>],
    budget: Budget,
) -> FunctionAnalysis {
    let max_paths = budget.max_paths.max(1);
    let back: HashSet<(BlockId, BlockId)> = graph
        .edges
        .iter()
        .filter(|e| e.kind == crate::flow::EdgeKind::BackEdge)
        .map(|e| (e.from, e.to))
        .collect();
    let mut it = Interp {
        table,
        checkers,
        next_id: 0,
        seen: HashSet::new(),
        findings: Vec::new(),
    };
    let mut report = BudgetReport {
        functions: 1,
        ..Default::default()
    };
    let take_edge = |fr: &mut Frame, from: BlockId, to: BlockId| -> bool {
        if back.contains(&(from, to)) {
            let n = fr.back_edges.entry((from, to)).or_insert(0);
            if *n >= budget.unroll {
                return false;
            }
            *n += 1;
        }
        fr.block = to;
        true
    };

    let mut stack = vec![Frame {
        block: graph.entry,
        state: PathState::default(),
        slices: vec![CheckerSlice::default(); checkers.len()],
        back_edges: BTreeMap::new(),
        trace: Vec::new(),
    }];
    while let Some(mut fr) = stack.pop() {
        if report.paths_completed + report.paths_truncated >= max_paths {
            report.exhausted = true;
            report.functions_exhausted = 1;
            break;
        }
        let block = &graph.blocks[fr.block];
        for stmt in &block.stmts {
            it.exec(&mut fr, stmt);
        }
        match &block.terminator {
            Terminator::Return { value, span } => {
                if let Some(v) = value {
                    it.eval(&mut fr, v);
                }
                let exit = *span;
                it.fire(&mut fr, |c, cx| c.end_of_path(cx, exit));
                report.paths_completed += 1;
            }
            Terminator::Fallthrough(to) => {
                let from = fr.block;
                if take_edge(&mut fr, from, *to) {
                    stack.push(fr);
                } else {
                    report.paths_truncated += 1;
                }
            }
            Terminator::Branch {
                cond,
                on_true,
                on_false,
            } => {
                let c = it.eval(&mut fr, cond);
                let from = fr.block;
                let mut children = Vec::with_capacity(2);
                for (taken, to) in [(true, *on_true), (false, *on_false)] {
                    let mut child = fr.clone();
                    if !assume(&mut child.state, c, cond, taken, table) {
                        report.paths_infeasible += 1;
                        continue;
                    }
                    let site = BranchSite { cond, taken };
                    it.fire(&mut child, |ch, cx| ch.branch_assumed(cx, &site));
                    child.trace.push((cond.span.line, taken));
                    if take_edge(&mut child, from, to) {
                        children.push(child);
                    } else {
                        report.paths_truncated += 1;
                    }
                }
                stack.extend(children.into_iter().rev());
            }
        }
    }

    let mut findings = it.findings;
    findings.sort_by(|a, b| {
        (a.span.line, a.span.column, &a.checker, &a.message).cmp(&(
            b.span.line,
            b.span.column,
            &b.checker,
            &b.message,
        ))
    });
    FunctionAnalysis { findings, report }
}

/// Apply one flow statement without any checkers attached.
pub fn apply_transfer(state: &PathState, stmt: &FlowStmt, table: &SymbolTable) -> PathState {
    let mut it = Interp {
        table,
        checkers: &[],
        next_id: state.next_symbol_id(),
        seen: HashSet::new(),
        findings: Vec::new(),
    };
    let mut fr = Frame {
        block: 0,
        state: state.clone(),
        slices: vec![],
        back_edges: BTreeMap::new(),
        trace: vec![],
    };
    it.exec(&mut fr, stmt);
    fr.state
}

/// Refine `state` under the assumption that `cond` evaluated to `taken`.
/// `None` means the assumption contradicts what is known.
pub fn assume_branch(
    state: &PathState,
    cond: &Expr,
    taken: bool,
    table: &SymbolTable,
) -> Option<PathState> {
    let mut it = Interp {
        table,
        checkers: &[],
        next_id: state.next_symbol_id(),
        seen: HashSet::new(),
        findings: Vec::new(),
    };
    let mut fr = Frame {
        block: 0,
        state: state.clone(),
        slices: vec![],
        back_edges: BTreeMap::new(),
        trace: vec![],
    };
    let c = it.eval(&mut fr, cond);
    let mut next = fr.state;
    assume(&mut next, c, cond, taken, table).then_some(next)
}

fn key_for(
    table: &SymbolTable,
    name: &str,
    offset: usize,
) -> (VarKey, Option<crate::flow::DeclId>) {
    if name.starts_with('$') {
        return (VarKey::Name(name.to_string()), None);
    }
    match table.lookup(name, offset) {
        Some(id) => (VarKey::Decl(id), Some(id)),
        None => (VarKey::Name(name.to_string()), None),
    }
}

fn assume(
    state: &mut PathState,
    cond_sym: SymbolId,
    cond: &Expr,
    taken: bool,
    table: &SymbolTable,
) -> bool {
    if let Some(v) = state.symbol(cond_sym).literal {
        return (v != 0) == taken;
    }
    let cond = cond.strip_parens_and_casts();
    let (target, want_null) = match &cond.kind {
        ExprKind::Binary {
            op: op @ (BinOp::Eq | BinOp::Ne),
            lhs,
            rhs,
        } => {
            let other = if rhs.int_value() == Some(0) {
                lhs
            } else if lhs.int_value() == Some(0) {
                rhs
            } else {
                return true;
            };
            (other.as_ref(), (*op == BinOp::Eq) == taken)
        }
        ExprKind::Unary {
            op: UnaryOp::Not,
            operand,
        } => (operand.as_ref(), taken),
        ExprKind::Ident(_) => (cond, !taken),
        _ => return true,
    };
    let target = target.strip_parens_and_casts();
    let Some(name) = target.ident() else {
        return true;
    };
    let (key, decl) = key_for(table, name, target.span.offset);
    let Some(sym) = state.binding(&key) else {
        return true;
    };
    let declared_pointer = decl.is_some_and(|d| {
        let ty = &table.get(d).ty;
        ty.is_pointer_like() && !ty.is_array
    });
    if !declared_pointer && !state.symbol(sym).pointer {
        return true;
    }
    let want = if want_null {
        NullConstraint::IsNull
    } else {
        NullConstraint::NonNull
    };
    let s = state.symbol_mut(sym);
    match s.null {
        NullConstraint::Unknown => {
            s.null = want;
            true
        }
        current => current == want,
    }
}

impl Interp<'_> {
    fn fresh(&mut self, fr: &mut Frame, symbol: Symbol) -> SymbolId {
        let id = SymbolId(self.next_id);
        self.next_id += 1;
        fr.state.insert(id, symbol);
        id
    }

    fn fire(&mut self, fr: &mut Frame, f: impl Fn(&dyn Checker, &mut HookContext<'_>)) {
        if self.checkers.is_empty() {
            return;
        }
        let mut out = Vec::new();
        for (checker, slice) in self.checkers.iter().zip(fr.slices.iter_mut()) {
            let mut cx = HookContext {
                state: &fr.state,
                table: self.table,
                slice,
                checker: checker.id(),
                out: &mut out,
            };
            f(checker.as_ref(), &mut cx);
        }
        for (checker, span, message) in out {
            let key = (checker, span, message);
            if self.seen.contains(&key) {
                continue;
            }
            self.seen.insert(key.clone());
            let (checker, span, message) = key;
            let path_note = path_note(&fr.trace);
            self.findings.push(RawFinding {
                checker,
                span,
                message,
                path_note,
            });
        }
    }

    fn exec(&mut self, fr: &mut Frame, stmt: &FlowStmt) {
        match stmt {
            FlowStmt::Declare { name, span } => {
                let (key, _) = key_for(self.table, name, span.offset);
                let mut s = Symbol::new(Origin::Declaration, *span);
                s.init = InitState::Uninit;
                let id = self.fresh(fr, s);
                fr.state.bind(key, id);
            }
            FlowStmt::Assign { target, value, .. } => {
                let v = self.eval(fr, value);
                self.store(fr, target, v);
            }
            FlowStmt::Call {
                callee,
                args,
                result,
                span,
            } => self.call(fr, callee, args, result.as_ref(), *span),
            FlowStmt::Eval { expr, .. } => {
                self.eval(fr, expr);
            }
            FlowStmt::Nop { .. } => {}
        }
    }

    fn store(&mut self, fr: &mut Frame, target: &Expr, value: SymbolId) {
        match &target.kind {
            ExprKind::Ident(name) => {
                let (key, _) = key_for(self.table, name, target.span.offset);
                fr.state.bind(key, value);
            }
            _ => {
                // writes through memory read the address operands
                self.eval(fr, target);
            }
        }
    }

    fn call(
        &mut self,
        fr: &mut Frame,
        callee: &str,
        args: &[Expr],
        result: Option<&Expr>,
        span: Span,
    ) {
        let mut syms = Vec::with_capacity(args.len());
        for a in args {
            let id = self.eval(fr, a);
            syms.push(id);
        }
        let site = CallSite {
            callee,
            args,
            arg_symbols: &syms,
            result: None,
            span,
        };
        self.fire(fr, |c, cx| c.pre_call(cx, &site));

        if let Some(&first) = syms.first() {
            let s = fr.state.symbol_mut(first);
            let tracked = s.resource != ResourceState::Untracked && s.literal != Some(0);
            match callee {
                "free" if tracked => s.resource = ResourceState::Freed,
                "fclose" if tracked => s.resource = ResourceState::FileClosed,
                "close" if s.resource == ResourceState::FileOpen(FileOrigin::Open) => {
                    s.resource = ResourceState::FileClosed
                }
                _ => {}
            }
        }
        if callee == "fwide" {
            fr.state.set_flag("fwide");
        }

        let mut sym = Symbol::new(Origin::Call(callee.to_string()), span);
        let (resource, pointer) = match callee {
            "malloc" | "calloc" | "realloc" => (ResourceState::HeapAllocated, true),
            "alloca" | "__builtin_alloca" => (ResourceState::StackAllocated, true),
            "fopen" => (ResourceState::FileOpen(FileOrigin::Fopen), true),
            "freopen" => (ResourceState::FileOpen(FileOrigin::Freopen), true),
            "open" => (ResourceState::FileOpen(FileOrigin::Open), false),
            _ => (ResourceState::None, false),
        };
        sym.resource = resource;
        sym.pointer = pointer;
        let rid = self.fresh(fr, sym);
        fr.state.push_event(CallEvent {
            callee: callee.to_string(),
            args: syms.clone(),
            result: Some(rid),
            span,
        });
        if let Some(t) = result {
            self.store(fr, t, rid);
        }
        let site = CallSite {
            callee,
            args,
            arg_symbols: &syms,
            result: Some(rid),
            span,
        };
        self.fire(fr, |c, cx| c.post_call(cx, &site));
    }

    fn read_var(&mut self, fr: &mut Frame, name: &str, span: Span) -> SymbolId {
        let (key, decl) = key_for(self.table, name, span.offset);
        let id = match fr.state.binding(&key) {
            Some(id) => id,
            None => {
                let mut s = match decl.map(|d| self.table.get(d)) {
                    Some(d) if d.is_parameter => Symbol::new(Origin::Parameter, d.span),
                    Some(d) if d.is_global => Symbol::new(Origin::External, d.span),
                    Some(d) => Symbol::new(Origin::Computed, d.span),
                    None => Symbol::new(Origin::External, span),
                };
                s.pointer = decl.is_some_and(|d| self.table.get(d).ty.is_pointer_like());
                let id = self.fresh(fr, s);
                fr.state.bind(key, id);
                id
            }
        };
        if !name.starts_with('$') {
            let read = VarRead {
                name,
                decl: decl.map(|d| self.table.get(d)),
                symbol: id,
                span,
            };
            self.fire(fr, |c, cx| c.variable_read(cx, &read));
        }
        id
    }

    /// `&x`: the variable may be written through the pointer.
    fn address_taken(&mut self, fr: &mut Frame, operand: &Expr) {
        let mut root = operand.strip_parens_and_casts();
        loop {
            match &root.kind {
                ExprKind::Index { base, index } => {
                    self.eval(fr, index);
                    root = base.strip_parens_and_casts();
                }
                ExprKind::Member {
                    base, arrow: false, ..
                } => root = base.strip_parens_and_casts(),
                _ => break,
            }
        }
        let ExprKind::Ident(name) = &root.kind else {
            self.eval(fr, root);
            return;
        };
        let (key, _) = key_for(self.table, name, root.span.offset);
        let id = match fr.state.binding(&key) {
            Some(id) => id,
            None => {
                let id = self.fresh(fr, Symbol::new(Origin::Computed, root.span));
                fr.state.bind(key, id);
                id
            }
        };
        let s = fr.state.symbol_mut(id);
        s.init = InitState::Init;
        s.resource = ResourceState::Untracked;
    }

    fn computed(&mut self, fr: &mut Frame, span: Span) -> SymbolId {
        self.fresh(fr, Symbol::new(Origin::Computed, span))
    }

    fn literal_of(&self, fr: &Frame, id: SymbolId) -> Option<i64> {
        fr.state.symbol(id).literal
    }

    fn eval(&mut self, fr: &mut Frame, e: &Expr) -> SymbolId {
        let span = e.span;
        match &e.kind {
            ExprKind::Ident(name) => self.read_var(fr, name, span),
            ExprKind::Literal(lit) => {
                let s = match lit {
                    Literal::Int(Some(v)) => Symbol::literal(*v, span),
                    Literal::Null => Symbol {
                        pointer: true,
                        null: NullConstraint::IsNull,
                        ..Symbol::literal(0, span)
                    },
                    Literal::Str { .. } => Symbol {
                        pointer: true,
                        null: NullConstraint::NonNull,
                        ..Symbol::new(Origin::Literal, span)
                    },
                    _ => Symbol::new(Origin::Literal, span),
                };
                self.fresh(fr, s)
            }
            ExprKind::Cast { expr, .. } => self.eval(fr, expr),
            ExprKind::Unary { op, operand } => match op {
                UnaryOp::AddrOf => {
                    self.address_taken(fr, operand);
                    let s = Symbol {
                        pointer: true,
                        null: NullConstraint::NonNull,
                        ..Symbol::new(Origin::Computed, span)
                    };
                    self.fresh(fr, s)
                }
                UnaryOp::Not | UnaryOp::Neg | UnaryOp::Plus | UnaryOp::BitNot => {
                    let v = self.eval(fr, operand);
                    match self.literal_of(fr, v) {
                        Some(x) => {
                            let folded = match op {
                                UnaryOp::Not => (x == 0) as i64,
                                UnaryOp::Neg => x.wrapping_neg(),
                                UnaryOp::BitNot => !x,
                                _ => x,
                            };
                            self.fresh(fr, Symbol::literal(folded, span))
                        }
                        None => self.computed(fr, span),
                    }
                }
                _ => {
                    self.eval(fr, operand);
                    self.computed(fr, span)
                }
            },
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.eval(fr, lhs);
                let r = self.eval(fr, rhs);
                if op.is_comparison() {
                    let site = ComparisonSite {
                        op: *op,
                        lhs: l,
                        rhs: r,
                        span,
                    };
                    self.fire(fr, |c, cx| c.comparison(cx, &site));
                    if let (Some(a), Some(b)) = (self.literal_of(fr, l), self.literal_of(fr, r)) {
                        let v = match op {
                            BinOp::Eq => a == b,
                            BinOp::Ne => a != b,
                            BinOp::Lt => a < b,
                            BinOp::Gt => a > b,
                            BinOp::Le => a <= b,
                            _ => a >= b,
                        };
                        return self.fresh(fr, Symbol::literal(v as i64, span));
                    }
                    return self.computed(fr, span);
                }
                if matches!(op, BinOp::Add | BinOp::Sub) {
                    if let Some(id) = self.derive(fr, l, r, *op, span) {
                        return id;
                    }
                }
                self.computed(fr, span)
            }
            ExprKind::Comma { lhs, rhs } => {
                self.eval(fr, lhs);
                self.eval(fr, rhs)
            }
            ExprKind::Sizeof(_) => self.computed(fr, span),
            _ => {
                for c in e.children() {
                    self.eval(fr, c);
                }
                self.computed(fr, span)
            }
        }
    }

    /// Pointer arithmetic on an allocation yields a symbol derived from it.
    fn derive(
        &mut self,
        fr: &mut Frame,
        l: SymbolId,
        r: SymbolId,
        op: BinOp,
        span: Span,
    ) -> Option<SymbolId> {
        let ls = fr.state.symbol(l);
        let (base, offset) = match ls.origin {
            Origin::Derived { base, offset } => (base, offset),
            _ if matches!(
                ls.resource,
                ResourceState::HeapAllocated | ResourceState::StackAllocated
            ) =>
            {
                (l, Some(0))
            }
            _ => return None,
        };
        let k = self.literal_of(fr, r);
        let offset = match (offset, k) {
            (Some(o), Some(k)) => Some(if op == BinOp::Add { o + k } else { o - k }),
            _ => None,
        };
        if offset == Some(0) {
            return Some(base);
        }
        let s = Symbol {
            pointer: true,
            ..Symbol::new(Origin::Derived { base, offset }, span)
        };
        Some(self.fresh(fr, s))
    }
}

fn path_note(trace: &[(u32, bool)]) -> Option<String> {
    const SHOWN: usize = 12;
    if trace.is_empty() {
        return None;
    }
    let start = trace.len().saturating_sub(SHOWN);
    let parts: Vec<String> = trace[start..]
        .iter()
        .map(|(line, taken)| format!("line {line} {}", if *taken { "true" } else { "false" }))
        .collect();
    let prefix = if start > 0 { "..., " } else { "" };
    Some(format!("branches: {prefix}{}", parts.join(", ")))
}
