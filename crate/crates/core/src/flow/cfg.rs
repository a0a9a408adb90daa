//! Structured lowering of a function body into basic blocks.
//!
//! Every call is hoisted into its own [`FlowStmt::Call`] (nested calls get
//! a `$tN` temporary), so conditions and assignments never contain calls.
//! `&&`, `||` and `!` in branch conditions become nested branches.

use std::collections::BTreeMap;

use crate::frontend::{
    BinOp, Block, DeclStmt, Expr, ExprKind, FunctionDef, Literal, Span, Stmt, StmtKind, UnaryOp,
};

pub type BlockId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum FlowStmt {
    /// A local declared without initializer.
    Declare {
        name: String,
        span: Span,
    },
    Assign {
        target: Expr,
        value: Expr,
        span: Span,
    },
    Call {
        callee: String,
        args: Vec<Expr>,
        result: Option<Expr>,
        span: Span,
    },
    /// An expression evaluated for its reads only.
    Eval {
        expr: Expr,
        span: Span,
    },
    Nop {
        span: Span,
    },
}

impl FlowStmt {
    pub fn span(&self) -> Span {
        match self {
            FlowStmt::Declare { span, .. }
            | FlowStmt::Assign { span, .. }
            | FlowStmt::Call { span, .. }
            | FlowStmt::Eval { span, .. }
            | FlowStmt::Nop { span } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Terminator {
    Fallthrough(BlockId),
    Branch {
        cond: Expr,
        on_true: BlockId,
        on_false: BlockId,
    },
    Return {
        value: Option<Expr>,
        span: Span,
    },
}

impl Terminator {
    pub fn successors(&self) -> Vec<BlockId> {
        match self {
            Terminator::Fallthrough(b) => vec![*b],
            Terminator::Branch {
                on_true, on_false, ..
            } => vec![*on_true, *on_false],
            Terminator::Return { .. } => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicBlock {
    pub id: BlockId,
    pub stmts: Vec<FlowStmt>,
    pub terminator: Terminator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Fallthrough,
    BranchTrue,
    BranchFalse,
    BackEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: BlockId,
    pub to: BlockId,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowGraph {
    pub function: String,
    pub blocks: Vec<BasicBlock>,
    pub entry: BlockId,
    pub edges: Vec<Edge>,
    pub diagnostics: Vec<(Span, String)>,
}

impl FlowGraph {
    pub fn is_back_edge(&self, from: BlockId, to: BlockId) -> bool {
        self.edges
            .iter()
            .any(|e| e.from == from && e.to == to && e.kind == EdgeKind::BackEdge)
    }

    pub fn branch_edge_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| matches!(e.kind, EdgeKind::BranchTrue | EdgeKind::BranchFalse))
            .count()
    }

    /// Callee names of all call statements, in block order.
    pub fn callees(&self) -> Vec<&str> {
        self.blocks
            .iter()
            .flat_map(|b| b.stmts.iter())
            .filter_map(|s| match s {
                FlowStmt::Call { callee, .. } => Some(callee.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// Name used for calls through something other than a plain identifier.
pub const INDIRECT_CALLEE: &str = "<indirect>";

pub fn callee_label(call: &Expr) -> String {
    call.callee_name().unwrap_or(INDIRECT_CALLEE).to_string()
}

struct PendingBlock {
    stmts: Vec<FlowStmt>,
    term: Option<Terminator>,
}

struct LoopCtx {
    break_to: BlockId,
    continue_to: Option<BlockId>,
}

struct Builder {
    blocks: Vec<PendingBlock>,
    current: BlockId,
    temps: usize,
    loops: Vec<LoopCtx>,
    diagnostics: Vec<(Span, String)>,
}

pub fn build_cfg(func: &FunctionDef) -> FlowGraph {
    let mut b = Builder {
        blocks: vec![],
        current: 0,
        temps: 0,
        loops: vec![],
        diagnostics: vec![],
    };
    b.current = b.new_block();
    b.lower_block(&func.body);
    let mut end = func.body.span;
    end.offset = end.end().saturating_sub(1);
    end.len = 1.min(func.body.span.len);
    b.terminate(Terminator::Return {
        value: None,
        span: end,
    });
    b.finish(func.name.clone())
}

impl Builder {
    fn new_block(&mut self) -> BlockId {
        self.blocks.push(PendingBlock {
            stmts: vec![],
            term: None,
        });
        self.blocks.len() - 1
    }

    fn emit(&mut self, s: FlowStmt) {
        self.blocks[self.current].stmts.push(s);
    }

    fn terminate(&mut self, t: Terminator) {
        let b = &mut self.blocks[self.current];
        if b.term.is_none() {
            b.term = Some(t);
        }
    }

    fn goto(&mut self, target: BlockId) {
        self.terminate(Terminator::Fallthrough(target));
    }

    /// Start a fresh block after an unconditional jump; it is unreachable
    /// unless something later jumps to it, and is pruned otherwise.
    fn detach(&mut self) {
        self.current = self.new_block();
    }

    /// The current block if it is still empty, else a new block reached by
    /// fallthrough. Used for loop headers.
    fn fresh_target(&mut self) -> BlockId {
        if self.blocks[self.current].stmts.is_empty() && self.blocks[self.current].term.is_none() {
            return self.current;
        }
        let b = self.new_block();
        self.goto(b);
        self.current = b;
        b
    }

    fn temp(&mut self, span: Span) -> Expr {
        let name = format!("${}", self.temps);
        self.temps += 1;
        Expr::new(ExprKind::Ident(name), span)
    }

    // ---- statements ----

    fn lower_block(&mut self, block: &Block) {
        for s in &block.stmts {
            self.lower_stmt(s);
        }
    }

    fn lower_decl(&mut self, d: &DeclStmt) {
        if d.is_typedef {
            return;
        }
        for v in &d.decls {
            if v.ty.is_function {
                continue;
            }
            let target = Expr::new(ExprKind::Ident(v.name.clone()), v.name_span);
            match &v.init {
                None => self.emit(FlowStmt::Declare {
                    name: v.name.clone(),
                    span: v.name_span,
                }),
                Some(init) => self.lower_assign(target, init, v.span),
            }
        }
    }

    fn lower_stmt(&mut self, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::Decl(d) => self.lower_decl(d),
            StmtKind::Expr(e) => self.lower_effect(e),
            StmtKind::Block(b) => self.lower_block(b),
            StmtKind::Empty => {}
            StmtKind::Skipped(sk) => self.emit(FlowStmt::Nop { span: sk.span }),
            StmtKind::If { cond, then, els } => {
                let then_b = self.new_block();
                let join = self.new_block();
                let else_b = if els.is_some() {
                    self.new_block()
                } else {
                    join
                };
                self.lower_cond(cond, then_b, else_b);
                self.current = then_b;
                self.lower_stmt(then);
                self.goto(join);
                if let Some(els) = els {
                    self.current = else_b;
                    self.lower_stmt(els);
                    self.goto(join);
                }
                self.current = join;
            }
            StmtKind::While { cond, body } => {
                let header = self.fresh_target();
                let body_b = self.new_block();
                let exit = self.new_block();
                self.lower_cond(cond, body_b, exit);
                self.current = body_b;
                self.loops.push(LoopCtx {
                    break_to: exit,
                    continue_to: Some(header),
                });
                self.lower_stmt(body);
                self.loops.pop();
                self.goto(header);
                self.current = exit;
            }
            StmtKind::DoWhile { body, cond } => {
                let body_b = self.fresh_target();
                let cond_b = self.new_block();
                let exit = self.new_block();
                self.loops.push(LoopCtx {
                    break_to: exit,
                    continue_to: Some(cond_b),
                });
                self.lower_stmt(body);
                self.loops.pop();
                self.goto(cond_b);
                self.current = cond_b;
                self.lower_cond(cond, body_b, exit);
                self.current = exit;
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                if let Some(init) = init {
                    self.lower_stmt(init);
                }
                let header = self.fresh_target();
                let body_b = self.new_block();
                let step_b = self.new_block();
                let exit = self.new_block();
                match cond {
                    Some(c) => self.lower_cond(c, body_b, exit),
                    None => self.goto(body_b),
                }
                self.current = body_b;
                self.loops.push(LoopCtx {
                    break_to: exit,
                    continue_to: Some(step_b),
                });
                self.lower_stmt(body);
                self.loops.pop();
                self.goto(step_b);
                self.current = step_b;
                if let Some(step) = step {
                    self.lower_effect(step);
                }
                self.goto(header);
                self.current = exit;
            }
            StmtKind::Switch { cond, body } => self.lower_switch(cond, body),
            StmtKind::Case { body, .. } | StmtKind::Default(body) => {
                // case labels outside the top level of a switch body are
                // lowered as plain statements
                self.lower_stmt(body)
            }
            StmtKind::Labeled { body, .. } => self.lower_stmt(body),
            StmtKind::Return(value) => {
                let value = value.as_ref().map(|v| self.lower_value(v));
                self.terminate(Terminator::Return {
                    value,
                    span: stmt.span,
                });
                self.detach();
            }
            StmtKind::Break => {
                if let Some(target) = self.loops.last().map(|l| l.break_to) {
                    self.goto(target);
                    self.detach();
                }
            }
            StmtKind::Continue => {
                if let Some(target) = self.loops.iter().rev().find_map(|l| l.continue_to) {
                    self.goto(target);
                    self.detach();
                }
            }
            StmtKind::Goto(label) => {
                self.diagnostics
                    .push((stmt.span, format!("goto {label} is not modeled")));
                self.emit(FlowStmt::Nop { span: stmt.span });
            }
        }
    }

    fn lower_switch(&mut self, cond: &Expr, body: &Stmt) {
        let scrutinee = self.lower_value(cond);
        let scrutinee = match scrutinee.kind {
            ExprKind::Ident(_) => scrutinee,
            _ => {
                let t = self.temp(cond.span);
                self.emit(FlowStmt::Assign {
                    target: t.clone(),
                    value: scrutinee,
                    span: cond.span,
                });
                t
            }
        };
        let top: Vec<&Stmt> = match &body.kind {
            StmtKind::Block(b) => b.stmts.iter().collect(),
            _ => vec![body],
        };
        // one block per label, in source order
        let mut labels: Vec<(Option<&Expr>, BlockId)> = Vec::new();
        let mut label_of: BTreeMap<usize, BlockId> = BTreeMap::new();
        for (i, s) in top.iter().enumerate() {
            let mut cur = *s;
            let mut first = None;
            loop {
                match &cur.kind {
                    StmtKind::Case { value, body } => {
                        let b = *first.get_or_insert_with(|| self.new_block());
                        labels.push((Some(value), b));
                        cur = body;
                    }
                    StmtKind::Default(body) => {
                        let b = *first.get_or_insert_with(|| self.new_block());
                        labels.push((None, b));
                        cur = body;
                    }
                    _ => break,
                }
            }
            if let Some(b) = first {
                label_of.insert(i, b);
            }
        }
        let exit = self.new_block();
        let default = labels
            .iter()
            .find(|(v, _)| v.is_none())
            .map(|(_, b)| *b)
            .unwrap_or(exit);
        for (value, target) in labels.iter().filter(|(v, _)| v.is_some()) {
            let value = value.unwrap();
            let next = self.new_block();
            self.terminate(Terminator::Branch {
                cond: Expr::new(
                    ExprKind::Binary {
                        op: BinOp::Eq,
                        lhs: Box::new(scrutinee.clone()),
                        rhs: Box::new(value.clone()),
                    },
                    value.span,
                ),
                on_true: *target,
                on_false: next,
            });
            self.current = next;
        }
        self.goto(default);
        self.detach();
        self.loops.push(LoopCtx {
            break_to: exit,
            continue_to: None,
        });
        for (i, s) in top.iter().enumerate() {
            let mut cur = *s;
            if let Some(&b) = label_of.get(&i) {
                self.goto(b);
                self.current = b;
                while let StmtKind::Case { body, .. } | StmtKind::Default(body) = &cur.kind {
                    cur = body;
                }
            }
            self.lower_stmt(cur);
        }
        self.loops.pop();
        self.goto(exit);
        self.current = exit;
    }

    // ---- conditions ----

    fn lower_cond(&mut self, cond: &Expr, on_true: BlockId, on_false: BlockId) {
        match &cond.kind {
            ExprKind::Binary {
                op: BinOp::LogAnd,
                lhs,
                rhs,
            } => {
                let mid = self.new_block();
                self.lower_cond(lhs, mid, on_false);
                self.current = mid;
                self.lower_cond(rhs, on_true, on_false);
            }
            ExprKind::Binary {
                op: BinOp::LogOr,
                lhs,
                rhs,
            } => {
                let mid = self.new_block();
                self.lower_cond(lhs, on_true, mid);
                self.current = mid;
                self.lower_cond(rhs, on_true, on_false);
            }
            ExprKind::Unary {
                op: UnaryOp::Not,
                operand,
            } => self.lower_cond(operand, on_false, on_true),
            ExprKind::Comma { lhs, rhs } => {
                self.lower_effect(lhs);
                self.lower_cond(rhs, on_true, on_false);
            }
            _ => {
                let c = self.lower_value(cond);
                self.terminate(Terminator::Branch {
                    cond: c,
                    on_true,
                    on_false,
                });
            }
        }
    }

    // ---- expressions ----

    /// Lower an expression evaluated for its side effects.
    fn lower_effect(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Assign { op, target, value } => {
                let target = self.lower_lvalue(target);
                match op {
                    None => self.lower_assign(target, value, e.span),
                    Some(op) => {
                        let value = self.lower_value(value);
                        let combined = Expr::new(
                            ExprKind::Binary {
                                op: *op,
                                lhs: Box::new(target.clone()),
                                rhs: Box::new(value),
                            },
                            e.span,
                        );
                        self.emit(FlowStmt::Assign {
                            target,
                            value: combined,
                            span: e.span,
                        });
                    }
                }
            }
            ExprKind::Unary {
                op: op @ (UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec),
                operand,
            } => {
                let target = self.lower_lvalue(operand);
                self.emit_step(target, *op, e.span);
            }
            ExprKind::Call { .. } => {
                self.lower_call(e, None);
            }
            ExprKind::Comma { lhs, rhs } => {
                self.lower_effect(lhs);
                self.lower_effect(rhs);
            }
            ExprKind::Cast { expr, .. } => self.lower_effect(expr),
            _ => {
                let v = self.lower_value(e);
                self.emit(FlowStmt::Eval {
                    expr: v,
                    span: e.span,
                });
            }
        }
    }

    fn emit_step(&mut self, target: Expr, op: UnaryOp, span: Span) {
        let bin = if matches!(op, UnaryOp::PreInc | UnaryOp::PostInc) {
            BinOp::Add
        } else {
            BinOp::Sub
        };
        let one = Expr::new(ExprKind::Literal(Literal::Int(Some(1))), span);
        let value = Expr::new(
            ExprKind::Binary {
                op: bin,
                lhs: Box::new(target.clone()),
                rhs: Box::new(one),
            },
            span,
        );
        self.emit(FlowStmt::Assign {
            target,
            value,
            span,
        });
    }

    /// `target = value` where `target` is already lowered.
    fn lower_assign(&mut self, target: Expr, value: &Expr, span: Span) {
        if matches!(value.kind, ExprKind::Call { .. }) {
            self.lower_call(value, Some(target));
            return;
        }
        let value = self.lower_value(value);
        self.emit(FlowStmt::Assign {
            target,
            value,
            span,
        });
    }

    fn lower_call(&mut self, call: &Expr, result: Option<Expr>) {
        let ExprKind::Call { args, .. } = &call.kind else {
            unreachable!("lower_call on non-call")
        };
        let callee = callee_label(call);
        let args = args.iter().map(|a| self.lower_value(a)).collect();
        self.emit(FlowStmt::Call {
            callee,
            args,
            result,
            span: call.span,
        });
    }

    fn lower_lvalue(&mut self, e: &Expr) -> Expr {
        match &e.kind {
            ExprKind::Ident(_) => e.clone(),
            _ => self.lower_value(e),
        }
    }

    /// Lower an expression whose value is used; hoists calls, assignments
    /// and increments into statements and returns the residual expression.
    fn lower_value(&mut self, e: &Expr) -> Expr {
        let span = e.span;
        let rebuild = |kind| Expr::new(kind, span);
        match &e.kind {
            ExprKind::Ident(_) | ExprKind::Literal(_) | ExprKind::Sizeof(_) => e.clone(),
            ExprKind::Call { .. } => {
                let t = self.temp(span);
                self.lower_call(e, Some(t.clone()));
                t
            }
            ExprKind::Assign { target, .. } => {
                self.lower_effect(e);
                self.lower_lvalue(target)
            }
            ExprKind::Unary {
                op: op @ (UnaryOp::PreInc | UnaryOp::PreDec),
                operand,
            } => {
                let target = self.lower_lvalue(operand);
                self.emit_step(target.clone(), *op, span);
                target
            }
            ExprKind::Unary {
                op: op @ (UnaryOp::PostInc | UnaryOp::PostDec),
                operand,
            } => {
                let target = self.lower_lvalue(operand);
                let t = self.temp(span);
                self.emit(FlowStmt::Assign {
                    target: t.clone(),
                    value: target.clone(),
                    span,
                });
                self.emit_step(target, *op, span);
                t
            }
            ExprKind::Unary { op, operand } => rebuild(ExprKind::Unary {
                op: *op,
                operand: Box::new(self.lower_value(operand)),
            }),
            ExprKind::Binary { op, lhs, rhs } => rebuild(ExprKind::Binary {
                op: *op,
                lhs: Box::new(self.lower_value(lhs)),
                rhs: Box::new(self.lower_value(rhs)),
            }),
            ExprKind::Cast { ty, expr } => rebuild(ExprKind::Cast {
                ty: ty.clone(),
                expr: Box::new(self.lower_value(expr)),
            }),
            ExprKind::Index { base, index } => rebuild(ExprKind::Index {
                base: Box::new(self.lower_value(base)),
                index: Box::new(self.lower_value(index)),
            }),
            ExprKind::Member { base, field, arrow } => rebuild(ExprKind::Member {
                base: Box::new(self.lower_value(base)),
                field: field.clone(),
                arrow: *arrow,
            }),
            ExprKind::Conditional { cond, then, els } => rebuild(ExprKind::Conditional {
                cond: Box::new(self.lower_value(cond)),
                then: Box::new(self.lower_value(then)),
                els: Box::new(self.lower_value(els)),
            }),
            ExprKind::Comma { lhs, rhs } => {
                self.lower_effect(lhs);
                self.lower_value(rhs)
            }
            ExprKind::InitList(items) => rebuild(ExprKind::InitList(
                items.iter().map(|i| self.lower_value(i)).collect(),
            )),
        }
    }

    // ---- finishing ----

    fn finish(self, function: String) -> FlowGraph {
        let Builder {
            blocks,
            diagnostics,
            ..
        } = self;
        let succ = |t: &Option<Terminator>| t.as_ref().map(|t| t.successors()).unwrap_or_default();

        // reachability from the entry block
        let mut reachable = vec![false; blocks.len()];
        let mut stack = vec![0usize];
        while let Some(b) = stack.pop() {
            if reachable[b] {
                continue;
            }
            reachable[b] = true;
            stack.extend(succ(&blocks[b].term));
        }
        let mut remap = vec![usize::MAX; blocks.len()];
        let mut next = 0;
        for (old, r) in reachable.iter().enumerate() {
            if *r {
                remap[old] = next;
                next += 1;
            }
        }
        let fix = |id: BlockId| remap[id];
        let mut out: Vec<BasicBlock> = Vec::with_capacity(next);
        for (old, pb) in blocks.into_iter().enumerate() {
            if !reachable[old] {
                continue;
            }
            let terminator = match pb.term {
                Some(Terminator::Fallthrough(t)) => Terminator::Fallthrough(fix(t)),
                Some(Terminator::Branch {
                    cond,
                    on_true,
                    on_false,
                }) => Terminator::Branch {
                    cond,
                    on_true: fix(on_true),
                    on_false: fix(on_false),
                },
                Some(r @ Terminator::Return { .. }) => r,
                None => unreachable!("reachable block without terminator"),
            };
            out.push(BasicBlock {
                id: remap[old],
                stmts: pb.stmts,
                terminator,
            });
        }

        let edges = classify_edges(&out);
        FlowGraph {
            function,
            blocks: out,
            entry: 0,
            edges,
            diagnostics,
        }
    }
}

/// Label every edge; retreating edges of a depth-first walk from the entry
/// are back-edges (the graph is reducible by construction).
fn classify_edges(blocks: &[BasicBlock]) -> Vec<Edge> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color = vec![Color::White; blocks.len()];
    let mut back = std::collections::HashSet::new();
    if !blocks.is_empty() {
        let mut stack: Vec<(BlockId, usize)> = vec![(0, 0)];
        color[0] = Color::Gray;
        while let Some((b, i)) = stack.pop() {
            let succs = blocks[b].terminator.successors();
            if i < succs.len() {
                stack.push((b, i + 1));
                let s = succs[i];
                match color[s] {
                    Color::White => {
                        color[s] = Color::Gray;
                        stack.push((s, 0));
                    }
                    Color::Gray => {
                        back.insert((b, s));
                    }
                    Color::Black => {}
                }
            } else {
                color[b] = Color::Black;
            }
        }
    }
    let mut edges = Vec::new();
    for block in blocks {
        let kind_for = |to: BlockId, normal: EdgeKind| {
            if back.contains(&(block.id, to)) {
                EdgeKind::BackEdge
            } else {
                normal
            }
        };
        match &block.terminator {
            Terminator::Fallthrough(t) => edges.push(Edge {
                from: block.id,
                to: *t,
                kind: kind_for(*t, EdgeKind::Fallthrough),
            }),
            Terminator::Branch {
                on_true, on_false, ..
            } => {
                edges.push(Edge {
                    from: block.id,
                    to: *on_true,
                    kind: kind_for(*on_true, EdgeKind::BranchTrue),
                });
                edges.push(Edge {
                    from: block.id,
                    to: *on_false,
                    kind: kind_for(*on_false, EdgeKind::BranchFalse),
                });
            }
            Terminator::Return { .. } => {}
        }
    }
    edges
}
