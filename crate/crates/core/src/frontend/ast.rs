use super::span::Span;

/// Declared type of a variable, parameter or cast, reduced to what the
/// checkers need.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeclType {
    /// Base type text, e.g. `char`, `unsigned int`, `FILE`, `struct node`.
    pub base: String,
    pub pointer_depth: u32,
    pub is_array: bool,
    pub is_function: bool,
}

impl DeclType {
    pub fn is_pointer_like(&self) -> bool {
        self.pointer_depth > 0 || self.is_array
    }

    pub fn is_integer(&self) -> bool {
        !self.is_pointer_like() && !self.is_function && is_integer_base(&self.base)
    }

    pub fn is_floating(&self) -> bool {
        !self.is_pointer_like()
            && !self.is_function
            && (self.base.contains("double") || self.base.contains("float"))
    }

    /// Scalars and pointers: the values the uninitialized-read check tracks.
    pub fn is_scalar_or_pointer(&self) -> bool {
        if self.is_array || self.is_function {
            return false;
        }
        self.pointer_depth > 0 || self.is_integer() || self.is_floating()
    }
}

impl std::fmt::Display for DeclType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.base)?;
        if self.pointer_depth > 0 {
            write!(f, " {}", "*".repeat(self.pointer_depth as usize))?;
        }
        if self.is_array {
            write!(f, "[]")?;
        }
        Ok(())
    }
}

pub fn is_integer_base(base: &str) -> bool {
    const INTEGER_WORDS: &[&str] = &[
        "char",
        "short",
        "int",
        "long",
        "signed",
        "unsigned",
        "_Bool",
        "bool",
        "size_t",
        "ssize_t",
        "wchar_t",
        "mode_t",
        "ptrdiff_t",
        "intptr_t",
        "uintptr_t",
        "off_t",
        "pid_t",
        "time_t",
        "int8_t",
        "int16_t",
        "int32_t",
        "int64_t",
        "uint8_t",
        "uint16_t",
        "uint32_t",
        "uint64_t",
        "wint_t",
    ];
    if base.starts_with("enum ") {
        return true;
    }
    base.split_whitespace()
        .filter(|w| !matches!(*w, "const" | "volatile" | "static" | "extern" | "register"))
        .all(|w| INTEGER_WORDS.contains(&w))
        && !base.trim().is_empty()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationUnit {
    pub items: Vec<Item>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Function(FunctionDef),
    Decl(DeclStmt),
    Skipped(Skipped),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub name_span: Span,
    pub return_type: DeclType,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: Option<String>,
    pub ty: DeclType,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeclStmt {
    pub is_typedef: bool,
    pub decls: Vec<VarDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub name_span: Span,
    pub ty: DeclType,
    pub init: Option<Expr>,
    pub span: Span,
}

/// A region the parser could not make sense of and skipped over.
#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub span: Span,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Decl(DeclStmt),
    Expr(Expr),
    Block(Block),
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    DoWhile {
        body: Box<Stmt>,
        cond: Expr,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Box<Stmt>,
    },
    Switch {
        cond: Expr,
        body: Box<Stmt>,
    },
    Case {
        value: Expr,
        body: Box<Stmt>,
    },
    Default(Box<Stmt>),
    Labeled {
        label: String,
        body: Box<Stmt>,
    },
    Return(Option<Expr>),
    Break,
    Continue,
    Goto(String),
    Empty,
    Skipped(Skipped),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    LogAnd,
    LogOr,
}

impl BinOp {
    pub fn from_punct(p: &str) -> Option<(BinOp, u8)> {
        Some(match p {
            "||" => (BinOp::LogOr, 1),
            "&&" => (BinOp::LogAnd, 2),
            "|" => (BinOp::BitOr, 3),
            "^" => (BinOp::BitXor, 4),
            "&" => (BinOp::BitAnd, 5),
            "==" => (BinOp::Eq, 6),
            "!=" => (BinOp::Ne, 6),
            "<" => (BinOp::Lt, 7),
            ">" => (BinOp::Gt, 7),
            "<=" => (BinOp::Le, 7),
            ">=" => (BinOp::Ge, 7),
            "<<" => (BinOp::Shl, 8),
            ">>" => (BinOp::Shr, 8),
            "+" => (BinOp::Add, 9),
            "-" => (BinOp::Sub, 9),
            "*" => (BinOp::Mul, 10),
            "/" => (BinOp::Div, 10),
            "%" => (BinOp::Rem, 10),
            _ => return None,
        })
    }

    pub fn from_compound_assign(p: &str) -> Option<BinOp> {
        Some(match p {
            "*=" => BinOp::Mul,
            "/=" => BinOp::Div,
            "%=" => BinOp::Rem,
            "+=" => BinOp::Add,
            "-=" => BinOp::Sub,
            "<<=" => BinOp::Shl,
            ">>=" => BinOp::Shr,
            "&=" => BinOp::BitAnd,
            "^=" => BinOp::BitXor,
            "|=" => BinOp::BitOr,
            _ => return None,
        })
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    AddrOf,
    Deref,
    Plus,
    Neg,
    BitNot,
    Not,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(Option<i64>),
    Float,
    Str { wide: bool, value: String },
    Char,
    Null,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Ident(String),
    Literal(Literal),
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Assign {
        op: Option<BinOp>,
        target: Box<Expr>,
        value: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Cast {
        ty: DeclType,
        expr: Box<Expr>,
    },
    /// `sizeof`/`_Alignof`; the operand (if an expression) is never evaluated.
    Sizeof(Option<Box<Expr>>),
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Member {
        base: Box<Expr>,
        field: String,
        arrow: bool,
    },
    Conditional {
        cond: Box<Expr>,
        then: Box<Expr>,
        els: Box<Expr>,
    },
    Comma {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    InitList(Vec<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Ident(name) => Some(name),
            _ => None,
        }
    }

    /// Name of the called function for direct calls `f(...)`.
    pub fn callee_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Call { callee, .. } => callee.strip_parens_and_casts().ident(),
            _ => None,
        }
    }

    /// The expression with value-preserving casts removed.
    pub fn strip_parens_and_casts(&self) -> &Expr {
        match &self.kind {
            ExprKind::Cast { expr, .. } => expr.strip_parens_and_casts(),
            _ => self,
        }
    }

    pub fn int_value(&self) -> Option<i64> {
        match &self.strip_parens_and_casts().kind {
            ExprKind::Literal(Literal::Int(v)) => *v,
            ExprKind::Literal(Literal::Null) => Some(0),
            ExprKind::Unary {
                op: UnaryOp::Neg,
                operand,
            } => operand.int_value().map(|v| v.wrapping_neg()),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Ident(_) | ExprKind::Literal(_) | ExprKind::Sizeof(None) => vec![],
            ExprKind::Call { callee, args } => {
                let mut v = vec![callee.as_ref()];
                v.extend(args.iter());
                v
            }
            ExprKind::Binary { lhs, rhs, .. } | ExprKind::Comma { lhs, rhs } => {
                vec![lhs.as_ref(), rhs.as_ref()]
            }
            ExprKind::Assign { target, value, .. } => vec![target.as_ref(), value.as_ref()],
            ExprKind::Unary { operand, .. } => vec![operand.as_ref()],
            ExprKind::Cast { expr, .. } => vec![expr.as_ref()],
            ExprKind::Sizeof(Some(e)) => vec![e.as_ref()],
            ExprKind::Index { base, index } => vec![base.as_ref(), index.as_ref()],
            ExprKind::Member { base, .. } => vec![base.as_ref()],
            ExprKind::Conditional { cond, then, els } => {
                vec![cond.as_ref(), then.as_ref(), els.as_ref()]
            }
            ExprKind::InitList(items) => items.iter().collect(),
        }
    }

    /// Pre-order visit of this expression and all sub-expressions.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }
}

/// Coarse node classification used for generic traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    TranslationUnit,
    FunctionDef,
    Decl,
    Block,
    If,
    While,
    For,
    Return,
    ExprStmt,
    OtherStmt,
    Call,
    Binary,
    Unary,
    Cast,
    Ident,
    Literal,
    OtherExpr,
    SkippedRegion,
}

/// A borrowed view of any node, used by [`walk`].
#[derive(Debug, Clone, Copy)]
pub enum NodeRef<'a> {
    Unit(&'a TranslationUnit),
    Function(&'a FunctionDef),
    Decl(&'a VarDecl),
    Block(&'a Block),
    Stmt(&'a Stmt),
    Expr(&'a Expr),
    Skipped(&'a Skipped),
}

impl<'a> NodeRef<'a> {
    pub fn span(&self) -> Span {
        match self {
            NodeRef::Unit(n) => n.span,
            NodeRef::Function(n) => n.span,
            NodeRef::Decl(n) => n.span,
            NodeRef::Block(n) => n.span,
            NodeRef::Stmt(n) => n.span,
            NodeRef::Expr(n) => n.span,
            NodeRef::Skipped(n) => n.span,
        }
    }

    pub fn kind(&self) -> NodeKind {
        match self {
            NodeRef::Unit(_) => NodeKind::TranslationUnit,
            NodeRef::Function(_) => NodeKind::FunctionDef,
            NodeRef::Decl(_) => NodeKind::Decl,
            NodeRef::Block(_) => NodeKind::Block,
            NodeRef::Skipped(_) => NodeKind::SkippedRegion,
            NodeRef::Stmt(s) => match &s.kind {
                StmtKind::Decl(_) => NodeKind::Decl,
                StmtKind::Expr(_) => NodeKind::ExprStmt,
                StmtKind::Block(_) => NodeKind::Block,
                StmtKind::If { .. } => NodeKind::If,
                StmtKind::While { .. } | StmtKind::DoWhile { .. } => NodeKind::While,
                StmtKind::For { .. } => NodeKind::For,
                StmtKind::Return(_) => NodeKind::Return,
                StmtKind::Skipped(_) => NodeKind::SkippedRegion,
                _ => NodeKind::OtherStmt,
            },
            NodeRef::Expr(e) => match &e.kind {
                ExprKind::Call { .. } => NodeKind::Call,
                ExprKind::Binary { .. } => NodeKind::Binary,
                ExprKind::Unary { .. } => NodeKind::Unary,
                ExprKind::Cast { .. } => NodeKind::Cast,
                ExprKind::Ident(_) => NodeKind::Ident,
                ExprKind::Literal(_) => NodeKind::Literal,
                _ => NodeKind::OtherExpr,
            },
        }
    }

    pub fn children(&self) -> Vec<NodeRef<'a>> {
        match *self {
            NodeRef::Unit(u) => u
                .items
                .iter()
                .flat_map(|item| match item {
                    Item::Function(f) => vec![NodeRef::Function(f)],
                    Item::Decl(d) => d.decls.iter().map(NodeRef::Decl).collect(),
                    Item::Skipped(s) => vec![NodeRef::Skipped(s)],
                })
                .collect(),
            NodeRef::Function(f) => vec![NodeRef::Block(&f.body)],
            NodeRef::Decl(d) => d.init.iter().map(NodeRef::Expr).collect(),
            NodeRef::Block(b) => b.stmts.iter().map(NodeRef::Stmt).collect(),
            NodeRef::Skipped(_) => vec![],
            NodeRef::Expr(e) => e.children().into_iter().map(NodeRef::Expr).collect(),
            NodeRef::Stmt(s) => {
                let mut v = Vec::new();
                match &s.kind {
                    StmtKind::Decl(d) => v.extend(d.decls.iter().map(NodeRef::Decl)),
                    StmtKind::Expr(e) => v.push(NodeRef::Expr(e)),
                    StmtKind::Block(b) => v.push(NodeRef::Block(b)),
                    StmtKind::If { cond, then, els } => {
                        v.push(NodeRef::Expr(cond));
                        v.push(NodeRef::Stmt(then));
                        if let Some(e) = els {
                            v.push(NodeRef::Stmt(e));
                        }
                    }
                    StmtKind::While { cond, body } | StmtKind::DoWhile { body, cond } => {
                        v.push(NodeRef::Expr(cond));
                        v.push(NodeRef::Stmt(body));
                    }
                    StmtKind::For {
                        init,
                        cond,
                        step,
                        body,
                    } => {
                        if let Some(i) = init {
                            v.push(NodeRef::Stmt(i));
                        }
                        v.extend(cond.iter().map(NodeRef::Expr));
                        v.extend(step.iter().map(NodeRef::Expr));
                        v.push(NodeRef::Stmt(body));
                    }
                    StmtKind::Switch { cond, body } => {
                        v.push(NodeRef::Expr(cond));
                        v.push(NodeRef::Stmt(body));
                    }
                    StmtKind::Case { value, body } => {
                        v.push(NodeRef::Expr(value));
                        v.push(NodeRef::Stmt(body));
                    }
                    StmtKind::Default(body) | StmtKind::Labeled { body, .. } => {
                        v.push(NodeRef::Stmt(body))
                    }
                    StmtKind::Return(e) => v.extend(e.iter().map(NodeRef::Expr)),
                    StmtKind::Skipped(sk) => v.push(NodeRef::Skipped(sk)),
                    StmtKind::Break | StmtKind::Continue | StmtKind::Goto(_) | StmtKind::Empty => {}
                }
                v
            }
        }
    }
}

/// Pre-order traversal; the callback receives each node and its parent.
pub fn walk<'a>(root: NodeRef<'a>, f: &mut dyn FnMut(NodeRef<'a>, Option<NodeRef<'a>>)) {
    let mut stack = vec![(root, None)];
    while let Some((node, parent)) = stack.pop() {
        f(node, parent);
        for child in node.children().into_iter().rev() {
            stack.push((child, Some(node)));
        }
    }
}
