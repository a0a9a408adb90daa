//! Tolerant recursive-descent parser for the C subset the checkers need.
//!
//! Recovery contract: a statement that fails to parse is replaced by a
//! [`Skipped`] region reaching to the next `;` or balanced `}`; a top-level
//! construct that fails (including C++ classes, templates, namespaces) is
//! skipped to the next top-level `;` or balanced `{...}` group. `parse`
//! therefore always yields a translation unit.

use std::collections::HashSet;

use super::ast::*;
use super::lexer::{Token, TokenKind};
use super::span::{Span, UnitDiagnostics};

const MAX_DEPTH: u32 = 96;

/// Type names known without seeing a `typedef`.
pub const BUILTIN_TYPE_NAMES: &[&str] = &[
    "FILE",
    "size_t",
    "ssize_t",
    "wchar_t",
    "wint_t",
    "mode_t",
    "int8_t",
    "int16_t",
    "int32_t",
    "int64_t",
    "uint8_t",
    "uint16_t",
    "uint32_t",
    "uint64_t",
    "intptr_t",
    "uintptr_t",
    "ptrdiff_t",
    "off_t",
    "pid_t",
    "time_t",
    "va_list",
    "bool",
    "DIR",
];

const TYPE_KEYWORDS: &[&str] = &[
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool",
    "_Complex",
];

const QUALIFIERS: &[&str] = &[
    "const",
    "volatile",
    "restrict",
    "__restrict",
    "__restrict__",
    "_Atomic",
];

const STORAGE: &[&str] = &[
    "typedef",
    "extern",
    "static",
    "auto",
    "register",
    "inline",
    "__inline",
    "__inline__",
    "_Noreturn",
    "_Thread_local",
    "__extension__",
];

#[derive(Debug, Clone)]
struct ParseError {
    span: Span,
    message: String,
}

type PResult<T> = Result<T, ParseError>;

struct Specifiers {
    base: String,
    is_typedef: bool,
}

struct Declarator {
    name: Option<(String, Span)>,
    ty: DeclType,
    params: Option<Vec<Param>>,
}

/// Parse a token stream (from `lex(preprocess_lite(text))`) into a
/// translation unit. Never fails.
pub fn parse(tokens: &[Token]) -> (TranslationUnit, UnitDiagnostics) {
    let mut parser = Parser {
        toks: tokens,
        pos: 0,
        depth: 0,
        type_names: BUILTIN_TYPE_NAMES.iter().map(|s| s.to_string()).collect(),
        diags: UnitDiagnostics::default(),
    };
    let unit = parser.translation_unit();
    (unit, parser.diags)
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    depth: u32,
    type_names: HashSet<String>,
    diags: UnitDiagnostics,
}

impl<'t> Parser<'t> {
    // ---- token helpers ----

    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + n)
    }

    fn eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_punct_n(&self, n: usize, p: &str) -> bool {
        self.peek_at(n).is_some_and(|t| t.is_punct(p))
    }

    fn at_kw(&self, k: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(k))
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.toks[self.pos];
        self.pos += 1;
        t
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn here(&self) -> Span {
        match self.peek() {
            Some(t) => t.span,
            None => self
                .toks
                .last()
                .map(|t| {
                    let mut s = t.span;
                    s.offset = s.end();
                    s.len = 0;
                    s
                })
                .unwrap_or_default(),
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            span: self.here(),
            message: message.into(),
        })
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Span> {
        if self.at_punct(p) {
            Ok(self.bump().span)
        } else {
            let found = self
                .peek()
                .map(|t| t.lexeme.as_str())
                .unwrap_or("end of file");
            self.error(format!("expected `{p}`, found `{found}`"))
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, Span)> {
        match self.peek() {
            Some(t) if t.is_ident() => {
                self.pos += 1;
                Ok((t.lexeme.clone(), t.span))
            }
            _ => self.error("expected identifier"),
        }
    }

    /// Span from the token at index `start` through the last consumed token.
    fn span_from(&self, start: usize) -> Span {
        if start >= self.pos {
            let mut s = self
                .toks
                .get(start)
                .map(|t| t.span)
                .unwrap_or_else(|| self.here());
            s.len = 0;
            return s;
        }
        self.toks[start].span.to(self.toks[self.pos - 1].span)
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        if self.depth >= MAX_DEPTH {
            return self.error("nesting too deep");
        }
        self.depth += 1;
        let r = f(self);
        self.depth -= 1;
        r
    }

    // ---- recovery ----

    /// Skip to just past the next `;` at nesting depth 0, or past a
    /// balanced `{...}`; stops before a `}` that closes an enclosing block.
    fn skip_statement(&mut self, start: usize) -> Span {
        let mut braces = 0u32;
        let mut parens = 0u32;
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Punctuator {
                match t.lexeme.as_str() {
                    "}" if braces == 0 => {
                        if self.pos == start {
                            self.pos += 1;
                        }
                        break;
                    }
                    "}" => {
                        self.pos += 1;
                        braces -= 1;
                        if braces == 0 {
                            break;
                        }
                        continue;
                    }
                    "{" => braces += 1,
                    "(" | "[" => parens += 1,
                    ")" | "]" => parens = parens.saturating_sub(1),
                    ";" if braces == 0 && parens == 0 => {
                        self.pos += 1;
                        break;
                    }
                    _ => {}
                }
            }
            self.pos += 1;
        }
        if self.pos == start && !self.eof() {
            self.pos += 1;
        }
        self.span_from(start)
    }

    fn skip_top_level(&mut self, start: usize) -> Span {
        let mut braces = 0u32;
        while let Some(t) = self.peek() {
            self.pos += 1;
            if t.kind != TokenKind::Punctuator {
                continue;
            }
            match t.lexeme.as_str() {
                "{" => braces += 1,
                "}" => {
                    if braces <= 1 {
                        break;
                    }
                    braces -= 1;
                }
                ";" if braces == 0 => break,
                _ => {}
            }
        }
        self.span_from(start)
    }

    fn skipped(&mut self, start: usize, err: ParseError, top_level: bool) -> Skipped {
        self.pos = start;
        let span = if top_level {
            self.skip_top_level(start)
        } else {
            self.skip_statement(start)
        };
        self.diags.push(err.span, err.message.clone());
        Skipped {
            span,
            message: err.message,
        }
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        self.expect_punct(open)?;
        let mut depth = 1u32;
        while let Some(t) = self.peek() {
            self.pos += 1;
            if t.is_punct(open) {
                depth += 1;
            } else if t.is_punct(close) {
                depth -= 1;
                if depth == 0 {
                    return Ok(());
                }
            }
        }
        self.error(format!("unbalanced `{open}`"))
    }

    // ---- top level ----

    fn translation_unit(&mut self) -> TranslationUnit {
        let mut items = Vec::new();
        let mut linkage_depth = 0u32;
        while !self.eof() {
            // extern "C" { ... } is transparent
            if self.at_kw("extern")
                && self
                    .peek_at(1)
                    .is_some_and(|t| t.kind == TokenKind::StringLiteral)
            {
                if self.at_punct_n(2, "{") {
                    self.pos += 3;
                    linkage_depth += 1;
                } else {
                    self.pos += 2;
                }
                continue;
            }
            if linkage_depth > 0 && self.at_punct("}") {
                self.pos += 1;
                linkage_depth -= 1;
                continue;
            }
            if self.eat_punct(";") {
                continue;
            }
            let start = self.pos;
            match self.external_decl() {
                Ok(item) => items.push(item),
                Err(e) => {
                    let sk = self.skipped(start, e, true);
                    items.push(Item::Skipped(sk));
                }
            }
        }
        let span = match (self.toks.first(), self.toks.last()) {
            (Some(a), Some(b)) => a.span.to(b.span),
            _ => Span {
                offset: 0,
                len: 0,
                line: 1,
                column: 1,
            },
        };
        TranslationUnit { items, span }
    }

    fn external_decl(&mut self) -> PResult<Item> {
        let start = self.pos;
        let implicit_int = self.peek().is_some_and(|t| t.is_ident())
            && self.at_punct_n(1, "(")
            && !self.type_names.contains(&self.peek().unwrap().lexeme);
        let spec = if implicit_int {
            Specifiers {
                base: "int".into(),
                is_typedef: false,
            }
        } else {
            self.decl_specifiers(true)?
        };
        if self.at_punct(";") {
            self.bump();
            return Ok(Item::Decl(DeclStmt {
                is_typedef: spec.is_typedef,
                decls: vec![],
                span: self.span_from(start),
            }));
        }
        let decl_start = self.pos;
        let first = self.declarator(&spec.base, false)?;
        if first.ty.is_function && first.params.is_some() && self.at_punct("{") {
            let (name, name_span) = first.name.clone().ok_or_else(|| ParseError {
                span: self.here(),
                message: "function definition without a name".into(),
            })?;
            let body = self.block()?;
            let mut return_type = first.ty.clone();
            return_type.is_function = false;
            return Ok(Item::Function(FunctionDef {
                name,
                name_span,
                return_type,
                params: first.params.unwrap_or_default(),
                body,
                span: self.span_from(start),
            }));
        }
        let decl = self.init_declarator_rest(first, decl_start, &spec)?;
        Ok(Item::Decl(decl_list(self, start, spec, decl)?))
    }

    // ---- declarations ----

    fn is_type_keyword(t: &Token) -> bool {
        t.kind == TokenKind::Keyword
            && (TYPE_KEYWORDS.contains(&t.lexeme.as_str())
                || matches!(t.lexeme.as_str(), "struct" | "union" | "enum"))
    }

    fn is_specifier_keyword(t: &Token) -> bool {
        t.kind == TokenKind::Keyword
            && (Self::is_type_keyword(t)
                || QUALIFIERS.contains(&t.lexeme.as_str())
                || STORAGE.contains(&t.lexeme.as_str())
                || matches!(
                    t.lexeme.as_str(),
                    "__attribute__" | "__declspec" | "_Alignas"
                ))
    }

    fn is_type_name_start(&self, t: &Token) -> bool {
        (t.kind == TokenKind::Keyword
            && (Self::is_type_keyword(t) || QUALIFIERS.contains(&t.lexeme.as_str())))
            || (t.is_ident() && self.type_names.contains(&t.lexeme))
    }

    /// Whether the statement starting at the cursor is a declaration.
    fn at_declaration(&self) -> bool {
        let Some(t) = self.peek() else { return false };
        if Self::is_specifier_keyword(t) {
            return true;
        }
        if !t.is_ident() {
            return false;
        }
        let next = self.peek_at(1);
        if self.type_names.contains(&t.lexeme) {
            return next
                .is_some_and(|n| n.is_ident() || n.is_punct("*") || Self::is_specifier_keyword(n));
        }
        // unknown type name heuristics: `T x;`, `T *x = ...;`
        let declarator_end = |tok: Option<&Token>| {
            tok.is_some_and(|n| {
                n.kind == TokenKind::Punctuator
                    && matches!(n.lexeme.as_str(), ";" | "=" | "," | "[")
            })
        };
        match next {
            Some(n) if n.is_ident() => declarator_end(self.peek_at(2)),
            Some(n) if n.is_punct("*") => {
                let mut i = 1;
                while self.at_punct_n(i, "*") {
                    i += 1;
                }
                self.peek_at(i).is_some_and(|n| n.is_ident())
                    && (declarator_end(self.peek_at(i + 1)) || self.at_punct_n(i + 1, ")"))
            }
            _ => false,
        }
    }

    fn skip_attributes(&mut self) -> PResult<()> {
        loop {
            if self.at_kw("__attribute__") || self.at_kw("__declspec") || self.at_kw("_Alignas") {
                self.bump();
                self.skip_balanced("(", ")")?;
            } else if self.at_kw("__asm__") || self.at_kw("asm") {
                self.bump();
                while self.at_kw("volatile") {
                    self.bump();
                }
                self.skip_balanced("(", ")")?;
            } else {
                return Ok(());
            }
        }
    }

    fn decl_specifiers(&mut self, allow_unknown_type: bool) -> PResult<Specifiers> {
        let mut words: Vec<String> = Vec::new();
        let mut is_typedef = false;
        let mut saw_any = false;
        loop {
            self.skip_attributes()?;
            let Some(t) = self.peek() else { break };
            if t.kind == TokenKind::Keyword {
                let w = t.lexeme.as_str();
                if w == "typedef" {
                    is_typedef = true;
                    saw_any = true;
                    self.bump();
                } else if STORAGE.contains(&w) || QUALIFIERS.contains(&w) {
                    saw_any = true;
                    self.bump();
                    if w == "_Atomic" && self.at_punct("(") {
                        self.bump();
                        let ty = self.type_name()?;
                        self.expect_punct(")")?;
                        words.push(ty.base);
                    }
                } else if TYPE_KEYWORDS.contains(&w) {
                    saw_any = true;
                    words.push(w.to_string());
                    self.bump();
                } else if matches!(w, "struct" | "union" | "enum") {
                    saw_any = true;
                    self.bump();
                    self.skip_attributes()?;
                    let tag = if self.peek().is_some_and(|t| t.is_ident()) {
                        self.bump().lexeme.clone()
                    } else {
                        "<anonymous>".to_string()
                    };
                    if self.at_punct("{") {
                        self.skip_balanced("{", "}")?;
                    }
                    words.push(format!("{w} {tag}"));
                } else {
                    break;
                }
            } else if t.is_ident() && words.is_empty() {
                let next = self.peek_at(1);
                let known = self.type_names.contains(&t.lexeme);
                let looks_like_type = allow_unknown_type
                    && next.is_some_and(|n| {
                        n.is_ident()
                            || n.is_punct("*")
                            || Self::is_specifier_keyword(n)
                            || (n.is_punct("(") && self.at_punct_n(2, "*"))
                    });
                if known || looks_like_type {
                    saw_any = true;
                    words.push(t.lexeme.clone());
                    self.bump();
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        if !saw_any {
            return self.error("expected declaration specifiers");
        }
        let base = if words.is_empty() {
            "int".to_string()
        } else {
            words.join(" ")
        };
        Ok(Specifiers { base, is_typedef })
    }

    fn declarator(&mut self, base: &str, abstract_ok: bool) -> PResult<Declarator> {
        self.nested(|p| p.declarator_inner(base, abstract_ok))
    }

    fn declarator_inner(&mut self, base: &str, abstract_ok: bool) -> PResult<Declarator> {
        let mut pointer_depth = 0;
        loop {
            if self.eat_punct("*") {
                pointer_depth += 1;
            } else if self.peek().is_some_and(|t| {
                t.kind == TokenKind::Keyword && QUALIFIERS.contains(&t.lexeme.as_str())
            }) {
                self.bump();
            } else if self.at_kw("__attribute__") {
                self.skip_attributes()?;
            } else {
                break;
            }
        }
        let mut name = None;
        let mut inner_pointers = 0;
        let mut grouped = false;
        if self.peek().is_some_and(|t| t.is_ident()) {
            let t = self.bump();
            name = Some((t.lexeme.clone(), t.span));
        } else if self.at_punct("(")
            && self
                .peek_at(1)
                .is_some_and(|t| t.is_punct("*") || t.is_punct("(") || t.is_punct("^"))
        {
            self.bump();
            let inner = self.declarator(base, abstract_ok)?;
            self.expect_punct(")")?;
            name = inner.name;
            inner_pointers = inner.ty.pointer_depth;
            grouped = true;
        } else if !abstract_ok {
            return self.error("expected declarator");
        }
        let mut is_array = false;
        let mut params = None;
        loop {
            if self.at_punct("[") {
                self.skip_balanced("[", "]")?;
                is_array = true;
            } else if self.at_punct("(") {
                let list = self.param_list()?;
                if params.is_none() && !grouped {
                    params = Some(list);
                }
            } else {
                break;
            }
        }
        self.skip_attributes()?;
        let is_function = params.is_some() && !grouped;
        Ok(Declarator {
            name,
            ty: DeclType {
                base: base.to_string(),
                pointer_depth: pointer_depth + inner_pointers,
                is_array: is_array && !is_function,
                is_function,
            },
            params,
        })
    }

    fn param_list(&mut self) -> PResult<Vec<Param>> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if self.eat_punct(")") {
            return Ok(params);
        }
        if self.at_kw("void") && self.at_punct_n(1, ")") {
            self.pos += 2;
            return Ok(params);
        }
        loop {
            let start = self.pos;
            if self.eat_punct("...") {
            } else {
                let spec = self.decl_specifiers(true)?;
                let d = self.declarator(&spec.base, true)?;
                let mut ty = d.ty;
                // array and function parameters decay to pointers
                if ty.is_array || ty.is_function {
                    ty.is_array = false;
                    ty.is_function = false;
                    ty.pointer_depth += 1;
                }
                params.push(Param {
                    name: d.name.map(|(n, _)| n),
                    ty,
                    span: self.span_from(start),
                });
            }
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(")")?;
            return Ok(params);
        }
    }

    fn type_name(&mut self) -> PResult<DeclType> {
        let spec = self.decl_specifiers(false)?;
        let d = self.declarator(&spec.base, true)?;
        if d.name.is_some() {
            return self.error("unexpected name in type");
        }
        Ok(d.ty)
    }

    /// Finish the first declarator of a declaration (its initializer).
    fn init_declarator_rest(
        &mut self,
        d: Declarator,
        start: usize,
        spec: &Specifiers,
    ) -> PResult<Option<VarDecl>> {
        let Some((name, name_span)) = d.name else {
            return self.error("declaration without a name");
        };
        let init = if !spec.is_typedef && self.eat_punct("=") {
            Some(self.initializer()?)
        } else {
            None
        };
        if spec.is_typedef {
            self.type_names.insert(name.clone());
        }
        Ok(Some(VarDecl {
            name,
            name_span,
            ty: d.ty,
            init,
            span: self.span_from(start),
        }))
    }

    fn initializer(&mut self) -> PResult<Expr> {
        if !self.at_punct("{") {
            return self.assign_expr();
        }
        self.nested(|p| {
            let start = p.pos;
            p.bump();
            let mut items = Vec::new();
            while !p.at_punct("}") {
                // designators: .field = / [index] =
                let mut designated = false;
                while p.at_punct(".") || p.at_punct("[") {
                    designated = true;
                    if p.eat_punct(".") {
                        p.expect_ident()?;
                    } else {
                        p.skip_balanced("[", "]")?;
                    }
                }
                if designated {
                    p.expect_punct("=")?;
                }
                items.push(p.initializer()?);
                if !p.eat_punct(",") {
                    break;
                }
            }
            p.expect_punct("}")?;
            Ok(Expr::new(ExprKind::InitList(items), p.span_from(start)))
        })
    }

    fn declaration(&mut self) -> PResult<DeclStmt> {
        let start = self.pos;
        if self.at_kw("_Static_assert") {
            self.bump();
            self.skip_balanced("(", ")")?;
            self.expect_punct(";")?;
            return Ok(DeclStmt {
                is_typedef: false,
                decls: vec![],
                span: self.span_from(start),
            });
        }
        let spec = self.decl_specifiers(true)?;
        if self.eat_punct(";") {
            return Ok(DeclStmt {
                is_typedef: spec.is_typedef,
                decls: vec![],
                span: self.span_from(start),
            });
        }
        let decl_start = self.pos;
        let first = self.declarator(&spec.base, false)?;
        let decl = self.init_declarator_rest(first, decl_start, &spec)?;
        decl_list(self, start, spec, decl)
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<Block> {
        let start = self.pos;
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        loop {
            if self.eof() {
                self.diags.push(self.here(), "unterminated block");
                break;
            }
            if self.eat_punct("}") {
                break;
            }
            stmts.push(self.statement_or_skip());
        }
        Ok(Block {
            stmts,
            span: self.span_from(start),
        })
    }

    fn statement_or_skip(&mut self) -> Stmt {
        let start = self.pos;
        match self.statement() {
            Ok(s) => s,
            Err(e) => {
                let sk = self.skipped(start, e, false);
                Stmt {
                    span: sk.span,
                    kind: StmtKind::Skipped(sk),
                }
            }
        }
    }

    /// Body of a compound construct (`if`, loop, label); an immediately
    /// following `}` is tolerated as an empty statement.
    fn sub_statement(&mut self) -> PResult<Box<Stmt>> {
        if self.at_punct("}") || self.eof() {
            let mut span = self.here();
            span.len = 0;
            return Ok(Box::new(Stmt {
                kind: StmtKind::Empty,
                span,
            }));
        }
        self.nested(|p| Ok(Box::new(p.statement_or_skip())))
    }

    fn statement(&mut self) -> PResult<Stmt> {
        self.nested(|p| p.statement_inner())
    }

    fn statement_inner(&mut self) -> PResult<Stmt> {
        let start = self.pos;
        let Some(t) = self.peek() else {
            return self.error("unexpected end of file");
        };
        let kind = if t.is_punct("{") {
            StmtKind::Block(self.block()?)
        } else if t.is_punct(";") {
            self.bump();
            StmtKind::Empty
        } else if t.kind == TokenKind::Keyword {
            match t.lexeme.as_str() {
                "if" => {
                    self.bump();
                    let cond = self.paren_expr()?;
                    let then = self.sub_statement()?;
                    let els = if self.at_kw("else") {
                        self.bump();
                        Some(self.sub_statement()?)
                    } else {
                        None
                    };
                    StmtKind::If { cond, then, els }
                }
                "while" => {
                    self.bump();
                    let cond = self.paren_expr()?;
                    let body = self.sub_statement()?;
                    StmtKind::While { cond, body }
                }
                "do" => {
                    self.bump();
                    let body = self.sub_statement()?;
                    if !self.at_kw("while") {
                        return self.error("expected `while` after do body");
                    }
                    self.bump();
                    let cond = self.paren_expr()?;
                    self.expect_punct(";")?;
                    StmtKind::DoWhile { body, cond }
                }
                "for" => self.for_statement()?,
                "switch" => {
                    self.bump();
                    let cond = self.paren_expr()?;
                    let body = self.sub_statement()?;
                    StmtKind::Switch { cond, body }
                }
                "case" => {
                    self.bump();
                    let value = self.conditional_expr()?;
                    if self.eat_punct("...") {
                        self.conditional_expr()?;
                    }
                    self.expect_punct(":")?;
                    let body = self.sub_statement()?;
                    StmtKind::Case { value, body }
                }
                "default" => {
                    self.bump();
                    self.expect_punct(":")?;
                    StmtKind::Default(self.sub_statement()?)
                }
                "return" => {
                    self.bump();
                    let value = if self.at_punct(";") {
                        None
                    } else {
                        Some(self.expr()?)
                    };
                    self.expect_punct(";")?;
                    StmtKind::Return(value)
                }
                "break" => {
                    self.bump();
                    self.expect_punct(";")?;
                    StmtKind::Break
                }
                "continue" => {
                    self.bump();
                    self.expect_punct(";")?;
                    StmtKind::Continue
                }
                "goto" => {
                    self.bump();
                    let (label, _) = self.expect_ident()?;
                    self.expect_punct(";")?;
                    StmtKind::Goto(label)
                }
                _ if self.at_declaration() => StmtKind::Decl(self.declaration()?),
                _ => self.expr_statement()?,
            }
        } else if t.is_ident() && self.at_punct_n(1, ":") {
            let label = self.bump().lexeme.clone();
            self.bump();
            let body = self.sub_statement()?;
            StmtKind::Labeled { label, body }
        } else if self.at_declaration() {
            StmtKind::Decl(self.declaration()?)
        } else {
            self.expr_statement()?
        };
        Ok(Stmt {
            kind,
            span: self.span_from(start),
        })
    }

    fn expr_statement(&mut self) -> PResult<StmtKind> {
        let e = self.expr()?;
        self.expect_punct(";")?;
        Ok(StmtKind::Expr(e))
    }

    fn for_statement(&mut self) -> PResult<StmtKind> {
        self.bump();
        self.expect_punct("(")?;
        let init_start = self.pos;
        let init = if self.eat_punct(";") {
            None
        } else if self.at_declaration() {
            let d = self.declaration()?;
            Some(Box::new(Stmt {
                span: d.span,
                kind: StmtKind::Decl(d),
            }))
        } else {
            let e = self.expr()?;
            self.expect_punct(";")?;
            Some(Box::new(Stmt {
                kind: StmtKind::Expr(e),
                span: self.span_from(init_start),
            }))
        };
        let cond = if self.at_punct(";") {
            None
        } else {
            Some(self.expr()?)
        };
        self.expect_punct(";")?;
        let step = if self.at_punct(")") {
            None
        } else {
            Some(self.expr()?)
        };
        self.expect_punct(")")?;
        let body = self.sub_statement()?;
        Ok(StmtKind::For {
            init,
            cond,
            step,
            body,
        })
    }

    fn paren_expr(&mut self) -> PResult<Expr> {
        self.expect_punct("(")?;
        let e = self.expr()?;
        self.expect_punct(")")?;
        Ok(e)
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let mut lhs = self.assign_expr()?;
        while self.eat_punct(",") {
            let rhs = self.assign_expr()?;
            lhs = Expr::new(
                ExprKind::Comma {
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                self.span_from(start),
            );
        }
        Ok(lhs)
    }

    fn assign_expr(&mut self) -> PResult<Expr> {
        self.nested(|p| {
            let start = p.pos;
            let lhs = p.conditional_expr()?;
            let Some(t) = p.peek() else { return Ok(lhs) };
            if t.kind != TokenKind::Punctuator {
                return Ok(lhs);
            }
            let op = if t.lexeme == "=" {
                None
            } else if let Some(op) = BinOp::from_compound_assign(&t.lexeme) {
                Some(op)
            } else {
                return Ok(lhs);
            };
            p.bump();
            let value = p.assign_expr()?;
            Ok(Expr::new(
                ExprKind::Assign {
                    op,
                    target: Box::new(lhs),
                    value: Box::new(value),
                },
                p.span_from(start),
            ))
        })
    }

    fn conditional_expr(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let cond = self.binary_expr(1)?;
        if !self.eat_punct("?") {
            return Ok(cond);
        }
        let then = self.expr()?;
        self.expect_punct(":")?;
        let els = self.nested(|p| p.conditional_expr())?;
        Ok(Expr::new(
            ExprKind::Conditional {
                cond: Box::new(cond),
                then: Box::new(then),
                els: Box::new(els),
            },
            self.span_from(start),
        ))
    }

    fn binary_expr(&mut self, min_prec: u8) -> PResult<Expr> {
        let start = self.pos;
        let mut lhs = self.cast_expr()?;
        while let Some((op, prec)) = self
            .peek()
            .filter(|t| t.kind == TokenKind::Punctuator)
            .and_then(|t| BinOp::from_punct(&t.lexeme))
        {
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.nested(|p| p.binary_expr(prec + 1))?;
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                self.span_from(start),
            );
        }
        Ok(lhs)
    }

    /// `( Ident *... )` with an unknown identifier: parsed as a cast.
    fn at_unknown_pointer_cast(&self) -> bool {
        if !self.at_punct("(") || !self.peek_at(1).is_some_and(|t| t.is_ident()) {
            return false;
        }
        let mut i = 2;
        while self.at_punct_n(i, "*") {
            i += 1;
        }
        i > 2 && self.at_punct_n(i, ")")
    }

    fn cast_expr(&mut self) -> PResult<Expr> {
        self.nested(|p| {
            let start = p.pos;
            let is_cast = p.at_punct("(")
                && (p.peek_at(1).is_some_and(|t| p.is_type_name_start(t))
                    || p.at_unknown_pointer_cast());
            if !is_cast {
                return p.unary_expr();
            }
            p.bump();
            let ty = if p.at_unknown_pointer_cast_inner() {
                let base = p.bump().lexeme.clone();
                let mut depth = 0;
                while p.eat_punct("*") {
                    depth += 1;
                }
                DeclType {
                    base,
                    pointer_depth: depth,
                    ..Default::default()
                }
            } else {
                p.type_name()?
            };
            p.expect_punct(")")?;
            if p.at_punct("{") {
                let list = p.initializer()?;
                let e = Expr::new(
                    ExprKind::Cast {
                        ty,
                        expr: Box::new(list),
                    },
                    p.span_from(start),
                );
                return p.postfix_rest(e, start);
            }
            let operand = p.cast_expr()?;
            Ok(Expr::new(
                ExprKind::Cast {
                    ty,
                    expr: Box::new(operand),
                },
                p.span_from(start),
            ))
        })
    }

    fn at_unknown_pointer_cast_inner(&self) -> bool {
        self.peek()
            .is_some_and(|t| t.is_ident() && !self.type_names.contains(&t.lexeme))
            && self.at_punct_n(1, "*")
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let Some(t) = self.peek() else {
            return self.error("expected expression");
        };
        if t.is_keyword("sizeof") || t.is_keyword("_Alignof") {
            self.bump();
            let operand = if self.at_punct("(")
                && self.peek_at(1).is_some_and(|t| self.is_type_name_start(t))
            {
                self.bump();
                self.type_name()?;
                self.expect_punct(")")?;
                None
            } else {
                Some(Box::new(self.nested(|p| p.unary_expr())?))
            };
            return Ok(Expr::new(ExprKind::Sizeof(operand), self.span_from(start)));
        }
        let op = if t.kind == TokenKind::Punctuator {
            match t.lexeme.as_str() {
                "&" => Some(UnaryOp::AddrOf),
                "*" => Some(UnaryOp::Deref),
                "+" => Some(UnaryOp::Plus),
                "-" => Some(UnaryOp::Neg),
                "~" => Some(UnaryOp::BitNot),
                "!" => Some(UnaryOp::Not),
                "++" => Some(UnaryOp::PreInc),
                "--" => Some(UnaryOp::PreDec),
                _ => None,
            }
        } else {
            None
        };
        if let Some(op) = op {
            self.bump();
            let operand = if matches!(op, UnaryOp::PreInc | UnaryOp::PreDec) {
                self.nested(|p| p.unary_expr())?
            } else {
                self.cast_expr()?
            };
            return Ok(Expr::new(
                ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                },
                self.span_from(start),
            ));
        }
        let primary = self.primary_expr()?;
        self.postfix_rest(primary, start)
    }

    fn postfix_rest(&mut self, mut e: Expr, start: usize) -> PResult<Expr> {
        loop {
            let kind = if self.at_punct("(") {
                self.bump();
                let mut args = Vec::new();
                if !self.at_punct(")") {
                    loop {
                        args.push(self.assign_expr()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct(")")?;
                ExprKind::Call {
                    callee: Box::new(e),
                    args,
                }
            } else if self.at_punct("[") {
                self.bump();
                let index = self.expr()?;
                self.expect_punct("]")?;
                ExprKind::Index {
                    base: Box::new(e),
                    index: Box::new(index),
                }
            } else if self.at_punct(".") || self.at_punct("->") {
                let arrow = self.bump().lexeme == "->";
                let (field, _) = self.expect_ident()?;
                ExprKind::Member {
                    base: Box::new(e),
                    field,
                    arrow,
                }
            } else if self.at_punct("++") || self.at_punct("--") {
                let op = if self.bump().lexeme == "++" {
                    UnaryOp::PostInc
                } else {
                    UnaryOp::PostDec
                };
                ExprKind::Unary {
                    op,
                    operand: Box::new(e),
                }
            } else {
                return Ok(e);
            };
            e = Expr::new(kind, self.span_from(start));
        }
    }

    fn primary_expr(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let Some(t) = self.peek() else {
            return self.error("expected expression");
        };
        let kind = match t.kind {
            TokenKind::Identifier => {
                self.bump();
                if t.lexeme == "NULL" || t.lexeme == "nullptr" {
                    ExprKind::Literal(Literal::Null)
                } else {
                    ExprKind::Ident(t.lexeme.clone())
                }
            }
            TokenKind::IntLiteral => {
                self.bump();
                ExprKind::Literal(Literal::Int(parse_int(&t.lexeme)))
            }
            TokenKind::FloatLiteral => {
                self.bump();
                ExprKind::Literal(Literal::Float)
            }
            TokenKind::CharLiteral => {
                self.bump();
                ExprKind::Literal(Literal::Char)
            }
            TokenKind::StringLiteral | TokenKind::WideStringLiteral => {
                let mut wide = false;
                let mut value = String::new();
                while let Some(t) = self.peek() {
                    match t.kind {
                        TokenKind::StringLiteral => {}
                        TokenKind::WideStringLiteral => wide = true,
                        _ => break,
                    }
                    self.bump();
                    value.push_str(string_body(&t.lexeme));
                }
                ExprKind::Literal(Literal::Str { wide, value })
            }
            TokenKind::Punctuator if t.lexeme == "(" => {
                self.bump();
                let mut inner = self.expr()?;
                self.expect_punct(")")?;
                inner.span = self.span_from(start);
                return Ok(inner);
            }
            _ => return self.error(format!("unexpected `{}`", t.lexeme)),
        };
        Ok(Expr::new(kind, self.span_from(start)))
    }
}

fn decl_list(
    p: &mut Parser<'_>,
    start: usize,
    spec: Specifiers,
    first: Option<VarDecl>,
) -> PResult<DeclStmt> {
    let mut decls: Vec<VarDecl> = first.into_iter().collect();
    while p.eat_punct(",") {
        let ds = p.pos;
        let d = p.declarator(&spec.base, false)?;
        if let Some(v) = p.init_declarator_rest(d, ds, &spec)? {
            decls.push(v);
        }
    }
    p.expect_punct(";")?;
    Ok(DeclStmt {
        is_typedef: spec.is_typedef,
        decls,
        span: p.span_from(start),
    })
}

/// The text between the quotes of a (possibly prefixed) string literal,
/// escapes left as written.
fn string_body(lexeme: &str) -> &str {
    let Some(open) = lexeme.find('"') else {
        return "";
    };
    let body = &lexeme[open + 1..];
    body.strip_suffix('"').unwrap_or(body)
}

fn parse_int(lexeme: &str) -> Option<i64> {
    let digits = lexeme.trim_end_matches(['u', 'U', 'l', 'L']);
    let (radix, body) = if let Some(h) = digits
        .strip_prefix("0x")
        .or_else(|| digits.strip_prefix("0X"))
    {
        (16, h)
    } else if let Some(b) = digits
        .strip_prefix("0b")
        .or_else(|| digits.strip_prefix("0B"))
    {
        (2, b)
    } else if digits.len() > 1 && digits.starts_with('0') {
        (8, &digits[1..])
    } else {
        (10, digits)
    };
    u64::from_str_radix(body, radix).ok().map(|v| v as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{lex, preprocess_lite};

    fn parse_src(src: &str) -> (TranslationUnit, UnitDiagnostics) {
        let pp = preprocess_lite(src.as_bytes());
        let (toks, _) = lex(&pp.text);
        parse(&toks)
    }

    fn body(src: &str) -> Vec<Stmt> {
        let (tu, _) = parse_src(&format!("void f(void) {{ {src} }}"));
        match &tu.items[0] {
            Item::Function(f) => f.body.stmts.clone(),
            other => panic!("expected function, got {other:?}"),
        }
    }

    #[test]
    fn uninitialized_pointer_then_printf() {
        let stmts = body(r#"char *data; printf("%s", data);"#);
        let StmtKind::Decl(d) = &stmts[0].kind else {
            panic!()
        };
        assert_eq!(d.decls[0].name, "data");
        assert_eq!(d.decls[0].ty.pointer_depth, 1);
        assert_eq!(d.decls[0].ty.base, "char");
        assert!(d.decls[0].init.is_none());
        let StmtKind::Expr(e) = &stmts[1].kind else {
            panic!()
        };
        assert_eq!(e.callee_name(), Some("printf"));
        let ExprKind::Call { args, .. } = &e.kind else {
            panic!()
        };
        assert!(matches!(
            args[0].kind,
            ExprKind::Literal(Literal::Str { .. })
        ));
        assert_eq!(args[1].ident(), Some("data"));
    }

    #[test]
    fn fputs_compared_to_zero() {
        let stmts = body(r#"if (fputs("string", stdout) == 0) printf("fputs failed!\n");"#);
        let StmtKind::If { cond, then, els } = &stmts[0].kind else {
            panic!()
        };
        let ExprKind::Binary { op, lhs, rhs } = &cond.kind else {
            panic!()
        };
        assert_eq!(*op, BinOp::Eq);
        assert_eq!(lhs.callee_name(), Some("fputs"));
        assert_eq!(rhs.int_value(), Some(0));
        assert!(matches!(then.kind, StmtKind::Expr(_)));
        assert!(els.is_none());
    }

    #[test]
    fn recovery_skips_bad_declaration() {
        let stmts = body("int x = @@; int y = 2; y++;");
        assert!(matches!(stmts[0].kind, StmtKind::Skipped(_)));
        assert!(matches!(stmts[1].kind, StmtKind::Decl(_)));
        assert!(matches!(stmts[2].kind, StmtKind::Expr(_)));
        let (_, diags) = parse_src("void f(void) { int x = @@; }");
        assert!(!diags.is_empty());
    }

    #[test]
    fn skipped_region_covers_statement_bytes() {
        let src = "void f(void) { int x = @@; }";
        let (tu, _) = parse_src(src);
        let Item::Function(f) = &tu.items[0] else {
            panic!()
        };
        let StmtKind::Skipped(sk) = &f.body.stmts[0].kind else {
            panic!()
        };
        assert_eq!(&src[sk.span.offset..sk.span.end()], "int x = @@;");
    }

    #[test]
    fn casts_and_sizeof() {
        let stmts = body("char *data = (char *)malloc(100*sizeof(char)); FILE *f = (FILE *)x;");
        let StmtKind::Decl(d) = &stmts[0].kind else {
            panic!()
        };
        let init = d.decls[0].init.as_ref().unwrap();
        let ExprKind::Cast { ty, expr } = &init.kind else {
            panic!("{init:?}")
        };
        assert_eq!(ty.pointer_depth, 1);
        assert_eq!(expr.callee_name(), Some("malloc"));
    }

    #[test]
    fn open_with_flags() {
        let stmts = body(
            r#"int f = open("file.txt", O_RDWR | O_CREAT, S_IREAD | S_IWRITE); fclose((FILE *)f);"#,
        );
        assert_eq!(stmts.len(), 2);
        let StmtKind::Decl(d) = &stmts[0].kind else {
            panic!()
        };
        assert_eq!(d.decls[0].ty.base, "int");
        assert_eq!(
            d.decls[0].init.as_ref().unwrap().callee_name(),
            Some("open")
        );
    }

    #[test]
    fn arrays_and_typedefs() {
        let (tu, diags) = parse_src(
            "typedef struct node { int v; } node_t;\nnode_t *head;\nint main(int argc, char **argv) { char s[] = \"a/b\"; node_t n; return 0; }",
        );
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(tu.items.len(), 3);
        let Item::Function(f) = &tu.items[2] else {
            panic!()
        };
        assert_eq!(f.params.len(), 2);
        assert_eq!(f.params[1].ty.pointer_depth, 2);
        let StmtKind::Decl(d) = &f.body.stmts[0].kind else {
            panic!()
        };
        assert!(d.decls[0].ty.is_array);
    }

    #[test]
    fn unknown_type_heuristic() {
        let stmts = body("Widget *w = make(); Widget v; a * b;");
        assert!(matches!(stmts[0].kind, StmtKind::Decl(_)));
        assert!(matches!(stmts[1].kind, StmtKind::Decl(_)));
        assert!(matches!(stmts[2].kind, StmtKind::Decl(_)));
    }

    #[test]
    fn control_flow_statements() {
        let stmts = body(
            "for (int i = 0; i < 10; i++) { if (i) continue; else break; } \
             do { x--; } while (x > 0); \
             switch (x) { case 1: y = 2; break; default: y = 3; } \
             lbl: goto lbl;",
        );
        assert!(matches!(stmts[0].kind, StmtKind::For { .. }));
        assert!(matches!(stmts[1].kind, StmtKind::DoWhile { .. }));
        assert!(matches!(stmts[2].kind, StmtKind::Switch { .. }));
        assert!(matches!(stmts[3].kind, StmtKind::Labeled { .. }));
    }

    #[test]
    fn cpp_constructs_are_skipped() {
        let (tu, diags) = parse_src(
            "class Foo { public: int x; };\ntemplate <typename T> T id(T v) { return v; }\nint ok(void) { return 1; }",
        );
        let funcs: Vec<_> = tu
            .items
            .iter()
            .filter_map(|i| match i {
                Item::Function(f) => Some(f.name.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(funcs, vec!["ok"]);
        assert!(tu.items.iter().any(|i| matches!(i, Item::Skipped(_))));
        assert!(!diags.is_empty());
    }

    #[test]
    fn extern_c_block_is_transparent() {
        let (tu, _) = parse_src("extern \"C\" {\nint g(void) { return 0; }\n}\n");
        assert!(matches!(tu.items[0], Item::Function(_)));
    }

    #[test]
    fn null_literal() {
        let stmts = body("if (f != NULL) fclose(f);");
        let StmtKind::If { cond, .. } = &stmts[0].kind else {
            panic!()
        };
        let ExprKind::Binary { rhs, .. } = &cond.kind else {
            panic!()
        };
        assert_eq!(rhs.kind, ExprKind::Literal(Literal::Null));
    }

    #[test]
    fn int_literals() {
        assert_eq!(parse_int("0"), Some(0));
        assert_eq!(parse_int("0x10"), Some(16));
        assert_eq!(parse_int("010"), Some(8));
        assert_eq!(parse_int("42UL"), Some(42));
    }

    #[test]
    fn deep_nesting_does_not_overflow() {
        let src = format!(
            "void f(void) {{ x = {}1{}; }}",
            "(".repeat(5000),
            ")".repeat(5000)
        );
        let (tu, diags) = parse_src(&src);
        assert_eq!(tu.items.len(), 1);
        assert!(!diags.is_empty());
        let src = format!("void f(void) {}{}", "{".repeat(3000), "}".repeat(3000));
        let (tu, _) = parse_src(&src);
        assert!(!tu.items.is_empty());
    }
}
