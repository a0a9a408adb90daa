use crate::frontend::{
    walk, Block, DeclType, FunctionDef, Item, NodeRef, Span, Stmt, StmtKind, TranslationUnit,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeclId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct DeclInfo {
    pub name: String,
    pub ty: DeclType,
    pub is_parameter: bool,
    pub is_global: bool,
    pub has_initializer: bool,
    /// Span of the declared name; lookups only see declarations whose name
    /// starts at or before the use site.
    pub span: Span,
    /// Region in which the declaration is visible.
    pub scope: Span,
}

/// Declared types of the parameters and locals of one function, plus the
/// file-scope declarations when built with [`resolve_with_globals`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolTable {
    decls: Vec<DeclInfo>,
}

impl SymbolTable {
    pub fn get(&self, id: DeclId) -> &DeclInfo {
        &self.decls[id.0]
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DeclId, &DeclInfo)> {
        self.decls.iter().enumerate().map(|(i, d)| (DeclId(i), d))
    }

    /// Resolve `name` used at byte `offset` to the innermost visible
    /// declaration. `None` means the identifier is undeclared (Unknown).
    pub fn lookup(&self, name: &str, offset: usize) -> Option<DeclId> {
        self.decls
            .iter()
            .enumerate()
            .filter(|(_, d)| {
                d.name == name
                    && d.span.offset <= offset
                    && (d.scope.contains_offset(offset) || d.is_global)
            })
            .min_by_key(|(_, d)| (d.is_global, d.scope.len, std::cmp::Reverse(d.span.offset)))
            .map(|(i, _)| DeclId(i))
    }

    pub fn type_of(&self, name: &str, offset: usize) -> Option<&DeclType> {
        self.lookup(name, offset).map(|id| &self.get(id).ty)
    }

    fn push(&mut self, info: DeclInfo) {
        self.decls.push(info);
    }
}

/// Collect the parameters and local declarations of `func`.
pub fn resolve_decl_types(func: &FunctionDef) -> SymbolTable {
    let mut table = SymbolTable::default();
    for p in &func.params {
        if let Some(name) = &p.name {
            table.push(DeclInfo {
                name: name.clone(),
                ty: p.ty.clone(),
                is_parameter: true,
                is_global: false,
                has_initializer: true,
                span: p.span,
                scope: func.span,
            });
        }
    }
    collect_block(&func.body, &mut table);
    table
}

/// Like [`resolve_decl_types`], with file-scope declarations of `unit`
/// visible as a fallback.
pub fn resolve_with_globals(unit: &TranslationUnit, func: &FunctionDef) -> SymbolTable {
    let mut table = resolve_decl_types(func);
    for item in &unit.items {
        if let Item::Decl(d) = item {
            if d.is_typedef {
                continue;
            }
            for v in &d.decls {
                table.push(DeclInfo {
                    name: v.name.clone(),
                    ty: v.ty.clone(),
                    is_parameter: false,
                    is_global: true,
                    has_initializer: true,
                    span: v.name_span,
                    scope: unit.span,
                });
            }
        }
    }
    table
}

fn collect_block(block: &Block, table: &mut SymbolTable) {
    for stmt in &block.stmts {
        collect_stmt(stmt, block.span, table);
    }
}

fn collect_stmt(stmt: &Stmt, scope: Span, table: &mut SymbolTable) {
    let add = |table: &mut SymbolTable, d: &crate::frontend::DeclStmt, scope: Span| {
        if d.is_typedef {
            return;
        }
        for v in &d.decls {
            table.push(DeclInfo {
                name: v.name.clone(),
                ty: v.ty.clone(),
                is_parameter: false,
                is_global: false,
                has_initializer: v.init.is_some(),
                span: v.name_span,
                scope,
            });
        }
    };
    match &stmt.kind {
        StmtKind::Decl(d) => add(table, d, scope),
        StmtKind::Block(b) => collect_block(b, table),
        StmtKind::For { init, body, .. } => {
            if let Some(init) = init {
                if let StmtKind::Decl(d) = &init.kind {
                    add(table, d, stmt.span);
                }
            }
            collect_stmt(body, stmt.span, table);
        }
        _ => {
            // nested statements (if/while bodies etc.) that are not blocks
            // share the enclosing scope
            walk(NodeRef::Stmt(stmt), &mut |node, parent| {
                if let (NodeRef::Stmt(s), Some(NodeRef::Stmt(p))) = (node, parent) {
                    if std::ptr::eq(p, stmt) {
                        collect_stmt(s, scope, table);
                    }
                }
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::SourceUnit;

    fn table(src: &str) -> (SourceUnit, SymbolTable) {
        let su = SourceUnit::parse(src.as_bytes());
        let t = resolve_decl_types(su.functions().next().unwrap());
        (su, t)
    }

    #[test]
    fn fopen_pointer() {
        let src = r#"void f(void) { FILE *f = fopen("file.txt","w+"); }"#;
        let (_, t) = table(src);
        let id = t.lookup("f", src.rfind("fopen").unwrap()).unwrap();
        let d = t.get(id);
        assert_eq!(d.ty.base, "FILE");
        assert_eq!(d.ty.pointer_depth, 1);
        assert!(d.has_initializer);
    }

    #[test]
    fn open_descriptor_is_int() {
        let src = r#"void f(void) { int f = open("a", 0); fclose((FILE *)f); }"#;
        let (_, t) = table(src);
        let ty = t.type_of("f", src.rfind("(FILE").unwrap()).unwrap();
        assert!(ty.is_integer());
    }

    #[test]
    fn char_array() {
        let src = r#"void f(void) { char string2[] = "a/b"; x = string2; }"#;
        let (_, t) = table(src);
        let ty = t.type_of("string2", src.rfind("string2").unwrap()).unwrap();
        assert!(ty.is_array);
        assert_eq!(ty.base, "char");
    }

    #[test]
    fn innermost_declaration_wins() {
        let src = "void f(int x) { int y = x; { char *x = 0; y = x; } y = x; }";
        let (_, t) = table(src);
        let inner_use = src.find("y = x; }").unwrap() + 4;
        let outer_use = src.rfind("y = x").unwrap() + 4;
        assert_eq!(t.type_of("x", inner_use).unwrap().pointer_depth, 1);
        let outer = t.get(t.lookup("x", outer_use).unwrap());
        assert!(outer.is_parameter);
        assert!(t.lookup("undeclared", outer_use).is_none());
    }

    #[test]
    fn declarations_in_nested_statements() {
        let src = "void f(int c) { if (c) { int a = 1; } for (int i = 0; i < 3; i++) a = i; while (c) int b; }";
        let (_, t) = table(src);
        let names: Vec<_> = t.iter().map(|(_, d)| d.name.as_str()).collect();
        assert!(names.contains(&"a"));
        assert!(names.contains(&"i"));
    }

    #[test]
    fn globals_are_fallback() {
        let src = "static FILE *log_file; int n; void f(void) { int n = 0; log_file = 0; n++; }";
        let su = SourceUnit::parse(src.as_bytes());
        let t = resolve_with_globals(&su.unit, su.functions().next().unwrap());
        let at = src.rfind("log_file").unwrap();
        assert!(t.get(t.lookup("log_file", at).unwrap()).is_global);
        let at = src.rfind("n++").unwrap();
        assert!(!t.get(t.lookup("n", at).unwrap()).is_global);
    }
}
