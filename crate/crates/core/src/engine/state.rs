use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::flow::DeclId;
use crate::frontend::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SymbolId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FileOrigin {
    Fopen,
    Freopen,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResourceState {
    None,
    HeapAllocated,
    StackAllocated,
    Freed,
    FileOpen(FileOrigin),
    FileClosed,
    /// The address escaped (`&x`); no lifecycle findings are raised.
    Untracked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitState {
    Uninit,
    Init,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NullConstraint {
    Unknown,
    IsNull,
    NonNull,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Origin {
    /// Return value of a call.
    Call(String),
    /// A local declared without initializer.
    Declaration,
    Literal,
    Parameter,
    /// Globals and identifiers without a visible declaration.
    External,
    /// `base + offset`; `offset` is `None` when not a known constant.
    Derived {
        base: SymbolId,
        offset: Option<i64>,
    },
    /// Any other computed value.
    Computed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub origin: Origin,
    pub resource: ResourceState,
    pub init: InitState,
    pub null: NullConstraint,
    pub literal: Option<i64>,
    pub pointer: bool,
    pub site: Span,
}

impl Symbol {
    pub fn new(origin: Origin, site: Span) -> Symbol {
        Symbol {
            origin,
            resource: ResourceState::None,
            init: InitState::Init,
            null: NullConstraint::Unknown,
            literal: None,
            pointer: false,
            site,
        }
    }

    pub fn literal(value: i64, site: Span) -> Symbol {
        Symbol {
            literal: Some(value),
            ..Symbol::new(Origin::Literal, site)
        }
    }

    pub fn is_call_to(&self, callee: &str) -> bool {
        matches!(&self.origin, Origin::Call(c) if c == callee)
    }
}

/// Variables are keyed by declaration when one is visible, by name
/// otherwise (undeclared identifiers and lowering temporaries).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    Decl(DeclId),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallEvent {
    pub callee: String,
    pub args: Vec<SymbolId>,
    pub result: Option<SymbolId>,
    pub span: Span,
}

/// Everything known on one path. Checkers get read-only access.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathState {
    bindings: BTreeMap<VarKey, SymbolId>,
    symbols: BTreeMap<SymbolId, Symbol>,
    events: Vec<CallEvent>,
    flags: BTreeSet<String>,
}

impl PathState {
    pub fn binding(&self, key: &VarKey) -> Option<SymbolId> {
        self.bindings.get(key).copied()
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[&id]
    }

    pub fn symbols(&self) -> impl Iterator<Item = (SymbolId, &Symbol)> {
        self.symbols.iter().map(|(k, v)| (*k, v))
    }

    pub fn events(&self) -> &[CallEvent] {
        &self.events
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.contains(flag)
    }

    /// Symbol id after the largest one in use.
    pub fn next_symbol_id(&self) -> u32 {
        self.symbols.keys().next_back().map_or(0, |s| s.0 + 1)
    }

    /// The allocation a (possibly derived) symbol points into.
    pub fn root(&self, id: SymbolId) -> SymbolId {
        match self.symbols[&id].origin {
            Origin::Derived { base, .. } => base,
            _ => id,
        }
    }

    pub(crate) fn bind(&mut self, key: VarKey, id: SymbolId) {
        self.bindings.insert(key, id);
    }

    pub(crate) fn insert(&mut self, id: SymbolId, symbol: Symbol) {
        self.symbols.insert(id, symbol);
    }

    pub(crate) fn symbol_mut(&mut self, id: SymbolId) -> &mut Symbol {
        self.symbols.get_mut(&id).expect("symbol exists")
    }

    pub(crate) fn push_event(&mut self, event: CallEvent) {
        self.events.push(event);
    }

    pub(crate) fn set_flag(&mut self, flag: &str) {
        self.flags.insert(flag.to_string());
    }
}

/// Per-path storage owned by one checker.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckerSlice {
    pub marked: BTreeSet<SymbolId>,
    pub counters: BTreeMap<String, i64>,
}
