//! Per-function control-flow graphs and declared-type tables.

pub mod cfg;
pub mod symbols;

pub use cfg::{
    build_cfg, BasicBlock, BlockId, Edge, EdgeKind, FlowGraph, FlowStmt, Terminator,
    INDIRECT_CALLEE,
};
pub use symbols::{resolve_decl_types, resolve_with_globals, DeclId, DeclInfo, SymbolTable};
