//! Bounded path-sensitive walker over flow graphs with checker callbacks.

pub mod state;
pub mod walker;

pub use state::{
    CallEvent, CheckerSlice, FileOrigin, InitState, NullConstraint, Origin, PathState,
    ResourceState, Symbol, SymbolId, VarKey,
};
pub use walker::{
    analyze_function, apply_transfer, assume_branch, BranchSite, Budget, BudgetReport, CallSite,
    Checker, ComparisonSite, FunctionAnalysis, HookContext, RawFinding, VarRead,
};
