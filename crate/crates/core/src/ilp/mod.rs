//! Exact placement model: build, solve, export, verify.

mod export;
mod model;
mod oracle;
mod solve;
mod verify;

pub use export::export_standard_form;
pub use model::{
    build_model, build_model_with_usage, Arc, Constraint, Family, IlpModel, ModelDimensions, RequestData, Sense,
    VarKey, VarKind, Variable,
};
pub use oracle::{brute_force_oracle, ORACLE_MAX_EDGES, ORACLE_MAX_REQUESTS};
pub use solve::{assignment_from_trees, evaluate_tree, solve_exact, IlpSolution, RequestTree, SolveLimits, SolveStatus, TreeEval};
pub use verify::{verify_solution, verify_values, Violation, ViolationKind};
