//! BDD-based bucket elimination for CNF satisfiability, with the formula
//! generators and measurement plumbing used by the experiment harness.

pub mod bdd;
pub mod cnf;
pub mod generators;
pub mod solver;
pub mod stats;

pub use bdd::{BddError, Manager, NodeRef, OrderError, VarId, VarOrder};
pub use cnf::{
    brute_force_sat, clause_to_bdd, parse_dimacs, restrict_cnf, write_dimacs, Assignment, Clause,
    CnfError, CnfFormula, Literal, NameMap,
};
pub use solver::{
    first_var, probe_named_step, run, run_single_order, run_with_config, write_trace_csv,
    ConjoinOrder, Decision, Phase, RunConfig, RunResult, Schedule, SolverError, TraceEvent,
};
