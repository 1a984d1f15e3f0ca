//! Bucket elimination over BDDs, generalized to a pair of variable orders:
//! every BDD lives under the BDD order while buckets and quantification
//! follow the elimination order. Each clause BDD lands in the bucket of the
//! elimination-first variable it mentions; buckets are processed in
//! elimination order by conjoining their contents, quantifying the owner,
//! and re-bucketing the result. Every conjoin and quantify appends a trace
//! event, which is the measurement surface for the experiment suites.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bdd::{BddError, Manager, NodeRef, VarId, VarOrder};
use crate::cnf::{clause_to_bdd, CnfFormula};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("BDD order and elimination order use different variable sets")]
    OrderMismatch,
    #[error("schedule does not cover the formula's {0} variables")]
    ScheduleMismatch(u32),
    #[error("no variable has matrix coordinates ({0}, {1})")]
    UnknownTarget(u32, u32),
    #[error(transparent)]
    Bdd(BddError),
}

/// A pair of orders over the same variable set.
#[derive(Clone, Debug)]
pub struct Schedule {
    bdd_order: VarOrder,
    elim_order: VarOrder,
}

impl Schedule {
    pub fn new(bdd_order: VarOrder, elim_order: VarOrder) -> Result<Schedule, SolverError> {
        if !bdd_order.same_variables(&elim_order) {
            return Err(SolverError::OrderMismatch);
        }
        Ok(Schedule {
            bdd_order,
            elim_order,
        })
    }

    /// Both roles filled by the same order.
    pub fn single(order: VarOrder) -> Schedule {
        Schedule {
            bdd_order: order.clone(),
            elim_order: order,
        }
    }

    pub fn bdd_order(&self) -> &VarOrder {
        &self.bdd_order
    }

    pub fn elim_order(&self) -> &VarOrder {
        &self.elim_order
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Phase {
    Conjoin,
    Quantify,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Conjoin => "conjoin",
            Phase::Quantify => "quantify",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Decision {
    Sat,
    Unsat,
    Limit,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Decision::Sat => "SAT",
            Decision::Unsat => "UNSAT",
            Decision::Limit => "LIMIT",
        })
    }
}

/// One conjoin or quantify step. Sizes are reachable node counts including
/// terminals; live_nodes and apply_calls are manager-wide counters sampled
/// after the step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceEvent {
    pub step: u32,
    pub phase: Phase,
    pub var: VarId,
    pub operand_sizes: Vec<u64>,
    pub result_size: u64,
    pub live_nodes: usize,
    pub apply_calls: u64,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub decision: Decision,
    pub max_intermediate_size: u64,
    pub trace: Vec<TraceEvent>,
    pub wall_time: Duration,
    pub peak_allocated_nodes: usize,
}

impl RunResult {
    /// Size of the conjunction computed directly before var was quantified:
    /// the last conjoin event for var, or 1 if its bucket was empty. Absent
    /// when the run ended before quantifying var.
    pub fn conjoin_size_before(&self, var: VarId) -> Option<u64> {
        let mut last_conjoin = None;
        for event in &self.trace {
            if event.var != var {
                continue;
            }
            match event.phase {
                Phase::Conjoin => last_conjoin = Some(event.result_size),
                Phase::Quantify => return Some(last_conjoin.unwrap_or(1)),
            }
        }
        None
    }
}

/// Order in which a bucket's contents are folded into the conjunction.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ConjoinOrder {
    /// Insertion order: clause BDDs in formula order, then quantification
    /// results as they arrived. The trace sizes of all suites assume this.
    #[default]
    Insertion,
    SmallestFirst,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub node_limit: Option<usize>,
    /// Return UNSAT the moment a conjunction hits the 0-terminal. Disabling
    /// this never changes the decision, only the trace length.
    pub early_exit: bool,
    /// Assert the bucket and BDD invariants after every elimination step.
    pub debug_checks: bool,
    pub conjoin_order: ConjoinOrder,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            node_limit: None,
            early_exit: true,
            debug_checks: false,
            conjoin_order: ConjoinOrder::default(),
        }
    }
}

/// The elimination-first variable f depends on; absent for constants.
pub fn first_var(m: &Manager, f: NodeRef, elim_order: &VarOrder) -> Option<VarId> {
    m.support(f)
        .into_iter()
        .min_by_key(|&v| elim_order.position(v).expect("variable outside elimination order"))
}

struct RunState {
    manager: Manager,
    buckets: Vec<Vec<NodeRef>>,
    trace: Vec<TraceEvent>,
    saw_zero: bool,
}

impl RunState {
    fn push_event(&mut self, phase: Phase, var: VarId, operand_sizes: Vec<u64>, result_size: u64) {
        self.trace.push(TraceEvent {
            step: self.trace.len() as u32 + 1,
            phase,
            var,
            operand_sizes,
            result_size,
            live_nodes: self.manager.live_node_count(),
            apply_calls: self.manager.apply_call_count(),
        });
    }
}

fn eliminate(
    state: &mut RunState,
    f: &CnfFormula,
    s: &Schedule,
    config: &RunConfig,
) -> Result<Decision, BddError> {
    let elim = s.elim_order();
    for clause in f.clauses() {
        let b = clause_to_bdd(&mut state.manager, clause)?;
        if b.is_true() {
            continue;
        }
        debug_assert!(!b.is_false(), "empty clauses are pre-checked");
        let owner =
            first_var(&state.manager, b, elim).expect("nonconstant BDD has a first variable");
        state.buckets[elim.position(owner).unwrap()].push(b);
    }
    for idx in 0..elim.len() {
        let x = elim.var_at(idx);
        let mut contents = std::mem::take(&mut state.buckets[idx]);
        if contents.is_empty() {
            state.push_event(Phase::Quantify, x, Vec::new(), 1);
            continue;
        }
        if config.conjoin_order == ConjoinOrder::SmallestFirst {
            let mut keyed: Vec<(u64, usize, NodeRef)> = contents
                .iter()
                .enumerate()
                .map(|(k, &b)| (state.manager.node_count(b), k, b))
                .collect();
            keyed.sort_unstable();
            contents = keyed.into_iter().map(|(_, _, b)| b).collect();
        }
        let mut acc = state.manager.one();
        for &b in &contents {
            let operands = vec![state.manager.node_count(acc), state.manager.node_count(b)];
            acc = state.manager.and(acc, b)?;
            let size = state.manager.node_count(acc);
            state.push_event(Phase::Conjoin, x, operands, size);
            if acc.is_false() {
                state.saw_zero = true;
                if config.early_exit {
                    return Ok(Decision::Unsat);
                }
            }
        }
        let conjunction_size = state.manager.node_count(acc);
        let q = state.manager.exists(acc, x)?;
        let q_size = state.manager.node_count(q);
        state.push_event(Phase::Quantify, x, vec![conjunction_size], q_size);
        if !q.is_terminal() {
            let owner =
                first_var(&state.manager, q, elim).expect("nonconstant BDD has a first variable");
            let pos = elim.position(owner).unwrap();
            debug_assert!(pos > idx, "quantification result re-bucketed backwards");
            state.buckets[pos].push(q);
        }
        // Everything outside the buckets is garbage now; peak_live_nodes has
        // already recorded the pre-sweep high-water mark.
        let roots: Vec<NodeRef> = state.buckets.iter().flatten().copied().collect();
        state.manager.clear_dead(&roots);
        if config.debug_checks {
            verify_invariants(state, s, idx, &roots);
        }
    }
    Ok(if state.saw_zero {
        Decision::Unsat
    } else {
        Decision::Sat
    })
}

fn verify_invariants(state: &RunState, s: &Schedule, processed_idx: usize, roots: &[NodeRef]) {
    if let Err(msg) = state.manager.check_invariants(roots) {
        panic!("BDD invariant violated after step {}: {}", processed_idx, msg);
    }
    let elim = s.elim_order();
    for (idx, bucket) in state.buckets.iter().enumerate() {
        for &b in bucket {
            let owner = first_var(&state.manager, b, elim).expect("bucketed BDD is nonconstant");
            assert_eq!(
                elim.position(owner).unwrap(),
                idx,
                "bucket invariant violated: BDD owned by {} sits in bucket {}",
                owner,
                elim.var_at(idx)
            );
            assert!(
                idx > processed_idx,
                "live BDD depends on already-eliminated variable {}",
                owner
            );
        }
    }
}

pub fn run_with_config(
    f: &CnfFormula,
    s: &Schedule,
    config: &RunConfig,
) -> Result<RunResult, SolverError> {
    let start = Instant::now();
    if !s.bdd_order().covers_exactly(f.num_vars()) {
        return Err(SolverError::ScheduleMismatch(f.num_vars()));
    }
    if f.has_empty_clause() {
        return Ok(RunResult {
            decision: Decision::Unsat,
            max_intermediate_size: 0,
            trace: Vec::new(),
            wall_time: start.elapsed(),
            peak_allocated_nodes: 0,
        });
    }
    let manager = match config.node_limit {
        Some(limit) => Manager::with_node_limit(s.bdd_order().clone(), limit),
        None => Manager::new(s.bdd_order().clone()),
    };
    let mut state = RunState {
        manager,
        buckets: vec![Vec::new(); s.elim_order().len()],
        trace: Vec::new(),
        saw_zero: false,
    };
    let decision = match eliminate(&mut state, f, s, config) {
        Ok(d) => d,
        Err(e) if e.is_node_limit() => Decision::Limit,
        Err(e) => return Err(SolverError::Bdd(e)),
    };
    let max_intermediate_size = state.trace.iter().map(|e| e.result_size).max().unwrap_or(0);
    Ok(RunResult {
        decision,
        max_intermediate_size,
        trace: state.trace,
        wall_time: start.elapsed(),
        peak_allocated_nodes: state.manager.peak_live_nodes(),
    })
}

pub fn run(
    f: &CnfFormula,
    s: &Schedule,
    node_limit: Option<usize>,
) -> Result<RunResult, SolverError> {
    run_with_config(
        f,
        s,
        &RunConfig {
            node_limit,
            ..RunConfig::default()
        },
    )
}

pub fn run_single_order(
    f: &CnfFormula,
    order: &VarOrder,
    node_limit: Option<usize>,
) -> Result<RunResult, SolverError> {
    run(f, &Schedule::single(order.clone()), node_limit)
}

/// Run the schedule and report the size of the conjunction computed right
/// before the variable at matrix coordinates `target` was quantified.
pub fn probe_named_step(
    f: &CnfFormula,
    s: &Schedule,
    target: (u32, u32),
    node_limit: Option<usize>,
) -> Result<Option<u64>, SolverError> {
    let var = f
        .name_map()
        .and_then(|m| {
            m.iter()
                .find(|&(_, &coords)| coords == target)
                .map(|(&v, _)| v)
        })
        .ok_or(SolverError::UnknownTarget(target.0, target.1))?;
    let result = run(f, s, node_limit)?;
    Ok(result.conjoin_size_before(var))
}

/// Write the trace as CSV. The var_i/var_j columns come from the formula's
/// name map and stay empty without one; operand_sizes is ';'-separated.
pub fn write_trace_csv<W: std::io::Write>(
    result: &RunResult,
    f: &CnfFormula,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "step,phase,var_i,var_j,var_id,operand_sizes,result_size,live_nodes,apply_calls"
    )?;
    for e in &result.trace {
        let coords = f.name_map().and_then(|m| m.get(&e.var));
        let (var_i, var_j) = match coords {
            Some(&(i, j)) => (i.to_string(), j.to_string()),
            None => (String::new(), String::new()),
        };
        let operands = e
            .operand_sizes
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            e.step, e.phase, var_i, var_j, e.var, operands, e.result_size, e.live_nodes, e.apply_calls
        )?;
    }
    Ok(())
}
