//! Reduced ordered binary decision diagrams.
//!
//! A [`Manager`] owns an arena of decision nodes under one fixed variable
//! order and hands out [`NodeRef`] handles. Hash-consing keeps the diagrams
//! reduced and unique, so two handles are equal exactly when they compute the
//! same Boolean function over the manager's variables.

mod order;

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

pub use order::{OrderError, VarId, VarOrder};

use crate::cnf::Assignment;

/// Handle to a node owned by some [`Manager`]. Only meaningful together with
/// the manager that issued it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeRef(u32);

impl NodeRef {
    pub const FALSE: NodeRef = NodeRef(0);
    pub const TRUE: NodeRef = NodeRef(1);

    pub fn is_terminal(self) -> bool {
        self.0 <= 1
    }

    pub fn is_false(self) -> bool {
        self == NodeRef::FALSE
    }

    pub fn is_true(self) -> bool {
        self == NodeRef::TRUE
    }

    fn slot(self) -> usize {
        debug_assert!(!self.is_terminal());
        (self.0 - 2) as usize
    }

    fn from_slot(slot: usize) -> NodeRef {
        NodeRef(u32::try_from(slot + 2).expect("node arena overflow"))
    }
}

#[derive(Clone, Copy)]
struct Node {
    var: VarId,
    low: NodeRef,
    high: NodeRef,
}

#[derive(Debug, Error)]
pub enum BddError {
    #[error("variable {0} is not in the manager's order")]
    UnknownVariable(VarId),
    #[error("node limit of {0} exceeded")]
    NodeLimit(usize),
    #[error("assignment does not cover variable {0}")]
    UnassignedVariable(VarId),
}

impl BddError {
    pub fn is_node_limit(&self) -> bool {
        matches!(self, BddError::NodeLimit(_))
    }
}

// Scratch state for reachability walks, reused across queries to avoid
// reallocating a visited set per call.
struct WalkState {
    marks: Vec<u32>,
    generation: u32,
    stack: Vec<NodeRef>,
}

impl WalkState {
    fn begin(&mut self, arena_len: usize) -> u32 {
        self.marks.resize(arena_len, 0);
        if self.generation == u32::MAX {
            self.marks.fill(0);
            self.generation = 0;
        }
        self.generation += 1;
        self.stack.clear();
        self.generation
    }
}

/// A single-threaded BDD manager: node arena, unique table, and operation
/// caches, all under one fixed [`VarOrder`].
pub struct Manager {
    order: VarOrder,
    nodes: Vec<Node>,
    allocated: Vec<bool>,
    free: Vec<u32>,
    unique: HashMap<(VarId, NodeRef, NodeRef), NodeRef>,
    and_cache: HashMap<(NodeRef, NodeRef), NodeRef>,
    or_cache: HashMap<(NodeRef, NodeRef), NodeRef>,
    not_cache: HashMap<NodeRef, NodeRef>,
    restrict_cache: HashMap<(NodeRef, VarId, bool), NodeRef>,
    exists_cache: HashMap<(NodeRef, VarId), NodeRef>,
    node_limit: Option<usize>,
    live: usize,
    peak_live: usize,
    total_allocated: u64,
    cache_hits: u64,
    cache_misses: u64,
    apply_calls: u64,
    walk: RefCell<WalkState>,
}

// Levels: position in the variable order; terminals sit below every variable.
const TERMINAL_LEVEL: usize = usize::MAX;

impl Manager {
    pub fn new(order: VarOrder) -> Self {
        Manager {
            order,
            nodes: Vec::new(),
            allocated: Vec::new(),
            free: Vec::new(),
            unique: HashMap::new(),
            and_cache: HashMap::new(),
            or_cache: HashMap::new(),
            not_cache: HashMap::new(),
            restrict_cache: HashMap::new(),
            exists_cache: HashMap::new(),
            node_limit: None,
            live: 0,
            peak_live: 0,
            total_allocated: 0,
            cache_hits: 0,
            cache_misses: 0,
            apply_calls: 0,
            walk: RefCell::new(WalkState {
                marks: Vec::new(),
                generation: 0,
                stack: Vec::new(),
            }),
        }
    }

    pub fn with_node_limit(order: VarOrder, limit: usize) -> Self {
        let mut m = Manager::new(order);
        m.node_limit = Some(limit);
        m
    }

    pub fn order(&self) -> &VarOrder {
        &self.order
    }

    pub fn node_limit(&self) -> Option<usize> {
        self.node_limit
    }

    /// Decision nodes currently allocated (terminals not counted).
    pub fn live_node_count(&self) -> usize {
        self.live
    }

    /// Highest value `live_node_count` has reached so far.
    pub fn peak_live_nodes(&self) -> usize {
        self.peak_live
    }

    /// Decision nodes ever allocated, including since-swept ones.
    pub fn total_allocated(&self) -> u64 {
        self.total_allocated
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits
    }

    pub fn cache_misses(&self) -> u64 {
        self.cache_misses
    }

    /// Cumulative recursive calls of the binary apply operations.
    pub fn apply_call_count(&self) -> u64 {
        self.apply_calls
    }

    pub fn zero(&self) -> NodeRef {
        NodeRef::FALSE
    }

    pub fn one(&self) -> NodeRef {
        NodeRef::TRUE
    }

    pub fn constant(&self, value: bool) -> NodeRef {
        if value {
            NodeRef::TRUE
        } else {
            NodeRef::FALSE
        }
    }

    fn node(&self, r: NodeRef) -> Node {
        self.nodes[r.slot()]
    }

    /// For internal nodes the level of the labeling variable; terminals are
    /// below every variable.
    fn level(&self, r: NodeRef) -> usize {
        if r.is_terminal() {
            TERMINAL_LEVEL
        } else {
            self.order
                .position(self.node(r).var)
                .expect("node variable not in order")
        }
    }

    pub fn var_of(&self, r: NodeRef) -> Option<VarId> {
        if r.is_terminal() {
            None
        } else {
            Some(self.node(r).var)
        }
    }

    pub fn low_of(&self, r: NodeRef) -> Option<NodeRef> {
        if r.is_terminal() {
            None
        } else {
            Some(self.node(r).low)
        }
    }

    pub fn high_of(&self, r: NodeRef) -> Option<NodeRef> {
        if r.is_terminal() {
            None
        } else {
            Some(self.node(r).high)
        }
    }

    fn mk_node(&mut self, var: VarId, low: NodeRef, high: NodeRef) -> Result<NodeRef, BddError> {
        if low == high {
            return Ok(low);
        }
        if let Some(&r) = self.unique.get(&(var, low, high)) {
            return Ok(r);
        }
        if let Some(limit) = self.node_limit {
            if self.live >= limit {
                return Err(BddError::NodeLimit(limit));
            }
        }
        debug_assert!(self.level_of_var(var) < self.level(low));
        debug_assert!(self.level_of_var(var) < self.level(high));
        let node = Node { var, low, high };
        let r = match self.free.pop() {
            Some(raw) => {
                let r = NodeRef(raw);
                self.nodes[r.slot()] = node;
                self.allocated[r.slot()] = true;
                r
            }
            None => {
                let r = NodeRef::from_slot(self.nodes.len());
                self.nodes.push(node);
                self.allocated.push(true);
                r
            }
        };
        self.unique.insert((var, low, high), r);
        self.live += 1;
        self.total_allocated += 1;
        self.peak_live = self.peak_live.max(self.live);
        Ok(r)
    }

    fn level_of_var(&self, var: VarId) -> usize {
        self.order.position(var).expect("variable not in order")
    }

    fn require_known(&self, v: VarId) -> Result<usize, BddError> {
        self.order.position(v).ok_or(BddError::UnknownVariable(v))
    }

    /// BDD of the literal `v` (positive) or `¬v`.
    pub fn literal(&mut self, v: VarId, positive: bool) -> Result<NodeRef, BddError> {
        self.require_known(v)?;
        if positive {
            self.mk_node(v, NodeRef::FALSE, NodeRef::TRUE)
        } else {
            self.mk_node(v, NodeRef::TRUE, NodeRef::FALSE)
        }
    }

    pub fn and(&mut self, f: NodeRef, g: NodeRef) -> Result<NodeRef, BddError> {
        if f.is_false() || g.is_false() {
            return Ok(NodeRef::FALSE);
        }
        if f.is_true() {
            return Ok(g);
        }
        if g.is_true() || f == g {
            return Ok(f);
        }
        let key = (f.min(g), f.max(g));
        if let Some(&r) = self.and_cache.get(&key) {
            self.cache_hits += 1;
            return Ok(r);
        }
        self.cache_misses += 1;
        self.apply_calls += 1;
        let (var, f_low, f_high, g_low, g_high) = self.cofactor_pair(f, g);
        let low = self.and(f_low, g_low)?;
        let high = self.and(f_high, g_high)?;
        let r = self.mk_node(var, low, high)?;
        self.and_cache.insert(key, r);
        Ok(r)
    }

    pub fn or(&mut self, f: NodeRef, g: NodeRef) -> Result<NodeRef, BddError> {
        if f.is_true() || g.is_true() {
            return Ok(NodeRef::TRUE);
        }
        if f.is_false() {
            return Ok(g);
        }
        if g.is_false() || f == g {
            return Ok(f);
        }
        let key = (f.min(g), f.max(g));
        if let Some(&r) = self.or_cache.get(&key) {
            self.cache_hits += 1;
            return Ok(r);
        }
        self.cache_misses += 1;
        self.apply_calls += 1;
        let (var, f_low, f_high, g_low, g_high) = self.cofactor_pair(f, g);
        let low = self.or(f_low, g_low)?;
        let high = self.or(f_high, g_high)?;
        let r = self.mk_node(var, low, high)?;
        self.or_cache.insert(key, r);
        Ok(r)
    }

    // Shannon cofactors of f and g with respect to the topmost variable of
    // the pair.
    fn cofactor_pair(
        &self,
        f: NodeRef,
        g: NodeRef,
    ) -> (VarId, NodeRef, NodeRef, NodeRef, NodeRef) {
        let lf = self.level(f);
        let lg = self.level(g);
        if lf <= lg {
            let fn_ = self.node(f);
            let (g_low, g_high) = if lg == lf {
                let gn = self.node(g);
                (gn.low, gn.high)
            } else {
                (g, g)
            };
            (fn_.var, fn_.low, fn_.high, g_low, g_high)
        } else {
            let gn = self.node(g);
            (gn.var, f, f, gn.low, gn.high)
        }
    }

    /// Negation by swapping sinks; the result has exactly as many nodes as
    /// the input.
    pub fn not(&mut self, f: NodeRef) -> Result<NodeRef, BddError> {
        if f.is_false() {
            return Ok(NodeRef::TRUE);
        }
        if f.is_true() {
            return Ok(NodeRef::FALSE);
        }
        if let Some(&r) = self.not_cache.get(&f) {
            self.cache_hits += 1;
            return Ok(r);
        }
        self.cache_misses += 1;
        let node = self.node(f);
        let low = self.not(node.low)?;
        let high = self.not(node.high)?;
        let r = self.mk_node(node.var, low, high)?;
        self.not_cache.insert(f, r);
        self.not_cache.insert(r, f);
        Ok(r)
    }

    /// The cofactor f with v fixed to b.
    pub fn restrict(&mut self, f: NodeRef, v: VarId, b: bool) -> Result<NodeRef, BddError> {
        let v_level = self.require_known(v)?;
        self.restrict_rec(f, v, v_level, b)
    }

    fn restrict_rec(
        &mut self,
        f: NodeRef,
        v: VarId,
        v_level: usize,
        b: bool,
    ) -> Result<NodeRef, BddError> {
        let f_level = self.level(f);
        if f_level > v_level {
            // v cannot appear below this point.
            return Ok(f);
        }
        let node = self.node(f);
        if f_level == v_level {
            return Ok(if b { node.high } else { node.low });
        }
        if let Some(&r) = self.restrict_cache.get(&(f, v, b)) {
            self.cache_hits += 1;
            return Ok(r);
        }
        self.cache_misses += 1;
        let low = self.restrict_rec(node.low, v, v_level, b)?;
        let high = self.restrict_rec(node.high, v, v_level, b)?;
        let r = self.mk_node(node.var, low, high)?;
        self.restrict_cache.insert((f, v, b), r);
        Ok(r)
    }

    /// Existential quantification of a single variable:
    /// `restrict(f,v,0) ∨ restrict(f,v,1)`. The result never mentions v.
    pub fn exists(&mut self, f: NodeRef, v: VarId) -> Result<NodeRef, BddError> {
        let v_level = self.require_known(v)?;
        self.exists_rec(f, v, v_level)
    }

    fn exists_rec(&mut self, f: NodeRef, v: VarId, v_level: usize) -> Result<NodeRef, BddError> {
        let f_level = self.level(f);
        if f_level > v_level {
            return Ok(f);
        }
        let node = self.node(f);
        if f_level == v_level {
            return self.or(node.low, node.high);
        }
        if let Some(&r) = self.exists_cache.get(&(f, v)) {
            self.cache_hits += 1;
            return Ok(r);
        }
        self.cache_misses += 1;
        let low = self.exists_rec(node.low, v, v_level)?;
        let high = self.exists_rec(node.high, v, v_level)?;
        let r = self.mk_node(node.var, low, high)?;
        self.exists_cache.insert((f, v), r);
        Ok(r)
    }

    /// Follow the assignment from the root to a sink.
    pub fn evaluate(&self, f: NodeRef, a: &Assignment) -> Result<bool, BddError> {
        let mut cur = f;
        while !cur.is_terminal() {
            let node = self.node(cur);
            match a.get(node.var) {
                Some(true) => cur = node.high,
                Some(false) => cur = node.low,
                None => return Err(BddError::UnassignedVariable(node.var)),
            }
        }
        Ok(cur.is_true())
    }

    /// Number of distinct nodes reachable from f, terminals included.
    pub fn node_count(&self, f: NodeRef) -> u64 {
        let mut walk = self.walk.borrow_mut();
        let generation = walk.begin(self.nodes.len());
        let mut count = 0u64;
        let mut terminals = [false, false];
        walk.stack.push(f);
        while let Some(r) = walk.stack.pop() {
            if r.is_terminal() {
                terminals[r.0 as usize] = true;
                continue;
            }
            if walk.marks[r.slot()] == generation {
                continue;
            }
            walk.marks[r.slot()] = generation;
            count += 1;
            let node = self.node(r);
            walk.stack.push(node.low);
            walk.stack.push(node.high);
        }
        count + terminals.iter().filter(|&&t| t).count() as u64
    }

    /// Per-variable counts of reachable nodes labeled by that variable.
    pub fn level_widths(&self, f: NodeRef) -> BTreeMap<VarId, u64> {
        let mut widths = BTreeMap::new();
        let mut walk = self.walk.borrow_mut();
        let generation = walk.begin(self.nodes.len());
        walk.stack.push(f);
        while let Some(r) = walk.stack.pop() {
            if r.is_terminal() || walk.marks[r.slot()] == generation {
                continue;
            }
            walk.marks[r.slot()] = generation;
            let node = self.node(r);
            *widths.entry(node.var).or_insert(0) += 1;
            walk.stack.push(node.low);
            walk.stack.push(node.high);
        }
        widths
    }

    /// Variables the function structurally depends on, in no particular
    /// order (but deterministic for a given diagram).
    pub fn support(&self, f: NodeRef) -> Vec<VarId> {
        let mut seen_levels = Vec::new();
        let mut walk = self.walk.borrow_mut();
        let generation = walk.begin(self.nodes.len());
        walk.stack.push(f);
        while let Some(r) = walk.stack.pop() {
            if r.is_terminal() || walk.marks[r.slot()] == generation {
                continue;
            }
            walk.marks[r.slot()] = generation;
            let node = self.node(r);
            seen_levels.push(node.var);
            walk.stack.push(node.low);
            walk.stack.push(node.high);
        }
        seen_levels.sort_unstable();
        seen_levels.dedup();
        seen_levels
    }

    /// Free every node not reachable from `roots` and drop all operation
    /// caches. Handles to freed nodes must not be used afterwards.
    pub fn clear_dead(&mut self, roots: &[NodeRef]) {
        let generation = {
            let mut walk = self.walk.borrow_mut();
            let generation = walk.begin(self.nodes.len());
            for &root in roots {
                walk.stack.push(root);
            }
            while let Some(r) = walk.stack.pop() {
                if r.is_terminal() || walk.marks[r.slot()] == generation {
                    continue;
                }
                walk.marks[r.slot()] = generation;
                let node = self.nodes[r.slot()];
                walk.stack.push(node.low);
                walk.stack.push(node.high);
            }
            generation
        };
        let marks = &self.walk.borrow().marks;
        for slot in (0..self.nodes.len()).rev() {
            if self.allocated[slot] && marks[slot] != generation {
                let node = self.nodes[slot];
                self.unique.remove(&(node.var, node.low, node.high));
                self.allocated[slot] = false;
                self.free.push(NodeRef::from_slot(slot).0);
                self.live -= 1;
            }
        }
        self.and_cache.clear();
        self.or_cache.clear();
        self.not_cache.clear();
        self.restrict_cache.clear();
        self.exists_cache.clear();
    }

    /// Walk from `roots` and verify the reduced/ordered/unique invariants on
    /// every reachable node.
    pub fn check_invariants(&self, roots: &[NodeRef]) -> Result<(), String> {
        let mut seen: HashMap<(VarId, NodeRef, NodeRef), NodeRef> = HashMap::new();
        let mut walk = self.walk.borrow_mut();
        let generation = walk.begin(self.nodes.len());
        for &root in roots {
            walk.stack.push(root);
        }
        while let Some(r) = walk.stack.pop() {
            if r.is_terminal() || walk.marks[r.slot()] == generation {
                continue;
            }
            walk.marks[r.slot()] = generation;
            if !self.allocated[r.slot()] {
                return Err(format!("reachable node {:?} is not allocated", r));
            }
            let node = self.node(r);
            if node.low == node.high {
                return Err(format!("node {:?} is redundant (low == high)", r));
            }
            let my_level = self
                .order
                .position(node.var)
                .ok_or_else(|| format!("node {:?} labeled by unknown variable {}", r, node.var))?;
            for child in [node.low, node.high] {
                if !child.is_terminal() {
                    let child_level = self.order.position(self.node(child).var).unwrap();
                    if child_level <= my_level {
                        return Err(format!(
                            "edge {:?} -> {:?} violates the variable order",
                            r, child
                        ));
                    }
                }
            }
            if let Some(&other) = seen.get(&(node.var, node.low, node.high)) {
                return Err(format!(
                    "nodes {:?} and {:?} share the triple ({}, {:?}, {:?})",
                    other, r, node.var, node.low, node.high
                ));
            }
            seen.insert((node.var, node.low, node.high), r);
            walk.stack.push(node.low);
            walk.stack.push(node.high);
        }
        Ok(())
    }

    /// DOT rendering of the diagram rooted at f: solid high-edges, dashed
    /// low-edges.
    pub fn to_dot(&self, f: NodeRef) -> String {
        let mut reachable = Vec::new();
        {
            let mut walk = self.walk.borrow_mut();
            let generation = walk.begin(self.nodes.len());
            walk.stack.push(f);
            while let Some(r) = walk.stack.pop() {
                if r.is_terminal() || walk.marks[r.slot()] == generation {
                    continue;
                }
                walk.marks[r.slot()] = generation;
                reachable.push(r);
                let node = self.node(r);
                walk.stack.push(node.low);
                walk.stack.push(node.high);
            }
        }
        reachable.sort_unstable();
        let mut out = String::from("digraph bdd {\n");
        let _ = writeln!(out, "  n0 [label=\"0\", shape=box];");
        let _ = writeln!(out, "  n1 [label=\"1\", shape=box];");
        for r in reachable {
            let node = self.node(r);
            let _ = writeln!(out, "  n{} [label=\"x{}\"];", r.0, node.var);
            let _ = writeln!(out, "  n{} -> n{} [style=solid];", r.0, node.high.0);
            let _ = writeln!(out, "  n{} -> n{} [style=dashed];", r.0, node.low.0);
        }
        out.push_str("}\n");
        out
    }
}
