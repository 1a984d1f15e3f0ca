#![allow(dead_code)]

use std::collections::BTreeMap;

use bucketbdd::{clause_to_bdd, Assignment, Clause, CnfFormula, Manager, NodeRef, VarId, VarOrder};
use rand::Rng;

/// Random Boolean expression trees, the semantic reference for the engine:
/// a BDD built from one must agree with direct evaluation on every
/// assignment.
pub enum Expr {
    Var(u32),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

pub fn random_expr(rng: &mut impl Rng, num_vars: u32, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        return Expr::Var(rng.random_range(1..=num_vars));
    }
    match rng.random_range(0..4u32) {
        0 => Expr::Not(Box::new(random_expr(rng, num_vars, depth - 1))),
        1 | 2 => Expr::And(
            Box::new(random_expr(rng, num_vars, depth - 1)),
            Box::new(random_expr(rng, num_vars, depth - 1)),
        ),
        _ => Expr::Or(
            Box::new(random_expr(rng, num_vars, depth - 1)),
            Box::new(random_expr(rng, num_vars, depth - 1)),
        ),
    }
}

/// Evaluate with variable i reading bit i-1 of the mask.
pub fn eval_expr(e: &Expr, mask: u64) -> bool {
    match e {
        Expr::Var(v) => (mask >> (v - 1)) & 1 == 1,
        Expr::Not(a) => !eval_expr(a, mask),
        Expr::And(a, b) => eval_expr(a, mask) && eval_expr(b, mask),
        Expr::Or(a, b) => eval_expr(a, mask) || eval_expr(b, mask),
    }
}

pub fn expr_to_bdd(m: &mut Manager, e: &Expr) -> NodeRef {
    match e {
        Expr::Var(v) => m.literal(VarId::new(*v), true).unwrap(),
        Expr::Not(a) => {
            let x = expr_to_bdd(m, a);
            m.not(x).unwrap()
        }
        Expr::And(a, b) => {
            let x = expr_to_bdd(m, a);
            let y = expr_to_bdd(m, b);
            m.and(x, y).unwrap()
        }
        Expr::Or(a, b) => {
            let x = expr_to_bdd(m, a);
            let y = expr_to_bdd(m, b);
            m.or(x, y).unwrap()
        }
    }
}

pub fn mask_assignment(num_vars: u32, mask: u64) -> Assignment {
    Assignment::from_pairs((1..=num_vars).map(|i| (VarId::new(i), (mask >> (i - 1)) & 1 == 1)))
}

/// First assignment (as a bit mask) on which the BDD and the reference
/// function disagree, if any.
pub fn function_mismatch(
    m: &Manager,
    f: NodeRef,
    num_vars: u32,
    reference: impl Fn(u64) -> bool,
) -> Option<String> {
    for mask in 0..(1u64 << num_vars) {
        let a = mask_assignment(num_vars, mask);
        let got = m.evaluate(f, &a).unwrap();
        let want = reference(mask);
        if got != want {
            return Some(format!("mask {:#x}: bdd {}, reference {}", mask, got, want));
        }
    }
    None
}

/// Compare the BDD against a reference function on every assignment.
pub fn assert_function_equals(
    m: &Manager,
    f: NodeRef,
    num_vars: u32,
    reference: impl Fn(u64) -> bool,
) {
    if let Some(msg) = function_mismatch(m, f, num_vars, reference) {
        panic!("function disagreement: {}", msg);
    }
}

/// Apply a variable renaming to every literal, keeping clause and literal
/// order. Variables outside the map must not occur in any clause.
pub fn rename_formula(
    f: &CnfFormula,
    map: &BTreeMap<VarId, VarId>,
    new_num_vars: u32,
) -> CnfFormula {
    let clauses = f
        .clauses()
        .iter()
        .map(|c| {
            Clause::new(
                c.literals()
                    .iter()
                    .map(|lit| bucketbdd::Literal::new(map[&lit.var], lit.positive))
                    .collect(),
            )
        })
        .collect();
    CnfFormula::new(new_num_vars, clauses).unwrap()
}

pub struct ReferenceRun {
    pub satisfiable: bool,
    /// Per quantification result, the largest per-variable node count.
    pub quantify_max_widths: Vec<u64>,
}

/// A second, deliberately plain implementation of the bucket loop on top of
/// the public engine ops, used to cross-check the solver and to measure
/// level widths of the intermediate results.
pub fn reference_bucket_run(f: &CnfFormula, bdd: &VarOrder, elim: &VarOrder) -> ReferenceRun {
    let mut m = Manager::new(bdd.clone());
    let mut buckets: Vec<Vec<NodeRef>> = vec![Vec::new(); elim.len()];
    let position = |m: &Manager, b: NodeRef| {
        m.support(b)
            .into_iter()
            .map(|v| elim.position(v).unwrap())
            .min()
    };
    if f.has_empty_clause() {
        return ReferenceRun {
            satisfiable: false,
            quantify_max_widths: Vec::new(),
        };
    }
    for clause in f.clauses() {
        let b = clause_to_bdd(&mut m, clause).unwrap();
        if b.is_true() {
            continue;
        }
        let p = position(&m, b).unwrap();
        buckets[p].push(b);
    }
    let mut widths = Vec::new();
    for idx in 0..elim.len() {
        let contents = std::mem::take(&mut buckets[idx]);
        if contents.is_empty() {
            continue;
        }
        let mut acc = m.one();
        for b in contents {
            acc = m.and(acc, b).unwrap();
            if acc.is_false() {
                return ReferenceRun {
                    satisfiable: false,
                    quantify_max_widths: widths,
                };
            }
        }
        let q = m.exists(acc, elim.var_at(idx)).unwrap();
        if !q.is_terminal() {
            widths.push(m.level_widths(q).values().copied().max().unwrap_or(0));
            let p = position(&m, q).unwrap();
            assert!(p > idx);
            buckets[p].push(q);
        }
        let roots: Vec<NodeRef> = buckets.iter().flatten().copied().collect();
        m.clear_dead(&roots);
    }
    ReferenceRun {
        satisfiable: true,
        quantify_max_widths: widths,
    }
}
