//! CNF formulas, DIMACS I/O, restriction by partial assignments, clause
//! compilation to BDDs, and a small brute-force satisfiability oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::bdd::{BddError, Manager, NodeRef, VarId};

/// Exhaustive enumeration beyond this many variables is pointless at desk
/// scale, so `brute_force_sat` refuses it.
pub const BRUTE_FORCE_VAR_LIMIT: u32 = 24;

#[derive(Debug, Error)]
pub enum CnfError {
    #[error("malformed DIMACS header: {0}")]
    MalformedHeader(String),
    #[error("literal {literal} out of range for {num_vars} variables")]
    LiteralOutOfRange { literal: i64, num_vars: u32 },
    #[error("clause not terminated by 0 at end of input")]
    MissingTerminator,
    #[error("unparsable token {0:?} in clause data")]
    InvalidToken(String),
    #[error("variable {var} exceeds declared count {num_vars}")]
    VariableOutOfRange { var: VarId, num_vars: u32 },
    #[error("name map is not injective: two variables share coordinates ({0}, {1})")]
    NameMapNotInjective(u32, u32),
    #[error("{num_vars} variables exceed the brute-force limit of {limit}")]
    TooManyVariables { num_vars: u32, limit: u32 },
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Literal {
    pub var: VarId,
    pub positive: bool,
}

impl Literal {
    pub fn new(var: VarId, positive: bool) -> Literal {
        Literal { var, positive }
    }

    pub fn positive(var: VarId) -> Literal {
        Literal::new(var, true)
    }

    pub fn negative(var: VarId) -> Literal {
        Literal::new(var, false)
    }

    pub fn negated(self) -> Literal {
        Literal::new(self.var, !self.positive)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var.index());
        if self.positive {
            v
        } else {
            -v
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals. Duplicates are dropped at construction; a
/// clause mentioning both polarities of a variable is kept but flagged
/// tautological.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Clause {
    literals: Vec<Literal>,
    tautological: bool,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Clause {
        let mut seen = BTreeSet::new();
        let mut kept = Vec::with_capacity(literals.len());
        let mut tautological = false;
        for lit in literals {
            if !seen.insert((lit.var, lit.positive)) {
                continue;
            }
            if seen.contains(&(lit.var, !lit.positive)) {
                tautological = true;
            }
            kept.push(lit);
        }
        Clause {
            literals: kept,
            tautological,
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn is_tautological(&self) -> bool {
        self.tautological
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }
}

/// Matrix coordinates (row i, column j) for a variable of a
/// matrix-structured formula.
pub type NameMap = BTreeMap<VarId, (u32, u32)>;

#[derive(Clone, Debug)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
    name_map: Option<NameMap>,
    comments: Vec<String>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<CnfFormula, CnfError> {
        for clause in &clauses {
            for lit in clause.literals() {
                if lit.var.index() > num_vars {
                    return Err(CnfError::VariableOutOfRange {
                        var: lit.var,
                        num_vars,
                    });
                }
            }
        }
        Ok(CnfFormula {
            num_vars,
            clauses,
            name_map: None,
            comments: Vec::new(),
        })
    }

    pub fn with_name_map(
        num_vars: u32,
        clauses: Vec<Clause>,
        name_map: NameMap,
    ) -> Result<CnfFormula, CnfError> {
        let mut f = CnfFormula::new(num_vars, clauses)?;
        let mut coords = BTreeSet::new();
        for (&var, &(i, j)) in &name_map {
            if var.index() > num_vars {
                return Err(CnfError::VariableOutOfRange {
                    var,
                    num_vars,
                });
            }
            if !coords.insert((i, j)) {
                return Err(CnfError::NameMapNotInjective(i, j));
            }
        }
        f.name_map = Some(name_map);
        Ok(f)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn name_map(&self) -> Option<&NameMap> {
        self.name_map.as_ref()
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn push_comment(&mut self, text: impl Into<String>) {
        self.comments.push(text.into());
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(|c| c.is_empty())
    }

    /// All variable ids from 1 to num_vars, whether or not they occur in a
    /// clause.
    pub fn variables(&self) -> impl Iterator<Item = VarId> + '_ {
        (1..=self.num_vars).map(VarId::new)
    }

    /// Same variable count and same clause list; comments and the name map
    /// are ignored.
    pub fn structural_eq(&self, other: &CnfFormula) -> bool {
        self.num_vars == other.num_vars && self.clauses == other.clauses
    }
}

/// Parse DIMACS CNF text: 'c' comment lines, one "p cnf V C" header, then
/// clauses as 0-terminated signed integers. A mismatch between C and the
/// actual clause count is tolerated with a warning; the parsed clauses win.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let mut comments = Vec::new();
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    let mut clause_open = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            comments.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(CnfError::MalformedHeader("second 'p' line".to_string()));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(CnfError::MalformedHeader(line.to_string()));
            }
            let num_vars: u32 = fields[2]
                .parse()
                .map_err(|_| CnfError::MalformedHeader(line.to_string()))?;
            let num_clauses: usize = fields[3]
                .parse()
                .map_err(|_| CnfError::MalformedHeader(line.to_string()))?;
            header = Some((num_vars, num_clauses));
            continue;
        }
        let (num_vars, _) = header.ok_or_else(|| {
            CnfError::MalformedHeader("clause data before 'p cnf' header".to_string())
        })?;
        for token in line.split_whitespace() {
            let literal: i64 = token
                .parse()
                .map_err(|_| CnfError::InvalidToken(token.to_string()))?;
            if literal == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
                clause_open = false;
                continue;
            }
            if literal.unsigned_abs() > u64::from(num_vars) {
                return Err(CnfError::LiteralOutOfRange { literal, num_vars });
            }
            current.push(Literal::new(
                VarId::new(literal.unsigned_abs() as u32),
                literal > 0,
            ));
            clause_open = true;
        }
    }
    if clause_open {
        return Err(CnfError::MissingTerminator);
    }
    let (num_vars, declared) =
        header.ok_or_else(|| CnfError::MalformedHeader("missing 'p cnf' header".to_string()))?;
    if clauses.len() != declared {
        log::warn!(
            "DIMACS header declares {} clauses but {} were parsed; using the parsed clauses",
            declared,
            clauses.len()
        );
    }
    let mut formula = CnfFormula::new(num_vars, clauses)?;
    formula.comments = comments;
    Ok(formula)
}

/// Render a formula as DIMACS text. Comments come first, one 'c' line each,
/// so `parse_dimacs(write_dimacs(f))` structurally equals f.
pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut out = String::new();
    for comment in f.comments() {
        if comment.is_empty() {
            out.push_str("c\n");
        } else {
            let _ = writeln!(out, "c {}", comment);
        }
    }
    let _ = writeln!(out, "p cnf {} {}", f.num_vars(), f.clauses().len());
    for clause in f.clauses() {
        for lit in clause.literals() {
            let _ = write!(out, "{} ", lit.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

/// Restrict f by the partial assignment a: drop clauses with a satisfied
/// literal, delete falsified literals from the rest. The variable count is
/// unchanged; the result may contain an empty clause.
pub fn restrict_cnf(f: &CnfFormula, a: &Assignment) -> CnfFormula {
    let mut clauses = Vec::new();
    'next_clause: for clause in f.clauses() {
        let mut kept = Vec::with_capacity(clause.len());
        for &lit in clause.literals() {
            match a.get(lit.var) {
                Some(value) if value == lit.positive => continue 'next_clause,
                Some(_) => {}
                None => kept.push(lit),
            }
        }
        clauses.push(Clause::new(kept));
    }
    let mut restricted =
        CnfFormula::new(f.num_vars(), clauses).expect("restriction introduces no variables");
    restricted.name_map = f.name_map.clone();
    restricted
}

/// Compile one clause to the BDD of its disjunction. A non-tautological
/// k-literal clause is a path: k internal nodes plus the two terminals.
pub fn clause_to_bdd(m: &mut Manager, c: &Clause) -> Result<NodeRef, BddError> {
    let mut acc = m.zero();
    for lit in c.literals() {
        let l = m.literal(lit.var, lit.positive)?;
        acc = m.or(acc, l)?;
    }
    Ok(acc)
}

/// A partial map from variables to truth values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<VarId, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, bool)>) -> Assignment {
        Assignment {
            values: pairs.into_iter().collect(),
        }
    }

    pub fn set(&mut self, var: VarId, value: bool) {
        self.values.insert(var, value);
    }

    pub fn get(&self, var: VarId) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }
}

/// Exhaustive satisfiability check, guarded to at most
/// [`BRUTE_FORCE_VAR_LIMIT`] variables.
pub fn brute_force_sat(f: &CnfFormula) -> Result<bool, CnfError> {
    if f.num_vars() > BRUTE_FORCE_VAR_LIMIT {
        return Err(CnfError::TooManyVariables {
            num_vars: f.num_vars(),
            limit: BRUTE_FORCE_VAR_LIMIT,
        });
    }
    if f.has_empty_clause() {
        return Ok(false);
    }
    let assignments: u64 = 1 << f.num_vars();
    'next_assignment: for mask in 0..assignments {
        for clause in f.clauses() {
            if clause.is_tautological() {
                continue;
            }
            let satisfied = clause
                .literals()
                .iter()
                .any(|lit| (mask >> (lit.var.index() - 1)) & 1 == u64::from(lit.positive));
            if !satisfied {
                continue 'next_assignment;
            }
        }
        return Ok(true);
    }
    Ok(false)
}
