//! Instance generators: pigeonhole formulas over bipartite graphs, the
//! matrix variable orders, the and-or chain family, and seeded random CNFs
//! for oracle fuzzing. All output is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bdd::{VarId, VarOrder};
use crate::cnf::{Clause, CnfFormula, Literal, NameMap, BRUTE_FORCE_VAR_LIMIT};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("edge ({0}, {1}) is out of range")]
    EdgeOutOfRange(u32, u32),
    #[error("row/col orders need a matrix-structured formula (no name map present)")]
    MissingNameMap,
    #[error("malformed graph file: {0}")]
    MalformedGraph(String),
    #[error("malformed order file: {0}")]
    MalformedOrder(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Bipartite graph on color classes A = [a_size] and B = [b_size], both
/// 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    a_size: u32,
    b_size: u32,
    edges: BTreeSet<(u32, u32)>,
}

impl BipartiteGraph {
    pub fn new(
        a_size: u32,
        b_size: u32,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<BipartiteGraph, GenError> {
        let edges: BTreeSet<(u32, u32)> = edges.into_iter().collect();
        for &(i, j) in &edges {
            if i < 1 || i > a_size || j < 1 || j > b_size {
                return Err(GenError::EdgeOutOfRange(i, j));
            }
        }
        Ok(BipartiteGraph {
            a_size,
            b_size,
            edges,
        })
    }

    /// The complete bipartite graph K_{a,b}.
    pub fn complete(a_size: u32, b_size: u32) -> BipartiteGraph {
        let edges = (1..=a_size)
            .flat_map(|i| (1..=b_size).map(move |j| (i, j)))
            .collect();
        BipartiteGraph {
            a_size,
            b_size,
            edges,
        }
    }

    pub fn a_size(&self) -> u32 {
        self.a_size
    }

    pub fn b_size(&self) -> u32 {
        self.b_size
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, i: u32, j: u32) -> bool {
        self.edges.contains(&(i, j))
    }

    /// Neighbors of A-vertex i, ascending.
    pub fn neighbors_of_a(&self, i: u32) -> Vec<u32> {
        self.edges
            .range((i, 0)..(i + 1, 0))
            .map(|&(_, j)| j)
            .collect()
    }

    /// Neighbors of B-vertex j, ascending.
    pub fn neighbors_of_b(&self, j: u32) -> Vec<u32> {
        self.edges
            .iter()
            .filter(|&&(_, jj)| jj == j)
            .map(|&(i, _)| i)
            .collect()
    }
}

/// How a variable order is specified on the command line: the two matrix
/// orders, or an explicit permutation file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderSpec {
    Row,
    Col,
    File(PathBuf),
}

impl FromStr for OrderSpec {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<OrderSpec, Self::Err> {
        Ok(match s {
            "row" => OrderSpec::Row,
            "col" => OrderSpec::Col,
            other => OrderSpec::File(PathBuf::from(other)),
        })
    }
}

impl OrderSpec {
    pub fn resolve(&self, f: &CnfFormula) -> Result<VarOrder, GenError> {
        match self {
            OrderSpec::Row => row_order(f),
            OrderSpec::Col => col_order(f),
            OrderSpec::File(path) => {
                let text = std::fs::read_to_string(path)?;
                parse_order(&text, f.num_vars())
            }
        }
    }
}

/// The pigeonhole formula with n pigeons and n+1 holes: variable p_{i,j}
/// (pigeon i sits in hole j) gets id (i-1)(n+1)+j. Unsatisfiable for every
/// n.
pub fn php(n: u32) -> Result<CnfFormula, GenError> {
    if n < 1 {
        return Err(GenError::InvalidParameter("php needs n >= 1".to_string()));
    }
    let formula = gphp(&BipartiteGraph::complete(n, n + 1))?;
    Ok(formula)
}

/// The pigeonhole formula over an arbitrary bipartite graph: one variable
/// per edge, at-least-one clause per B-vertex, at-most-one clause per pair
/// of edges sharing an A-vertex. Variables are numbered in row-major edge
/// order and mapped back to (i, j) in the name map.
pub fn gphp(g: &BipartiteGraph) -> Result<CnfFormula, GenError> {
    let mut var_of_edge = BTreeMap::new();
    let mut name_map = NameMap::new();
    for (next, (i, j)) in g.edges().enumerate() {
        let var = VarId::new(next as u32 + 1);
        var_of_edge.insert((i, j), var);
        name_map.insert(var, (i, j));
    }
    let mut clauses = Vec::new();
    for j in 1..=g.b_size() {
        let neighbors = g.neighbors_of_b(j);
        if neighbors.is_empty() {
            log::warn!("B-vertex {} is isolated; emitting an empty clause", j);
        }
        clauses.push(Clause::new(
            neighbors
                .iter()
                .map(|&i| Literal::positive(var_of_edge[&(i, j)]))
                .collect(),
        ));
    }
    for i in 1..=g.a_size() {
        let neighbors = g.neighbors_of_a(i);
        for (a, &j) in neighbors.iter().enumerate() {
            for &k in &neighbors[a + 1..] {
                clauses.push(Clause::new(vec![
                    Literal::negative(var_of_edge[&(i, j)]),
                    Literal::negative(var_of_edge[&(i, k)]),
                ]));
            }
        }
    }
    CnfFormula::with_name_map(g.edge_count() as u32, clauses, name_map)
        .map_err(|e| GenError::InvalidParameter(e.to_string()))
}

/// The sparse family behind the exponential lower bound: A = [2n],
/// B = [2n+1], six edges per j in [n]. B-vertices 1..n see only {j, n+j};
/// vertex n+1 sees all of A.
pub fn theorem2_graph(n: u32) -> Result<BipartiteGraph, GenError> {
    if n < 1 {
        return Err(GenError::InvalidParameter(
            "theorem2_graph needs n >= 1".to_string(),
        ));
    }
    let mut edges = BTreeSet::new();
    for j in 1..=n {
        edges.insert((j, j));
        edges.insert((n + j, j));
        edges.insert((j, n + 1 + j));
        edges.insert((n + j, n + 1 + j));
        edges.insert((j, n + 1));
        edges.insert((n + j, n + 1));
    }
    BipartiteGraph::new(2 * n, 2 * n + 1, edges)
}

fn matrix_order(f: &CnfFormula, key: impl Fn(u32, u32) -> (u32, u32)) -> Result<VarOrder, GenError> {
    let name_map = f.name_map().ok_or(GenError::MissingNameMap)?;
    if name_map.len() != f.num_vars() as usize {
        return Err(GenError::MissingNameMap);
    }
    let mut vars: Vec<(u32, u32, VarId)> = name_map
        .iter()
        .map(|(&v, &(i, j))| {
            let (a, b) = key(i, j);
            (a, b, v)
        })
        .collect();
    vars.sort_unstable();
    VarOrder::new(vars.into_iter().map(|(_, _, v)| v).collect())
        .map_err(|e| GenError::InvalidParameter(e.to_string()))
}

/// Variables sorted row by row: by (i, j).
pub fn row_order(f: &CnfFormula) -> Result<VarOrder, GenError> {
    matrix_order(f, |i, j| (i, j))
}

/// Variables sorted column by column: by (j, i).
pub fn col_order(f: &CnfFormula) -> Result<VarOrder, GenError> {
    matrix_order(f, |i, j| (j, i))
}

/// The conjunction of x_i ∨ y_i for i in [n], with x_i = i and y_i = n+i,
/// plus the two orders whose BDD sizes differ exponentially: blockwise
/// (all x before all y) and interleaved.
pub fn and_or_chain(n: u32) -> Result<(CnfFormula, VarOrder, VarOrder), GenError> {
    if n < 1 {
        return Err(GenError::InvalidParameter(
            "and_or_chain needs n >= 1".to_string(),
        ));
    }
    let clauses = (1..=n)
        .map(|i| {
            Clause::new(vec![
                Literal::positive(VarId::new(i)),
                Literal::positive(VarId::new(n + i)),
            ])
        })
        .collect();
    let formula = CnfFormula::new(2 * n, clauses)
        .map_err(|e| GenError::InvalidParameter(e.to_string()))?;
    let blockwise = VarOrder::new((1..=2 * n).map(VarId::new).collect())
        .expect("blockwise order is a permutation");
    let interleaved = VarOrder::new(
        (1..=n)
            .flat_map(|i| [VarId::new(i), VarId::new(n + i)])
            .collect(),
    )
    .expect("interleaved order is a permutation");
    Ok((formula, blockwise, interleaved))
}

/// A seeded random CNF for fuzzing against the brute-force oracle. Each
/// clause draws a length in [1, max_clause_len], distinct variables, and
/// independent polarities.
pub fn random_cnf(
    num_vars: u32,
    num_clauses: u32,
    max_clause_len: u32,
    seed: u64,
) -> Result<CnfFormula, GenError> {
    if num_vars < 1 || num_vars > BRUTE_FORCE_VAR_LIMIT {
        return Err(GenError::InvalidParameter(format!(
            "random_cnf needs 1 <= num_vars <= {}",
            BRUTE_FORCE_VAR_LIMIT
        )));
    }
    if max_clause_len < 1 {
        return Err(GenError::InvalidParameter(
            "random_cnf needs max_clause_len >= 1".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = max_clause_len.min(num_vars) as usize;
    let mut clauses = Vec::with_capacity(num_clauses as usize);
    for _ in 0..num_clauses {
        let len = rng.random_range(1..=max_len);
        let mut vars = BTreeSet::new();
        while vars.len() < len {
            vars.insert(rng.random_range(1..=num_vars));
        }
        let literals = vars
            .into_iter()
            .map(|v| Literal::new(VarId::new(v), rng.random_bool(0.5)))
            .collect();
        clauses.push(Clause::new(literals));
    }
    CnfFormula::new(num_vars, clauses).map_err(|e| GenError::InvalidParameter(e.to_string()))
}

/// Parse a graph file: '#' starts a comment, the first data line is
/// "a_size b_size", every further line one "i j" edge.
pub fn parse_graph(text: &str) -> Result<BipartiteGraph, GenError> {
    let mut sizes: Option<(u32, u32)> = None;
    let mut edges = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(GenError::MalformedGraph(format!(
                "expected two integers, got {:?}",
                line
            )));
        }
        let a: u32 = fields[0]
            .parse()
            .map_err(|_| GenError::MalformedGraph(format!("bad integer {:?}", fields[0])))?;
        let b: u32 = fields[1]
            .parse()
            .map_err(|_| GenError::MalformedGraph(format!("bad integer {:?}", fields[1])))?;
        if sizes.is_none() {
            sizes = Some((a, b));
        } else {
            edges.push((a, b));
        }
    }
    let (a_size, b_size) =
        sizes.ok_or_else(|| GenError::MalformedGraph("missing size line".to_string()))?;
    BipartiteGraph::new(a_size, b_size, edges)
}

/// Parse an order file: whitespace-separated permutation of 1..=num_vars.
pub fn parse_order(text: &str, num_vars: u32) -> Result<VarOrder, GenError> {
    let mut sequence = Vec::new();
    for token in text.split_whitespace() {
        let index: u32 = token
            .parse()
            .map_err(|_| GenError::MalformedOrder(format!("bad integer {:?}", token)))?;
        if index < 1 || index > num_vars {
            return Err(GenError::MalformedOrder(format!(
                "variable {} out of range 1..={}",
                index, num_vars
            )));
        }
        sequence.push(VarId::new(index));
    }
    let order = VarOrder::new(sequence).map_err(|e| GenError::MalformedOrder(e.to_string()))?;
    if !order.covers_exactly(num_vars) {
        return Err(GenError::MalformedOrder(format!(
            "order must be a permutation of 1..={}",
            num_vars
        )));
    }
    Ok(order)
}
