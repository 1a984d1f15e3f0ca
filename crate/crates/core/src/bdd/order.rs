//! Variables and variable orders.

use std::fmt;

use thiserror::Error;

/// A propositional variable, numbered from 1 as in DIMACS files.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct VarId(u32);

impl VarId {
    pub fn new(index: u32) -> Self {
        assert!(index >= 1, "variable indices start at 1");
        VarId(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("variable {0} appears more than once in the order")]
    DuplicateVariable(VarId),
}

/// A total order on a set of variables, i.e. a permutation of that set.
///
/// `position` is the 0-based level of a variable; level 0 is the topmost
/// variable of any BDD under this order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarOrder {
    sequence: Vec<VarId>,
    // Indexed by var index - 1; u32::MAX marks a variable not in the order.
    positions: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl VarOrder {
    pub fn new(sequence: Vec<VarId>) -> Result<Self, OrderError> {
        let max_index = sequence.iter().map(|v| v.index()).max().unwrap_or(0);
        let mut positions = vec![ABSENT; max_index as usize];
        for (level, v) in sequence.iter().enumerate() {
            let slot = &mut positions[(v.index() - 1) as usize];
            if *slot != ABSENT {
                return Err(OrderError::DuplicateVariable(*v));
            }
            *slot = level as u32;
        }
        Ok(VarOrder { sequence, positions })
    }

    /// The natural order 1, 2, ..., num_vars.
    pub fn identity(num_vars: u32) -> Self {
        VarOrder::new((1..=num_vars).map(VarId::new).collect()).unwrap()
    }

    pub fn position(&self, v: VarId) -> Option<usize> {
        match self.positions.get((v.index() - 1) as usize) {
            Some(&p) if p != ABSENT => Some(p as usize),
            _ => None,
        }
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.position(v).is_some()
    }

    /// The variable at the given level. Panics if out of range.
    pub fn var_at(&self, level: usize) -> VarId {
        self.sequence[level]
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VarId> + '_ {
        self.sequence.iter().copied()
    }

    pub fn as_slice(&self) -> &[VarId] {
        &self.sequence
    }

    /// True iff the order is a permutation of exactly {1, ..., num_vars}.
    pub fn covers_exactly(&self, num_vars: u32) -> bool {
        self.sequence.len() == num_vars as usize
            && (1..=num_vars).all(|i| self.contains(VarId::new(i)))
    }

    /// True iff both orders cover the same variable set.
    pub fn same_variables(&self, other: &VarOrder) -> bool {
        self.sequence.len() == other.sequence.len()
            && self.sequence.iter().all(|&v| other.contains(v))
    }
}
