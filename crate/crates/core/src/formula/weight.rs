use std::fmt;
use std::ops::Add;

use num_traits::{Signed, Zero};

use super::atom::Clause;
use super::rational::Rational;
use super::var::VarTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseId(pub u32);

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Pair-valued cost `(bound cost, soft cost)`, ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CostPair {
    pub bound: Rational,
    pub soft: Rational,
}

impl CostPair {
    pub fn new(bound: Rational, soft: Rational) -> Self {
        Self { bound, soft }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn bound_only(w: Rational) -> Self {
        Self::new(w, Rational::zero())
    }

    pub fn soft_only(w: Rational) -> Self {
        Self::new(Rational::zero(), w)
    }

    pub fn is_zero(&self) -> bool {
        self.bound.is_zero() && self.soft.is_zero()
    }

    pub fn add(&self, other: &CostPair) -> CostPair {
        CostPair::new(&self.bound + &other.bound, &self.soft + &other.soft)
    }

    pub fn sub(&self, other: &CostPair) -> CostPair {
        CostPair::new(&self.bound - &other.bound, &self.soft - &other.soft)
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.bound.is_negative() && !self.soft.is_negative()
    }
}

impl Add for CostPair {
    type Output = CostPair;
    fn add(self, rhs: CostPair) -> CostPair {
        CostPair::new(self.bound + rhs.bound, self.soft + rhs.soft)
    }
}

impl fmt::Display for CostPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.bound, self.soft)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Weight {
    Hard,
    Soft(CostPair),
}

impl Weight {
    pub fn is_hard(&self) -> bool {
        matches!(self, Weight::Hard)
    }

    pub fn soft(&self) -> Option<&CostPair> {
        match self {
            Weight::Hard => None,
            Weight::Soft(w) => Some(w),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedClause {
    pub clause: Clause,
    pub weight: Weight,
    pub id: ClauseId,
}

/// A clause set over a variable table; clause ids are positions.
#[derive(Clone, Debug, Default)]
pub struct WeightedFormula {
    pub vars: VarTable,
    pub clauses: Vec<WeightedClause>,
}

impl WeightedFormula {
    pub fn new(vars: VarTable) -> Self {
        Self {
            vars,
            clauses: Vec::new(),
        }
    }

    pub fn push(&mut self, clause: Clause, weight: Weight) -> ClauseId {
        if let Weight::Soft(w) = &weight {
            assert!(
                w.is_nonnegative() && !w.is_zero(),
                "soft weight must be non-negative and non-zero"
            );
        }
        let id = ClauseId(self.clauses.len() as u32);
        self.clauses.push(WeightedClause { clause, weight, id });
        id
    }

    pub fn add_hard(&mut self, clause: Clause) -> ClauseId {
        self.push(clause, Weight::Hard)
    }

    pub fn add_soft(&mut self, clause: Clause, weight: CostPair) -> ClauseId {
        self.push(clause, Weight::Soft(weight))
    }

    pub fn hard(&self) -> impl Iterator<Item = &WeightedClause> + '_ {
        self.clauses.iter().filter(|c| c.weight.is_hard())
    }

    pub fn soft(&self) -> impl Iterator<Item = &WeightedClause> + '_ {
        self.clauses.iter().filter(|c| !c.weight.is_hard())
    }

    pub fn has_soft(&self) -> bool {
        self.soft().next().is_some()
    }

    pub fn is_linear(&self) -> bool {
        self.clauses.iter().all(|c| c.clause.is_linear())
    }
}
