//! Decision procedure for quantifier-free linear arithmetic over Int and Real
//! variables, with unsatisfiable cores.

mod delta;
mod heap;
mod simplex;
mod solver;

use std::time::{Duration, Instant};

use thiserror::Error;

pub use delta::Delta;
pub use simplex::{Simplex, Unbounded};
pub use solver::{CostConstraint, Lit, Lowered, Msc, Outcome, Solver, SolverStats};

use crate::formula::{Clause, Literal, Model, VarTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiaError {
    #[error("non-linear atom given to the linear solver: {0}")]
    NonLinear(String),
    #[error("Boolean variable {0} used in arithmetic")]
    BoolInArithmetic(String),
    #[error("arithmetic variable {0} used as a Boolean literal")]
    NonBoolLiteral(String),
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("internal error: {0}")]
    Internal(String),
}

/// Resource limits; `None` means unlimited.
#[derive(Clone, Debug, Default)]
pub struct Budget {
    pub deadline: Option<Instant>,
    pub max_conflicts: Option<u64>,
    pub max_branches: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn with_timeout(d: Duration) -> Self {
        Self {
            deadline: Some(Instant::now() + d),
            ..Self::default()
        }
    }

    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Indices of input clauses and of assumptions used by a refutation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnsatCore {
    pub clauses: Vec<usize>,
    pub assumptions: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiaResult {
    Sat(Model),
    Unsat(UnsatCore),
    Unknown,
}

impl LiaResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, LiaResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, LiaResult::Unsat(_))
    }
}

pub fn lia_solve(vars: &VarTable, clauses: &[Clause], budget: &Budget) -> Result<LiaResult, LiaError> {
    lia_solve_assuming(vars, clauses, &[], budget)
}

/// Like [`lia_solve`], with extra unit assumptions reported separately in cores.
pub fn lia_solve_assuming(
    vars: &VarTable,
    clauses: &[Clause],
    assumptions: &[Literal],
    budget: &Budget,
) -> Result<LiaResult, LiaError> {
    let mut solver = Solver::new(vars, true);
    for (i, c) in clauses.iter().enumerate() {
        if !c.is_linear() {
            return Err(LiaError::NonLinear(format!("{}", c.display(vars))));
        }
        solver.add_clause(c, vec![i as u32])?;
    }
    let n = clauses.len() as u32;
    for (j, a) in assumptions.iter().enumerate() {
        if !a.is_linear() {
            return Err(LiaError::NonLinear(format!("{}", a.display(vars))));
        }
        solver.add_clause(&Clause::unit(a.clone()), vec![n + j as u32])?;
    }
    match solver.solve(budget)? {
        Outcome::Sat => {
            let m = solver.model();
            for c in clauses.iter().chain(assumptions.iter().map(|a| Clause::unit(a.clone())).collect::<Vec<_>>().iter()) {
                if !c.eval(&m).unwrap_or(false) {
                    return Err(LiaError::Internal(format!(
                        "model violates {}",
                        c.display(vars)
                    )));
                }
            }
            Ok(LiaResult::Sat(m))
        }
        Outcome::Unsat(deps) => {
            let mut core = UnsatCore::default();
            for d in deps {
                if d < n {
                    core.clauses.push(d as usize);
                } else {
                    core.assumptions.push((d - n) as usize);
                }
            }
            Ok(LiaResult::Unsat(core))
        }
        Outcome::Unknown => Ok(LiaResult::Unknown),
    }
}
