//! Formula language: exact polynomials, atoms, clauses, weights and models.

mod atom;
mod model;
mod poly;
pub mod rational;
mod var;
mod weight;

pub use atom::{Atom, AtomNorm, Clause, Literal, Rel};
pub use model::{check_model, EvalError, Model};
pub use poly::{eval_monomial_at, Monomial, Polynomial};
pub use rational::Rational;
pub use var::{SlackKind, Sort, VarId, VarInfo, VarOrigin, VarTable};
pub use weight::{ClauseId, CostPair, Weight, WeightedClause, WeightedFormula};
