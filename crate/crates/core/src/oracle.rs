//! Exhaustive search over an integer box, used to cross-check the solvers.

use thiserror::Error;

use crate::formula::rational::int;
use crate::formula::{check_model, EvalError, Model, Rational, Sort, VarId, WeightedFormula};

/// Largest number of points a single call may enumerate.
pub const MAX_POINTS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("box has {0} points, more than the limit of {MAX_POINTS}")]
    TooLarge(u128),
    #[error("variable {0} is real; only integer and Boolean variables can be enumerated")]
    RealVariable(String),
    #[error("empty box")]
    EmptyBox,
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    /// The first model (in enumeration order) of minimum soft cost.
    Sat { model: Model, cost: Rational },
    NoModelInBox,
}

/// Enumerates every integer point of `[lo, hi]^n` (Booleans range over 0/1)
/// and returns a hard-model of minimum soft cost.
pub fn brute_force_nia(f0: &WeightedFormula, lo: i64, hi: i64) -> Result<OracleResult, OracleError> {
    if lo > hi {
        return Err(OracleError::EmptyBox);
    }
    let vars: Vec<(VarId, i64, i64)> = f0
        .vars
        .iter()
        .map(|(v, info)| match info.sort {
            Sort::Int => Ok((v, lo, hi)),
            Sort::Bool => Ok((v, 0, 1)),
            Sort::Real => Err(OracleError::RealVariable(info.name.clone())),
        })
        .collect::<Result<_, _>>()?;
    let points = vars
        .iter()
        .try_fold(1u128, |acc, &(_, a, b)| acc.checked_mul((b - a + 1) as u128))
        .unwrap_or(u128::MAX);
    if points > MAX_POINTS {
        return Err(OracleError::TooLarge(points));
    }
    let mut point: Vec<i64> = vars.iter().map(|&(_, a, _)| a).collect();
    let mut best: Option<(Model, Rational)> = None;
    loop {
        let mut m = Model::new();
        for (&(v, _, _), &k) in vars.iter().zip(&point) {
            m.set(v, int(k));
        }
        let (holds, cost) = check_model(&f0.clauses, &m)?;
        if holds && best.as_ref().is_none_or(|(_, c)| cost.soft < *c) {
            best = Some((m, cost.soft));
        }
        // Odometer step.
        let mut i = 0;
        loop {
            if i == point.len() {
                return Ok(match best {
                    Some((model, cost)) => OracleResult::Sat { model, cost },
                    None => OracleResult::NoModelInBox,
                });
            }
            if point[i] < vars[i].2 {
                point[i] += 1;
                break;
            }
            point[i] = vars[i].1;
            i += 1;
        }
    }
}
