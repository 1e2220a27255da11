use num_traits::{One, Zero};
use thiserror::Error;

use super::rational::{is_integral, Rational};
use super::var::{Sort, VarId, VarTable};
use super::weight::{CostPair, Weight, WeightedClause};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable {0} has no value in the model")]
    Unassigned(VarId),
    #[error("variable {0} does not occur in the monomial")]
    NotInMonomial(VarId),
}

/// Assignment of rational values to variables; Bool variables hold 0 or 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    values: Vec<Option<Rational>>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: VarId) -> Option<&Rational> {
        self.values.get(v.index()).and_then(Option::as_ref)
    }

    pub fn set(&mut self, v: VarId, value: Rational) {
        if self.values.len() <= v.index() {
            self.values.resize(v.index() + 1, None);
        }
        self.values[v.index()] = Some(value);
    }

    pub fn set_bool(&mut self, v: VarId, value: bool) {
        self.set(v, if value { Rational::one() } else { Rational::zero() });
    }

    pub fn get_bool(&self, v: VarId) -> Option<bool> {
        self.get(v).map(|r| !r.is_zero())
    }

    pub fn unset(&mut self, v: VarId) {
        if let Some(slot) = self.values.get_mut(v.index()) {
            *slot = None;
        }
    }

    pub fn assigned(&self) -> impl Iterator<Item = (VarId, &Rational)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|r| (VarId(i as u32), r)))
    }

    /// Copy restricted to the given variables.
    pub fn project(&self, vars: impl IntoIterator<Item = VarId>) -> Model {
        let mut out = Model::new();
        for v in vars {
            if let Some(r) = self.get(v) {
                out.set(v, r.clone());
            }
        }
        out
    }

    /// Checks that Int variables carry integers and Bool variables 0/1.
    pub fn respects_sorts(&self, vars: &VarTable) -> bool {
        self.assigned().all(|(v, r)| {
            if v.index() >= vars.len() {
                return true;
            }
            match vars.sort(v) {
                Sort::Int => is_integral(r),
                Sort::Bool => r.is_zero() || r.is_one(),
                Sort::Real => true,
            }
        })
    }
}

/// Evaluates a weighted formula: whether every hard clause holds, and the
/// component-wise sum of the weights of falsified soft clauses.
pub fn check_model(
    clauses: &[WeightedClause],
    m: &Model,
) -> Result<(bool, CostPair), EvalError> {
    let mut holds = true;
    let mut cost = CostPair::zero();
    for wc in clauses {
        let sat = wc.clause.eval(m)?;
        match &wc.weight {
            Weight::Hard => holds &= sat,
            Weight::Soft(w) => {
                if !sat {
                    cost = cost.add(w);
                }
            }
        }
    }
    Ok((holds, cost))
}
