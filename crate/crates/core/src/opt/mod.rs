//! Optimization over linear arithmetic: branch-and-bound Max-SMT with
//! pair-valued weights and a soft-cost threshold, and OMT by cost-variable
//! minimization.

use num_traits::One;

use crate::formula::{Clause, CostPair, Literal, Model, Polynomial, Rational, Sort, VarId, VarTable};
use crate::lia::{Budget, CostConstraint, LiaError, Lowered, Outcome, Solver, SolverStats};

pub use crate::lia::Msc;

#[derive(Clone, Debug)]
pub struct SoftClause {
    pub clause: Clause,
    pub weight: CostPair,
    /// Marks artificial domain bounds, as opposed to user soft clauses.
    pub is_bound: bool,
}

#[derive(Clone, Debug)]
pub struct MaxSmtInstance<'a> {
    pub vars: &'a VarTable,
    pub hard: Vec<Clause>,
    pub soft: Vec<SoftClause>,
    pub msc: Msc,
    /// Seed for the search heuristics; `None` is the fixed default order.
    pub seed: Option<u64>,
}

/// Indices into the instance's hard and soft lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OptimalityCore {
    pub hard_ids: Vec<usize>,
    pub soft_ids: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptResult {
    Optimal {
        model: Model,
        cost: CostPair,
        core: OptimalityCore,
    },
    Unsat,
    Unknown {
        best: Option<(Model, CostPair)>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OmtResult {
    Optimal { model: Model, cost: Rational },
    Unsat,
    Unknown { best: Option<(Model, Rational)> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OptStats {
    pub models: u64,
    pub solver: SolverStats,
}

/// Cost of a model under the soft clauses, or `None` if a hard clause fails.
pub fn evaluate(inst: &MaxSmtInstance<'_>, m: &Model) -> Option<CostPair> {
    if !inst.hard.iter().all(|c| c.eval(m).unwrap_or(false)) {
        return None;
    }
    let mut cost = CostPair::zero();
    for s in &inst.soft {
        if !s.clause.eval(m).unwrap_or(false) {
            cost = cost.add(&s.weight);
        }
    }
    Some(cost)
}

pub fn maxsmt_solve(inst: &MaxSmtInstance<'_>, budget: &Budget) -> Result<OptResult, LiaError> {
    maxsmt_solve_stats(inst, budget).map(|(r, _)| r)
}

fn lower_clause(solver: &mut Solver, c: &Clause) -> Result<Option<Vec<crate::lia::Lit>>, LiaError> {
    let mut lits = Vec::new();
    for l in c.literals() {
        match solver.literal(l)? {
            Lowered::Const(true) => return Ok(None),
            Lowered::Const(false) => {}
            Lowered::Lit(x) => lits.push(x),
        }
    }
    Ok(Some(lits))
}

pub fn maxsmt_solve_stats(
    inst: &MaxSmtInstance<'_>,
    budget: &Budget,
) -> Result<(OptResult, OptStats), LiaError> {
    for c in inst.hard.iter().chain(inst.soft.iter().map(|s| &s.clause)) {
        if !c.is_linear() {
            return Err(LiaError::NonLinear(format!("{}", c.display(inst.vars))));
        }
    }
    let mut solver = Solver::new(inst.vars, true);
    if let Some(seed) = inst.seed {
        solver.set_seed(seed);
    }
    let nh = inst.hard.len() as u32;
    for (i, c) in inst.hard.iter().enumerate() {
        solver.add_clause(c, vec![i as u32])?;
    }
    let mut items = Vec::new();
    for (j, s) in inst.soft.iter().enumerate() {
        if let Some(mut lits) = lower_clause(&mut solver, &s.clause)? {
            let r = solver.new_bool();
            lits.push(r);
            solver.add_clause_lits(lits, vec![nh + j as u32]);
            items.push((r, s.weight.clone()));
        }
    }
    solver.set_cost_constraint(CostConstraint {
        items,
        best: None,
        msc: inst.msc.clone(),
    });
    let mut stats = OptStats::default();
    let mut best: Option<(Model, CostPair)> = None;
    loop {
        let outcome = solver.solve(budget)?;
        stats.solver = solver.stats.clone();
        match outcome {
            Outcome::Sat => {
                stats.models += 1;
                let m = solver.model();
                let cost = evaluate(inst, &m)
                    .ok_or_else(|| LiaError::Internal("optimizer model violates a hard clause".into()))?;
                if !inst.msc.admits(&cost.soft) {
                    return Err(LiaError::Internal("optimizer model exceeds the soft-cost threshold".into()));
                }
                if best.as_ref().is_some_and(|(_, b)| &cost >= b) {
                    return Err(LiaError::Internal("optimizer failed to improve".into()));
                }
                let zero = cost.is_zero();
                best = Some((m, cost.clone()));
                if zero {
                    let (model, cost) = best.unwrap();
                    return Ok((
                        OptResult::Optimal {
                            model,
                            cost,
                            core: OptimalityCore::default(),
                        },
                        stats,
                    ));
                }
                solver.cost_constraint_mut().unwrap().best = Some(cost);
            }
            Outcome::Unsat(deps) => {
                return Ok(match best {
                    None => (OptResult::Unsat, stats),
                    Some((model, cost)) => {
                        let mut core = OptimalityCore::default();
                        for d in deps {
                            if d < nh {
                                core.hard_ids.push(d as usize);
                            } else {
                                core.soft_ids.push((d - nh) as usize);
                            }
                        }
                        (OptResult::Optimal { model, cost, core }, stats)
                    }
                });
            }
            Outcome::Unknown => return Ok((OptResult::Unknown { best }, stats)),
        }
    }
}

pub fn omt_solve(
    vars: &VarTable,
    clauses: &[Clause],
    cost_var: VarId,
    budget: &Budget,
) -> Result<OmtResult, LiaError> {
    omt_solve_stats(vars, clauses, cost_var, None, budget).map(|(r, _)| r)
}

pub fn omt_solve_stats(
    vars: &VarTable,
    clauses: &[Clause],
    cost_var: VarId,
    seed: Option<u64>,
    budget: &Budget,
) -> Result<(OmtResult, OptStats), LiaError> {
    let mut solver = Solver::new(vars, false);
    if let Some(seed) = seed {
        solver.set_seed(seed);
    }
    for c in clauses {
        if !c.is_linear() {
            return Err(LiaError::NonLinear(format!("{}", c.display(vars))));
        }
        solver.add_clause(c, Vec::new())?;
    }
    solver.set_objective(cost_var)?;
    let mut stats = OptStats::default();
    let mut best: Option<(Model, Rational)> = None;
    loop {
        let outcome = solver.solve(budget)?;
        stats.solver = solver.stats.clone();
        match outcome {
            Outcome::Sat => {
                stats.models += 1;
                let m = solver.model();
                if !clauses.iter().all(|c| c.eval(&m).unwrap_or(false)) {
                    return Err(LiaError::Internal("OMT model violates a clause".into()));
                }
                let c = m.get(cost_var).cloned().unwrap_or_default();
                let cost = Polynomial::var(cost_var);
                let tighter = if vars.sort(cost_var) == Sort::Int {
                    Literal::le(cost.add_constant(&-(&c - Rational::one())))
                } else {
                    Literal::lt(cost.add_constant(&-c.clone()))
                };
                best = Some((m, c));
                solver.add_clause(&Clause::unit(tighter), Vec::new())?;
            }
            Outcome::Unsat(_) => {
                return Ok(match best {
                    None => (OmtResult::Unsat, stats),
                    Some((model, cost)) => (OmtResult::Optimal { model, cost }, stats),
                });
            }
            Outcome::Unknown => return Ok((OmtResult::Unknown { best }, stats)),
        }
    }
}
