//! ∃x ∀y problems whose literals are linear in the universal (real) variables
//! `y`, reduced to Max-SMT over non-linear integer arithmetic with Motzkin's
//! transposition theorem, one clause at a time.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::formula::rational::int;
use crate::formula::{
    Atom, Clause, CostPair, EvalError, Literal, Model, Polynomial, Rational, Rel, Sort, VarId, VarOrigin, VarTable,
    WeightedFormula,
};
use crate::lia::Budget;
use crate::nia::{solve_maxsmt, NiaConfig, NiaError, NiaStats, Status};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EaError {
    #[error("equality over universal variables cannot be negated into a row: {0}")]
    PositiveEquality(String),
    #[error("literal is not linear in the universal variables: {0}")]
    NotLinear(String),
    #[error("Boolean literal in a clause with universal variables: {0}")]
    BoolLiteral(String),
    #[error("variable {0} must be {1}")]
    BadSort(String, &'static str),
    #[error("variable {0} is neither existential nor universal")]
    Unquantified(String),
    #[error("soft clause weight must be positive")]
    NonPositiveWeight,
    #[error("transformed formula multiplies two real variables in {0}")]
    RealProduct(String),
    #[error(transparent)]
    Nia(#[from] NiaError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
pub struct EaProblem {
    pub vars: VarTable,
    /// Integer unknowns `x`.
    pub exist_vars: Vec<VarId>,
    /// Real universally quantified `y`.
    pub univ_vars: Vec<VarId>,
    pub hard: Vec<Clause>,
    pub soft: Vec<(Clause, Rational)>,
}

/// `Σ coeffs[y]·y ≤ rhs` (or `<` in the strict part), coefficients and
/// right-hand side polynomials over `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub coeffs: BTreeMap<VarId, Polynomial>,
    pub rhs: Polynomial,
}

/// The clause is the negation of `A(x)·y ≤ b(x) ∧ C(x)·y < d(x)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MotzkinSystem {
    pub nonstrict: Vec<Row>,
    pub strict: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transformable {
    System(MotzkinSystem),
    /// No universal variable occurs; the clause can be kept as it is.
    Passthrough(Clause),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multipliers {
    /// One per nonstrict row.
    pub lambda: Vec<VarId>,
    /// One per strict row.
    pub mu: Vec<VarId>,
}

fn row_of(p: &Polynomial, univ: &BTreeSet<VarId>) -> Option<Row> {
    let (coeffs, rest) = p.split_linear_in(&|v| univ.contains(&v))?;
    Some(Row { coeffs, rhs: rest.neg() })
}

/// Negates each literal of `clause` into rows. Positive equalities cannot be
/// negated into a conjunction; callers split y-free ones beforehand.
pub fn to_motzkin_system(
    clause: &Clause,
    univ: &BTreeSet<VarId>,
    vars: &VarTable,
) -> Result<Transformable, EaError> {
    let show = || clause.display(vars).to_string();
    let mentions = |l: &Literal| l.polynomial().is_some_and(|p| p.vars().iter().any(|v| univ.contains(v)));
    if !clause.literals().iter().any(mentions) {
        return Ok(Transformable::Passthrough(clause.clone()));
    }
    let mut sys = MotzkinSystem::default();
    for l in clause.literals() {
        let (atom, positive) = match l {
            Literal::Atom { atom, positive } => (atom, *positive),
            Literal::Bool { .. } => return Err(EaError::BoolLiteral(show())),
        };
        let p = &atom.poly;
        let row = |q: &Polynomial| row_of(q, univ).ok_or_else(|| EaError::NotLinear(show()));
        match (atom.rel, positive) {
            // ¬(p ≤ 0) is −p < 0, ¬(p < 0) is −p ≤ 0.
            (Rel::Le, true) => sys.strict.push(row(&p.neg())?),
            (Rel::Lt, true) => sys.nonstrict.push(row(&p.neg())?),
            // ¬(p > 0) is p ≤ 0, ¬(p ≥ 0) is p < 0.
            (Rel::Le, false) => sys.nonstrict.push(row(p)?),
            (Rel::Lt, false) => sys.strict.push(row(p)?),
            (Rel::Eq, false) => {
                sys.nonstrict.push(row(p)?);
                sys.nonstrict.push(row(&p.neg())?);
            }
            (Rel::Eq, true) => return Err(EaError::PositiveEquality(show())),
        }
    }
    Ok(Transformable::System(sys))
}

fn weighted_sum(mult: &[VarId], polys: impl Iterator<Item = Polynomial>) -> Polynomial {
    mult.iter()
        .zip(polys)
        .fold(Polynomial::zero(), |acc, (&m, p)| acc.add(&Polynomial::var(m).mul(&p)))
}

/// Builds the existential side of the transposition theorem with fresh real
/// multipliers named after `tag`:
/// `λ, μ ≥ 0`, `λᵀA + μᵀC = 0`, `λᵀb + μᵀd ≤ 0` and `λᵀb < 0 ∨ Σμ > 0`.
pub fn motzkin_transform(sys: &MotzkinSystem, vars: &mut VarTable, tag: &str) -> (Vec<Clause>, Multipliers) {
    let lambda: Vec<VarId> = (0..sys.nonstrict.len())
        .map(|i| vars.fresh(&format!("lambda_{tag}_{}", i + 1), Sort::Real, VarOrigin::Multiplier))
        .collect();
    let mu: Vec<VarId> = (0..sys.strict.len())
        .map(|j| vars.fresh(&format!("mu_{tag}_{}", j + 1), Sort::Real, VarOrigin::Multiplier))
        .collect();
    let mult = Multipliers { lambda, mu };
    if sys.nonstrict.is_empty() && sys.strict.is_empty() {
        return (vec![Clause::empty()], mult);
    }
    let mut out = Vec::new();
    for &m in mult.lambda.iter().chain(&mult.mu) {
        out.push(Clause::unit(Literal::ge(Polynomial::var(m))));
    }
    let ys: BTreeSet<VarId> = sys
        .nonstrict
        .iter()
        .chain(&sys.strict)
        .flat_map(|r| r.coeffs.keys().copied())
        .collect();
    for y in ys {
        let coeff = |r: &Row| r.coeffs.get(&y).cloned().unwrap_or_default();
        let lhs = weighted_sum(&mult.lambda, sys.nonstrict.iter().map(coeff))
            .add(&weighted_sum(&mult.mu, sys.strict.iter().map(coeff)));
        out.push(Clause::unit(Literal::eq(lhs)));
    }
    let lb = weighted_sum(&mult.lambda, sys.nonstrict.iter().map(|r| r.rhs.clone()));
    let md = weighted_sum(&mult.mu, sys.strict.iter().map(|r| r.rhs.clone()));
    out.push(Clause::unit(Literal::le(lb.add(&md))));
    let mut either = Clause::empty();
    if !mult.lambda.is_empty() {
        either.push(Literal::lt(lb));
    }
    if !mult.mu.is_empty() {
        let total = mult.mu.iter().fold(Polynomial::zero(), |acc, &m| acc.add(&Polynomial::var(m)));
        either.push(Literal::gt(total));
    }
    out.push(either);
    (out, mult)
}

struct Image {
    system: MotzkinSystem,
    multipliers: Multipliers,
    clauses: Vec<Clause>,
}

/// The theorem applied to one clause, or `None` if no universal variable
/// occurs. Boolean literals `B` stay outside: `∀y (B ∨ S)` is `B ∨ ∀y S`, and
/// `B` is distributed over the resulting conjunction.
fn image(clause: &Clause, univ: &BTreeSet<VarId>, vars: &mut VarTable, tag: &str) -> Result<Option<Image>, EaError> {
    let (bools, arith): (Vec<Literal>, Vec<Literal>) =
        clause.literals().iter().cloned().partition(|l| matches!(l, Literal::Bool { .. }));
    let arith = Clause::new(arith);
    let system = match to_motzkin_system(&arith, univ, vars)? {
        Transformable::Passthrough(_) => return Ok(None),
        Transformable::System(s) => s,
    };
    let (mut clauses, multipliers) = motzkin_transform(&system, vars, tag);
    for c in &mut clauses {
        for b in &bools {
            c.push(b.clone());
        }
    }
    Ok(Some(Image {
        system,
        multipliers,
        clauses,
    }))
}

/// Hard clauses for `(∧ clauses) ↔ p`.
fn equivalence(clauses: &[Clause], p: VarId, vars: &mut VarTable) -> Vec<Clause> {
    let pos = Literal::bool(p, true);
    let neg = Literal::bool(p, false);
    if clauses.iter().any(|c| c.is_empty()) {
        return vec![Clause::unit(neg)];
    }
    let mut out = Vec::new();
    let mut back = Clause::unit(pos.clone());
    for c in clauses {
        let name = if c.len() == 1 {
            c.literals()[0].clone()
        } else {
            let t = vars.fresh("def", Sort::Bool, VarOrigin::Auxiliary);
            let tl = Literal::bool(t, true);
            let mut fwd = Clause::unit(tl.negate());
            for l in c.literals() {
                fwd.push(l.clone());
                out.push(Clause::new([tl.clone(), l.negate()]));
            }
            out.push(fwd);
            tl
        };
        out.push(Clause::new([neg.clone(), name.clone()]));
        back.push(name.negate());
    }
    out.push(back);
    out
}

/// What a soft clause turns into.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformedSoft {
    pub soft: (Clause, CostPair),
    pub hard: Vec<Clause>,
    /// `p_S` and the multipliers, unless the clause was passed through.
    pub indicator: Option<(VarId, Multipliers)>,
}

/// Replaces `[S, W]` by `[p_S, (0, W)]` plus the hard clauses of
/// `motzkin(S) ↔ p_S`.
pub fn transform_soft(
    clause: &Clause,
    weight: &Rational,
    univ: &BTreeSet<VarId>,
    vars: &mut VarTable,
    index: u32,
) -> Result<TransformedSoft, EaError> {
    if *weight <= int(0) {
        return Err(EaError::NonPositiveWeight);
    }
    let w = CostPair::soft_only(weight.clone());
    match image(clause, univ, vars, &format!("s{index}"))? {
        None => Ok(TransformedSoft {
            soft: (clause.clone(), w),
            hard: Vec::new(),
            indicator: None,
        }),
        Some(img) => {
            let p = vars.fresh(&format!("p_s{index}"), Sort::Bool, VarOrigin::SoftIndicator(index));
            let hard = equivalence(&img.clauses, p, vars);
            Ok(TransformedSoft {
                soft: (Clause::unit(Literal::bool(p, true)), w),
                hard,
                indicator: Some((p, img.multipliers)),
            })
        }
    }
}

/// A clause of the input that went through the theorem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformedClause {
    /// Index among the (split) hard or soft clauses.
    pub index: usize,
    pub soft: bool,
    pub system: MotzkinSystem,
    pub multipliers: Multipliers,
    /// The clauses over `x`, `λ` and `μ` the system produced.
    pub clauses: Vec<Clause>,
}

#[derive(Clone, Debug)]
pub struct EaInstance {
    pub formula: WeightedFormula,
    pub systems: Vec<TransformedClause>,
}

/// `C ∨ p = 0` with `p` free of universal variables becomes
/// `(C ∨ p ≤ 0) ∧ (C ∨ p ≥ 0)`, repeatedly.
fn split_equalities(clause: &Clause, univ: &BTreeSet<VarId>) -> Vec<Clause> {
    let pos = clause.literals().iter().position(|l| match l {
        Literal::Atom { atom, positive: true } if atom.rel == Rel::Eq => {
            !atom.poly.vars().iter().any(|v| univ.contains(v))
        }
        _ => false,
    });
    let Some(i) = pos else {
        return vec![clause.clone()];
    };
    let Literal::Atom { atom, .. } = &clause.literals()[i] else {
        unreachable!()
    };
    let rest: Vec<Literal> = clause.literals().iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l.clone()).collect();
    let mut out = Vec::new();
    for half in [Atom::le(atom.poly.clone()), Atom::le(atom.poly.neg())] {
        let mut c = Clause::new(rest.iter().cloned());
        c.push(Literal::atom(half));
        out.extend(split_equalities(&c, univ));
    }
    out
}

fn validate(prob: &EaProblem) -> Result<(), EaError> {
    for &x in &prob.exist_vars {
        if prob.vars.sort(x) == Sort::Real {
            return Err(EaError::BadSort(prob.vars.name(x).to_string(), "integer or Boolean"));
        }
    }
    for &y in &prob.univ_vars {
        if prob.vars.sort(y) != Sort::Real {
            return Err(EaError::BadSort(prob.vars.name(y).to_string(), "real"));
        }
    }
    let known: BTreeSet<VarId> = prob.exist_vars.iter().chain(&prob.univ_vars).copied().collect();
    for c in prob.hard.iter().chain(prob.soft.iter().map(|(c, _)| c)) {
        for l in c.literals() {
            let vs = match l {
                Literal::Bool { var, .. } => vec![*var],
                Literal::Atom { atom, .. } => atom.poly.vars(),
            };
            if let Some(v) = vs.into_iter().find(|v| !known.contains(v)) {
                return Err(EaError::Unquantified(prob.vars.name(v).to_string()));
            }
        }
    }
    Ok(())
}

/// Builds the Max-SMT instance: hard clauses by the theorem (fresh multipliers
/// per clause), soft clauses through indicators.
pub fn transform(prob: &EaProblem) -> Result<EaInstance, EaError> {
    validate(prob)?;
    let univ: BTreeSet<VarId> = prob.univ_vars.iter().copied().collect();
    let mut vars = prob.vars.clone();
    let mut hard = Vec::new();
    let mut soft = Vec::new();
    let mut systems = Vec::new();
    let split: Vec<Clause> = prob.hard.iter().flat_map(|c| split_equalities(c, &univ)).collect();
    for (i, c) in split.iter().enumerate() {
        match image(c, &univ, &mut vars, &format!("h{i}"))? {
            None => hard.push(c.clone()),
            Some(img) => {
                hard.extend(img.clauses.iter().cloned());
                systems.push(TransformedClause {
                    index: i,
                    soft: false,
                    system: img.system,
                    multipliers: img.multipliers,
                    clauses: img.clauses,
                });
            }
        }
    }
    for (k, (c, w)) in prob.soft.iter().enumerate() {
        if *w <= int(0) {
            return Err(EaError::NonPositiveWeight);
        }
        let parts = split_equalities(c, &univ);
        if parts.len() == 1 && image_free(c, &univ) {
            soft.push((c.clone(), CostPair::soft_only(w.clone())));
            continue;
        }
        // p_S ↔ the conjunction of the images of every part.
        let mut conj = Vec::new();
        for (j, part) in parts.iter().enumerate() {
            match image(part, &univ, &mut vars, &format!("s{k}_{j}"))? {
                None => conj.push(part.clone()),
                Some(img) => {
                    conj.extend(img.clauses.iter().cloned());
                    systems.push(TransformedClause {
                        index: k,
                        soft: true,
                        system: img.system,
                        multipliers: img.multipliers,
                        clauses: img.clauses,
                    });
                }
            }
        }
        let p = vars.fresh(&format!("p_s{k}"), Sort::Bool, VarOrigin::SoftIndicator(k as u32));
        hard.extend(equivalence(&conj, p, &mut vars));
        soft.push((Clause::unit(Literal::bool(p, true)), CostPair::soft_only(w.clone())));
    }
    let mut formula = WeightedFormula::new(vars);
    for c in hard {
        formula.add_hard(c);
    }
    for (c, w) in soft {
        formula.add_soft(c, w);
    }
    check_no_real_products(&formula)?;
    Ok(EaInstance { formula, systems })
}

fn image_free(c: &Clause, univ: &BTreeSet<VarId>) -> bool {
    !c.literals()
        .iter()
        .any(|l| l.polynomial().is_some_and(|p| p.vars().iter().any(|v| univ.contains(v))))
}

fn check_no_real_products(f: &WeightedFormula) -> Result<(), EaError> {
    for wc in &f.clauses {
        for l in wc.clause.literals() {
            let Some(p) = l.polynomial() else { continue };
            for m in p.monomials() {
                let reals: u32 = m
                    .factors()
                    .iter()
                    .filter(|(v, _)| f.vars.sort(*v) == Sort::Real)
                    .map(|(_, e)| e)
                    .sum();
                if reals > 1 {
                    return Err(EaError::RealProduct(m.display(&f.vars).to_string()));
                }
            }
        }
    }
    Ok(())
}

/// Whether `model` (over `x`, `λ`, `μ`) satisfies every clause the theorem
/// produced for this system.
pub fn certificate_holds(t: &TransformedClause, model: &Model) -> Result<bool, EvalError> {
    for c in &t.clauses {
        if !c.eval(model)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the hard clauses hold for the given `x` and `y` values.
pub fn holds_for(prob: &EaProblem, x: &Model, y: &Model) -> Result<bool, EvalError> {
    let mut m = x.clone();
    for (v, q) in y.assigned() {
        m.set(v, q.clone());
    }
    for c in &prob.hard {
        if !c.eval(&m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct EaResult {
    pub status: Status,
    /// Values of the existential variables.
    pub model: Option<Model>,
    /// Values of every multiplier (and indicator) of the transformed instance.
    pub certificate: Option<Model>,
    pub objective: Option<Rational>,
    pub stats: NiaStats,
    pub instance: EaInstance,
}

pub fn solve_ea(prob: &EaProblem, config: &NiaConfig, budget: &Budget) -> Result<EaResult, EaError> {
    let instance = transform(prob)?;
    let r = solve_maxsmt(&instance.formula, config, budget)?;
    let (model, certificate) = match &r.model {
        Some(m) => {
            let extra = instance.formula.vars.ids().filter(|v| !prob.exist_vars.contains(v) && v.index() >= prob.vars.len());
            (Some(m.project(prob.exist_vars.iter().copied())), Some(m.project(extra)))
        }
        None => (None, None),
    };
    Ok(EaResult {
        status: r.status,
        model,
        certificate,
        objective: r.objective,
        stats: r.stats,
        instance,
    })
}
