//! Linearization of polynomial constraints by case splitting over finite
//! artificial domains, and the relaxation rules that widen those domains.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::formula::rational::{int, pow_rational, to_i64};
use crate::formula::{
    Clause, Literal, Model, Monomial, Polynomial, Rational, Rel, SlackKind, Sort, VarId, VarOrigin,
    VarTable, Weight, WeightedClause, WeightedFormula,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinearizeError {
    #[error("monomial {0} has no integer variable to split on")]
    Uncoverable(String),
    #[error("bound change on {0} is not a relaxation")]
    NonMonotone(String),
    #[error("no artificial bound is violated by the model")]
    NoViolatedBound,
    #[error("the core does not mention any artificial bound")]
    EmptyIntersection,
    #[error("domain of {0} is not finite")]
    InfiniteDomain(String),
    #[error("model value of {0} is too large for a domain bound")]
    ValueTooLarge(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundKind {
    Lower,
    Upper,
}

impl From<BoundKind> for SlackKind {
    fn from(k: BoundKind) -> Self {
        match k {
            BoundKind::Lower => SlackKind::LowerSlack,
            BoundKind::Upper => SlackKind::UpperSlack,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArtificialBound {
    pub var: VarId,
    pub kind: BoundKind,
    pub value: i64,
    pub soft_weight: Rational,
    pub generation: u32,
}

impl ArtificialBound {
    pub fn key(&self) -> (VarId, BoundKind) {
        (self.var, self.kind)
    }

    /// `V ≥ L` or `V ≤ U`.
    pub fn literal(&self) -> Literal {
        let p = Polynomial::var(self.var).add_constant(&-int(self.value));
        match self.kind {
            BoundKind::Lower => Literal::ge(p),
            BoundKind::Upper => Literal::le(p),
        }
    }

    /// `V ≤ L−1` or `V ≥ U+1`.
    pub fn negated_literal(&self) -> Literal {
        match self.kind {
            BoundKind::Lower => Literal::le(Polynomial::var(self.var).add_constant(&-int(self.value - 1))),
            BoundKind::Upper => Literal::ge(Polynomial::var(self.var).add_constant(&-int(self.value + 1))),
        }
    }

    pub fn violated_by(&self, m: &Model) -> bool {
        let Some(v) = m.get(self.var) else {
            return false;
        };
        match self.kind {
            BoundKind::Lower => v < &int(self.value),
            BoundKind::Upper => v > &int(self.value),
        }
    }
}

/// Parameters of the correction factor `⌈α·min(β, n/m)⌉`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelaxParams {
    pub alpha: Rational,
    pub beta: Rational,
    pub correction: bool,
    /// Largest distance a single relaxation may move a bound. Minimal models
    /// can put variables arbitrarily far outside their domains, and following
    /// them blindly would create that many case clauses at once.
    pub max_step: Option<i64>,
}

impl Default for RelaxParams {
    fn default() -> Self {
        Self {
            alpha: int(2),
            beta: int(10),
            correction: true,
            max_step: Some(1000),
        }
    }
}

impl RelaxParams {
    pub fn step(&self, n: u32, m: usize) -> i64 {
        let ratio = Rational::new(n.into(), m.max(1).into());
        let capped = if ratio < self.beta { ratio } else { self.beta.clone() };
        (&self.alpha * capped).ceil().to_i64().unwrap_or(i64::MAX / 4)
    }
}

/// How a monomial is evaluated once its split variable is fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Split {
    var: VarId,
    exponent: u32,
    residue: Monomial,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClauseDelta {
    pub added: Vec<Clause>,
    pub removed: Vec<Clause>,
}

/// The monomial abstraction of a formula together with its case splits.
#[derive(Clone, Debug)]
pub struct Linearization {
    vars: VarTable,
    chosen: Vec<VarId>,
    monomial_var: BTreeMap<Monomial, VarId>,
    splits: BTreeMap<Monomial, Split>,
    abstracted: Vec<WeightedClause>,
    bounds: BTreeMap<(VarId, BoundKind), ArtificialBound>,
    true_lower: BTreeMap<VarId, i64>,
    true_upper: BTreeMap<VarId, i64>,
    occurrences: BTreeMap<VarId, usize>,
    case_clauses: BTreeMap<(Monomial, i64), Clause>,
    ood: bool,
    ood_clauses: BTreeSet<Clause>,
    blocking: Vec<Clause>,
}

fn nonlinear_monomials(f0: &WeightedFormula) -> BTreeSet<Monomial> {
    let mut out = BTreeSet::new();
    for wc in &f0.clauses {
        for l in wc.clause.literals() {
            if let Some(p) = l.polynomial() {
                for m in p.monomials() {
                    if m.degree() > 1 {
                        out.insert(m.clone());
                    }
                }
            }
        }
    }
    out
}

/// Greedy cover of all non-linear monomials, including residues produced by
/// case splitting, by integer variables. Returned in pick order.
pub fn choose_linearization_variables(f0: &WeightedFormula) -> Result<Vec<VarId>, LinearizeError> {
    cover(&f0.vars, nonlinear_monomials(f0)).map(|(s, _)| s)
}

fn cover(
    vars: &VarTable,
    initial: BTreeSet<Monomial>,
) -> Result<(Vec<VarId>, BTreeMap<Monomial, Split>), LinearizeError> {
    let mut known: BTreeSet<Monomial> = initial.clone();
    let mut uncovered: BTreeSet<Monomial> = initial;
    let mut chosen: Vec<VarId> = Vec::new();
    let mut splits: BTreeMap<Monomial, Split> = BTreeMap::new();
    loop {
        // Resolve everything already covered, adding residues.
        loop {
            let ready: Vec<Monomial> = uncovered
                .iter()
                .filter(|q| chosen.iter().any(|v| q.contains(*v)))
                .cloned()
                .collect();
            if ready.is_empty() {
                break;
            }
            for q in ready {
                uncovered.remove(&q);
                let v = *chosen.iter().find(|v| q.contains(**v)).unwrap();
                let residue = q.without(v);
                if residue.degree() > 1 && known.insert(residue.clone()) {
                    uncovered.insert(residue.clone());
                }
                splits.insert(
                    q.clone(),
                    Split {
                        var: v,
                        exponent: q.exponent(v),
                        residue,
                    },
                );
            }
        }
        if uncovered.is_empty() {
            return Ok((chosen, splits));
        }
        let mut counts: BTreeMap<VarId, usize> = BTreeMap::new();
        for q in &uncovered {
            for v in q.vars() {
                if vars.sort(v) == Sort::Int {
                    *counts.entry(v).or_insert(0) += 1;
                }
            }
        }
        let best = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(v, _)| *v);
        match best {
            Some(v) => chosen.push(v),
            None => {
                let q = uncovered.iter().next().unwrap();
                return Err(LinearizeError::Uncoverable(format!("{}", q.display(vars))));
            }
        }
    }
}

/// The forced initial domain `[-1, 1]` for every chosen variable.
pub fn artificial_bounds(chosen: &[VarId]) -> Vec<ArtificialBound> {
    let mut out = Vec::new();
    for &v in chosen {
        for (kind, value) in [(BoundKind::Lower, -1), (BoundKind::Upper, 1)] {
            out.push(ArtificialBound {
                var: v,
                kind,
                value,
                soft_weight: Rational::from_integer(1.into()),
                generation: 0,
            });
        }
    }
    out.sort();
    out
}

/// Single-variable bounds stated by hard unit clauses.
fn true_bounds(f0: &WeightedFormula) -> (BTreeMap<VarId, i64>, BTreeMap<VarId, i64>) {
    let mut lower: BTreeMap<VarId, i64> = BTreeMap::new();
    let mut upper: BTreeMap<VarId, i64> = BTreeMap::new();
    for wc in f0.hard() {
        let [lit] = wc.clause.literals() else {
            continue;
        };
        let Ok(Literal::Atom { atom, positive: true }) = lit.normalize(&f0.vars) else {
            continue;
        };
        if !atom.is_integer(&f0.vars) {
            continue;
        }
        let terms: Vec<_> = atom.poly.terms().filter(|(m, _)| !m.is_constant()).collect();
        let [(m, c)] = terms.as_slice() else {
            continue;
        };
        let Some(v) = m.as_var() else {
            continue;
        };
        // Integer normalization leaves a unit coefficient on single-variable atoms.
        let k = -atom.poly.constant_term() / (*c).clone();
        let Some(k) = to_i64(&k) else {
            continue;
        };
        let is_upper = c.is_positive();
        if matches!(atom.rel, Rel::Eq) || (atom.rel == Rel::Le && is_upper) {
            let e = upper.entry(v).or_insert(k);
            *e = (*e).min(k);
        }
        if matches!(atom.rel, Rel::Eq) || (atom.rel == Rel::Le && !is_upper) {
            let e = lower.entry(v).or_insert(k);
            *e = (*e).max(k);
        }
    }
    (lower, upper)
}

fn occurrence_counts(f0: &WeightedFormula) -> BTreeMap<VarId, usize> {
    let mut out = BTreeMap::new();
    for wc in &f0.clauses {
        for l in wc.clause.literals() {
            if let Some(p) = l.polynomial() {
                for m in p.monomials() {
                    for v in m.vars() {
                        *out.entry(v).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    out
}

impl Linearization {
    /// Linearizes `f0` with the forced initial domains.
    pub fn new(f0: &WeightedFormula, ood: bool) -> Result<Self, LinearizeError> {
        let chosen = choose_linearization_variables(f0)?;
        let bounds = artificial_bounds(&chosen);
        Self::with_bounds(f0, bounds, ood)
    }

    /// Linearizes `f0` with the given artificial bounds.
    pub fn with_bounds(
        f0: &WeightedFormula,
        bounds: Vec<ArtificialBound>,
        ood: bool,
    ) -> Result<Self, LinearizeError> {
        let (chosen, splits) = cover(&f0.vars, nonlinear_monomials(f0))?;
        let mut vars = f0.vars.clone();
        let mut monomial_var = BTreeMap::new();
        for q in splits.keys() {
            let name = format!("v_{}", q.display(&f0.vars)).replace(['*', '^'], "");
            // A monomial with a real factor abstracts to a real variable.
            let sort = if q.vars().all(|w| f0.vars.sort(w) == Sort::Int) {
                Sort::Int
            } else {
                Sort::Real
            };
            let v = vars.fresh(&name, sort, VarOrigin::MonomialAbstraction(q.clone()));
            monomial_var.insert(q.clone(), v);
        }

        let abstracted = f0
            .clauses
            .iter()
            .map(|wc| WeightedClause {
                clause: Clause::new(wc.clause.literals().iter().map(|l| abstract_literal(l, &monomial_var))),
                weight: wc.weight.clone(),
                id: wc.id,
            })
            .collect();
        let (true_lower, true_upper) = true_bounds(f0);
        let mut lin = Linearization {
            vars,
            chosen,
            monomial_var,
            splits,
            abstracted,
            bounds: BTreeMap::new(),
            true_lower,
            true_upper,
            occurrences: occurrence_counts(f0),
            case_clauses: BTreeMap::new(),
            ood,
            ood_clauses: BTreeSet::new(),
            blocking: Vec::new(),
        };
        for b in bounds {
            lin.bounds.insert(b.key(), b);
        }
        lin.normalize_bounds();
        for v in lin.chosen.clone() {
            let (lo, hi) = lin.domain(v)?;
            lin.add_cases(v, lo, hi, &mut Vec::new());
        }
        lin.refresh_ood(&mut Vec::new())?;
        Ok(lin)
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn chosen(&self) -> &[VarId] {
        &self.chosen
    }

    pub fn monomial_vars(&self) -> &BTreeMap<Monomial, VarId> {
        &self.monomial_var
    }

    /// The variable `V` a monomial is split on.
    pub fn split_var(&self, q: &Monomial) -> Option<VarId> {
        self.splits.get(q).map(|s| s.var)
    }

    pub fn abstracted(&self) -> &[WeightedClause] {
        &self.abstracted
    }

    pub fn bounds(&self) -> Vec<ArtificialBound> {
        self.bounds.values().cloned().collect()
    }

    pub fn bound(&self, v: VarId, kind: BoundKind) -> Option<&ArtificialBound> {
        self.bounds.get(&(v, kind))
    }

    pub fn true_lower(&self, v: VarId) -> Option<i64> {
        self.true_lower.get(&v).copied()
    }

    pub fn true_upper(&self, v: VarId) -> Option<i64> {
        self.true_upper.get(&v).copied()
    }

    pub fn occurrences(&self, v: VarId) -> usize {
        self.occurrences.get(&v).copied().unwrap_or(0)
    }

    pub fn case_clauses(&self) -> impl Iterator<Item = (&(Monomial, i64), &Clause)> + '_ {
        self.case_clauses.iter()
    }

    pub fn num_case_clauses(&self) -> usize {
        self.case_clauses.len()
    }

    pub fn ood_clauses(&self) -> impl Iterator<Item = &Clause> + '_ {
        self.ood_clauses.iter()
    }

    pub fn blocking_clauses(&self) -> &[Clause] {
        &self.blocking
    }

    /// Artificial bounds that coincide with or are weaker than a true bound are dropped.
    fn normalize_bounds(&mut self) {
        let keys: Vec<(VarId, BoundKind)> = self.bounds.keys().copied().collect();
        for key in keys {
            let b = &self.bounds[&key];
            let redundant = match key.1 {
                BoundKind::Lower => self.true_lower(key.0).is_some_and(|t| b.value <= t && b.generation > 0),
                BoundKind::Upper => self.true_upper(key.0).is_some_and(|t| b.value >= t && b.generation > 0),
            };
            if redundant {
                self.bounds.remove(&key);
            }
        }
    }

    /// Effective finite domain of a chosen variable.
    pub fn domain(&self, v: VarId) -> Result<(i64, i64), LinearizeError> {
        let a_lo = self.bounds.get(&(v, BoundKind::Lower)).map(|b| b.value);
        let a_hi = self.bounds.get(&(v, BoundKind::Upper)).map(|b| b.value);
        let lo = match (a_lo, self.true_lower(v)) {
            (Some(a), Some(t)) => Some(a.max(t)),
            (a, t) => a.or(t),
        };
        let hi = match (a_hi, self.true_upper(v)) {
            (Some(a), Some(t)) => Some(a.min(t)),
            (a, t) => a.or(t),
        };
        match (lo, hi) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(LinearizeError::InfiniteDomain(self.vars.name(v).to_string())),
        }
    }

    fn case_clause(&self, q: &Monomial, k: i64) -> Clause {
        let split = &self.splits[q];
        let v_q = self.monomial_var[q];
        let coeff = pow_rational(&int(k), split.exponent);
        let rhs = if split.residue.is_constant() {
            Polynomial::constant(coeff)
        } else if let Some(x) = split.residue.as_var() {
            Polynomial::linear([(coeff, x)], Rational::zero())
        } else {
            Polynomial::linear([(coeff, self.monomial_var[&split.residue])], Rational::zero())
        };
        let guard = Literal::neq(Polynomial::var(split.var).add_constant(&-int(k)));
        let body = Literal::eq(Polynomial::var(v_q).sub(&rhs));
        Clause::new([guard, body])
    }

    fn monomials_on(&self, v: VarId) -> Vec<Monomial> {
        self.splits
            .iter()
            .filter(|(_, s)| s.var == v)
            .map(|(q, _)| q.clone())
            .collect()
    }

    fn add_cases(&mut self, v: VarId, lo: i64, hi: i64, added: &mut Vec<Clause>) {
        for q in self.monomials_on(v) {
            for k in lo..=hi {
                if !self.case_clauses.contains_key(&(q.clone(), k)) {
                    let c = self.case_clause(&q, k);
                    added.push(c.clone());
                    self.case_clauses.insert((q.clone(), k), c);
                }
            }
        }
    }

    fn refresh_ood(&mut self, added: &mut Vec<Clause>) -> Result<(), LinearizeError> {
        if !self.ood {
            return Ok(());
        }
        for c in self.out_of_domain_clauses()? {
            if self.ood_clauses.insert(c.clone()) {
                added.push(c);
            }
        }
        Ok(())
    }

    /// Implications `V ≤ L−1 ⟹ v ≥ (L−1)²` and `V ≥ U+1 ⟹ v ≥ (U+1)²` for
    /// every pure square `V²` over its current domain `[L, U]`.
    pub fn out_of_domain_clauses(&self) -> Result<Vec<Clause>, LinearizeError> {
        let mut out = Vec::new();
        for (q, &v_q) in &self.monomial_var {
            let Some(v) = q.as_square() else {
                continue;
            };
            let (lo, hi) = self.domain(v)?;
            let x = Polynomial::var(v);
            let sq = Polynomial::var(v_q);
            if lo <= 1 {
                let b = int(lo) - int(1);
                out.push(Clause::new([
                    Literal::ge(x.add_constant(&-int(lo))),
                    Literal::ge(sq.add_constant(&-(&b * &b))),
                ]));
            }
            if hi >= -1 {
                let b = int(hi) + int(1);
                out.push(Clause::new([
                    Literal::le(x.add_constant(&-int(hi))),
                    Literal::ge(sq.add_constant(&-(&b * &b))),
                ]));
            }
        }
        Ok(out)
    }

    /// Installs new artificial bounds and adjusts case clauses. In incremental
    /// mode the new domains must contain the old ones and nothing is removed.
    pub fn set_bounds(
        &mut self,
        new_bounds: Vec<ArtificialBound>,
        incremental: bool,
    ) -> Result<ClauseDelta, LinearizeError> {
        let old_domains: BTreeMap<VarId, (i64, i64)> = self
            .chosen
            .iter()
            .map(|&v| self.domain(v).map(|d| (v, d)))
            .collect::<Result<_, _>>()?;
        let old_bounds = std::mem::take(&mut self.bounds);
        for b in new_bounds {
            self.bounds.insert(b.key(), b);
        }
        self.normalize_bounds();
        let mut delta = ClauseDelta::default();
        for v in self.chosen.clone() {
            let (lo, hi) = match self.domain(v) {
                Ok(d) => d,
                Err(e) => {
                    self.bounds = old_bounds;
                    return Err(e);
                }
            };
            let (olo, ohi) = old_domains[&v];
            if incremental && (lo > olo || hi < ohi) {
                self.bounds = old_bounds;
                return Err(LinearizeError::NonMonotone(self.vars.name(v).to_string()));
            }
            if (lo, hi) == (olo, ohi) {
                continue;
            }
            for q in self.monomials_on(v) {
                for k in olo..=ohi {
                    if k < lo || k > hi {
                        if let Some(c) = self.case_clauses.remove(&(q.clone(), k)) {
                            delta.removed.push(c);
                        }
                    }
                }
            }
            self.add_cases(v, lo, hi, &mut delta.added);
        }
        self.refresh_ood(&mut delta.added)?;
        Ok(delta)
    }

    /// Adds the hard clause `∨ ¬b` over the given bounds and returns it.
    pub fn add_blocking(&mut self, bounds: &[ArtificialBound]) -> Clause {
        let c = Clause::new(bounds.iter().map(ArtificialBound::negated_literal));
        self.blocking.push(c.clone());
        c
    }

    /// Abstracted hard clauses, case splits, out-of-domain and blocking clauses.
    pub fn hard_clauses(&self) -> Vec<Clause> {
        let mut out: Vec<Clause> = self
            .abstracted
            .iter()
            .filter(|wc| wc.weight == Weight::Hard)
            .map(|wc| wc.clause.clone())
            .collect();
        out.extend(self.case_clauses.values().cloned());
        out.extend(self.ood_clauses.iter().cloned());
        out.extend(self.blocking.iter().cloned());
        out
    }

    /// Extends a model of the original variables with `v_Q := Q`.
    pub fn extend_model(&self, m: &Model) -> Model {
        let mut out = m.clone();
        for (q, &v) in &self.monomial_var {
            if let Ok(val) = q.eval(m) {
                out.set(v, val);
            }
        }
        out
    }

    pub fn bounds_violated_by(&self, m: &Model) -> Vec<ArtificialBound> {
        self.bounds.values().filter(|b| b.violated_by(m)).cloned().collect()
    }

    /// New bound after relaxing `b` to `target` (clipped at any true bound
    /// and at the step limit).
    fn relaxed(&self, b: &ArtificialBound, target: i64, params: &RelaxParams) -> ArtificialBound {
        let target = match (params.max_step, b.kind) {
            (Some(k), BoundKind::Lower) => target.max(b.value.saturating_sub(k)),
            (Some(k), BoundKind::Upper) => target.min(b.value.saturating_add(k)),
            (None, _) => target,
        };
        let value = match b.kind {
            BoundKind::Lower => self.true_lower(b.var).map_or(target, |t| target.max(t)),
            BoundKind::Upper => self.true_upper(b.var).map_or(target, |t| target.min(t)),
        };
        ArtificialBound {
            value,
            generation: b.generation + 1,
            ..b.clone()
        }
    }

    fn true_side(&self, b: &ArtificialBound) -> Option<i64> {
        match b.kind {
            BoundKind::Lower => self.true_lower(b.var),
            BoundKind::Upper => self.true_upper(b.var),
        }
    }

    fn outward(b: &ArtificialBound, from: i64, by: i64) -> i64 {
        match b.kind {
            BoundKind::Lower => from.saturating_sub(by),
            BoundKind::Upper => from.saturating_add(by),
        }
    }
}

fn abstract_literal(l: &Literal, monomial_var: &BTreeMap<Monomial, VarId>) -> Literal {
    match l {
        Literal::Atom { atom, positive } => {
            let poly = atom
                .poly
                .replace_monomials(&mut |m| if m.degree() > 1 { monomial_var.get(m).copied() } else { None });
            Literal::Atom {
                atom: crate::formula::Atom::new(poly, atom.rel),
                positive: *positive,
            }
        }
        Literal::Bool { .. } => l.clone(),
    }
}

/// Relaxes every artificial bound cited by an unsatisfiable core.
pub fn relax_domains_cores(
    lin: &Linearization,
    core: &[(VarId, BoundKind)],
    params: &RelaxParams,
) -> Result<Vec<ArtificialBound>, LinearizeError> {
    let mut out: BTreeMap<(VarId, BoundKind), ArtificialBound> =
        lin.bounds.iter().map(|(k, b)| (*k, b.clone())).collect();
    let mut any = false;
    for key in core {
        let Some(b) = lin.bounds.get(key) else {
            continue;
        };
        any = true;
        let target = if b.generation == 0 {
            match lin.true_side(b) {
                Some(t) => t,
                None => Linearization::outward(b, b.value, 1),
            }
        } else if params.correction {
            Linearization::outward(b, b.value, params.step(b.generation, lin.occurrences(b.var)))
        } else {
            Linearization::outward(b, b.value, 1)
        };
        out.insert(*key, lin.relaxed(b, target, params));
    }
    if !any {
        return Err(LinearizeError::EmptyIntersection);
    }
    Ok(out.into_values().collect())
}

/// Relaxes every artificial bound violated by the model towards its value.
pub fn relax_domains_min_models(
    lin: &Linearization,
    model: &Model,
    params: &RelaxParams,
) -> Result<Vec<ArtificialBound>, LinearizeError> {
    let violated = lin.bounds_violated_by(model);
    if violated.is_empty() {
        return Err(LinearizeError::NoViolatedBound);
    }
    let mut out: BTreeMap<(VarId, BoundKind), ArtificialBound> =
        lin.bounds.iter().map(|(k, b)| (*k, b.clone())).collect();
    for b in violated {
        let value = model_int(lin, model, b.var)?;
        let target = if b.generation == 0 {
            match lin.true_side(&b) {
                Some(t) if weaker_or_equal(&b, t, value) => t,
                _ => value,
            }
        } else if params.correction {
            Linearization::outward(&b, value, params.step(b.generation, lin.occurrences(b.var)))
        } else {
            value
        };
        out.insert(b.key(), lin.relaxed(&b, target, params));
    }
    Ok(out.into_values().collect())
}

fn weaker_or_equal(b: &ArtificialBound, t: i64, value: i64) -> bool {
    match b.kind {
        BoundKind::Lower => t <= value,
        BoundKind::Upper => t >= value,
    }
}

/// Integer model value, kept well inside `i64` so that later bound arithmetic
/// cannot overflow.
fn model_int(lin: &Linearization, model: &Model, v: VarId) -> Result<i64, LinearizeError> {
    const LIMIT: i64 = i64::MAX / 4;
    model
        .get(v)
        .and_then(to_i64)
        .filter(|k| k.abs() <= LIMIT)
        .ok_or_else(|| LinearizeError::ValueTooLarge(lin.vars.name(v).to_string()))
}

/// Non-incremental relaxation: every variable with a violated bound gets the
/// domain `[m−R, m+R]` around its model value (clipped at true bounds).
pub fn relax_domains_non_inc(
    lin: &Linearization,
    model: &Model,
    radius: i64,
) -> Result<Vec<ArtificialBound>, LinearizeError> {
    let violated = lin.bounds_violated_by(model);
    if violated.is_empty() {
        return Err(LinearizeError::NoViolatedBound);
    }
    let vars: BTreeSet<VarId> = violated.iter().map(|b| b.var).collect();
    let mut out: BTreeMap<(VarId, BoundKind), ArtificialBound> =
        lin.bounds.iter().map(|(k, b)| (*k, b.clone())).collect();
    for v in vars {
        let value = model_int(lin, model, v)?;
        for kind in [BoundKind::Lower, BoundKind::Upper] {
            let generation = lin.bound(v, kind).map_or(0, |b| b.generation) + 1;
            let target = match kind {
                BoundKind::Lower => value - radius,
                BoundKind::Upper => value + radius,
            };
            let clipped = match kind {
                BoundKind::Lower => lin.true_lower(v).map_or(target, |t| target.max(t)),
                BoundKind::Upper => lin.true_upper(v).map_or(target, |t| target.min(t)),
            };
            let at_true = match kind {
                BoundKind::Lower => lin.true_lower(v) == Some(clipped),
                BoundKind::Upper => lin.true_upper(v) == Some(clipped),
            };
            if at_true {
                out.remove(&(v, kind));
            } else {
                out.insert(
                    (v, kind),
                    ArtificialBound {
                        var: v,
                        kind,
                        value: clipped,
                        soft_weight: Rational::from_integer(1.into()),
                        generation,
                    },
                );
            }
        }
    }
    Ok(out.into_values().collect())
}
