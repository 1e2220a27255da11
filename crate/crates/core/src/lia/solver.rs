//! CDCL(T) search over linear arithmetic atoms.

use std::collections::HashMap;
use std::time::Instant;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::delta::Delta;
use super::heap::VarHeap;
use super::simplex::Simplex;
use super::{Budget, LiaError};
use crate::formula::{Atom, Clause, CostPair, Literal, Model, Rational, Rel, Sort, VarId, VarTable};

/// Boolean literal over solver variables: `2·var + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Lit {
        Lit(var * 2 + u32::from(!positive))
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn neg(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        self.neg()
    }
}

/// A literal after internalization: either a solver literal or a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lowered {
    Lit(Lit),
    Const(bool),
}

#[derive(Clone, Debug)]
enum Reason {
    Decision,
    Clause(usize),
    /// Theory or cost lemma; the implied literal comes first.
    Lemma(Box<[Lit]>),
}

#[derive(Clone, Debug)]
struct ClauseData {
    lits: Vec<Lit>,
    deps: Vec<u32>,
}

#[derive(Clone, Debug)]
struct AtomBounds {
    slack: usize,
    /// Upper bound asserted when the atom is true.
    when_true: Delta,
    /// Lower bound asserted when the atom is false.
    when_false: Delta,
}

/// Soft-cost admission threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Msc {
    Unbounded,
    AtMost(Rational),
    Below(Rational),
}

impl Msc {
    pub fn admits(&self, soft: &Rational) -> bool {
        match self {
            Msc::Unbounded => true,
            Msc::AtMost(m) => soft <= m,
            Msc::Below(m) => soft < m,
        }
    }
}

/// Pseudo-Boolean cost constraint over relaxation literals: the cost of the
/// true literals must stay strictly below `best` and within `msc`.
#[derive(Clone, Debug)]
pub struct CostConstraint {
    pub items: Vec<(Lit, CostPair)>,
    pub best: Option<CostPair>,
    pub msc: Msc,
}

impl CostConstraint {
    fn violated(&self, sum: &CostPair) -> bool {
        self.best.as_ref().is_some_and(|b| sum >= b) || !self.msc.admits(&sum.soft)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub branches: u64,
    pub restarts: u64,
    pub pivots: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Sat,
    /// Refuted; carries the dependency tags of the refutation's leaves.
    Unsat(Vec<u32>),
    Unknown,
}

struct Conflict {
    lits: Vec<Lit>,
    deps: Vec<u32>,
}

pub struct Solver {
    vars: VarTable,
    track_deps: bool,

    assign: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    rng: Option<ChaCha8Rng>,
    var_inc: f64,
    heap: VarHeap,
    seen: Vec<bool>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    simplex_marks: Vec<usize>,
    qhead: usize,

    clauses: Vec<ClauseData>,
    watches: Vec<Vec<usize>>,

    simplex: Simplex,
    atom_of: Vec<Option<AtomBounds>>,
    slack_atoms: Vec<Vec<u32>>,
    arith_var: HashMap<VarId, usize>,
    int_columns: Vec<(VarId, usize)>,
    bool_var: HashMap<VarId, u32>,
    slack_of_form: HashMap<Vec<(usize, Rational)>, usize>,
    upper_atoms: HashMap<(usize, bool, Rational), u32>,
    eq_atoms: HashMap<(usize, Rational), u32>,

    cost: Option<CostConstraint>,
    objective: Option<usize>,

    level0_deps: Vec<Option<Vec<u32>>>,
    unsat: Option<Vec<u32>>,
    pub stats: SolverStats,
}

fn luby(mut i: u64) -> u64 {
    // 1 1 2 1 1 2 4 ...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = 1u64 << seq;
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        x = 1u64 << seq;
        i %= size;
    }
    x
}

impl Solver {
    pub fn new(vars: &VarTable, track_deps: bool) -> Self {
        Solver {
            vars: vars.clone(),
            track_deps,
            assign: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            phase: Vec::new(),
            activity: Vec::new(),
            rng: None,
            var_inc: 1.0,
            heap: VarHeap::default(),
            seen: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            simplex_marks: Vec::new(),
            qhead: 0,
            clauses: Vec::new(),
            watches: Vec::new(),
            simplex: Simplex::new(),
            atom_of: Vec::new(),
            slack_atoms: Vec::new(),
            arith_var: HashMap::new(),
            int_columns: Vec::new(),
            bool_var: HashMap::new(),
            slack_of_form: HashMap::new(),
            upper_atoms: HashMap::new(),
            eq_atoms: HashMap::new(),
            cost: None,
            objective: None,
            level0_deps: Vec::new(),
            unsat: None,
            stats: SolverStats::default(),
        }
    }

    pub fn var_table(&self) -> &VarTable {
        &self.vars
    }

    /// Registers variables appended to the table after construction.
    pub fn sync_vars(&mut self, vars: &VarTable) {
        self.vars = vars.clone();
    }

    pub fn num_bool_vars(&self) -> usize {
        self.assign.len()
    }

    /// Randomizes initial phases and activities of Boolean variables created
    /// from now on. Call before adding clauses.
    pub fn set_seed(&mut self, seed: u64) {
        self.rng = Some(ChaCha8Rng::seed_from_u64(seed));
    }

    pub fn new_bool(&mut self) -> Lit {
        let v = self.assign.len() as u32;
        self.assign.push(0);
        self.level.push(0);
        self.reason.push(Reason::Decision);
        let (phase, act) = match &mut self.rng {
            Some(rng) => (rng.gen_bool(0.5), rng.gen_range(0.0..1e-5)),
            None => (false, 0.0),
        };
        self.phase.push(phase);
        self.activity.push(act);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.atom_of.push(None);
        self.level0_deps.push(None);
        self.heap.insert(v, &self.activity);
        Lit::new(v, true)
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn lit_value(&self, l: Lit) -> Option<bool> {
        match self.assign[l.var() as usize] {
            0 => None,
            a => Some((a > 0) == l.is_positive()),
        }
    }

    fn is_false(&self, l: Lit) -> bool {
        self.lit_value(l) == Some(false)
    }

    // ------------------------------------------------------------------
    // Internalization

    fn arith_column(&mut self, v: VarId) -> Result<usize, LiaError> {
        if let Some(&x) = self.arith_var.get(&v) {
            return Ok(x);
        }
        let sort = self.vars.sort(v);
        if sort == Sort::Bool {
            return Err(LiaError::BoolInArithmetic(self.vars.name(v).to_string()));
        }
        let x = self.simplex.add_var(sort == Sort::Int);
        self.slack_atoms.push(Vec::new());
        self.arith_var.insert(v, x);
        if sort == Sort::Int {
            let pos = self.int_columns.partition_point(|(w, _)| *w < v);
            self.int_columns.insert(pos, (v, x));
        }
        Ok(x)
    }

    fn slack_for(&mut self, form: Vec<(usize, Rational)>, is_int: bool) -> usize {
        if form.len() == 1 && form[0].1.is_one() {
            return form[0].0;
        }
        if let Some(&s) = self.slack_of_form.get(&form) {
            return s;
        }
        let s = self.simplex.add_row(&form, is_int);
        self.slack_atoms.push(Vec::new());
        self.slack_of_form.insert(form, s);
        s
    }

    /// Literal for `slack ≤ k` (or `slack < k`).
    pub fn upper_atom(&mut self, slack: usize, strict: bool, k: Rational) -> Lit {
        let (strict, k) = if self.simplex.is_int(slack) {
            if strict {
                (false, k.ceil() - Rational::one())
            } else {
                (false, k.floor())
            }
        } else {
            (strict, k)
        };
        if let Some(&b) = self.upper_atoms.get(&(slack, strict, k.clone())) {
            return Lit::new(b, true);
        }
        let lit = self.new_bool();
        let b = lit.var();
        let (when_true, when_false) = if self.simplex.is_int(slack) {
            (Delta::real(k.clone()), Delta::real(&k + Rational::one()))
        } else if strict {
            (Delta::new(k.clone(), -Rational::one()), Delta::real(k.clone()))
        } else {
            (Delta::real(k.clone()), Delta::new(k.clone(), Rational::one()))
        };
        self.atom_of[b as usize] = Some(AtomBounds {
            slack,
            when_true,
            when_false,
        });
        self.slack_atoms[slack].push(b);
        self.upper_atoms.insert((slack, strict, k), b);
        lit
    }

    /// Internalizes a literal over the solver's variable table.
    pub fn literal(&mut self, l: &Literal) -> Result<Lowered, LiaError> {
        let norm = match l.normalize(&self.vars) {
            Err(b) => return Ok(Lowered::Const(b)),
            Ok(n) => n,
        };
        match norm {
            Literal::Bool { var, positive } => {
                if self.vars.sort(var) != Sort::Bool {
                    return Err(LiaError::NonBoolLiteral(self.vars.name(var).to_string()));
                }
                let b = match self.bool_var.get(&var) {
                    Some(&b) => b,
                    None => {
                        let b = self.new_bool().var();
                        self.bool_var.insert(var, b);
                        b
                    }
                };
                Ok(Lowered::Lit(Lit::new(b, positive)))
            }
            Literal::Atom { atom, positive } => {
                let lit = self.atom_literal(&atom)?;
                Ok(Lowered::Lit(if positive { lit } else { lit.neg() }))
            }
        }
    }

    fn atom_literal(&mut self, atom: &Atom) -> Result<Lit, LiaError> {
        let mut form: Vec<(usize, Rational)> = Vec::new();
        let mut constant = Rational::zero();
        let mut is_int = true;
        for (m, c) in atom.poly.terms() {
            if m.is_constant() {
                constant = c.clone();
                continue;
            }
            let v = m.as_var().ok_or_else(|| LiaError::NonLinear(format!("{}", atom.display(&self.vars))))?;
            let x = self.arith_column(v)?;
            is_int &= self.vars.sort(v) == Sort::Int && c.is_integer();
            form.push((x, c.clone()));
        }
        form.sort_by_key(|(x, _)| *x);
        let flip = form[0].1.is_negative();
        if flip {
            for (_, c) in form.iter_mut() {
                *c = -c.clone();
            }
        }
        let slack = self.slack_for(form, is_int);
        // form + constant rel 0, i.e. form rel -constant.
        match atom.rel {
            Rel::Eq => {
                let k = if flip { constant } else { -constant };
                self.eq_literal(slack, k)
            }
            Rel::Le | Rel::Lt => {
                let strict = atom.rel == Rel::Lt;
                if !flip {
                    Ok(self.upper_atom(slack, strict, -constant))
                } else {
                    // slack >= c  ~>  not(slack < c);  slack > c  ~>  not(slack <= c)
                    Ok(self.upper_atom(slack, !strict, constant).neg())
                }
            }
        }
    }

    fn eq_literal(&mut self, slack: usize, k: Rational) -> Result<Lit, LiaError> {
        if let Some(&e) = self.eq_atoms.get(&(slack, k.clone())) {
            return Ok(Lit::new(e, true));
        }
        let e = self.new_bool();
        self.eq_atoms.insert((slack, k.clone()), e.var());
        let le = self.upper_atom(slack, false, k.clone());
        let lt = self.upper_atom(slack, true, k);
        let ge = lt.neg();
        self.add_clause_lits(vec![e.neg(), le], Vec::new());
        self.add_clause_lits(vec![e.neg(), ge], Vec::new());
        self.add_clause_lits(vec![le.neg(), ge.neg(), e], Vec::new());
        Ok(e)
    }

    /// Internalizes and adds a clause tagged with `deps`.
    pub fn add_clause(&mut self, clause: &Clause, deps: Vec<u32>) -> Result<(), LiaError> {
        let mut lits = Vec::with_capacity(clause.len());
        for l in clause.literals() {
            match self.literal(l)? {
                Lowered::Const(true) => return Ok(()),
                Lowered::Const(false) => {}
                Lowered::Lit(x) => lits.push(x),
            }
        }
        self.add_clause_lits(lits, deps);
        Ok(())
    }

    pub fn add_clause_lits(&mut self, mut lits: Vec<Lit>, mut deps: Vec<u32>) {
        if self.decision_level() > 0 {
            self.cancel_until(0);
        }
        if !self.track_deps {
            deps.clear();
        }
        deps.sort_unstable();
        deps.dedup();
        lits.sort();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return;
        }
        if self.unsat.is_some() {
            return;
        }
        if lits.iter().any(|&l| self.lit_value(l) == Some(true) && self.level[l.var() as usize] == 0) {
            // Satisfied at the root; dependencies of a satisfied clause are irrelevant.
            return;
        }
        // Non-false literals first.
        lits.sort_by_key(|&l| self.is_false(l));
        let ci = self.clauses.len();
        self.clauses.push(ClauseData {
            lits: lits.clone(),
            deps: deps.clone(),
        });
        if lits.is_empty() || self.is_false(lits[0]) {
            let all = self.final_deps(&lits, &deps);
            self.unsat = Some(all);
            return;
        }
        if lits.len() == 1 {
            if self.lit_value(lits[0]).is_none() {
                self.assign_lit(lits[0], Reason::Clause(ci));
            }
            return;
        }
        self.watches[lits[0].index()].push(ci);
        self.watches[lits[1].index()].push(ci);
        if self.is_false(lits[1]) && self.lit_value(lits[0]).is_none() {
            self.assign_lit(lits[0], Reason::Clause(ci));
        }
    }

    pub fn set_cost_constraint(&mut self, c: CostConstraint) {
        self.cancel_until(0);
        self.cost = Some(c);
    }

    pub fn cost_constraint_mut(&mut self) -> Option<&mut CostConstraint> {
        self.cancel_until(0);
        self.cost.as_mut()
    }

    /// Variable whose value is minimized at every consistent leaf.
    pub fn set_objective(&mut self, v: VarId) -> Result<(), LiaError> {
        let x = self.arith_column(v)?;
        self.objective = Some(x);
        Ok(())
    }

    pub fn column(&self, v: VarId) -> Option<usize> {
        self.arith_var.get(&v).copied()
    }

    pub fn is_unsat(&self) -> bool {
        self.unsat.is_some()
    }

    // ------------------------------------------------------------------
    // Trail

    fn assign_lit(&mut self, l: Lit, reason: Reason) {
        let v = l.var() as usize;
        debug_assert_eq!(self.assign[v], 0);
        self.assign[v] = if l.is_positive() { 1 } else { -1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
        self.simplex_marks.push(self.simplex.mark());
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var() as usize;
            self.phase[v] = l.is_positive();
            self.assign[v] = 0;
            self.reason[v] = Reason::Decision;
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.qhead = lim;
        self.simplex.restore(self.simplex_marks[lvl as usize]);
        self.trail_lim.truncate(lvl as usize);
        self.simplex_marks.truncate(lvl as usize);
    }

    pub fn backtrack_to_root(&mut self) {
        self.cancel_until(0);
    }

    // ------------------------------------------------------------------
    // Propagation

    fn lemma_conflict(expl: Vec<u32>) -> Conflict {
        Conflict {
            lits: expl.into_iter().map(|c| Lit(c).neg()).collect(),
            deps: Vec::new(),
        }
    }

    fn assert_bound(&mut self, p: Lit) -> Result<(), Conflict> {
        let v = p.var() as usize;
        let Some(ab) = &self.atom_of[v] else {
            return Ok(());
        };
        let slack = ab.slack;
        let changed = if p.is_positive() {
            let value = ab.when_true.clone();
            self.simplex.assert_upper(slack, value, p.0)
        } else {
            let value = ab.when_false.clone();
            self.simplex.assert_lower(slack, value, p.0)
        };
        match changed {
            Err(expl) => Err(Self::lemma_conflict(expl)),
            Ok(false) => Ok(()),
            Ok(true) => {
                // Implied siblings on the same slack.
                let mut implied = Vec::new();
                for &b in &self.slack_atoms[slack] {
                    if self.assign[b as usize] != 0 {
                        continue;
                    }
                    let other = self.atom_of[b as usize].as_ref().unwrap();
                    if p.is_positive() {
                        let u = &self.atom_of[v].as_ref().unwrap().when_true;
                        if u <= &other.when_true {
                            implied.push(Lit::new(b, true));
                        }
                    } else {
                        let l = &self.atom_of[v].as_ref().unwrap().when_false;
                        if l >= &other.when_false {
                            implied.push(Lit::new(b, false));
                        }
                    }
                }
                for q in implied {
                    self.stats.propagations += 1;
                    self.assign_lit(q, Reason::Lemma(vec![q, p.neg()].into_boxed_slice()));
                }
                Ok(())
            }
        }
    }

    fn bcp(&mut self) -> Result<(), Conflict> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.assert_bound(p)?;
            let false_lit = p.neg();
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let lits = &mut self.clauses[ci].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if self.assign[first.var() as usize] != 0
                    && (self.assign[first.var() as usize] > 0) == first.is_positive()
                {
                    i += 1;
                    continue;
                }
                let mut found = None;
                for k in 2..lits.len() {
                    let l = lits[k];
                    let a = self.assign[l.var() as usize];
                    if a == 0 || (a > 0) == l.is_positive() {
                        found = Some(k);
                        break;
                    }
                }
                if let Some(k) = found {
                    lits.swap(1, k);
                    let new_watch = lits[1];
                    self.watches[new_watch.index()].push(ci);
                    ws.swap_remove(i);
                    continue;
                }
                i += 1;
                if self.assign[first.var() as usize] != 0 {
                    conflict = Some(ci);
                    break;
                }
                self.stats.propagations += 1;
                self.assign_lit(first, Reason::Clause(ci));
            }
            let rest = std::mem::take(&mut self.watches[false_lit.index()]);
            ws.extend(rest);
            self.watches[false_lit.index()] = ws;
            if let Some(ci) = conflict {
                return Err(Conflict {
                    lits: self.clauses[ci].lits.clone(),
                    deps: self.clauses[ci].deps.clone(),
                });
            }
        }
        Ok(())
    }

    /// Checks the cost constraint; returns true if something was propagated.
    fn cost_check(&mut self) -> Result<bool, Conflict> {
        let Some(cc) = &self.cost else {
            return Ok(false);
        };
        let mut sum = CostPair::zero();
        let mut true_lits = Vec::new();
        for (l, w) in &cc.items {
            if self.lit_value(*l) == Some(true) {
                sum = sum.add(w);
                true_lits.push(*l);
            }
        }
        if cc.violated(&sum) {
            return Err(Conflict {
                lits: true_lits.iter().map(|l| l.neg()).collect(),
                deps: Vec::new(),
            });
        }
        let mut to_assign = Vec::new();
        for (l, w) in &cc.items {
            if self.lit_value(*l).is_none() && cc.violated(&sum.add(w)) {
                let mut lemma = vec![l.neg()];
                lemma.extend(true_lits.iter().map(|t| t.neg()));
                to_assign.push(lemma);
            }
        }
        let any = !to_assign.is_empty();
        for lemma in to_assign {
            self.stats.propagations += 1;
            self.assign_lit(lemma[0], Reason::Lemma(lemma.into_boxed_slice()));
        }
        Ok(any)
    }

    fn propagate(&mut self) -> Result<(), Conflict> {
        loop {
            self.bcp()?;
            if self.cost_check()? {
                continue;
            }
            self.simplex.check().map_err(Self::lemma_conflict)?;
            if self.qhead == self.trail.len() {
                return Ok(());
            }
        }
    }

    // ------------------------------------------------------------------
    // Conflict analysis

    fn reason_lits(&self, v: usize) -> (&[Lit], &[u32]) {
        match &self.reason[v] {
            Reason::Decision => (&[], &[]),
            Reason::Clause(ci) => (&self.clauses[*ci].lits, &self.clauses[*ci].deps),
            Reason::Lemma(l) => (l, &[]),
        }
    }

    /// Fills the dependency memo for every root-level assignment.
    fn compute_level0_deps(&mut self) {
        let end = self.trail_lim.first().copied().unwrap_or(self.trail.len());
        for i in 0..end {
            let v = self.trail[i].var() as usize;
            if self.level0_deps[v].is_some() {
                continue;
            }
            let (lits, deps) = self.reason_lits(v);
            let mut acc: Vec<u32> = deps.to_vec();
            for &l in lits {
                let u = l.var() as usize;
                if u != v {
                    if let Some(d) = &self.level0_deps[u] {
                        acc.extend_from_slice(d);
                    }
                }
            }
            acc.sort_unstable();
            acc.dedup();
            self.level0_deps[v] = Some(acc);
        }
    }

    fn final_deps(&mut self, lits: &[Lit], deps: &[u32]) -> Vec<u32> {
        if !self.track_deps {
            return Vec::new();
        }
        self.compute_level0_deps();
        let mut acc = deps.to_vec();
        for &l in lits {
            if let Some(d) = &self.level0_deps[l.var() as usize] {
                acc.extend_from_slice(d);
            }
        }
        acc.sort_unstable();
        acc.dedup();
        acc
    }

    fn bump(&mut self, v: u32) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    /// Returns the learnt clause (asserting literal first), backjump level and deps.
    fn analyze(&mut self, confl: Conflict) -> (Vec<Lit>, u32, Vec<u32>) {
        if self.track_deps {
            self.compute_level0_deps();
        }
        let current = self.decision_level();
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut deps: Vec<u32> = confl.deps;
        let mut touched: Vec<usize> = Vec::new();
        let mut path_c = 0usize;
        let mut idx = self.trail.len();
        let mut clause: Vec<Lit> = confl.lits;
        let mut skip: Option<u32> = None;
        loop {
            for &q in &clause {
                let v = q.var();
                if Some(v) == skip || self.seen[v as usize] {
                    continue;
                }
                self.seen[v as usize] = true;
                touched.push(v as usize);
                if self.level[v as usize] == 0 {
                    if self.track_deps {
                        if let Some(d) = &self.level0_deps[v as usize] {
                            deps.extend_from_slice(d);
                        }
                    }
                    continue;
                }
                self.bump(v);
                if self.level[v as usize] == current {
                    path_c += 1;
                } else {
                    learnt.push(q);
                }
            }
            let pl = loop {
                idx -= 1;
                let l = self.trail[idx];
                if self.seen[l.var() as usize] && self.level[l.var() as usize] == current {
                    break l;
                }
            };
            path_c -= 1;
            if path_c == 0 {
                learnt[0] = pl.neg();
                break;
            }
            let (lits, d) = self.reason_lits(pl.var() as usize);
            clause = lits.to_vec();
            deps.extend_from_slice(d);
            skip = Some(pl.var());
        }
        for v in touched {
            self.seen[v] = false;
        }
        self.var_inc /= 0.95;
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for i in 1..learnt.len() {
                if self.level[learnt[i].var() as usize] > self.level[learnt[best].var() as usize] {
                    best = i;
                }
            }
            learnt.swap(1, best);
            bt = self.level[learnt[1].var() as usize];
        }
        if !self.track_deps {
            deps.clear();
        }
        deps.sort_unstable();
        deps.dedup();
        (learnt, bt, deps)
    }

    fn handle_conflict(&mut self, confl: Conflict) -> bool {
        self.stats.conflicts += 1;
        let max_level = confl
            .lits
            .iter()
            .map(|l| self.level[l.var() as usize])
            .max()
            .unwrap_or(0);
        if max_level == 0 {
            let deps = self.final_deps(&confl.lits, &confl.deps);
            self.unsat = Some(deps);
            return false;
        }
        self.cancel_until(max_level);
        let (learnt, bt, deps) = self.analyze(confl);
        self.cancel_until(bt);
        let ci = self.clauses.len();
        let asserting = learnt[0];
        if learnt.len() > 1 {
            self.watches[learnt[0].index()].push(ci);
            self.watches[learnt[1].index()].push(ci);
        }
        self.clauses.push(ClauseData { lits: learnt, deps });
        self.assign_lit(asserting, Reason::Clause(ci));
        true
    }

    // ------------------------------------------------------------------
    // Search

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assign[v as usize] == 0 {
                return Some(Lit::new(v, self.phase[v as usize]));
            }
        }
        None
    }

    /// Lowest-index Int column with a non-integral value: `(column, floor)`.
    fn fractional(&self) -> Option<(usize, Rational, bool)> {
        for &(_, x) in &self.int_columns {
            let v = self.simplex.value(x);
            if v.d.is_zero() && v.r.is_integer() {
                continue;
            }
            let floor = if v.r.is_integer() {
                if v.d.is_negative() {
                    &v.r - Rational::one()
                } else {
                    v.r.clone()
                }
            } else {
                v.r.floor()
            };
            // Towards zero first: small models are what the callers want, and
            // it keeps the search from drifting off along an unbounded ray.
            let down_first = v.is_positive();
            return Some((x, floor, down_first));
        }
        None
    }

    fn out_of_budget(&self, budget: &Budget, start_conflicts: u64, start_branches: u64) -> bool {
        if let Some(d) = budget.deadline {
            if Instant::now() >= d {
                return true;
            }
        }
        if let Some(m) = budget.max_conflicts {
            if self.stats.conflicts - start_conflicts >= m {
                return true;
            }
        }
        if let Some(m) = budget.max_branches {
            if self.stats.branches - start_branches >= m {
                return true;
            }
        }
        false
    }

    pub fn solve(&mut self, budget: &Budget) -> Result<Outcome, LiaError> {
        if let Some(d) = &self.unsat {
            return Ok(Outcome::Unsat(d.clone()));
        }
        self.cancel_until(0);
        let start_conflicts = self.stats.conflicts;
        let start_branches = self.stats.branches;
        let mut restart_count = 0u64;
        let mut conflicts_until_restart = 100 * luby(0);
        let mut steps = 0u64;
        loop {
            steps += 1;
            if steps % 32 == 0 && self.out_of_budget(budget, start_conflicts, start_branches) {
                self.stats.pivots = self.simplex.pivots;
                return Ok(Outcome::Unknown);
            }
            match self.propagate() {
                Err(confl) => {
                    if !self.handle_conflict(confl) {
                        self.stats.pivots = self.simplex.pivots;
                        return Ok(Outcome::Unsat(self.unsat.clone().unwrap()));
                    }
                    conflicts_until_restart = conflicts_until_restart.saturating_sub(1);
                    if conflicts_until_restart == 0 {
                        restart_count += 1;
                        self.stats.restarts += 1;
                        conflicts_until_restart = 100 * luby(restart_count);
                        self.cancel_until(0);
                    }
                    continue;
                }
                Ok(()) => {}
            }
            if let Some(l) = self.pick_branch() {
                self.stats.decisions += 1;
                self.new_decision_level();
                self.assign_lit(l, Reason::Decision);
                continue;
            }
            if let Some(obj) = self.objective {
                self.simplex.minimize(obj).map_err(|_| LiaError::Unbounded)?;
            }
            match self.fractional() {
                None => {
                    self.stats.pivots = self.simplex.pivots;
                    return Ok(Outcome::Sat);
                }
                Some((x, floor, down_first)) => {
                    // Without this, rows with no integer solution on an
                    // unbounded region make branching run forever.
                    if let Err(expl) = self.simplex.gcd_test() {
                        if !self.handle_conflict(Self::lemma_conflict(expl)) {
                            self.stats.pivots = self.simplex.pivots;
                            return Ok(Outcome::Unsat(self.unsat.clone().unwrap()));
                        }
                        continue;
                    }
                    if self.out_of_budget(budget, start_conflicts, start_branches) {
                        self.stats.pivots = self.simplex.pivots;
                        return Ok(Outcome::Unknown);
                    }
                    self.stats.branches += 1;
                    let atom = self.upper_atom(x, false, floor);
                    debug_assert!(self.lit_value(atom).is_none());
                    self.new_decision_level();
                    self.assign_lit(if down_first { atom } else { atom.neg() }, Reason::Decision);
                }
            }
        }
    }

    /// Model of the last `Sat` outcome over every variable of the table.
    pub fn model(&self) -> Model {
        let delta = self.simplex.concrete_delta();
        let mut m = Model::new();
        for (v, info) in self.vars.iter() {
            match info.sort {
                Sort::Bool => {
                    let value = self
                        .bool_var
                        .get(&v)
                        .map(|&b| self.assign[b as usize] > 0)
                        .unwrap_or(false);
                    m.set_bool(v, value);
                }
                _ => {
                    let value = self
                        .arith_var
                        .get(&v)
                        .map(|&x| self.simplex.value(x).at(&delta))
                        .unwrap_or_else(Rational::zero);
                    m.set(v, value);
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luby_sequence() {
        let got: Vec<u64> = (0..7).map(luby).collect();
        assert_eq!(got, vec![1, 1, 2, 1, 1, 2, 4]);
    }
}
