use super::term::Term;
use crate::formula::{Clause, Literal, Sort, VarOrigin, VarTable};

/// Negation normal form with `Iff` and `Ite` expanded. Constants only occur
/// at the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nnf {
    Const(bool),
    Lit(Literal),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

pub fn nnf(t: &Term, positive: bool) -> Nnf {
    Normalizer { naming: None }.run(t, positive)
}

/// Like [`nnf`], but compound operands of `Iff` and the condition of `Ite`,
/// which would otherwise be copied in both polarities, are replaced by fresh
/// Bools `d`. The definitions `d ↔ operand` are returned for the hard part.
pub fn nnf_named(t: &Term, positive: bool, vars: &mut VarTable) -> (Nnf, Vec<Nnf>) {
    let mut n = Normalizer {
        naming: Some((vars, Vec::new())),
    };
    let out = n.run(t, positive);
    (out, n.naming.unwrap().1)
}

struct Normalizer<'a> {
    naming: Option<(&'a mut VarTable, Vec<Nnf>)>,
}

impl Normalizer<'_> {
    fn run(&mut self, t: &Term, positive: bool) -> Nnf {
        match t {
            Term::Const(b) => Nnf::Const(*b == positive),
            Term::Lit(l) => Nnf::Lit(if positive { l.clone() } else { l.negate() }),
            Term::Not(t) => self.run(t, !positive),
            Term::And(ts) => junction(ts.iter().map(|t| self.run(t, positive)).collect(), positive),
            Term::Or(ts) => junction(ts.iter().map(|t| self.run(t, positive)).collect(), !positive),
            Term::Iff(a, b) => {
                // a <-> b  is (a & b) | (!a & !b); its negation (a & !b) | (!a & b).
                let a = self.shared(a);
                let b = self.shared(b);
                let ab = junction(vec![self.run(&a, true), self.run(&b, positive)], true);
                let nab = junction(vec![self.run(&a, false), self.run(&b, !positive)], true);
                junction(vec![ab, nab], false)
            }
            Term::Ite(c, th, el) => {
                let c = self.shared(c);
                let left = junction(vec![self.run(&c, true), self.run(th, positive)], true);
                let right = junction(vec![self.run(&c, false), self.run(el, positive)], true);
                junction(vec![left, right], false)
            }
        }
    }

    /// A term that is about to be used in both polarities.
    fn shared(&mut self, t: &Term) -> Term {
        if matches!(t, Term::Const(_) | Term::Lit(_)) || self.naming.is_none() {
            return t.clone();
        }
        let pos = self.run(t, true);
        let neg = self.run(t, false);
        let (vars, defs) = self.naming.as_mut().unwrap();
        let d = vars.fresh("def", Sort::Bool, VarOrigin::Auxiliary);
        defs.push(junction(vec![Nnf::Lit(Literal::bool(d, false)), pos], false));
        defs.push(junction(vec![Nnf::Lit(Literal::bool(d, true)), neg], false));
        Term::Lit(Literal::bool(d, true))
    }
}

/// Builds a conjunction (`and = true`) or disjunction, flattening and folding
/// constants.
fn junction(parts: Vec<Nnf>, and: bool) -> Nnf {
    let mut out = Vec::new();
    for p in parts {
        match p {
            Nnf::Const(b) if b == and => {}
            Nnf::Const(b) => return Nnf::Const(b),
            Nnf::And(ps) if and => out.extend(ps),
            Nnf::Or(ps) if !and => out.extend(ps),
            p => out.push(p),
        }
    }
    match out.len() {
        0 => Nnf::Const(and),
        1 => out.pop().unwrap(),
        _ if and => Nnf::And(out),
        _ => Nnf::Or(out),
    }
}

/// Clauses of `n` with Plaisted-Greenbaum naming: a conjunction under a
/// disjunction gets a fresh Bool `t` and clauses `¬t ∨ conjunct`.
pub fn tseitin(n: &Nnf, vars: &mut VarTable) -> Vec<Clause> {
    let mut out = Vec::new();
    match n {
        Nnf::Const(true) => {}
        Nnf::Const(false) => out.push(Clause::empty()),
        Nnf::And(ps) => {
            for p in ps {
                out.extend(tseitin(p, vars));
            }
        }
        _ => {
            let lits = disjuncts(n, vars, &mut out);
            out.push(Clause::new(lits));
        }
    }
    out
}

fn disjuncts(n: &Nnf, vars: &mut VarTable, out: &mut Vec<Clause>) -> Vec<Literal> {
    match n {
        Nnf::Const(_) => unreachable!("constants are folded away below the root"),
        Nnf::Lit(l) => vec![l.clone()],
        Nnf::Or(ps) => ps.iter().flat_map(|p| disjuncts(p, vars, out)).collect(),
        Nnf::And(ps) => {
            let t = vars.fresh("tseitin", Sort::Bool, VarOrigin::Auxiliary);
            for p in ps {
                let mut lits = vec![Literal::bool(t, false)];
                lits.extend(disjuncts(p, vars, out));
                out.push(Clause::new(lits));
            }
            vec![Literal::bool(t, true)]
        }
    }
}

/// Clauses of `n` by distributing disjunctions over conjunctions, without
/// fresh variables. `None` when more than `limit` clauses would be produced.
pub fn distribute(n: &Nnf, limit: usize) -> Option<Vec<Clause>> {
    Some(dist(n, limit)?.into_iter().map(Clause::new).collect())
}

fn dist(n: &Nnf, limit: usize) -> Option<Vec<Vec<Literal>>> {
    match n {
        Nnf::Const(true) => Some(vec![]),
        Nnf::Const(false) => Some(vec![vec![]]),
        Nnf::Lit(l) => Some(vec![vec![l.clone()]]),
        Nnf::And(ps) => {
            let mut out = Vec::new();
            for p in ps {
                out.extend(dist(p, limit)?);
                if out.len() > limit {
                    return None;
                }
            }
            Some(out)
        }
        Nnf::Or(ps) => {
            let mut acc: Vec<Vec<Literal>> = vec![vec![]];
            for p in ps {
                let cs = dist(p, limit)?;
                if acc.len() * cs.len() > limit {
                    return None;
                }
                let mut next = Vec::with_capacity(acc.len() * cs.len());
                for a in &acc {
                    for c in &cs {
                        let mut clause = a.clone();
                        clause.extend(c.iter().cloned());
                        next.push(clause);
                    }
                }
                acc = next;
            }
            Some(acc)
        }
    }
}

/// A soft term's clause plus the definitions it needs as hard clauses. A
/// conjunction becomes a fresh indicator `b` with soft `[b]` and hard `¬b ∨ c`.
pub fn tseitin_soft(n: &Nnf, vars: &mut VarTable) -> (Clause, Vec<Clause>) {
    let mut defs = Vec::new();
    let soft = match n {
        Nnf::Const(true) => unreachable!("a true soft term carries no cost"),
        Nnf::Const(false) => Clause::empty(),
        _ => Clause::new(disjuncts(n, vars, &mut defs)),
    };
    (soft, defs)
}
