use std::fmt;

use num_traits::{One, Signed, Zero};

use super::model::{EvalError, Model};
use super::poly::Polynomial;
use super::rational::{denominators_lcm, numerators_gcd, Rational};
use super::var::{Sort, VarId, VarTable};

/// Relation of an atom `poly rel 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Le,
    Lt,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub poly: Polynomial,
    pub rel: Rel,
}

/// Outcome of normalizing an atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtomNorm {
    True,
    False,
    Atom(Atom),
}

impl Atom {
    pub fn new(poly: Polynomial, rel: Rel) -> Self {
        Self { poly, rel }
    }

    pub fn le(poly: Polynomial) -> Self {
        Self::new(poly, Rel::Le)
    }

    pub fn lt(poly: Polynomial) -> Self {
        Self::new(poly, Rel::Lt)
    }

    pub fn eq(poly: Polynomial) -> Self {
        Self::new(poly, Rel::Eq)
    }

    pub fn is_linear(&self) -> bool {
        self.poly.is_linear()
    }

    /// True when every variable of the atom is integer-sorted.
    pub fn is_integer(&self, vars: &VarTable) -> bool {
        self.poly.vars().iter().all(|&v| vars.sort(v) == Sort::Int)
    }

    pub fn eval(&self, m: &Model) -> Result<bool, EvalError> {
        let v = self.poly.eval(m)?;
        Ok(match self.rel {
            Rel::Le => !v.is_positive(),
            Rel::Lt => v.is_negative(),
            Rel::Eq => v.is_zero(),
        })
    }

    /// Canonical form.
    ///
    /// Integer atoms get integral coefficients with unit gcd and never use
    /// `Lt` (`p < 0` becomes `p + 1 <= 0`); real atoms are scaled so that the
    /// leading non-constant coefficient has absolute value one. Equalities are
    /// additionally sign-normalized.
    pub fn normalize(&self, vars: &VarTable) -> AtomNorm {
        if self.poly.is_constant() {
            return if self.eval(&Model::default()).unwrap_or(false) {
                AtomNorm::True
            } else {
                AtomNorm::False
            };
        }
        if self.is_integer(vars) {
            self.normalize_integer()
        } else {
            self.normalize_real()
        }
    }

    fn normalize_integer(&self) -> AtomNorm {
        let lcm = denominators_lcm(self.poly.terms().map(|(_, c)| c));
        let mut poly = self.poly.scale(&Rational::from_integer(lcm));
        let mut rel = self.rel;
        if rel == Rel::Lt {
            poly = poly.add_constant(&Rational::one());
            rel = Rel::Le;
        }
        let constant = poly.constant_term();
        let g = numerators_gcd(poly.terms().filter(|(m, _)| !m.is_constant()).map(|(_, c)| c));
        debug_assert!(!g.is_zero());
        let g = Rational::from_integer(g);
        let mut linear_part = poly.add_constant(&-constant.clone());
        linear_part = linear_part.scale(&g.recip());
        let scaled_c = &constant / &g;
        let new_c = match rel {
            Rel::Le => scaled_c.ceil(),
            Rel::Eq => {
                if !scaled_c.is_integer() {
                    return AtomNorm::False;
                }
                scaled_c
            }
            Rel::Lt => unreachable!(),
        };
        let mut poly = linear_part.add_constant(&new_c);
        if rel == Rel::Eq && leading_coeff(&poly).is_negative() {
            poly = poly.neg();
        }
        AtomNorm::Atom(Atom::new(poly, rel))
    }

    fn normalize_real(&self) -> AtomNorm {
        let lead = leading_coeff(&self.poly);
        let factor = if self.rel == Rel::Eq {
            lead.recip()
        } else {
            lead.abs().recip()
        };
        AtomNorm::Atom(Atom::new(self.poly.scale(&factor), self.rel))
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> impl fmt::Display + 'a {
        DisplayAtom { atom: self, vars }
    }
}

fn leading_coeff(p: &Polynomial) -> Rational {
    p.terms()
        .find(|(m, _)| !m.is_constant())
        .map(|(_, c)| c.clone())
        .unwrap_or_else(Rational::one)
}

struct DisplayAtom<'a> {
    atom: &'a Atom,
    vars: &'a VarTable,
}

impl fmt::Display for DisplayAtom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.atom.rel {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "=",
        };
        write!(f, "{} {rel} 0", self.atom.poly.display(self.vars))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Atom { atom: Atom, positive: bool },
    Bool { var: VarId, positive: bool },
}

impl Literal {
    pub fn atom(atom: Atom) -> Self {
        Literal::Atom {
            atom,
            positive: true,
        }
    }

    pub fn bool(var: VarId, positive: bool) -> Self {
        Literal::Bool { var, positive }
    }

    /// `p <= 0`
    pub fn le(p: Polynomial) -> Self {
        Self::atom(Atom::le(p))
    }

    /// `p < 0`
    pub fn lt(p: Polynomial) -> Self {
        Self::atom(Atom::lt(p))
    }

    /// `p >= 0`
    pub fn ge(p: Polynomial) -> Self {
        Self::le(p.neg())
    }

    /// `p > 0`
    pub fn gt(p: Polynomial) -> Self {
        Self::lt(p.neg())
    }

    /// `p = 0`
    pub fn eq(p: Polynomial) -> Self {
        Self::atom(Atom::eq(p))
    }

    /// `p != 0`, kept as a negated equality.
    pub fn neq(p: Polynomial) -> Self {
        Literal::Atom {
            atom: Atom::eq(p),
            positive: false,
        }
    }

    pub fn negate(&self) -> Literal {
        match self {
            Literal::Atom { atom, positive } => Literal::Atom {
                atom: atom.clone(),
                positive: !positive,
            },
            Literal::Bool { var, positive } => Literal::Bool {
                var: *var,
                positive: !positive,
            },
        }
    }

    pub fn eval(&self, m: &Model) -> Result<bool, EvalError> {
        match self {
            Literal::Atom { atom, positive } => Ok(atom.eval(m)? == *positive),
            Literal::Bool { var, positive } => {
                let v = m.get(*var).ok_or(EvalError::Unassigned(*var))?;
                Ok(v.is_zero() != *positive)
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        match self {
            Literal::Atom { atom, .. } => atom.is_linear(),
            Literal::Bool { .. } => true,
        }
    }

    pub fn polynomial(&self) -> Option<&Polynomial> {
        match self {
            Literal::Atom { atom, .. } => Some(&atom.poly),
            Literal::Bool { .. } => None,
        }
    }

    /// Canonical literal: negated inequalities are turned into positive ones,
    /// atoms are normalized. Returns `Ok(b)` for literals that are constantly `b`.
    pub fn normalize(&self, vars: &VarTable) -> Result<Literal, bool> {
        match self {
            Literal::Bool { .. } => Ok(self.clone()),
            Literal::Atom { atom, positive } => {
                let (atom, positive) = match (atom.rel, positive) {
                    (_, true) | (Rel::Eq, false) => (atom.clone(), *positive),
                    (Rel::Le, false) => (Atom::lt(atom.poly.neg()), true),
                    (Rel::Lt, false) => (Atom::le(atom.poly.neg()), true),
                };
                match atom.normalize(vars) {
                    AtomNorm::True => Err(positive),
                    AtomNorm::False => Err(!positive),
                    AtomNorm::Atom(a) => Ok(Literal::Atom { atom: a, positive }),
                }
            }
        }
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> impl fmt::Display + 'a {
        DisplayLiteral { lit: self, vars }
    }
}

struct DisplayLiteral<'a> {
    lit: &'a Literal,
    vars: &'a VarTable,
}

impl fmt::Display for DisplayLiteral<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lit {
            Literal::Atom { atom, positive } => {
                if *positive {
                    write!(f, "{}", atom.display(self.vars))
                } else {
                    write!(f, "not({})", atom.display(self.vars))
                }
            }
            Literal::Bool { var, positive } => {
                if *positive {
                    f.write_str(self.vars.name(*var))
                } else {
                    write!(f, "not({})", self.vars.name(*var))
                }
            }
        }
    }
}

/// Disjunction of literals without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Self {
        let mut out: Vec<Literal> = Vec::new();
        for l in lits {
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Self { lits: out }
    }

    pub fn unit(l: Literal) -> Self {
        Self { lits: vec![l] }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn push(&mut self, l: Literal) {
        if !self.lits.contains(&l) {
            self.lits.push(l);
        }
    }

    pub fn is_linear(&self) -> bool {
        self.lits.iter().all(Literal::is_linear)
    }

    pub fn eval(&self, m: &Model) -> Result<bool, EvalError> {
        for l in &self.lits {
            if l.eval(m)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Normalizes every literal; `None` when the clause is trivially true.
    pub fn normalize(&self, vars: &VarTable) -> Option<Clause> {
        let mut out = Clause::empty();
        for l in &self.lits {
            match l.normalize(vars) {
                Ok(n) => out.push(n),
                Err(true) => return None,
                Err(false) => {}
            }
        }
        let tautology = out
            .lits
            .iter()
            .any(|l| out.lits.contains(&l.negate()));
        if tautology {
            None
        } else {
            Some(out)
        }
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> impl fmt::Display + 'a {
        DisplayClause { clause: self, vars }
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<T: IntoIterator<Item = Literal>>(iter: T) -> Self {
        Clause::new(iter)
    }
}

struct DisplayClause<'a> {
    clause: &'a Clause,
    vars: &'a VarTable,
}

impl fmt::Display for DisplayClause<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clause.is_empty() {
            return f.write_str("false");
        }
        for (i, l) in self.clause.lits.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{}", l.display(self.vars))?;
        }
        Ok(())
    }
}
