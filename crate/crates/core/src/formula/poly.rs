use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::model::{EvalError, Model};
use super::rational::{pow_rational, Rational};
use super::var::{VarId, VarTable};

/// Power product of variables, kept sorted by variable with no repeats.
///
/// The empty product is the constant monomial `1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    factors: Vec<(VarId, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: VarId) -> Self {
        Self {
            factors: vec![(v, 1)],
        }
    }

    /// Builds a monomial from arbitrary factors, merging repeats and dropping
    /// zero exponents.
    pub fn from_factors(factors: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut merged: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in factors {
            if e > 0 {
                *merged.entry(v).or_insert(0) += e;
            }
        }
        Self {
            factors: merged.into_iter().collect(),
        }
    }

    pub fn factors(&self) -> &[(VarId, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    /// The variable of a degree-one monomial.
    pub fn as_var(&self) -> Option<VarId> {
        match self.factors.as_slice() {
            [(v, 1)] => Some(*v),
            _ => None,
        }
    }

    /// `Some(v)` when the monomial is exactly `v^2`.
    pub fn as_square(&self) -> Option<VarId> {
        match self.factors.as_slice() {
            [(v, 2)] => Some(*v),
            _ => None,
        }
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.factors
            .iter()
            .find(|&&(w, _)| w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.exponent(v) > 0
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.factors.iter().map(|&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_factors(self.factors.iter().chain(other.factors.iter()).copied())
    }

    /// The monomial with every occurrence of `v` removed.
    pub fn without(&self, v: VarId) -> Monomial {
        Monomial {
            factors: self.factors.iter().filter(|&&(w, _)| w != v).copied().collect(),
        }
    }

    pub fn eval(&self, m: &Model) -> Result<Rational, EvalError> {
        let mut acc = Rational::one();
        for &(v, e) in &self.factors {
            let value = m.get(v).ok_or(EvalError::Unassigned(v))?;
            acc *= pow_rational(value, e);
        }
        Ok(acc)
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> impl fmt::Display + 'a {
        DisplayMonomial { mono: self, vars }
    }
}

struct DisplayMonomial<'a> {
    mono: &'a Monomial,
    vars: &'a VarTable,
}

impl fmt::Display for DisplayMonomial<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mono.is_constant() {
            return f.write_str("1");
        }
        for (i, &(v, e)) in self.mono.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            f.write_str(self.vars.name(v))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Multivariate polynomial with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(Rational::from_integer(c.into()))
    }

    pub fn var(v: VarId) -> Self {
        Self::term(Rational::one(), Monomial::var(v))
    }

    pub fn term(coeff: Rational, mono: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(mono, coeff);
        p
    }

    /// Builds `sum coeff_i * v_i + constant`.
    pub fn linear(terms: impl IntoIterator<Item = (Rational, VarId)>, constant: Rational) -> Self {
        let mut p = Self::constant(constant);
        for (c, v) in terms {
            p.add_term(Monomial::var(v), c);
        }
        p
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, mono: &Monomial) -> Rational {
        self.terms.get(mono).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one())
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_constant)
    }

    /// Sorted, deduplicated list of variables occurring in the polynomial.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out: Vec<VarId> = self.terms.keys().flat_map(|m| m.vars()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> + '_ {
        self.terms.keys()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * k))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn add_constant(&self, k: &Rational) -> Polynomial {
        let mut out = self.clone();
        out.add_term(Monomial::one(), k.clone());
        out
    }

    pub fn eval(&self, m: &Model) -> Result<Rational, EvalError> {
        let mut acc = Rational::zero();
        for (mono, c) in &self.terms {
            acc += c * mono.eval(m)?;
        }
        Ok(acc)
    }

    /// Substitutes every occurrence of the given monomials by a single term,
    /// leaving other terms untouched.
    pub fn replace_monomials(&self, f: &mut impl FnMut(&Monomial) -> Option<VarId>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            match f(m) {
                Some(v) => out.add_term(Monomial::var(v), c.clone()),
                None => out.add_term(m.clone(), c.clone()),
            }
        }
        out
    }

    /// Substitutes `v := value` everywhere.
    pub fn substitute(&self, v: VarId, value: &Rational) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                out.add_term(m.clone(), c.clone());
            } else {
                out.add_term(m.without(v), c * pow_rational(value, e));
            }
        }
        out
    }

    /// Splits the polynomial into its coefficient for each listed variable and
    /// the remainder, assuming every monomial has total degree at most one in
    /// `group`. Returns `None` if a monomial mentions two of them or one with
    /// exponent above one.
    pub fn split_linear_in(
        &self,
        group: &impl Fn(VarId) -> bool,
    ) -> Option<(BTreeMap<VarId, Polynomial>, Polynomial)> {
        let mut coeffs: BTreeMap<VarId, Polynomial> = BTreeMap::new();
        let mut rest = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut grouped = m.factors().iter().filter(|&&(v, _)| group(v));
            match (grouped.next(), grouped.next()) {
                (None, _) => rest.add_term(m.clone(), c.clone()),
                (Some(&(v, 1)), None) => {
                    coeffs
                        .entry(v)
                        .or_default()
                        .add_term(m.without(v), c.clone());
                }
                _ => return None,
            }
        }
        coeffs.retain(|_, p| !p.is_zero());
        Some((coeffs, rest))
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> impl fmt::Display + 'a {
        DisplayPoly { poly: self, vars }
    }
}

struct DisplayPoly<'a> {
    poly: &'a Polynomial,
    vars: &'a VarTable,
}

impl fmt::Display for DisplayPoly<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.poly.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_constant() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", m.display(self.vars))?;
            } else {
                write!(f, "{abs}*{}", m.display(self.vars))?;
            }
        }
        Ok(())
    }
}

/// Substitutes `v := k` in a single monomial. Errors when `v` does not occur.
pub fn eval_monomial_at(q: &Monomial, v: VarId, k: &Rational) -> Result<Polynomial, EvalError> {
    let e = q.exponent(v);
    if e == 0 {
        return Err(EvalError::NotInMonomial(v));
    }
    Ok(Polynomial::term(pow_rational(k, e), q.without(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::rational::int;

    fn vars3() -> (VarTable, VarId, VarId, VarId) {
        let mut t = VarTable::new();
        let x = t.add_original("x", crate::formula::Sort::Int);
        let y = t.add_original("y", crate::formula::Sort::Int);
        let z = t.add_original("z", crate::formula::Sort::Int);
        (t, x, y, z)
    }

    #[test]
    fn add_disjoint_terms() {
        let (_, t, x, y) = vars3();
        let tx = Polynomial::term(int(1), Monomial::from_factors([(t, 1), (x, 1)]));
        let sum = tx.add(&Polynomial::var(y));
        assert_eq!(sum.num_terms(), 2);
        assert_eq!(sum.coeff(&Monomial::var(y)), int(1));
    }

    #[test]
    fn multiply_adds_exponents() {
        let (_, x, y, z) = vars3();
        let x2 = Polynomial::term(int(1), Monomial::from_factors([(x, 2)]));
        let yz = Polynomial::term(int(1), Monomial::from_factors([(y, 1), (z, 1)]));
        let prod = x2.mul(&yz);
        let expected = Monomial::from_factors([(x, 2), (y, 1), (z, 1)]);
        assert_eq!(prod.coeff(&expected), int(1));
        assert_eq!(prod.num_terms(), 1);
        assert_eq!(expected.degree(), 4);
    }

    #[test]
    fn scale_distributes() {
        let (_, t, x, _) = vars3();
        let p = Polynomial::term(int(1), Monomial::from_factors([(t, 2)]))
            .add(&Polynomial::term(int(1), Monomial::from_factors([(x, 2)])));
        let q = p.scale(&int(2));
        assert_eq!(q.coeff(&Monomial::from_factors([(t, 2)])), int(2));
        assert_eq!(q.coeff(&Monomial::from_factors([(x, 2)])), int(2));
        assert!(p.scale(&int(0)).is_zero());
    }

    #[test]
    fn cancellation_removes_terms() {
        let (_, x, _, _) = vars3();
        let p = Polynomial::var(x).sub(&Polynomial::var(x));
        assert!(p.is_zero());
    }

    #[test]
    fn eval_monomial_at_examples() {
        let (_, x, y, z) = vars3();
        let q = Monomial::from_factors([(x, 2), (y, 1), (z, 1)]);
        let r = eval_monomial_at(&q, x, &int(2)).unwrap();
        assert_eq!(r.coeff(&Monomial::from_factors([(y, 1), (z, 1)])), int(4));

        let tx = Monomial::from_factors([(x, 1), (y, 1)]);
        assert!(eval_monomial_at(&tx, x, &int(0)).unwrap().is_zero());

        let sq = Monomial::from_factors([(x, 2)]);
        assert_eq!(eval_monomial_at(&sq, x, &int(-3)).unwrap(), Polynomial::from_int(9));

        assert!(matches!(
            eval_monomial_at(&sq, y, &int(1)),
            Err(EvalError::NotInMonomial(_))
        ));
    }

    #[test]
    fn split_linear_rejects_products_of_group() {
        let (_, x, y, z) = vars3();
        let p = Polynomial::term(int(3), Monomial::from_factors([(x, 1), (y, 1)]))
            .add(&Polynomial::var(z));
        let (coeffs, rest) = p.split_linear_in(&|v| v == y).unwrap();
        assert_eq!(coeffs[&y], Polynomial::term(int(3), Monomial::var(x)));
        assert_eq!(rest, Polynomial::var(z));
        let bad = Polynomial::term(int(1), Monomial::from_factors([(y, 1), (z, 1)]));
        assert!(bad.split_linear_in(&|v| v == y || v == z).is_none());
    }
}
