//! General-form simplex over delta-rationals with Bland's rule.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::delta::{delta_room, Delta};
use crate::formula::Rational;

#[derive(Clone, Debug)]
pub struct BoundVal {
    pub value: Delta,
    /// Opaque literal code of the constraint that asserted this bound.
    pub reason: u32,
}

#[derive(Clone, Debug)]
struct Row {
    basic: usize,
    coeffs: Vec<(usize, Rational)>,
}

impl Row {
    fn coeff(&self, x: usize) -> Option<&Rational> {
        self.coeffs
            .binary_search_by_key(&x, |(v, _)| *v)
            .ok()
            .map(|i| &self.coeffs[i].1)
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct Unbounded;

#[derive(Clone, Debug, Default)]
pub struct Simplex {
    is_int: Vec<bool>,
    value: Vec<Delta>,
    lower: Vec<Option<BoundVal>>,
    upper: Vec<Option<BoundVal>>,
    row_of: Vec<Option<usize>>,
    rows: Vec<Row>,
    cols: Vec<BTreeSet<usize>>,
    trail: Vec<(usize, bool, Option<BoundVal>)>,
    pub pivots: u64,
}

impl Simplex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.value.len()
    }

    pub fn add_var(&mut self, is_int: bool) -> usize {
        let x = self.value.len();
        self.is_int.push(is_int);
        self.value.push(Delta::zero());
        self.lower.push(None);
        self.upper.push(None);
        self.row_of.push(None);
        self.cols.push(BTreeSet::new());
        x
    }

    /// Adds a basic variable defined as `sum a_i x_i`.
    pub fn add_row(&mut self, expr: &[(usize, Rational)], is_int: bool) -> usize {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut value = Delta::zero();
        for (x, a) in expr {
            value.add_scaled(&self.value[*x], a);
            match self.row_of[*x] {
                Some(r) => {
                    for (y, b) in &self.rows[r].coeffs {
                        *acc.entry(*y).or_insert_with(Rational::zero) += a * b;
                    }
                }
                None => *acc.entry(*x).or_insert_with(Rational::zero) += a,
            }
        }
        let s = self.add_var(is_int);
        let coeffs: Vec<(usize, Rational)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let ri = self.rows.len();
        for (y, _) in &coeffs {
            self.cols[*y].insert(ri);
        }
        self.rows.push(Row { basic: s, coeffs });
        self.row_of[s] = Some(ri);
        self.value[s] = value;
        s
    }

    pub fn is_int(&self, x: usize) -> bool {
        self.is_int[x]
    }

    pub fn value(&self, x: usize) -> &Delta {
        &self.value[x]
    }

    pub fn lower(&self, x: usize) -> Option<&BoundVal> {
        self.lower[x].as_ref()
    }

    pub fn upper(&self, x: usize) -> Option<&BoundVal> {
        self.upper[x].as_ref()
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    pub fn restore(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (x, is_upper, old) = self.trail.pop().unwrap();
            if is_upper {
                self.upper[x] = old;
            } else {
                self.lower[x] = old;
            }
        }
    }

    /// Tightens the upper bound; on conflict returns the reasons involved.
    pub fn assert_upper(&mut self, x: usize, v: Delta, reason: u32) -> Result<bool, Vec<u32>> {
        if let Some(u) = &self.upper[x] {
            if u.value <= v {
                return Ok(false);
            }
        }
        if let Some(l) = &self.lower[x] {
            if v < l.value {
                return Err(vec![reason, l.reason]);
            }
        }
        let old = self.upper[x].replace(BoundVal { value: v.clone(), reason });
        self.trail.push((x, true, old));
        if self.row_of[x].is_none() && self.value[x] > v {
            self.update(x, v);
        }
        Ok(true)
    }

    pub fn assert_lower(&mut self, x: usize, v: Delta, reason: u32) -> Result<bool, Vec<u32>> {
        if let Some(l) = &self.lower[x] {
            if l.value >= v {
                return Ok(false);
            }
        }
        if let Some(u) = &self.upper[x] {
            if v > u.value {
                return Err(vec![reason, u.reason]);
            }
        }
        let old = self.lower[x].replace(BoundVal { value: v.clone(), reason });
        self.trail.push((x, false, old));
        if self.row_of[x].is_none() && self.value[x] < v {
            self.update(x, v);
        }
        Ok(true)
    }

    fn update(&mut self, x: usize, v: Delta) {
        let diff = &v - &self.value[x];
        for &r in &self.cols[x] {
            let a = self.rows[r].coeff(x).expect("column index out of sync");
            let b = self.rows[r].basic;
            self.value[b].add_scaled(&diff, a);
        }
        self.value[x] = v;
    }

    fn below_lower(&self, x: usize) -> bool {
        self.lower[x].as_ref().is_some_and(|l| self.value[x] < l.value)
    }

    fn above_upper(&self, x: usize) -> bool {
        self.upper[x].as_ref().is_some_and(|u| self.value[x] > u.value)
    }

    fn can_increase(&self, x: usize) -> bool {
        self.upper[x].as_ref().map_or(true, |u| self.value[x] < u.value)
    }

    fn can_decrease(&self, x: usize) -> bool {
        self.lower[x].as_ref().map_or(true, |l| self.value[x] > l.value)
    }

    /// Restores feasibility of all basic variables or explains infeasibility.
    pub fn check(&mut self) -> Result<(), Vec<u32>> {
        loop {
            let mut pick: Option<(usize, usize)> = None;
            for (ri, row) in self.rows.iter().enumerate() {
                let b = row.basic;
                if (self.below_lower(b) || self.above_upper(b)) && pick.map_or(true, |(v, _)| b < v) {
                    pick = Some((b, ri));
                }
            }
            let Some((b, ri)) = pick else {
                return Ok(());
            };
            let increase = self.below_lower(b);
            let entering = self.rows[ri].coeffs.iter().find(|(x, a)| {
                if increase == a.is_positive() {
                    self.can_increase(*x)
                } else {
                    self.can_decrease(*x)
                }
            });
            match entering {
                Some(&(x, _)) => {
                    let target = if increase {
                        self.lower[b].as_ref().unwrap().value.clone()
                    } else {
                        self.upper[b].as_ref().unwrap().value.clone()
                    };
                    self.pivot_and_update(ri, x, target);
                }
                None => {
                    let mut expl = Vec::with_capacity(self.rows[ri].coeffs.len() + 1);
                    if increase {
                        expl.push(self.lower[b].as_ref().unwrap().reason);
                    } else {
                        expl.push(self.upper[b].as_ref().unwrap().reason);
                    }
                    for (x, a) in &self.rows[ri].coeffs {
                        let bound = if increase == a.is_positive() {
                            &self.upper[*x]
                        } else {
                            &self.lower[*x]
                        };
                        expl.push(bound.as_ref().expect("blocking bound must exist").reason);
                    }
                    return Err(expl);
                }
            }
        }
    }

    fn fixed_value(&self, x: usize) -> Option<(&Rational, u32, u32)> {
        let (l, u) = (self.lower[x].as_ref()?, self.upper[x].as_ref()?);
        (l.value == u.value && l.value.d.is_zero()).then_some((&l.value.r, l.reason, u.reason))
    }

    /// Looks for an all-integer row whose free part cannot reach the value
    /// forced by its fixed columns: after clearing denominators, the gcd of
    /// the free coefficients must divide the fixed sum.
    pub fn gcd_test(&self) -> Result<(), Vec<u32>> {
        for row in &self.rows {
            if !self.is_int[row.basic] || row.coeffs.iter().any(|(x, _)| !self.is_int[*x]) {
                continue;
            }
            let scale = row
                .coeffs
                .iter()
                .fold(BigInt::one(), |acc, (_, a)| acc.lcm(a.denom()));
            let terms = std::iter::once((row.basic, BigInt::from(scale.clone())))
                .chain(row.coeffs.iter().map(|(x, a)| (*x, -(a * Rational::from(scale.clone())).to_integer())));
            let mut g = BigInt::zero();
            let mut fixed_sum = Rational::zero();
            let mut expl = Vec::new();
            for (x, k) in terms {
                match self.fixed_value(x) {
                    Some((v, rl, ru)) => {
                        fixed_sum += v * Rational::from(k);
                        expl.push(rl);
                        expl.push(ru);
                    }
                    None => g = g.gcd(&k),
                }
            }
            if g.is_zero() || !fixed_sum.is_integer() {
                continue;
            }
            if !(fixed_sum.to_integer() % &g).is_zero() {
                expl.sort_unstable();
                expl.dedup();
                return Err(expl);
            }
        }
        Ok(())
    }

    fn pivot_and_update(&mut self, ri: usize, x: usize, target: Delta) {
        let a = self.rows[ri].coeff(x).unwrap().clone();
        let b = self.rows[ri].basic;
        let theta = (&target - &self.value[b]).div(&a);
        self.value[b] = target;
        let new_x = &self.value[x] + &theta;
        self.value[x] = new_x;
        for &r in &self.cols[x] {
            if r != ri {
                let c = self.rows[r].coeff(x).unwrap();
                let basic = self.rows[r].basic;
                self.value[basic].add_scaled(&theta, c);
            }
        }
        self.pivot(ri, x);
    }

    /// Makes nonbasic `x` basic in row `ri`.
    fn pivot(&mut self, ri: usize, x: usize) {
        self.pivots += 1;
        let b = self.rows[ri].basic;
        let a = self.rows[ri].coeff(x).unwrap().clone();
        let inv = a.recip();
        let mut new_coeffs: Vec<(usize, Rational)> = Vec::with_capacity(self.rows[ri].coeffs.len());
        for (y, c) in &self.rows[ri].coeffs {
            if *y != x {
                new_coeffs.push((*y, -(c * &inv)));
            }
        }
        let pos = new_coeffs.partition_point(|(y, _)| *y < b);
        new_coeffs.insert(pos, (b, inv));
        self.cols[x].remove(&ri);
        self.cols[b].insert(ri);
        self.row_of[b] = None;
        self.row_of[x] = Some(ri);
        self.rows[ri] = Row {
            basic: x,
            coeffs: new_coeffs,
        };

        let others: Vec<usize> = self.cols[x].iter().copied().collect();
        for r in others {
            let c = self.rows[r].coeff(x).unwrap().clone();
            let src = self.rows[ri].coeffs.clone();
            let dest = std::mem::take(&mut self.rows[r].coeffs);
            let merged = merge_substitute(dest, x, &src, &c);
            // Refresh column sets for this row.
            for (y, _) in &src {
                if merged.binary_search_by_key(y, |(v, _)| *v).is_ok() {
                    self.cols[*y].insert(r);
                } else {
                    self.cols[*y].remove(&r);
                }
            }
            self.cols[x].remove(&r);
            self.rows[r].coeffs = merged;
        }
    }

    /// Drives `x` to its minimum under the current bounds, keeping feasibility.
    /// Requires a feasible tableau.
    pub fn minimize(&mut self, x: usize) -> Result<(), Unbounded> {
        loop {
            let objective: Vec<(usize, Rational)> = match self.row_of[x] {
                Some(r) => self.rows[r].coeffs.clone(),
                None => vec![(x, Rational::one())],
            };
            let entering = objective.iter().find(|(y, c)| {
                if c.is_positive() {
                    self.can_decrease(*y)
                } else {
                    self.can_increase(*y)
                }
            });
            let Some((j, c)) = entering.cloned() else {
                return Ok(());
            };
            let up = c.is_negative();
            // Ratio test; `None` as limiting row means the entering bound itself.
            let mut best: Option<(Delta, Option<usize>, usize)> = None;
            let own = if up { self.upper[j].as_ref() } else { self.lower[j].as_ref() };
            if let Some(bv) = own {
                let step = if up {
                    &bv.value - &self.value[j]
                } else {
                    &self.value[j] - &bv.value
                };
                best = Some((step, None, j));
            }
            for &r in &self.cols[j] {
                let a = self.rows[r].coeff(j).unwrap();
                let b = self.rows[r].basic;
                let grows = a.is_positive() == up;
                let limit = if grows { self.upper[b].as_ref() } else { self.lower[b].as_ref() };
                if let Some(bv) = limit {
                    let room = if grows {
                        &bv.value - &self.value[b]
                    } else {
                        &self.value[b] - &bv.value
                    };
                    let step = room.div(&a.abs());
                    let better = match &best {
                        None => true,
                        Some((s, _, v)) => step < *s || (step == *s && b < *v),
                    };
                    if better {
                        best = Some((step, Some(r), b));
                    }
                }
            }
            match best {
                None => return Err(Unbounded),
                Some((step, None, _)) => {
                    let target = if up {
                        &self.value[j] + &step
                    } else {
                        &self.value[j] - &step
                    };
                    self.update(j, target);
                }
                Some((_, Some(r), b)) => {
                    let a = self.rows[r].coeff(j).unwrap();
                    let grows = a.is_positive() == up;
                    let target = if grows {
                        self.upper[b].as_ref().unwrap().value.clone()
                    } else {
                        self.lower[b].as_ref().unwrap().value.clone()
                    };
                    self.pivot_and_update(r, j, target);
                }
            }
        }
    }

    /// A positive `δ` under which every bound holds numerically.
    pub fn concrete_delta(&self) -> Rational {
        let mut delta = Rational::one();
        for x in 0..self.value.len() {
            if let Some(l) = &self.lower[x] {
                delta = delta_room(&l.value, &self.value[x], &delta);
            }
            if let Some(u) = &self.upper[x] {
                delta = delta_room(&self.value[x], &u.value, &delta);
            }
        }
        delta
    }

    #[cfg(test)]
    fn tableau_consistent(&self) -> bool {
        self.rows.iter().all(|row| {
            let mut v = Delta::zero();
            for (y, c) in &row.coeffs {
                v.add_scaled(&self.value[*y], c);
            }
            v == self.value[row.basic]
        })
    }
}

/// `dest - c·x + c·src`, with `dest` containing `x` with coefficient `c`.
fn merge_substitute(
    dest: Vec<(usize, Rational)>,
    x: usize,
    src: &[(usize, Rational)],
    c: &Rational,
) -> Vec<(usize, Rational)> {
    let mut out = Vec::with_capacity(dest.len() + src.len());
    let mut i = dest.into_iter().filter(|(y, _)| *y != x).peekable();
    let mut j = src.iter().peekable();
    loop {
        match (i.peek(), j.peek()) {
            (None, None) => break,
            (Some(_), None) => out.push(i.next().unwrap()),
            (None, Some(_)) => {
                let (y, a) = j.next().unwrap();
                out.push((*y, a * c));
            }
            (Some((yi, _)), Some((yj, _))) => {
                if yi < yj {
                    out.push(i.next().unwrap());
                } else if yj < yi {
                    let (y, a) = j.next().unwrap();
                    out.push((*y, a * c));
                } else {
                    let (y, a) = i.next().unwrap();
                    let (_, b) = j.next().unwrap();
                    let s = a + b * c;
                    if !s.is_zero() {
                        out.push((y, s));
                    }
                }
            }
        }
    }
    out
}
