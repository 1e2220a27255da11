#![allow(dead_code)]

use linsplit::formula::rational::int;
use linsplit::*;
use rand::Rng;

pub fn mono(f: &[(VarId, u32)]) -> Monomial {
    Monomial::from_factors(f.iter().copied())
}

pub fn term(c: i64, f: &[(VarId, u32)]) -> Polynomial {
    Polynomial::term(int(c), mono(f))
}

pub fn sum(ps: &[Polynomial]) -> Polynomial {
    ps.iter().fold(Polynomial::zero(), |a, p| a.add(p))
}

pub fn model(pairs: &[(VarId, i64)]) -> Model {
    let mut m = Model::new();
    for &(v, k) in pairs {
        m.set(v, int(k));
    }
    m
}

pub struct Running {
    pub f0: WeightedFormula,
    pub t: VarId,
    pub x: VarId,
    pub w: VarId,
    pub y: VarId,
}

/// tx + y ≥ 4 ∧ t² + x² + w² + y² ≤ 12
pub fn running() -> Running {
    let mut vars = VarTable::new();
    let t = vars.add_original("t", Sort::Int);
    let x = vars.add_original("x", Sort::Int);
    let w = vars.add_original("w", Sort::Int);
    let y = vars.add_original("y", Sort::Int);
    let mut f0 = WeightedFormula::new(vars);
    f0.add_hard(Clause::unit(Literal::ge(
        sum(&[term(1, &[(t, 1), (x, 1)]), term(1, &[(y, 1)])]).add_constant(&int(-4)),
    )));
    f0.add_hard(Clause::unit(Literal::le(
        sum(&[term(1, &[(t, 2)]), term(1, &[(x, 2)]), term(1, &[(w, 2)]), term(1, &[(y, 2)])])
            .add_constant(&int(-12)),
    )));
    Running { f0, t, x, w, y }
}

/// The running example with the soft clause [t² + x² + y² ≤ 1, 1].
pub fn weighted_running() -> Running {
    let mut r = running();
    let (t, x, y) = (r.t, r.x, r.y);
    r.f0.add_soft(
        Clause::unit(Literal::le(
            sum(&[term(1, &[(t, 2)]), term(1, &[(x, 2)]), term(1, &[(y, 2)])]).add_constant(&int(-1)),
        )),
        CostPair::soft_only(int(1)),
    );
    r
}

fn random_poly(rng: &mut impl Rng, vars: &[VarId]) -> Polynomial {
    let mut p = Polynomial::from_int(rng.gen_range(-5..=5));
    for _ in 0..rng.gen_range(1..=3) {
        let degree = rng.gen_range(1..=3);
        let factors: Vec<(VarId, u32)> = (0..degree).map(|_| (vars[rng.gen_range(0..vars.len())], 1)).collect();
        let mut c = rng.gen_range(-5..=5);
        if c == 0 {
            c = 1;
        }
        p = p.add(&term(c, &factors));
    }
    p
}

fn random_literal(rng: &mut impl Rng, vars: &[VarId]) -> Literal {
    let p = random_poly(rng, vars);
    match rng.gen_range(0..10) {
        0..=3 => Literal::le(p),
        4..=5 => Literal::ge(p),
        6..=7 => Literal::lt(p),
        _ => Literal::eq(p),
    }
}

fn random_clause(rng: &mut impl Rng, vars: &[VarId]) -> Clause {
    Clause::new((0..rng.gen_range(1..=2)).map(|_| random_literal(rng, vars)))
}

/// At most `max_vars` Int variables, degree ≤ 3, |coefficients| ≤ 5, at most
/// six hard clauses and `max_soft` soft clauses with weights in 1..=5.
pub fn random_nia(rng: &mut impl Rng, max_vars: usize, max_soft: usize) -> WeightedFormula {
    let mut table = VarTable::new();
    let n = rng.gen_range(1..=max_vars);
    let vars: Vec<VarId> = (0..n).map(|i| table.add_original(format!("x{i}"), Sort::Int)).collect();
    let mut f0 = WeightedFormula::new(table);
    let nsoft = if max_soft == 0 { 0 } else { rng.gen_range(1..=max_soft) };
    let nhard = rng.gen_range(1..=6 - nsoft.min(5));
    for _ in 0..nhard {
        f0.add_hard(random_clause(rng, &vars));
    }
    for _ in 0..nsoft {
        f0.add_soft(random_clause(rng, &vars), CostPair::soft_only(int(rng.gen_range(1..=5))));
    }
    f0
}

/// Adds hard bounds `lo ≤ v ≤ hi` on every variable.
pub fn boxed(mut f0: WeightedFormula, lo: i64, hi: i64) -> WeightedFormula {
    for v in f0.vars.ids().collect::<Vec<_>>() {
        f0.add_hard(Clause::unit(Literal::ge(Polynomial::var(v).add_constant(&int(-lo)))));
        f0.add_hard(Clause::unit(Literal::le(Polynomial::var(v).add_constant(&int(-hi)))));
    }
    f0
}

pub fn holds(f0: &WeightedFormula, m: &Model) -> bool {
    check_model(&f0.clauses, m).unwrap().0
}
