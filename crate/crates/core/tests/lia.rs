use linsplit::formula::rational::int;
use linsplit::lia::{lia_solve, lia_solve_assuming, Budget, LiaResult};
use linsplit::{Clause, Literal, Model, Polynomial, Rational, Sort, VarId, VarTable};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lin(terms: &[(i64, VarId)], c: i64) -> Polynomial {
    Polynomial::linear(terms.iter().map(|&(a, v)| (int(a), v)), int(c))
}

fn unit(l: Literal) -> Clause {
    Clause::unit(l)
}

#[test]
fn forced_value() {
    let mut t = VarTable::new();
    let x = t.add_original("x", Sort::Int);
    let cs = vec![unit(Literal::ge(lin(&[(1, x)], -1))), unit(Literal::le(lin(&[(1, x)], -1)))];
    match lia_solve(&t, &cs, &Budget::unlimited()).unwrap() {
        LiaResult::Sat(m) => assert_eq!(m.get(x), Some(&int(1))),
        r => panic!("{r:?}"),
    }
}

#[test]
fn infeasible_triangle_core() {
    let mut t = VarTable::new();
    let x = t.add_original("x", Sort::Int);
    let y = t.add_original("y", Sort::Int);
    let cs = vec![
        unit(Literal::le(lin(&[(1, x), (1, y)], -1))),
        unit(Literal::ge(lin(&[(1, x)], -1))),
        unit(Literal::ge(lin(&[(1, y)], -1))),
    ];
    match lia_solve(&t, &cs, &Budget::unlimited()).unwrap() {
        LiaResult::Unsat(core) => {
            assert!(core.clauses.iter().all(|&i| i < 3));
            assert!(!core.clauses.is_empty());
        }
        r => panic!("{r:?}"),
    }
}

#[test]
fn assumptions_are_reported_separately() {
    let mut t = VarTable::new();
    let x = t.add_original("x", Sort::Int);
    let cs = vec![unit(Literal::ge(lin(&[(1, x)], -3)))];
    match lia_solve_assuming(&t, &cs, &[Literal::le(lin(&[(1, x)], -1))], &Budget::unlimited()).unwrap() {
        LiaResult::Unsat(core) => assert_eq!(core.assumptions, vec![0]),
        r => panic!("{r:?}"),
    }
    match lia_solve_assuming(&t, &cs, &[Literal::le(lin(&[(1, x)], -5))], &Budget::unlimited()).unwrap() {
        LiaResult::Sat(m) => {
            let v = m.get(x).unwrap();
            assert!(v >= &int(3) && v <= &int(5));
        }
        r => panic!("{r:?}"),
    }
}

#[test]
fn strict_real_bounds() {
    let mut t = VarTable::new();
    let r = t.add_original("r", Sort::Real);
    // 0 < r < 1 is feasible over the reals
    let cs = vec![unit(Literal::gt(lin(&[(1, r)], 0))), unit(Literal::lt(lin(&[(1, r)], -1)))];
    match lia_solve(&t, &cs, &Budget::unlimited()).unwrap() {
        LiaResult::Sat(m) => {
            let v = m.get(r).unwrap();
            assert!(v.is_positive() && v < &int(1));
        }
        res => panic!("{res:?}"),
    }
    // 0 < r < 0 is not
    let cs = vec![unit(Literal::gt(lin(&[(1, r)], 0))), unit(Literal::lt(lin(&[(1, r)], 0)))];
    assert!(lia_solve(&t, &cs, &Budget::unlimited()).unwrap().is_unsat());
}

#[test]
fn parity_needs_branching() {
    let mut t = VarTable::new();
    let x = t.add_original("x", Sort::Int);
    let y = t.add_original("y", Sort::Int);
    // 2x + 2y = 1 has rational but no integer solutions; keep the box finite
    let cs = vec![
        unit(Literal::eq(lin(&[(2, x), (2, y)], -1))),
        unit(Literal::le(lin(&[(1, x)], -10))),
        unit(Literal::ge(lin(&[(1, x)], 10))),
    ];
    assert!(lia_solve(&t, &cs, &Budget::unlimited()).unwrap().is_unsat());
    // 3x + 2y = 1 with 0 <= x <= 5, y <= 0
    let cs = vec![
        unit(Literal::eq(lin(&[(3, x), (2, y)], -1))),
        unit(Literal::ge(lin(&[(1, x)], 0))),
        unit(Literal::le(lin(&[(1, x)], -5))),
        unit(Literal::le(lin(&[(1, y)], 0))),
    ];
    match lia_solve(&t, &cs, &Budget::unlimited()).unwrap() {
        LiaResult::Sat(m) => {
            for c in &cs {
                assert!(c.eval(&m).unwrap());
            }
        }
        r => panic!("{r:?}"),
    }
}

fn random_literal(rng: &mut ChaCha8Rng, vars: &[VarId]) -> Literal {
    let n = rng.gen_range(1..=vars.len().min(3));
    let mut terms = Vec::new();
    for _ in 0..n {
        let v = vars[rng.gen_range(0..vars.len())];
        let mut a = rng.gen_range(-3..=3);
        if a == 0 {
            a = 1;
        }
        terms.push((a, v));
    }
    let p = lin(&terms, rng.gen_range(-6..=6));
    match rng.gen_range(0..5) {
        0 => Literal::le(p),
        1 => Literal::ge(p),
        2 => Literal::lt(p),
        3 => Literal::eq(p),
        _ => Literal::neq(p),
    }
}

fn enumerate_box(
    vars: &[VarId],
    lo: i64,
    hi: i64,
    f: &mut impl FnMut(&Model) -> bool,
) -> bool {
    let mut vals = vec![lo; vars.len()];
    loop {
        let mut m = Model::new();
        for (v, k) in vars.iter().zip(&vals) {
            m.set(*v, int(*k));
        }
        if f(&m) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == vals.len() {
                return false;
            }
            vals[i] += 1;
            if vals[i] <= hi {
                break;
            }
            vals[i] = lo;
            i += 1;
        }
    }
}

#[test]
fn random_bounded_instances_agree_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..200 {
        let mut t = VarTable::new();
        let vars: Vec<VarId> = (0..4).map(|i| t.add_original(format!("x{i}"), Sort::Int)).collect();
        let mut cs = Vec::new();
        for &v in &vars {
            cs.push(unit(Literal::ge(lin(&[(1, v)], 3))));
            cs.push(unit(Literal::le(lin(&[(1, v)], -3))));
        }
        for _ in 0..rng.gen_range(2..7) {
            let len = rng.gen_range(1..=3);
            cs.push(Clause::new((0..len).map(|_| random_literal(&mut rng, &vars))));
        }
        let expected = enumerate_box(&vars, -3, 3, &mut |m| cs.iter().all(|c| c.eval(m).unwrap()));
        match lia_solve(&t, &cs, &Budget::unlimited()).unwrap() {
            LiaResult::Sat(m) => {
                assert!(expected, "round {round}: solver sat, box empty");
                assert!(cs.iter().all(|c| c.eval(&m).unwrap()));
            }
            LiaResult::Unsat(core) => {
                assert!(!expected, "round {round}: solver unsat, box has a model");
                let sub: Vec<Clause> = core.clauses.iter().map(|&i| cs[i].clone()).collect();
                assert!(
                    lia_solve(&t, &sub, &Budget::unlimited()).unwrap().is_unsat(),
                    "round {round}: core is satisfiable"
                );
            }
            LiaResult::Unknown => panic!("round {round}: unknown"),
        }
    }
}

/// Solves a 3x3 system exactly by Gaussian elimination.
fn solve3(a: [[Rational; 3]; 3], b: [Rational; 3]) -> Option<[Rational; 3]> {
    let mut m: Vec<Vec<Rational>> = (0..3)
        .map(|i| {
            let mut r = a[i].to_vec();
            r.push(b[i].clone());
            r
        })
        .collect();
    for col in 0..3 {
        let piv = (col..3).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for k in 0..4 {
            m[col][k] = &m[col][k] / &p;
        }
        for r in 0..3 {
            if r != col {
                let f = m[r][col].clone();
                for k in 0..4 {
                    let sub = &f * &m[col][k];
                    m[r][k] -= sub;
                }
            }
        }
    }
    Some([m[0][3].clone(), m[1][3].clone(), m[2][3].clone()])
}

#[test]
fn real_systems_agree_with_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..200 {
        let mut t = VarTable::new();
        let vars: Vec<VarId> = (0..3).map(|i| t.add_original(format!("r{i}"), Sort::Real)).collect();
        // rows: a . r <= b
        let mut rows: Vec<([i64; 3], i64)> = Vec::new();
        for _ in 0..6 {
            let a = [rng.gen_range(-4..=4), rng.gen_range(-4..=4), rng.gen_range(-4..=4)];
            rows.push((a, rng.gen_range(-8..=8)));
        }
        for i in 0..3 {
            let mut e = [0; 3];
            e[i] = 1;
            rows.push((e, 10));
            e[i] = -1;
            rows.push((e, 10));
        }
        let cs: Vec<Clause> = rows
            .iter()
            .map(|(a, b)| {
                let terms: Vec<(i64, VarId)> = (0..3).map(|i| (a[i], vars[i])).collect();
                unit(Literal::le(lin(&terms, -b)))
            })
            .collect();
        let holds = |p: &[Rational; 3]| {
            rows.iter().all(|(a, b)| {
                let s: Rational = (0..3).map(|i| int(a[i]) * &p[i]).sum();
                s <= int(*b)
            })
        };
        let mut feasible = false;
        let n = rows.len();
        'outer: for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let pick = [i, j, k];
                    let a = pick.map(|r| rows[r].0.map(int));
                    let b = pick.map(|r| int(rows[r].1));
                    if let Some(p) = solve3(a, b) {
                        if holds(&p) {
                            feasible = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        let res = lia_solve(&t, &cs, &Budget::unlimited()).unwrap();
        assert_eq!(res.is_sat(), feasible, "round {round}");
        if let LiaResult::Sat(m) = res {
            assert!(cs.iter().all(|c| c.eval(&m).unwrap()));
        }
    }
}
