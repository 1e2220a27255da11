mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use common::*;
use linsplit::ea::{solve_ea, to_motzkin_system};
use linsplit::formula::rational::{int, ratio};
use linsplit::lia::Budget;
use linsplit::nia::{solve_maxsmt, NiaConfig, Status};
use linsplit::oracle::{brute_force_nia, OracleResult};
use linsplit::smtlib::*;
use linsplit::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn var(f: &WeightedFormula, name: &str) -> VarId {
    f.vars.lookup(name).unwrap()
}

fn v(x: VarId) -> Polynomial {
    Polynomial::var(x)
}

fn decls(names: &str, sort: &str) -> String {
    names
        .split_whitespace()
        .map(|n| format!("(declare-const {n} {sort})\n"))
        .collect()
}

fn qf(body: &str) -> Result<Script, ParseError> {
    parse_script(&format!("{}{body}\n(check-sat)\n", decls("t x w y", "Int")))
}

fn kind(r: Result<Script, ParseError>) -> ErrorKind {
    r.unwrap_err().kind
}

#[test]
fn product_bound_is_one_hard_clause() {
    let s = qf("(assert (>= (+ (* t x) y) 4))").unwrap();
    let f = &s.formula;
    let (t, x, y) = (var(f, "t"), var(f, "x"), var(f, "y"));
    assert_eq!(f.clauses.len(), 1);
    let expected = Clause::unit(Literal::ge(sum(&[term(1, &[(t, 1), (x, 1)]), v(y)]).add_constant(&int(-4))));
    assert_eq!(f.clauses[0].clause, expected);
    assert_eq!(f.clauses[0].weight, Weight::Hard);
    assert_eq!(s.commands, vec![Command::CheckSat]);
}

#[test]
fn soft_assertion_has_pair_weight_zero_w() {
    let s = qf("(assert-soft (<= (+ (* t t) (* x x) (* y y)) 1) :weight 1)").unwrap();
    let f = &s.formula;
    let (t, x, y) = (var(f, "t"), var(f, "x"), var(f, "y"));
    assert_eq!(f.clauses.len(), 1);
    let p = sum(&[term(1, &[(t, 2)]), term(1, &[(x, 2)]), term(1, &[(y, 2)])]).add_constant(&int(-1));
    assert_eq!(f.clauses[0].clause, Clause::unit(Literal::le(p)));
    assert_eq!(f.clauses[0].weight, Weight::Soft(CostPair::new(int(0), int(1))));
    assert_eq!(s.soft_asserts.len(), 1);
}

#[test]
fn vacuous_assert_adds_nothing() {
    let s = qf("(assert true)").unwrap();
    assert!(s.formula.clauses.is_empty());
    assert_eq!(s.hard_asserts, vec![Term::Const(true)]);
    let s = qf("(assert false)").unwrap();
    assert_eq!(s.formula.clauses.len(), 1);
    assert!(s.formula.clauses[0].clause.is_empty());
}

#[test]
fn soft_weights_accept_numerals_decimals_and_fractions() {
    let s = qf(
        "(assert-soft (> x 0))\n(assert-soft (> y 0) :weight 0.25)\n(assert-soft (> t 0) :id goal :weight (/ 3 2))",
    )
    .unwrap();
    let ws: Vec<Rational> = s.formula.soft().map(|c| c.weight.soft().unwrap().soft.clone()).collect();
    assert_eq!(ws, vec![int(1), ratio(1, 4), ratio(3, 2)]);
    assert!(matches!(kind(qf("(assert-soft (> x 0) :weight 0)")), ErrorKind::Script(_)));
    assert!(matches!(kind(qf("(assert-soft (> x 0) :weight (- 2))")), ErrorKind::Script(_)));
}

#[test]
fn errors_carry_line_and_column() {
    let e = parse_script("(declare-const x Int)\n(assert (> z 0))\n(check-sat)").unwrap_err();
    assert_eq!(e.pos, Pos { line: 2, col: 12 });
    assert_eq!(e.kind, ErrorKind::Undeclared("z".into()));
    assert_eq!(e.to_string(), "2:12: undeclared identifier `z`");

    let e = parse_script("(declare-const x Int)\n  (assert (+ x 1))\n(check-sat)").unwrap_err();
    assert_eq!(e.pos, Pos { line: 2, col: 11 });
    assert!(matches!(e.kind, ErrorKind::Sort(_)));

    let e = parse_script("(assert (> 1.2.3 0))").unwrap_err();
    assert_eq!(e.pos, Pos { line: 1, col: 12 });
    assert!(matches!(e.kind, ErrorKind::Lexical(_)));

    let e = parse_script("(check-sat\n").unwrap_err();
    assert_eq!(e.pos, Pos { line: 1, col: 1 });
    assert!(matches!(e.kind, ErrorKind::Syntax(_)));
}

#[test]
fn unsupported_constructs_are_rejected() {
    for body in [
        "(assert (> (/ x 2) 0))",
        "(assert (> (div x 2) 0))",
        "(assert (> (mod x 2) 0))",
        "(assert (> (ite (> x 0) x y) 0))",
        "(assert (> (select a x) 0))",
        "(push 1)",
    ] {
        assert!(matches!(kind(qf(body)), ErrorKind::Unsupported(_)), "{body}");
    }
    let e = parse_script("(declare-fun f (Int) Int)\n(check-sat)").unwrap_err();
    assert!(matches!(e.kind, ErrorKind::Unsupported(_)));
    let e = parse_script("(declare-const a (Array Int Int))\n(check-sat)").unwrap_err();
    assert!(matches!(e.kind, ErrorKind::Unsupported(_)));
    assert!(matches!(kind(qf("(assert (forall ((z Real)) (> z x)))")), ErrorKind::Unsupported(_)));
}

#[test]
fn check_sat_appears_exactly_once() {
    let no = parse_script("(declare-const x Int)\n(assert (> x 0))").unwrap_err();
    assert!(matches!(no.kind, ErrorKind::Script(_)));
    let two = parse_script("(declare-const x Int)\n(check-sat)\n(check-sat)").unwrap_err();
    assert!(matches!(two.kind, ErrorKind::Script(_)));
    assert_eq!(two.pos, Pos { line: 3, col: 1 });
    let after = parse_script("(declare-const x Int)\n(check-sat)\n(assert (> x 0))").unwrap_err();
    assert!(matches!(after.kind, ErrorKind::Script(_)));
}

#[test]
fn commands_and_ignored_options() {
    let s = parse_script(
        "(set-info :status sat)\n(set-option :produce-models true)\n(set-logic QF_NIA)\n(declare-fun x () Int)\n\
         (assert (> x 0))\n(check-sat)\n(get-objectives)\n(get-model)\n(exit)\n(this is ignored)",
    )
    .unwrap();
    assert_eq!(s.commands, vec![Command::CheckSat, Command::GetObjectives, Command::GetModel]);
    assert_eq!(s.declarations.len(), 1);
    assert_eq!(s.declarations[0].0, "x");
    assert!(matches!(
        parse_script("(declare-const x Int)\n(declare-const x Int)\n(check-sat)").unwrap_err().kind,
        ErrorKind::Redeclared(_)
    ));
    assert!(matches!(
        parse_script("(set-logic QF_BV)\n(check-sat)").unwrap_err().kind,
        ErrorKind::Unsupported(_)
    ));
}

fn assignments(f: &WeightedFormula, names: &[&str], values: &[i64]) -> Model {
    let mut m = Model::new();
    for (n, &k) in names.iter().zip(values) {
        m.set(var(f, n), int(k));
    }
    m
}

/// Truth of every hard term at an integer point, checked through Term::eval.
fn terms_hold(s: &Script, m: &Model) -> bool {
    s.hard_asserts.iter().all(|t| t.eval(m).unwrap())
}

#[test]
fn chains_distinct_and_let_have_their_meaning() {
    let s = qf("(assert (< x y t))\n(assert (distinct x w t))\n(assert (let ((s (+ x y))) (= s 3)))").unwrap();
    let names = ["t", "x", "w", "y"];
    let cases = [
        ([3, 1, 0, 2], true),
        ([3, 1, 1, 2], false),
        ([2, 1, 0, 2], false),
        ([3, 1, 3, 2], false),
        ([4, 0, 1, 2], false),
    ];
    for (vals, expected) in cases {
        let m = assignments(&s.formula, &names, &vals);
        assert_eq!(terms_hold(&s, &m), expected, "{vals:?}");
    }
}

#[test]
fn boolean_equality_ite_and_implication() {
    let text = format!(
        "{}{}(assert (= p (> x 0) (not q)))\n(assert (ite p (=> q (< x 0)) (xor q r)))\n(check-sat)",
        decls("x", "Int"),
        decls("p q r", "Bool")
    );
    let s = parse_script(&text).unwrap();
    let f = &s.formula;
    let (x, p, q, r) = (var(f, "x"), var(f, "p"), var(f, "q"), var(f, "r"));
    let mut sat_points = Vec::new();
    for xv in -1..=1 {
        for bits in 0..8 {
            let mut m = Model::new();
            m.set(x, int(xv));
            m.set_bool(p, bits & 1 != 0);
            m.set_bool(q, bits & 2 != 0);
            m.set_bool(r, bits & 4 != 0);
            if terms_hold(&s, &m) {
                sat_points.push((xv, bits));
            }
        }
    }
    // p = (x > 0) = ¬q; if p then q → x < 0 else q xor r.
    // p: x=1, q=false, r any. ¬p: x ≤ 0, q=true, r=false.
    assert_eq!(sat_points, vec![(-1, 2), (0, 2), (1, 1), (1, 5)]);
}

#[test]
fn negative_symbols_and_decimals_are_constants() {
    let s = parse_script("(declare-const r Real)\n(assert (>= r -2))\n(assert (<= r 0.5))\n(check-sat)").unwrap();
    let r = var(&s.formula, "r");
    assert_eq!(s.formula.clauses[0].clause, Clause::unit(Literal::ge(v(r).add_constant(&int(2)))));
    assert_eq!(s.formula.clauses[1].clause, Clause::unit(Literal::le(v(r).add_constant(&ratio(-1, 2)))));
}

#[test]
fn nested_conjunctions_get_tseitin_names() {
    let s = qf("(assert (or (and (> x 0) (> y 0)) (< t 0)))").unwrap();
    let f = &s.formula;
    let aux: Vec<VarId> = f.vars.iter().filter(|(_, i)| i.origin == VarOrigin::Auxiliary).map(|(v, _)| v).collect();
    assert_eq!(aux.len(), 1);
    assert_eq!(f.clauses.len(), 3);
    let t_lit = Literal::bool(aux[0], true);
    assert_eq!(f.clauses[2].clause, Clause::new([t_lit, Literal::lt(v(var(f, "t")))]));

    // A soft conjunction gets an indicator; its definitions are hard.
    let s = qf("(assert-soft (and (> x 0) (> y 0)) :weight 2)").unwrap();
    let f = &s.formula;
    let hard: Vec<_> = f.hard().collect();
    let soft: Vec<_> = f.soft().collect();
    assert_eq!((hard.len(), soft.len()), (2, 1));
    let b = match soft[0].clause.literals() {
        [Literal::Bool { var, positive: true }] => *var,
        other => panic!("unexpected soft clause {other:?}"),
    };
    assert!(hard.iter().all(|c| c.clause.literals()[0] == Literal::bool(b, false)));
}

/// Random Bool structure over comparisons of three Int variables, with its
/// own evaluator.
#[derive(Clone, Debug)]
enum Gen {
    Cmp(&'static str, i64, usize, i64),
    BoolVar(usize),
    Not(Box<Gen>),
    Nary(&'static str, Vec<Gen>),
    Ite(Box<Gen>, Box<Gen>, Box<Gen>),
}

const INT_NAMES: [&str; 3] = ["a", "b", "c"];
const BOOL_NAMES: [&str; 2] = ["p", "q"];

impl Gen {
    fn random(rng: &mut impl Rng, connectives: &mut u32) -> Gen {
        if *connectives == 0 || rng.gen_bool(0.35) {
            return if rng.gen_bool(0.8) {
                let op = ["<=", "<", ">=", ">", "="][rng.gen_range(0..5)];
                Gen::Cmp(op, rng.gen_range(-2..=2), rng.gen_range(0..3), rng.gen_range(-3..=3))
            } else {
                Gen::BoolVar(rng.gen_range(0..2))
            };
        }
        *connectives -= 1;
        match rng.gen_range(0..7) {
            0 => Gen::Not(Box::new(Gen::random(rng, connectives))),
            1 => Gen::Ite(
                Box::new(Gen::random(rng, connectives)),
                Box::new(Gen::random(rng, connectives)),
                Box::new(Gen::random(rng, connectives)),
            ),
            k => {
                let op = ["and", "or", "=>", "=", "xor"][k - 2];
                let n = if op == "xor" { 2 } else { rng.gen_range(2..=3) };
                Gen::Nary(op, (0..n).map(|_| Gen::random(rng, connectives)).collect())
            }
        }
    }

    fn text(&self) -> String {
        match self {
            Gen::Cmp(op, k, i, c) => format!("({op} (* {} {}) {})", smt_int(*k), INT_NAMES[*i], smt_int(*c)),
            Gen::BoolVar(i) => BOOL_NAMES[*i].to_string(),
            Gen::Not(g) => format!("(not {})", g.text()),
            Gen::Ite(c, t, e) => format!("(ite {} {} {})", c.text(), t.text(), e.text()),
            Gen::Nary(op, gs) => format!("({op} {})", gs.iter().map(Gen::text).collect::<Vec<_>>().join(" ")),
        }
    }

    fn eval(&self, ints: &[i64; 3], bools: &[bool; 2]) -> bool {
        match self {
            Gen::Cmp(op, k, i, c) => {
                let l = k * ints[*i];
                match *op {
                    "<=" => l <= *c,
                    "<" => l < *c,
                    ">=" => l >= *c,
                    ">" => l > *c,
                    _ => l == *c,
                }
            }
            Gen::BoolVar(i) => bools[*i],
            Gen::Not(g) => !g.eval(ints, bools),
            Gen::Ite(c, t, e) => {
                if c.eval(ints, bools) {
                    t.eval(ints, bools)
                } else {
                    e.eval(ints, bools)
                }
            }
            Gen::Nary(op, gs) => {
                let vs: Vec<bool> = gs.iter().map(|g| g.eval(ints, bools)).collect();
                match *op {
                    "and" => vs.iter().all(|&b| b),
                    "or" => vs.iter().any(|&b| b),
                    "=>" => vs.iter().rev().skip(1).fold(*vs.last().unwrap(), |acc, &a| !a || acc),
                    "=" => vs.windows(2).all(|w| w[0] == w[1]),
                    _ => vs[0] != vs[1],
                }
            }
        }
    }
}

fn smt_int(k: i64) -> String {
    if k < 0 {
        format!("(- {})", -k)
    } else {
        k.to_string()
    }
}

fn gen_script(g: &Gen, soft: Option<i64>) -> String {
    let assert = match soft {
        None => format!("(assert {})", g.text()),
        Some(w) => format!("(assert-soft {} :weight {w})", g.text()),
    };
    format!("{}{}{assert}\n(check-sat)\n", decls("a b c", "Int"), decls("p q", "Bool"))
}

fn points() -> impl Iterator<Item = ([i64; 3], [bool; 2])> {
    (0..7 * 7 * 7 * 4).map(|i| {
        let ints = [i % 7 - 3, (i / 7) % 7 - 3, (i / 49) % 7 - 3];
        let b = i / 343;
        (ints, [b & 1 != 0, b & 2 != 0])
    })
}

/// Whether some assignment of `aux` satisfies every clause. The clauses are
/// first reduced to propositional clauses over `aux` at the point `m`.
fn extends(f: &WeightedFormula, m: &Model, aux: &[VarId]) -> bool {
    let mut cnf: Vec<Vec<(usize, bool)>> = Vec::new();
    for c in &f.clauses {
        let mut lits = Vec::new();
        let mut sat = false;
        for l in c.clause.literals() {
            match l {
                Literal::Bool { var, positive } if aux.contains(var) => {
                    lits.push((aux.iter().position(|a| a == var).unwrap(), *positive));
                }
                _ => sat |= l.eval(m).unwrap(),
            }
        }
        if !sat {
            cnf.push(lits);
        }
    }
    dpll(&cnf, &mut vec![None; aux.len()])
}

fn dpll(cnf: &[Vec<(usize, bool)>], assign: &mut Vec<Option<bool>>) -> bool {
    let saved = assign.clone();
    loop {
        let mut unit = None;
        for c in cnf {
            if c.iter().any(|&(i, p)| assign[i] == Some(p)) {
                continue;
            }
            let free: Vec<_> = c.iter().filter(|&&(i, _)| assign[i].is_none()).collect();
            match free.len() {
                0 => {
                    *assign = saved;
                    return false;
                }
                1 => unit = Some(*free[0]),
                _ => {}
            }
        }
        match unit {
            Some((i, p)) => assign[i] = Some(p),
            None => break,
        }
    }
    let Some(i) = assign.iter().position(Option::is_none) else {
        return true;
    };
    for b in [true, false] {
        assign[i] = Some(b);
        if dpll(cnf, assign) {
            return true;
        }
        assign[i] = None;
    }
    *assign = saved;
    false
}

#[test]
fn tseitin_cnf_agrees_with_the_term_at_every_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..300 {
        let mut budget = 3;
        let g = Gen::random(&mut rng, &mut budget);
        let s = parse_script(&gen_script(&g, None)).unwrap();
        let f = &s.formula;
        let ints: Vec<VarId> = INT_NAMES.iter().map(|n| var(f, n)).collect();
        let bools: Vec<VarId> = BOOL_NAMES.iter().map(|n| var(f, n)).collect();
        let aux: Vec<VarId> = f.vars.ids().filter(|v| v.index() >= 5).collect();
        for (iv, bv) in points() {
            let mut m = Model::new();
            for (x, k) in ints.iter().zip(iv) {
                m.set(*x, int(k));
            }
            for (x, b) in bools.iter().zip(bv) {
                m.set_bool(*x, b);
            }
            // Projection of the CNF onto the input variables equals the term.
            let cnf = extends(f, &m, &aux);
            assert_eq!(cnf, g.eval(&iv, &bv), "{} at {iv:?} {bv:?}", g.text());
        }
        if aux.len() <= 2 {
            let oracle = brute_force_nia(f, -3, 3).unwrap();
            let any = points().any(|(iv, bv)| g.eval(&iv, &bv));
            assert_eq!(matches!(oracle, OracleResult::Sat { .. }), any, "{}", g.text());
        }
    }
}

#[test]
fn soft_cnf_keeps_the_minimum_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..150 {
        let mut budget = 3;
        let g = Gen::random(&mut rng, &mut budget);
        let w = rng.gen_range(1..=4);
        let s = parse_script(&gen_script(&g, Some(w))).unwrap();
        let f = &s.formula;
        let mut hard = WeightedFormula::new(f.vars.clone());
        for c in f.hard() {
            hard.add_hard(c.clause.clone());
        }
        let ints: Vec<VarId> = INT_NAMES.iter().map(|n| var(f, n)).collect();
        let bools: Vec<VarId> = BOOL_NAMES.iter().map(|n| var(f, n)).collect();
        let aux: Vec<VarId> = f.vars.ids().filter(|v| v.index() >= 5).collect();
        // Cost 0 is reachable exactly where the term holds; the hard part
        // never excludes a point, so the cost is at most w.
        for (iv, bv) in points() {
            let mut m = Model::new();
            for (x, k) in ints.iter().zip(iv) {
                m.set(*x, int(k));
            }
            for (x, b) in bools.iter().zip(bv) {
                m.set_bool(*x, b);
            }
            assert!(extends(&hard, &m, &aux), "{}", g.text());
            assert_eq!(extends(f, &m, &aux), g.eval(&iv, &bv), "{} at {iv:?} {bv:?}", g.text());
        }
        if aux.len() <= 2 {
            let expected = if points().all(|(iv, bv)| !g.eval(&iv, &bv)) { w } else { 0 };
            match brute_force_nia(f, -3, 3).unwrap() {
                OracleResult::Sat { cost, .. } => assert_eq!(cost, int(expected), "{}", g.text()),
                OracleResult::NoModelInBox => panic!("soft terms never make the hard part unsat"),
            }
        }
    }
}

#[test]
fn printed_formulas_parse_back_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..100 {
        let f0 = random_nia(&mut rng, 3, 2);
        let s = parse_script(&print_script(&f0)).unwrap();
        assert_eq!(s.formula.vars, f0.vars);
        // Constant literals are folded by the parser.
        let mut expected = WeightedFormula::new(f0.vars.clone());
        for c in &f0.clauses {
            let constant = |l: &Literal| l.polynomial().is_some_and(|p| p.is_constant());
            let value = |l: &Literal| l.eval(&Model::new()).unwrap();
            if c.clause.literals().iter().any(|l| constant(l) && value(l)) {
                continue;
            }
            let kept = Clause::new(c.clause.literals().iter().filter(|l| !constant(l)).cloned());
            expected.push(kept, c.weight.clone());
        }
        assert_eq!(s.formula.clauses, expected.clauses);
    }
}

#[test]
fn print_result_formats() {
    let mut vars = VarTable::new();
    let x = vars.add_original("x", Sort::Int);
    let m = model(&[(x, 3)]);
    assert_eq!(print_result(Status::Sat, Some(&m), &vars, &[x], None), "sat\n(model (define-fun x () Int 3))");
    assert_eq!(print_result(Status::Unsat, None, &vars, &[x], None), "unsat");
    assert_eq!(print_result(Status::Unknown, None, &vars, &[], None), "unknown");
    assert_eq!(
        print_result(Status::Sat, Some(&m), &vars, &[x], Some(&int(1))),
        "sat\n(objective 1)\n(model (define-fun x () Int 3))"
    );

    let r = vars.add_original("r", Sort::Real);
    let b = vars.add_original("b", Sort::Bool);
    let odd = vars.add_original("odd name", Sort::Int);
    let mut m = model(&[(x, -3), (odd, 0)]);
    m.set(r, ratio(-7, 2));
    m.set_bool(b, true);
    assert_eq!(
        print_result(Status::Sat, Some(&m), &vars, &[x, r, b, odd], Some(&ratio(5, 2))),
        "sat\n(objective (/ 5 2))\n(model (define-fun x () Int (- 3))\n  (define-fun r () Real (- (/ 7 2)))\n  \
         (define-fun b () Bool true)\n  (define-fun |odd name| () Int 0))"
    );
}

fn fixed_vars() -> VarTable {
    let mut vars = VarTable::new();
    vars.add_original("i", Sort::Int);
    vars.add_original("r", Sort::Real);
    vars.add_original("b", Sort::Bool);
    vars
}

proptest! {
    #[test]
    fn models_round_trip(i in -10_000i64..10_000, n in -10_000i64..10_000, d in 1i64..500, b: bool) {
        let vars = fixed_vars();
        let ids: Vec<VarId> = vars.ids().collect();
        let mut m = Model::new();
        m.set(ids[0], int(i));
        m.set(ids[1], ratio(n, d));
        m.set_bool(ids[2], b);
        let text = print_result(Status::Sat, Some(&m), &vars, &ids, Some(&ratio(n, d)));
        let back = parse_model(&text, &vars).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn model_parser_checks_names_and_sorts() {
    let vars = fixed_vars();
    assert!(matches!(
        parse_model("(model (define-fun z () Int 1))", &vars).unwrap_err().kind,
        ErrorKind::Undeclared(_)
    ));
    assert!(matches!(
        parse_model("(model (define-fun i () Real 1))", &vars).unwrap_err().kind,
        ErrorKind::Sort(_)
    ));
    assert!(matches!(
        parse_model("(model (define-fun i () Int (/ 1 2)))", &vars).unwrap_err().kind,
        ErrorKind::Sort(_)
    ));
    let m = parse_model("(define-fun r () Real 0.75)", &vars).unwrap();
    assert_eq!(m.get(VarId(1)), Some(&ratio(3, 4)));
}

const INVARIANT: &str = "\
(set-logic NIA_EA)
(declare-const x0 Int)
(declare-const x1 Int)
; initiation: the template holds at y = 0
(assert-soft (<= 0 x1) :weight 1)
; inductiveness over the loop body y := y + 1
(assert (forall ((y1 Real))
  (=> (and (<= (* x0 y1) x1) (<= y1 2)) (<= (* x0 (+ y1 1)) x1))))
(check-sat)
(get-model)
";

#[test]
fn invariant_script_gives_the_expected_problem() {
    let s = parse_ea_script(INVARIANT).unwrap();
    let p = &s.problem;
    let (x0, x1, y1) = (var_of(p, "x0"), var_of(p, "x1"), var_of(p, "y1"));
    assert_eq!(p.exist_vars, vec![x0, x1]);
    assert_eq!(p.univ_vars, vec![y1]);
    assert_eq!(p.soft, vec![(Clause::unit(Literal::ge(v(x1))), int(1))]);
    assert_eq!(p.hard.len(), 1);

    // The negated system: x0·y1 ≤ x1, y1 ≤ 2, x0(y1 + 1) > x1.
    let x0y1 = term(1, &[(x0, 1), (y1, 1)]);
    let expected = Clause::new([
        Literal::gt(x0y1.sub(&v(x1))),
        Literal::gt(v(y1).add_constant(&int(-2))),
        Literal::le(x0y1.add(&v(x0)).sub(&v(x1))),
    ]);
    let univ: BTreeSet<VarId> = [y1].into();
    assert_eq!(
        to_motzkin_system(&p.hard[0], &univ, &p.vars).unwrap(),
        to_motzkin_system(&expected, &univ, &p.vars).unwrap()
    );
    assert!(matches!(parse(INVARIANT).unwrap(), Parsed::Ea(_)));
}

fn var_of(p: &linsplit::ea::EaProblem, name: &str) -> VarId {
    p.vars.lookup(name).unwrap()
}

#[test]
fn invariant_script_solves_with_cost_zero() {
    let s = parse_ea_script(INVARIANT).unwrap();
    let r = solve_ea(&s.problem, &NiaConfig::default(), &Budget::with_timeout(Duration::from_secs(20))).unwrap();
    assert_eq!(r.status, Status::Sat);
    assert_eq!(r.objective, Some(int(0)));
    let m = r.model.unwrap();
    let (x0, x1) = (var_of(&s.problem, "x0"), var_of(&s.problem, "x1"));
    let (a, b) = (m.get(x0).unwrap().clone(), m.get(x1).unwrap().clone());
    // x0·y ≤ x1 must be inductive for every real y ≤ 2 (checked on a grid) and hold at 0.
    assert!(b >= int(0));
    for k in -400..=8 {
        let y = ratio(k, 4);
        if &a * &y <= b && y <= int(2) {
            assert!(&a * (&y + int(1)) <= b, "x0={a} x1={b} y={y}");
        }
    }
}

fn ea_err(body: &str) -> ErrorKind {
    let text = format!("(set-logic NIA_EA)\n{}{body}\n(check-sat)", decls("x", "Int"));
    parse_ea_script(&text).unwrap_err().kind
}

#[test]
fn fragment_violations_are_rejected() {
    assert!(matches!(
        ea_err("(assert (forall ((y1 Real) (y2 Real)) (<= (* y1 y2) x)))"),
        ErrorKind::Fragment(_)
    ));
    assert!(matches!(ea_err("(assert (forall ((y Real)) (<= (* y y) x)))"), ErrorKind::Fragment(_)));
    assert!(matches!(
        ea_err("(assert (forall ((y Real)) (or (= y x) (> x 0))))"),
        ErrorKind::Fragment(_)
    ));
    assert!(matches!(ea_err("(assert (forall ((y Int)) (<= y x)))"), ErrorKind::Sort(_)));
    assert!(matches!(ea_err("(declare-const r Real)"), ErrorKind::Sort(_)));
    assert!(matches!(
        ea_err("(assert (forall ((y Real)) (exists ((z Real)) (<= y z))))"),
        ErrorKind::Unsupported(_)
    ));
    // A negated equality is fine: it is the pair of strict inequalities.
    let text = format!(
        "(set-logic NIA_EA)\n{}(assert (forall ((y Real)) (or (distinct y x) (> x 0))))\n(check-sat)",
        decls("x", "Int")
    );
    assert!(parse_ea_script(&text).is_ok());
}

#[test]
fn quantified_bodies_distribute_without_fresh_variables() {
    let text = format!(
        "(set-logic NIA_EA)\n{}(assert (forall ((y Real)) (or (and (<= y x) (<= (- y) x)) (> x 5))))\n\
         (assert-soft (forall ((y Real)) (and (< y (* 2 x)) (> (+ y 1) x))) :weight 3)\n(check-sat)",
        decls("x", "Int")
    );
    let s = parse_ea_script(&text).unwrap();
    let p = &s.problem;
    // Hard: two clauses. Soft: an existential indicator plus two guarded hard clauses.
    assert_eq!(p.hard.len(), 4);
    assert_eq!(p.soft.len(), 1);
    assert_eq!(p.univ_vars.len(), 1);
    let b = *p.exist_vars.last().unwrap();
    assert_eq!(p.vars.sort(b), Sort::Bool);
    assert_eq!(p.soft[0], (Clause::unit(Literal::bool(b, true)), int(3)));
    assert!(p.hard[2..].iter().all(|c| c.literals()[0] == Literal::bool(b, false)));
    assert!(p.vars.iter().all(|(_, i)| !i.name.starts_with("tseitin")));
}

#[test]
fn universal_names_are_shared_across_assertions() {
    let text = format!(
        "(set-logic NIA_EA)\n{}(assert (forall ((y Real)) (<= y (+ x 10))))\n(assert (forall ((y Real)) (>= y (- x 10))))\n(check-sat)",
        decls("x", "Int")
    );
    let p = parse_ea_script(&text).unwrap().problem;
    assert_eq!(p.univ_vars.len(), 1);
    assert!(matches!(parse_script(&text).unwrap_err().kind, ErrorKind::Script(_)));
}

#[test]
fn parse_dispatches_on_logic_and_quantifiers() {
    let qf_text = format!("{}(assert (> (* x x) 3))\n(check-sat)", decls("x", "Int"));
    assert!(matches!(parse(&qf_text).unwrap(), Parsed::Qf(_)));
    let ea_text = format!("{}(assert (forall ((y Real)) (> (* x y) y)))\n(check-sat)", decls("x", "Int"));
    assert!(matches!(parse(&ea_text).unwrap(), Parsed::Ea(_)));
}

#[test]
fn parsed_running_example_solves_like_the_built_one() {
    let text = format!(
        "(set-logic QF_NIA)\n{}(assert (>= (+ (* t x) y) 4))\n(assert (<= (+ (* t t) (* x x) (* w w) (* y y)) 12))\n\
         (assert-soft (<= (+ (* t t) (* x x) (* y y)) 1) :weight 1)\n(check-sat)\n(get-objectives)\n(get-model)",
        decls("t x w y", "Int")
    );
    let s = parse_script(&text).unwrap();
    let built = weighted_running();
    assert_eq!(s.formula.clauses, built.f0.clauses);
    let r = solve_maxsmt(&s.formula, &NiaConfig::default(), &Budget::with_timeout(Duration::from_secs(20))).unwrap();
    assert_eq!(r.status, Status::Sat);
    assert_eq!(r.objective, Some(int(1)));
    assert!(holds(&built.f0, r.model.as_ref().unwrap()));
}
