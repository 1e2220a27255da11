//! Fixed instances for the criterion benches in `benches/`.

pub const RUNNING: &str = "\
(set-logic QF_NIA)
(declare-const t Int)
(declare-const x Int)
(declare-const w Int)
(declare-const y Int)
(assert (>= (+ (* t x) y) 4))
(assert (<= (+ (* t t) (* x x) (* w w) (* y y)) 12))
(check-sat)
";

pub const WEIGHTED: &str = "\
(set-logic QF_NIA)
(declare-const t Int)
(declare-const x Int)
(declare-const w Int)
(declare-const y Int)
(assert (>= (+ (* t x) y) 4))
(assert (<= (+ (* t t) (* x x) (* w w) (* y y)) 12))
(assert-soft (<= (+ (* t t) (* x x) (* y y)) 1) :weight 1)
(check-sat)
";

pub const INVARIANT: &str = "\
(set-logic NIA_EA)
(declare-const x0 Int)
(declare-const x1 Int)
(assert-soft (<= 0 x1) :weight 1)
(assert (forall ((y1 Real))
  (=> (and (<= (* x0 y1) x1) (<= y1 2)) (<= (* x0 (+ y1 1)) x1))))
(check-sat)
";

/// Pythagorean triple with a lower bound, so domains must grow several times.
pub const TRIPLE: &str = "\
(set-logic QF_NIA)
(declare-const a Int)
(declare-const b Int)
(declare-const c Int)
(assert (= (+ (* a a) (* b b)) (* c c)))
(assert (and (>= a 5) (> b a)))
(check-sat)
";
