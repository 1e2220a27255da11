use std::collections::HashMap;

use num_bigint::BigInt;

use super::lexer::Token;
use super::sexp::Sexp;
use super::{ErrorKind, ParseError, Pos};
use crate::formula::{EvalError, Literal, Model, Polynomial, Rational, Sort, VarId, VarTable};

/// A sort-checked Boolean term. Comparisons are already literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Const(bool),
    Lit(Literal),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Iff(Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
}

impl Term {
    pub fn eval(&self, m: &Model) -> Result<bool, EvalError> {
        Ok(match self {
            Term::Const(b) => *b,
            Term::Lit(l) => l.eval(m)?,
            Term::Not(t) => !t.eval(m)?,
            Term::And(ts) => {
                for t in ts {
                    if !t.eval(m)? {
                        return Ok(false);
                    }
                }
                true
            }
            Term::Or(ts) => {
                for t in ts {
                    if t.eval(m)? {
                        return Ok(true);
                    }
                }
                false
            }
            Term::Iff(a, b) => a.eval(m)? == b.eval(m)?,
            Term::Ite(c, t, e) => {
                if c.eval(m)? {
                    t.eval(m)?
                } else {
                    e.eval(m)?
                }
            }
        })
    }
}

#[derive(Clone, Debug)]
enum Value {
    Arith(Polynomial, Sort),
    Bool(Term),
}

fn err<T>(pos: Pos, kind: ErrorKind) -> Result<T, ParseError> {
    Err(ParseError::new(pos, kind))
}

pub fn parse_sort(s: &Sexp) -> Result<Sort, ParseError> {
    match s.symbol() {
        Some("Int") => Ok(Sort::Int),
        Some("Real") => Ok(Sort::Real),
        Some("Bool") => Ok(Sort::Bool),
        Some(other) => err(s.pos(), ErrorKind::Unsupported(format!("sort `{other}`"))),
        None => err(s.pos(), ErrorKind::Unsupported("parametric sort".into())),
    }
}

/// Turns s-expressions into terms over a variable table.
pub struct Elaborator<'a> {
    pub vars: &'a mut VarTable,
    pub decls: &'a HashMap<String, VarId>,
    scopes: Vec<HashMap<String, Value>>,
    /// Whether a `forall` may appear at the top of an assertion.
    pub quantifiers: bool,
    /// Universal variables by name, shared across assertions.
    pub univ: &'a mut HashMap<String, VarId>,
    /// Universal variables bound around the term being elaborated.
    pub bound_univ: Vec<VarId>,
}

impl<'a> Elaborator<'a> {
    pub fn new(
        vars: &'a mut VarTable,
        decls: &'a HashMap<String, VarId>,
        univ: &'a mut HashMap<String, VarId>,
        quantifiers: bool,
    ) -> Self {
        Self {
            vars,
            decls,
            scopes: Vec::new(),
            quantifiers,
            univ,
            bound_univ: Vec::new(),
        }
    }

    /// Elaborates the body of an assert, which may be a single `forall`.
    pub fn assertion(&mut self, s: &Sexp) -> Result<Term, ParseError> {
        self.bound_univ.clear();
        if s.head() != Some("forall") {
            return self.boolean(s);
        }
        if !self.quantifiers {
            return err(s.pos(), ErrorKind::Unsupported("quantifier outside logic NIA_EA".into()));
        }
        let items = s.list().unwrap();
        if items.len() != 3 {
            return err(s.pos(), ErrorKind::Syntax("forall takes a binding list and a body".into()));
        }
        let bindings = items[1]
            .list()
            .filter(|b| !b.is_empty())
            .ok_or_else(|| ParseError::new(items[1].pos(), ErrorKind::Syntax("expected sorted variables".into())))?;
        let mut scope = HashMap::new();
        for b in bindings {
            let (name, sort) = match b.list() {
                Some([n, srt]) if n.symbol().is_some() => (n.symbol().unwrap(), parse_sort(srt)?),
                _ => return err(b.pos(), ErrorKind::Syntax("expected (name Sort)".into())),
            };
            if sort != Sort::Real {
                return err(b.pos(), ErrorKind::Sort(format!("universal variable `{name}` must be Real")));
            }
            if self.decls.contains_key(name) {
                return err(b.pos(), ErrorKind::Redeclared(name.to_string()));
            }
            let v = match self.univ.get(name) {
                Some(&v) => v,
                None => {
                    let v = self.vars.add_original(name, Sort::Real);
                    self.univ.insert(name.to_string(), v);
                    v
                }
            };
            self.bound_univ.push(v);
            scope.insert(name.to_string(), Value::Arith(Polynomial::var(v), Sort::Real));
        }
        self.scopes.push(scope);
        let body = self.boolean(&items[2]);
        self.scopes.pop();
        body
    }

    pub fn boolean(&mut self, s: &Sexp) -> Result<Term, ParseError> {
        match self.value(s)? {
            Value::Bool(t) => Ok(t),
            Value::Arith(..) => err(s.pos(), ErrorKind::Sort("expected a Bool term".into())),
        }
    }

    fn arith(&mut self, s: &Sexp) -> Result<(Polynomial, Sort), ParseError> {
        match self.value(s)? {
            Value::Arith(p, srt) => Ok((p, srt)),
            Value::Bool(_) => err(s.pos(), ErrorKind::Sort("expected an arithmetic term".into())),
        }
    }

    fn lookup(&self, name: &str, pos: Pos) -> Result<Value, ParseError> {
        for scope in self.scopes.iter().rev() {
            if let Some(v) = scope.get(name) {
                return Ok(v.clone());
            }
        }
        match self.decls.get(name) {
            Some(&v) => Ok(match self.vars.sort(v) {
                Sort::Bool => Value::Bool(Term::Lit(Literal::bool(v, true))),
                srt => Value::Arith(Polynomial::var(v), srt),
            }),
            None => err(pos, ErrorKind::Undeclared(name.to_string())),
        }
    }

    fn value(&mut self, s: &Sexp) -> Result<Value, ParseError> {
        match s {
            Sexp::Atom(tok, pos) => match tok {
                Token::Numeral(n) => Ok(Value::Arith(Polynomial::constant(Rational::from(n.clone())), Sort::Int)),
                Token::Decimal(q) => Ok(Value::Arith(Polynomial::constant(q.clone()), Sort::Real)),
                Token::Symbol(name) => match name.as_str() {
                    "true" => Ok(Value::Bool(Term::Const(true))),
                    "false" => Ok(Value::Bool(Term::Const(false))),
                    _ => match self.lookup(name, *pos) {
                        Err(e) => match negative_numeral(name) {
                            Some(n) => Ok(Value::Arith(Polynomial::constant(Rational::from(n)), Sort::Int)),
                            None => Err(e),
                        },
                        ok => ok,
                    },
                },
                _ => err(*pos, ErrorKind::Syntax("unexpected token in term".into())),
            },
            Sexp::List(items, pos) => {
                let Some(head) = items.first().and_then(Sexp::symbol) else {
                    return err(*pos, ErrorKind::Syntax("expected an operator".into()));
                };
                let args = &items[1..];
                self.application(head, args, *pos)
            }
        }
    }

    fn application(&mut self, head: &str, args: &[Sexp], pos: Pos) -> Result<Value, ParseError> {
        let arity = |min: usize| -> Result<(), ParseError> {
            if args.len() < min {
                err(pos, ErrorKind::Syntax(format!("`{head}` expects at least {min} argument(s)")))
            } else {
                Ok(())
            }
        };
        match head {
            "+" | "*" => {
                arity(1)?;
                let mut sort = Sort::Int;
                let mut acc: Option<Polynomial> = None;
                for a in args {
                    let (p, srt) = self.arith(a)?;
                    if srt == Sort::Real {
                        sort = Sort::Real;
                    }
                    acc = Some(match acc {
                        None => p,
                        Some(q) if head == "+" => q.add(&p),
                        Some(q) => q.mul(&p),
                    });
                }
                Ok(Value::Arith(acc.unwrap(), sort))
            }
            "-" => {
                arity(1)?;
                let (first, mut sort) = self.arith(&args[0])?;
                if args.len() == 1 {
                    return Ok(Value::Arith(first.neg(), sort));
                }
                let mut acc = first;
                for a in &args[1..] {
                    let (p, srt) = self.arith(a)?;
                    if srt == Sort::Real {
                        sort = Sort::Real;
                    }
                    acc = acc.sub(&p);
                }
                Ok(Value::Arith(acc, sort))
            }
            "to_real" => {
                if args.len() != 1 {
                    return err(pos, ErrorKind::Syntax("`to_real` takes one argument".into()));
                }
                let (p, _) = self.arith(&args[0])?;
                Ok(Value::Arith(p, Sort::Real))
            }
            "<=" | "<" | ">=" | ">" => {
                arity(2)?;
                let mut polys = Vec::new();
                for a in args {
                    polys.push(self.arith(a)?.0);
                }
                let parts = polys
                    .windows(2)
                    .map(|w| {
                        let d = w[0].sub(&w[1]);
                        let lit = match head {
                            "<=" => Literal::le(d),
                            "<" => Literal::lt(d),
                            ">=" => Literal::ge(d),
                            _ => Literal::gt(d),
                        };
                        literal_term(lit)
                    })
                    .collect();
                Ok(Value::Bool(conj(parts)))
            }
            "=" | "distinct" => {
                arity(2)?;
                let mut vals = Vec::new();
                for a in args {
                    vals.push(self.value(a)?);
                }
                let all_bool = vals.iter().all(|v| matches!(v, Value::Bool(_)));
                let all_arith = vals.iter().all(|v| matches!(v, Value::Arith(..)));
                if !all_bool && !all_arith {
                    return err(pos, ErrorKind::Sort(format!("`{head}` mixes Bool and arithmetic arguments")));
                }
                let mut pairs = Vec::new();
                let n = vals.len();
                for i in 0..n {
                    let js: Vec<usize> = if head == "=" {
                        if i + 1 < n {
                            vec![i + 1]
                        } else {
                            vec![]
                        }
                    } else {
                        (i + 1..n).collect()
                    };
                    for j in js {
                        let t = match (&vals[i], &vals[j]) {
                            (Value::Arith(a, _), Value::Arith(b, _)) => literal_term(Literal::eq(a.sub(b))),
                            (Value::Bool(a), Value::Bool(b)) => Term::Iff(Box::new(a.clone()), Box::new(b.clone())),
                            _ => unreachable!(),
                        };
                        pairs.push(if head == "=" { t } else { negation(t) });
                    }
                }
                Ok(Value::Bool(conj(pairs)))
            }
            "and" | "or" => {
                let mut ts = Vec::new();
                for a in args {
                    ts.push(self.boolean(a)?);
                }
                Ok(Value::Bool(if head == "and" { conj(ts) } else { disj(ts) }))
            }
            "not" => {
                if args.len() != 1 {
                    return err(pos, ErrorKind::Syntax("`not` takes one argument".into()));
                }
                Ok(Value::Bool(negation(self.boolean(&args[0])?)))
            }
            "=>" => {
                arity(2)?;
                let mut ts = Vec::new();
                for a in args {
                    ts.push(self.boolean(a)?);
                }
                // Right associative: a => (b => c).
                let mut acc = ts.pop().unwrap();
                while let Some(t) = ts.pop() {
                    acc = disj(vec![negation(t), acc]);
                }
                Ok(Value::Bool(acc))
            }
            "xor" => {
                if args.len() != 2 {
                    return err(pos, ErrorKind::Syntax("`xor` takes two arguments".into()));
                }
                let a = self.boolean(&args[0])?;
                let b = self.boolean(&args[1])?;
                Ok(Value::Bool(negation(Term::Iff(Box::new(a), Box::new(b)))))
            }
            "ite" => {
                if args.len() != 3 {
                    return err(pos, ErrorKind::Syntax("`ite` takes three arguments".into()));
                }
                let c = self.boolean(&args[0])?;
                let t = self.value(&args[1])?;
                let e = self.value(&args[2])?;
                match (t, e) {
                    (Value::Bool(t), Value::Bool(e)) => Ok(Value::Bool(Term::Ite(Box::new(c), Box::new(t), Box::new(e)))),
                    (Value::Arith(..), Value::Arith(..)) => err(pos, ErrorKind::Unsupported("arithmetic ite".into())),
                    _ => err(pos, ErrorKind::Sort("`ite` branches have different sorts".into())),
                }
            }
            "let" => {
                if args.len() != 2 {
                    return err(pos, ErrorKind::Syntax("`let` takes bindings and a body".into()));
                }
                let bindings = args[0]
                    .list()
                    .ok_or_else(|| ParseError::new(args[0].pos(), ErrorKind::Syntax("expected let bindings".into())))?;
                let mut scope = HashMap::new();
                for b in bindings {
                    match b.list() {
                        Some([n, t]) if n.symbol().is_some() => {
                            let v = self.value(t)?;
                            scope.insert(n.symbol().unwrap().to_string(), v);
                        }
                        _ => return err(b.pos(), ErrorKind::Syntax("expected (name term)".into())),
                    }
                }
                self.scopes.push(scope);
                let body = self.value(&args[1]);
                self.scopes.pop();
                body
            }
            "forall" | "exists" => err(pos, ErrorKind::Unsupported(format!("nested `{head}`"))),
            "/" => err(pos, ErrorKind::Unsupported("division".into())),
            "div" | "mod" | "abs" | "to_int" | "is_int" | "select" | "store" => {
                err(pos, ErrorKind::Unsupported(format!("operator `{head}`")))
            }
            _ => match self.lookup(head, pos) {
                Ok(_) => err(pos, ErrorKind::Unsupported(format!("application of constant `{head}`"))),
                Err(_) => err(pos, ErrorKind::Undeclared(head.to_string())),
            },
        }
    }
}

/// `-7` is not an SMT-LIB numeral, but some generators emit it.
fn negative_numeral(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-')?;
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        Some(-digits.parse::<BigInt>().ok()?)
    } else {
        None
    }
}

fn literal_term(l: Literal) -> Term {
    if let Some(p) = l.polynomial() {
        if p.is_constant() {
            return Term::Const(l.eval(&Model::new()).expect("constant literal"));
        }
    }
    Term::Lit(l)
}

fn conj(mut ts: Vec<Term>) -> Term {
    if ts.len() == 1 {
        ts.pop().unwrap()
    } else {
        Term::And(ts)
    }
}

fn disj(mut ts: Vec<Term>) -> Term {
    if ts.len() == 1 {
        ts.pop().unwrap()
    } else {
        Term::Or(ts)
    }
}

fn negation(t: Term) -> Term {
    match t {
        Term::Const(b) => Term::Const(!b),
        Term::Lit(l) => Term::Lit(l.negate()),
        Term::Not(t) => *t,
        t => Term::Not(Box::new(t)),
    }
}
