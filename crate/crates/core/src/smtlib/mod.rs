//! SMT-LIB 2 subset: QF_NIA scripts with `assert-soft`, a quantified
//! `NIA_EA` form, and result printing.

mod cnf;
mod lexer;
mod sexp;
mod term;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::ea::EaProblem;
use crate::formula::rational::{is_integral, to_smtlib};
use crate::formula::{
    Clause, CostPair, Literal, Model, Polynomial, Rational, Rel, Sort, VarId, VarOrigin, VarTable, Weight,
    WeightedFormula,
};
use crate::nia::Status;

pub use cnf::{distribute, nnf, nnf_named, tseitin, Nnf};
pub use lexer::{tokenize, Token};
pub use sexp::{parse_sexps, Sexp};
pub use term::Term;

/// Largest clause set produced by distribution before giving up.
pub const DISTRIBUTION_LIMIT: usize = 10_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ErrorKind {
    #[error("lexical error: {0}")]
    Lexical(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("sort error: {0}")]
    Sort(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("undeclared identifier `{0}`")]
    Undeclared(String),
    #[error("`{0}` is already declared")]
    Redeclared(String),
    #[error("outside the supported fragment: {0}")]
    Fragment(String),
    #[error("{0}")]
    Script(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ErrorKind,
}

impl ParseError {
    pub fn new(pos: Pos, kind: ErrorKind) -> Self {
        Self { pos, kind }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Logic {
    QfNia,
    NiaEa,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CheckSat,
    GetModel,
    GetObjectives,
}

#[derive(Clone, Debug)]
pub struct Script {
    pub logic: Logic,
    /// Declared constants in declaration order.
    pub declarations: Vec<(String, Sort, VarId)>,
    pub hard_asserts: Vec<Term>,
    pub soft_asserts: Vec<(Term, Rational)>,
    pub commands: Vec<Command>,
    /// CNF of the assertions; soft weights are pairs `(0, w)`.
    pub formula: WeightedFormula,
}

impl Script {
    pub fn declared_vars(&self) -> Vec<VarId> {
        self.declarations.iter().map(|d| d.2).collect()
    }
}

#[derive(Clone, Debug)]
pub struct EaScript {
    pub declarations: Vec<(String, Sort, VarId)>,
    pub commands: Vec<Command>,
    pub problem: EaProblem,
}

impl EaScript {
    pub fn declared_vars(&self) -> Vec<VarId> {
        self.declarations.iter().map(|d| d.2).collect()
    }
}

/// Either kind of script, chosen by `set-logic`.
#[derive(Clone, Debug)]
pub enum Parsed {
    Qf(Script),
    Ea(EaScript),
}

struct Assertion {
    term: Term,
    univ: Vec<VarId>,
    weight: Option<Rational>,
    pos: Pos,
}

struct Raw {
    logic: Option<Logic>,
    vars: VarTable,
    declarations: Vec<(String, Sort, VarId)>,
    univ: HashMap<String, VarId>,
    asserts: Vec<Assertion>,
    commands: Vec<Command>,
}

fn err<T>(pos: Pos, kind: ErrorKind) -> Result<T, ParseError> {
    Err(ParseError::new(pos, kind))
}

fn logic_of(s: &Sexp) -> Result<Logic, ParseError> {
    match s.symbol() {
        Some("NIA_EA") => Ok(Logic::NiaEa),
        Some("QF_NIA" | "QF_LIA" | "QF_NIRA" | "QF_LIRA" | "QF_NRA" | "QF_LRA" | "ALL") => Ok(Logic::QfNia),
        Some(other) => err(s.pos(), ErrorKind::Unsupported(format!("logic `{other}`"))),
        None => err(s.pos(), ErrorKind::Syntax("expected a logic name".into())),
    }
}

/// Reads the logic of a script without elaborating it.
fn peek_logic(sexps: &[Sexp]) -> Result<Option<Logic>, ParseError> {
    for s in sexps {
        if s.head() == Some("set-logic") {
            return match s.list().unwrap() {
                [_, l] => logic_of(l).map(Some),
                _ => err(s.pos(), ErrorKind::Syntax("set-logic takes one argument".into())),
            };
        }
    }
    Ok(None)
}

fn weight_value(s: &Sexp) -> Result<Rational, ParseError> {
    let bad = || ParseError::new(s.pos(), ErrorKind::Syntax("expected a rational weight".into()));
    match s {
        Sexp::Atom(Token::Numeral(n), _) => Ok(Rational::from(n.clone())),
        Sexp::Atom(Token::Decimal(q), _) => Ok(q.clone()),
        Sexp::List(items, _) => match (items.first().and_then(Sexp::symbol), &items[1..]) {
            (Some("-"), [a]) => Ok(-weight_value(a)?),
            (Some("/"), [a, b]) => {
                let d = weight_value(b)?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(weight_value(a)? / d)
            }
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

fn run(sexps: &[Sexp], quantifiers: bool) -> Result<Raw, ParseError> {
    let mut raw = Raw {
        logic: None,
        vars: VarTable::new(),
        declarations: Vec::new(),
        univ: HashMap::new(),
        asserts: Vec::new(),
        commands: Vec::new(),
    };
    let mut decls: HashMap<String, VarId> = HashMap::new();
    let mut check_sat: Option<Pos> = None;
    for s in sexps {
        let pos = s.pos();
        let Some(items) = s.list() else {
            return err(pos, ErrorKind::Syntax("expected a command".into()));
        };
        let Some(cmd) = s.head() else {
            return err(pos, ErrorKind::Syntax("expected a command name".into()));
        };
        match cmd {
            "set-logic" => {
                if raw.logic.is_some() {
                    return err(pos, ErrorKind::Script("set-logic given twice".into()));
                }
                raw.logic = Some(logic_of(items.get(1).ok_or_else(|| {
                    ParseError::new(pos, ErrorKind::Syntax("set-logic takes one argument".into()))
                })?)?);
            }
            "set-info" | "set-option" => {}
            "declare-const" | "declare-fun" => {
                let (name, sort) = match (cmd, &items[1..]) {
                    ("declare-const", [n, srt]) => (n, srt),
                    ("declare-fun", [n, args, srt]) => {
                        if args.list().map_or(true, |a| !a.is_empty()) {
                            return err(args.pos(), ErrorKind::Unsupported("uninterpreted function".into()));
                        }
                        (n, srt)
                    }
                    _ => return err(pos, ErrorKind::Syntax(format!("malformed {cmd}"))),
                };
                let name = name
                    .symbol()
                    .ok_or_else(|| ParseError::new(name.pos(), ErrorKind::Syntax("expected a symbol".into())))?;
                let sort = term::parse_sort(sort)?;
                if quantifiers && sort == Sort::Real {
                    return err(pos, ErrorKind::Sort(format!("existential `{name}` must be Int, not Real")));
                }
                if decls.contains_key(name) || raw.univ.contains_key(name) || name == "true" || name == "false" {
                    return err(pos, ErrorKind::Redeclared(name.to_string()));
                }
                let v = raw.vars.add_original(name, sort);
                decls.insert(name.to_string(), v);
                raw.declarations.push((name.to_string(), sort, v));
            }
            "assert" | "assert-soft" => {
                if check_sat.is_some() {
                    return err(pos, ErrorKind::Script("assertion after check-sat".into()));
                }
                let Some(body) = items.get(1) else {
                    return err(pos, ErrorKind::Syntax(format!("{cmd} needs a term")));
                };
                let mut weight = None;
                if cmd == "assert-soft" {
                    weight = Some(Rational::from_integer(1.into()));
                    let mut rest = items[2..].iter();
                    while let Some(attr) = rest.next() {
                        let Sexp::Atom(Token::Keyword(k), kpos) = attr else {
                            return err(attr.pos(), ErrorKind::Syntax("expected an attribute".into()));
                        };
                        let Some(value) = rest.next() else {
                            return err(*kpos, ErrorKind::Syntax(format!("attribute :{k} needs a value")));
                        };
                        if k == "weight" {
                            let w = weight_value(value)?;
                            if !w.is_positive() {
                                return err(value.pos(), ErrorKind::Script("soft weights must be positive".into()));
                            }
                            weight = Some(w);
                        }
                    }
                } else if items.len() != 2 {
                    return err(pos, ErrorKind::Syntax("assert takes one term".into()));
                }
                let mut elab = term::Elaborator::new(&mut raw.vars, &decls, &mut raw.univ, quantifiers);
                let term = elab.assertion(body)?;
                let univ = elab.bound_univ.clone();
                raw.asserts.push(Assertion {
                    term,
                    univ,
                    weight,
                    pos,
                });
            }
            "check-sat" => {
                if let Some(first) = check_sat {
                    return err(pos, ErrorKind::Script(format!("second check-sat (first at {first})")));
                }
                check_sat = Some(pos);
                raw.commands.push(Command::CheckSat);
            }
            "get-model" => raw.commands.push(Command::GetModel),
            "get-objectives" => raw.commands.push(Command::GetObjectives),
            "exit" => break,
            other => return err(pos, ErrorKind::Unsupported(format!("command `{other}`"))),
        }
    }
    if check_sat.is_none() {
        let end = sexps.last().map_or(Pos { line: 1, col: 1 }, Sexp::pos);
        return err(end, ErrorKind::Script("the script has no check-sat".into()));
    }
    Ok(raw)
}

/// Parses a quantifier-free script and converts it to clauses.
pub fn parse_script(text: &str) -> Result<Script, ParseError> {
    let sexps = parse_sexps(tokenize(text)?)?;
    if peek_logic(&sexps)? == Some(Logic::NiaEa) {
        return err(
            Pos { line: 1, col: 1 },
            ErrorKind::Script("NIA_EA scripts are read by the quantified parser".into()),
        );
    }
    let raw = run(&sexps, false)?;
    let mut vars = raw.vars;
    let mut hard_asserts = Vec::new();
    let mut soft_asserts = Vec::new();
    let mut pending = Vec::new();
    for a in raw.asserts {
        let (n, defs) = nnf_named(&a.term, true, &mut vars);
        let mut def_clauses = Vec::new();
        for d in &defs {
            def_clauses.extend(tseitin(d, &mut vars));
        }
        pending.push((def_clauses, None));
        match a.weight {
            None => {
                pending.push((tseitin(&n, &mut vars), None));
                hard_asserts.push(a.term);
            }
            Some(w) => {
                if n != Nnf::Const(true) {
                    let (soft, defs) = cnf::tseitin_soft(&n, &mut vars);
                    pending.push((defs, None));
                    pending.push((vec![soft], Some(w.clone())));
                }
                soft_asserts.push((a.term, w));
            }
        }
    }
    let mut formula = WeightedFormula::new(vars);
    for (clauses, w) in pending {
        for c in clauses {
            match &w {
                None => formula.add_hard(c),
                Some(w) => formula.add_soft(c, CostPair::soft_only(w.clone())),
            };
        }
    }
    Ok(Script {
        logic: Logic::QfNia,
        declarations: raw.declarations,
        hard_asserts,
        soft_asserts,
        commands: raw.commands,
        formula,
    })
}

fn check_fragment(c: &Clause, univ: &BTreeSet<VarId>, vars: &VarTable, pos: Pos) -> Result<(), ParseError> {
    for l in c.literals() {
        let Literal::Atom { atom, positive } = l else { continue };
        if !atom.poly.vars().iter().any(|v| univ.contains(v)) {
            continue;
        }
        if atom.poly.split_linear_in(&|v| univ.contains(&v)).is_none() {
            return err(
                pos,
                ErrorKind::Fragment(format!(
                    "`{}` multiplies universally quantified variables",
                    atom.poly.display(vars)
                )),
            );
        }
        if atom.rel == Rel::Eq && *positive {
            return err(
                pos,
                ErrorKind::Fragment(format!(
                    "positive equality `{} = 0` over universally quantified variables",
                    atom.poly.display(vars)
                )),
            );
        }
    }
    Ok(())
}

/// Parses an `NIA_EA` script into an ∃∀ problem. Bodies are converted to
/// clauses by distribution so no fresh variable lands under the quantifier.
pub fn parse_ea_script(text: &str) -> Result<EaScript, ParseError> {
    let sexps = parse_sexps(tokenize(text)?)?;
    if peek_logic(&sexps)? == Some(Logic::QfNia) {
        return err(
            Pos { line: 1, col: 1 },
            ErrorKind::Script("quantified scripts need logic NIA_EA".into()),
        );
    }
    let raw = run(&sexps, true)?;
    let mut vars = raw.vars;
    let mut exist_vars: Vec<VarId> = raw.declarations.iter().map(|d| d.2).collect();
    let mut univ_vars: Vec<VarId> = raw.univ.values().copied().collect();
    univ_vars.sort();
    let mut hard = Vec::new();
    let mut soft = Vec::new();
    for a in raw.asserts {
        let univ: BTreeSet<VarId> = a.univ.iter().copied().collect();
        let clauses = distribute(&nnf(&a.term, true), DISTRIBUTION_LIMIT).ok_or_else(|| {
            ParseError::new(
                a.pos,
                ErrorKind::Unsupported(format!("body expands to more than {DISTRIBUTION_LIMIT} clauses")),
            )
        })?;
        for c in &clauses {
            check_fragment(c, &univ, &vars, a.pos)?;
        }
        match a.weight {
            None => hard.extend(clauses),
            Some(w) => match clauses.len() {
                0 => {}
                1 => soft.push((clauses.into_iter().next().unwrap(), w)),
                _ => {
                    let b = vars.fresh("soft", Sort::Bool, VarOrigin::Auxiliary);
                    exist_vars.push(b);
                    soft.push((Clause::unit(Literal::bool(b, true)), w));
                    for c in clauses {
                        let mut lits = vec![Literal::bool(b, false)];
                        lits.extend(c.literals().iter().cloned());
                        hard.push(Clause::new(lits));
                    }
                }
            },
        }
    }
    Ok(EaScript {
        declarations: raw.declarations,
        commands: raw.commands,
        problem: EaProblem {
            vars,
            exist_vars,
            univ_vars,
            hard,
            soft,
        },
    })
}

/// Dispatches on the declared logic; scripts without `set-logic` containing a
/// `forall` are read as `NIA_EA`.
pub fn parse(text: &str) -> Result<Parsed, ParseError> {
    let sexps = parse_sexps(tokenize(text)?)?;
    let logic = match peek_logic(&sexps)? {
        Some(l) => l,
        None if sexps.iter().any(has_forall) => Logic::NiaEa,
        None => Logic::QfNia,
    };
    match logic {
        Logic::QfNia => parse_script(text).map(Parsed::Qf),
        Logic::NiaEa => parse_ea_script(text).map(Parsed::Ea),
    }
}

fn has_forall(s: &Sexp) -> bool {
    match s {
        Sexp::Atom(Token::Symbol(name), _) => name == "forall",
        Sexp::Atom(..) => false,
        Sexp::List(items, _) => items.iter().any(has_forall),
    }
}

pub fn quote_symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

/// SMT-LIB value of a variable in a model.
pub fn format_value(sort: Sort, value: &Rational) -> String {
    match sort {
        Sort::Bool => (!value.is_zero()).to_string(),
        Sort::Int | Sort::Real => to_smtlib(value),
    }
}

/// Prints the status line, then `(objective q)` if given, then the model
/// restricted to `shown`.
pub fn print_result(
    status: Status,
    model: Option<&Model>,
    vars: &VarTable,
    shown: &[VarId],
    objective: Option<&Rational>,
) -> String {
    let mut out = status.to_string();
    if let Some(q) = objective {
        out.push_str(&format!("\n(objective {})", to_smtlib(q)));
    }
    if let Some(m) = model {
        let defs: Vec<String> = shown
            .iter()
            .filter_map(|&v| {
                let value = m.get(v)?;
                let sort = vars.sort(v);
                Some(format!(
                    "(define-fun {} () {} {})",
                    quote_symbol(vars.name(v)),
                    sort,
                    format_value(sort, value)
                ))
            })
            .collect();
        if defs.is_empty() {
            out.push_str("\n(model)");
        } else {
            out.push_str(&format!("\n(model {})", defs.join("\n  ")));
        }
    }
    out
}

fn value_of(s: &Sexp) -> Result<Rational, ParseError> {
    match s.symbol() {
        Some("true") => Ok(Rational::from_integer(1.into())),
        Some("false") => Ok(Rational::zero()),
        _ => weight_value(s),
    }
}

/// Reads `define-fun` entries from printed output; the status line and
/// objective are skipped.
pub fn parse_model(text: &str, vars: &VarTable) -> Result<Model, ParseError> {
    let sexps = parse_sexps(tokenize(text)?)?;
    let mut m = Model::new();
    let mut defs = Vec::new();
    for s in &sexps {
        match s.head() {
            Some("model") => defs.extend(s.list().unwrap()[1..].iter()),
            Some("define-fun") => defs.push(s),
            _ => {}
        }
    }
    for d in defs {
        let items = d.list().unwrap_or(&[]);
        let [head, name, args, sort, value] = items else {
            return err(d.pos(), ErrorKind::Syntax("expected (define-fun name () Sort value)".into()));
        };
        if head.symbol() != Some("define-fun") || args.list().map_or(true, |a| !a.is_empty()) {
            return err(d.pos(), ErrorKind::Syntax("expected a 0-ary define-fun".into()));
        }
        let name = name
            .symbol()
            .ok_or_else(|| ParseError::new(name.pos(), ErrorKind::Syntax("expected a symbol".into())))?;
        let v = vars
            .lookup(name)
            .ok_or_else(|| ParseError::new(d.pos(), ErrorKind::Undeclared(name.to_string())))?;
        let sort = term::parse_sort(sort)?;
        if sort != vars.sort(v) {
            return err(d.pos(), ErrorKind::Sort(format!("`{name}` is {}, not {sort}", vars.sort(v))));
        }
        let q = value_of(value)?;
        if sort == Sort::Int && !is_integral(&q) {
            return err(value.pos(), ErrorKind::Sort(format!("`{name}` needs an integer value")));
        }
        m.set(v, q);
    }
    Ok(m)
}

fn print_poly(p: &Polynomial, vars: &VarTable) -> String {
    let terms: Vec<String> = p
        .terms()
        .map(|(m, c)| {
            let mut factors = Vec::new();
            for &(v, e) in m.factors() {
                for _ in 0..e {
                    factors.push(quote_symbol(vars.name(v)));
                }
            }
            if factors.is_empty() {
                to_smtlib(c)
            } else {
                if c != &Rational::from_integer(1.into()) {
                    factors.insert(0, to_smtlib(c));
                }
                if factors.len() == 1 {
                    factors.pop().unwrap()
                } else {
                    format!("(* {})", factors.join(" "))
                }
            }
        })
        .collect();
    match terms.len() {
        0 => "0".to_string(),
        1 => terms[0].clone(),
        _ => format!("(+ {})", terms.join(" ")),
    }
}

pub fn print_literal(l: &Literal, vars: &VarTable) -> String {
    let (body, positive) = match l {
        Literal::Bool { var, positive } => (quote_symbol(vars.name(*var)), *positive),
        Literal::Atom { atom, positive } => {
            let op = match atom.rel {
                Rel::Le => "<=",
                Rel::Lt => "<",
                Rel::Eq => "=",
            };
            (format!("({op} {} 0)", print_poly(&atom.poly, vars)), *positive)
        }
    };
    if positive {
        body
    } else {
        format!("(not {body})")
    }
}

pub fn print_clause(c: &Clause, vars: &VarTable) -> String {
    match c.literals() {
        [] => "false".to_string(),
        [l] => print_literal(l, vars),
        ls => format!(
            "(or {})",
            ls.iter().map(|l| print_literal(l, vars)).collect::<Vec<_>>().join(" ")
        ),
    }
}

/// Writes a formula as a `QF_NIA` script. Soft clauses keep only the soft
/// component of their weight.
pub fn print_script(f: &WeightedFormula) -> String {
    let mut out = String::from("(set-logic QF_NIA)\n");
    for (v, info) in f.vars.iter() {
        out.push_str(&format!("(declare-const {} {})\n", quote_symbol(&info.name), f.vars.sort(v)));
    }
    for c in &f.clauses {
        let body = print_clause(&c.clause, &f.vars);
        match &c.weight {
            Weight::Hard => out.push_str(&format!("(assert {body})\n")),
            Weight::Soft(w) => out.push_str(&format!("(assert-soft {body} :weight {})\n", to_smtlib(&w.soft))),
        }
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}
