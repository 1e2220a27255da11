use std::time::Instant;

use linsplit::ea::solve_ea;
use linsplit::lia::Budget;
use linsplit::nia::{solve_maxsmt, solve_smt, NiaStats, Status, Strategy};
use linsplit::oracle::{brute_force_nia, OracleResult};
use linsplit::smtlib::{parse, print_result, Parsed};
use linsplit::{check_model, Model, Rational, VarId, VarTable, WeightedFormula};

use crate::{Mode, Options, EXIT_INPUT, EXIT_INTERNAL, EXIT_SAT, EXIT_UNKNOWN, EXIT_UNSAT, EXIT_USAGE};

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub objective: Option<Rational>,
    pub stdout: String,
    pub iterations: usize,
    pub time_ms: u128,
    pub stats: Vec<String>,
    pub oracle_note: Option<String>,
    pub oracle_disagrees: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.oracle_disagrees {
            return EXIT_INTERNAL;
        }
        match self.status {
            Status::Sat => EXIT_SAT,
            Status::Unsat => EXIT_UNSAT,
            Status::Unknown => EXIT_UNKNOWN,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn stat_lines(s: &NiaStats, time_ms: u128) -> Vec<String> {
    let mut lines = vec![
        format!("iterations {}", s.iterations.len()),
        format!("case-clauses-added {}", s.case_clauses_total),
        format!("optimizer-calls {}", s.optimizer_calls),
        format!("conflicts {}", s.conflicts),
        format!("decisions {}", s.decisions),
        format!("pivots {}", s.pivots),
        format!("time-ms {time_ms}"),
    ];
    for (i, it) in s.iterations.iter().enumerate() {
        let mut line = format!("iteration {} bounds {}", i + 1, it.bounds.len());
        if let Some(c) = &it.cost {
            line += &format!(" bound-cost {} soft-cost {}", c.bound, c.soft);
        }
        line += &format!(" case-clauses +{} -{}", it.case_clauses_added, it.case_clauses_removed);
        if let Some((c, _)) = &it.blocking {
            line += &format!(" blocking-literals {}", c.len());
        }
        lines.push(line);
    }
    lines
}

/// Hard clauses only; `smt` mode ignores soft assertions.
fn hard_part(f: &WeightedFormula) -> WeightedFormula {
    let mut out = WeightedFormula::new(f.vars.clone());
    for c in f.hard() {
        out.add_hard(c.clause.clone());
    }
    out
}

fn validated(f: &WeightedFormula, m: &Model) -> Result<(), Failure> {
    match check_model(&f.clauses, m) {
        Ok((true, _)) => Ok(()),
        Ok((false, _)) => Err(fail(EXIT_INTERNAL, "internal error: the model violates a hard clause")),
        Err(e) => Err(fail(EXIT_INTERNAL, format!("internal error: {e}"))),
    }
}

fn show(status: Status, model: Option<&Model>, vars: &VarTable, shown: &[VarId], obj: Option<&Rational>) -> String {
    print_result(status, model, vars, shown, obj)
}

pub fn solve_text(text: &str, opts: &Options) -> Result<Outcome, Failure> {
    let parsed = parse(text).map_err(|e| fail(EXIT_INPUT, e.to_string()))?;
    let mode = match (&parsed, opts.mode) {
        (Parsed::Qf(_), Some(Mode::Ea)) => {
            return Err(fail(EXIT_USAGE, "--mode ea needs a quantified script (logic NIA_EA)"));
        }
        (Parsed::Ea(_), Some(m @ (Mode::Smt | Mode::Maxsmt))) => {
            return Err(fail(
                EXIT_USAGE,
                format!("--mode {} cannot read a quantified script", if m == Mode::Smt { "smt" } else { "maxsmt" }),
            ));
        }
        (Parsed::Ea(_), _) => Mode::Ea,
        (Parsed::Qf(_), Some(m)) => m,
        (Parsed::Qf(s), None) if s.formula.has_soft() => Mode::Maxsmt,
        (Parsed::Qf(_), None) => Mode::Smt,
    };
    if mode != Mode::Smt && opts.config.strategy != Strategy::MaxSmtModels {
        return Err(fail(
            EXIT_USAGE,
            format!("strategy {} only applies to --mode smt; optimization uses maxsmt", opts.config.strategy),
        ));
    }
    let budget = Budget::with_timeout(opts.timeout);
    let start = Instant::now();
    let internal = |e: &dyn std::fmt::Display| fail(EXIT_INTERNAL, format!("solver error: {e}"));
    match parsed {
        Parsed::Qf(script) => {
            let shown = script.declared_vars();
            let f = if mode == Mode::Smt {
                hard_part(&script.formula)
            } else {
                script.formula.clone()
            };
            let r = if mode == Mode::Smt {
                solve_smt(&f, &opts.config, &budget)
            } else {
                solve_maxsmt(&f, &opts.config, &budget)
            }
            .map_err(|e| internal(&e))?;
            let time_ms = start.elapsed().as_millis();
            let (model, objective) = match (&r.model, &r.best_so_far) {
                (Some(m), _) => (Some(m), r.objective.clone()),
                (None, Some((m, q))) if mode == Mode::Maxsmt => (Some(m), Some(q.clone())),
                _ => (None, None),
            };
            if let Some(m) = model {
                validated(&f, m)?;
            }
            let objective = if mode == Mode::Smt { None } else { objective };
            let stdout = show(r.status, model, &f.vars, &shown, objective.as_ref());
            let mut out = Outcome {
                status: r.status,
                objective,
                stdout,
                iterations: r.stats.iterations.len(),
                time_ms,
                stats: stat_lines(&r.stats, time_ms),
                oracle_note: None,
                oracle_disagrees: false,
            };
            if let Some((lo, hi)) = opts.oracle_box {
                cross_check(&f, lo, hi, mode, &mut out);
            }
            Ok(out)
        }
        Parsed::Ea(script) => {
            let shown = script.declared_vars();
            let r = solve_ea(&script.problem, &opts.config, &budget).map_err(|e| internal(&e))?;
            let time_ms = start.elapsed().as_millis();
            let objective = if script.problem.soft.is_empty() {
                None
            } else {
                r.objective.clone()
            };
            let stdout = show(r.status, r.model.as_ref(), &script.problem.vars, &shown, objective.as_ref());
            Ok(Outcome {
                status: r.status,
                objective,
                stdout,
                iterations: r.stats.iterations.len(),
                time_ms,
                stats: stat_lines(&r.stats, time_ms),
                oracle_note: opts
                    .oracle_box
                    .map(|_| "skipped: quantified problems are not enumerable".to_string()),
                oracle_disagrees: false,
            })
        }
    }
}

/// Compares with exhaustive enumeration. A model outside the box is not a
/// disagreement; an unsat answer or a worse optimum than the box's is.
fn cross_check(f: &WeightedFormula, lo: i64, hi: i64, mode: Mode, out: &mut Outcome) {
    let oracle = match brute_force_nia(f, lo, hi) {
        Ok(o) => o,
        Err(e) => {
            out.oracle_note = Some(format!("skipped: {e}"));
            return;
        }
    };
    let (found, disagrees) = match &oracle {
        OracleResult::NoModelInBox => ("no model in box".to_string(), false),
        OracleResult::Sat { cost, .. } => {
            let worse = mode == Mode::Maxsmt
                && out.status == Status::Sat
                && out.objective.as_ref().is_some_and(|q| q > cost);
            let what = if mode == Mode::Maxsmt {
                format!("model with cost {cost}")
            } else {
                "model".to_string()
            };
            (what, out.status == Status::Unsat || worse)
        }
    };
    out.oracle_disagrees = disagrees;
    out.oracle_note = Some(format!(
        "{found} in [{lo}, {hi}]; {}",
        if disagrees { "DISAGREES" } else { "consistent" }
    ));
}
