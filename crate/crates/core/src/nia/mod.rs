//! Outer loops that solve SMT and Max-SMT over non-linear integer arithmetic
//! by repeatedly linearizing and relaxing the artificial domains.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::rational::int;
use crate::formula::{
    check_model, Clause, CostPair, EvalError, Literal, Model, Polynomial, Rational, Sort, VarId, VarOrigin,
    VarTable, Weight, WeightedFormula,
};
use crate::lia::{lia_solve_assuming, Budget, LiaError, LiaResult};
use crate::linearize::{
    relax_domains_cores, relax_domains_min_models, relax_domains_non_inc, ArtificialBound, BoundKind,
    LinearizeError, Linearization, RelaxParams,
};
use crate::opt::{maxsmt_solve_stats, omt_solve_stats, MaxSmtInstance, Msc, OmtResult, OptResult, SoftClause};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Cores,
    MaxSmtModels,
    OmtModels,
    JumpNoCores,
    JumpCores,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Cores,
        Strategy::MaxSmtModels,
        Strategy::OmtModels,
        Strategy::JumpNoCores,
        Strategy::JumpCores,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Cores => "cores",
            Strategy::MaxSmtModels => "maxsmt",
            Strategy::OmtModels => "omt",
            Strategy::JumpNoCores => "jump",
            Strategy::JumpCores => "jump-cores",
        }
    }

    fn incremental(self) -> bool {
        !matches!(self, Strategy::JumpNoCores | Strategy::JumpCores)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

#[derive(Clone, Debug)]
pub struct NiaConfig {
    pub strategy: Strategy,
    pub relax: RelaxParams,
    /// Radius of the domains chosen by the non-incremental strategies.
    pub radius: i64,
    pub ood_clauses: bool,
    /// Stop with `Unknown` after this many outer iterations.
    pub max_iterations: Option<u32>,
    /// Seeds the optimizer's search heuristics. Each iteration uses a
    /// different derived seed so that ties between equally cheap bound
    /// violations are not always broken the same way.
    pub seed: u64,
}

impl Default for NiaConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::MaxSmtModels,
            relax: RelaxParams::default(),
            radius: 2,
            ood_clauses: true,
            max_iterations: None,
            seed: 0,
        }
    }
}

impl NiaConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NiaError {
    #[error(transparent)]
    Lia(#[from] LiaError),
    #[error(transparent)]
    Linearize(#[from] LinearizeError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("strategy {0} is not available here")]
    UnsupportedStrategy(Strategy),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::Unknown => "unknown",
        })
    }
}

/// What happened in one outer iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iteration {
    /// Bounds in force when the optimizer or solver was called.
    pub bounds: Vec<ArtificialBound>,
    /// Optimal cost found (bound component, soft component); OMT reports its
    /// distance as the bound component.
    pub cost: Option<CostPair>,
    /// Blocking clause added in this iteration and the bounds it negates.
    pub blocking: Option<(Clause, Vec<ArtificialBound>)>,
    pub case_clauses_added: usize,
    pub case_clauses_removed: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NiaStats {
    pub iterations: Vec<Iteration>,
    pub optimizer_calls: u64,
    pub case_clauses_total: usize,
    pub conflicts: u64,
    pub decisions: u64,
    pub pivots: u64,
    pub linearization_vars: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiaResult {
    pub status: Status,
    /// Model over the original variables.
    pub model: Option<Model>,
    /// Soft cost of the model in Max-SMT mode.
    pub objective: Option<Rational>,
    /// Best model found before running out of budget (Max-SMT mode).
    pub best_so_far: Option<(Model, Rational)>,
    pub stats: NiaStats,
}

impl NiaResult {
    fn new(status: Status, stats: NiaStats) -> Self {
        Self {
            status,
            model: None,
            objective: None,
            best_so_far: None,
            stats,
        }
    }

    fn sat(model: Model, stats: NiaStats) -> Self {
        Self {
            model: Some(model),
            ..Self::new(Status::Sat, stats)
        }
    }
}

struct Driver<'a> {
    f0: &'a WeightedFormula,
    config: &'a NiaConfig,
    budget: &'a Budget,
    lin: Linearization,
    stats: NiaStats,
    seen_bounds: BTreeSet<Vec<ArtificialBound>>,
}

fn strip_generation(bounds: &[ArtificialBound]) -> Vec<ArtificialBound> {
    bounds
        .iter()
        .map(|b| ArtificialBound {
            generation: 0,
            ..b.clone()
        })
        .collect()
}

impl<'a> Driver<'a> {
    fn new(f0: &'a WeightedFormula, config: &'a NiaConfig, budget: &'a Budget) -> Result<Self, NiaError> {
        let lin = Linearization::new(f0, config.ood_clauses)?;
        let stats = NiaStats {
            case_clauses_total: lin.num_case_clauses(),
            linearization_vars: lin.chosen().len(),
            ..NiaStats::default()
        };
        Ok(Self {
            f0,
            config,
            budget,
            lin,
            stats,
            seen_bounds: BTreeSet::new(),
        })
    }

    fn out_of_budget(&self) -> bool {
        self.budget.expired()
            || self
                .config
                .max_iterations
                .is_some_and(|k| self.stats.iterations.len() as u32 >= k)
    }

    fn begin_iteration(&mut self) -> Result<(), NiaError> {
        let bounds = self.lin.bounds();
        if !self.config.strategy.incremental() && !self.seen_bounds.insert(strip_generation(&bounds)) {
            return Err(NiaError::Internal("artificial bounds repeated".into()));
        }
        self.stats.iterations.push(Iteration {
            bounds,
            cost: None,
            blocking: None,
            case_clauses_added: 0,
            case_clauses_removed: 0,
        });
        Ok(())
    }

    fn iteration_seed(&self) -> u64 {
        let k = self.stats.iterations.len() as u64;
        self.config.seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }

    fn current(&mut self) -> &mut Iteration {
        self.stats.iterations.last_mut().expect("iteration started")
    }

    fn install(&mut self, bounds: Vec<ArtificialBound>) -> Result<(), NiaError> {
        let delta = self.lin.set_bounds(bounds, self.config.strategy.incremental())?;
        let it = self.current();
        it.case_clauses_added = delta.added.len();
        it.case_clauses_removed = delta.removed.len();
        self.stats.case_clauses_total = self.lin.num_case_clauses();
        Ok(())
    }

    /// Restriction of a linearization model to the input variables, after
    /// checking it against every original hard clause.
    fn verified(&self, m: &Model) -> Result<Option<Model>, NiaError> {
        let projected = m.project(self.f0.vars.ids());
        let (holds, _) = check_model(&self.f0.clauses, &projected)?;
        Ok(holds.then_some(projected))
    }

    fn soft_cost(&self, m: &Model) -> Result<Rational, NiaError> {
        let (_, cost) = check_model(&self.f0.clauses, m)?;
        Ok(cost.soft)
    }

    /// A model inside every artificial domain must be a true model.
    fn admissible(&self, m: &Model, bound_cost_zero: bool) -> Result<Option<Model>, NiaError> {
        let inside = self.lin.bounds_violated_by(m).is_empty();
        if inside != bound_cost_zero {
            return Err(NiaError::Internal("bound cost disagrees with violated bounds".into()));
        }
        if !inside {
            return Ok(None);
        }
        match self.verified(m)? {
            Some(model) => Ok(Some(model)),
            None => Err(NiaError::Internal("model inside the domains violates the input".into())),
        }
    }

    fn bound_softs(&self) -> Vec<SoftClause> {
        self.lin
            .bounds()
            .iter()
            .map(|b| SoftClause {
                clause: Clause::unit(b.literal()),
                weight: CostPair::bound_only(b.soft_weight.clone()),
                is_bound: true,
            })
            .collect()
    }

    fn user_softs(&self) -> Vec<SoftClause> {
        self.lin
            .abstracted()
            .iter()
            .filter_map(|wc| match &wc.weight {
                Weight::Soft(w) => Some(SoftClause {
                    clause: wc.clause.clone(),
                    weight: w.clone(),
                    is_bound: false,
                }),
                Weight::Hard => None,
            })
            .collect()
    }

    fn maxsmt(&mut self, with_user_soft: bool, msc: Msc) -> Result<OptResult, NiaError> {
        let mut soft = if with_user_soft { self.user_softs() } else { Vec::new() };
        soft.extend(self.bound_softs());
        let inst = MaxSmtInstance {
            vars: self.lin.vars(),
            hard: self.lin.hard_clauses(),
            soft,
            msc,
            seed: Some(self.iteration_seed()),
        };
        let (r, st) = maxsmt_solve_stats(&inst, self.budget)?;
        if let OptResult::Optimal { model, cost, .. } = &r {
            // The optimizer's own accounting must match a direct evaluation.
            if crate::opt::evaluate(&inst, model).as_ref() != Some(cost) {
                return Err(NiaError::Internal("optimizer cost mismatch".into()));
            }
        }
        self.note_solver(st.solver.conflicts, st.solver.decisions, st.solver.pivots);
        Ok(r)
    }

    fn note_solver(&mut self, conflicts: u64, decisions: u64, pivots: u64) {
        self.stats.optimizer_calls += 1;
        self.stats.conflicts += conflicts;
        self.stats.decisions += decisions;
        self.stats.pivots += pivots;
    }

    fn finish(self, status: Status) -> NiaResult {
        NiaResult::new(status, self.stats)
    }

    fn cores_loop(mut self) -> Result<NiaResult, NiaError> {
        loop {
            if self.out_of_budget() {
                return Ok(self.finish(Status::Unknown));
            }
            self.begin_iteration()?;
            let bounds = self.lin.bounds();
            let assumptions: Vec<Literal> = bounds.iter().map(ArtificialBound::literal).collect();
            let r = lia_solve_assuming(self.lin.vars(), &self.lin.hard_clauses(), &assumptions, self.budget)?;
            self.stats.optimizer_calls += 1;
            match r {
                LiaResult::Sat(m) => {
                    self.current().cost = Some(CostPair::zero());
                    let Some(model) = self.admissible(&m, true)? else {
                        unreachable!("admissible returns a model or an error when inside");
                    };
                    return Ok(NiaResult::sat(model, self.stats));
                }
                LiaResult::Unknown => return Ok(self.finish(Status::Unknown)),
                LiaResult::Unsat(core) => {
                    if core.assumptions.is_empty() {
                        return Ok(self.finish(Status::Unsat));
                    }
                    let keys: Vec<(VarId, BoundKind)> = core.assumptions.iter().map(|&i| bounds[i].key()).collect();
                    let nb = relax_domains_cores(&self.lin, &keys, &self.config.relax)?;
                    self.install(nb)?;
                }
            }
        }
    }

    fn min_models_loop(mut self) -> Result<NiaResult, NiaError> {
        let strategy = self.config.strategy;
        loop {
            if self.out_of_budget() {
                return Ok(self.finish(Status::Unknown));
            }
            self.begin_iteration()?;
            let (model, bound_cost, core_bounds) = match strategy {
                Strategy::OmtModels => match self.omt()? {
                    OmtResult::Optimal { model, cost } => (model, cost, None),
                    OmtResult::Unsat => return Ok(self.finish(Status::Unsat)),
                    OmtResult::Unknown { .. } => return Ok(self.finish(Status::Unknown)),
                },
                _ => match self.maxsmt(false, Msc::Unbounded)? {
                    OptResult::Optimal { model, cost, core } => {
                        let bounds = self.lin.bounds();
                        let from_core: Vec<ArtificialBound> =
                            core.soft_ids.iter().map(|&j| bounds[j].clone()).collect();
                        (model, cost.bound, Some(from_core))
                    }
                    OptResult::Unsat => return Ok(self.finish(Status::Unsat)),
                    OptResult::Unknown { .. } => return Ok(self.finish(Status::Unknown)),
                },
            };
            self.current().cost = Some(CostPair::bound_only(bound_cost.clone()));
            let zero = bound_cost == Rational::from_integer(0.into());
            if let Some(m) = self.admissible(&model, zero)? {
                return Ok(NiaResult::sat(m, self.stats));
            }
            match strategy {
                Strategy::JumpNoCores | Strategy::JumpCores => {
                    let old = self.lin.bounds();
                    let blocked = if strategy == Strategy::JumpCores {
                        core_bounds.unwrap_or_default()
                    } else {
                        old
                    };
                    if blocked.is_empty() {
                        return Err(NiaError::Internal("optimality core cites no bound".into()));
                    }
                    let c = self.lin.add_blocking(&blocked);
                    self.current().blocking = Some((c, blocked));
                    match relax_domains_non_inc(&self.lin, &model, self.config.radius) {
                        Ok(nb) => self.install(nb)?,
                        Err(LinearizeError::ValueTooLarge(_)) => return Ok(self.finish(Status::Unknown)),
                        Err(e) => return Err(e.into()),
                    }
                }
                _ => {
                    match relax_domains_min_models(&self.lin, &model, &self.config.relax) {
                        Ok(nb) => self.install(nb)?,
                        Err(LinearizeError::ValueTooLarge(_)) => return Ok(self.finish(Status::Unknown)),
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
    }

    /// Distance to the artificial domains as an OMT objective: one slack per
    /// bound, `s ≥ 0` and `s ≥ L − V` (or `s ≥ V − U`), with cost the sum.
    fn omt(&mut self) -> Result<OmtResult, NiaError> {
        let mut vars: VarTable = self.lin.vars().clone();
        let mut clauses = self.lin.hard_clauses();
        let mut total = Polynomial::zero();
        for b in self.lin.bounds() {
            let prefix = match b.kind {
                BoundKind::Lower => format!("l_{}", vars.name(b.var)),
                BoundKind::Upper => format!("u_{}", vars.name(b.var)),
            };
            let s = vars.fresh(&prefix, Sort::Int, VarOrigin::CostSlack { kind: b.kind.into(), of: b.var });
            let sp = Polynomial::var(s);
            let v = Polynomial::var(b.var);
            let gap = match b.kind {
                BoundKind::Lower => v.neg().add_constant(&int(b.value)),
                BoundKind::Upper => v.add_constant(&-int(b.value)),
            };
            clauses.push(Clause::unit(Literal::ge(sp.clone())));
            clauses.push(Clause::unit(Literal::ge(sp.sub(&gap))));
            total = total.add(&sp.scale(&b.soft_weight));
        }
        let cost = vars.fresh("cost", Sort::Int, VarOrigin::CostTotal);
        clauses.push(Clause::unit(Literal::eq(Polynomial::var(cost).sub(&total))));
        let (r, st) = omt_solve_stats(&vars, &clauses, cost, Some(self.iteration_seed()), self.budget)?;
        self.note_solver(st.solver.conflicts, st.solver.decisions, st.solver.pivots);
        Ok(match r {
            OmtResult::Optimal { model, cost } => OmtResult::Optimal {
                model: model.project(self.lin.vars().ids()),
                cost,
            },
            other => other,
        })
    }

    fn maxsmt_loop(mut self) -> Result<NiaResult, NiaError> {
        let mut bsf: Option<(Model, Rational)> = None;
        let mut msc = Msc::Unbounded;
        loop {
            if self.out_of_budget() {
                let mut r = self.finish(Status::Unknown);
                r.best_so_far = bsf;
                return Ok(r);
            }
            self.begin_iteration()?;
            match self.maxsmt(true, msc.clone())? {
                OptResult::Unsat => {
                    return Ok(match bsf {
                        None => self.finish(Status::Unsat),
                        Some((m, c)) => NiaResult {
                            objective: Some(c),
                            ..NiaResult::sat(m, self.stats)
                        },
                    });
                }
                OptResult::Unknown { .. } => {
                    let mut r = self.finish(Status::Unknown);
                    r.best_so_far = bsf;
                    return Ok(r);
                }
                OptResult::Optimal { model, cost, .. } => {
                    self.current().cost = Some(cost.clone());
                    let zero = cost.bound == Rational::from_integer(0.into());
                    if let Some(m) = self.admissible(&model, zero)? {
                        let soft = self.soft_cost(&m)?;
                        if soft != cost.soft {
                            return Err(NiaError::Internal("soft cost differs on the input".into()));
                        }
                        if bsf.as_ref().is_some_and(|(_, b)| &soft >= b) {
                            return Err(NiaError::Internal("best-so-far did not improve".into()));
                        }
                        let done = soft == Rational::from_integer(0.into());
                        msc = Msc::Below(soft.clone());
                        bsf = Some((m, soft));
                        if done {
                            let (m, c) = bsf.unwrap();
                            return Ok(NiaResult {
                                objective: Some(c),
                                ..NiaResult::sat(m, self.stats)
                            });
                        }
                    } else {
                        match relax_domains_min_models(&self.lin, &model, &self.config.relax) {
                            Ok(nb) => self.install(nb)?,
                            Err(LinearizeError::ValueTooLarge(_)) => {
                                let mut r = self.finish(Status::Unknown);
                                r.best_so_far = bsf;
                                return Ok(r);
                            }
                            Err(e) => return Err(e.into()),
                        }
                    }
                }
            }
        }
    }
}

/// SMT(QF-NIA) on the hard clauses of `f0` with the configured strategy.
pub fn solve_smt(f0: &WeightedFormula, config: &NiaConfig, budget: &Budget) -> Result<NiaResult, NiaError> {
    let hard_only = hard_part(f0);
    let d = Driver::new(&hard_only, config, budget)?;
    match config.strategy {
        Strategy::Cores => d.cores_loop(),
        _ => d.min_models_loop(),
    }
}

/// Core-guided loop: artificial bounds are assumptions, and the bounds cited
/// by each unsatisfiable core are relaxed.
pub fn solve_smt_cores(f0: &WeightedFormula, config: &NiaConfig, budget: &Budget) -> Result<NiaResult, NiaError> {
    if config.strategy != Strategy::Cores {
        return Err(NiaError::UnsupportedStrategy(config.strategy));
    }
    solve_smt(f0, config, budget)
}

/// Model-guided loop: minimal models of the linearization drive relaxation.
pub fn solve_smt_min_models(
    f0: &WeightedFormula,
    config: &NiaConfig,
    budget: &Budget,
) -> Result<NiaResult, NiaError> {
    if config.strategy == Strategy::Cores {
        return Err(NiaError::UnsupportedStrategy(config.strategy));
    }
    solve_smt(f0, config, budget)
}

/// Max-SMT(QF-NIA): minimizes the soft cost of `f0` subject to its hard clauses.
pub fn solve_maxsmt(f0: &WeightedFormula, config: &NiaConfig, budget: &Budget) -> Result<NiaResult, NiaError> {
    if config.strategy != Strategy::MaxSmtModels {
        return Err(NiaError::UnsupportedStrategy(config.strategy));
    }
    Driver::new(f0, config, budget)?.maxsmt_loop()
}

fn hard_part(f0: &WeightedFormula) -> WeightedFormula {
    let mut out = WeightedFormula::new(f0.vars.clone());
    for wc in f0.hard() {
        out.add_hard(wc.clause.clone());
    }
    out
}
