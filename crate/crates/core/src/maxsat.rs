//! Implicit-hitting-set MaxSAT engine and its incremental API.
//!
//! Every soft clause is represented by a soft literal that is assumed true
//! when the soft clause must hold. Unit soft clauses use their own literal;
//! longer ones get a fresh relaxation variable `b` with the hard clause
//! `(clause ∨ b)` and soft literal `¬b`. The loop alternates an exact
//! minimum-cost hitting set over the known cores with a SAT call that
//! assumes every soft literal outside the hitting set.
//!
//! The incremental surface mirrors IPAMIR: literals of a hard clause are
//! pushed one by one and a zero finalizes it, optionally as an XOR clause.
//! Assumptions hold for the next solve only. Cores found under user
//! assumptions are kept together with the assumptions they used and are only
//! reused when those assumptions are made again.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use thiserror::Error;

use crate::cdcl::{SatStatus, Solver, SolverConfig};
use crate::hs::{HittingSetSolver, HsError, IndLit};
use crate::model::{Assignment, Instance, Lit, ModelError, SolveResult, Var, Verdict, XorClause};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MaxSatError {
    #[error("soft weights overflow 64 bits")]
    WeightOverflow,
    #[error("soft clause weight must be positive")]
    ZeroWeight,
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl From<ModelError> for MaxSatError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::WeightOverflow => MaxSatError::WeightOverflow,
            ModelError::ZeroWeight => MaxSatError::ZeroWeight,
            other => MaxSatError::Internal(other.to_string()),
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum StateError {
    #[error("no model available: solve first, and do not modify the instance afterwards")]
    NoModel,
    #[error("literal 0 is not a literal")]
    ZeroLiteral,
}

/// How much of the instance the hitting-set optimizer sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Seeding {
    #[default]
    None,
    /// Hard clauses over soft-literal variables, translated to indicators.
    Cnf,
}

#[derive(Debug, Clone)]
pub struct MaxSatConfig {
    pub deadline: Option<Instant>,
    pub seeding: Seeding,
    /// Drop-one core trimming with a small conflict budget.
    pub minimize_cores: bool,
}

impl Default for MaxSatConfig {
    fn default() -> MaxSatConfig {
        MaxSatConfig {
            deadline: None,
            seeding: Seeding::None,
            minimize_cores: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaxSatStats {
    pub iterations: u64,
    pub sat_calls: u64,
    pub cores: u64,
    pub conditional_cores: u64,
    pub candidates_accepted: u64,
    pub candidates_rejected: u64,
    pub seed_constraints: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Bounds {
    pub lower: u64,
    pub upper: Option<u64>,
}

/// Outcome of checking a model proposed by the seeded optimizer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    /// A complete model satisfying the hard clauses (possibly completed by
    /// the SAT solver from the candidate).
    Accept(Assignment),
    /// A clause over indicators, implied by the hard clauses, that the
    /// candidate violates.
    Reject(Vec<IndLit>),
}

#[derive(Debug, Clone)]
struct Soft {
    lit: Lit,
    weight: u64,
}

#[derive(Debug, Clone)]
struct LastSolve {
    model: Option<Assignment>,
    cost: Option<u64>,
}

/// Polled between SAT calls; returning true stops the search with the best
/// model found so far.
pub type TerminateFn = Box<dyn FnMut() -> bool + Send>;

#[derive(Clone, Default)]
struct Terminate(Option<Arc<Mutex<TerminateFn>>>);

impl Terminate {
    fn requested(&self) -> bool {
        self.0
            .as_ref()
            .is_some_and(|f| f.lock().map(|mut f| f()).unwrap_or(true))
    }
}

impl fmt::Debug for Terminate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0.is_some() {
            "Terminate(set)"
        } else {
            "Terminate(none)"
        })
    }
}

#[derive(Debug, Clone)]
pub struct MaxSatSolver {
    config: MaxSatConfig,
    sat: Solver,
    /// External variable index → internal variable.
    ext2int: Vec<Option<Var>>,
    /// Internal variable index → external variable, `None` for internal ones.
    int2ext: Vec<Option<Var>>,
    softs: Vec<Soft>,
    soft_of_lit: HashMap<Lit, usize>,
    total_weight: u64,
    hs: HittingSetSolver,
    /// (assumptions the core depends on, soft ids)
    cond_cores: Vec<(Vec<Lit>, Vec<usize>)>,
    hard_cnf: Vec<Vec<Lit>>,
    hard_xor: Vec<XorClause>,
    seeded_upto: usize,
    seeded_all: bool,
    pending: Vec<Lit>,
    assumptions: Vec<Lit>,
    unsat: bool,
    /// Best known model (internal numbering), kept while it satisfies every
    /// hard clause.
    cached: Option<Assignment>,
    last: Option<LastSolve>,
    bounds: Bounds,
    stats: MaxSatStats,
    terminate: Terminate,
}

impl Default for MaxSatSolver {
    fn default() -> Self {
        MaxSatSolver::new(MaxSatConfig::default())
    }
}

impl MaxSatSolver {
    pub fn new(config: MaxSatConfig) -> MaxSatSolver {
        MaxSatSolver {
            config,
            sat: Solver::new(SolverConfig::default()),
            ext2int: Vec::new(),
            int2ext: Vec::new(),
            softs: Vec::new(),
            soft_of_lit: HashMap::new(),
            total_weight: 0,
            hs: HittingSetSolver::new(),
            cond_cores: Vec::new(),
            hard_cnf: Vec::new(),
            hard_xor: Vec::new(),
            seeded_upto: 0,
            seeded_all: false,
            pending: Vec::new(),
            assumptions: Vec::new(),
            unsat: false,
            cached: None,
            last: None,
            bounds: Bounds::default(),
            stats: MaxSatStats::default(),
            terminate: Terminate::default(),
        }
    }

    /// Installs (or with `None` removes) a callback asking the search to stop.
    pub fn set_terminate(&mut self, f: Option<TerminateFn>) {
        self.terminate = Terminate(f.map(|f| Arc::new(Mutex::new(f))));
    }

    fn should_stop(&self) -> bool {
        self.config.deadline.is_some_and(|d| Instant::now() >= d) || self.terminate.requested()
    }

    pub fn config_mut(&mut self) -> &mut MaxSatConfig {
        &mut self.config
    }

    pub fn stats(&self) -> MaxSatStats {
        self.stats
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn sat_solver(&self) -> &Solver {
        &self.sat
    }

    pub fn num_softs(&self) -> usize {
        self.softs.len()
    }

    fn fresh_internal(&mut self) -> Var {
        let v = self.sat.new_var();
        self.int2ext.push(None);
        v
    }

    fn map_var(&mut self, ext: Var) -> Var {
        if ext.index() >= self.ext2int.len() {
            self.ext2int.resize(ext.index() + 1, None);
        }
        if let Some(v) = self.ext2int[ext.index()] {
            return v;
        }
        let v = self.fresh_internal();
        self.int2ext[v.index()] = Some(ext);
        self.ext2int[ext.index()] = Some(v);
        v
    }

    fn map_lit(&mut self, l: Lit) -> Lit {
        Lit::new(self.map_var(l.var()), l.is_positive())
    }

    fn mutated(&mut self) {
        self.last = None;
    }

    fn model_satisfies_cnf(m: &Assignment, c: &[Lit]) -> bool {
        c.iter().any(|&l| m.lit_value(l).unwrap_or(!l.is_positive()))
    }

    fn model_satisfies_xor(m: &Assignment, x: &XorClause) -> bool {
        x.vars().iter().fold(false, |acc, &v| acc ^ m.value(v).unwrap_or(false)) == x.rhs()
    }

    /// Adds a hard clause (external literals).
    pub fn add_hard_clause(&mut self, lits: &[Lit]) {
        self.mutated();
        let c: Vec<Lit> = lits.iter().map(|&l| self.map_lit(l)).collect();
        self.add_hard_internal(c);
    }

    fn add_hard_internal(&mut self, c: Vec<Lit>) {
        if self.sat.add_clause(&c).is_err() {
            self.unsat = true;
        }
        if let Some(m) = &self.cached {
            if !Self::model_satisfies_cnf(m, &c) {
                self.cached = None;
            }
        }
        self.hard_cnf.push(c);
    }

    /// Adds a hard XOR clause: the XOR of `lits` equals `rhs`.
    pub fn add_hard_xor(&mut self, lits: &[Lit], rhs: bool) {
        self.mutated();
        let mapped: Vec<Lit> = lits.iter().map(|&l| self.map_lit(l)).collect();
        let x = XorClause::normalize(mapped, rhs);
        if x.is_tautology() {
            return;
        }
        if x.is_contradiction() {
            self.unsat = true;
            return;
        }
        if x.len() == 1 {
            self.add_hard_internal(vec![Lit::new(x.vars()[0], x.rhs())]);
            return;
        }
        if self
            .sat
            .add_xor(&x.vars().iter().map(|v| v.pos()).collect::<Vec<_>>(), x.rhs())
            .is_err()
        {
            self.unsat = true;
        }
        if let Some(m) = &self.cached {
            if !Self::model_satisfies_xor(m, &x) {
                self.cached = None;
            }
        }
        self.hard_xor.push(x);
    }

    /// IPAMIR-style hard clause input: nonzero literals are buffered, zero
    /// finalizes the clause, as an XOR clause (with right-hand side true) if
    /// `is_xor` is set on that call.
    pub fn add_hard_lit(&mut self, lit_or_zero: i32, is_xor: bool) {
        if lit_or_zero != 0 {
            self.pending.push(Lit::from_dimacs(lit_or_zero));
            return;
        }
        let lits = std::mem::take(&mut self.pending);
        if is_xor {
            self.add_hard_xor(&lits, true);
        } else {
            self.add_hard_clause(&lits);
        }
    }

    /// Soft unit clause `(lit)`; repeated registration adds up the weight.
    pub fn add_soft_lit(&mut self, lit: Lit, weight: u64) -> Result<(), MaxSatError> {
        if weight == 0 {
            return Err(MaxSatError::ZeroWeight);
        }
        self.total_weight = self
            .total_weight
            .checked_add(weight)
            .ok_or(MaxSatError::WeightOverflow)?;
        self.mutated();
        let l = self.map_lit(lit);
        self.add_soft_internal(l, weight)
    }

    fn add_soft_internal(&mut self, l: Lit, weight: u64) -> Result<(), MaxSatError> {
        match self.soft_of_lit.get(&l) {
            Some(&id) => {
                let w = self.softs[id]
                    .weight
                    .checked_add(weight)
                    .ok_or(MaxSatError::WeightOverflow)?;
                self.softs[id].weight = w;
                self.hs.set_weight(id, w);
            }
            None => {
                let id = self.hs.push_soft(weight);
                debug_assert_eq!(id, self.softs.len());
                self.softs.push(Soft { lit: l, weight });
                self.soft_of_lit.insert(l, id);
            }
        }
        Ok(())
    }

    /// Soft clause of any length.
    pub fn add_soft_clause(&mut self, lits: &[Lit], weight: u64) -> Result<(), MaxSatError> {
        if weight == 0 {
            return Err(MaxSatError::ZeroWeight);
        }
        if lits.len() == 1 {
            return self.add_soft_lit(lits[0], weight);
        }
        self.total_weight = self
            .total_weight
            .checked_add(weight)
            .ok_or(MaxSatError::WeightOverflow)?;
        self.mutated();
        let mut c: Vec<Lit> = lits.iter().map(|&l| self.map_lit(l)).collect();
        let b = self.fresh_internal();
        c.push(b.pos());
        self.add_hard_internal(c);
        self.add_soft_internal(b.neg(), weight)
    }

    /// Assumes `lit` for the next solve call only.
    pub fn assume(&mut self, lit: Lit) {
        self.mutated();
        let l = self.map_lit(lit);
        self.assumptions.push(l);
    }

    pub fn val_obj(&self) -> Result<u64, StateError> {
        self.last.as_ref().and_then(|l| l.cost).ok_or(StateError::NoModel)
    }

    /// Value of an external literal in the last model. Variables never
    /// mentioned to the solver are false.
    pub fn val_lit(&self, lit: Lit) -> Result<bool, StateError> {
        let m = self
            .last
            .as_ref()
            .and_then(|l| l.model.as_ref())
            .ok_or(StateError::NoModel)?;
        Ok(m.lit_value(lit).unwrap_or(!lit.is_positive()))
    }

    /// The last model in external numbering.
    pub fn model(&self) -> Option<&Assignment> {
        self.last.as_ref().and_then(|l| l.model.as_ref())
    }

    fn soft_cost(&self, m: &Assignment) -> u64 {
        // weights are checked on insertion, so the sum cannot overflow
        self.softs
            .iter()
            .filter(|s| m.lit_value(s.lit) != Some(true))
            .map(|s| s.weight)
            .sum()
    }

    fn external_model(&self, m: &Assignment) -> Assignment {
        let mut out = Assignment::new(self.ext2int.len() as u32);
        for (e, i) in self.ext2int.iter().enumerate() {
            let v = Var::from_index(e);
            out.set(v, i.and_then(|i| m.value(i)).unwrap_or(false));
        }
        out
    }

    fn finish(&mut self, verdict: Verdict, best: Option<(Assignment, u64)>) -> SolveResult {
        self.assumptions.clear();
        let (model, cost) = match best {
            Some((m, c)) => (Some(self.external_model(&m)), Some(c)),
            None => (None, None),
        };
        self.last = Some(LastSolve {
            model: model.clone(),
            cost,
        });
        match (verdict, model, cost) {
            (Verdict::OptimumFound, Some(m), Some(c)) => SolveResult::optimum(m, c),
            (Verdict::Unsatisfiable, _, _) => SolveResult::unsat(),
            (_, m, c) => SolveResult::unknown(m.zip(c)),
        }
    }

    fn sat_config(&mut self, conflict_limit: Option<u64>) {
        let cfg = self.sat.config_mut();
        cfg.deadline = self.config.deadline;
        cfg.conflict_limit = conflict_limit;
    }

    /// Translates newly added hard clauses over soft-literal variables into
    /// optimizer constraints.
    fn seed(&mut self) {
        if self.config.seeding != Seeding::Cnf {
            return;
        }
        // a variable is seedable when exactly one soft literal mentions it
        let mut per_var: HashMap<Var, Option<usize>> = HashMap::new();
        for (id, s) in self.softs.iter().enumerate() {
            per_var.entry(s.lit.var()).and_modify(|e| *e = None).or_insert(Some(id));
        }
        let ind = |l: Lit| -> Option<IndLit> {
            let id = (*per_var.get(&l.var())?)?;
            // l equal to the soft literal: l true means the soft holds
            Some(if self.softs[id].lit == l {
                IndLit::keep(id)
            } else {
                IndLit::relax(id)
            })
        };
        let seedable: Vec<Option<Vec<IndLit>>> = self
            .hard_cnf
            .iter()
            .map(|c| c.iter().map(|&l| ind(l)).collect())
            .collect();
        let all = seedable.iter().all(Option::is_some)
            && (0..self.sat.num_vars()).all(|i| matches!(per_var.get(&Var::from_index(i)), Some(Some(_))));
        // the optimizer never sees XOR clauses, so it can never be trusted
        // with every clause while any exists
        self.seeded_all = all && self.hard_xor.is_empty();
        for sc in seedable.into_iter().skip(self.seeded_upto).flatten() {
            if self.hs.add_seed_constraint(&sc).unwrap_or(false) {
                self.stats.seed_constraints += 1;
            }
        }
        self.seeded_upto = self.hard_cnf.len();
    }

    /// Every hard clause is visible to the optimizer. Never true while XOR
    /// clauses exist.
    pub fn all_clauses_seeded(&self) -> bool {
        self.seeded_all
    }

    /// The full assignment induced by a hitting set when every variable
    /// carries exactly one soft literal.
    fn candidate(&self, relaxed: &[usize]) -> Option<Assignment> {
        if self.config.seeding != Seeding::Cnf {
            return None;
        }
        let n = self.sat.num_vars();
        let mut m = Assignment::new(n as u32);
        for (id, s) in self.softs.iter().enumerate() {
            let holds = relaxed.binary_search(&id).is_err();
            let val = s.lit.is_positive() == holds;
            match m.value(s.lit.var()) {
                Some(old) if old != val => return None,
                _ => m.set(s.lit.var(), val),
            }
        }
        if !m.is_complete(n as u32) {
            return None;
        }
        if self.assumptions.iter().any(|&a| m.lit_value(a) != Some(true)) {
            return None;
        }
        Some(m)
    }

    /// Checks an optimizer-proposed model against the hard clauses. A
    /// violating candidate is assumption-solved; if that fails, the negated
    /// failed assumptions over indicators are returned as the constraint to
    /// feed back. Bounds are never touched here.
    pub fn validate_optimizer_model(&mut self, candidate: &Assignment) -> Validation {
        let ok = self.hard_cnf.iter().all(|c| Self::model_satisfies_cnf(candidate, c))
            && self.hard_xor.iter().all(|x| Self::model_satisfies_xor(candidate, x));
        if ok {
            return Validation::Accept(candidate.clone());
        }
        let assumed: Vec<Lit> = (0..self.sat.num_vars())
            .filter_map(|i| {
                let v = Var::from_index(i);
                candidate.value(v).map(|b| Lit::new(v, b))
            })
            .collect();
        self.sat_config(None);
        self.stats.sat_calls += 1;
        let out = self.sat.solve_assuming(&assumed);
        match out.status {
            SatStatus::Sat => Validation::Accept(out.model.expect("model")),
            SatStatus::UnsatUnderAssumptions => {
                let failed = out.failed_assumptions.expect("failed assumptions");
                let clause: Vec<IndLit> = failed
                    .iter()
                    .filter_map(|&a| {
                        // ¬a is implied; express it over the indicator of a's variable
                        let neg = !a;
                        self.softs.iter().position(|s| s.lit.var() == a.var()).map(|id| {
                            if self.softs[id].lit == neg {
                                IndLit::keep(id)
                            } else {
                                IndLit::relax(id)
                            }
                        })
                    })
                    .collect();
                Validation::Reject(clause)
            }
            // the candidate stays unverified; an empty clause tells the caller
            // to fall back to an ordinary SAT call
            SatStatus::Unsat | SatStatus::Unknown => Validation::Reject(Vec::new()),
        }
    }

    /// Solves the current instance under the current assumptions.
    pub fn solve(&mut self) -> Result<SolveResult, MaxSatError> {
        if self.unsat || !self.sat.is_ok() {
            self.unsat = true;
            return Ok(self.finish(Verdict::Unsatisfiable, None));
        }
        let user: Vec<Lit> = self.assumptions.clone();
        self.bounds = Bounds::default();
        self.seed();

        // feasibility of the hard part, and a first upper bound
        self.sat_config(None);
        self.stats.sat_calls += 1;
        let first = self.sat.solve_assuming(&user);
        let mut best: Option<(Assignment, u64)>;
        match first.status {
            SatStatus::Unsat => {
                self.unsat = true;
                return Ok(self.finish(Verdict::Unsatisfiable, None));
            }
            SatStatus::UnsatUnderAssumptions => return Ok(self.finish(Verdict::Unsatisfiable, None)),
            SatStatus::Unknown => return Ok(self.finish(Verdict::Unknown, None)),
            SatStatus::Sat => {
                let m = first.model.expect("model");
                let c = self.soft_cost(&m);
                best = Some((m, c));
            }
        }
        if let Some(m) = &self.cached {
            let m = m.clone().completed(self.sat.num_vars() as u32);
            if user.iter().all(|&a| m.lit_value(a) == Some(true)) {
                let c = self.soft_cost(&m);
                if best.as_ref().is_none_or(|b| c < b.1) {
                    best = Some((m, c));
                }
            }
        }
        self.bounds.upper = best.as_ref().map(|b| b.1);

        loop {
            self.stats.iterations += 1;
            if self.should_stop() {
                return Ok(self.give_up(best));
            }
            let extra = self.active_cond_cores(&user);
            let hs = match self.hs.min_cost_hitting_set_with(&extra, self.config.deadline) {
                Ok(h) => h,
                Err(HsError::Timeout) => return Ok(self.give_up(best)),
                Err(HsError::Infeasible) => return self.infeasible_optimizer(&user),
                Err(e) => return Err(MaxSatError::Internal(e.to_string())),
            };
            self.bounds.lower = self.bounds.lower.max(hs.cost);
            let upper = self.bounds.upper.expect("upper bound exists");
            if self.bounds.lower > upper {
                return Err(MaxSatError::Internal(format!(
                    "lower bound {} exceeds upper bound {}",
                    self.bounds.lower, upper
                )));
            }
            if self.bounds.lower == upper {
                return Ok(self.optimum(best.expect("model")));
            }

            if let Some(cand) = self.candidate(&hs.ids) {
                match self.validate_optimizer_model(&cand) {
                    Validation::Accept(m) => {
                        self.stats.candidates_accepted += 1;
                        let c = self.soft_cost(&m);
                        if c < upper {
                            self.bounds.upper = Some(c);
                            best = Some((m, c));
                        }
                        if c == self.bounds.lower {
                            continue;
                        }
                    }
                    Validation::Reject(clause) if !clause.is_empty() => {
                        self.stats.candidates_rejected += 1;
                        if self.hs.add_seed_constraint(&clause).unwrap_or(false) {
                            self.stats.seed_constraints += 1;
                            continue;
                        }
                    }
                    Validation::Reject(_) => self.stats.candidates_rejected += 1,
                }
            }

            match self.extract_cores(&hs.ids, &user, &mut best)? {
                None => return Ok(self.give_up(best)),
                Some(0) => continue,
                Some(_) => {}
            }
            // cheap non-optimal hitting sets keep producing cores until one
            // of them turns out satisfiable; only then is the exact optimizer
            // needed again
            loop {
                if self.should_stop() {
                    return Ok(self.give_up(best));
                }
                let extra = self.active_cond_cores(&user);
                let Ok(g) = self.hs.greedy_hitting_set_with(&extra) else {
                    break;
                };
                if g.cost >= self.bounds.upper.unwrap_or(u64::MAX) {
                    break;
                }
                match self.extract_cores(&g.ids, &user, &mut best)? {
                    None => return Ok(self.give_up(best)),
                    Some(0) => break,
                    Some(_) => {}
                }
            }
        }
    }

    fn active_cond_cores(&self, user: &[Lit]) -> Vec<Vec<usize>> {
        self.cond_cores
            .iter()
            .filter(|(cond, _)| cond.iter().all(|c| user.contains(c)))
            .map(|(_, core)| core.clone())
            .collect()
    }

    /// Assumes every soft clause outside `relaxed` and collects cores, each
    /// one relaxed before the next call, until the SAT solver finds a model
    /// (which may improve the upper bound). Returns the number of cores, or
    /// `None` when a SAT call gave up.
    fn extract_cores(
        &mut self,
        relaxed: &[usize],
        user: &[Lit],
        best: &mut Option<(Assignment, u64)>,
    ) -> Result<Option<usize>, MaxSatError> {
        let mut out_set = vec![false; self.softs.len()];
        for &i in relaxed {
            out_set[i] = true;
        }
        let mut found = 0;
        loop {
            if self.terminate.requested() {
                return Ok(None);
            }
            let mut assumptions = user.to_vec();
            for (id, s) in self.softs.iter().enumerate() {
                if !out_set[id] && !assumptions.contains(&s.lit) {
                    assumptions.push(s.lit);
                }
            }
            self.sat_config(None);
            self.stats.sat_calls += 1;
            let out = self.sat.solve_assuming(&assumptions);
            match out.status {
                SatStatus::Sat => {
                    let m = out.model.expect("model");
                    let c = self.soft_cost(&m);
                    if c < self.bounds.upper.unwrap_or(u64::MAX) {
                        self.bounds.upper = Some(c);
                        *best = Some((m, c));
                    }
                    return Ok(Some(found));
                }
                SatStatus::UnsatUnderAssumptions => {
                    let failed = out.failed_assumptions.expect("failed assumptions");
                    for id in self.record_core(failed, user)? {
                        out_set[id] = true;
                    }
                    found += 1;
                }
                SatStatus::Unknown => return Ok(None),
                SatStatus::Unsat => {
                    return Err(MaxSatError::Internal(
                        "hard clauses became unsatisfiable after a model was found".into(),
                    ))
                }
            }
        }
    }

    fn optimum(&mut self, best: (Assignment, u64)) -> SolveResult {
        self.cached = Some(best.0.clone());
        self.finish(Verdict::OptimumFound, Some(best))
    }

    fn give_up(&mut self, best: Option<(Assignment, u64)>) -> SolveResult {
        if let Some((m, _)) = &best {
            self.cached = Some(m.clone());
        }
        self.finish(Verdict::Unknown, best)
    }

    /// The optimizer found no assignment of indicators. Since every core and
    /// seed constraint is implied by the hard clauses, this is only legitimate
    /// when the hard clauses themselves are unsatisfiable; that is checked
    /// rather than assumed.
    fn infeasible_optimizer(&mut self, user: &[Lit]) -> Result<SolveResult, MaxSatError> {
        self.sat_config(None);
        self.stats.sat_calls += 1;
        match self.sat.solve_assuming(user).status {
            SatStatus::Unsat => {
                self.unsat = true;
                Ok(self.finish(Verdict::Unsatisfiable, None))
            }
            SatStatus::UnsatUnderAssumptions => Ok(self.finish(Verdict::Unsatisfiable, None)),
            _ => Err(MaxSatError::Internal(
                "optimizer infeasible while the hard clauses are satisfiable".into(),
            )),
        }
    }

    /// Stores a core from failed assumptions and returns its soft ids.
    fn record_core(&mut self, failed: Vec<Lit>, user: &[Lit]) -> Result<Vec<usize>, MaxSatError> {
        let (mut cond, mut lits): (Vec<Lit>, Vec<Lit>) = failed.into_iter().partition(|l| user.contains(l));
        if lits.is_empty() {
            return Err(MaxSatError::Internal("core without soft clauses".into()));
        }
        if self.config.minimize_cores && lits.len() > 1 {
            lits = self.trim_core(lits, &cond);
        }
        let mut core: Vec<usize> = lits.iter().map(|l| self.soft_of_lit[l]).collect();
        core.sort_unstable();
        core.dedup();
        self.stats.cores += 1;
        if cond.is_empty() {
            self.hs
                .add_core(&core)
                .map_err(|e| MaxSatError::Internal(e.to_string()))?;
        } else {
            cond.sort_unstable_by_key(|l| l.code());
            cond.dedup();
            self.stats.conditional_cores += 1;
            self.cond_cores.push((cond, core.clone()));
        }
        Ok(core)
    }

    /// Drop-one trimming: tries removing each soft literal with a small
    /// conflict budget and keeps the smaller core whenever it is confirmed.
    fn trim_core(&mut self, mut lits: Vec<Lit>, cond: &[Lit]) -> Vec<Lit> {
        let mut i = 0;
        while i < lits.len() && lits.len() > 1 {
            let mut trial: Vec<Lit> = cond.to_vec();
            trial.extend(lits.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &l)| l));
            self.sat_config(Some(1000));
            self.stats.sat_calls += 1;
            let out = self.sat.solve_assuming(&trial);
            match out.status {
                SatStatus::UnsatUnderAssumptions => {
                    let failed = out.failed_assumptions.expect("failed assumptions");
                    let kept: Vec<Lit> = lits.iter().copied().filter(|l| failed.contains(l)).collect();
                    if kept.is_empty() {
                        break;
                    }
                    lits = kept;
                }
                _ => i += 1,
            }
        }
        self.sat_config(None);
        lits
    }
}

/// Solves a complete instance from scratch.
pub fn solve_instance(inst: &Instance, config: MaxSatConfig) -> Result<SolveResult, MaxSatError> {
    inst.total_soft_weight()?;
    let mut s = MaxSatSolver::new(config);
    load_instance(&mut s, inst)?;
    let r = s.solve()?;
    Ok(rescore(inst, r))
}

/// Feeds every clause of `inst` into `s`.
pub fn load_instance(s: &mut MaxSatSolver, inst: &Instance) -> Result<(), MaxSatError> {
    for v in 1..=inst.num_vars {
        s.map_var(Var::new(v));
    }
    for c in &inst.hard_cnf {
        s.add_hard_clause(c.lits());
    }
    for x in &inst.hard_xor {
        s.add_hard_xor(&x.vars().iter().map(|v| v.pos()).collect::<Vec<_>>(), x.rhs());
    }
    for sc in &inst.soft {
        s.add_soft_clause(sc.clause.lits(), sc.weight)?;
    }
    Ok(())
}

/// Recomputes the reported cost against the original soft clauses and cuts
/// the model down to the instance's variables.
pub fn rescore(inst: &Instance, r: SolveResult) -> SolveResult {
    match r.model {
        Some(m) => {
            let m = m.completed(inst.num_vars).truncated(inst.num_vars);
            let cost = inst.cost(&m).ok();
            SolveResult {
                verdict: r.verdict,
                cost: cost.or(r.cost),
                model: Some(m),
            }
        }
        None => r,
    }
}

#[cfg(test)]
mod tests;
