//! Incremental CDCL SAT solver with an attached XOR engine.
//!
//! Propagation runs the two-watched-literal CNF loop to fixpoint, then hands
//! control to the [`GaussEngine`]; if the engine enqueues literals, CNF
//! propagation resumes. Every path that propagates (clause addition, search,
//! probing under assumptions) goes through the same joint loop.
//!
//! The engine contract, from the solver's side:
//! - the engine runs only when the CNF queue is empty;
//! - after every backtrack the engine is told which literals were unassigned;
//! - on arrival at decision level 0 outside conflict analysis the XOR store is
//!   cleaned and the matrices are rebuilt; inside conflict analysis the
//!   rebuild is deferred until the learned clause has been added;
//! - after variable renumbering the XOR clauses are rewritten and rebuilt.

mod order;
mod trail;

use std::time::Instant;

use thiserror::Error;

pub use trail::{ClauseRef, Reason, Trail};

use crate::gauss::{GaussEngine, GaussStats, Lowered, TopLevelConflict, XorPropagation};
use crate::model::{Assignment, Lit, Var, XorClause};
use order::VarOrder;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub var_decay: f64,
    pub clause_decay: f64,
    /// Conflicts per Luby unit between restarts.
    pub restart_unit: u64,
    /// Conflict budget per solve call.
    pub conflict_limit: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            var_decay: 0.95,
            clause_decay: 0.999,
            restart_unit: 100,
            conflict_limit: None,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatStatus {
    Sat,
    Unsat,
    UnsatUnderAssumptions,
    /// Conflict or time budget exhausted.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatOutcome {
    pub status: SatStatus,
    pub model: Option<Assignment>,
    pub failed_assumptions: Option<Vec<Lit>>,
}

impl SatOutcome {
    fn plain(status: SatStatus) -> SatOutcome {
        SatOutcome {
            status,
            model: None,
            failed_assumptions: None,
        }
    }
}

/// Result of unit propagation under assumptions without search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Implicants {
    /// Every literal on the trail after propagation, with its reason clause
    /// (`None` for assumptions and level-0 facts).
    Consistent(Vec<(Lit, Option<Vec<Lit>>)>),
    /// Propagation hit a conflict; the clause is false under `trail`.
    Conflict { trail: Vec<Lit>, clause: Vec<Lit> },
    /// An assumption was already false; `reason` implies its negation.
    Contradicted { assumption: Lit, reason: Option<Vec<Lit>> },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenumberError {
    #[error("variable {0} is eliminated but not fixed at level 0")]
    UnfixedEliminated(Var),
    #[error("variables are mapped onto the same target {0}")]
    NotInjective(Var),
    #[error("mapping covers {got} variables, solver has {expected}")]
    WrongLength { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned_units: u64,
    /// Unit clauses learned from a conflict raised by the XOR engine.
    pub xor_learned_units: u64,
    pub level_zero_rebuilds: u64,
    pub reduced: u64,
}

#[derive(Debug, Clone)]
enum Conflict {
    Clause(ClauseRef),
    Lits(Vec<Lit>),
}

#[derive(Debug, Clone)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: ClauseRef,
    blocker: Lit,
}

enum SearchEnd {
    Sat,
    Unsat,
    Failed(Vec<Lit>),
    Restart,
    Budget,
}

#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    trail: Trail,
    gauss: GaussEngine,
    clauses: Vec<ClauseData>,
    free_slots: Vec<u32>,
    learnts: Vec<ClauseRef>,
    /// Indexed by literal code; holds clauses where the negated literal is
    /// one of the first two.
    watches: Vec<Vec<Watcher>>,
    qhead: usize,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    num_vars: usize,
    ok: bool,
    in_analysis: bool,
    cla_inc: f64,
    max_learnts: f64,
    simp_trail_len: usize,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SolverConfig::default())
    }
}

fn luby(mut x: u64) -> u64 {
    // Luby sequence 1 1 2 1 1 2 4 1 1 2 ...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

impl Solver {
    pub fn new(config: SolverConfig) -> Solver {
        let decay = config.var_decay;
        Solver {
            config,
            trail: Trail::default(),
            gauss: GaussEngine::new(),
            clauses: Vec::new(),
            free_slots: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            qhead: 0,
            order: VarOrder::new(decay),
            phase: Vec::new(),
            seen: Vec::new(),
            num_vars: 0,
            ok: true,
            in_analysis: false,
            cla_inc: 1.0,
            max_learnts: 2000.0,
            simp_trail_len: 0,
            stats: SolverStats::default(),
        }
    }

    pub fn config_mut(&mut self) -> &mut SolverConfig {
        &mut self.config
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    pub fn gauss_stats(&self) -> GaussStats {
        self.gauss.stats()
    }

    pub fn gauss(&self) -> &GaussEngine {
        &self.gauss
    }

    /// False once the clause set is known to be unsatisfiable.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn decision_level(&self) -> u32 {
        self.trail.decision_level()
    }

    pub fn new_var(&mut self) -> Var {
        self.ensure_vars(self.num_vars + 1);
        Var::from_index(self.num_vars - 1)
    }

    pub fn ensure_vars(&mut self, n: usize) {
        if n <= self.num_vars {
            return;
        }
        self.num_vars = n;
        self.trail.grow(n);
        self.gauss.grow(n);
        self.order.grow(n);
        self.phase.resize(n, false);
        self.seen.resize(n, false);
        self.watches.resize_with(2 * n, Vec::new);
    }

    /// Value of a literal at level 0, if fixed there.
    pub fn fixed_value(&self, l: Lit) -> Option<bool> {
        if l.var().index() >= self.num_vars || self.trail.level(l.var()) != 0 {
            return None;
        }
        self.trail.lit_value(l)
    }

    /// Adds a clause between solve calls. Literals false at level 0 are
    /// dropped; a resulting unit is propagated right away, XOR engine
    /// included.
    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), TopLevelConflict> {
        if !self.ok {
            return Err(TopLevelConflict);
        }
        self.backtrack(0);
        if !self.ok {
            return Err(TopLevelConflict);
        }
        if let Some(max) = lits.iter().map(|l| l.var().index() + 1).max() {
            self.ensure_vars(max);
        }
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            if c.contains(&!l) {
                return Ok(());
            }
            match self.trail.lit_value(l) {
                Some(true) => return Ok(()),
                Some(false) => {}
                None if !c.contains(&l) => c.push(l),
                None => {}
            }
        }
        self.add_simplified(c, false)
    }

    fn add_simplified(&mut self, c: Vec<Lit>, learnt: bool) -> Result<(), TopLevelConflict> {
        match c.len() {
            0 => {
                self.ok = false;
                Err(TopLevelConflict)
            }
            1 => {
                self.trail.assign(c[0], Reason::None);
                if self.propagate().is_some() {
                    self.ok = false;
                    return Err(TopLevelConflict);
                }
                Ok(())
            }
            _ => {
                self.attach(c, learnt, 0);
                Ok(())
            }
        }
    }

    /// Adds a hard XOR clause between solve calls.
    pub fn add_xor(&mut self, lits: &[Lit], rhs: bool) -> Result<(), TopLevelConflict> {
        if !self.ok {
            return Err(TopLevelConflict);
        }
        self.backtrack(0);
        if !self.ok {
            return Err(TopLevelConflict);
        }
        if let Some(max) = lits.iter().map(|l| l.var().index() + 1).max() {
            self.ensure_vars(max);
        }
        let x = XorClause::normalize(lits.iter().copied(), rhs);
        let lowered = match self.gauss.attach(&x, &self.trail) {
            Ok(l) => l,
            Err(e) => {
                self.ok = false;
                return Err(e);
            }
        };
        match lowered {
            Lowered::Ignored | Lowered::Stored => Ok(()),
            Lowered::Unit(l) => self.add_simplified(vec![l], false),
            Lowered::Binary([a, b]) => {
                self.attach(a.lits().to_vec(), false, 0);
                self.attach(b.lits().to_vec(), false, 0);
                Ok(())
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool, lbd: u32) -> ClauseRef {
        debug_assert!(lits.len() >= 2);
        let data = ClauseData {
            lits,
            learnt,
            deleted: false,
            lbd,
            activity: 0.0,
        };
        let cref = match self.free_slots.pop() {
            Some(i) => {
                self.clauses[i as usize] = data;
                ClauseRef(i)
            }
            None => {
                self.clauses.push(data);
                ClauseRef(self.clauses.len() as u32 - 1)
            }
        };
        let c = &self.clauses[cref.0 as usize].lits;
        let (a, b) = (c[0], c[1]);
        self.watches[(!a).code()].push(Watcher { cref, blocker: b });
        self.watches[(!b).code()].push(Watcher { cref, blocker: a });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    fn budget_exceeded(&self, conflicts_at_start: u64) -> bool {
        if let Some(limit) = self.config.conflict_limit {
            if self.stats.conflicts - conflicts_at_start >= limit {
                return true;
            }
        }
        matches!(self.config.deadline, Some(d) if Instant::now() >= d)
    }

    pub fn solve(&mut self) -> SatOutcome {
        self.solve_assuming(&[])
    }

    /// Solves under assumptions, each of which holds for this call only.
    pub fn solve_assuming(&mut self, assumptions: &[Lit]) -> SatOutcome {
        self.stats.solves += 1;
        if !self.ok {
            return SatOutcome::plain(SatStatus::Unsat);
        }
        self.backtrack(0);
        if let Some(max) = assumptions.iter().map(|l| l.var().index() + 1).max() {
            self.ensure_vars(max);
        }
        if !self.ok || self.propagate().is_some() {
            self.ok = false;
            return SatOutcome::plain(SatStatus::Unsat);
        }
        let start = self.stats.conflicts;
        let mut restarts = 0u64;
        loop {
            let budget = luby(restarts) * self.config.restart_unit;
            match self.search(budget, assumptions, start) {
                SearchEnd::Sat => {
                    let model = Assignment::from_bools(
                        (0..self.num_vars).map(|i| self.trail.value(Var::from_index(i)).unwrap_or(false)),
                    );
                    self.backtrack(0);
                    return SatOutcome {
                        status: SatStatus::Sat,
                        model: Some(model),
                        failed_assumptions: None,
                    };
                }
                SearchEnd::Unsat => {
                    self.ok = false;
                    return SatOutcome::plain(SatStatus::Unsat);
                }
                SearchEnd::Failed(core) => {
                    self.backtrack(0);
                    return SatOutcome {
                        status: SatStatus::UnsatUnderAssumptions,
                        model: None,
                        failed_assumptions: Some(core),
                    };
                }
                SearchEnd::Restart => {
                    restarts += 1;
                    self.stats.restarts += 1;
                    if !self.ok {
                        return SatOutcome::plain(SatStatus::Unsat);
                    }
                }
                SearchEnd::Budget => {
                    self.backtrack(0);
                    return SatOutcome::plain(SatStatus::Unknown);
                }
            }
        }
    }

    fn search(&mut self, nof_conflicts: u64, assumptions: &[Lit], start: u64) -> SearchEnd {
        let mut conflicts_here = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.trail.decision_level() == 0 || !self.analyze_and_learn(confl) {
                    return SearchEnd::Unsat;
                }
                self.order.decay();
                self.cla_inc /= self.config.clause_decay;
                continue;
            }
            if self.budget_exceeded(start) {
                return SearchEnd::Budget;
            }
            if conflicts_here >= nof_conflicts {
                self.backtrack(0);
                return SearchEnd::Restart;
            }
            if self.trail.decision_level() == 0 && self.trail.len() > self.simp_trail_len {
                self.simplify();
            }
            if self.learnts.len() as f64 >= self.max_learnts + self.trail.len() as f64 {
                self.reduce_db();
            }
            let mut next = None;
            while (self.trail.decision_level() as usize) < assumptions.len() {
                let p = assumptions[self.trail.decision_level() as usize];
                match self.trail.lit_value(p) {
                    Some(true) => self.trail.new_level(),
                    Some(false) => return SearchEnd::Failed(self.analyze_final(p)),
                    None => {
                        next = Some(p);
                        break;
                    }
                }
            }
            let next = match next {
                Some(p) => p,
                None => {
                    self.stats.decisions += 1;
                    match self.pick_branch() {
                        Some(l) => l,
                        None => return SearchEnd::Sat,
                    }
                }
            };
            self.trail.new_level();
            self.trail.assign(next, Reason::None);
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop() {
            let var = Var::from_index(v as usize);
            if self.trail.value(var).is_none() {
                return Some(Lit::new(var, self.phase[v as usize]));
            }
        }
        None
    }

    /// Joint CNF + XOR propagation to fixpoint.
    fn propagate(&mut self) -> Option<Conflict> {
        loop {
            if let Some(c) = self.propagate_cnf() {
                return Some(c);
            }
            if self.gauss.is_stale() {
                debug_assert_eq!(self.trail.decision_level(), 0);
                if self.rebuild_xor().is_err() {
                    return Some(Conflict::Lits(Vec::new()));
                }
                continue;
            }
            match self.gauss.propagate(&mut self.trail) {
                XorPropagation::Fixpoint => return None,
                XorPropagation::Enqueued => continue,
                XorPropagation::Conflict(lits) => return Some(Conflict::Lits(lits)),
            }
        }
    }

    fn propagate_cnf(&mut self) -> Option<Conflict> {
        while self.qhead < self.trail.len() {
            let p = self.trail.lits()[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.trail.lit_value(w.blocker) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cd = &mut self.clauses[w.cref.0 as usize];
                debug_assert!(!cd.deleted);
                let c = &mut cd.lits;
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                let nw = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && self.trail.lit_value(first) == Some(true) {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    if self.trail.lit_value(c[k]) != Some(false) {
                        c.swap(1, k);
                        self.watches[(!c[1]).code()].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.trail.lit_value(first) == Some(false) {
                    conflict = Some(Conflict::Clause(w.cref));
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                    self.qhead = self.trail.len();
                } else {
                    self.trail.assign(first, Reason::Clause(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// Cleans the XOR store against level 0 and rebuilds every matrix.
    fn rebuild_xor(&mut self) -> Result<(), TopLevelConflict> {
        assert!(!self.in_analysis, "matrix rebuild during conflict analysis");
        debug_assert_eq!(self.trail.decision_level(), 0);
        let lowered = self.gauss.clean(&self.trail)?;
        for l in lowered {
            match l {
                Lowered::Unit(lit) => match self.trail.lit_value(lit) {
                    Some(true) => {}
                    Some(false) => return Err(TopLevelConflict),
                    None => self.trail.assign(lit, Reason::None),
                },
                Lowered::Binary([a, b]) => {
                    self.attach(a.lits().to_vec(), false, 0);
                    self.attach(b.lits().to_vec(), false, 0);
                }
                Lowered::Ignored | Lowered::Stored => {}
            }
        }
        self.gauss.init_matrices(&self.trail)
    }

    fn backtrack(&mut self, level: u32) {
        if self.trail.decision_level() <= level {
            return;
        }
        let popped = self.trail.backtrack(level);
        for l in &popped {
            let v = l.var().index();
            self.phase[v] = l.is_positive();
            self.order.insert(v as u32);
        }
        self.qhead = self.qhead.min(self.trail.len());
        self.gauss.on_backtrack(&popped, self.trail.len());
        if level == 0 {
            if self.in_analysis {
                self.gauss.defer_rebuild();
            } else {
                self.stats.level_zero_rebuilds += 1;
                if self.rebuild_xor().is_err() {
                    self.ok = false;
                }
            }
        }
    }

    fn clause_lits(&self, cr: ClauseRef) -> &[Lit] {
        &self.clauses[cr.0 as usize].lits
    }

    fn bump_clause(&mut self, cr: ClauseRef) {
        let cd = &mut self.clauses[cr.0 as usize];
        if !cd.learnt {
            return;
        }
        cd.activity += self.cla_inc;
        if cd.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l.0 as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// Reason of an assigned variable as a clause with the implied literal
    /// first.
    fn reason_clause(&self, v: Var) -> Option<Vec<Lit>> {
        self.trail.reason_lits(v, |cr| self.clause_lits(cr).to_vec())
    }

    /// First-UIP analysis, backjump and learning. Returns false when the
    /// conflict turns out to be at level 0.
    fn analyze_and_learn(&mut self, confl: Conflict) -> bool {
        self.in_analysis = true;
        let from_xor = matches!(confl, Conflict::Lits(_));
        let mut lits = match confl {
            Conflict::Clause(cr) => {
                self.bump_clause(cr);
                self.clause_lits(cr).to_vec()
            }
            Conflict::Lits(l) => l,
        };
        let max_level = lits.iter().map(|l| self.trail.level(l.var())).max().unwrap_or(0);
        if max_level == 0 {
            self.in_analysis = false;
            return false;
        }
        if max_level < self.trail.decision_level() {
            // the conflict was detected late; analyze it where it arose
            self.backtrack(max_level);
        }
        let level = self.trail.decision_level();
        let (learnt, bj) = self.analyze(&mut lits, level);
        self.backtrack(bj);
        if learnt.len() == 1 {
            self.stats.learned_units += 1;
            if from_xor {
                self.stats.xor_learned_units += 1;
            }
            self.trail.assign(learnt[0], Reason::None);
        } else {
            let lbd = self.lbd(&learnt);
            let asserting = learnt[0];
            let cr = self.attach(learnt, true, lbd);
            self.bump_clause(cr);
            self.trail.assign(asserting, Reason::Clause(cr));
        }
        self.in_analysis = false;
        if self.gauss.take_deferred() {
            self.stats.level_zero_rebuilds += 1;
            if self.rebuild_xor().is_err() {
                self.ok = false;
                return false;
            }
        }
        true
    }

    fn analyze(&mut self, conflict: &mut Vec<Lit>, level: u32) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit::from_code(0)];
        let mut path_c = 0u32;
        let mut index = self.trail.len();
        let mut reason: Vec<Lit> = std::mem::take(conflict);
        let mut skip_first = false;
        let p = loop {
            for (k, &q) in reason.iter().enumerate() {
                if skip_first && k == 0 {
                    continue;
                }
                let v = q.var();
                if !self.seen[v.index()] && self.trail.level(v) > 0 {
                    self.seen[v.index()] = true;
                    self.order.bump(v.index() as u32);
                    if self.trail.level(v) >= level {
                        path_c += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail.lits()[index].var().index()] {
                    break;
                }
            }
            let p = self.trail.lits()[index];
            self.seen[p.var().index()] = false;
            path_c -= 1;
            if path_c == 0 {
                break p;
            }
            if let Reason::Clause(cr) = self.trail.reason(p.var()) {
                self.bump_clause(cr);
            }
            reason = self.reason_clause(p.var()).expect("implied literal has a reason");
            skip_first = true;
        };
        learnt[0] = !p;

        // drop literals whose reason is subsumed by the rest of the clause
        let mut out = vec![learnt[0]];
        for &q in &learnt[1..] {
            let redundant = match self.reason_clause(q.var()) {
                None => false,
                Some(r) => r[1..]
                    .iter()
                    .all(|x| self.seen[x.var().index()] || self.trail.level(x.var()) == 0),
            };
            if !redundant {
                out.push(q);
            }
        }
        for &q in &learnt[1..] {
            self.seen[q.var().index()] = false;
        }

        let bj = if out.len() == 1 {
            0
        } else {
            let (mut best, mut best_level) = (1, self.trail.level(out[1].var()));
            for (k, q) in out.iter().enumerate().skip(2) {
                let lv = self.trail.level(q.var());
                if lv > best_level {
                    best = k;
                    best_level = lv;
                }
            }
            out.swap(1, best);
            best_level
        };
        (out, bj)
    }

    fn lbd(&self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|l| self.trail.level(l.var())).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    /// The subset of assumptions responsible for `p` being false.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        let mut out = vec![p];
        if self.trail.level(p.var()) == 0 {
            return out;
        }
        self.seen[p.var().index()] = true;
        let start = self.trail.level_start(1);
        for i in (start..self.trail.len()).rev() {
            let x = self.trail.lits()[i];
            let v = x.var();
            if !self.seen[v.index()] {
                continue;
            }
            match self.reason_clause(v) {
                None => {
                    if self.trail.level(v) > 0 && !out.contains(&x) {
                        out.push(x);
                    }
                }
                Some(r) => {
                    for q in &r[1..] {
                        if self.trail.level(q.var()) > 0 {
                            self.seen[q.var().index()] = true;
                        }
                    }
                }
            }
            self.seen[v.index()] = false;
        }
        self.seen[p.var().index()] = false;
        out
    }

    fn is_locked(&self, cr: ClauseRef) -> bool {
        let first = self.clauses[cr.0 as usize].lits[0];
        self.trail.lit_value(first) == Some(true) && self.trail.reason(first.var()) == Reason::Clause(cr)
    }

    fn remove_clause(&mut self, cr: ClauseRef) {
        let cd = &mut self.clauses[cr.0 as usize];
        cd.deleted = true;
        cd.lits = Vec::new();
        self.free_slots.push(cr.0);
    }

    fn sweep_watches(&mut self) {
        for ws in &mut self.watches {
            ws.retain(|w| !self.clauses[w.cref.0 as usize].deleted);
        }
        // slots become reusable only once no watcher points at them
        for &i in &self.free_slots {
            self.clauses[i as usize].deleted = false;
        }
    }

    fn reduce_db(&mut self) {
        self.stats.reduced += 1;
        let mut cands: Vec<ClauseRef> = self.learnts.clone();
        cands.sort_by(|a, b| {
            let (ca, cb) = (&self.clauses[a.0 as usize], &self.clauses[b.0 as usize]);
            ca.activity
                .partial_cmp(&cb.activity)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let target = cands.len() / 2;
        let mut removed = 0;
        let mut keep = Vec::with_capacity(cands.len());
        for cr in cands {
            let lbd = self.clauses[cr.0 as usize].lbd;
            if removed < target && lbd > 2 && !self.is_locked(cr) {
                self.remove_clause(cr);
                removed += 1;
            } else {
                keep.push(cr);
            }
        }
        self.learnts = keep;
        self.sweep_watches();
        self.max_learnts *= 1.1;
    }

    /// Removes clauses satisfied at level 0.
    fn simplify(&mut self) {
        debug_assert_eq!(self.trail.decision_level(), 0);
        self.simp_trail_len = self.trail.len();
        self.trail.clear_level_zero_reasons();
        let mut any = false;
        for i in 0..self.clauses.len() {
            let cd = &self.clauses[i];
            if cd.lits.is_empty() {
                continue;
            }
            if cd.lits.iter().any(|&l| self.trail.lit_value(l) == Some(true)) {
                self.remove_clause(ClauseRef(i as u32));
                any = true;
            }
        }
        if any {
            self.learnts.retain(|cr| !self.clauses[cr.0 as usize].lits.is_empty());
            self.sweep_watches();
        }
    }

    /// Unit propagation under assumptions, without search. Each assumption
    /// opens its own decision level. The solver is back at level 0
    /// afterwards.
    pub fn propagate_assumptions(&mut self, assumptions: &[Lit]) -> Implicants {
        if let Some(max) = assumptions.iter().map(|l| l.var().index() + 1).max() {
            self.ensure_vars(max);
        }
        self.backtrack(0);
        if !self.ok || self.propagate().is_some() {
            self.ok = false;
            return Implicants::Conflict {
                trail: Vec::new(),
                clause: Vec::new(),
            };
        }
        let mut result = None;
        for &a in assumptions {
            match self.trail.lit_value(a) {
                Some(true) => continue,
                Some(false) => {
                    result = Some(Implicants::Contradicted {
                        assumption: a,
                        reason: self.reason_clause(a.var()),
                    });
                    break;
                }
                None => {}
            }
            self.trail.new_level();
            self.trail.assign(a, Reason::None);
            if let Some(confl) = self.propagate() {
                let clause = match confl {
                    Conflict::Clause(cr) => self.clause_lits(cr).to_vec(),
                    Conflict::Lits(l) => l,
                };
                result = Some(Implicants::Conflict {
                    trail: self.trail.lits().to_vec(),
                    clause,
                });
                break;
            }
        }
        let result = result.unwrap_or_else(|| {
            Implicants::Consistent(
                self.trail
                    .lits()
                    .iter()
                    .map(|&l| (l, self.reason_clause(l.var())))
                    .collect(),
            )
        });
        self.backtrack(0);
        result
    }

    /// Renames variables. `mapping[i]` is the new variable of variable
    /// `i + 1`, or `None` if it is eliminated; eliminated variables must be
    /// fixed at level 0 and the mapping must be injective on survivors.
    pub fn renumber_variables(&mut self, mapping: &[Option<Var>]) -> Result<(), RenumberError> {
        if mapping.len() != self.num_vars {
            return Err(RenumberError::WrongLength {
                got: mapping.len(),
                expected: self.num_vars,
            });
        }
        self.backtrack(0);
        if self.ok && self.propagate().is_some() {
            self.ok = false;
        }
        if !self.ok {
            return Ok(());
        }
        let mut taken = vec![false; mapping.iter().flatten().map(|v| v.index() + 1).max().unwrap_or(0)];
        for (i, m) in mapping.iter().enumerate() {
            let v = Var::from_index(i);
            match m {
                None if self.trail.value(v).is_none() => return Err(RenumberError::UnfixedEliminated(v)),
                None => {}
                Some(t) if std::mem::replace(&mut taken[t.index()], true) => {
                    return Err(RenumberError::NotInjective(*t));
                }
                Some(_) => {}
            }
        }
        // fold level-0 facts into the XOR clauses before renaming them
        self.stats.level_zero_rebuilds += 1;
        if self.rebuild_xor().is_err() || self.propagate().is_some() {
            self.ok = false;
            return Ok(());
        }

        let map_lit = |l: Lit| mapping[l.var().index()].map(|v| Lit::new(v, l.is_positive()));
        let units: Vec<Lit> = self.trail.lits().iter().filter_map(|&l| map_lit(l)).collect();
        let mut clauses: Vec<(Vec<Lit>, bool)> = Vec::new();
        for cd in &self.clauses {
            if cd.lits.is_empty() || cd.lits.iter().any(|&l| self.trail.lit_value(l) == Some(true)) {
                continue;
            }
            let lits: Vec<Lit> = cd
                .lits
                .iter()
                .filter(|&&l| self.trail.lit_value(l).is_none())
                .map(|&l| map_lit(l).expect("unassigned variables survive"))
                .collect();
            clauses.push((lits, cd.learnt));
        }

        let mut gauss = std::mem::take(&mut self.gauss);
        gauss.remap(mapping);
        let stats = self.stats;
        let phases: Vec<(usize, bool)> = mapping
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.map(|t| (t.index(), self.phase[i])))
            .collect();
        let mut fresh = Solver::new(self.config.clone());
        fresh.ensure_vars(taken.len());
        fresh.gauss = gauss;
        fresh.gauss.grow(taken.len());
        for (i, b) in phases {
            fresh.phase[i] = b;
        }
        fresh.stats = stats;
        for u in units {
            if fresh.trail.lit_value(u).is_none() {
                fresh.trail.assign(u, Reason::None);
            }
        }
        for (lits, learnt) in clauses {
            if lits.len() >= 2 {
                let lbd = if learnt { lits.len() as u32 } else { 0 };
                fresh.attach(lits, learnt, lbd);
            } else if fresh.add_simplified(lits, learnt).is_err() {
                break;
            }
        }
        *self = fresh;
        if self.ok && self.propagate().is_some() {
            self.ok = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
