use crate::model::{Lit, Var};

/// Index of a clause in the solver's clause arena. Indices stay valid while
/// the arena grows, so a reference taken during attachment survives any
/// learned clause added behind it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClauseRef(pub(crate) u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    /// Decisions, assumptions and level-0 facts.
    None,
    Clause(ClauseRef),
    /// Index into the trail's XOR reason list.
    Xor(u32),
}

/// Assignment stack with per-variable level and reason.
#[derive(Debug, Default, Clone)]
pub struct Trail {
    values: Vec<Option<bool>>,
    levels: Vec<u32>,
    reasons: Vec<Reason>,
    lits: Vec<Lit>,
    lim: Vec<usize>,
    /// (trail position, row support) for XOR propagations, in trail order.
    xor_reasons: Vec<(usize, Vec<Var>)>,
}

impl Trail {
    pub(crate) fn grow(&mut self, num_vars: usize) {
        if self.values.len() < num_vars {
            self.values.resize(num_vars, None);
            self.levels.resize(num_vars, 0);
            self.reasons.resize(num_vars, Reason::None);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn value(&self, v: Var) -> Option<bool> {
        self.values[v.index()]
    }

    #[inline]
    pub fn lit_value(&self, l: Lit) -> Option<bool> {
        self.values[l.var().index()].map(|b| b == l.is_positive())
    }

    #[inline]
    pub fn level(&self, v: Var) -> u32 {
        self.levels[v.index()]
    }

    #[inline]
    pub fn reason(&self, v: Var) -> Reason {
        self.reasons[v.index()]
    }

    pub fn decision_level(&self) -> u32 {
        self.lim.len() as u32
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// Trail position where `level` starts.
    pub fn level_start(&self, level: u32) -> usize {
        if level == 0 {
            0
        } else {
            self.lim[level as usize - 1]
        }
    }

    pub(crate) fn new_level(&mut self) {
        self.lim.push(self.lits.len());
    }

    pub(crate) fn assign(&mut self, lit: Lit, reason: Reason) {
        let v = lit.var().index();
        debug_assert!(self.values[v].is_none(), "variable {} assigned twice", lit.var());
        self.values[v] = Some(lit.is_positive());
        self.levels[v] = self.lim.len() as u32;
        self.reasons[v] = reason;
        self.lits.push(lit);
    }

    /// Assigns `lit` as implied by an XOR row over `support` (which contains
    /// `lit`'s variable). The row is rendered into a clause only when conflict
    /// analysis asks for it.
    pub fn enqueue_xor(&mut self, lit: Lit, support: Vec<Var>) {
        let idx = self.xor_reasons.len() as u32;
        self.xor_reasons.push((self.lits.len(), support));
        self.assign(lit, Reason::Xor(idx));
    }

    /// Renders the reason of an assigned variable as a clause whose first
    /// literal is the implied one and whose others are all false.
    pub fn reason_lits(&self, v: Var, clause_lits: impl Fn(ClauseRef) -> Vec<Lit>) -> Option<Vec<Lit>> {
        match self.reason(v) {
            Reason::None => None,
            Reason::Clause(cr) => Some(clause_lits(cr)),
            Reason::Xor(idx) => Some(self.render_xor_reason(v, &self.xor_reasons[idx as usize].1)),
        }
    }

    pub(crate) fn render_xor_reason(&self, implied: Var, support: &[Var]) -> Vec<Lit> {
        let mut out = Vec::with_capacity(support.len());
        out.push(Lit::new(implied, self.value(implied).expect("implied var is assigned")));
        for &u in support {
            if u != implied {
                let val = self.value(u).expect("reason var is assigned");
                out.push(Lit::new(u, !val));
            }
        }
        out
    }

    /// Renders a fully assigned, violated row as a falsified clause.
    pub(crate) fn render_xor_conflict(&self, support: &[Var]) -> Vec<Lit> {
        support
            .iter()
            .map(|&u| Lit::new(u, !self.value(u).expect("conflict var is assigned")))
            .collect()
    }

    /// Pops everything above `level`, returning the unassigned literals in
    /// reverse trail order.
    pub(crate) fn backtrack(&mut self, level: u32) -> Vec<Lit> {
        if self.decision_level() <= level {
            return Vec::new();
        }
        let start = self.lim[level as usize];
        let popped: Vec<Lit> = self.lits.drain(start..).rev().collect();
        for l in &popped {
            let v = l.var().index();
            self.values[v] = None;
            self.reasons[v] = Reason::None;
        }
        self.lim.truncate(level as usize);
        while self.xor_reasons.last().is_some_and(|(pos, _)| *pos >= start) {
            self.xor_reasons.pop();
        }
        popped
    }

    /// Forgets reasons of level-0 literals; used when clauses they point to are
    /// removed.
    pub(crate) fn clear_level_zero_reasons(&mut self) {
        debug_assert!(self.lim.is_empty());
        for l in &self.lits {
            self.reasons[l.var().index()] = Reason::None;
        }
        self.xor_reasons.clear();
    }
}
