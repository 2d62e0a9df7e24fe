//! XOR-clause engine.
//!
//! Short XOR clauses never reach the matrices as stored constraints: length 0
//! is a marker, length 1 is a unit, and length 2 becomes two binary CNF
//! clauses. Clauses of length three or more live in the [`XorStore`] and are
//! partitioned into connected components, one [`GaussMatrix`] each.
//!
//! Each matrix row keeps a basic column and one watched non-basic column.
//! Whenever a row's basic variable is assigned while the row still has an
//! unassigned variable, the engine pivots onto that variable, so every row
//! either has an unassigned basic variable or is fully assigned. Together
//! with the reduced form this makes propagation complete for the linear
//! system: a variable forced by the rows and the trail is always propagated.
//! Binary XOR clauses are kept as auxiliary matrix rows (besides their CNF
//! form) so that completeness covers the whole system.

mod matrix;

use matrix::NONE;
pub use matrix::{GaussMatrix, Inconsistent};

use crate::cdcl::Trail;
use crate::model::{Clause, Lit, Var, XorClause};

/// The XOR system is unsatisfiable together with the level-0 assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopLevelConflict;

/// How an attached XOR clause was dispatched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lowered {
    /// Tautology, nothing to do.
    Ignored,
    Unit(Lit),
    /// The two equivalent binary CNF clauses.
    Binary([Clause; 2]),
    Stored,
}

/// Outcome of one XOR propagation round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XorPropagation {
    Fixpoint,
    /// New literals were put on the trail.
    Enqueued,
    /// A fully assigned row is violated; the clause is false under the trail.
    Conflict(Vec<Lit>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GaussStats {
    pub rebuilds: u64,
    pub deferred_rebuilds: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub pivots: u64,
}

/// Stored XOR clauses. Invariant: every clause has length at least three.
#[derive(Debug, Clone, Default)]
pub struct XorStore {
    clauses: Vec<XorClause>,
}

impl XorStore {
    pub fn clauses(&self) -> &[XorClause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    fn push(&mut self, x: XorClause) {
        assert!(x.len() >= 3, "XOR store only holds clauses of length >= 3");
        self.clauses.push(x);
    }
}

#[derive(Debug, Clone, Default)]
pub struct GaussEngine {
    store: XorStore,
    aux: Vec<XorClause>,
    matrices: Vec<GaussMatrix>,
    /// Per variable: (matrix, column).
    var_loc: Vec<Option<(u32, u32)>>,
    /// Per variable: rows that may watch it. Entries go stale lazily.
    watches: Vec<Vec<(u32, u32)>>,
    qhead: usize,
    worklist: Vec<(u32, u32)>,
    dirty: Vec<bool>,
    dirty_list: Vec<u32>,
    stale: bool,
    deferred: bool,
    stats: GaussStats,
}

/// Folds every variable fixed at level 0 into the right-hand side.
fn fold_fixed(x: &XorClause, trail: &Trail) -> XorClause {
    let mut rhs = x.rhs();
    let mut vars = Vec::with_capacity(x.len());
    for &v in x.vars() {
        match trail.value(v) {
            Some(b) if trail.level(v) == 0 => rhs ^= b,
            _ => vars.push(v),
        }
    }
    XorClause::normalize(vars.into_iter().map(Var::pos), rhs)
}

impl GaussEngine {
    pub fn new() -> GaussEngine {
        GaussEngine::default()
    }

    pub(crate) fn grow(&mut self, num_vars: usize) {
        if self.var_loc.len() < num_vars {
            self.var_loc.resize(num_vars, None);
            self.watches.resize_with(num_vars, Vec::new);
        }
    }

    pub fn store(&self) -> &XorStore {
        &self.store
    }

    pub fn matrices(&self) -> &[GaussMatrix] {
        &self.matrices
    }

    pub fn stats(&self) -> GaussStats {
        self.stats
    }

    /// Matrices must be rebuilt before the next propagation.
    pub fn is_stale(&self) -> bool {
        self.stale
    }

    pub fn has_deferred_rebuild(&self) -> bool {
        self.deferred
    }

    /// Level-0 arrival while conflict analysis is running: remember to
    /// rebuild once it finishes.
    pub(crate) fn defer_rebuild(&mut self) {
        if !self.deferred {
            self.deferred = true;
            self.stats.deferred_rebuilds += 1;
        }
    }

    pub(crate) fn take_deferred(&mut self) -> bool {
        std::mem::take(&mut self.deferred)
    }

    /// Dispatches a normalized XOR clause by its length after folding the
    /// level-0 assignment.
    pub(crate) fn attach(&mut self, x: &XorClause, trail: &Trail) -> Result<Lowered, TopLevelConflict> {
        let x = fold_fixed(x, trail);
        self.dispatch(x)
    }

    fn dispatch(&mut self, x: XorClause) -> Result<Lowered, TopLevelConflict> {
        match x.len() {
            0 if x.rhs() => Err(TopLevelConflict),
            0 => Ok(Lowered::Ignored),
            1 => Ok(Lowered::Unit(Lit::new(x.vars()[0], x.rhs()))),
            2 => {
                let cnf = x.to_cnf().expect("non-empty");
                self.aux.push(x);
                self.stale = true;
                Ok(Lowered::Binary([cnf[0].clone(), cnf[1].clone()]))
            }
            _ => {
                self.store.push(x);
                self.stale = true;
                Ok(Lowered::Stored)
            }
        }
    }

    /// Removes level-0 assigned variables from every stored clause. Clauses
    /// that shrink below length three are lowered again; their CNF form is
    /// returned for the solver to attach.
    pub(crate) fn clean(&mut self, trail: &Trail) -> Result<Vec<Lowered>, TopLevelConflict> {
        let old = std::mem::take(&mut self.store.clauses);
        let mut lowered = Vec::new();
        for x in &old {
            let folded = fold_fixed(x, trail);
            if folded.len() >= 3 {
                self.store.push(folded);
            } else {
                match self.dispatch(folded)? {
                    Lowered::Ignored => {}
                    l => lowered.push(l),
                }
            }
        }
        // binary rows are already present as CNF; shorter ones are implied
        // by that CNF under the level-0 assignment
        let aux = std::mem::take(&mut self.aux);
        self.aux = aux
            .iter()
            .map(|x| fold_fixed(x, trail))
            .filter(|x| x.len() == 2)
            .collect();
        self.stale = true;
        Ok(lowered)
    }

    /// Partitions the stored system into components and reduces each one.
    /// Expects a clean store (no level-0 assigned variables).
    pub(crate) fn init_matrices(&mut self, trail: &Trail) -> Result<(), TopLevelConflict> {
        self.stats.rebuilds += 1;
        self.stale = false;
        self.matrices.clear();
        self.worklist.clear();
        self.dirty.clear();
        self.dirty_list.clear();
        for w in &mut self.watches {
            w.clear();
        }
        for l in &mut self.var_loc {
            *l = None;
        }
        self.qhead = trail.len();

        let rows: Vec<&XorClause> = self.store.clauses.iter().chain(self.aux.iter()).collect();
        if rows.is_empty() {
            return Ok(());
        }
        let n = self.var_loc.len();
        let mut uf = UnionFind::new(n);
        for x in &rows {
            let first = x.vars()[0].index();
            for v in &x.vars()[1..] {
                uf.union(first, v.index());
            }
        }
        // group rows by component root, in order of first appearance
        let mut comp_of_root: Vec<Option<usize>> = vec![None; n];
        let mut comps: Vec<Vec<&XorClause>> = Vec::new();
        for x in &rows {
            let root = uf.find(x.vars()[0].index());
            let id = *comp_of_root[root].get_or_insert_with(|| {
                comps.push(Vec::new());
                comps.len() - 1
            });
            comps[id].push(x);
        }
        for comp in comps {
            let mut cols: Vec<Var> = comp.iter().flat_map(|x| x.vars().iter().copied()).collect();
            cols.sort_unstable();
            cols.dedup();
            let m_idx = self.matrices.len() as u32;
            for (c, v) in cols.iter().enumerate() {
                self.var_loc[v.index()] = Some((m_idx, c as u32));
            }
            let col_rows: Vec<(Vec<u32>, bool)> = comp
                .iter()
                .map(|x| {
                    let cs = x
                        .vars()
                        .iter()
                        .map(|v| self.var_loc[v.index()].expect("located").1)
                        .collect();
                    (cs, x.rhs())
                })
                .collect();
            let m = GaussMatrix::build(cols, &col_rows).map_err(|_| TopLevelConflict)?;
            for r in 0..m.num_rows() {
                self.watches[m.cols[m.basic[r] as usize].index()].push((m_idx, r as u32));
                if m.watch[r] != NONE {
                    self.watches[m.cols[m.watch[r] as usize].index()].push((m_idx, r as u32));
                }
            }
            self.matrices.push(m);
            self.dirty.push(true);
            self.dirty_list.push(m_idx);
        }
        Ok(())
    }

    fn mark_dirty(&mut self, m: u32) {
        if !self.dirty[m as usize] {
            self.dirty[m as usize] = true;
            self.dirty_list.push(m);
        }
    }

    /// Called after the trail was cut back; `popped` are the unassigned
    /// literals.
    pub(crate) fn on_backtrack(&mut self, popped: &[Lit], trail_len: usize) {
        self.qhead = self.qhead.min(trail_len);
        if self.stale {
            return;
        }
        for l in popped {
            if let Some((m, _)) = self.var_loc[l.var().index()] {
                self.mark_dirty(m);
            }
        }
    }

    /// Runs the engine over the unprocessed part of the trail.
    pub(crate) fn propagate(&mut self, trail: &mut Trail) -> XorPropagation {
        debug_assert!(!self.stale, "propagating over stale matrices");
        if self.matrices.is_empty() {
            self.qhead = trail.len();
            return XorPropagation::Fixpoint;
        }
        let start_len = trail.len();
        loop {
            while let Some(m) = self.dirty_list.pop() {
                self.dirty[m as usize] = false;
                let rows = self.matrices[m as usize].num_rows() as u32;
                self.worklist.extend((0..rows).rev().map(|r| (m, r)));
            }
            while let Some((m, r)) = self.worklist.pop() {
                if let Err(confl) = self.ensure_row(m, r as usize, trail) {
                    self.mark_dirty(m);
                    return self.conflict(confl);
                }
            }
            if trail.len() > start_len {
                return XorPropagation::Enqueued;
            }
            if self.qhead >= trail.len() {
                return XorPropagation::Fixpoint;
            }
            let v = trail.lits()[self.qhead].var();
            self.qhead += 1;
            let Some((m, col)) = self.var_loc[v.index()] else {
                continue;
            };
            let list = std::mem::take(&mut self.watches[v.index()]);
            let mut kept = Vec::with_capacity(list.len());
            for (i, &(mm, r)) in list.iter().enumerate() {
                debug_assert_eq!(mm, m);
                let mat = &self.matrices[m as usize];
                let r_us = r as usize;
                if r_us >= mat.num_rows() || (mat.basic[r_us] != col && mat.watch[r_us] != col) {
                    continue;
                }
                if kept.contains(&(m, r)) {
                    continue;
                }
                kept.push((m, r));
                if let Err(confl) = self.ensure_row(m, r_us, trail) {
                    kept.extend_from_slice(&list[i + 1..]);
                    self.watches[v.index()].extend(kept);
                    self.mark_dirty(m);
                    return self.conflict(confl);
                }
            }
            self.watches[v.index()].extend(kept);
        }
    }

    fn conflict(&mut self, lits: Vec<Lit>) -> XorPropagation {
        self.stats.conflicts += 1;
        XorPropagation::Conflict(lits)
    }

    /// Restores the row invariant for row `r` of matrix `m`, propagating or
    /// reporting a conflict as needed.
    fn ensure_row(&mut self, m: u32, r: usize, trail: &mut Trail) -> Result<(), Vec<Lit>> {
        let mat = &self.matrices[m as usize];
        let mut parity = false;
        let mut first_free = NONE;
        let mut count_free = 0usize;
        for c in mat.iter_row(r) {
            match trail.value(mat.cols[c as usize]) {
                Some(b) => parity ^= b,
                None => {
                    if first_free == NONE {
                        first_free = c;
                    }
                    count_free += 1;
                }
            }
        }
        if count_free == 0 {
            if parity != mat.rhs[r] {
                return Err(trail.render_xor_conflict(&mat.row_vars(r)));
            }
            return Ok(());
        }
        let basic = mat.basic[r];
        if trail.value(mat.cols[basic as usize]).is_some() {
            let mat = &mut self.matrices[m as usize];
            let changed = mat.pivot(r, first_free);
            self.stats.pivots += 1;
            let v = mat.cols[first_free as usize];
            self.watches[v.index()].push((m, r as u32));
            self.worklist.extend(changed.into_iter().map(|o| (m, o as u32)));
        }
        let mat = &mut self.matrices[m as usize];
        let basic = mat.basic[r];
        let cur = mat.watch[r];
        // a pivot on another row may have eliminated the watched column
        let cur_ok = cur != NONE && cur != basic && mat.has(r, cur) && trail.value(mat.cols[cur as usize]).is_none();
        if cur_ok {
            return Ok(());
        }
        let nb = mat
            .iter_row(r)
            .find(|&c| c != basic && trail.value(mat.cols[c as usize]).is_none());
        match nb {
            Some(c) => {
                mat.watch[r] = c;
                let v = mat.cols[c as usize];
                self.watches[v.index()].push((m, r as u32));
            }
            None => {
                // only the basic variable is free: it is forced
                let bv = mat.cols[basic as usize];
                let value = mat.rhs[r] ^ parity;
                let support = mat.row_vars(r);
                trail.enqueue_xor(Lit::new(bv, value), support);
                self.stats.propagations += 1;
            }
        }
        Ok(())
    }

    /// Rewrites stored clauses through a variable mapping. Level-0 fixed
    /// variables must already be folded (see [`GaussEngine::clean`]).
    pub(crate) fn remap(&mut self, mapping: &[Option<Var>]) {
        let map = |x: &XorClause| {
            XorClause::normalize(
                x.vars()
                    .iter()
                    .map(|v| mapping[v.index()].expect("surviving variable").pos()),
                x.rhs(),
            )
        };
        self.store.clauses = self.store.clauses.iter().map(map).collect();
        self.aux = self.aux.iter().map(map).collect();
        self.matrices.clear();
        self.var_loc.clear();
        self.watches.clear();
        self.qhead = 0;
        self.stale = true;
    }

    /// Every stored and auxiliary XOR, for re-attachment and inspection.
    pub fn all_xors(&self) -> impl Iterator<Item = &XorClause> {
        self.store.clauses.iter().chain(self.aux.iter())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
