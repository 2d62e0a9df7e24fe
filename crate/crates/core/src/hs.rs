//! Exact minimum-cost hitting sets by branch and bound.
//!
//! The optimizer works on indicator variables, one per soft clause: `b_i`
//! true means soft clause `i` is relaxed (pays its weight). Cores are
//! clauses of positive indicators; seed constraints are arbitrary clauses
//! over indicators. The search branches on an open clause with the fewest
//! unassigned literals, bounds with a residual-weight packing of open cores
//! and starts from a greedy cover.

use std::collections::HashSet;
use std::time::Instant;

use thiserror::Error;

/// Literal over a soft-clause indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndLit {
    pub id: usize,
    /// True for `b_id` (soft clause relaxed), false for `¬b_id`.
    pub relaxed: bool,
}

impl IndLit {
    pub fn relax(id: usize) -> IndLit {
        IndLit { id, relaxed: true }
    }

    pub fn keep(id: usize) -> IndLit {
        IndLit { id, relaxed: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HittingSet {
    /// Relaxed soft-clause ids, ascending.
    pub ids: Vec<usize>,
    pub cost: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HsError {
    #[error("constraint set is infeasible")]
    Infeasible,
    #[error("hitting-set search ran out of time")]
    Timeout,
    #[error("empty core")]
    EmptyCore,
    #[error("soft id {0} out of range")]
    UnknownId(usize),
}

#[derive(Debug, Clone, Default)]
pub struct HittingSetSolver {
    weights: Vec<u64>,
    /// Sorted, deduplicated clauses; cores are all-positive.
    clauses: Vec<Vec<IndLit>>,
    known: HashSet<Vec<IndLit>>,
    num_cores: usize,
    nodes: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Val {
    Free,
    In,
    Out,
}

impl Val {
    fn sat(self, l: IndLit) -> Option<bool> {
        match self {
            Val::Free => None,
            Val::In => Some(l.relaxed),
            Val::Out => Some(!l.relaxed),
        }
    }
}

struct Search<'a> {
    weights: &'a [u64],
    clauses: &'a [Vec<IndLit>],
    vals: Vec<Val>,
    best: Option<(u64, Vec<Val>)>,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
    residual: Vec<u64>,
}

impl HittingSetSolver {
    pub fn new() -> HittingSetSolver {
        HittingSetSolver::default()
    }

    pub fn with_weights(weights: Vec<u64>) -> HittingSetSolver {
        HittingSetSolver {
            weights,
            ..HittingSetSolver::default()
        }
    }

    /// Registers a new soft clause and returns its id.
    pub fn push_soft(&mut self, weight: u64) -> usize {
        self.weights.push(weight);
        self.weights.len() - 1
    }

    pub fn set_weight(&mut self, id: usize, weight: u64) {
        self.weights[id] = weight;
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn num_cores(&self) -> usize {
        self.num_cores
    }

    pub fn num_constraints(&self) -> usize {
        self.clauses.len()
    }

    /// Search nodes visited over all calls.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    /// Adds a core; returns false if it was already known.
    pub fn add_core(&mut self, core: &[usize]) -> Result<bool, HsError> {
        if core.is_empty() {
            return Err(HsError::EmptyCore);
        }
        let lits: Vec<IndLit> = core.iter().map(|&i| IndLit::relax(i)).collect();
        let added = self.add_clause(lits)?;
        if added {
            self.num_cores += 1;
        }
        Ok(added)
    }

    /// Adds a clause over indicators that every answer must satisfy.
    pub fn add_seed_constraint(&mut self, clause: &[IndLit]) -> Result<bool, HsError> {
        self.add_clause(clause.to_vec())
    }

    fn add_clause(&mut self, mut lits: Vec<IndLit>) -> Result<bool, HsError> {
        if let Some(l) = lits.iter().find(|l| l.id >= self.weights.len()) {
            return Err(HsError::UnknownId(l.id));
        }
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].id == w[1].id) {
            // contains b and ¬b
            return Ok(false);
        }
        if !self.known.insert(lits.clone()) {
            return Ok(false);
        }
        self.clauses.push(lits);
        Ok(true)
    }

    pub fn min_cost_hitting_set(&mut self) -> Result<HittingSet, HsError> {
        self.min_cost_hitting_set_with(&[], None)
    }

    /// A cheap, generally non-optimal hitting set over the stored constraints
    /// plus `extra` cores: relax by coverage per unit weight.
    pub fn greedy_hitting_set_with(&self, extra: &[Vec<usize>]) -> Result<HittingSet, HsError> {
        let mut clauses: Vec<Vec<IndLit>> = self.clauses.clone();
        for core in extra {
            if core.is_empty() {
                return Err(HsError::EmptyCore);
            }
            clauses.push(core.iter().map(|&i| IndLit::relax(i)).collect());
        }
        let n = self.weights.len();
        let s = Search {
            weights: &self.weights,
            clauses: &clauses,
            vals: vec![Val::Free; n],
            best: None,
            deadline: None,
            nodes: 0,
            timed_out: false,
            residual: Vec::new(),
        };
        // greedy only relaxes, so seed constraints made of keep literals can
        // defeat it even when a hitting set exists
        let (cost, vals) = s.greedy().ok_or(HsError::Infeasible)?;
        Ok(HittingSet {
            ids: (0..n).filter(|&i| vals[i] == Val::In).collect(),
            cost,
        })
    }

    /// Optimum over the stored constraints plus `extra` cores (which are not
    /// recorded), within an optional deadline.
    pub fn min_cost_hitting_set_with(
        &mut self,
        extra: &[Vec<usize>],
        deadline: Option<Instant>,
    ) -> Result<HittingSet, HsError> {
        let mut clauses: Vec<Vec<IndLit>> = self.clauses.clone();
        for core in extra {
            if core.is_empty() {
                return Err(HsError::EmptyCore);
            }
            let mut c: Vec<IndLit> = core.iter().map(|&i| IndLit::relax(i)).collect();
            c.sort_unstable();
            c.dedup();
            clauses.push(c);
        }
        // short clauses first: they drive both branching and the bound
        clauses.sort_by_key(|c| c.len());
        let n = self.weights.len();
        let mut s = Search {
            weights: &self.weights,
            clauses: &clauses,
            vals: vec![Val::Free; n],
            best: None,
            deadline,
            nodes: 0,
            timed_out: false,
            residual: vec![0; n],
        };
        s.best = s.greedy();
        s.branch(0);
        self.nodes += s.nodes;
        if s.timed_out {
            return Err(HsError::Timeout);
        }
        let (cost, vals) = s.best.ok_or(HsError::Infeasible)?;
        let ids: Vec<usize> = (0..n).filter(|&i| vals[i] == Val::In).collect();
        let hs = HittingSet { ids, cost };
        assert!(
            clauses
                .iter()
                .all(|c| c.iter().any(|l| hs.ids.binary_search(&l.id).is_ok() == l.relaxed)),
            "hitting set violates a constraint"
        );
        Ok(hs)
    }
}

impl Search<'_> {
    fn cost_of(&self, vals: &[Val]) -> u64 {
        vals.iter()
            .zip(self.weights)
            .filter(|(v, _)| **v == Val::In)
            .fold(0u64, |a, (_, w)| a.saturating_add(*w))
    }

    fn satisfies_all(&self, vals: &[Val]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| vals[l.id].sat(*l) == Some(true)))
    }

    /// Everything kept, then relax greedily by coverage per unit weight.
    fn greedy(&self) -> Option<(u64, Vec<Val>)> {
        let n = self.weights.len();
        let mut vals = vec![Val::Out; n];
        loop {
            let open: Vec<&Vec<IndLit>> = self
                .clauses
                .iter()
                .filter(|c| !c.iter().any(|l| vals[l.id].sat(*l) == Some(true)))
                .collect();
            if open.is_empty() {
                break;
            }
            let mut count = vec![0u64; n];
            for c in &open {
                for l in c.iter().filter(|l| l.relaxed && vals[l.id] == Val::Out) {
                    count[l.id] += 1;
                }
            }
            let pick = (0..n).filter(|&i| count[i] > 0).max_by(|&a, &b| {
                // count[a]/w[a] vs count[b]/w[b], ties to the lower id
                let lhs = count[a] as u128 * self.weights[b].max(1) as u128;
                let rhs = count[b] as u128 * self.weights[a].max(1) as u128;
                lhs.cmp(&rhs).then(b.cmp(&a))
            })?;
            vals[pick] = Val::In;
        }
        if !self.satisfies_all(&vals) {
            return None;
        }
        Some((self.cost_of(&vals), vals))
    }

    /// Packing bound over open clauses that can only be satisfied by
    /// relaxing: each takes the smallest residual weight among its free
    /// positive literals and charges it to all of them.
    fn lower_bound(&mut self) -> u64 {
        for (i, r) in self.residual.iter_mut().enumerate() {
            *r = self.weights[i];
        }
        let mut lb = 0u64;
        for c in self.clauses {
            let mut min = u64::MAX;
            let mut open = true;
            for l in c {
                match self.vals[l.id].sat(*l) {
                    Some(true) => {
                        open = false;
                        break;
                    }
                    Some(false) => {}
                    None if !l.relaxed => {
                        open = false;
                        break;
                    }
                    None => min = min.min(self.residual[l.id]),
                }
            }
            if !open || min == u64::MAX || min == 0 {
                continue;
            }
            lb = lb.saturating_add(min);
            for l in c {
                if self.vals[l.id] == Val::Free {
                    self.residual[l.id] -= min;
                }
            }
        }
        lb
    }

    fn branch(&mut self, cost: u64) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                    return;
                }
            }
        }
        // pick the open clause with fewest free literals
        let mut pick: Option<(usize, usize)> = None;
        for (ci, c) in self.clauses.iter().enumerate() {
            let mut free = 0;
            let mut sat = false;
            for l in c {
                match self.vals[l.id].sat(*l) {
                    Some(true) => {
                        sat = true;
                        break;
                    }
                    Some(false) => {}
                    None => free += 1,
                }
            }
            if sat {
                continue;
            }
            if free == 0 {
                return;
            }
            if pick.is_none_or(|(_, f)| free < f) {
                pick = Some((ci, free));
            }
        }
        let Some((ci, _)) = pick else {
            if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                self.best = Some((cost, self.vals.clone()));
            }
            return;
        };
        if let Some((b, _)) = &self.best {
            let b = *b;
            if cost.saturating_add(self.lower_bound()) >= b {
                return;
            }
        }
        // free literals: keeping is free so try those first, then cheap
        // relaxations
        let mut lits: Vec<IndLit> = self.clauses[ci]
            .iter()
            .copied()
            .filter(|l| self.vals[l.id] == Val::Free)
            .collect();
        lits.sort_by_key(|l| (l.relaxed, if l.relaxed { self.weights[l.id] } else { 0 }, l.id));
        // branch i: literal i true, literals before it false
        let mut base = cost;
        let mut set: Vec<usize> = Vec::new();
        for l in lits {
            let (v, add) = if l.relaxed {
                (Val::In, self.weights[l.id])
            } else {
                (Val::Out, 0)
            };
            self.vals[l.id] = v;
            self.branch(base.saturating_add(add));
            set.push(l.id);
            if l.relaxed {
                self.vals[l.id] = Val::Out;
            } else {
                // falsifying ¬b relaxes b
                self.vals[l.id] = Val::In;
                base = base.saturating_add(self.weights[l.id]);
            }
            if self.timed_out || self.best.as_ref().is_some_and(|(b, _)| base >= *b) {
                break;
            }
        }
        for i in set {
            self.vals[i] = Val::Free;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(weights: &[u64], clauses: &[Vec<IndLit>]) -> Option<u64> {
        let n = weights.len();
        (0..1u32 << n)
            .filter(|mask| {
                clauses
                    .iter()
                    .all(|c| c.iter().any(|l| (mask >> l.id & 1 == 1) == l.relaxed))
            })
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum())
            .min()
    }

    #[test]
    fn singleton_core() {
        let mut h = HittingSetSolver::with_weights(vec![5]);
        h.add_core(&[0]).unwrap();
        assert_eq!(h.min_cost_hitting_set().unwrap(), HittingSet { ids: vec![0], cost: 5 });
    }

    #[test]
    fn duplicate_cores() {
        let mut h = HittingSetSolver::with_weights(vec![1, 1]);
        assert!(h.add_core(&[0, 1]).unwrap());
        assert!(!h.add_core(&[1, 0]).unwrap());
        assert_eq!(h.num_cores(), 1);
    }

    #[test]
    fn shared_element() {
        let mut h = HittingSetSolver::with_weights(vec![1, 1, 1]);
        h.add_core(&[0, 1]).unwrap();
        h.add_core(&[1, 2]).unwrap();
        assert_eq!(h.min_cost_hitting_set().unwrap(), HittingSet { ids: vec![1], cost: 1 });
    }

    #[test]
    fn triangle_needs_two() {
        let mut h = HittingSetSolver::with_weights(vec![1, 1, 1]);
        h.add_core(&[0, 1]).unwrap();
        h.add_core(&[1, 2]).unwrap();
        h.add_core(&[0, 2]).unwrap();
        assert_eq!(h.min_cost_hitting_set().unwrap().cost, 2);
    }

    #[test]
    fn weights_matter() {
        let mut h = HittingSetSolver::with_weights(vec![10, 1]);
        h.add_core(&[0, 1]).unwrap();
        assert_eq!(h.min_cost_hitting_set().unwrap(), HittingSet { ids: vec![1], cost: 1 });
    }

    #[test]
    fn no_cores_is_empty() {
        let mut h = HittingSetSolver::with_weights(vec![3, 4]);
        assert_eq!(h.min_cost_hitting_set().unwrap(), HittingSet { ids: vec![], cost: 0 });
    }

    #[test]
    fn seed_forbids_pair() {
        let mut h = HittingSetSolver::with_weights(vec![1, 1, 5]);
        h.add_core(&[0, 2]).unwrap();
        h.add_core(&[1, 2]).unwrap();
        assert_eq!(h.min_cost_hitting_set().unwrap().ids, vec![0, 1]);
        h.add_seed_constraint(&[IndLit::keep(0), IndLit::keep(1)]).unwrap();
        assert_eq!(h.min_cost_hitting_set().unwrap().ids, vec![2]);
    }

    #[test]
    fn infeasible_seeds() {
        let mut h = HittingSetSolver::with_weights(vec![1]);
        h.add_core(&[0]).unwrap();
        h.add_seed_constraint(&[IndLit::keep(0)]).unwrap();
        assert_eq!(h.min_cost_hitting_set(), Err(HsError::Infeasible));
    }

    #[test]
    fn empty_core_rejected() {
        let mut h = HittingSetSolver::with_weights(vec![1]);
        assert_eq!(h.add_core(&[]), Err(HsError::EmptyCore));
        assert_eq!(h.add_core(&[3]), Err(HsError::UnknownId(3)));
    }

    #[test]
    fn extra_cores_not_recorded() {
        let mut h = HittingSetSolver::with_weights(vec![1, 2]);
        let hs = h.min_cost_hitting_set_with(&[vec![1]], None).unwrap();
        assert_eq!(hs.cost, 2);
        assert_eq!(h.min_cost_hitting_set().unwrap().cost, 0);
    }

    #[test]
    fn greedy_hits_every_core() {
        let mut h = HittingSetSolver::with_weights(vec![1, 1, 1, 1]);
        h.add_core(&[0, 1]).unwrap();
        h.add_core(&[1, 2]).unwrap();
        let g = h.greedy_hitting_set_with(&[vec![3]]).unwrap();
        assert_eq!(
            g,
            HittingSet {
                ids: vec![1, 3],
                cost: 2
            }
        );
        // keep-only seed constraints defeat the greedy pass
        h.add_seed_constraint(&[IndLit::keep(1)]).unwrap();
        assert_eq!(h.greedy_hitting_set_with(&[]), Err(HsError::Infeasible));
        assert_eq!(h.min_cost_hitting_set().unwrap().ids, vec![0, 2]);
    }

    fn arb_problem() -> impl Strategy<Value = (Vec<u64>, Vec<Vec<IndLit>>)> {
        (1usize..=16).prop_flat_map(|n| {
            let weights = proptest::collection::vec(prop_oneof![1u64..10, 1u64..1_000_000], n);
            let lit = (0..n, proptest::bool::weighted(0.85)).prop_map(|(id, relaxed)| IndLit { id, relaxed });
            let clauses = proptest::collection::vec(proptest::collection::vec(lit, 1..5), 0..20);
            (weights, clauses)
        })
    }

    proptest! {
        #[test]
        fn exact_against_enumeration((weights, clauses) in arb_problem()) {
            let mut h = HittingSetSolver::with_weights(weights.clone());
            for c in &clauses {
                h.add_seed_constraint(c).unwrap();
            }
            match (h.min_cost_hitting_set(), brute(&weights, &clauses)) {
                (Ok(hs), Some(opt)) => {
                    prop_assert_eq!(hs.cost, opt);
                    let sum: u64 = hs.ids.iter().map(|&i| weights[i]).sum();
                    prop_assert_eq!(sum, opt);
                }
                (Err(HsError::Infeasible), None) => {}
                (got, want) => prop_assert!(false, "got {:?}, want {:?}", got, want),
            }
        }

        #[test]
        fn adding_cores_is_monotone((weights, clauses) in arb_problem()) {
            let mut h = HittingSetSolver::with_weights(weights);
            let mut last = 0;
            let mut added: Vec<Vec<usize>> = Vec::new();
            for c in clauses {
                let core: Vec<usize> = c.iter().map(|l| l.id).collect();
                h.add_core(&core).unwrap();
                added.push(core);
                let cost = h.min_cost_hitting_set().unwrap().cost;
                prop_assert!(cost >= last);
                last = cost;
                if let Ok(g) = h.greedy_hitting_set_with(&[]) {
                    prop_assert!(g.cost >= cost);
                    for core in &added {
                        prop_assert!(core.iter().any(|i| g.ids.contains(i)));
                    }
                }
            }
        }
    }
}
