//! Core domain types: variables, literals, CNF and XOR clauses, instances,
//! assignments and solve results.
//!
//! Variables are 1-based as in DIMACS. Literals are packed as
//! `2 * (var - 1) + sign` with sign 0 for the positive polarity, which makes
//! the packed value directly usable as an index into per-literal tables.

use std::fmt;
use std::ops::Not;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("total soft weight overflows 64 bits")]
    WeightOverflow,
    #[error("soft clause weight must be positive")]
    ZeroWeight,
    #[error("literal over variable {var} exceeds declared variable count {num_vars}")]
    VarOutOfRange { var: u32, num_vars: u32 },
    #[error("cannot expand an empty XOR clause to CNF")]
    EmptyXor,
}

/// A propositional variable, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Creates a variable from its 1-based DIMACS index.
    ///
    /// Panics on zero, which is never a variable.
    pub fn new(index: u32) -> Var {
        assert!(index >= 1, "variable index must be at least 1");
        Var(index)
    }

    /// Creates a variable from a 0-based index.
    #[inline]
    pub fn from_index(idx: usize) -> Var {
        Var(idx as u32 + 1)
    }

    /// 1-based DIMACS number.
    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// 0-based index for table lookups.
    #[inline]
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    #[inline]
    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal: a variable or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(((var.0 - 1) << 1) | u32::from(!positive))
    }

    /// Converts a signed DIMACS integer. Zero is the clause terminator and
    /// not a literal, so it panics.
    pub fn from_dimacs(i: i32) -> Lit {
        assert!(i != 0, "0 terminates a clause and is not a literal");
        Lit::new(Var(i.unsigned_abs()), i > 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().0 as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    /// Packed index `2 * (var - 1) + (0 if positive else 1)`.
    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }

    #[inline]
    pub fn var(self) -> Var {
        Var((self.0 >> 1) + 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// The literal with the given polarity flipped when `flip` is set.
    #[inline]
    pub fn xor(self, flip: bool) -> Lit {
        Lit(self.0 ^ u32::from(flip))
    }
}

impl Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals with duplicates removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Normalizes a literal list into a clause. Duplicate literals are
    /// removed keeping first occurrences; `None` signals a tautology.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Clause> {
        let mut out: Vec<Lit> = Vec::new();
        for l in lits {
            if out.contains(&!l) {
                return None;
            }
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Some(Clause { lits: out })
    }

    pub fn from_dimacs(lits: &[i32]) -> Option<Clause> {
        Clause::new(lits.iter().map(|&i| Lit::from_dimacs(i)))
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

    pub fn max_var(&self) -> u32 {
        self.lits.iter().map(|l| l.var().get()).max().unwrap_or(0)
    }

    /// Satisfied iff some literal is true under a complete assignment.
    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        self.lits.iter().any(|&l| a.lit_value(l) == Some(true))
    }
}

/// A parity constraint in normal form: distinct positive variables in
/// ascending order and an explicit right-hand side.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct XorClause {
    vars: Vec<Var>,
    rhs: bool,
}

impl XorClause {
    /// Folds polarities into the right-hand side and cancels pairs.
    pub fn normalize(lits: impl IntoIterator<Item = Lit>, rhs: bool) -> XorClause {
        let mut rhs = rhs;
        let mut vars: Vec<Var> = Vec::new();
        for l in lits {
            if !l.is_positive() {
                rhs = !rhs;
            }
            vars.push(l.var());
        }
        vars.sort_unstable();
        let mut out: Vec<Var> = Vec::with_capacity(vars.len());
        let mut i = 0;
        while i < vars.len() {
            let mut j = i;
            while j < vars.len() && vars[j] == vars[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                out.push(vars[i]);
            }
            i = j;
        }
        XorClause { vars: out, rhs }
    }

    pub fn from_dimacs(lits: &[i32], rhs: bool) -> XorClause {
        XorClause::normalize(lits.iter().map(|&i| Lit::from_dimacs(i)), rhs)
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn rhs(&self) -> bool {
        self.rhs
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Empty with rhs true: no assignment satisfies it.
    pub fn is_contradiction(&self) -> bool {
        self.vars.is_empty() && self.rhs
    }

    /// Empty with rhs false: every assignment satisfies it.
    pub fn is_tautology(&self) -> bool {
        self.vars.is_empty() && !self.rhs
    }

    pub fn max_var(&self) -> u32 {
        self.vars.last().map(|v| v.get()).unwrap_or(0)
    }

    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        let parity = self.vars.iter().fold(false, |acc, &v| acc ^ (a.value(v) == Some(true)));
        parity == self.rhs
    }

    /// Expands into the `2^(n-1)` clauses of length `n` that each forbid one
    /// falsifying assignment.
    pub fn to_cnf(&self) -> Result<Vec<Clause>, ModelError> {
        let n = self.vars.len();
        if n == 0 {
            return Err(ModelError::EmptyXor);
        }
        assert!(n < 32, "XOR of length {n} is too long to expand");
        let mut out = Vec::with_capacity(1 << (n - 1));
        for mask in 0u32..(1u32 << n) {
            // A clause with negation pattern `mask` forbids exactly the
            // assignment setting var i true iff bit i of mask is set; that
            // assignment has parity popcount(mask), which must differ from rhs.
            let odd = mask.count_ones() % 2 == 1;
            if odd != self.rhs {
                let lits = self
                    .vars
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| Lit::new(v, mask & (1 << i) == 0));
                out.push(Clause { lits: lits.collect() });
            }
        }
        Ok(out)
    }
}

/// Free-function form of [`XorClause::normalize`].
pub fn normalize_xor(lits: &[Lit], rhs: bool) -> XorClause {
    XorClause::normalize(lits.iter().copied(), rhs)
}

/// Free-function form of [`XorClause::to_cnf`].
pub fn xor_to_cnf(x: &XorClause) -> Result<Vec<Clause>, ModelError> {
    x.to_cnf()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SoftClause {
    pub clause: Clause,
    pub weight: u64,
}

/// A weighted partial MaxSAT instance with hard XOR constraints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    pub num_vars: u32,
    pub hard_cnf: Vec<Clause>,
    pub hard_xor: Vec<XorClause>,
    pub soft: Vec<SoftClause>,
}

impl Instance {
    pub fn new() -> Instance {
        Instance::default()
    }

    fn bump_vars(&mut self, max_var: u32) {
        self.num_vars = self.num_vars.max(max_var);
    }

    /// Adds a hard clause; tautologies are dropped.
    pub fn add_hard(&mut self, lits: impl IntoIterator<Item = Lit>) {
        if let Some(c) = Clause::new(lits) {
            self.bump_vars(c.max_var());
            self.hard_cnf.push(c);
        }
    }

    /// Adds a hard XOR clause; the tautology marker is dropped.
    pub fn add_xor(&mut self, x: XorClause) {
        if x.is_tautology() {
            return;
        }
        self.bump_vars(x.max_var());
        self.hard_xor.push(x);
    }

    /// Adds a soft clause. A tautological soft clause can never be falsified
    /// and is dropped.
    pub fn add_soft(&mut self, lits: impl IntoIterator<Item = Lit>, weight: u64) -> Result<(), ModelError> {
        if weight == 0 {
            return Err(ModelError::ZeroWeight);
        }
        if let Some(c) = Clause::new(lits) {
            self.bump_vars(c.max_var());
            self.soft.push(SoftClause { clause: c, weight });
        }
        Ok(())
    }

    pub fn total_soft_weight(&self) -> Result<u64, ModelError> {
        self.soft.iter().try_fold(0u64, |acc, s| {
            acc.checked_add(s.weight).ok_or(ModelError::WeightOverflow)
        })
    }

    /// Checks that every literal refers to a declared variable and that the
    /// soft weights can be summed.
    pub fn validate(&self) -> Result<(), ModelError> {
        let max = self
            .hard_cnf
            .iter()
            .map(Clause::max_var)
            .chain(self.hard_xor.iter().map(XorClause::max_var))
            .chain(self.soft.iter().map(|s| s.clause.max_var()))
            .max()
            .unwrap_or(0);
        if max > self.num_vars {
            return Err(ModelError::VarOutOfRange {
                var: max,
                num_vars: self.num_vars,
            });
        }
        if self.soft.iter().any(|s| s.weight == 0) {
            return Err(ModelError::ZeroWeight);
        }
        self.total_soft_weight().map(|_| ())
    }

    /// True iff every hard CNF and XOR clause holds.
    pub fn hard_satisfied(&self, a: &Assignment) -> bool {
        self.hard_cnf.iter().all(|c| c.is_satisfied(a)) && self.hard_xor.iter().all(|x| x.is_satisfied(a))
    }

    /// Sum of weights of falsified soft clauses.
    pub fn cost(&self, a: &Assignment) -> Result<u64, ModelError> {
        self.soft
            .iter()
            .filter(|s| !s.clause.is_satisfied(a))
            .try_fold(0u64, |acc, s| {
                acc.checked_add(s.weight).ok_or(ModelError::WeightOverflow)
            })
    }

    /// The same instance with every hard XOR replaced by its CNF expansion.
    pub fn expand_xors(&self) -> Instance {
        let mut out = Instance {
            num_vars: self.num_vars,
            hard_cnf: self.hard_cnf.clone(),
            hard_xor: Vec::new(),
            soft: self.soft.clone(),
        };
        for x in &self.hard_xor {
            match x.to_cnf() {
                Ok(cls) => out.hard_cnf.extend(cls),
                // rhs-true empty XOR: keep the contradiction as an empty clause
                Err(_) => out.hard_cnf.push(Clause { lits: Vec::new() }),
            }
        }
        out
    }
}

/// A (partial) assignment of truth values, indexed by variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new(num_vars: u32) -> Assignment {
        Assignment {
            values: vec![None; num_vars as usize],
        }
    }

    /// A complete assignment from booleans for vars `1..=values.len()`.
    pub fn from_bools(values: impl IntoIterator<Item = bool>) -> Assignment {
        Assignment {
            values: values.into_iter().map(Some).collect(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn value(&self, v: Var) -> Option<bool> {
        self.values.get(v.index()).copied().flatten()
    }

    pub fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value(l.var()).map(|b| b == l.is_positive())
    }

    pub fn set(&mut self, v: Var, value: bool) {
        if v.index() >= self.values.len() {
            self.values.resize(v.index() + 1, None);
        }
        self.values[v.index()] = Some(value);
    }

    pub fn unset(&mut self, v: Var) {
        if let Some(slot) = self.values.get_mut(v.index()) {
            *slot = None;
        }
    }

    /// No unassigned entries among vars `1..=num_vars`.
    pub fn is_complete(&self, num_vars: u32) -> bool {
        self.values.len() >= num_vars as usize && self.values[..num_vars as usize].iter().all(Option::is_some)
    }

    /// Fills unassigned entries up to `num_vars` with `false`.
    pub fn completed(mut self, num_vars: u32) -> Assignment {
        if self.values.len() < num_vars as usize {
            self.values.resize(num_vars as usize, None);
        }
        for v in &mut self.values {
            v.get_or_insert(false);
        }
        self
    }

    pub fn truncated(mut self, num_vars: u32) -> Assignment {
        self.values.truncate(num_vars as usize);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Option<bool>)> + '_ {
        self.values.iter().enumerate().map(|(i, &b)| (Var::from_index(i), b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    OptimumFound,
    Unsatisfiable,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub verdict: Verdict,
    pub model: Option<Assignment>,
    pub cost: Option<u64>,
}

impl SolveResult {
    pub fn optimum(model: Assignment, cost: u64) -> SolveResult {
        SolveResult {
            verdict: Verdict::OptimumFound,
            model: Some(model),
            cost: Some(cost),
        }
    }

    pub fn unsat() -> SolveResult {
        SolveResult {
            verdict: Verdict::Unsatisfiable,
            model: None,
            cost: None,
        }
    }

    /// Unknown, optionally carrying the best model found so far.
    pub fn unknown(best: Option<(Assignment, u64)>) -> SolveResult {
        let (model, cost) = match best {
            Some((m, c)) => (Some(m), Some(c)),
            None => (None, None),
        };
        SolveResult {
            verdict: Verdict::Unknown,
            model,
            cost,
        }
    }
}
