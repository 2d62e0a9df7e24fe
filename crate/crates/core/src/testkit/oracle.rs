use thiserror::Error;

use crate::model::{Assignment, Instance, ModelError, SolveResult};

/// Largest variable count the oracle enumerates by default.
pub const ORACLE_VAR_CAP: u32 = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{num_vars} variables exceed the brute-force cap of {cap}")]
    TooManyVars { num_vars: u32, cap: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Exact optimum by enumerating every assignment, with [`ORACLE_VAR_CAP`].
pub fn brute_force_optimum(inst: &Instance) -> Result<SolveResult, OracleError> {
    brute_force_optimum_capped(inst, ORACLE_VAR_CAP)
}

/// Exact optimum by enumeration. Instances above `cap` variables (or above
/// 32, the mask width) are refused rather than truncated. Among optimal
/// assignments the first in counting order is returned.
pub fn brute_force_optimum_capped(inst: &Instance, cap: u32) -> Result<SolveResult, OracleError> {
    let n = inst.num_vars;
    if n > cap.min(32) {
        return Err(OracleError::TooManyVars {
            num_vars: n,
            cap: cap.min(32),
        });
    }
    inst.total_soft_weight()?;
    inst.validate()?;

    // (positive-literal mask, negative-literal mask) per clause
    let masks = |lits: &[crate::model::Lit]| {
        lits.iter().fold((0u32, 0u32), |(p, q), l| {
            let bit = 1u32 << l.var().index();
            if l.is_positive() {
                (p | bit, q)
            } else {
                (p, q | bit)
            }
        })
    };
    let hard: Vec<(u32, u32)> = inst.hard_cnf.iter().map(|c| masks(c.lits())).collect();
    let xors: Vec<(u32, bool)> = inst
        .hard_xor
        .iter()
        .map(|x| (x.vars().iter().fold(0u32, |m, v| m | 1 << v.index()), x.rhs()))
        .collect();
    let soft: Vec<(u32, u32, u64)> = inst
        .soft
        .iter()
        .map(|s| {
            let (p, q) = masks(s.clause.lits());
            (p, q, s.weight)
        })
        .collect();

    let sat = |x: u32, (p, q): (u32, u32)| (x & p) | (!x & q) != 0;
    let mut best: Option<(u32, u64)> = None;
    for x in 0..1u64 << n {
        let x = x as u32;
        if !hard.iter().all(|&c| sat(x, c)) {
            continue;
        }
        if !xors.iter().all(|&(m, rhs)| ((x & m).count_ones() % 2 == 1) == rhs) {
            continue;
        }
        // total weight fits in u64, so partial sums do too
        let cost: u64 = soft.iter().filter(|&&(p, q, _)| !sat(x, (p, q))).map(|s| s.2).sum();
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((x, cost));
            if cost == 0 {
                break;
            }
        }
    }
    Ok(match best {
        Some((x, cost)) => SolveResult::optimum(Assignment::from_bools((0..n).map(|i| x >> i & 1 == 1)), cost),
        None => SolveResult::unsat(),
    })
}
