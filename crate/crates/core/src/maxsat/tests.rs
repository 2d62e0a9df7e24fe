use super::*;
use crate::model::{Clause, SoftClause};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn l(i: i32) -> Lit {
    Lit::from_dimacs(i)
}

/// Exhaustive optimum, written independently of the model helpers.
fn brute(inst: &Instance) -> Option<u64> {
    let n = inst.num_vars;
    let val = |bits: u32, x: Lit| ((bits >> x.var().index()) & 1 == 1) == x.is_positive();
    (0..1u32 << n)
        .filter(|&b| {
            inst.hard_cnf.iter().all(|c| c.lits().iter().any(|&x| val(b, x)))
                && inst
                    .hard_xor
                    .iter()
                    .all(|x| x.vars().iter().filter(|v| (b >> v.index()) & 1 == 1).count() % 2 == x.rhs() as usize)
        })
        .map(|b| {
            inst.soft
                .iter()
                .filter(|s| !s.clause.lits().iter().any(|&x| val(b, x)))
                .map(|s| s.weight)
                .sum()
        })
        .min()
}

fn random_instance(rng: &mut ChaCha8Rng, n: u32, xor: bool, all_soft_units: bool) -> Instance {
    let mut inst = Instance::new();
    inst.num_vars = n;
    let lit = |rng: &mut ChaCha8Rng| Lit::new(Var::new(rng.gen_range(1..=n)), rng.gen());
    for _ in 0..rng.gen_range(0..2 * n) {
        let k = rng.gen_range(1..=3);
        let c: Vec<Lit> = (0..k).map(|_| lit(rng)).collect();
        inst.add_hard(c);
    }
    if xor {
        for _ in 0..rng.gen_range(1..=n / 2 + 1) {
            let k = rng.gen_range(2..=5);
            let lits: Vec<Lit> = (0..k).map(|_| lit(rng)).collect();
            inst.add_xor(XorClause::normalize(lits, rng.gen()));
        }
    }
    if all_soft_units {
        for v in 1..=n {
            inst.add_soft([Lit::new(Var::new(v), rng.gen())], rng.gen_range(1..20))
                .unwrap();
        }
    } else {
        for _ in 0..rng.gen_range(1..=12) {
            let k = rng.gen_range(1..=3);
            let c: Vec<Lit> = (0..k).map(|_| lit(rng)).collect();
            let w = if rng.gen_bool(0.2) {
                rng.gen_range(1..1u64 << 40)
            } else {
                rng.gen_range(1..10)
            };
            inst.add_soft(c, w).unwrap();
        }
    }
    inst
}

#[test]
fn forced_soft_violation() {
    let mut inst = Instance::new();
    inst.add_hard([l(1)]);
    inst.add_soft([l(-1)], 3).unwrap();
    let r = solve_instance(&inst, MaxSatConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::OptimumFound);
    assert_eq!(r.cost, Some(3));
    assert_eq!(r.model.unwrap().value(Var::new(1)), Some(true));
}

#[test]
fn parity_forces_one() {
    let mut inst = Instance::new();
    inst.add_xor(XorClause::from_dimacs(&[1, 2], true));
    inst.add_soft([l(-1)], 1).unwrap();
    inst.add_soft([l(-2)], 1).unwrap();
    let r = solve_instance(&inst, MaxSatConfig::default()).unwrap();
    assert_eq!(r.cost, Some(1));
}

#[test]
fn hard_contradiction() {
    let mut inst = Instance::new();
    inst.add_hard([l(1)]);
    inst.add_hard([l(-1)]);
    let r = solve_instance(&inst, MaxSatConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Unsatisfiable);
}

#[test]
fn ipamir_style_xor_finalizer() {
    let mut s = MaxSatSolver::default();
    for x in [1, 2, 3] {
        s.add_hard_lit(x, false);
    }
    s.add_hard_lit(0, true);
    s.add_hard_lit(4, false);
    s.add_hard_lit(0, false);
    for v in 1..=3 {
        s.add_soft_lit(l(-v), 1).unwrap();
    }
    let r = s.solve().unwrap();
    assert_eq!(r.cost, Some(1));
    assert!(s.val_lit(l(4)).unwrap());
    let ones = (1..=3).filter(|&v| s.val_lit(l(v)).unwrap()).count();
    assert_eq!(ones, 1);
}

#[test]
fn terminate_keeps_first_model() {
    use std::sync::atomic::{AtomicUsize, Ordering};
    let polls = Arc::new(AtomicUsize::new(0));
    let mut s = MaxSatSolver::default();
    s.add_hard_xor(&[l(1), l(2), l(3)], true);
    for v in 1..=3 {
        s.add_soft_lit(l(-v), 1).unwrap();
    }
    let p = polls.clone();
    s.set_terminate(Some(Box::new(move || {
        p.fetch_add(1, Ordering::Relaxed);
        true
    })));
    let r = s.solve().unwrap();
    assert_eq!(r.verdict, Verdict::Unknown);
    assert!(r.model.is_some());
    assert!(polls.load(Ordering::Relaxed) >= 1);
    s.set_terminate(None);
    let r = s.solve().unwrap();
    assert_eq!(r.verdict, Verdict::OptimumFound);
    assert_eq!(r.cost, Some(1));
}

#[test]
fn soft_weights_accumulate() {
    let mut s = MaxSatSolver::default();
    s.add_hard_lit(1, false);
    s.add_hard_lit(0, false);
    s.add_soft_lit(l(-1), 1).unwrap();
    s.add_soft_lit(l(-1), 1).unwrap();
    s.solve().unwrap();
    assert_eq!(s.val_obj(), Ok(2));
    assert_eq!(s.num_softs(), 1);
}

#[test]
fn soft_on_fresh_var() {
    let mut s = MaxSatSolver::default();
    s.add_soft_lit(l(-4), 10).unwrap();
    s.solve().unwrap();
    assert_eq!(s.val_obj(), Ok(0));
    assert_eq!(s.val_lit(l(4)), Ok(false));
}

#[test]
fn zero_weight_rejected() {
    let mut s = MaxSatSolver::default();
    assert_eq!(s.add_soft_lit(l(1), 0), Err(MaxSatError::ZeroWeight));
}

#[test]
fn overflow_is_reported() {
    let mut s = MaxSatSolver::default();
    s.add_soft_lit(l(1), u64::MAX - 1).unwrap();
    assert_eq!(s.add_soft_lit(l(2), 5), Err(MaxSatError::WeightOverflow));
}

#[test]
fn assumptions_are_single_shot() {
    let mut s = MaxSatSolver::default();
    s.add_soft_lit(l(1), 2).unwrap();
    s.assume(l(-1));
    s.solve().unwrap();
    assert_eq!(s.val_obj(), Ok(2));
    s.solve().unwrap();
    assert_eq!(s.val_obj(), Ok(0));
}

#[test]
fn assumptions_conflicting_with_hard() {
    let mut s = MaxSatSolver::default();
    s.add_hard_clause(&[l(1)]);
    s.assume(l(-1));
    let r = s.solve().unwrap();
    assert_eq!(r.verdict, Verdict::Unsatisfiable);
    let r = s.solve().unwrap();
    assert_eq!(r.verdict, Verdict::OptimumFound);
}

#[test]
fn val_requires_fresh_solve() {
    let mut s = MaxSatSolver::default();
    assert_eq!(s.val_obj(), Err(StateError::NoModel));
    s.add_soft_lit(l(1), 1).unwrap();
    s.solve().unwrap();
    assert!(s.val_obj().is_ok());
    s.add_hard_clause(&[l(2)]);
    assert_eq!(s.val_obj(), Err(StateError::NoModel));
    assert_eq!(s.val_lit(l(1)), Err(StateError::NoModel));
}

#[test]
fn idempotent_resolve() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inst = random_instance(&mut rng, 10, true, false);
    let mut s = MaxSatSolver::default();
    load_instance(&mut s, &inst).unwrap();
    let a = s.solve().unwrap();
    let b = s.solve().unwrap();
    assert_eq!(a.verdict, b.verdict);
    assert_eq!(a.cost, b.cost);
}

#[test]
fn violated_cached_model_is_dropped() {
    let mut s = MaxSatSolver::default();
    for v in 1..=3 {
        s.add_soft_lit(l(v), 1).unwrap();
    }
    s.solve().unwrap();
    assert!(s.cached.is_some());
    // all-true model violates 1^2^3 = 0
    s.add_hard_xor(&[l(1), l(2), l(3)], false);
    assert!(s.cached.is_none());
    s.solve().unwrap();
    assert_eq!(s.val_obj(), Ok(1));
}

#[test]
fn satisfied_cached_model_is_kept() {
    let mut s = MaxSatSolver::default();
    for v in 1..=3 {
        s.add_soft_lit(l(v), 1).unwrap();
    }
    s.solve().unwrap();
    s.add_hard_xor(&[l(1), l(2), l(3)], true);
    assert!(s.cached.is_some());
}

#[test]
fn matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for round in 0..300 {
        let n = rng.gen_range(2..=12);
        let x = rng.gen();
        let inst = random_instance(&mut rng, n, x, false);
        for seeding in [Seeding::None, Seeding::Cnf] {
            let cfg = MaxSatConfig {
                seeding,
                minimize_cores: rng.gen(),
                ..MaxSatConfig::default()
            };
            let r = solve_instance(&inst, cfg).unwrap();
            match brute(&inst) {
                None => assert_eq!(r.verdict, Verdict::Unsatisfiable, "round {round}"),
                Some(opt) => {
                    assert_eq!(r.verdict, Verdict::OptimumFound, "round {round}");
                    assert_eq!(r.cost, Some(opt), "round {round}: {inst:?}");
                    let m = r.model.unwrap();
                    assert!(inst.hard_satisfied(&m));
                    assert_eq!(inst.cost(&m).unwrap(), opt);
                }
            }
        }
    }
}

#[test]
fn seeded_candidates_with_xors() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut rejected = 0;
    for round in 0..200 {
        let n = rng.gen_range(3..=10);
        let inst = random_instance(&mut rng, n, true, true);
        let mut s = MaxSatSolver::new(MaxSatConfig {
            seeding: Seeding::Cnf,
            ..MaxSatConfig::default()
        });
        load_instance(&mut s, &inst).unwrap();
        let r = rescore(&inst, s.solve().unwrap());
        if inst.hard_xor.iter().any(|x| x.len() >= 2) {
            assert!(!s.all_clauses_seeded());
        }
        rejected += s.stats().candidates_rejected;
        assert_eq!(r.cost, brute(&inst), "round {round}");
    }
    assert!(rejected > 0);
}

#[test]
fn all_seeded_without_xors() {
    let mut inst = Instance::new();
    inst.add_hard([l(1), l(2)]);
    inst.add_soft([l(-1)], 1).unwrap();
    inst.add_soft([l(-2)], 2).unwrap();
    let mut s = MaxSatSolver::new(MaxSatConfig {
        seeding: Seeding::Cnf,
        ..MaxSatConfig::default()
    });
    load_instance(&mut s, &inst).unwrap();
    let r = s.solve().unwrap();
    assert!(s.all_clauses_seeded());
    assert_eq!(r.cost, Some(1));
    assert_eq!(s.stats().candidates_rejected, 0);
}

#[test]
fn rejected_candidate_leaves_bounds() {
    let mut s = MaxSatSolver::new(MaxSatConfig {
        seeding: Seeding::Cnf,
        ..MaxSatConfig::default()
    });
    for v in 1..=3 {
        s.add_soft_lit(l(-v), 1).unwrap();
    }
    s.add_hard_xor(&[l(1), l(2), l(3)], true);
    let before = s.bounds();
    // all false violates the parity constraint
    let cand = Assignment::from_bools([false, false, false]);
    let Validation::Reject(clause) = s.validate_optimizer_model(&cand) else {
        panic!("candidate accepted")
    };
    assert!(!clause.is_empty());
    // the clause is violated by the candidate: every indicator is "kept"
    assert!(clause.iter().all(|x| x.relaxed));
    assert_eq!(s.bounds(), before);
    let ok = Assignment::from_bools([true, false, false]);
    assert_eq!(s.validate_optimizer_model(&ok), Validation::Accept(ok.clone()));
}

#[test]
fn high_weights_never_wrong_unsat() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let x = rng.gen();
        let mut inst = random_instance(&mut rng, n, x, false);
        inst.soft
            .iter_mut()
            .for_each(|s| s.weight = rng.gen_range(1u64 << 39..1u64 << 40));
        let r = solve_instance(&inst, MaxSatConfig::default()).unwrap();
        assert_eq!(r.cost, brute(&inst));
        if brute(&inst).is_some() {
            assert_eq!(r.verdict, Verdict::OptimumFound);
        }
    }
}

#[test]
fn incremental_matches_scratch() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.gen_range(3..=10);
        let mut s = MaxSatSolver::default();
        let mut acc = Instance::new();
        acc.num_vars = n;
        let mut last = 0;
        for _stage in 0..3 {
            let part = random_instance(&mut rng, n, true, false);
            for c in &part.hard_cnf {
                acc.add_hard(c.lits().iter().copied());
                s.add_hard_clause(c.lits());
            }
            for x in &part.hard_xor {
                acc.add_xor(x.clone());
                s.add_hard_xor(&x.vars().iter().map(|v| v.pos()).collect::<Vec<_>>(), x.rhs());
            }
            for SoftClause { clause, weight } in &part.soft {
                acc.add_soft(clause.lits().iter().copied(), *weight).unwrap();
                s.add_soft_clause(clause.lits(), *weight).unwrap();
            }
            let inc = s.solve().unwrap();
            let scratch = solve_instance(&acc, MaxSatConfig::default()).unwrap();
            assert_eq!(inc.verdict, scratch.verdict);
            assert_eq!(inc.cost, scratch.cost);
            assert_eq!(inc.cost, brute(&acc));
            if inc.verdict == Verdict::Unsatisfiable {
                break;
            }
            assert!(inc.cost.unwrap() >= last);
            last = inc.cost.unwrap();
        }
    }
}

#[test]
fn hard_strengthening_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let n = rng.gen_range(3..=10);
        let inst = random_instance(&mut rng, n, false, false);
        let mut s = MaxSatSolver::default();
        load_instance(&mut s, &inst).unwrap();
        let mut last = 0;
        for _ in 0..4 {
            let r = s.solve().unwrap();
            let Some(c) = r.cost else { break };
            assert!(c >= last);
            last = c;
            let lits: Vec<Lit> = (0..3)
                .map(|_| Lit::new(Var::new(rng.gen_range(1..=n)), rng.gen()))
                .collect();
            s.add_hard_xor(&lits, rng.gen());
        }
    }
}

#[test]
fn conditional_cores_reused_only_under_their_assumptions() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let n = rng.gen_range(3..=9);
        let inst = random_instance(&mut rng, n, true, false);
        let mut s = MaxSatSolver::default();
        load_instance(&mut s, &inst).unwrap();
        for _ in 0..4 {
            let a: Vec<Lit> = (0..rng.gen_range(0..3))
                .map(|_| Lit::new(Var::new(rng.gen_range(1..=n)), rng.gen()))
                .collect();
            let mut with = inst.clone();
            for &x in &a {
                s.assume(x);
                with.add_hard([x]);
            }
            let r = s.solve().unwrap();
            let expect = brute(&with);
            assert_eq!(r.cost.filter(|_| r.verdict == Verdict::OptimumFound), expect);
            // the cost of a model of the original instance, with relaxation
            // variables hidden, can only be lower than the reported one
            if let Some(m) = r.model {
                let m = m.completed(n).truncated(n);
                assert!(with.hard_satisfied(&m));
                assert!(inst.cost(&m).unwrap() <= r.cost.unwrap());
            }
        }
    }
}

#[test]
fn unit_clause_from_clause_type() {
    let c = Clause::from_dimacs(&[1]).unwrap();
    let mut s = MaxSatSolver::default();
    s.add_hard_clause(c.lits());
    s.solve().unwrap();
    assert_eq!(s.val_lit(l(1)), Ok(true));
}
