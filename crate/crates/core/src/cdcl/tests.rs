use super::*;
use crate::model::{Clause, XorClause};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn l(i: i64) -> Lit {
    Lit::from_dimacs(i as i32)
}

fn lits(v: &[i64]) -> Vec<Lit> {
    v.iter().map(|&i| l(i)).collect()
}

/// Randomly generated mixed system, kept as plain data for the oracle.
#[derive(Debug, Clone)]
struct System {
    n: usize,
    cnf: Vec<Vec<i64>>,
    xor: Vec<(Vec<i64>, bool)>,
}

impl System {
    fn random(rng: &mut ChaCha8Rng, n: usize, m_cnf: usize, m_xor: usize) -> System {
        let lit = |rng: &mut ChaCha8Rng| {
            let v = rng.gen_range(1..=n as i64);
            if rng.gen() {
                v
            } else {
                -v
            }
        };
        let cnf = (0..m_cnf)
            .map(|_| {
                let k = rng.gen_range(1..=3);
                (0..k).map(|_| lit(rng)).collect()
            })
            .collect();
        let xor = (0..m_xor)
            .map(|_| {
                let k = rng.gen_range(1..=5);
                ((0..k).map(|_| lit(rng)).collect(), rng.gen())
            })
            .collect();
        System { n, cnf, xor }
    }

    fn eval(&self, bits: u64) -> bool {
        let val = |i: i64| ((bits >> (i.unsigned_abs() - 1)) & 1 == 1) == (i > 0);
        self.cnf.iter().all(|c| c.iter().any(|&i| val(i)))
            && self
                .xor
                .iter()
                .all(|(x, rhs)| x.iter().fold(false, |acc, &i| acc ^ val(i)) == *rhs)
    }

    fn eval_model(&self, m: &Assignment) -> bool {
        let bits = (0..self.n).fold(0u64, |acc, i| {
            acc | (u64::from(m.value(Var::from_index(i)) == Some(true)) << i)
        });
        self.eval(bits)
    }

    /// Brute force under extra unit assumptions.
    fn sat_under(&self, assumed: &[Lit]) -> bool {
        (0..1u64 << self.n).any(|bits| {
            assumed
                .iter()
                .all(|a| ((bits >> a.var().index()) & 1 == 1) == a.is_positive())
                && self.eval(bits)
        })
    }

    fn load(&self, s: &mut Solver, expand: bool) -> bool {
        s.ensure_vars(self.n);
        let mut ok = true;
        for c in &self.cnf {
            ok &= s.add_clause(&lits(c)).is_ok();
        }
        for (x, rhs) in &self.xor {
            if expand {
                let xc = XorClause::normalize(lits(x), *rhs);
                match xc.to_cnf() {
                    Err(_) => {}
                    Ok(cs) => {
                        for c in cs {
                            ok &= s.add_clause(c.lits()).is_ok();
                        }
                    }
                }
                if xc.is_contradiction() {
                    ok &= s.add_clause(&[]).is_ok();
                }
            } else {
                ok &= s.add_xor(&lits(x), *rhs).is_ok();
            }
        }
        ok
    }
}

#[test]
fn contradictory_units() {
    let mut s = Solver::default();
    assert!(s.add_clause(&lits(&[1])).is_ok());
    assert_eq!(s.add_clause(&lits(&[-1])), Err(TopLevelConflict));
    assert_eq!(s.solve().status, SatStatus::Unsat);
}

#[test]
fn simple_sat() {
    let mut s = Solver::default();
    s.add_clause(&lits(&[1, 2])).unwrap();
    let out = s.solve();
    assert_eq!(out.status, SatStatus::Sat);
    let m = out.model.unwrap();
    assert!(Clause::from_dimacs(&[1, 2]).unwrap().is_satisfied(&m));
}

#[test]
fn unit_then_xor_propagates() {
    let mut s = Solver::default();
    s.add_xor(&lits(&[1, 2]), true).unwrap();
    s.add_clause(&lits(&[1])).unwrap();
    assert_eq!(s.fixed_value(l(1)), Some(true));
    assert_eq!(s.fixed_value(l(2)), Some(false));
}

#[test]
fn unit_then_long_xor_propagates() {
    let mut s = Solver::default();
    s.add_xor(&lits(&[1, 2, 3]), true).unwrap();
    s.add_clause(&lits(&[-1])).unwrap();
    s.add_clause(&lits(&[-2])).unwrap();
    assert_eq!(s.fixed_value(l(3)), Some(true));
}

#[test]
fn chain_back_substitution() {
    let mut s = Solver::default();
    s.add_xor(&lits(&[1, 2]), true).unwrap();
    s.add_xor(&lits(&[2, 3]), false).unwrap();
    match s.propagate_assumptions(&lits(&[1])) {
        Implicants::Consistent(t) => {
            let got: Vec<Lit> = t.iter().map(|(x, _)| *x).collect();
            assert!(got.contains(&l(-2)) && got.contains(&l(-3)));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn failed_assumptions_on_clause() {
    let mut s = Solver::default();
    s.add_clause(&lits(&[1, 2])).unwrap();
    let out = s.solve_assuming(&lits(&[-1, -2]));
    assert_eq!(out.status, SatStatus::UnsatUnderAssumptions);
    let failed = out.failed_assumptions.unwrap();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|f| [l(-1), l(-2)].contains(f)));
    // still satisfiable without them
    assert_eq!(s.solve().status, SatStatus::Sat);
}

#[test]
fn assumption_shows_in_model() {
    let mut s = Solver::default();
    s.ensure_vars(1);
    let out = s.solve_assuming(&lits(&[1]));
    assert_eq!(out.model.unwrap().value(Var::new(1)), Some(true));
}

#[test]
fn parity_assumptions_fail() {
    let mut s = Solver::default();
    s.add_xor(&lits(&[1, 2, 3]), true).unwrap();
    let out = s.solve_assuming(&lits(&[-1, -2, -3]));
    assert_eq!(out.status, SatStatus::UnsatUnderAssumptions);
}

#[test]
fn textbook_unit_learning() {
    let mut s = Solver::default();
    s.add_clause(&lits(&[-1, 2])).unwrap();
    s.add_clause(&lits(&[-1, -2])).unwrap();
    let out = s.solve_assuming(&[]);
    assert_eq!(out.status, SatStatus::Sat);
    assert_eq!(out.model.unwrap().value(Var::new(1)), Some(false));
}

#[test]
fn learned_unit_backjumps_to_zero() {
    let mut s = Solver::default();
    s.add_clause(&lits(&[-1, 2])).unwrap();
    s.add_clause(&lits(&[-1, -2])).unwrap();
    s.trail.new_level();
    s.trail.assign(l(1), Reason::None);
    let confl = s.propagate().expect("conflict");
    assert!(s.analyze_and_learn(confl));
    assert_eq!(s.decision_level(), 0);
    assert_eq!(s.fixed_value(l(-1)), Some(true));
    assert_eq!(s.stats().learned_units, 1);
}

#[test]
fn xor_conflict_yields_falsified_unit() {
    // deciding a forces a conflict that only the XOR engine sees; the
    // learned clause is the unit ¬a, falsified by the trail at the time
    let mut s = Solver::default();
    s.add_xor(&lits(&[1, 2, 3]), true).unwrap();
    s.add_xor(&lits(&[2, 3, 4]), true).unwrap();
    s.add_clause(&lits(&[-1, -4])).unwrap();
    // a ⇒ ¬d, and rows sum to a^d = 0, so a is impossible
    s.phase.iter_mut().for_each(|p| *p = true);
    let out = s.solve_assuming(&[]);
    assert_eq!(out.status, SatStatus::Sat);
    let m = out.model.unwrap();
    assert_eq!(m.value(Var::new(1)), Some(false));
    assert_eq!(s.fixed_value(l(-1)), Some(true));
    assert_eq!(s.stats().xor_learned_units, 1);
}

#[test]
fn xor_unit_learning_counted() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seen = 0;
    for _ in 0..200 {
        let sys = System::random(&mut rng, 10, 6, 8);
        let mut s = Solver::default();
        if !sys.load(&mut s, false) {
            continue;
        }
        s.solve();
        seen += s.stats().xor_learned_units;
    }
    assert!(seen > 0, "no XOR-derived unit was ever learned");
}

#[test]
fn first_uip_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 100 {
        let n = 30;
        let mut s = Solver::default();
        s.ensure_vars(n);
        let mut ok = true;
        for _ in 0..120 {
            let c: Vec<Lit> = (0..3)
                .map(|_| Lit::new(Var::from_index(rng.gen_range(0..n)), rng.gen()))
                .collect();
            ok &= s.add_clause(&c).is_ok();
        }
        if !ok {
            continue;
        }
        let confl = loop {
            let free: Vec<usize> = (0..n)
                .filter(|&i| s.trail.value(Var::from_index(i)).is_none())
                .collect();
            if free.is_empty() {
                break None;
            }
            let v = Var::from_index(free[rng.gen_range(0..free.len())]);
            s.trail.new_level();
            s.trail.assign(Lit::new(v, rng.gen()), Reason::None);
            if let Some(c) = s.propagate() {
                break Some(c);
            }
        };
        let Some(confl) = confl else { continue };
        let mut clits = match confl {
            Conflict::Clause(cr) => s.clause_lits(cr).to_vec(),
            Conflict::Lits(v) => v,
        };
        let level = s.decision_level();
        let pre: Vec<Option<bool>> = (0..n).map(|i| s.trail.value(Var::from_index(i))).collect();
        let (learnt, bj) = s.analyze(&mut clits, level);
        // falsified by the pre-backjump trail
        for x in &learnt {
            assert_eq!(pre[x.var().index()].map(|b| b == x.is_positive()), Some(false));
        }
        // exactly one literal at the conflict level
        let at_level = learnt.iter().filter(|x| s.trail.level(x.var()) == level).count();
        assert_eq!(at_level, 1);
        s.backtrack(bj);
        assert_eq!(s.trail.lit_value(learnt[0]), None);
        assert!(learnt[1..].iter().all(|x| s.trail.lit_value(*x) == Some(false)));
        checked += 1;
    }
}

#[test]
fn agrees_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..400 {
        let n = rng.gen_range(3..=12);
        let (m1, m2) = (rng.gen_range(0..3 * n), rng.gen_range(0..n));
        let sys = System::random(&mut rng, n, m1, m2);
        let mut s = Solver::default();
        sys.load(&mut s, false);
        s.ensure_vars(n);
        let out = s.solve();
        let expected = sys.sat_under(&[]);
        assert_eq!(out.status == SatStatus::Sat, expected, "round {round}: {sys:?}");
        if let Some(m) = &out.model {
            assert!(sys.eval_model(m), "round {round}: bad model");
        }
        // assumptions and core soundness
        if expected {
            for _ in 0..5 {
                let k = rng.gen_range(1..=n.min(4));
                let assumed: Vec<Lit> = (0..k)
                    .map(|_| Lit::new(Var::from_index(rng.gen_range(0..n)), rng.gen()))
                    .collect();
                let out = s.solve_assuming(&assumed);
                let sat = sys.sat_under(&assumed);
                match out.status {
                    SatStatus::Sat => {
                        assert!(sat);
                        let m = out.model.unwrap();
                        assert!(sys.eval_model(&m));
                        assert!(assumed.iter().all(|a| m.lit_value(*a) == Some(true)));
                    }
                    SatStatus::UnsatUnderAssumptions => {
                        assert!(!sat);
                        let failed = out.failed_assumptions.unwrap();
                        assert!(failed.iter().all(|f| assumed.contains(f)));
                        assert!(!sys.sat_under(&failed), "core is not a core");
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
        }
    }
}

#[test]
fn native_and_expanded_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let n = rng.gen_range(3..=16);
        let (m1, m2) = (rng.gen_range(0..2 * n), rng.gen_range(1..n));
        let sys = System::random(&mut rng, n, m1, m2);
        let mut native = Solver::default();
        let mut expanded = Solver::default();
        sys.load(&mut native, false);
        sys.load(&mut expanded, true);
        native.ensure_vars(n);
        expanded.ensure_vars(n);
        // the joint fixpoint is at least as strong as UP on the expansion
        if let (Implicants::Consistent(a), Implicants::Consistent(b)) =
            (native.propagate_assumptions(&[]), expanded.propagate_assumptions(&[]))
        {
            let a: Vec<Lit> = a.into_iter().map(|x| x.0).collect();
            assert!(b.iter().all(|(x, _)| a.contains(x)));
        }
        assert_eq!(native.solve().status, expanded.solve().status);
    }
}

#[test]
fn backtrack_zero_rebuilds_outside_analysis() {
    let mut s = Solver::default();
    s.add_xor(&lits(&[1, 2, 3]), true).unwrap();
    s.solve();
    s.ensure_vars(4);
    let before = s.gauss_stats().rebuilds;
    s.trail.new_level();
    s.trail.assign(l(4), Reason::None);
    s.backtrack(0);
    assert_eq!(s.gauss_stats().rebuilds, before + 1);
}

#[test]
fn backtrack_zero_defers_during_analysis() {
    let mut s = Solver::default();
    s.add_xor(&lits(&[1, 2, 3]), true).unwrap();
    s.solve();
    let before = s.gauss_stats();
    s.trail.new_level();
    s.trail.assign(l(1), Reason::None);
    s.in_analysis = true;
    s.backtrack(0);
    assert_eq!(s.gauss_stats().rebuilds, before.rebuilds);
    assert!(s.gauss.has_deferred_rebuild());
    s.in_analysis = false;
    assert!(s.gauss.take_deferred());
}

#[test]
fn backtrack_to_current_level_is_noop() {
    let mut s = Solver::default();
    s.add_xor(&lits(&[1, 2, 3]), true).unwrap();
    s.solve();
    let before = s.gauss_stats().rebuilds;
    s.backtrack(0);
    assert_eq!(s.gauss_stats().rebuilds, before);
}

#[test]
fn learned_units_defer_then_rebuild() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut deferred = 0;
    for _ in 0..200 {
        let sys = System::random(&mut rng, 14, 20, 8);
        let mut s = Solver::default();
        sys.load(&mut s, false);
        s.solve();
        let g = s.gauss_stats();
        deferred += g.deferred_rebuilds;
        assert!(!s.gauss.has_deferred_rebuild());
        assert!(s.gauss.store().clauses().iter().all(|x| x.len() >= 3));
    }
    assert!(deferred > 0);
}

#[test]
fn renumber_folds_fixed_vars() {
    let mut s = Solver::default();
    s.add_xor(&lits(&[1, 2, 3, 4]), true).unwrap();
    s.add_clause(&lits(&[3])).unwrap();
    // c fixed true and eliminated; others shift down
    let map = vec![Some(Var::new(1)), Some(Var::new(2)), None, Some(Var::new(3))];
    s.renumber_variables(&map).unwrap();
    assert_eq!(s.num_vars(), 3);
    s.solve();
    let xs: Vec<&XorClause> = s.gauss.all_xors().collect();
    assert_eq!(xs.len(), 1);
    assert_eq!(xs[0].vars(), &[Var::new(1), Var::new(2), Var::new(3)]);
    assert!(!xs[0].rhs());
}

#[test]
fn renumber_rejects_unfixed_elimination() {
    let mut s = Solver::default();
    s.add_clause(&lits(&[1, 2])).unwrap();
    assert_eq!(
        s.renumber_variables(&[Some(Var::new(1)), None]),
        Err(RenumberError::UnfixedEliminated(Var::new(2)))
    );
    assert_eq!(
        s.renumber_variables(&[Some(Var::new(1)), Some(Var::new(1))]),
        Err(RenumberError::NotInjective(Var::new(1)))
    );
}

#[test]
fn renumber_preserves_verdicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let n = rng.gen_range(4..=12);
        let (m1, m2) = (rng.gen_range(0..2 * n), rng.gen_range(0..n));
        let mut sys = System::random(&mut rng, n, m1, m2);
        // fix a couple of variables so elimination has something to do
        sys.cnf.push(vec![1]);
        sys.cnf.push(vec![-2]);
        let mut s = Solver::default();
        sys.load(&mut s, false);
        let before = s.solve().status;
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let map: Vec<Option<Var>> = (0..n)
            .map(|i| {
                if i < 2 && s.fixed_value(Lit::new(Var::from_index(i), true)).is_some() {
                    None
                } else {
                    Some(Var::from_index(perm[i]))
                }
            })
            .collect();
        s.renumber_variables(&map).unwrap();
        let after = s.solve();
        assert_eq!(before, after.status);
        if let Some(m) = after.model {
            // pull the model back and check it against the original system
            let mut back = Assignment::new(n as u32);
            for (i, t) in map.iter().enumerate() {
                let v = Var::from_index(i);
                let val = match t {
                    Some(t) => m.value(*t).unwrap(),
                    None => i == 0,
                };
                back.set(v, val);
            }
            assert!(sys.eval_model(&back));
        }
    }
}

#[test]
fn luby_prefix() {
    let seq: Vec<u64> = (0..15).map(luby).collect();
    assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
}

#[test]
fn conflict_budget_gives_unknown() {
    // pigeonhole 7 into 6 takes many conflicts
    let mut s = Solver::new(SolverConfig {
        conflict_limit: Some(10),
        ..SolverConfig::default()
    });
    let p = |i: usize, j: usize| Lit::new(Var::from_index(i * 6 + j), true);
    for i in 0..7 {
        s.add_clause(&(0..6).map(|j| p(i, j)).collect::<Vec<_>>()).unwrap();
    }
    for j in 0..6 {
        for a in 0..7 {
            for b in a + 1..7 {
                s.add_clause(&[!p(a, j), !p(b, j)]).unwrap();
            }
        }
    }
    assert_eq!(s.solve().status, SatStatus::Unknown);
    s.config_mut().conflict_limit = None;
    assert_eq!(s.solve().status, SatStatus::Unsat);
}

#[test]
fn deterministic_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let sys = System::random(&mut rng, 40, 150, 20);
    let run = || {
        let mut s = Solver::default();
        sys.load(&mut s, false);
        let out = s.solve();
        (out, s.stats())
    };
    assert_eq!(run(), run());
}
