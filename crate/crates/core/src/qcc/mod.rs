//! Lights Out style decoding: find the fewest switches whose toggles turn
//! every light off. Covers plain Lights Out boards and the triangular 6.6.6
//! color code, where switches are qubits, lights are stabilizers and a light
//! pattern is a syndrome.
//!
//! Each light `l` with switches `s_1..s_m` needs `s_1 ⊕ … ⊕ s_m = init(l)`.
//! Long XORs are split with `k = m - 1` helper variables:
//!
//! ```text
//! v_1 ⊕ h_1           = init(l)
//! h_i ⊕ v_{i+1} ⊕ h_{i+1} = 0     (1 ≤ i < k)
//! h_k ⊕ v_m           = 0
//! ```
//!
//! Only the first clause depends on the light pattern. Every switch has a
//! soft unit `¬v_s` of weight 1.

mod lattice;

use std::io;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::maxsat::{MaxSatConfig, MaxSatError, MaxSatSolver, MaxSatStats};
use crate::model::{Instance, Var, Verdict, XorClause};

pub use lattice::{build_lattice, Geometry, Lattice};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QccError {
    #[error("code distance must be odd and at least 3, got {0}")]
    InvalidDistance(usize),
    #[error("board size must be positive, got {0}")]
    InvalidSize(usize),
    #[error("light pattern has {got} entries, lattice has {want} lights")]
    SyndromeLength { got: usize, want: usize },
    #[error("no switch combination produces this light pattern")]
    Unsolvable,
    #[error("decoding ran out of time")]
    Unknown,
    #[error(transparent)]
    Solver(#[from] MaxSatError),
}

/// The MaxSAT encoding of one light pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedInstance {
    pub instance: Instance,
    /// Variable of each switch.
    pub switch_vars: Vec<Var>,
    /// Helper chain of each light (`|S(l)| - 1` variables).
    pub helpers: Vec<Vec<Var>>,
    /// Index in `instance.hard_xor` of each light's pattern-dependent clause.
    pub first_clause: Vec<usize>,
}

/// The chain of XORs for one light as (variables, rhs) in order.
fn chain(switches: &[Var], helpers: &[Var], on: bool) -> Vec<(Vec<Var>, bool)> {
    let m = switches.len();
    if m == 1 {
        return vec![(vec![switches[0]], on)];
    }
    let k = m - 1;
    let mut out = vec![(vec![switches[0], helpers[0]], on)];
    for i in 0..k - 1 {
        out.push((vec![helpers[i], switches[i + 1], helpers[i + 1]], false));
    }
    out.push((vec![helpers[k - 1], switches[m - 1]], false));
    out
}

fn check_len(lattice: &Lattice, syndrome: &[bool]) -> Result<(), QccError> {
    if syndrome.len() != lattice.num_lights() {
        return Err(QccError::SyndromeLength {
            got: syndrome.len(),
            want: lattice.num_lights(),
        });
    }
    Ok(())
}

/// Variable layout shared by [`encode`] and [`Decoder`]: switches first,
/// then every light's helpers.
fn layout(lattice: &Lattice) -> (Vec<Var>, Vec<Vec<Var>>, u32) {
    let switch_vars: Vec<Var> = (0..lattice.num_switches).map(Var::from_index).collect();
    let mut next = lattice.num_switches as u32 + 1;
    let helpers = lattice
        .lights
        .iter()
        .map(|ss| {
            (1..ss.len())
                .map(|_| {
                    next += 1;
                    Var::new(next - 1)
                })
                .collect()
        })
        .collect();
    (switch_vars, helpers, next)
}

/// Builds the weighted instance for `syndrome` (true = light on).
pub fn encode(lattice: &Lattice, syndrome: &[bool]) -> Result<EncodedInstance, QccError> {
    check_len(lattice, syndrome)?;
    let (switch_vars, helpers, _) = layout(lattice);
    let mut instance = Instance::new();
    let mut first_clause = Vec::with_capacity(lattice.num_lights());
    for (l, ss) in lattice.lights.iter().enumerate() {
        let vs: Vec<Var> = ss.iter().map(|&s| switch_vars[s]).collect();
        for (i, (vars, rhs)) in chain(&vs, &helpers[l], syndrome[l]).into_iter().enumerate() {
            if i == 0 {
                first_clause.push(instance.hard_xor.len());
            }
            instance.add_xor(XorClause::normalize(vars.into_iter().map(Var::pos), rhs));
        }
    }
    for &v in &switch_vars {
        instance.add_soft([v.neg()], 1).expect("weight 1");
    }
    Ok(EncodedInstance {
        instance,
        switch_vars,
        helpers,
        first_clause,
    })
}

/// A minimum correction and its size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoding {
    pub switches: Vec<usize>,
    pub cost: u64,
}

/// An incremental decoding engine for one lattice. The static part of the
/// encoding is loaded once; each light's first clause carries a selector
/// `t_l`, as `t_l ⊕ v_1 ⊕ h_1 = 1`, and a light pattern is imposed by
/// assuming `¬t_l` (light on) or `t_l` (light off) for one solve.
#[derive(Debug, Clone)]
pub struct Decoder {
    lattice: Lattice,
    solver: MaxSatSolver,
    selectors: Vec<Var>,
    time_limit: Option<Duration>,
}

impl Decoder {
    pub fn new(lattice: &Lattice) -> Decoder {
        let (switch_vars, helpers, mut next) = layout(lattice);
        let mut solver = MaxSatSolver::new(MaxSatConfig::default());
        let mut selectors = Vec::with_capacity(lattice.num_lights());
        for (l, ss) in lattice.lights.iter().enumerate() {
            let vs: Vec<Var> = ss.iter().map(|&s| switch_vars[s]).collect();
            let t = Var::new(next);
            next += 1;
            selectors.push(t);
            for (i, (mut vars, rhs)) in chain(&vs, &helpers[l], true).into_iter().enumerate() {
                if i == 0 {
                    vars.push(t);
                }
                let lits: Vec<_> = vars.into_iter().map(Var::pos).collect();
                solver.add_hard_xor(&lits, rhs);
            }
        }
        for &v in &switch_vars {
            solver.add_soft_lit(v.neg(), 1).expect("weight 1");
        }
        Decoder {
            lattice: lattice.clone(),
            solver,
            selectors,
            time_limit: None,
        }
    }

    /// Wall-clock budget per decode; exhausting it yields [`QccError::Unknown`].
    pub fn set_time_limit(&mut self, limit: Option<Duration>) {
        self.time_limit = limit;
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn stats(&self) -> MaxSatStats {
        self.solver.stats()
    }

    pub fn decode(&mut self, syndrome: &[bool]) -> Result<Decoding, QccError> {
        check_len(&self.lattice, syndrome)?;
        for (&t, &on) in self.selectors.iter().zip(syndrome) {
            self.solver.assume(if on { t.neg() } else { t.pos() });
        }
        self.solver.config_mut().deadline = self.time_limit.map(|d| Instant::now() + d);
        let r = self.solver.solve()?;
        match r.verdict {
            Verdict::OptimumFound => {}
            Verdict::Unsatisfiable => return Err(QccError::Unsolvable),
            Verdict::Unknown => return Err(QccError::Unknown),
        }
        let m = r.model.expect("optimum carries a model");
        let switches: Vec<usize> = (0..self.lattice.num_switches)
            .filter(|&s| m.value(Var::from_index(s)) == Some(true))
            .collect();
        Ok(Decoding {
            cost: r.cost.expect("optimum carries a cost"),
            switches,
        })
    }
}

/// Decodes `syndrome` on `engine`, which must have been built for `lattice`.
pub fn decode(lattice: &Lattice, syndrome: &[bool], engine: &mut Decoder) -> Result<Decoding, QccError> {
    assert_eq!(lattice, engine.lattice(), "decoder built for a different lattice");
    engine.decode(syndrome)
}

/// Toggles the lights of `state` touched by each switch in `switches`.
pub fn apply(lattice: &Lattice, state: &mut [bool], switches: &[usize]) {
    let per_switch = lattice.switch_lights();
    for &s in switches {
        for &l in &per_switch[s] {
            state[l] ^= true;
        }
    }
}

/// Fewest switches producing `syndrome`, by enumerating subsets in order
/// of size. Intended for small lattices (at most 24 switches).
pub fn brute_force_min_correction(lattice: &Lattice, syndrome: &[bool]) -> Option<usize> {
    let n = lattice.num_switches;
    assert!(n <= 24, "too many switches to enumerate");
    let target: u64 = syndrome
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0, |m, (i, _)| m | 1 << i);
    let masks: Vec<u64> = lattice
        .switch_lights()
        .iter()
        .map(|ls| ls.iter().fold(0u64, |m, &l| m | 1 << l))
        .collect();
    assert!(lattice.num_lights() <= 64);
    (0u32..1 << n)
        .filter(|x| {
            let effect = (0..n).filter(|&s| x >> s & 1 == 1).fold(0u64, |m, s| m ^ masks[s]);
            effect == target
        })
        .map(|x| x.count_ones() as usize)
        .min()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub geometry: Geometry,
    /// Independent flip probability per switch.
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    /// Also compare every decode with [`brute_force_min_correction`].
    pub check_minimal: bool,
    /// Worker threads, one decoder each.
    pub jobs: usize,
}

impl SimConfig {
    pub fn triangle(d: usize, p: f64, trials: usize, seed: u64) -> SimConfig {
        SimConfig {
            geometry: Geometry::Triangle(d),
            p,
            trials,
            seed,
            check_minimal: false,
            jobs: 1,
        }
    }
}

/// Aggregates over one (geometry, p) run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub geometry: Geometry,
    pub p: f64,
    pub trials: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    /// Decodes that failed, did not reproduce the light pattern, or (when
    /// checked) were not minimal.
    pub failures: usize,
    pub mean_cost: f64,
    pub mean_flips: f64,
    /// SAT calls per decode: a machine-independent effort measure.
    pub mean_sat_calls: f64,
}

impl SimStats {
    /// Code distance or board size.
    pub fn size(&self) -> usize {
        match self.geometry {
            Geometry::Square(n) | Geometry::Triangle(n) => n,
        }
    }
}

struct Trial {
    ms: f64,
    failed: bool,
    cost: u64,
    flips: usize,
    sat_calls: u64,
}

fn run_trials(lattice: &Lattice, cfg: &SimConfig, trials: impl Iterator<Item = usize>) -> Vec<Trial> {
    let mut dec = Decoder::new(lattice);
    let mut out = Vec::new();
    for t in trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(t as u64);
        let flips: Vec<bool> = (0..lattice.num_switches).map(|_| rng.gen_bool(cfg.p)).collect();
        let syndrome = lattice.syndrome_of(&flips);
        let before = dec.stats().sat_calls;
        let start = Instant::now();
        let res = dec.decode(&syndrome);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let sat_calls = dec.stats().sat_calls - before;
        let n_flips = flips.iter().filter(|&&b| b).count();
        let (failed, cost) = match res {
            Ok(d) => {
                let mut state = syndrome.clone();
                apply(lattice, &mut state, &d.switches);
                let mut failed = state.iter().any(|&b| b) || d.cost as usize != d.switches.len();
                if cfg.check_minimal {
                    failed |= brute_force_min_correction(lattice, &syndrome) != Some(d.switches.len());
                }
                // the actual error is a valid correction, so the optimum is never larger
                failed |= d.switches.len() > n_flips;
                (failed, d.cost)
            }
            Err(_) => (true, 0),
        };
        out.push(Trial {
            ms,
            failed,
            cost,
            flips: n_flips,
            sat_calls,
        });
    }
    out
}

/// Random flips with probability `p`, decoded one trial at a time on a
/// reused engine; each correction is checked to reproduce the pattern.
pub fn simulate(cfg: &SimConfig) -> Result<SimStats, QccError> {
    let lattice = build_lattice(cfg.geometry)?;
    let jobs = cfg.jobs.max(1).min(cfg.trials.max(1));
    let trials: Vec<Trial> = if jobs == 1 {
        run_trials(&lattice, cfg, 0..cfg.trials)
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..jobs)
                .map(|w| {
                    let lattice = &lattice;
                    s.spawn(move || run_trials(lattice, cfg, (w..cfg.trials).step_by(jobs)))
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };
    let n = trials.len().max(1) as f64;
    let mut times: Vec<f64> = trials.iter().map(|t| t.ms).collect();
    times.sort_by(f64::total_cmp);
    let pct = |q: f64| {
        if times.is_empty() {
            0.0
        } else {
            times[((times.len() - 1) as f64 * q).round() as usize]
        }
    };
    Ok(SimStats {
        geometry: cfg.geometry,
        p: cfg.p,
        trials: trials.len(),
        mean_ms: times.iter().sum::<f64>() / n,
        median_ms: pct(0.5),
        p95_ms: pct(0.95),
        failures: trials.iter().filter(|t| t.failed).count(),
        mean_cost: trials.iter().map(|t| t.cost as f64).sum::<f64>() / n,
        mean_flips: trials.iter().map(|t| t.flips as f64).sum::<f64>() / n,
        mean_sat_calls: trials.iter().map(|t| t.sat_calls as f64).sum::<f64>() / n,
    })
}

/// Writes `d,p,trials,mean_ms,median_ms,p95_ms,failures` rows.
pub fn write_csv<W: io::Write>(out: W, stats: &[SimStats]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "p", "trials", "mean_ms", "median_ms", "p95_ms", "failures"])?;
    for s in stats {
        w.write_record([
            s.size().to_string(),
            s.p.to_string(),
            s.trials.to_string(),
            format!("{:.4}", s.mean_ms),
            format!("{:.4}", s.median_ms),
            format!("{:.4}", s.p95_ms),
            s.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
