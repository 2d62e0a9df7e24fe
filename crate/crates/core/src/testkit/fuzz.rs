use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::io::XwcnfDocument;
use crate::model::{Instance, Lit, Var, XorClause};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FuzzConfigError {
    #[error("empty range for {0}")]
    EmptyRange(&'static str),
    #[error("at least 4 variables are needed for XOR clauses")]
    TooFewVars,
    #[error("probability {0} out of [0, 1]")]
    Probability(&'static str),
    #[error("weights must be positive")]
    ZeroWeight,
}

/// Generator settings. Every field participates in the draw, so an
/// identical config reproduces an identical instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub vars: RangeInclusive<u32>,
    pub hard_clauses: RangeInclusive<usize>,
    pub soft_clauses: RangeInclusive<usize>,
    pub hard_len: RangeInclusive<usize>,
    pub soft_len: RangeInclusive<usize>,
    pub weights: RangeInclusive<u64>,
    /// Chance that a weight is drawn log-uniformly from `[1, max_heavy_weight]`.
    pub heavy_weight_prob: f64,
    pub max_heavy_weight: u64,
    /// Native `x h` lines when set; otherwise the same XORs CNF-expanded.
    pub xor_enabled: bool,
    /// Fraction of hard constraints drawn as XORs of length 3 or 4.
    pub xor_fraction: f64,
    /// Chance that a soft constraint is an XOR behind an activation literal.
    pub soft_xor_prob: f64,
}

impl Default for FuzzConfig {
    fn default() -> FuzzConfig {
        FuzzConfig {
            seed: 0,
            vars: 5..=60,
            hard_clauses: 0..=60,
            soft_clauses: 5..=60,
            hard_len: 2..=4,
            soft_len: 1..=3,
            weights: 1..=100,
            heavy_weight_prob: 0.1,
            max_heavy_weight: 1 << 40,
            xor_enabled: true,
            xor_fraction: 0.3,
            soft_xor_prob: 0.1,
        }
    }
}

impl FuzzConfig {
    /// A profile small enough for the brute-force oracle.
    pub fn small(max_vars: u32) -> FuzzConfig {
        FuzzConfig {
            vars: 4.min(max_vars)..=max_vars,
            hard_clauses: 0..=(2 * max_vars as usize),
            soft_clauses: 1..=(2 * max_vars as usize),
            ..FuzzConfig::default()
        }
    }

    pub fn with_seed(&self, seed: u64) -> FuzzConfig {
        FuzzConfig { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), FuzzConfigError> {
        if self.vars.is_empty() || *self.vars.start() == 0 {
            return Err(FuzzConfigError::EmptyRange("vars"));
        }
        if self.hard_clauses.is_empty() {
            return Err(FuzzConfigError::EmptyRange("hard clauses"));
        }
        if self.soft_clauses.is_empty() {
            return Err(FuzzConfigError::EmptyRange("soft clauses"));
        }
        if self.hard_len.is_empty() || *self.hard_len.start() == 0 {
            return Err(FuzzConfigError::EmptyRange("hard clause length"));
        }
        if self.soft_len.is_empty() || *self.soft_len.start() == 0 {
            return Err(FuzzConfigError::EmptyRange("soft clause length"));
        }
        if self.weights.is_empty() {
            return Err(FuzzConfigError::EmptyRange("weights"));
        }
        if *self.weights.start() == 0 || self.max_heavy_weight == 0 {
            return Err(FuzzConfigError::ZeroWeight);
        }
        for (name, p) in [
            ("heavy weight", self.heavy_weight_prob),
            ("xor fraction", self.xor_fraction),
            ("soft xor", self.soft_xor_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(FuzzConfigError::Probability(name));
            }
        }
        let wants_xor = self.xor_fraction > 0.0 || self.soft_xor_prob > 0.0;
        if wants_xor && *self.vars.start() < 4 {
            return Err(FuzzConfigError::TooFewVars);
        }
        Ok(())
    }
}

fn draw_weight(rng: &mut ChaCha8Rng, cfg: &FuzzConfig) -> u64 {
    if cfg.heavy_weight_prob > 0.0 && rng.gen_bool(cfg.heavy_weight_prob) {
        let bits = 64 - cfg.max_heavy_weight.leading_zeros();
        let k = rng.gen_range(0..bits);
        let lo = 1u64 << k;
        let hi = if k + 1 >= 64 { u64::MAX } else { (1u64 << (k + 1)) - 1 };
        rng.gen_range(lo..=hi.min(cfg.max_heavy_weight))
    } else {
        rng.gen_range(cfg.weights.clone())
    }
}

fn draw_lits(rng: &mut ChaCha8Rng, n: u32, len: usize) -> Vec<Lit> {
    let len = len.min(n as usize);
    sample(rng, n as usize, len)
        .into_iter()
        .map(|i| Lit::new(Var::from_index(i), rng.gen_bool(0.5)))
        .collect()
}

/// Instance dimensions: problem variables, hard clause count, and for each
/// soft clause whether it is a soft XOR.
struct Shape {
    base: u32,
    hard: usize,
    soft_xor: Vec<bool>,
}

/// `cfg.vars` bounds the total variable count, so every soft XOR's
/// activation variable is taken out of the drawn total; soft XORs that would
/// leave fewer than four problem variables are drawn as plain soft clauses.
fn draw_shape(rng: &mut ChaCha8Rng, cfg: &FuzzConfig) -> Shape {
    let n = rng.gen_range(cfg.vars.clone());
    let hard = rng.gen_range(cfg.hard_clauses.clone());
    let ns = rng.gen_range(cfg.soft_clauses.clone());
    let mut soft_xor: Vec<bool> = (0..ns)
        .map(|_| cfg.soft_xor_prob > 0.0 && rng.gen_bool(cfg.soft_xor_prob))
        .collect();
    let mut k = soft_xor.iter().filter(|&&b| b).count() as u32;
    for f in soft_xor.iter_mut().rev() {
        if n >= 4 + k {
            break;
        }
        if std::mem::take(f) {
            k -= 1;
        }
    }
    Shape {
        base: n - k,
        hard,
        soft_xor,
    }
}

/// Draws a random weighted partial instance. Soft XORs become a hard XOR
/// over the constraint plus a fresh activation variable `a`, with soft unit
/// `¬a`. With `xor_enabled` off the draws are identical and every XOR is
/// expanded to CNF, so both modes have the same optimum.
///
/// Panics if the configuration does not validate.
pub fn fuzz_instance(cfg: &FuzzConfig) -> Instance {
    cfg.validate().expect("invalid fuzz configuration");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shape = draw_shape(&mut rng, cfg);
    let n = shape.base;
    let mut next_act = n + 1;
    let mut inst = Instance::new();

    for _ in 0..shape.hard {
        if cfg.xor_fraction > 0.0 && rng.gen_bool(cfg.xor_fraction) {
            let len = rng.gen_range(3..=4);
            let lits = draw_lits(&mut rng, n, len);
            let rhs = rng.gen_bool(0.5);
            inst.add_xor(XorClause::normalize(lits, rhs));
        } else {
            let len = rng.gen_range(cfg.hard_len.clone());
            let lits = draw_lits(&mut rng, n, len);
            inst.add_hard(lits);
        }
    }
    for &is_xor in &shape.soft_xor {
        let w = draw_weight(&mut rng, cfg);
        if is_xor {
            let len = rng.gen_range(3..=4);
            let mut lits = draw_lits(&mut rng, n, len);
            let rhs = rng.gen_bool(0.5);
            let act = Var::new(next_act);
            next_act += 1;
            lits.push(act.pos());
            inst.add_xor(XorClause::normalize(lits, rhs));
            inst.add_soft([act.neg()], w).expect("positive weight");
        } else {
            let len = rng.gen_range(cfg.soft_len.clone());
            let lits = draw_lits(&mut rng, n, len);
            inst.add_soft(lits, w).expect("positive weight");
        }
    }
    if cfg.xor_enabled {
        inst
    } else {
        inst.expand_xors()
    }
}

/// The instance as an XWCNF file, headed by comments recording the seed.
pub fn fuzz_document(cfg: &FuzzConfig) -> String {
    let mut doc = XwcnfDocument::from_instance(&fuzz_instance(cfg));
    doc.comments.push(format!("seed {}", cfg.seed));
    doc.comments
        .push(format!("xor {}", if cfg.xor_enabled { "native" } else { "expanded" }));
    doc.write()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{parse_xwcnf, XwcnfDocument};

    #[test]
    fn deterministic_bytes() {
        let cfg = FuzzConfig::default().with_seed(42);
        assert_eq!(fuzz_document(&cfg), fuzz_document(&cfg));
        assert_ne!(fuzz_document(&cfg), fuzz_document(&cfg.with_seed(43)));
    }

    #[test]
    fn modes_share_draws() {
        for seed in 0..50 {
            let on = FuzzConfig::default().with_seed(seed);
            let off = FuzzConfig {
                xor_enabled: false,
                ..on.clone()
            };
            let a = fuzz_instance(&on);
            let b = fuzz_instance(&off);
            assert!(b.hard_xor.is_empty());
            assert_eq!(a.expand_xors(), b);
            assert!(!fuzz_document(&off).contains("x h"));
        }
    }

    #[test]
    fn xor_lengths_and_soft_pattern() {
        let mut seen_soft_xor = false;
        for seed in 0..100 {
            let cfg = FuzzConfig::default().with_seed(seed);
            let inst = fuzz_instance(&cfg);
            let doc = XwcnfDocument::parse(&fuzz_document(&cfg)).unwrap();
            assert_eq!(doc.instance, inst);
            for x in &inst.hard_xor {
                assert!((3..=5).contains(&x.len()), "{x:?}");
            }
            // variables past the drawn count are activation literals: each sits
            // in exactly one XOR and one negated soft unit
            let n = draw_shape(&mut ChaCha8Rng::seed_from_u64(seed), &cfg).base;
            assert!(inst.num_vars <= *cfg.vars.end());
            for v in (n + 1..=inst.num_vars).map(Var::new) {
                seen_soft_xor = true;
                assert_eq!(inst.hard_xor.iter().filter(|x| x.vars().contains(&v)).count(), 1);
                assert!(!inst.hard_cnf.iter().any(|c| c.lits().iter().any(|l| l.var() == v)));
                let softs: Vec<_> = inst
                    .soft
                    .iter()
                    .filter(|s| s.clause.lits().iter().any(|l| l.var() == v))
                    .collect();
                assert_eq!(softs.len(), 1);
                assert_eq!(softs[0].clause.lits(), &[v.neg()]);
            }
        }
        assert!(seen_soft_xor);
    }

    #[test]
    fn small_profile_respects_cap() {
        for max in [4, 5, 8, 18] {
            let cfg = FuzzConfig {
                soft_xor_prob: 0.5,
                ..FuzzConfig::small(max)
            };
            for seed in 0..300 {
                let inst = fuzz_instance(&cfg.with_seed(seed));
                assert!(inst.num_vars <= max, "max {max} seed {seed}: {}", inst.num_vars);
            }
        }
    }

    #[test]
    fn heavy_weights_reach_high_range() {
        let cfg = FuzzConfig {
            heavy_weight_prob: 1.0,
            ..FuzzConfig::default()
        };
        let max = (0..100)
            .flat_map(|s| fuzz_instance(&cfg.with_seed(s)).soft)
            .map(|s| s.weight)
            .max()
            .unwrap();
        assert!(max > 1 << 30 && max <= 1 << 40);
    }

    #[test]
    fn documents_parse() {
        for seed in 0..200 {
            for xor in [true, false] {
                let cfg = FuzzConfig {
                    xor_enabled: xor,
                    ..FuzzConfig::default().with_seed(seed)
                };
                parse_xwcnf(&fuzz_document(&cfg)).unwrap();
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let c = FuzzConfig {
            vars: 3..=10,
            ..FuzzConfig::default()
        };
        assert_eq!(c.validate(), Err(FuzzConfigError::TooFewVars));
        let c = FuzzConfig {
            xor_fraction: 1.5,
            ..FuzzConfig::default()
        };
        assert!(c.validate().is_err());
        #[allow(clippy::reversed_empty_ranges)]
        let c = FuzzConfig {
            soft_clauses: 5..=4,
            ..FuzzConfig::default()
        };
        assert!(c.validate().is_err());
        let c = FuzzConfig {
            weights: 0..=4,
            ..FuzzConfig::default()
        };
        assert_eq!(c.validate(), Err(FuzzConfigError::ZeroWeight));
    }
}
