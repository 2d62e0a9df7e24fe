use std::fs;
use std::time::{Duration, Instant};

use xorhs::io::{parse_xwcnf, write_solution};
use xorhs::maxsat::{solve_instance, MaxSatConfig, MaxSatError, Seeding};
use xorhs::model::Verdict;

use crate::{code, usage, SeedType, SolveArgs, XorMode};

pub fn run(a: &SolveArgs) -> u8 {
    let text = match fs::read_to_string(&a.path) {
        Ok(t) => t,
        Err(e) => return usage(format!("{}: {e}", a.path.display())),
    };
    let inst = match parse_xwcnf(&text) {
        Ok(i) => i,
        Err(e) => return usage(format!("{}: {e}", a.path.display())),
    };
    let inst = match a.xor_mode {
        XorMode::Native => inst,
        XorMode::Expand => inst.expand_xors(),
    };
    let timeout = match a.timeout {
        Some(t) if !(t.is_finite() && t >= 0.0) => return usage("timeout must be a non-negative number"),
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    let cfg = MaxSatConfig {
        deadline: timeout.map(|t| Instant::now() + t),
        seeding: match a.seedtype {
            SeedType::None => Seeding::None,
            SeedType::Cnf => Seeding::Cnf,
        },
        ..MaxSatConfig::default()
    };
    println!(
        "c vars {} hard {} xor {} soft {}",
        inst.num_vars,
        inst.hard_cnf.len(),
        inst.hard_xor.len(),
        inst.soft.len()
    );
    let r = match solve_instance(&inst, cfg) {
        Ok(r) => r,
        Err(e @ MaxSatError::WeightOverflow) => {
            eprintln!("error: {e}");
            println!("c {e}");
            return code::OVERFLOW;
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("c internal error: {e}");
            return code::INTERNAL;
        }
    };
    print!("{}", write_solution(&r, inst.num_vars));
    match (r.verdict, &r.model) {
        (Verdict::OptimumFound, _) => code::OPTIMUM,
        (Verdict::Unsatisfiable, _) => code::UNSAT,
        (Verdict::Unknown, Some(_)) => code::SATISFIABLE,
        (Verdict::Unknown, None) => code::UNKNOWN,
    }
}
