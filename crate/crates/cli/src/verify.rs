use std::fs;
use std::io::Read;

use xorhs::io::parse_xwcnf;
use xorhs::model::Verdict as Outcome;
use xorhs::testkit::{brute_force_optimum, verify, Category, Reference};

use crate::{code, usage, VerifyArgs};

pub fn run(a: &VerifyArgs) -> u8 {
    let inst = match fs::read_to_string(&a.instance)
        .map_err(|e| e.to_string())
        .and_then(|t| parse_xwcnf(&t).map_err(|e| e.to_string()))
    {
        Ok(i) => i,
        Err(e) => return usage(format!("{}: {e}", a.instance.display())),
    };
    let output = if a.output.as_os_str() == "-" {
        let mut s = String::new();
        if let Err(e) = std::io::stdin().read_to_string(&mut s) {
            return usage(format!("stdin: {e}"));
        }
        s
    } else {
        match fs::read_to_string(&a.output) {
            Ok(s) => s,
            Err(e) => return usage(format!("{}: {e}", a.output.display())),
        }
    };
    let reference = if a.oracle {
        match brute_force_optimum(&inst) {
            Ok(r) if r.verdict == Outcome::OptimumFound => Reference::Optimum(r.cost.expect("cost")),
            Ok(_) => Reference::Unsat,
            Err(e) => return usage(e),
        }
    } else {
        Reference::Nothing
    };
    let v = verify(&inst, &output, reference);
    println!("{}: {}", v.category, v.details);
    if v.category == Category::Correct {
        code::OPTIMUM
    } else {
        code::INTERNAL
    }
}
