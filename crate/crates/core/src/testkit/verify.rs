use std::fmt;

use crate::io::{parse_solution, Status};
use crate::model::Instance;

/// Outcome classes for one solver run on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Correct,
    WrongOptimum,
    WrongUnsat,
    NotVerified,
    Crash,
    Timeout,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Correct,
        Category::WrongOptimum,
        Category::WrongUnsat,
        Category::NotVerified,
        Category::Crash,
        Category::Timeout,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::Correct => "correct",
            Category::WrongOptimum => "wrong optimum",
            Category::WrongUnsat => "wrong unsat",
            Category::NotVerified => "not verified",
            Category::Crash => "crash",
            Category::Timeout => "timeout",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub category: Category,
    pub details: String,
}

impl Verdict {
    fn new(category: Category, details: impl Into<String>) -> Verdict {
        Verdict {
            category,
            details: details.into(),
        }
    }
}

/// Independent knowledge about an instance: an oracle result, or the cost
/// of some model another solver produced and that checked out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reference {
    #[default]
    Nothing,
    Unsat,
    Optimum(u64),
    Feasible(u64),
}

impl Reference {
    fn known_cost(self) -> Option<u64> {
        match self {
            Reference::Optimum(c) | Reference::Feasible(c) => Some(c),
            _ => None,
        }
    }
}

/// Classifies solver output for `inst`. The model is re-evaluated from
/// scratch against every hard clause; the solver's own claims are only
/// compared, never trusted.
pub fn verify(inst: &Instance, output: &str, reference: Reference) -> Verdict {
    let report = match parse_solution(output) {
        Ok(r) => r,
        Err(e) => return Verdict::new(Category::Crash, format!("unparseable output: {e}")),
    };
    let checked = report.model.as_ref().map(|m| {
        let n = inst.num_vars;
        if !m.is_complete(n) {
            return Err(format!("model assigns {} of {} variables", m.num_vars().min(n), n));
        }
        let m = m.clone().truncated(n);
        if let Some(c) = inst.hard_cnf.iter().find(|c| !c.is_satisfied(&m)) {
            return Err(format!("model falsifies hard clause {:?}", dimacs(c.lits())));
        }
        if let Some(x) = inst.hard_xor.iter().find(|x| !x.is_satisfied(&m)) {
            let vars: Vec<u32> = x.vars().iter().map(|v| v.get()).collect();
            return Err(format!("model falsifies hard XOR {vars:?} = {}", x.rhs() as u8));
        }
        inst.cost(&m).map_err(|e| e.to_string())
    });

    match report.status {
        Status::Unsatisfiable => match reference.known_cost() {
            Some(c) => Verdict::new(Category::WrongUnsat, format!("a model of cost {c} exists")),
            None => Verdict::new(Category::Correct, "unsatisfiable"),
        },
        Status::Unknown | Status::Satisfiable => match checked {
            Some(Err(e)) => Verdict::new(Category::NotVerified, e),
            _ => Verdict::new(Category::Timeout, "no optimum proven"),
        },
        Status::OptimumFound => {
            let cost = match checked {
                None => return Verdict::new(Category::NotVerified, "no model printed"),
                Some(Err(e)) => return Verdict::new(Category::NotVerified, e),
                Some(Ok(c)) => c,
            };
            match report.cost {
                None => return Verdict::new(Category::NotVerified, "no cost printed"),
                Some(o) if o != cost => {
                    return Verdict::new(
                        Category::NotVerified,
                        format!("reported cost {o}, model has cost {cost}"),
                    )
                }
                _ => {}
            }
            match reference.known_cost() {
                Some(best) if best < cost => Verdict::new(
                    Category::WrongOptimum,
                    format!("claimed optimum {cost}, a model of cost {best} exists"),
                ),
                _ => Verdict::new(Category::Correct, format!("optimum {cost}")),
            }
        }
    }
}

fn dimacs(lits: &[crate::model::Lit]) -> Vec<i32> {
    lits.iter().map(|l| l.to_dimacs()).collect()
}
