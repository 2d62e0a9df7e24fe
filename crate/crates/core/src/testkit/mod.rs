//! Testing infrastructure shipped with the library: a seeded instance
//! generator, a brute-force oracle, an output verifier and a differential
//! runner that drives external solver processes.

mod diff;
mod fuzz;
mod oracle;
mod verify;

pub use diff::{differential_run, DiffConfig, DiffReport, FailureRecord, InputFormat, SolverCmd, Tally};
pub use fuzz::{fuzz_document, fuzz_instance, FuzzConfig, FuzzConfigError};
pub use oracle::{brute_force_optimum, brute_force_optimum_capped, OracleError, ORACLE_VAR_CAP};
pub use verify::{verify, Category, Reference, Verdict};
