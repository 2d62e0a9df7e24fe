//! Incremental weighted MaxSAT with native XOR clauses.
//!
//! - [`model`]: literals, clauses, XOR clauses, instances, assignments.
//! - [`cdcl`]: incremental CDCL SAT solver with an attached XOR engine.
//! - [`gauss`]: GF(2) elimination over the XOR clauses.
//! - [`hs`]: exact minimum-cost hitting sets.
//! - [`maxsat`]: implicit-hitting-set MaxSAT engine and its incremental API.
//! - [`io`]: XWCNF reading/writing and solution files.
//! - [`testkit`]: fuzzer, brute-force oracle, verifier, differential runner.
//! - [`qcc`]: color-code decoding via MaxSAT.

pub mod cdcl;
pub mod gauss;
pub mod hs;
pub mod io;
pub mod maxsat;
pub mod model;
pub mod qcc;
pub mod testkit;
