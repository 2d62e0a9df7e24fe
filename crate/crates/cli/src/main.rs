use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod diff;
mod fuzz;
mod qcc;
mod solve;
mod verify;

/// Exit statuses shared by every subcommand.
pub mod code {
    pub const OPTIMUM: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const INTERNAL: u8 = 2;
    pub const OVERFLOW: u8 = 3;
    pub const SATISFIABLE: u8 = 10;
    pub const UNSAT: u8 = 20;
    pub const UNKNOWN: u8 = 30;
}

#[derive(Parser, Debug)]
#[command(name = "xorhs", version, about = "Weighted MaxSAT with native XOR constraints")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Solve an XWCNF file and print s/o/v lines.
    Solve(SolveArgs),
    /// Write random XWCNF instances.
    Fuzz(FuzzArgs),
    /// Check solver output against an instance.
    Verify(VerifyArgs),
    /// Run solvers on generated instances and tabulate the outcomes.
    Diff(DiffArgs),
    /// Find a minimum switch set for one light pattern.
    Decode(DecodeArgs),
    /// Random error simulation over code distances and error rates.
    Simulate(SimulateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedType {
    None,
    Cnf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum XorMode {
    Native,
    Expand,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub path: PathBuf,
    /// Wall-clock limit in seconds; the best model so far is printed on expiry.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long, value_enum, default_value_t = SeedType::None)]
    pub seedtype: SeedType,
    /// `expand` replaces every XOR by its CNF clauses before solving.
    #[arg(long, value_enum, default_value_t = XorMode::Native)]
    pub xor_mode: XorMode,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// 5-60 variables, 5-120 clauses.
    Default,
    /// At most `--max-vars` variables, for brute-force cross-checks.
    Small,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Profile::Default)]
    pub profile: Profile,
    #[arg(long, default_value_t = 16)]
    pub max_vars: u32,
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    #[arg(short, long, default_value_t = 1)]
    pub n: usize,
    /// Emit native `x h` lines; without it XORs are written as CNF.
    #[arg(long)]
    pub xor: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub gen: GenArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    /// Solver output; `-` reads standard input.
    pub output: PathBuf,
    /// Compare against the brute-force optimum (small instances only).
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug)]
pub struct DiffArgs {
    #[arg(short, long, default_value_t = 100)]
    pub n: usize,
    /// External solver command line, run as `<cmd> <instance>`; `name=cmd`
    /// sets the report name. Repeatable.
    #[arg(long = "solver")]
    pub solvers: Vec<String>,
    /// Like `--solver`, but the solver is handed the CNF-expanded file.
    #[arg(long = "solver-wcnf")]
    pub wcnf_solvers: Vec<String>,
    /// Leave this program's own solver out of the comparison.
    #[arg(long)]
    pub no_self: bool,
    /// Seconds per solver run.
    #[arg(long, default_value_t = 5.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Hand out CNF-expanded XORs instead of native `x h` lines.
    #[arg(long)]
    pub no_xor: bool,
    /// Directory for instances and outputs of non-correct runs.
    #[arg(long)]
    pub quarantine: Option<PathBuf>,
    /// Brute-force reference for instances up to this many variables.
    #[arg(long, default_value_t = 20)]
    pub oracle_cap: u32,
    #[command(flatten)]
    pub gen: GenArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryArg {
    Triangle,
    Square,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[arg(long, value_enum, default_value_t = GeometryArg::Triangle)]
    pub geometry: GeometryArg,
    /// Code distance (triangle) or board side (square).
    #[arg(short, long)]
    pub d: usize,
    /// Indices of the lights that are on.
    #[arg(long, value_delimiter = ',', conflicts_with = "flips")]
    pub lights: Vec<usize>,
    /// Indices of flipped switches; the light pattern is derived from them.
    #[arg(long, value_delimiter = ',')]
    pub flips: Vec<usize>,
    /// Also write the encoding of the pattern as XWCNF.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = GeometryArg::Triangle)]
    pub geometry: GeometryArg,
    #[arg(short, long, value_delimiter = ',', default_value = "3")]
    pub d: Vec<usize>,
    #[arg(short, long, value_delimiter = ',', default_value = "0.01")]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Compare every decode with an exhaustive search (small lattices).
    #[arg(long)]
    pub check_minimal: bool,
    /// CSV destination; without it the CSV goes to standard output.
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(code::USAGE),
            };
        }
    };
    let status = match cli.cmd {
        Cmd::Solve(a) => solve::run(&a),
        Cmd::Fuzz(a) => fuzz::run(&a),
        Cmd::Verify(a) => verify::run(&a),
        Cmd::Diff(a) => diff::run(&a),
        Cmd::Decode(a) => qcc::decode(&a),
        Cmd::Simulate(a) => qcc::simulate(&a),
    };
    ExitCode::from(status)
}

/// Prints an error to standard error and returns the usage exit status.
pub fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code::USAGE
}
