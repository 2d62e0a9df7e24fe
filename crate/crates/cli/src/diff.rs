use std::env;
use std::path::{Path, PathBuf};
use std::time::Duration;

use xorhs::testkit::{differential_run, DiffConfig, InputFormat, SolverCmd};

use crate::{code, usage, DiffArgs};

fn on_path(program: &Path) -> bool {
    if program.components().count() > 1 {
        return program.is_file();
    }
    env::var_os("PATH")
        .map(|p| env::split_paths(&p).any(|d| d.join(program).is_file()))
        .unwrap_or(false)
}

/// `name=cmd args...` or `cmd args...`, split with shell quoting rules.
fn parse_solver(spec: &str, format: InputFormat) -> Result<SolverCmd, String> {
    let (name, line) = match spec.split_once('=') {
        Some((n, rest)) if !n.contains(char::is_whitespace) && !n.contains('/') => (Some(n), rest),
        _ => (None, spec),
    };
    let words = shell_words::split(line).map_err(|e| format!("solver command `{spec}`: {e}"))?;
    let Some((program, args)) = words.split_first() else {
        return Err(format!("empty solver command `{spec}`"));
    };
    let program = PathBuf::from(program);
    if !on_path(&program) {
        return Err(format!("solver binary not found: {}", program.display()));
    }
    let name = match name {
        Some(n) => n.to_string(),
        None => program
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    Ok(SolverCmd {
        name,
        program,
        args: args.to_vec(),
        format,
    })
}

pub fn run(a: &DiffArgs) -> u8 {
    let fuzz = match crate::fuzz::config(&a.gen, !a.no_xor) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    if !(a.timeout.is_finite() && a.timeout > 0.0) {
        return usage("timeout must be positive");
    }
    let mut solvers = Vec::new();
    if !a.no_self {
        let exe: PathBuf = match env::current_exe() {
            Ok(p) => p,
            Err(e) => return usage(format!("cannot locate own executable: {e}")),
        };
        solvers.push(SolverCmd {
            name: "xorhs".into(),
            program: exe,
            args: vec!["solve".into()],
            format: InputFormat::Xwcnf,
        });
    }
    for (specs, format) in [(&a.solvers, InputFormat::Xwcnf), (&a.wcnf_solvers, InputFormat::Wcnf)] {
        for s in specs {
            match parse_solver(s, format) {
                Ok(c) => solvers.push(c),
                Err(e) => return usage(e),
            }
        }
    }
    if solvers.is_empty() {
        return usage("no solvers to run");
    }
    let mut names: Vec<&str> = solvers.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return usage("solver names must be distinct; use name=cmd");
    }
    let cfg = DiffConfig {
        instances: a.n,
        fuzz,
        timeout: Duration::from_secs_f64(a.timeout),
        jobs: a.jobs.max(1),
        quarantine: a.quarantine.clone(),
        oracle_cap: a.oracle_cap,
    };
    let report = match differential_run(&solvers, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return code::INTERNAL;
        }
    };
    print!("{}", report.table());
    for f in &report.failures {
        println!(
            "c seed {} {}: {}: {}",
            f.seed, f.solver, f.verdict.category, f.verdict.details
        );
    }
    if report.solvers.iter().any(|(_, t)| t.errors() > 0) {
        code::INTERNAL
    } else {
        code::OPTIMUM
    }
}
