use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use super::fuzz::{fuzz_instance, FuzzConfig};
use super::oracle::brute_force_optimum_capped;
use super::verify::{verify, Category, Reference, Verdict};
use crate::io::{parse_solution, write_wcnf_expanded, write_xwcnf};
use crate::model::{Instance, Verdict as Outcome};

/// Which file a solver is handed: native XOR lines or their CNF expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    #[default]
    Xwcnf,
    Wcnf,
}

/// An external solver: `program args... <instance path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverCmd {
    pub name: String,
    pub program: PathBuf,
    pub args: Vec<String>,
    pub format: InputFormat,
}

impl SolverCmd {
    /// Splits a command line on whitespace; the name defaults to the
    /// program's file name.
    pub fn from_command_line(line: &str) -> Option<SolverCmd> {
        let mut parts = line.split_whitespace();
        let program = PathBuf::from(parts.next()?);
        let name = program.file_name()?.to_string_lossy().into_owned();
        Some(SolverCmd {
            name,
            program,
            args: parts.map(String::from).collect(),
            format: InputFormat::Xwcnf,
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> SolverCmd {
        self.name = name.into();
        self
    }

    pub fn with_format(mut self, format: InputFormat) -> SolverCmd {
        self.format = format;
        self
    }
}

#[derive(Debug, Clone)]
pub struct DiffConfig {
    pub instances: usize,
    /// Instance `i` is drawn with seed `fuzz.seed + i`.
    pub fuzz: FuzzConfig,
    pub timeout: Duration,
    pub jobs: usize,
    /// Where non-correct runs are persisted, one directory per seed.
    pub quarantine: Option<PathBuf>,
    /// Instances with at most this many variables are checked against the
    /// brute-force oracle; 0 disables it.
    pub oracle_cap: u32,
}

impl Default for DiffConfig {
    fn default() -> DiffConfig {
        DiffConfig {
            instances: 100,
            fuzz: FuzzConfig::default(),
            timeout: Duration::from_secs(5),
            jobs: 1,
            quarantine: None,
            oracle_cap: 20,
        }
    }
}

/// Counts per category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally([usize; 6]);

impl Tally {
    pub fn get(&self, c: Category) -> usize {
        self.0[c as usize]
    }

    pub fn add(&mut self, c: Category) {
        self.0[c as usize] += 1;
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Runs that produced wrong or unverifiable answers, or crashed.
    /// Timeouts are not counted.
    pub fn errors(&self) -> usize {
        [
            Category::WrongOptimum,
            Category::WrongUnsat,
            Category::NotVerified,
            Category::Crash,
        ]
        .iter()
        .map(|&c| self.get(c))
        .sum()
    }
}

#[derive(Debug, Clone)]
pub struct FailureRecord {
    pub seed: u64,
    pub solver: String,
    pub verdict: Verdict,
    pub output: String,
}

#[derive(Debug, Clone, Default)]
pub struct DiffReport {
    pub solvers: Vec<(String, Tally)>,
    pub failures: Vec<FailureRecord>,
}

impl DiffReport {
    pub fn tally(&self, solver: &str) -> Option<&Tally> {
        self.solvers.iter().find(|(n, _)| n == solver).map(|(_, t)| t)
    }

    /// A fixed-width table with one row per solver.
    pub fn table(&self) -> String {
        let width = self.solvers.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(6);
        let mut out = format!("{:width$}", "solver");
        for c in Category::ALL {
            let _ = write!(out, "  {:>13}", c.label());
        }
        out.push('\n');
        for (name, t) in &self.solvers {
            let _ = write!(out, "{name:width$}");
            for c in Category::ALL {
                let _ = write!(out, "  {:>13}", t.get(c));
            }
            out.push('\n');
        }
        out
    }
}

enum Run {
    Exited(String, ExitStatus),
    TimedOut(String),
    SpawnFailed(io::Error),
}

/// Runs one process under a wall-clock limit, killing its whole process
/// group when the limit passes.
fn run_with_timeout(cmd: &SolverCmd, input: &Path, timeout: Duration) -> Run {
    let mut command = Command::new(&cmd.program);
    command
        .args(&cmd.args)
        .arg(input)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        command.process_group(0);
    }
    let mut child = match command.spawn() {
        Ok(c) => c,
        Err(e) => return Run::SpawnFailed(e),
    };
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    });
    let start = Instant::now();
    let mut nap = Duration::from_millis(1);
    let status = loop {
        match child.try_wait() {
            Ok(Some(st)) => break Some(st),
            Ok(None) => {}
            Err(_) => break None,
        }
        let elapsed = start.elapsed();
        if elapsed >= timeout {
            kill_group(&mut child);
            break None;
        }
        thread::sleep(nap.min(timeout - elapsed));
        nap = (nap * 2).min(Duration::from_millis(20));
    };
    let out = reader.join().unwrap_or_default();
    match status {
        Some(st) => Run::Exited(out, st),
        None => Run::TimedOut(out),
    }
}

fn kill_group(child: &mut Child) {
    #[cfg(unix)]
    // SAFETY: kill(2) with a negative pid signals the group we created.
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
    let _ = child.wait();
}

/// Cost of the output's model if it satisfies every hard clause.
fn verified_cost(inst: &Instance, output: &str) -> Option<u64> {
    let m = parse_solution(output).ok()?.model?;
    if !m.is_complete(inst.num_vars) {
        return None;
    }
    let m = m.truncated(inst.num_vars);
    if !inst.hard_satisfied(&m) {
        return None;
    }
    inst.cost(&m).ok()
}

struct InstanceResult {
    seed: u64,
    document: String,
    verdicts: Vec<(Verdict, String)>,
}

fn run_instance(solvers: &[SolverCmd], cfg: &DiffConfig, dir: &Path, seed: u64) -> io::Result<InstanceResult> {
    let inst = fuzz_instance(&cfg.fuzz.with_seed(seed));
    let native = write_xwcnf(&inst);
    let native_path = dir.join(format!("seed-{seed}.xwcnf"));
    fs::write(&native_path, &native)?;
    let mut expanded_path = None;

    let mut runs = Vec::with_capacity(solvers.len());
    for s in solvers {
        let path = match s.format {
            InputFormat::Xwcnf => native_path.clone(),
            InputFormat::Wcnf => match &expanded_path {
                Some(p) => p,
                None => {
                    let p = dir.join(format!("seed-{seed}.wcnf"));
                    fs::write(&p, write_wcnf_expanded(&inst))?;
                    expanded_path.insert(p)
                }
            }
            .clone(),
        };
        runs.push(run_with_timeout(s, &path, cfg.timeout));
    }
    let _ = fs::remove_file(&native_path);
    if let Some(p) = expanded_path {
        let _ = fs::remove_file(p);
    }

    let mut reference = Reference::Nothing;
    if inst.num_vars <= cfg.oracle_cap {
        if let Ok(r) = brute_force_optimum_capped(&inst, cfg.oracle_cap) {
            reference = match (r.verdict, r.cost) {
                (Outcome::OptimumFound, Some(c)) => Reference::Optimum(c),
                _ => Reference::Unsat,
            };
        }
    }
    if reference == Reference::Nothing {
        let best = runs
            .iter()
            .filter_map(|r| match r {
                Run::Exited(out, _) | Run::TimedOut(out) => verified_cost(&inst, out),
                Run::SpawnFailed(_) => None,
            })
            .min();
        if let Some(c) = best {
            reference = Reference::Feasible(c);
        }
    }

    let verdicts = runs
        .into_iter()
        .map(|r| match r {
            Run::SpawnFailed(e) => (
                Verdict {
                    category: Category::Crash,
                    details: format!("spawn failed: {e}"),
                },
                String::new(),
            ),
            Run::TimedOut(out) => (
                Verdict {
                    category: Category::Timeout,
                    details: "killed".into(),
                },
                out,
            ),
            Run::Exited(out, st) => {
                let mut v = verify(&inst, &out, reference);
                if v.category == Category::Crash {
                    v.details = format!("{} ({st})", v.details);
                }
                (v, out)
            }
        })
        .collect();
    Ok(InstanceResult {
        seed,
        document: native,
        verdicts,
    })
}

/// Generates `cfg.instances` instances, runs every solver on each in its own
/// process and classifies the outputs. A reference optimum comes from the
/// oracle on small instances, otherwise from the best model any solver
/// printed that checks out.
pub fn differential_run(solvers: &[SolverCmd], cfg: &DiffConfig) -> io::Result<DiffReport> {
    let dir = tempfile::tempdir()?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<InstanceResult>> = Mutex::new(Vec::with_capacity(cfg.instances));
    let first_err: Mutex<Option<io::Error>> = Mutex::new(None);
    thread::scope(|scope| {
        for _ in 0..cfg.jobs.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cfg.instances || first_err.lock().unwrap().is_some() {
                    break;
                }
                let seed = cfg.fuzz.seed.wrapping_add(i as u64);
                match run_instance(solvers, cfg, dir.path(), seed) {
                    Ok(r) => results.lock().unwrap().push(r),
                    Err(e) => {
                        first_err.lock().unwrap().get_or_insert(e);
                    }
                }
            });
        }
    });
    if let Some(e) = first_err.into_inner().unwrap() {
        return Err(e);
    }

    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|r| r.seed.wrapping_sub(cfg.fuzz.seed));
    let mut report = DiffReport {
        solvers: solvers.iter().map(|s| (s.name.clone(), Tally::default())).collect(),
        failures: Vec::new(),
    };
    for r in results {
        for (k, (v, out)) in r.verdicts.into_iter().enumerate() {
            report.solvers[k].1.add(v.category);
            if v.category != Category::Correct {
                let rec = FailureRecord {
                    seed: r.seed,
                    solver: solvers[k].name.clone(),
                    verdict: v,
                    output: out,
                };
                if let Some(q) = &cfg.quarantine {
                    quarantine(q, &r.document, &rec)?;
                }
                report.failures.push(rec);
            }
        }
    }
    Ok(report)
}

fn quarantine(root: &Path, document: &str, rec: &FailureRecord) -> io::Result<()> {
    let dir = root.join(format!("seed-{}", rec.seed));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("instance.xwcnf"), document)?;
    let name: String = rec
        .solver
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    fs::write(dir.join(format!("{name}.out")), &rec.output)?;
    fs::write(
        dir.join(format!("{name}.verdict")),
        format!(
            "seed {}\nsolver {}\ncategory {}\n{}\n",
            rec.seed, rec.solver, rec.verdict.category, rec.verdict.details
        ),
    )
}
