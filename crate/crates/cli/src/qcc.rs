use std::fs::File;
use std::io;

use xorhs::io::write_xwcnf;
use xorhs::qcc::{build_lattice, encode, simulate as run_sim, write_csv, Decoder, Geometry, QccError, SimConfig};

use crate::{code, usage, DecodeArgs, GeometryArg, SimulateArgs};

fn geometry(g: GeometryArg, d: usize) -> Geometry {
    match g {
        GeometryArg::Triangle => Geometry::Triangle(d),
        GeometryArg::Square => Geometry::Square(d),
    }
}

fn list(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub fn decode(a: &DecodeArgs) -> u8 {
    let lattice = match build_lattice(geometry(a.geometry, a.d)) {
        Ok(l) => l,
        Err(e) => return usage(e),
    };
    let mut syndrome = vec![false; lattice.num_lights()];
    if a.flips.is_empty() {
        for &l in &a.lights {
            if l >= syndrome.len() {
                return usage(format!("light {l} out of range (lattice has {})", syndrome.len()));
            }
            syndrome[l] ^= true;
        }
    } else {
        let mut flips = vec![false; lattice.num_switches];
        for &s in &a.flips {
            if s >= flips.len() {
                return usage(format!("switch {s} out of range (lattice has {})", flips.len()));
            }
            flips[s] ^= true;
        }
        syndrome = lattice.syndrome_of(&flips);
    }
    if let Some(path) = &a.emit {
        let enc = encode(&lattice, &syndrome).expect("pattern length matches");
        if let Err(e) = std::fs::write(path, write_xwcnf(&enc.instance)) {
            return usage(format!("{}: {e}", path.display()));
        }
    }
    let on: Vec<usize> = (0..syndrome.len()).filter(|&l| syndrome[l]).collect();
    println!("lights {} switches {}", lattice.num_lights(), lattice.num_switches);
    println!("on {}", list(&on));
    match Decoder::new(&lattice).decode(&syndrome) {
        Ok(d) => {
            println!("correction {}", list(&d.switches));
            println!("cost {}", d.cost);
            code::OPTIMUM
        }
        Err(QccError::Unsolvable) => {
            println!("unsolvable");
            code::UNSAT
        }
        Err(QccError::Unknown) => code::UNKNOWN,
        Err(e) => {
            eprintln!("error: {e}");
            code::INTERNAL
        }
    }
}

pub fn simulate(a: &SimulateArgs) -> u8 {
    for &d in &a.d {
        if let Err(e) = build_lattice(geometry(a.geometry, d)) {
            return usage(e);
        }
    }
    if let Some(p) = a.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return usage(format!("error rate {p} outside [0, 1]"));
    }
    let mut stats = Vec::new();
    for &d in &a.d {
        for &p in &a.p {
            let cfg = SimConfig {
                geometry: geometry(a.geometry, d),
                p,
                trials: a.trials,
                seed: a.seed,
                check_minimal: a.check_minimal,
                jobs: a.jobs,
            };
            match run_sim(&cfg) {
                Ok(s) => {
                    eprintln!(
                        "d={d} p={p}: median {:.4} ms, mean cost {:.3}, failures {}",
                        s.median_ms, s.mean_cost, s.failures
                    );
                    stats.push(s);
                }
                Err(e) => return usage(e),
            }
        }
    }
    let written = match &a.csv_out {
        Some(path) => File::create(path)
            .map_err(csv::Error::from)
            .and_then(|f| write_csv(f, &stats)),
        None => write_csv(io::stdout().lock(), &stats),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return code::USAGE;
    }
    if stats.iter().any(|s| s.failures > 0) {
        code::INTERNAL
    } else {
        code::OPTIMUM
    }
}
