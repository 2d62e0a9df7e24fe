use std::fs;

use xorhs::testkit::{fuzz_document, FuzzConfig};

use crate::{code, usage, FuzzArgs, GenArgs, Profile};

/// The generator settings selected by the shared flags.
pub fn config(g: &GenArgs, xor: bool) -> Result<FuzzConfig, String> {
    let base = match g.profile {
        Profile::Default => FuzzConfig::default(),
        Profile::Small => {
            if g.max_vars < 4 {
                return Err("--max-vars must be at least 4".into());
            }
            FuzzConfig::small(g.max_vars)
        }
    };
    let cfg = FuzzConfig {
        seed: g.seed,
        xor_enabled: xor,
        ..base
    };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

pub fn run(a: &FuzzArgs) -> u8 {
    let cfg = match config(&a.gen, a.xor) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    if let Err(e) = fs::create_dir_all(&a.out) {
        return usage(format!("{}: {e}", a.out.display()));
    }
    for i in 0..a.n {
        let seed = cfg.seed.wrapping_add(i as u64);
        let path = a.out.join(format!("seed-{seed:03}.xwcnf"));
        if let Err(e) = fs::write(&path, fuzz_document(&cfg.with_seed(seed))) {
            return usage(format!("{}: {e}", path.display()));
        }
        println!("{}", path.display());
    }
    code::OPTIMUM
}
