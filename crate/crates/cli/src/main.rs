//! Command-line front end: certified weight-one dimension tables, eigenform
//! q-expansions, the mod-p exception scan, dihedral counts, and cache
//! management.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod output;
mod runner;

#[derive(Parser)]
#[command(
    name = "weight1",
    about = "Weight-one cusp form spaces for Gamma_1(N) with character, in characteristic zero and mod p",
    version
)]
struct Cli {
    /// Cache directory (default: WEIGHT1_CACHE_DIR, else no persistent cache)
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, default_value = "tsv")]
    format: Format,
    /// Worker threads for independent (N, chi) jobs
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Certified dimensions of weight-one newform spaces per (N, character class)
    Dims {
        /// Level range A..B (inclusive), e.g. 23..60
        #[arg(long)]
        levels: String,
        /// Restrict to one character label, e.g. "2_2 13_3"
        #[arg(long = "char")]
        character: Option<String>,
        /// Precision: "auto" (certification bound) or an explicit integer
        #[arg(long, default_value = "auto")]
        prec: String,
        /// Also run the mod-p exception scan over the range
        #[arg(long)]
        modp: bool,
        /// Extra suspect primes for the scan
        #[arg(long, value_delimiter = ',')]
        suspect: Vec<u64>,
    },
    /// Eigenform q-expansions at one (N, character class)
    Qexp {
        #[arg(long)]
        level: u64,
        #[arg(long = "char")]
        character: String,
        #[arg(long, default_value = "auto")]
        prec: String,
        /// Compute the mod-p form at this prime instead of characteristic zero
        #[arg(long)]
        modp: Option<u64>,
        /// Index into the canonical list of primes above p (default 0)
        #[arg(long, default_value_t = 0)]
        lambda: usize,
    },
    /// Exhaustive mod-p exception scan (p > 2, p not dividing N)
    ModpScan {
        #[arg(long)]
        levels: String,
        /// Sweep bound for unconditional small primes
        #[arg(long, default_value_t = 97)]
        sweep: u64,
        #[arg(long, value_delimiter = ',')]
        suspect: Vec<u64>,
    },
    /// Dihedral representation counts and fingerprints per (N, chi)
    Dihedral {
        #[arg(long)]
        levels: String,
        #[arg(long = "char")]
        character: Option<String>,
    },
    /// Cache management
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    /// Populate the cache by running dims over a range
    Warm {
        #[arg(long)]
        levels: String,
    },
    /// Recompute checksums; corrupted entries are removed
    Verify,
    /// Remove all cache entries
    Evict,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("bad level range {:?}, expected A..B", s))?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad range start {:?}", a))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad range end {:?}", b))?;
    if a == 0 || b < a {
        return Err(format!("empty or invalid range {}..{}", a, b));
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cache_path = cli
        .cache
        .clone()
        .or_else(|| std::env::var_os("WEIGHT1_CACHE_DIR").map(PathBuf::from));
    if let Some(p) = &cache_path {
        weight1_core::cache::set_dir(Some(p));
    }
    if cli.jobs > 1 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    let json = cli.format == Format::Json;
    let code = match &cli.command {
        Command::Dims { levels, character, prec, modp, suspect } => {
            match parse_range(levels).and_then(|r| {
                runner::cmd_dims(r, character.as_deref(), prec, *modp, suspect, json, cli.jobs)
            }) {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {}", e);
                    3
                }
            }
        }
        Command::Qexp { level, character, prec, modp, lambda } => {
            match runner::cmd_qexp(*level, character, prec, *modp, *lambda, json) {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {}", e);
                    3
                }
            }
        }
        Command::ModpScan { levels, sweep, suspect } => {
            match parse_range(levels)
                .and_then(|r| runner::cmd_modp_scan(r, *sweep, suspect, json, cli.jobs))
            {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {}", e);
                    3
                }
            }
        }
        Command::Dihedral { levels, character } => {
            match parse_range(levels)
                .and_then(|r| runner::cmd_dihedral(r, character.as_deref(), json))
            {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {}", e);
                    3
                }
            }
        }
        Command::Cache { action } => match action {
            CacheAction::Warm { levels } => match parse_range(levels) {
                Ok(r) => runner::cmd_dims(r, None, "auto", false, &[], json, cli.jobs)
                    .unwrap_or(3),
                Err(e) => {
                    eprintln!("error: {}", e);
                    3
                }
            },
            CacheAction::Verify => {
                let (ok, bad) = weight1_core::cache::verify_all();
                println!("cache verify: {} ok, {} corrupt (removed)", ok, bad);
                0
            }
            CacheAction::Evict => {
                let n = weight1_core::cache::evict_all();
                println!("cache evict: {} entries removed", n);
                0
            }
        },
    };
    ExitCode::from(code)
}
