//! `verify`: run a verification scenario from a config file.
//!
//! Exit status: 0 when every case passed, 1 when some case failed, 2 for
//! configuration or I/O problems.

mod config;
mod export;
mod report;
mod scenarios;

use clap::Parser;
use config::ScenarioConfig;
use std::path::PathBuf;
use std::time::Instant;

/// Runs a verification scenario described by a config file and writes a
/// deterministic report plus plot-ready data files.
#[derive(Parser, Debug)]
#[command(name = "verify", version, about)]
struct Args {
    /// Scenario configuration (TOML).
    config: PathBuf,

    /// Output directory (overrides the config and VERIFY_OUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for concurrent cases (overrides VERIFY_JOBS).
    #[arg(long)]
    jobs: Option<usize>,

    /// RNG seed for randomized placements (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let args = Args::parse();
    let started = Instant::now();

    let config = match ScenarioConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    };

    // flags win over environment, environment over config
    let out_dir = args
        .out
        .or_else(|| std::env::var_os("VERIFY_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&config.output_dir));
    let jobs = args.jobs.or_else(|| {
        std::env::var("VERIFY_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    let seed = args.seed.unwrap_or(config.seed);

    let report = match scenarios::run(&config, seed, jobs) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    };

    let written = match export::export(&report, &out_dir) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    };

    let elapsed = started.elapsed();
    let mut summary = export::summary(&report);
    summary.push_str(&format!("wall clock: {elapsed:.2?}\n"));
    print!("{summary}");
    // the summary (with its timing) is human-readable only; report.json
    // stays byte-identical across reruns
    if let Err(e) = std::fs::write(out_dir.join("summary.txt"), &summary) {
        eprintln!("error: cannot write summary: {e}");
        std::process::exit(2);
    }
    for path in &written {
        eprintln!("wrote {}", path.display());
    }

    std::process::exit(if report.all_pass { 0 } else { 1 });
}
