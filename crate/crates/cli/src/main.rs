//! `gs4d`: batch workflows over the shaping toolkit. Subcommands evaluate
//! GMI curves, run the shaping optimizer, sweep link reach, drive the
//! split-step simulator, and fit the NLI surrogate. Tabular results are CSV
//! (or JSON with --json); every file written through --out gets a sidecar
//! `<out>.manifest.json` recording the resolved run.

mod commands;
mod manifest;
mod table;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use commands::{calibrate, catalog, eval, optimize, reach, simulate, CliError, Ctx};

#[derive(Parser)]
#[command(name = "gs4d", version, about = "4D constellation shaping toolkit")]
struct Cli {
    /// Flat key = value config file; `#` starts a comment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every randomized stage; overrides the config file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file (default: stdout). Writing a file also writes
    /// `<out>.manifest.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Emit JSON arrays instead of CSV tables.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// GMI of a catalog format or constellation file at given SNRs, or the
    /// SNR threshold reaching a normalized-GMI target.
    Eval(eval::EvalArgs),
    /// Multi-restart geometric shaping under a structural constraint.
    Optimize(optimize::OptimizeArgs),
    /// Maximum reach per format at the 0.85m operating point.
    Reach(reach::ReachArgs),
    /// Split-step transmission of one format over the configured link.
    Simulate(simulate::SimulateArgs),
    /// Fit NLI surrogate coefficients from split-step launch sweeps.
    Calibrate(calibrate::CalibrateArgs),
    /// List the format catalog, or dump one format as CSV.
    Catalog(catalog::CatalogArgs),
}

/// The only environment variable honored: worker thread count.
fn init_threads() {
    if let Ok(v) = std::env::var("GS4D_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut ctx = Ctx::new(cli.config.as_deref(), cli.seed, cli.out.as_deref(), cli.json)?;
    let result = match cli.cmd {
        Cmd::Eval(a) => eval::run(&a, &mut ctx),
        Cmd::Optimize(a) => optimize::run(&a, &mut ctx),
        Cmd::Reach(a) => reach::run(&a, &mut ctx),
        Cmd::Simulate(a) => simulate::run(&a, &mut ctx),
        Cmd::Calibrate(a) => calibrate::run(&a, &mut ctx),
        Cmd::Catalog(a) => catalog::run(&a, &mut ctx),
    };
    if result.is_err() {
        ctx.warn_unused_keys();
    }
    result
}

fn main() {
    init_threads();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.msg);
        std::process::exit(e.code);
    }
}
