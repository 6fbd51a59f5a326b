//! Split-step transmission of one format, optionally over a launch-power
//! grid. Guarded by the FFT-work budget so desk-scale mistakes fail fast
//! instead of running for hours.

use clap::Args;

use gs4d_ssfm::run_transmission;

use super::{check_budget, parse_f64_list, resolve_constellation, resolve_sim, snapshot_sim,
            CliError, Ctx};
use crate::table::Table;

#[derive(Args)]
pub struct SimulateArgs {
    /// Catalog format name or constellation CSV file.
    pub format: String,

    /// Comma-separated launch powers in dBm (default: the configured one).
    #[arg(long)]
    pub launch_dbm: Option<String>,

    /// FFT-work budget override for this run.
    #[arg(long)]
    pub budget: Option<f64>,
}

pub fn run(args: &SimulateArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let c = resolve_constellation(&args.format, None, ctx)?;
    let cfg = resolve_sim(ctx)?;
    let launches = match &args.launch_dbm {
        Some(list) => parse_f64_list("--launch-dbm", list)?,
        None => vec![cfg.launch_dbm],
    };
    check_budget(&cfg, launches.len(), args.budget, ctx)?;

    let distance_km = cfg.link.fiber.span_km * cfg.link.n_spans as f64;
    let mut table = Table::new(&["format", "launch_dbm", "distance_km", "eff_snr_db", "gmi"]);
    for &p in &launches {
        let mut run_cfg = cfg.clone();
        run_cfg.launch_dbm = p;
        let (snr, gmi) = run_transmission(&c, &run_cfg)?;
        table.row(vec![
            args.format.clone(),
            p.to_string(),
            distance_km.to_string(),
            snr.to_string(),
            gmi.to_string(),
        ]);
    }

    ctx.put("format", &args.format);
    snapshot_sim(&cfg, ctx);
    ctx.put(
        "launch_dbm",
        launches
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    let text = table.render(ctx.json);
    ctx.finish("simulate", cfg.seed, &text)
}
