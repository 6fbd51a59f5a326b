//! Surrogate calibration: launch-power sweeps through the split-step engine
//! find each format's optimum effective SNR, and a least-squares fit turns
//! those optima into NLI surrogate coefficients. Output is a JSON parameter
//! set ready for the `nli_*` config keys.

use clap::Args;
use serde_json::json;

use gs4d_core::linkmodel::{calibrate_surrogate, CalibrationSample};
use gs4d_core::NliSurrogateParams;
use gs4d_ssfm::{run_transmission, SimConfig};

use super::{check_budget, parse_f64_list, resolve_constellation, resolve_sim, snapshot_sim,
            CliError, Ctx};

#[derive(Args)]
pub struct CalibrateArgs {
    /// Catalog format names or constellation CSV files; the fit needs at
    /// least three with distinct kurtosis.
    #[arg(required = true)]
    pub formats: Vec<String>,

    /// Launch-power sweep grid in dBm (uniform spacing recommended).
    #[arg(long, default_value = "-2,-1,0,1,2,3,4,5,6")]
    pub launch_dbm: String,

    /// FFT-work budget override for this run.
    #[arg(long)]
    pub budget: Option<f64>,
}

/// Quadratic-vertex refinement of a sweep's best point. Falls back to the
/// raw grid maximum at the edges or under upward curvature.
pub fn refine_optimum(p_dbm: &[f64], snr_db: &[f64]) -> (f64, f64) {
    let mut best = 0usize;
    for (i, &v) in snr_db.iter().enumerate() {
        if v > snr_db[best] {
            best = i;
        }
    }
    if best == 0 || best == snr_db.len() - 1 {
        return (p_dbm[best], snr_db[best]);
    }
    let (y0, y1, y2) = (snr_db[best - 1], snr_db[best], snr_db[best + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return (p_dbm[best], y1);
    }
    let d = 0.5 * (y0 - y2) / denom;
    let h = 0.5 * (p_dbm[best + 1] - p_dbm[best - 1]);
    (p_dbm[best] + d * h, y1 - 0.25 * (y0 - y2) * d)
}

/// Sweeps launch power and returns the refined (p_opt_dbm, snr_opt_db).
pub fn sweep_optimum(
    c: &gs4d_core::LabeledConstellation,
    cfg: &SimConfig,
    grid: &[f64],
) -> Result<(f64, f64), CliError> {
    let mut snrs = Vec::with_capacity(grid.len());
    for &p in grid {
        let mut run_cfg = cfg.clone();
        run_cfg.launch_dbm = p;
        snrs.push(run_transmission(c, &run_cfg)?.0);
    }
    Ok(refine_optimum(grid, &snrs))
}

pub fn run(args: &CalibrateArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = resolve_sim(ctx)?;
    let grid = parse_f64_list("--launch-dbm", &args.launch_dbm)?;
    check_budget(&cfg, grid.len() * args.formats.len(), args.budget, ctx)?;
    let epsilon = ctx
        .config
        .get_f64("nli_epsilon")?
        .unwrap_or_else(|| NliSurrogateParams::default().epsilon);

    let mut samples = Vec::new();
    let mut sample_rows = Vec::new();
    for name in &args.formats {
        let c = resolve_constellation(name, None, ctx)?.normalize_power()?;
        let (p_opt, snr_opt) = sweep_optimum(&c, &cfg, &grid)?;
        let mom = c.moments()?;
        ctx.note(&format!(
            "{name}: optimum {snr_opt:.3} dB at {p_opt:.2} dBm (kurtosis excess {:.3})",
            mom.kurt_excess
        ));
        samples.push(CalibrationSample {
            moments: mom,
            snr_opt_db: snr_opt,
        });
        sample_rows.push(json!({
            "format": name,
            "kurt_excess": mom.kurt_excess,
            "cross4": mom.cross4,
            "p_opt_dbm": p_opt,
            "snr_opt_db": snr_opt,
        }));
    }

    let fit = calibrate_surrogate(&samples, &cfg.link, epsilon)?;
    let body = serde_json::to_string_pretty(&json!({
        "nli_eta0": fit.params.eta0,
        "nli_k_kurt": fit.params.k_kurt,
        "nli_k_cross": fit.params.k_cross,
        "nli_epsilon": fit.params.epsilon,
        "residuals": fit.residuals,
        "samples": sample_rows,
    }))
    .expect("fit serializes");

    ctx.put("formats", args.formats.join(","));
    ctx.put("launch_dbm", &args.launch_dbm);
    ctx.put("nli_epsilon", epsilon);
    snapshot_sim(&cfg, ctx);
    let mut text = body;
    text.push('\n');
    ctx.finish("calibrate", cfg.seed, &text)
}
