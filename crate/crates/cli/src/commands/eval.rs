//! GMI evaluation: a list of SNR points, or a bisection for the SNR where
//! normalized GMI crosses a target (the SD-FEC operating point).

use clap::{Args, ValueEnum};

use gs4d_core::gmi::sigma_for_snr_db;
use gs4d_core::{gauss_hermite_rule, gmi_gh, gmi_mc, snr_for_target_gmi};

use super::{parse_f64_list, resolve_constellation, CliError, Ctx};
use crate::table::Table;

#[derive(ValueEnum, Clone, Copy, PartialEq)]
pub enum Method {
    /// Gauss-Hermite quadrature (deterministic).
    Gh,
    /// Monte Carlo with a seeded sample stream.
    Mc,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Catalog format name or constellation CSV file.
    pub format: String,

    /// Comma-separated SNR list in dB, e.g. "4,8,12,16".
    #[arg(long)]
    pub snr_db: Option<String>,

    /// Find the SNR where GMI/m reaches this value (exclusive with --snr-db).
    #[arg(long)]
    pub target_ngmi: Option<f64>,

    #[arg(long, value_enum, default_value = "gh")]
    pub method: Method,

    /// Gauss-Hermite nodes per real dimension.
    #[arg(long, default_value_t = 10)]
    pub rule_order: usize,

    /// Sample count for --method mc (default 1000000).
    #[arg(long)]
    pub mc_samples: Option<usize>,
}

pub fn run(args: &EvalArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let seed = ctx.seed()?;
    if args.mc_samples.is_some() && args.method == Method::Gh {
        return Err(CliError::input(
            "--mc-samples only applies with --method mc",
        ));
    }
    let mc_samples = args.mc_samples.unwrap_or(1_000_000);
    let c = resolve_constellation(&args.format, None, ctx)?.normalize_power()?;
    let rule = gauss_hermite_rule(args.rule_order)?;
    let m = c.bits() as f64;

    let snrs: Vec<f64> = match (&args.snr_db, args.target_ngmi) {
        (Some(list), None) => parse_f64_list("--snr-db", list)?,
        (None, Some(t)) => {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::input(format!(
                    "--target-ngmi must be in (0, 1), got {t}"
                )));
            }
            vec![snr_for_target_gmi(&c, t * m, &rule)?]
        }
        _ => {
            return Err(CliError::input(
                "exactly one of --snr-db and --target-ngmi is required",
            ))
        }
    };

    let mut table = Table::new(&["snr_db", "gmi", "ngmi"]);
    for &snr in &snrs {
        let sigma = sigma_for_snr_db(snr);
        let est = match args.method {
            Method::Gh => gmi_gh(&c, sigma, &rule)?,
            Method::Mc => gmi_mc(&c, sigma, mc_samples, seed)?,
        };
        table.row(vec![
            snr.to_string(),
            est.value.to_string(),
            (est.value / m).to_string(),
        ]);
    }

    ctx.put("format", &args.format);
    ctx.put("method", if args.method == Method::Gh { "gh" } else { "mc" });
    ctx.put("rule_order", args.rule_order);
    if args.method == Method::Mc {
        ctx.put("mc_samples", mc_samples);
    }
    match (&args.snr_db, args.target_ngmi) {
        (Some(list), _) => ctx.put("snr_db", list),
        (_, Some(t)) => ctx.put("target_ngmi", t),
        _ => unreachable!(),
    }
    let text = table.render(ctx.json);
    ctx.finish("eval", seed, &text)
}
