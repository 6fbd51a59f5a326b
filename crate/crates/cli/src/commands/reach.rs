//! Reach sweep: per-format maximum distance holding normalized GMI at the
//! operating point, on the configured link with the NLI surrogate. Formats
//! sharing a bit count also get pairwise percentage reach differences.

use clap::Args;

use gs4d_core::config::link_from_config;
use gs4d_core::linkmodel::max_reach_at;
use gs4d_core::gauss_hermite_rule;

use super::{nli_from_config, resolve_constellation, snapshot_link, snapshot_nli, CliError, Ctx};
use crate::table::Table;

#[derive(Args)]
pub struct ReachArgs {
    /// Catalog format names or constellation CSV files.
    #[arg(required = true)]
    pub formats: Vec<String>,

    /// Normalized-GMI operating point.
    #[arg(long, default_value_t = 0.85)]
    pub target_ngmi: f64,

    #[arg(long, default_value_t = 10)]
    pub rule_order: usize,
}

pub fn run(args: &ReachArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    if !(args.target_ngmi > 0.0 && args.target_ngmi < 1.0) {
        return Err(CliError::input(format!(
            "--target-ngmi must be in (0, 1), got {}",
            args.target_ngmi
        )));
    }
    let seed = ctx.seed()?;
    let link = link_from_config(&mut ctx.config)?;
    let nli = nli_from_config(&mut ctx.config)?;
    let rule = gauss_hermite_rule(args.rule_order)?;

    let mut table = Table::new(&[
        "format",
        "m",
        "n_spans",
        "distance_km",
        "snr_opt_db",
        "gmi",
        "ngmi",
    ]);
    let mut rows = Vec::new();
    for name in &args.formats {
        let c = resolve_constellation(name, None, ctx)?.normalize_power()?;
        let m = c.bits();
        let r = max_reach_at(&c, &link, &nli, &rule, args.target_ngmi * m as f64)?;
        table.row(vec![
            name.clone(),
            m.to_string(),
            r.n_spans.to_string(),
            r.distance_km.to_string(),
            r.snr_opt_db.to_string(),
            r.gmi_at_reach.to_string(),
            (r.gmi_at_reach / m as f64).to_string(),
        ]);
        rows.push((name.clone(), m, r.distance_km));
    }

    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (na, ma, da) = &rows[i];
            let (nb, mb, db) = &rows[j];
            if ma == mb {
                let pct = (da - db) / db * 100.0;
                ctx.note(&format!("{na} vs {nb} (m={ma}): {pct:+.1}% reach"));
            }
        }
    }

    ctx.put("formats", args.formats.join(","));
    ctx.put("target_ngmi", args.target_ngmi);
    ctx.put("rule_order", args.rule_order);
    snapshot_link(&link, ctx);
    snapshot_nli(&nli, ctx);
    let text = table.render(ctx.json);
    ctx.finish("reach", seed, &text)
}
