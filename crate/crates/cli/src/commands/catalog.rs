//! Catalog access: a summary table of every built-in format, or a full CSV
//! dump of one format for use as input elsewhere.

use clap::Args;

use gs4d_core::catalog::{build_catalog_format, CATALOG_NAMES};
use gs4d_core::io;

use super::{CliError, Ctx};
use crate::table::Table;

#[derive(Args)]
pub struct CatalogArgs {
    /// Dump this format as constellation CSV instead of listing all.
    pub name: Option<String>,

    /// Ring ratio r1/r2 for the two-amplitude formats.
    #[arg(long)]
    pub ring_ratio: Option<f64>,
}

pub fn run(args: &CatalogArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let seed = ctx.seed()?;
    if let Some(r) = args.ring_ratio {
        ctx.put("ring_ratio", r);
    }
    let text = match &args.name {
        Some(name) => {
            ctx.put("name", name);
            let c = match build_catalog_format(name, args.ring_ratio) {
                Err(gs4d_core::Error::UnknownFormat(_)) => {
                    build_catalog_format(&name.to_uppercase(), args.ring_ratio)?
                }
                other => other?,
            };
            io::constellation_to_csv(&c)
        }
        None => {
            let mut table = Table::new(&["name", "m", "points", "kurt_excess", "cross4"]);
            for name in CATALOG_NAMES {
                let c = build_catalog_format(name, args.ring_ratio)?;
                let mom = c.moments()?;
                table.row(vec![
                    name.to_string(),
                    c.bits().to_string(),
                    c.n_points().to_string(),
                    mom.kurt_excess.to_string(),
                    mom.cross4.to_string(),
                ]);
            }
            table.render(ctx.json)
        }
    };
    ctx.finish("catalog", seed, &text)
}
