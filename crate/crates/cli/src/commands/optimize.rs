//! Shaping search. Writes the winning constellation as CSV plus a
//! `<out>.trace.json` sidecar with the objective trajectory; stdout gets a
//! one-line summary. Identical seed and parameters give identical bytes.

use clap::{Args, ValueEnum};
use serde_json::json;
use std::path::Path;

use gs4d_core::gmi::sigma_for_snr_db;
use gs4d_core::optimizer::{
    label_swap_search, optimize_awgn, optimize_model, Constraint, Objective, OptimizerConfig,
};
use gs4d_core::{gauss_hermite_rule, io, snr_opt, LaunchOptimum};

use super::{nli_from_config, snapshot_link, snapshot_nli, CliError, Ctx};

#[derive(ValueEnum, Clone, Copy, PartialEq)]
pub enum ConstraintArg {
    /// Free coordinates (labels fixed).
    None,
    /// Orthant-symmetric: 16 sign reflections of a first-orthant seed.
    Os,
    /// Constant modulus: every point on the radius-sqrt(2) hypersphere.
    Cm,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
pub enum ObjectiveArg {
    /// GMI at a fixed AWGN SNR (--snr-db).
    Awgn,
    /// GMI at each candidate's own optimum launch on the configured link.
    Model,
}

#[derive(Args)]
pub struct OptimizeArgs {
    /// Bits per 4D symbol; the constellation has 2^m points.
    #[arg(long)]
    pub m: usize,

    #[arg(long, value_enum, default_value = "none")]
    pub constraint: ConstraintArg,

    #[arg(long, value_enum, default_value = "awgn")]
    pub objective: ObjectiveArg,

    /// Operating SNR in dB (required for --objective awgn).
    #[arg(long)]
    pub snr_db: Option<f64>,

    #[arg(long, default_value_t = 8)]
    pub restarts: usize,

    #[arg(long, default_value_t = 150)]
    pub max_iters: usize,

    /// Gauss-Hermite nodes per real dimension for in-loop objectives.
    #[arg(long, default_value_t = 6)]
    pub rule_order: usize,

    #[arg(long, default_value_t = 0.1)]
    pub step_init: f64,

    #[arg(long, default_value_t = 3e-5)]
    pub conv_tol: f64,

    /// Follow the coordinate search with a pairwise label-swap pass.
    #[arg(long, default_value_t = false)]
    pub label_swaps: bool,
}

pub fn run(args: &OptimizeArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let out = ctx
        .out
        .clone()
        .ok_or_else(|| CliError::input("optimize requires --out for the constellation file"))?;
    let seed = ctx.seed()?;
    let rule = gauss_hermite_rule(args.rule_order)?;

    let constraint = match args.constraint {
        ConstraintArg::None => Constraint::Unconstrained,
        ConstraintArg::Os => Constraint::OrthantSymmetric,
        ConstraintArg::Cm => Constraint::ConstantModulus,
    };
    let objective = match args.objective {
        ObjectiveArg::Awgn => {
            let snr = args.snr_db.ok_or_else(|| {
                CliError::input("--objective awgn requires --snr-db")
            })?;
            ctx.put("snr_db", snr);
            Objective::AwgnSnr(snr)
        }
        ObjectiveArg::Model => {
            let link = gs4d_core::config::link_from_config(&mut ctx.config)?;
            let nli = nli_from_config(&mut ctx.config)?;
            snapshot_link(&link, ctx);
            snapshot_nli(&nli, ctx);
            Objective::LinkModel { link, nli }
        }
    };

    let cfg = OptimizerConfig {
        m_bits: args.m,
        constraint,
        objective: objective.clone(),
        restarts: args.restarts,
        max_iters: args.max_iters,
        step_init: args.step_init,
        conv_tol: args.conv_tol,
        seed,
        rule,
    };
    let (mut best, trace) = match args.objective {
        ObjectiveArg::Awgn => optimize_awgn(&cfg)?,
        ObjectiveArg::Model => optimize_model(&cfg)?,
    };

    if args.label_swaps {
        let sigma = match &objective {
            Objective::AwgnSnr(snr) => Some(sigma_for_snr_db(*snr)),
            Objective::LinkModel { link, nli } => match snr_opt(&best, link, nli)? {
                LaunchOptimum::Finite { snr_db, .. } => Some(sigma_for_snr_db(snr_db)),
                LaunchOptimum::LinearRegime => None,
            },
        };
        match sigma {
            Some(s) => best = label_swap_search(&best, s, &cfg.rule, seed)?,
            None => ctx.note("label swaps skipped: objective is SNR-saturated"),
        }
    }

    ctx.put("m", args.m);
    ctx.put(
        "constraint",
        match args.constraint {
            ConstraintArg::None => "none",
            ConstraintArg::Os => "os",
            ConstraintArg::Cm => "cm",
        },
    );
    ctx.put(
        "objective",
        if args.objective == ObjectiveArg::Awgn {
            "awgn"
        } else {
            "model"
        },
    );
    ctx.put("restarts", args.restarts);
    ctx.put("max_iters", args.max_iters);
    ctx.put("rule_order", args.rule_order);
    ctx.put("step_init", args.step_init);
    ctx.put("conv_tol", args.conv_tol);
    ctx.put("label_swaps", args.label_swaps);

    write_trace(&out, &trace)?;
    ctx.note(&format!(
        "final objective: {} bits ({}, restart {})",
        trace.final_objective, trace.termination, trace.restart_index
    ));
    let text = io::constellation_to_csv(&best);
    ctx.finish("optimize", seed, &text)
}

/// Trace sidecar. Wall time stays out so that equal-seed reruns produce
/// byte-equal files; the manifest carries timing.
fn write_trace(out: &Path, trace: &gs4d_core::optimizer::OptimizationTrace) -> Result<(), CliError> {
    let body = serde_json::to_string_pretty(&json!({
        "final_objective": trace.final_objective,
        "termination": trace.termination,
        "restart_index": trace.restart_index,
        "objective_per_iter": trace.objective_per_iter,
    }))
    .expect("trace serializes");
    let mut tp = out.as_os_str().to_owned();
    tp.push(".trace.json");
    std::fs::write(&tp, body).map_err(|e| CliError {
        code: 2,
        msg: format!("cannot write trace sidecar: {e}"),
    })
}
