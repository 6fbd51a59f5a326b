//! Command implementations and the plumbing they share: config loading,
//! format resolution, error-to-exit-code mapping, and manifest emission.

pub mod calibrate;
pub mod catalog;
pub mod eval;
pub mod optimize;
pub mod reach;
pub mod simulate;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gs4d_core::catalog::build_catalog_format;
use gs4d_core::config::KeyValueConfig;
use gs4d_core::{LabeledConstellation, LinkSpec, NliSurrogateParams};

use crate::manifest::{emit, sha256_file, RunManifest};

/// Exit codes: 2 input error, 3 budget or infeasible target, 1 internal.
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            msg: msg.into(),
        }
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        CliError {
            code: 3,
            msg: msg.into(),
        }
    }
}

impl From<gs4d_core::Error> for CliError {
    fn from(e: gs4d_core::Error) -> Self {
        use gs4d_core::Error as E;
        let code = match &e {
            E::InfeasibleConstraint(_) | E::ModelDivergence(_) | E::UnreachableAtOneSpan { .. } => {
                3
            }
            _ => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<gs4d_ssfm::Error> for CliError {
    fn from(e: gs4d_ssfm::Error) -> Self {
        match e {
            gs4d_ssfm::Error::Core(c) => c.into(),
            other => CliError {
                code: 2,
                msg: other.to_string(),
            },
        }
    }
}

/// Per-invocation state: loaded config, global flag values, input digests,
/// and the resolved-parameter snapshot the manifest will carry.
pub struct Ctx {
    pub config: KeyValueConfig,
    pub seed_flag: Option<u64>,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub inputs: BTreeMap<String, String>,
    pub snapshot: BTreeMap<String, String>,
    started: Instant,
}

impl Ctx {
    pub fn new(
        config: Option<&Path>,
        seed: Option<u64>,
        out: Option<&Path>,
        json: bool,
    ) -> Result<Self, CliError> {
        let mut inputs = BTreeMap::new();
        let cfg = match config {
            None => KeyValueConfig::parse("")?,
            Some(p) => {
                inputs.insert(p.display().to_string(), sha256_file(p)?);
                KeyValueConfig::load(p)?
            }
        };
        Ok(Ctx {
            config: cfg,
            seed_flag: seed,
            out: out.map(|p| p.to_path_buf()),
            json,
            inputs,
            snapshot: BTreeMap::new(),
            started: Instant::now(),
        })
    }

    /// Effective seed: --seed flag, then the config file, then 1.
    pub fn seed(&mut self) -> Result<u64, CliError> {
        if let Some(s) = self.seed_flag {
            return Ok(s);
        }
        Ok(self.config.get_usize("seed")?.map(|s| s as u64).unwrap_or(1))
    }

    pub fn put(&mut self, key: &str, value: impl ToString) {
        self.snapshot.insert(key.to_string(), value.to_string());
    }

    /// Human-readable side channel. Kept off stdout when the table itself
    /// goes to stdout, so piped CSV stays clean.
    pub fn note(&self, line: &str) {
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }

    /// Flags config keys nothing consumed. Runs on success and on failure:
    /// a typo'd key is invisible to the failing command, so the run that
    /// dies because of it would otherwise give no hint.
    pub fn warn_unused_keys(&self) {
        let leftover = self.config.unconsumed_keys();
        if !leftover.is_empty() {
            eprintln!("note: unused config keys: {}", leftover.join(", "));
        }
    }

    /// Writes the primary output plus its manifest sidecar.
    pub fn finish(&mut self, command: &str, seed: u64, text: &str) -> Result<(), CliError> {
        self.warn_unused_keys();
        let m = RunManifest {
            command: command.to_string(),
            config: std::mem::take(&mut self.snapshot),
            inputs: std::mem::take(&mut self.inputs),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        emit(self.out.as_deref(), text, &m)
    }
}

/// Interprets an argument as a constellation file if one exists at that
/// path, otherwise as a catalog format name (case-insensitive).
pub fn resolve_constellation(
    spec: &str,
    ring_ratio: Option<f64>,
    ctx: &mut Ctx,
) -> Result<LabeledConstellation, CliError> {
    let p = Path::new(spec);
    if p.is_file() {
        let c = gs4d_core::io::load_constellation(p)?;
        ctx.inputs.insert(spec.to_string(), sha256_file(p)?);
        return Ok(c);
    }
    match build_catalog_format(spec, ring_ratio) {
        Err(gs4d_core::Error::UnknownFormat(_)) => {
            build_catalog_format(&spec.to_uppercase(), ring_ratio).map_err(|e| match e {
                gs4d_core::Error::UnknownFormat(_) => CliError::input(format!(
                    "'{spec}' is neither a readable constellation file nor a catalog format"
                )),
                other => other.into(),
            })
        }
        other => other.map_err(|e| e.into()),
    }
}

/// Parses a comma-separated float list flag.
pub fn parse_f64_list(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for tok in text.split(',') {
        let tok = tok.trim();
        out.push(tok.parse::<f64>().map_err(|_| {
            CliError::input(format!("{flag}: '{tok}' is not a number"))
        })?);
    }
    if out.is_empty() {
        return Err(CliError::input(format!("{flag}: empty list")));
    }
    Ok(out)
}

/// NLI surrogate coefficients: config overrides on top of the calibrated
/// crate defaults.
pub fn nli_from_config(cfg: &mut KeyValueConfig) -> Result<NliSurrogateParams, CliError> {
    let mut p = NliSurrogateParams::default();
    if let Some(v) = cfg.get_f64("nli_eta0")? {
        p.eta0 = v;
    }
    if let Some(v) = cfg.get_f64("nli_k_kurt")? {
        p.k_kurt = v;
    }
    if let Some(v) = cfg.get_f64("nli_k_cross")? {
        p.k_cross = v;
    }
    if let Some(v) = cfg.get_f64("nli_epsilon")? {
        p.epsilon = v;
    }
    Ok(p)
}

/// Mirrors the config-file key names, so a manifest's snapshot can be
/// replayed as a config.
pub fn snapshot_link(link: &LinkSpec, ctx: &mut Ctx) {
    ctx.put("attenuation_db_per_km", link.fiber.atten_db_per_km);
    ctx.put("dispersion_ps_nm_km", link.fiber.dispersion_ps_nm_km);
    ctx.put("gamma_per_w_km", link.fiber.gamma_per_w_km);
    ctx.put("span_length_km", link.fiber.span_km);
    ctx.put("n_spans", link.n_spans);
    ctx.put("edfa_noise_figure_db", link.edfa_nf_db);
    ctx.put("symbol_rate_gbaud", link.symbol_rate_ghz);
    ctx.put("wdm_channels", link.n_channels);
    ctx.put("channel_spacing_ghz", link.spacing_ghz);
    ctx.put("rrc_rolloff", link.rrc_rolloff);
    ctx.put("center_wavelength_nm", link.center_wavelength_nm);
}

pub fn snapshot_nli(p: &NliSurrogateParams, ctx: &mut Ctx) {
    ctx.put("nli_eta0", p.eta0);
    ctx.put("nli_k_kurt", p.k_kurt);
    ctx.put("nli_k_cross", p.k_cross);
    ctx.put("nli_epsilon", p.epsilon);
}

/// Simulation setup: with a config file, link keys default to the reference
/// system and simulation keys to desk scale; without one, the desk-scale
/// defaults apply outright. The --seed flag wins over the file.
pub fn resolve_sim(ctx: &mut Ctx) -> Result<gs4d_ssfm::SimConfig, CliError> {
    let mut cfg = if ctx.config.unconsumed_keys().is_empty() {
        gs4d_ssfm::SimConfig::desk_scale()
    } else {
        gs4d_ssfm::sim_from_config(&mut ctx.config)?
    };
    if let Some(s) = ctx.seed_flag {
        cfg.seed = s;
    }
    Ok(cfg)
}

pub fn snapshot_sim(cfg: &gs4d_ssfm::SimConfig, ctx: &mut Ctx) {
    snapshot_link(&cfg.link, ctx);
    ctx.put("step_m", cfg.step_m);
    ctx.put("sps", cfg.sps);
    ctx.put("n_symbols", cfg.n_symbols);
    ctx.put("launch_dbm", cfg.launch_dbm);
    ctx.put("nonlinearity_on", cfg.nonlinearity_on);
    ctx.put("ase_on", cfg.ase_on);
}

/// Desk-scale guard: the estimated FFT work for the whole command must stay
/// under the budget (config key `fft_budget`, overridable per command).
pub fn check_budget(
    cfg: &gs4d_ssfm::SimConfig,
    n_runs: usize,
    flag: Option<f64>,
    ctx: &mut Ctx,
) -> Result<(), CliError> {
    let budget = match flag {
        Some(b) => b,
        None => ctx.config.get_f64("fft_budget")?.unwrap_or(1e11),
    };
    let est = gs4d_ssfm::estimated_fft_work(cfg) * n_runs as f64;
    ctx.put("fft_budget", budget);
    ctx.put("fft_work_estimate", est);
    if est > budget {
        return Err(CliError::budget(format!(
            "estimated FFT work {est:.3e} exceeds the budget {budget:.3e}; \
             shrink the run (spans, steps, channels, symbols) or raise fft_budget"
        )));
    }
    Ok(())
}
