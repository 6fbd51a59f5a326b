//! End-to-end transmission runs: seeded symbol generation, WDM assembly,
//! span-by-span propagation and amplification, receiver metrics.

use crate::edfa::edfa;
use crate::error::{Error, Result};
use crate::fiber::propagate_span;
use crate::rx::rx_chain;
use crate::wdm::{build_wdm, DualPolSymbols};
use gs4d_core::config::KeyValueConfig;
use gs4d_core::gmi::{gmi_gh, sigma_for_snr_db};
use gs4d_core::{gauss_hermite_rule, LabeledConstellation, LinkSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub link: LinkSpec,
    /// Split-step size in meters.
    pub step_m: f64,
    /// Samples per symbol on the common grid.
    pub sps: usize,
    pub n_symbols: usize,
    /// Per-channel dual-polarization launch power.
    pub launch_dbm: f64,
    pub seed: u64,
    pub nonlinearity_on: bool,
    pub ase_on: bool,
}

impl SimConfig {
    /// Desk-scale default: single channel, three reference spans, 400 m
    /// steps, 4096 symbols.
    pub fn desk_scale() -> Self {
        let mut link = LinkSpec::reference().with_spans(3);
        link.n_channels = 1;
        SimConfig {
            link,
            step_m: 400.0,
            sps: 4,
            n_symbols: 1 << 12,
            launch_dbm: 0.0,
            seed: 1,
            nonlinearity_on: true,
            ase_on: true,
        }
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sps as f64 * self.link.symbol_rate_ghz * 1e9
    }

    pub fn launch_watts(&self) -> f64 {
        1e-3 * 10.0f64.powf(self.launch_dbm / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        if !(self.step_m > 0.0) {
            return Err(Error::BadConfig(format!(
                "step must be positive, got {} m",
                self.step_m
            )));
        }
        if self.sps < 2 {
            return Err(Error::BadConfig(format!(
                "need at least 2 samples per symbol, got {}",
                self.sps
            )));
        }
        if self.n_symbols < 16 || !(self.n_symbols * self.sps).is_power_of_two() {
            return Err(Error::BadConfig(format!(
                "n_symbols * sps must be a power of two >= 64, got {} * {}",
                self.n_symbols, self.sps
            )));
        }
        if !self.launch_dbm.is_finite() {
            return Err(Error::BadConfig("launch power must be finite".into()));
        }
        let fs_ghz = self.sps as f64 * self.link.symbol_rate_ghz;
        let comb_ghz = self.link.n_channels as f64 * self.link.spacing_ghz;
        if self.link.n_channels > 1 && fs_ghz < comb_ghz {
            return Err(Error::SpectralOverflow {
                needed_ghz: comb_ghz,
                have_ghz: fs_ghz,
            });
        }
        Ok(())
    }
}

/// Rough FFT work estimate (N log2 N units) for one transmission run; the
/// command-line layer compares this against its desk-scale budget.
pub fn estimated_fft_work(cfg: &SimConfig) -> f64 {
    let n = (cfg.n_symbols * cfg.sps) as f64;
    let unit = n * n.log2().max(1.0);
    let steps_per_span = (cfg.link.fiber.span_km * 1000.0 / cfg.step_m).ceil().max(1.0);
    let nl_ffts = if cfg.nonlinearity_on {
        cfg.link.n_spans as f64 * steps_per_span * 8.0
    } else {
        cfg.link.n_spans as f64 * 4.0
    };
    let tx_rx_ffts = cfg.link.n_channels as f64 * 4.0 + 8.0;
    (nl_ffts + tx_rx_ffts) * unit
}

/// Draws one channel's labels from the per-channel RNG stream.
fn channel_symbols(
    c: &LabeledConstellation,
    n_symbols: usize,
    seed: u64,
    stream: u64,
) -> (Vec<usize>, DualPolSymbols) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let m = c.n_points();
    let labels: Vec<usize> = (0..n_symbols).map(|_| rng.gen_range(0..m)).collect();
    let mut x = Vec::with_capacity(n_symbols);
    let mut y = Vec::with_capacity(n_symbols);
    for &l in &labels {
        let p = c.point(l);
        x.push(Complex64::new(p[0], p[1]));
        y.push(Complex64::new(p[2], p[3]));
    }
    (labels, DualPolSymbols { x, y })
}

fn span_seed(seed: u64, span: usize) -> u64 {
    seed ^ ((span as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Full transmission of one block: returns (effective SNR in dB, GMI in
/// bits per 4D symbol). The GMI is evaluated analytically at the measured
/// effective SNR under the Gaussian-noise assumption. Deterministic for a
/// fixed (constellation, config) pair.
pub fn run_transmission(c: &LabeledConstellation, cfg: &SimConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let c = c.normalize_power()?;
    let n_ch = cfg.link.n_channels;
    let center = (n_ch - 1) / 2;
    let mut tx_center: Option<DualPolSymbols> = None;
    let mut channels = Vec::with_capacity(n_ch);
    for ch in 0..n_ch {
        let (_, sym) = channel_symbols(&c, cfg.n_symbols, cfg.seed, ch as u64);
        if ch == center {
            tx_center = Some(sym.clone());
        }
        channels.push(sym);
    }
    let mut grid = build_wdm(&channels, cfg)?;
    let loss_db = cfg.link.fiber.atten_db_per_km * cfg.link.fiber.span_km;
    for span in 0..cfg.link.n_spans {
        grid = propagate_span(&grid, &cfg.link.fiber, cfg)?;
        grid = edfa(
            &grid,
            loss_db,
            cfg.link.edfa_nf_db,
            cfg.link.carrier_hz(),
            cfg.ase_on,
            span_seed(cfg.seed, span),
        )?;
    }
    let rx = rx_chain(&grid, cfg, tx_center.as_ref().unwrap())?;
    let rule = gauss_hermite_rule(10)?;
    let gmi = gmi_gh(&c, sigma_for_snr_db(rx.effective_snr_db), &rule)?.value;
    Ok((rx.effective_snr_db, gmi))
}

/// Reads simulation keys on top of the link keys from a key-value config.
pub fn sim_from_config(kv: &mut KeyValueConfig) -> Result<SimConfig> {
    let link = gs4d_core::config::link_from_config(kv)?;
    let mut cfg = SimConfig::desk_scale();
    cfg.link = link;
    if let Some(v) = kv.get_f64("step_m")? {
        cfg.step_m = v;
    }
    if let Some(v) = kv.get_usize("sps")? {
        cfg.sps = v;
    }
    if let Some(v) = kv.get_usize("n_symbols")? {
        cfg.n_symbols = v;
    }
    if let Some(v) = kv.get_f64("launch_dbm")? {
        cfg.launch_dbm = v;
    }
    if let Some(v) = kv.get_usize("seed")? {
        cfg.seed = v as u64;
    }
    if let Some(v) = kv.get_usize("nonlinearity_on")? {
        cfg.nonlinearity_on = v != 0;
    }
    if let Some(v) = kv.get_usize("ase_on")? {
        cfg.ase_on = v != 0;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gs4d_core::catalog::build_catalog_format;

    #[test]
    fn config_validation_catches_bad_grids() {
        let mut cfg = SimConfig::desk_scale();
        cfg.sps = 1;
        assert!(matches!(cfg.validate(), Err(Error::BadConfig(_))));
        let mut cfg = SimConfig::desk_scale();
        cfg.n_symbols = 100;
        assert!(matches!(cfg.validate(), Err(Error::BadConfig(_))));
        let mut cfg = SimConfig::desk_scale();
        cfg.link.n_channels = 11;
        // 4 samples/symbol cannot hold an 11 x 50 GHz comb.
        assert!(matches!(cfg.validate(), Err(Error::SpectralOverflow { .. })));
    }

    #[test]
    fn transmission_is_seed_deterministic() {
        let c = build_catalog_format("PM-QPSK", None).unwrap();
        let mut cfg = SimConfig::desk_scale();
        cfg.n_symbols = 256;
        cfg.link = cfg.link.with_spans(1);
        let a = run_transmission(&c, &cfg).unwrap();
        let b = run_transmission(&c, &cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed = 2;
        let c2 = run_transmission(&c, &cfg).unwrap();
        assert_ne!(a.0, c2.0);
    }

    #[test]
    fn work_estimate_scales_with_steps_and_spans() {
        let cfg = SimConfig::desk_scale();
        let w1 = estimated_fft_work(&cfg);
        let mut finer = cfg.clone();
        finer.step_m = 200.0;
        assert!(estimated_fft_work(&finer) > 1.9 * w1 * 0.9);
        let mut linear = cfg.clone();
        linear.nonlinearity_on = false;
        assert!(estimated_fft_work(&linear) < w1 / 10.0);
    }

    #[test]
    fn config_file_round_trip() {
        let text = "symbol_rate_gbaud = 45\nwdm_channels = 1\nn_spans = 2\nstep_m = 500\nsps = 8\nn_symbols = 128\nlaunch_dbm = -1.5\nseed = 9\nase_on = 0\n";
        let mut kv = KeyValueConfig::parse(text).unwrap();
        let cfg = sim_from_config(&mut kv).unwrap();
        assert_eq!(cfg.sps, 8);
        assert_eq!(cfg.n_symbols, 128);
        assert_eq!(cfg.seed, 9);
        assert!(!cfg.ase_on);
        assert!(cfg.nonlinearity_on);
        assert_eq!(cfg.link.n_spans, 2);
        assert!((cfg.launch_dbm - -1.5).abs() < 1e-12);
        assert!(kv.unconsumed_keys().is_empty());
    }
}
