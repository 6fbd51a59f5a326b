//! WDM grid assembly: per-channel pulse shaping, launch-power scaling, and
//! frequency placement on a common sample grid.

use crate::error::{Error, Result};
use crate::grid::SignalGrid;
use crate::rrc::rrc_shape_pol;
use crate::sim::SimConfig;
use num_complex::Complex64;

/// One channel's dual-polarization symbol sequence.
#[derive(Debug, Clone)]
pub struct DualPolSymbols {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl DualPolSymbols {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Shapes every channel, sets each to the configured per-channel launch
/// power, shifts it to its slot on the spacing grid, and sums. The center
/// channel (index (n-1)/2) lands at 0 Hz.
pub fn build_wdm(channels: &[DualPolSymbols], cfg: &SimConfig) -> Result<SignalGrid> {
    let n_ch = channels.len();
    if n_ch == 0 || n_ch % 2 == 0 {
        return Err(Error::BadConfig(format!(
            "channel count must be odd, got {n_ch}"
        )));
    }
    if n_ch != cfg.link.n_channels {
        return Err(Error::BadConfig(format!(
            "config expects {} channels, got {n_ch}",
            cfg.link.n_channels
        )));
    }
    let fs = cfg.sample_rate_hz();
    let rs = cfg.link.symbol_rate_ghz * 1e9;
    let spacing = cfg.link.spacing_ghz * 1e9;
    let edge = (n_ch - 1) as f64 / 2.0 * spacing + (1.0 + cfg.link.rrc_rolloff) * rs / 2.0;
    if 2.0 * edge > fs {
        return Err(Error::SpectralOverflow {
            needed_ghz: 2.0 * edge / 1e9,
            have_ghz: fs / 1e9,
        });
    }
    let p_ch = cfg.launch_watts();
    let n = cfg.n_symbols * cfg.sps;
    let mut total = SignalGrid::zeros(n, fs / 1e9)?;
    for (ch, sym) in channels.iter().enumerate() {
        if sym.len() != cfg.n_symbols || sym.y.len() != sym.x.len() {
            return Err(Error::LengthMismatch {
                expected: cfg.n_symbols,
                got: sym.len(),
            });
        }
        let sx = rrc_shape_pol(&sym.x, cfg.link.rrc_rolloff, cfg.sps, fs)?;
        let sy = rrc_shape_pol(&sym.y, cfg.link.rrc_rolloff, cfg.sps, fs)?;
        let mut g = SignalGrid::new(sx, sy, fs / 1e9)?;
        let p = g.power_w();
        if p > 0.0 {
            g.scale((p_ch / p).sqrt());
        }
        let offset = (ch as f64 - (n_ch - 1) as f64 / 2.0) * spacing;
        if offset != 0.0 {
            g.frequency_shift(offset);
        }
        for (t, s) in total.samples_x.iter_mut().zip(&g.samples_x) {
            *t += s;
        }
        for (t, s) in total.samples_y.iter_mut().zip(&g.samples_y) {
            *t += s;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gs4d_core::LinkSpec;

    fn desk_cfg(n_ch: usize, sps: usize) -> SimConfig {
        let mut link = LinkSpec::reference();
        link.n_channels = n_ch;
        SimConfig {
            link,
            step_m: 400.0,
            sps,
            n_symbols: 256,
            launch_dbm: 0.0,
            seed: 1,
            nonlinearity_on: true,
            ase_on: true,
        }
    }

    fn tone_symbols(n: usize, phase: f64) -> DualPolSymbols {
        DualPolSymbols {
            x: (0..n)
                .map(|k| Complex64::from_polar(1.0, phase + 0.7 * k as f64))
                .collect(),
            y: (0..n)
                .map(|k| Complex64::from_polar(1.0, -phase + 0.3 * k as f64))
                .collect(),
        }
    }

    #[test]
    fn single_channel_is_the_shaped_signal_at_launch_power() {
        let cfg = desk_cfg(1, 4);
        let sym = tone_symbols(cfg.n_symbols, 0.2);
        let g = build_wdm(std::slice::from_ref(&sym), &cfg).unwrap();
        let p = g.power_w();
        let want = cfg.launch_watts();
        assert!((p / want - 1.0).abs() < 1e-12, "power {p} vs {want}");
        // Same signal, shaped directly and rescaled, must match sample for
        // sample (no shift applied to the center channel).
        let fs = cfg.sample_rate_hz();
        let sx = rrc_shape_pol(&sym.x, cfg.link.rrc_rolloff, cfg.sps, fs).unwrap();
        let sy = rrc_shape_pol(&sym.y, cfg.link.rrc_rolloff, cfg.sps, fs).unwrap();
        let mut direct = SignalGrid::new(sx, sy, fs / 1e9).unwrap();
        let ps = direct.power_w();
        direct.scale((want / ps).sqrt());
        let worst = g
            .samples_x
            .iter()
            .zip(&direct.samples_x)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-15);
    }

    #[test]
    fn rejects_even_or_mismatched_channel_counts() {
        let cfg = desk_cfg(3, 4);
        let sym = tone_symbols(cfg.n_symbols, 0.0);
        assert!(matches!(
            build_wdm(&[sym.clone(), sym.clone()], &cfg),
            Err(Error::BadConfig(_))
        ));
        assert!(matches!(
            build_wdm(std::slice::from_ref(&sym), &cfg),
            Err(Error::BadConfig(_))
        ));
    }

    #[test]
    fn comb_power_adds_channel_powers() {
        // Channels occupy disjoint bands, so total power is n times the
        // per-channel launch power up to filter skirts.
        let mut cfg = desk_cfg(3, 16);
        cfg.n_symbols = 512;
        let chans: Vec<DualPolSymbols> = (0..3)
            .map(|c| tone_symbols(cfg.n_symbols, 0.4 * c as f64))
            .collect();
        let g = build_wdm(&chans, &cfg).unwrap();
        let want = 3.0 * cfg.launch_watts();
        let got = g.power_w();
        let db = 10.0 * (got / want).log10();
        assert!(db.abs() < 0.01, "comb power off by {db} dB");
    }

    #[test]
    fn overflowing_comb_is_rejected() {
        // 11 channels at 50 GHz need ~560 GHz; 4 samples/symbol at 45 GBd
        // gives only 180 GHz.
        let cfg = desk_cfg(11, 4);
        let chans: Vec<DualPolSymbols> =
            (0..11).map(|_| tone_symbols(cfg.n_symbols, 0.0)).collect();
        let err = build_wdm(&chans, &cfg).unwrap_err();
        assert!(matches!(err, Error::SpectralOverflow { .. }), "{err:?}");
    }

    #[test]
    fn eleven_channel_grid_fits_at_sixteen_samples_per_symbol() {
        // 16 x 45 GBd = 720 GHz of grid, enough for the 550 GHz comb plus
        // the outermost channel's rolloff skirt.
        let mut cfg = desk_cfg(11, 16);
        cfg.n_symbols = 128;
        let chans: Vec<DualPolSymbols> =
            (0..11).map(|c| tone_symbols(cfg.n_symbols, 0.1 * c as f64)).collect();
        let g = build_wdm(&chans, &cfg).unwrap();
        assert_eq!(g.n_samples(), 128 * 16);
    }
}
