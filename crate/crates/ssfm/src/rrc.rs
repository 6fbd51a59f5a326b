//! Root-raised-cosine pulse shaping in the frequency domain.

use crate::error::{Error, Result};
use crate::grid::{fft_in_place, ifft_in_place};
use num_complex::Complex64;

/// Raised-cosine amplitude spectrum at frequency f for symbol rate rs.
fn raised_cosine(f: f64, rs: f64, rolloff: f64) -> f64 {
    let af = f.abs();
    let lo = (1.0 - rolloff) * rs / 2.0;
    let hi = (1.0 + rolloff) * rs / 2.0;
    if af <= lo {
        1.0
    } else if af < hi {
        let arg = std::f64::consts::PI * (af - lo) / (rolloff * rs);
        0.5 * (1.0 + arg.cos())
    } else {
        0.0
    }
}

/// Discrete unit-energy RRC filter spectrum on an n-bin grid.
///
/// The returned values are per-bin amplitudes of sqrt(RC); the filter's
/// impulse response has unit energy, so matched filtering preserves white
/// noise variance and the RRC*RRC cascade is Nyquist at the symbol spacing.
pub fn rrc_spectrum(n: usize, sample_rate_hz: f64, rs_hz: f64, rolloff: f64) -> Result<Vec<f64>> {
    if !(rolloff > 0.0 && rolloff < 1.0) {
        return Err(Error::BadRolloff(rolloff));
    }
    let df = sample_rate_hz / n as f64;
    let mut h: Vec<f64> = (0..n)
        .map(|k| {
            let f = if k <= n / 2 - 1 {
                k as f64 * df
            } else {
                (k as f64 - n as f64) * df
            };
            raised_cosine(f, rs_hz, rolloff).sqrt()
        })
        .collect();
    // Unit impulse-response energy: sum |h[t]|^2 = (1/N) sum |H[k]|^2 = 1.
    let e: f64 = h.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let s = 1.0 / e.sqrt();
    h.iter_mut().for_each(|v| *v *= s);
    Ok(h)
}

/// Shapes one polarization's symbol sequence onto a length n = sps * len
/// sample block: sps-spaced impulses filtered by the unit-energy RRC.
pub fn rrc_shape_pol(
    symbols: &[Complex64],
    rolloff: f64,
    sps: usize,
    sample_rate_hz: f64,
) -> Result<Vec<Complex64>> {
    if sps < 2 {
        return Err(Error::BadConfig(format!(
            "need at least 2 samples per symbol, got {sps}"
        )));
    }
    let n = symbols.len() * sps;
    if !n.is_power_of_two() {
        return Err(Error::BadConfig(format!(
            "grid length {n} must be a power of two"
        )));
    }
    let rs = sample_rate_hz / sps as f64;
    let h = rrc_spectrum(n, sample_rate_hz, rs, rolloff)?;
    let mut buf = vec![Complex64::default(); n];
    for (k, s) in symbols.iter().enumerate() {
        buf[k * sps] = *s;
    }
    fft_in_place(&mut buf);
    for (v, t) in buf.iter_mut().zip(&h) {
        *v *= t;
    }
    ifft_in_place(&mut buf);
    Ok(buf)
}

/// Applies the matched (identical, real) RRC filter to one polarization and
/// returns the T-spaced symbol estimates.
pub fn matched_filter_and_sample(
    samples: &[Complex64],
    rolloff: f64,
    sps: usize,
    sample_rate_hz: f64,
) -> Result<Vec<Complex64>> {
    let n = samples.len();
    let rs = sample_rate_hz / sps as f64;
    let h = rrc_spectrum(n, sample_rate_hz, rs, rolloff)?;
    let mut buf = samples.to_vec();
    fft_in_place(&mut buf);
    for (v, t) in buf.iter_mut().zip(&h) {
        *v *= t;
    }
    ifft_in_place(&mut buf);
    Ok(buf.iter().step_by(sps).copied().collect())
}
