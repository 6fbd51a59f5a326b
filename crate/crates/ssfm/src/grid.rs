//! Dual-polarization sample grids and FFT plumbing.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

/// A block of dual-polarization complex samples at a fixed rate. All
/// frequency-domain operations treat the block as circular.
#[derive(Debug, Clone)]
pub struct SignalGrid {
    pub samples_x: Vec<Complex64>,
    pub samples_y: Vec<Complex64>,
    pub sample_rate_ghz: f64,
}

impl SignalGrid {
    pub fn new(
        samples_x: Vec<Complex64>,
        samples_y: Vec<Complex64>,
        sample_rate_ghz: f64,
    ) -> Result<Self> {
        if samples_x.len() != samples_y.len() {
            return Err(Error::LengthMismatch {
                expected: samples_x.len(),
                got: samples_y.len(),
            });
        }
        if samples_x.is_empty() || !samples_x.len().is_power_of_two() {
            return Err(Error::BadConfig(format!(
                "grid length must be a nonzero power of two, got {}",
                samples_x.len()
            )));
        }
        if !(sample_rate_ghz > 0.0) {
            return Err(Error::BadConfig(format!(
                "sample rate must be positive, got {sample_rate_ghz}"
            )));
        }
        Ok(SignalGrid {
            samples_x,
            samples_y,
            sample_rate_ghz,
        })
    }

    pub fn zeros(n: usize, sample_rate_ghz: f64) -> Result<Self> {
        Self::new(
            vec![Complex64::default(); n],
            vec![Complex64::default(); n],
            sample_rate_ghz,
        )
    }

    pub fn n_samples(&self) -> usize {
        self.samples_x.len()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_ghz * 1e9
    }

    /// Mean dual-polarization sample power in watts.
    pub fn power_w(&self) -> f64 {
        let s: f64 = self
            .samples_x
            .iter()
            .zip(&self.samples_y)
            .map(|(x, y)| x.norm_sqr() + y.norm_sqr())
            .sum();
        s / self.n_samples() as f64
    }

    /// Total energy over the block in watt-samples.
    pub fn energy(&self) -> f64 {
        self.power_w() * self.n_samples() as f64
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.samples_x.iter_mut().chain(self.samples_y.iter_mut()) {
            *v *= s;
        }
    }

    /// Multiplies the signal by exp(j 2 pi f_off t) on both polarizations.
    pub fn frequency_shift(&mut self, f_off_hz: f64) {
        let dt = 1.0 / self.sample_rate_hz();
        let w = 2.0 * std::f64::consts::PI * f_off_hz * dt;
        for n in 0..self.n_samples() {
            let rot = Complex64::from_polar(1.0, w * n as f64);
            self.samples_x[n] *= rot;
            self.samples_y[n] *= rot;
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward DFT (rustfft convention, unnormalized).
pub fn fft_in_place(buf: &mut [Complex64]) {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(buf.len());
        fft.process(buf);
    });
}

/// In-place inverse DFT, scaled by 1/N so fft followed by ifft is identity.
pub fn ifft_in_place(buf: &mut [Complex64]) {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(buf.len());
        fft.process(buf);
    });
    let inv = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= inv;
    }
}

/// Angular frequency of each DFT bin (rad/s), negative frequencies in the
/// upper half, matching the unshifted FFT layout.
pub fn angular_freqs(n: usize, sample_rate_hz: f64) -> Vec<f64> {
    let df = sample_rate_hz / n as f64;
    (0..n)
        .map(|k| {
            let f = if k <= n / 2 - 1 {
                k as f64 * df
            } else {
                (k as f64 - n as f64) * df
            };
            2.0 * std::f64::consts::PI * f
        })
        .collect()
}

/// Applies a per-bin transfer function to both polarizations in place.
pub fn apply_transfer(grid: &mut SignalGrid, h: &[Complex64]) {
    debug_assert_eq!(h.len(), grid.n_samples());
    for pol in [&mut grid.samples_x, &mut grid.samples_y] {
        fft_in_place(pol);
        for (v, t) in pol.iter_mut().zip(h) {
            *v *= t;
        }
        ifft_in_place(pol);
    }
}
