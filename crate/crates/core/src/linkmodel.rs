//! Closed-form multi-span link budget: amplifier noise, a three-parameter
//! modulation-dependent NLI surrogate, optimum launch power, and maximum
//! reach at a GMI threshold.
//!
//! Powers are totals over both polarizations: launch power P, accumulated
//! ASE A, and the NLI term eta P^3 all use the same convention, so the
//! effective SNR P / (A + eta P^3) equals the per-polarization SNR.

use crate::constellation::{LabeledConstellation, ModulationMoments};
use crate::error::{Error, Result};
use crate::gmi::{gmi_gh, sigma_for_snr_db};
use crate::quadrature::QuadratureRule;

const PLANCK: f64 = 6.62607015e-34; // J s
const LIGHT_SPEED: f64 = 299792458.0; // m/s

/// Below this NLI coefficient the cubic term is meaningless and the launch
/// optimum runs away; callers get a LinearRegime marker instead.
const ETA_LINEAR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberParams {
    pub atten_db_per_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub gamma_per_w_km: f64,
    pub span_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub fiber: FiberParams,
    pub n_spans: usize,
    pub edfa_nf_db: f64,
    pub symbol_rate_ghz: f64,
    pub n_channels: usize,
    pub spacing_ghz: f64,
    pub rrc_rolloff: f64,
    pub center_wavelength_nm: f64,
}

impl LinkSpec {
    /// Reference system: 45 GBd, 11 channels on a 50 GHz grid, 10% roll-off,
    /// standard single-mode fiber in 80 km spans, EDFA noise figure 5 dB.
    pub fn reference() -> Self {
        LinkSpec {
            fiber: FiberParams {
                atten_db_per_km: 0.21,
                dispersion_ps_nm_km: 16.9,
                gamma_per_w_km: 1.31,
                span_km: 80.0,
            },
            n_spans: 1,
            edfa_nf_db: 5.0,
            symbol_rate_ghz: 45.0,
            n_channels: 11,
            spacing_ghz: 50.0,
            rrc_rolloff: 0.1,
            center_wavelength_nm: 1550.0,
        }
    }

    pub fn with_spans(mut self, n_spans: usize) -> Self {
        self.n_spans = n_spans;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.fiber;
        if !(f.atten_db_per_km > 0.0
            && f.dispersion_ps_nm_km > 0.0
            && f.gamma_per_w_km > 0.0
            && f.span_km > 0.0)
        {
            return Err(Error::BadLink("fiber parameters must be positive".into()));
        }
        if self.n_spans < 1 {
            return Err(Error::BadLink("n_spans must be >= 1".into()));
        }
        if self.n_channels % 2 == 0 {
            return Err(Error::BadLink(
                "n_channels must be odd (center channel under test)".into(),
            ));
        }
        if !(self.rrc_rolloff > 0.0 && self.rrc_rolloff < 1.0) {
            return Err(Error::BadLink("rrc_rolloff must be in (0, 1)".into()));
        }
        if self.spacing_ghz < self.symbol_rate_ghz * (1.0 + self.rrc_rolloff) {
            return Err(Error::BadLink(format!(
                "channel spacing {} GHz below occupied bandwidth {} GHz",
                self.spacing_ghz,
                self.symbol_rate_ghz * (1.0 + self.rrc_rolloff)
            )));
        }
        if !(self.center_wavelength_nm > 0.0 && self.symbol_rate_ghz > 0.0) {
            return Err(Error::BadLink(
                "wavelength and symbol rate must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Optical carrier frequency in Hz.
    pub fn carrier_hz(&self) -> f64 {
        LIGHT_SPEED / (self.center_wavelength_nm * 1e-9)
    }

    /// Span-loss-compensating EDFA gain, linear.
    pub fn span_gain_linear(&self) -> f64 {
        10.0f64.powf(self.fiber.atten_db_per_km * self.fiber.span_km / 10.0)
    }
}

/// Modulation-dependent NLI surrogate: per-span coefficient
/// eta0 (1 + k_kurt kurt_excess + k_cross cross4), accumulated over spans as
/// n^(1+epsilon).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NliSurrogateParams {
    pub eta0: f64,
    pub k_kurt: f64,
    pub k_cross: f64,
    pub epsilon: f64,
}

impl Default for NliSurrogateParams {
    /// Coefficients fitted to this crate's own split-step engine on the
    /// single-channel desk-scale system (seed 101, launch sweeps of PM-QPSK,
    /// PM-16QAM, PM-64QAM, and PS-QPSK over -2..=6 dBm on 3 x 80 km, with
    /// epsilon pinned by the 1-span versus 3-span PM-16QAM optima); the
    /// `calibrate_defaults` example in the simulation crate reproduces them.
    /// The large epsilon reflects nearly coherent single-channel SPM
    /// accumulation under end-of-line dispersion compensation.
    fn default() -> Self {
        NliSurrogateParams {
            eta0: 86.845277,
            k_kurt: 0.418231,
            k_cross: 0.424082,
            epsilon: 0.533315,
        }
    }
}

/// Launch-power optimum of the cubic budget, or a marker that the link is
/// effectively linear and has no interior optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaunchOptimum {
    Finite { snr_db: f64, p_opt_w: f64 },
    LinearRegime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachResult {
    pub n_spans: usize,
    pub distance_km: f64,
    pub gmi_at_reach: f64,
    pub snr_opt_db: f64,
    pub launch_dbm: f64,
}

/// ASE variance added per span, per polarization, in the symbol bandwidth:
/// h nu NF (G - 1) R_s, with G the span-loss-compensating gain.
pub fn ase_variance(link: &LinkSpec) -> f64 {
    let nf_lin = 10.0f64.powf(link.edfa_nf_db / 10.0);
    let g = link.span_gain_linear();
    PLANCK * link.carrier_hz() * nf_lin * (g - 1.0) * link.symbol_rate_ghz * 1e9
}

/// Accumulated dual-polarization ASE power over the whole link.
pub fn ase_total(link: &LinkSpec) -> f64 {
    link.n_spans as f64 * 2.0 * ase_variance(link)
}

/// Total NLI coefficient for a modulation with the given moments.
pub fn nli_coefficient(
    mom: &ModulationMoments,
    p: &NliSurrogateParams,
    n_spans: usize,
) -> Result<f64> {
    let per_span = p.eta0 * (1.0 + p.k_kurt * mom.kurt_excess + p.k_cross * mom.cross4);
    let eta = per_span * (n_spans as f64).powf(1.0 + p.epsilon);
    if eta <= 0.0 {
        return Err(Error::NonPositiveEta { eta });
    }
    Ok(eta)
}

/// Optimum launch power and the effective SNR there.
///
/// SNR_eff(P) = P / (A + eta P^3) peaks at P_opt = (A / (2 eta))^(1/3); the
/// returned SNR is the budget evaluated at P_opt, not a separate formula.
pub fn snr_opt(
    c: &LabeledConstellation,
    link: &LinkSpec,
    p: &NliSurrogateParams,
) -> Result<LaunchOptimum> {
    let mom = c.moments()?;
    snr_opt_for_moments(&mom, link, p)
}

/// Same optimum from precomputed moments; all link-model outputs depend on
/// the constellation only through these.
pub fn snr_opt_for_moments(
    mom: &ModulationMoments,
    link: &LinkSpec,
    p: &NliSurrogateParams,
) -> Result<LaunchOptimum> {
    let a = ase_total(link);
    let eta = nli_coefficient(mom, p, link.n_spans)?;
    if eta < ETA_LINEAR_FLOOR {
        return Ok(LaunchOptimum::LinearRegime);
    }
    let p_opt = (a / (2.0 * eta)).cbrt();
    let snr = p_opt / (a + eta * p_opt * p_opt * p_opt);
    Ok(LaunchOptimum::Finite {
        snr_db: 10.0 * snr.log10(),
        p_opt_w: p_opt,
    })
}

/// GMI of `c` at its own optimum launch on `link`.
pub fn gmi_at_optimum(
    c: &LabeledConstellation,
    link: &LinkSpec,
    p: &NliSurrogateParams,
    rule: &QuadratureRule,
) -> Result<(f64, LaunchOptimum)> {
    let opt = snr_opt(c, link, p)?;
    match opt {
        LaunchOptimum::Finite { snr_db, .. } => {
            let g = gmi_gh(c, sigma_for_snr_db(snr_db), rule)?;
            Ok((g.value, opt))
        }
        // No nonlinear penalty: noise-free in this model, GMI saturates.
        LaunchOptimum::LinearRegime => Ok((c.bits() as f64, opt)),
    }
}

/// Largest span count at which the GMI at optimum launch still meets
/// `target_bits`, by doubling then binary search over integer spans.
pub fn max_reach_at(
    c: &LabeledConstellation,
    link_template: &LinkSpec,
    p: &NliSurrogateParams,
    rule: &QuadratureRule,
    target_bits: f64,
) -> Result<ReachResult> {
    let eval = |n_spans: usize| -> Result<(f64, f64, f64)> {
        let link = link_template.with_spans(n_spans);
        match gmi_at_optimum(c, &link, p, rule)? {
            (g, LaunchOptimum::Finite { snr_db, p_opt_w }) => Ok((g, snr_db, p_opt_w)),
            (_, LaunchOptimum::LinearRegime) => Err(Error::ModelDivergence(
                "linear regime: reach is unbounded".into(),
            )),
        }
    };

    let (g1, _, _) = eval(1)?;
    if g1 < target_bits {
        return Err(Error::UnreachableAtOneSpan {
            gmi_at_one_span: g1,
            target: target_bits,
        });
    }

    // Double until the target fails; GMI must not grow with span count.
    let (mut lo, mut g_lo) = (1usize, g1);
    let mut hi = 2usize;
    let mut g_hi = loop {
        let (g, _, _) = eval(hi)?;
        if g > g_lo + 1e-6 {
            return Err(Error::ModelDivergence(format!(
                "GMI increased from {g_lo} to {g} between {lo} and {hi} spans"
            )));
        }
        if g < target_bits {
            break g;
        }
        lo = hi;
        g_lo = g;
        if hi > (1 << 30) {
            return Err(Error::ModelDivergence(
                "reach exceeds 2^30 spans".into(),
            ));
        }
        hi *= 2;
    };

    // Invariant: lo meets the target, hi does not.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let (g, _, _) = eval(mid)?;
        if g > g_lo + 1e-6 || g < g_hi - 1e-6 {
            return Err(Error::ModelDivergence(format!(
                "GMI not monotone across spans at {mid}"
            )));
        }
        if g >= target_bits {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
            g_hi = g;
        }
    }

    let (gmi_at_reach, snr_opt_db, p_opt_w) = eval(lo)?;
    Ok(ReachResult {
        n_spans: lo,
        distance_km: lo as f64 * link_template.fiber.span_km,
        gmi_at_reach,
        snr_opt_db,
        launch_dbm: 10.0 * p_opt_w.log10() + 30.0,
    })
}

/// Reach at the standard operating point GMI = 0.85 m.
pub fn max_reach(
    c: &LabeledConstellation,
    link_template: &LinkSpec,
    p: &NliSurrogateParams,
    rule: &QuadratureRule,
) -> Result<ReachResult> {
    max_reach_at(c, link_template, p, rule, 0.85 * c.bits() as f64)
}

/// One calibration observation: a format's moments and its measured optimum
/// effective SNR on the calibration link.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationSample {
    pub moments: ModulationMoments,
    pub snr_opt_db: f64,
}

/// Result of a surrogate fit: parameters plus per-sample relative residuals
/// of the implied NLI coefficient.
#[derive(Debug, Clone)]
pub struct CalibrationFit {
    pub params: NliSurrogateParams,
    pub residuals: Vec<f64>,
}

/// Fits (eta0, k_kurt, k_cross) at fixed epsilon to measured optimum SNRs.
///
/// Inverting the cubic budget at its optimum gives the per-format coefficient
/// eta_f = 4 / (27 A^2 SNR_f^3); dividing out the span factor leaves the
/// linear model eta0 (1 + k_kurt kurt_f + k_cross cross_f), solved by least
/// squares. The sample set must spread the kurtosis column; a spreadless
/// cross-polarization column (for example an all-PM sample set) is dropped
/// (weight 0) instead of amplifying noise.
pub fn calibrate_surrogate(
    samples: &[CalibrationSample],
    link: &LinkSpec,
    epsilon: f64,
) -> Result<CalibrationFit> {
    if samples.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 formats, got {}",
            samples.len()
        )));
    }
    let a = ase_total(link);
    let span_factor = (link.n_spans as f64).powf(1.0 + epsilon);
    let y: Vec<f64> = samples
        .iter()
        .map(|s| {
            let snr = 10.0f64.powf(s.snr_opt_db / 10.0);
            4.0 / (27.0 * a * a * snr * snr * snr) / span_factor
        })
        .collect();

    let spread = |f: fn(&ModulationMoments) -> f64| -> f64 {
        let vals: Vec<f64> = samples.iter().map(|s| f(&s.moments)).collect();
        vals.iter().cloned().fold(f64::MIN, f64::max)
            - vals.iter().cloned().fold(f64::MAX, f64::min)
    };
    let use_kurt = spread(|m| m.kurt_excess) > 1e-9;
    let use_cross = spread(|m| m.cross4) > 1e-9;
    if !use_kurt {
        // The kurtosis slope is the point of the fit; without spread in that
        // column no sample set can identify it.
        return Err(Error::DegenerateFit(
            "kurtosis spread across samples is too small to identify k_kurt".into(),
        ));
    }

    // Column order: intercept, then whichever moment columns survived.
    let mut cols: Vec<Box<dyn Fn(&ModulationMoments) -> f64>> = vec![Box::new(|_| 1.0)];
    if use_kurt {
        cols.push(Box::new(|m| m.kurt_excess));
    }
    if use_cross {
        cols.push(Box::new(|m| m.cross4));
    }
    let nc = cols.len();

    // Normal equations, solved by Gaussian elimination with partial pivoting.
    let mut ata = vec![0.0; nc * nc];
    let mut aty = vec![0.0; nc];
    for (s, &yi) in samples.iter().zip(&y) {
        let row: Vec<f64> = cols.iter().map(|c| c(&s.moments)).collect();
        for r in 0..nc {
            aty[r] += row[r] * yi;
            for q in 0..nc {
                ata[r * nc + q] += row[r] * row[q];
            }
        }
    }
    let beta = solve_spd(&mut ata, &mut aty, nc)
        .ok_or_else(|| Error::DegenerateFit("moment matrix is rank-deficient".into()))?;

    let eta0 = beta[0];
    if eta0 <= 0.0 {
        return Err(Error::DegenerateFit(format!(
            "fitted base coefficient {eta0} is not positive"
        )));
    }
    let mut next = 1;
    let k_kurt = if use_kurt {
        let v = beta[next] / eta0;
        next += 1;
        v
    } else {
        0.0
    };
    let k_cross = if use_cross { beta[next] / eta0 } else { 0.0 };

    let params = NliSurrogateParams {
        eta0,
        k_kurt,
        k_cross,
        epsilon,
    };
    let residuals = samples
        .iter()
        .zip(&y)
        .map(|(s, &yi)| {
            let pred = eta0
                * (1.0 + k_kurt * s.moments.kurt_excess + k_cross * s.moments.cross4);
            (pred - yi) / yi
        })
        .collect();
    Ok(CalibrationFit { params, residuals })
}

/// Gaussian elimination for the small symmetric positive systems of the fit.
/// Returns None when a pivot collapses relative to the matrix scale.
fn solve_spd(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let scale = a
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                a[r * n + col]
                    .abs()
                    .partial_cmp(&a[s * n + col].abs())
                    .unwrap()
            })
            .unwrap();
        if a[pivot_row * n + col].abs() < 1e-12 * scale {
            return None;
        }
        if pivot_row != col {
            for q in 0..n {
                a.swap(col * n + q, pivot_row * n + q);
            }
            b.swap(col, pivot_row);
        }
        for r in (col + 1)..n {
            let f = a[r * n + col] / a[col * n + col];
            for q in col..n {
                a[r * n + q] -= f * a[col * n + q];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for q in (col + 1)..n {
            s -= a[col * n + q] * x[q];
        }
        x[col] = s / a[col * n + col];
    }
    Some(x)
}
