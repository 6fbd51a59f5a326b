//! Achievable-rate metrics for bit-interleaved coded modulation: GMI under a
//! Gaussian channel via Gauss-Hermite quadrature, a Monte Carlo estimator as
//! an independent oracle, and threshold-SNR search.
//!
//! Conventions: the constellation is normalized to E[||X||^2] = N/2, noise
//! variance sigma_z^2 is per complex dimension, so SNR = 1/sigma_z^2.

use crate::constellation::LabeledConstellation;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::{LN_2, PI};

/// Partial products of likelihood ratios are flushed to log space past this
/// magnitude so chains of up to m ratios never overflow.
const PRODUCT_FLUSH: f64 = 1e280;

/// Samples per Monte Carlo block; blocks own independent RNG streams so the
/// estimate is identical for any parallel partitioning.
const MC_BLOCK: usize = 1 << 16;

const MC_MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GmiMethod {
    GaussHermite,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmiEstimate {
    /// Bits per N-dimensional symbol.
    pub value: f64,
    pub method: GmiMethod,
    /// Standard error of the estimate; 0 for quadrature.
    pub std_err: f64,
    /// Sample count; 0 for quadrature.
    pub n_samples: usize,
}

/// Noise standard deviation per complex dimension for an SNR in dB.
pub fn sigma_for_snr_db(snr_db: f64) -> f64 {
    10.0f64.powf(-snr_db / 20.0)
}

/// SNR in dB for a per-complex-dimension noise standard deviation.
pub fn snr_db_for_sigma(sigma_z: f64) -> f64 {
    -20.0 * sigma_z.log10()
}

/// GMI / m, the fraction of the raw bit rate that is achievable.
pub fn normalized_gmi(g: &GmiEstimate, m_bits: usize) -> f64 {
    g.value / m_bits as f64
}

/// Sum over bit positions of log(num/den_k), with the running ratio product
/// flushed to log space before it can overflow. Ratios are >= 1 because each
/// denominator sums a subset of the numerator's positive terms.
#[inline]
fn log_ratio_sum(num: f64, dens: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0;
    let mut p = 1.0;
    for d in dens {
        p *= num / d;
        if p > PRODUCT_FLUSH {
            acc += p.ln();
            p = 1.0;
        }
    }
    acc + p.ln()
}

/// GMI of `c` under Gaussian noise, estimated with a J-point Gauss-Hermite
/// rule per real dimension.
///
/// The correction term averages, over transmitted points i and noise nodes,
/// the log ratio of the full likelihood sum to the per-bit matching sum:
///
///   GMI = m - (1/(M pi^{N/2})) sum_i sum_nodes (prod alpha)
///           sum_k log2( sum_p e_ip / sum_{j: bit_k(j)=bit_k(i)} e_ij )
///
/// with e_ij = exp(-(||d_ij||^2 + 2 sigma_z T(xi, d_ij)) / sigma_z^2),
/// d_ij = X_i - X_j and T pairing two nodes with each complex dimension:
/// T = sum_c (xi_{2c-1} Re d_c + xi_{2c} Im d_c).
///
/// Exponents are bounded above by 2 xi_max^2 per complex dimension (the
/// quadratic -||d||^2/s^2 dominates the linear node term), so the terms never
/// overflow; e_ii = 1 keeps every sum >= 1.
pub fn gmi_gh(
    c: &LabeledConstellation,
    sigma_z: f64,
    rule: &QuadratureRule,
) -> Result<GmiEstimate> {
    if !(sigma_z > 0.0) {
        return Err(Error::NonPositiveNoise);
    }
    let n = c.n_dims();
    let correction = match n {
        2 => gh_correction_2d(c, sigma_z, rule),
        4 => gh_correction_4d(c, sigma_z, rule),
        other => return Err(Error::DimensionUnsupported(other)),
    };
    let m = c.bits() as f64;
    let value = (m - correction).max(0.0);
    Ok(GmiEstimate {
        value,
        method: GmiMethod::GaussHermite,
        std_err: 0.0,
        n_samples: 0,
    })
}

/// Direct nested-node evaluation for one complex dimension (N = 2).
fn gh_correction_2d(c: &LabeledConstellation, sigma_z: f64, rule: &QuadratureRule) -> f64 {
    let m_points = c.n_points();
    let m_bits = c.bits();
    let j = rule.order();
    let x = rule.nodes();
    let w = rule.weights();
    let inv_s2 = 1.0 / (sigma_z * sigma_z);
    let two_s = 2.0 / sigma_z;

    let partials: Vec<f64> = (0..m_points)
        .into_par_iter()
        .map(|i| {
            let pi = c.point(i);
            // Exponent of e_ij at node (u, v) is q[j] + u*cr[j] + v*ci[j].
            let mut q = vec![0.0; m_points];
            let mut cr = vec![0.0; m_points];
            let mut ci = vec![0.0; m_points];
            for jj in 0..m_points {
                let pj = c.point(jj);
                let dr = pi[0] - pj[0];
                let di = pi[1] - pj[1];
                q[jj] = -(dr * dr + di * di) * inv_s2;
                cr[jj] = -two_s * dr;
                ci[jj] = -two_s * di;
            }
            let mut acc = 0.0;
            let mut e = vec![0.0; m_points];
            for l1 in 0..j {
                for l2 in 0..j {
                    let (u, v) = (x[l1], x[l2]);
                    let mut num = 0.0;
                    for jj in 0..m_points {
                        e[jj] = (q[jj] + u * cr[jj] + v * ci[jj]).exp();
                        num += e[jj];
                    }
                    let dens = (1..=m_bits).map(|k| {
                        let bi = c.bit(i, k);
                        (0..m_points)
                            .filter(|&jj| c.bit(jj, k) == bi)
                            .map(|jj| e[jj])
                            .sum::<f64>()
                    });
                    acc += w[l1] * w[l2] * log_ratio_sum(num, dens);
                }
            }
            acc
        })
        .collect();

    partials.iter().sum::<f64>() / (m_points as f64 * PI * LN_2)
}

/// Factored evaluation for N = 4.
///
/// The exponent splits per complex dimension, e_ij = g1[j, a] * g2[j, b]
/// where a and b index node pairs, so the numerator and each per-bit
/// denominator at all J^4 nodes build up as sums of outer products over j.
fn gh_correction_4d(c: &LabeledConstellation, sigma_z: f64, rule: &QuadratureRule) -> f64 {
    let m_points = c.n_points();
    let m_bits = c.bits();
    let j = rule.order();
    let j2 = j * j;
    let x = rule.nodes();
    let w = rule.weights();
    let inv_s2 = 1.0 / (sigma_z * sigma_z);
    let two_s = 2.0 / sigma_z;

    // Weight of a node pair.
    let mut w2 = vec![0.0; j2];
    for l1 in 0..j {
        for l2 in 0..j {
            w2[l1 * j + l2] = w[l1] * w[l2];
        }
    }

    let partials: Vec<f64> = (0..m_points)
        .into_par_iter()
        .map(|i| {
            let pi = c.point(i);
            let mut g1 = vec![0.0; m_points * j2];
            let mut g2 = vec![0.0; m_points * j2];
            // Bit agreement between labels i and jj for each position.
            let mut matches = vec![false; m_points * m_bits];
            for jj in 0..m_points {
                let pj = c.point(jj);
                let (d1r, d1i) = (pi[0] - pj[0], pi[1] - pj[1]);
                let (d2r, d2i) = (pi[2] - pj[2], pi[3] - pj[3]);
                let q1 = -(d1r * d1r + d1i * d1i) * inv_s2;
                let q2 = -(d2r * d2r + d2i * d2i) * inv_s2;
                let (c1r, c1i) = (-two_s * d1r, -two_s * d1i);
                let (c2r, c2i) = (-two_s * d2r, -two_s * d2i);
                for l1 in 0..j {
                    let t1 = q1 + x[l1] * c1r;
                    let t2 = q2 + x[l1] * c2r;
                    for l2 in 0..j {
                        g1[jj * j2 + l1 * j + l2] = (t1 + x[l2] * c1i).exp();
                        g2[jj * j2 + l1 * j + l2] = (t2 + x[l2] * c2i).exp();
                    }
                }
                let agree = !(i ^ jj);
                for k in 0..m_bits {
                    matches[jj * m_bits + k] = (agree >> (m_bits - 1 - k)) & 1 == 1;
                }
            }

            let mut acc = 0.0;
            let mut num = vec![0.0; j2];
            let mut den = vec![0.0; m_bits * j2];
            let mut tmp = vec![0.0; j2];
            for a in 0..j2 {
                num.iter_mut().for_each(|v| *v = 0.0);
                den.iter_mut().for_each(|v| *v = 0.0);
                for jj in 0..m_points {
                    let s = g1[jj * j2 + a];
                    let row = &g2[jj * j2..jj * j2 + j2];
                    for b in 0..j2 {
                        tmp[b] = s * row[b];
                    }
                    for b in 0..j2 {
                        num[b] += tmp[b];
                    }
                    for k in 0..m_bits {
                        if matches[jj * m_bits + k] {
                            let drow = &mut den[k * j2..(k + 1) * j2];
                            for b in 0..j2 {
                                drow[b] += tmp[b];
                            }
                        }
                    }
                }
                for b in 0..j2 {
                    let lsum =
                        log_ratio_sum(num[b], (0..m_bits).map(|k| den[k * j2 + b]));
                    acc += w2[a] * w2[b] * lsum;
                }
            }
            acc
        })
        .collect();

    partials.iter().sum::<f64>() / (m_points as f64 * PI * PI * LN_2)
}

/// Monte Carlo GMI with i.i.d. Gaussian noise, sigma_z^2 per complex
/// dimension. Deterministic for a fixed seed: samples are generated in
/// fixed-size blocks with per-block RNG streams and the block partials are
/// reduced in block order, so thread count does not change the result.
pub fn gmi_mc(
    c: &LabeledConstellation,
    sigma_z: f64,
    n: usize,
    seed: u64,
) -> Result<GmiEstimate> {
    if !(sigma_z > 0.0) {
        return Err(Error::NonPositiveNoise);
    }
    if n < MC_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n,
            min: MC_MIN_SAMPLES,
        });
    }
    let m_points = c.n_points();
    let m_bits = c.bits();
    let n_dims = c.n_dims();
    let inv_s2 = 1.0 / (sigma_z * sigma_z);
    // Per real dimension the noise variance is sigma_z^2 / 2.
    let noise_std = sigma_z / 2.0f64.sqrt();
    let n_blocks = n.div_ceil(MC_BLOCK);

    let block_sums: Vec<(f64, f64)> = (0..n_blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(blk as u64);
            let count = MC_BLOCK.min(n - blk * MC_BLOCK);
            let mut y = vec![0.0; n_dims];
            let mut ell = vec![0.0; m_points];
            let mut bit_sums = vec![0.0; m_bits * 2];
            let (mut sl, mut sl2) = (0.0, 0.0);
            for _ in 0..count {
                let s = rng.gen_range(0..m_points);
                let ps = c.point(s);
                let mut d = 0;
                while d < n_dims {
                    // Box-Muller pair; 1-u keeps the log argument in (0, 1].
                    let u1: f64 = 1.0 - rng.gen::<f64>();
                    let u2: f64 = rng.gen();
                    let r = (-2.0 * u1.ln()).sqrt();
                    let th = 2.0 * PI * u2;
                    y[d] = ps[d] + noise_std * r * th.cos();
                    y[d + 1] = ps[d + 1] + noise_std * r * th.sin();
                    d += 2;
                }
                let mut max_ell = f64::NEG_INFINITY;
                for p in 0..m_points {
                    let pp = c.point(p);
                    let d2: f64 = y.iter().zip(pp).map(|(a, b)| (a - b) * (a - b)).sum();
                    let e = -d2 * inv_s2;
                    ell[p] = e;
                    if e > max_ell {
                        max_ell = e;
                    }
                }
                bit_sums.iter_mut().for_each(|v| *v = 0.0);
                let mut num = 0.0;
                for p in 0..m_points {
                    let e = (ell[p] - max_ell).exp();
                    num += e;
                    for k in 0..m_bits {
                        let b = (p >> (m_bits - 1 - k)) & 1;
                        bit_sums[k * 2 + b] += e;
                    }
                }
                let dens = (0..m_bits).map(|k| {
                    let b = (s >> (m_bits - 1 - k)) & 1;
                    bit_sums[k * 2 + b]
                });
                let l = log_ratio_sum(num, dens);
                sl += l;
                sl2 += l * l;
            }
            (sl, sl2)
        })
        .collect();

    let (mut sl, mut sl2) = (0.0, 0.0);
    for (a, b) in block_sums {
        sl += a;
        sl2 += b;
    }
    let nf = n as f64;
    let mean = sl / nf / LN_2;
    let mean_sq = sl2 / nf / (LN_2 * LN_2);
    let var = ((mean_sq - mean * mean) * nf / (nf - 1.0)).max(0.0);
    let value = (m_bits as f64 - mean).clamp(0.0, m_bits as f64);
    Ok(GmiEstimate {
        value,
        method: GmiMethod::MonteCarlo,
        std_err: (var / nf).sqrt(),
        n_samples: n,
    })
}

/// SNR in dB at which the quadrature GMI reaches `target_bits`, by bisection
/// over [-20, 40] dB. GMI is monotone in SNR, which the bracket test checks
/// implicitly.
pub fn snr_for_target_gmi(
    c: &LabeledConstellation,
    target_bits: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let m = c.bits() as f64;
    if !(target_bits > 0.0 && target_bits < m) {
        return Err(Error::TargetOutOfRange {
            target: target_bits,
        });
    }
    let (mut lo, mut hi) = (-20.0f64, 40.0f64);
    let g_lo = gmi_gh(c, sigma_for_snr_db(lo), rule)?.value;
    let g_hi = gmi_gh(c, sigma_for_snr_db(hi), rule)?.value;
    if !(g_lo <= target_bits && target_bits <= g_hi) {
        return Err(Error::TargetOutOfRange {
            target: target_bits,
        });
    }
    let mut mid = 0.5 * (lo + hi);
    while hi - lo > 1e-5 {
        mid = 0.5 * (lo + hi);
        let g = gmi_gh(c, sigma_for_snr_db(mid), rule)?.value;
        if (g - target_bits).abs() <= 1e-5 {
            return Ok(mid);
        }
        if g < target_bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}
