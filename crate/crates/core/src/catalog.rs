//! Reference catalog of dual-polarization modulation formats.
//!
//! All constructions start on the odd integer grid (or unit circles for the
//! PSK family) and are power-normalized at the end. Polarization-multiplexed
//! (PM) formats are Cartesian squares of a Gray-labeled 2D format with the
//! x-polarization bits in front. Set-partitioned (SP) QAM keeps the points of
//! the parent PM grid whose coordinate sum is divisible by four, which is the
//! even D4 sublattice and doubles the squared minimum distance.

use crate::constellation::LabeledConstellation;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Canonical catalog names accepted by `build_catalog_format`.
pub const CATALOG_NAMES: [&str; 11] = [
    "PM-QPSK",
    "PM-16QAM",
    "PM-32QAM",
    "PM-64QAM",
    "PS-QPSK",
    "32SP-QAM8",
    "128SP-QAM16",
    "512SP-QAM32",
    "4D-2A8PSK-5",
    "4D-2A8PSK-6",
    "4D-2A8PSK-7",
];

/// Ring ratio used by the 2A8PSK formats when none is given.
pub const DEFAULT_RING_RATIO: f64 = 0.65;

fn gray_inverse(v: usize) -> usize {
    let mut k = v;
    let mut s = v >> 1;
    while s != 0 {
        k ^= s;
        s >>= 1;
    }
    k
}

/// Odd-integer level carried by a Gray bit pattern on an axis with 2^bits
/// levels: pattern v sits at grid position gray_inverse(v).
fn gray_level(v: usize, bits: usize) -> f64 {
    let pos = gray_inverse(v) as i64;
    (2 * pos - ((1i64 << bits) - 1)) as f64
}

/// Gray-labeled rectangular QAM on the odd integer grid, x-axis bits first.
/// (2,2) is 16QAM, (3,3) is 64QAM, (2,1) is rectangular 8QAM.
pub fn rect_qam_2d(x_bits: usize, y_bits: usize, name: &str) -> LabeledConstellation {
    let m = 1usize << (x_bits + y_bits);
    let mut pts = Vec::with_capacity(m * 2);
    for i in 0..m {
        let xv = i >> y_bits;
        let yv = i & ((1 << y_bits) - 1);
        pts.push(gray_level(xv, x_bits));
        pts.push(gray_level(yv, y_bits));
    }
    LabeledConstellation::new(2, pts, name).unwrap()
}

/// Gray-labeled square QAM with `bits` total (QPSK = 2, 16QAM = 4, 64QAM = 6).
pub fn square_qam_2d(bits: usize) -> Result<LabeledConstellation> {
    if bits % 2 != 0 || bits == 0 {
        return Err(Error::BadParam(format!(
            "square QAM needs an even bit count, got {bits}"
        )));
    }
    Ok(rect_qam_2d(bits / 2, bits / 2, &format!("{}qam", 1 << bits)))
}

/// 32-point cross QAM, quasi-Gray labeled.
///
/// Built as a Gray 4x8 rectangle (2 x-bits, 3 y-bits) whose outer rows
/// |y| = 7 fold onto the side columns: (x, y) -> (5 sign(x), |x| sign(y)).
/// The inner 4x6 block keeps per-axis Gray adjacency; folded points are
/// quasi-Gray against their new neighbors.
pub fn cross_qam32_2d() -> LabeledConstellation {
    let mut pts = Vec::with_capacity(64);
    for i in 0..32usize {
        let xv = i >> 3;
        let yv = i & 7;
        let mut x = gray_level(xv, 2);
        let mut y = gray_level(yv, 3);
        if y.abs() > 5.0 {
            let ax = x.abs();
            x = 5.0 * x.signum();
            y = ax * y.signum();
        }
        pts.push(x);
        pts.push(y);
    }
    LabeledConstellation::new(2, pts, "32cross").unwrap()
}

/// Cartesian square of a 2D format: label = x-pol bits then y-pol bits.
fn pm_product(c2: &LabeledConstellation, name: &str) -> LabeledConstellation {
    let m2 = c2.bits();
    let m = 1usize << (2 * m2);
    let mut pts = Vec::with_capacity(m * 4);
    for i in 0..m {
        let ix = i >> m2;
        let iy = i & ((1 << m2) - 1);
        pts.extend_from_slice(c2.point(ix));
        pts.extend_from_slice(c2.point(iy));
    }
    LabeledConstellation::new(4, pts, name).unwrap()
}

/// Keeps the parent points whose integer coordinate sum is divisible by four
/// and compacts labels in parent order. On an odd-coordinate grid this is the
/// even D4 sublattice, so exactly half the points survive.
fn sp_partition(parent: &LabeledConstellation, name: &str) -> LabeledConstellation {
    let mut pts = Vec::with_capacity(parent.coords().len() / 2);
    for i in 0..parent.n_points() {
        let p = parent.point(i);
        let s = p.iter().sum::<f64>() as i64;
        if s.rem_euclid(4) == 0 {
            pts.extend_from_slice(p);
        }
    }
    LabeledConstellation::new(4, pts, name).unwrap()
}

/// Polarization-switched QPSK: 3 bits on 8 points, one QPSK symbol in one
/// polarization and zero in the other. Bit 1 selects the polarization.
fn ps_qpsk() -> LabeledConstellation {
    let mut pts = Vec::with_capacity(32);
    for i in 0..8usize {
        let pol = (i >> 2) & 1;
        let re = if (i >> 1) & 1 == 0 { 1.0 } else { -1.0 };
        let im = if i & 1 == 0 { 1.0 } else { -1.0 };
        if pol == 0 {
            pts.extend_from_slice(&[re, im, 0.0, 0.0]);
        } else {
            pts.extend_from_slice(&[0.0, 0.0, re, im]);
        }
    }
    LabeledConstellation::new(4, pts, "PS-QPSK").unwrap()
}

/// Two-amplitude 8PSK over both polarizations, 5 to 7 bits per symbol.
///
/// Each polarization carries an offset 8PSK symbol (phases pi/8 + t pi/4,
/// Gray-coded over t) on one of two rings with radius ratio `ring_ratio`.
/// The rings always pair up as (outer, inner) or (inner, outer), so every
/// 4D point has the same total power.
///
/// Bit map (our convention; b1 is the MSB):
///   m=7: b1b2b3 = x phase, b4b5b6 = y phase, b7 = ring pattern.
///   m=6: b1b2b3 = x phase, b4b5b6 = y phase, pattern = parity of all six.
///   m=5: b1b2b3 = x phase, y phase bits = (b4, b5, b1^b2^b3),
///        pattern = b4^b5.
pub fn two_amplitude_8psk(bits: usize, ring_ratio: f64) -> Result<LabeledConstellation> {
    if !(ring_ratio > 0.0 && ring_ratio < 1.0) {
        return Err(Error::BadParam(format!(
            "ring ratio must be in (0, 1), got {ring_ratio}"
        )));
    }
    if !(5..=7).contains(&bits) {
        return Err(Error::BadParam(format!(
            "two-amplitude 8PSK supports 5..7 bits, got {bits}"
        )));
    }
    let m = 1usize << bits;
    let mut pts = Vec::with_capacity(m * 4);
    for i in 0..m {
        let (tx, ty, pattern) = match bits {
            7 => (
                gray_inverse((i >> 4) & 7),
                gray_inverse((i >> 1) & 7),
                i & 1,
            ),
            6 => {
                let px = (i >> 3) & 7;
                let py = i & 7;
                (
                    gray_inverse(px),
                    gray_inverse(py),
                    (px ^ py).count_ones() as usize & 1,
                )
            }
            5 => {
                let p = (i >> 2) & 7;
                let q1 = (i >> 1) & 1;
                let q2 = i & 1;
                let py = (q1 << 2) | (q2 << 1) | (p.count_ones() as usize & 1);
                (gray_inverse(p), gray_inverse(py), q1 ^ q2)
            }
            _ => unreachable!(),
        };
        let (rx, ry) = if pattern == 0 {
            (1.0, ring_ratio)
        } else {
            (ring_ratio, 1.0)
        };
        // Offset 8PSK (pi/8 + t pi/4) written as signed first-quadrant trig
        // values, so the sixteen sign reflections of a point are bit-exact.
        let c = (PI / 8.0).cos();
        let s = (PI / 8.0).sin();
        let unit = |t: usize| -> (f64, f64) {
            match t {
                0 => (c, s),
                1 => (s, c),
                2 => (-s, c),
                3 => (-c, s),
                4 => (-c, -s),
                5 => (-s, -c),
                6 => (s, -c),
                _ => (c, -s),
            }
        };
        let (cx, sx) = unit(tx);
        let (cy, sy) = unit(ty);
        pts.extend_from_slice(&[rx * cx, rx * sx, ry * cy, ry * sy]);
    }
    LabeledConstellation::new(4, pts, &format!("4D-2A8PSK-{bits}"))
}

/// Builds a normalized catalog format by name (case-insensitive).
///
/// `ring_ratio` applies to the 2A8PSK family only; other formats reject it.
pub fn build_catalog_format(
    name: &str,
    ring_ratio: Option<f64>,
) -> Result<LabeledConstellation> {
    let key = name.to_ascii_uppercase();
    let raw = match key.as_str() {
        "PM-QPSK" => pm_product(&square_qam_2d(2)?, "PM-QPSK"),
        "PM-16QAM" => pm_product(&square_qam_2d(4)?, "PM-16QAM"),
        "PM-32QAM" | "PM-32QAM-CROSS" => pm_product(&cross_qam32_2d(), "PM-32QAM"),
        "PM-64QAM" => pm_product(&square_qam_2d(6)?, "PM-64QAM"),
        "PS-QPSK" => ps_qpsk(),
        "32SP-QAM8" | "4D-32SP-QAM" => sp_partition(
            &pm_product(&rect_qam_2d(2, 1, "8qam"), "PM-8QAM"),
            "32SP-QAM8",
        ),
        "128SP-QAM16" | "4D-128SP-QAM" => sp_partition(
            &pm_product(&square_qam_2d(4)?, "PM-16QAM"),
            "128SP-QAM16",
        ),
        "512SP-QAM32" | "4D-512SP-QAM" => sp_partition(
            &pm_product(&cross_qam32_2d(), "PM-32QAM"),
            "512SP-QAM32",
        ),
        "4D-2A8PSK-5" | "2A8PSK-5" => {
            return two_amplitude_8psk(5, ring_ratio.unwrap_or(DEFAULT_RING_RATIO))?
                .normalize_power()
        }
        "4D-2A8PSK-6" | "2A8PSK-6" => {
            return two_amplitude_8psk(6, ring_ratio.unwrap_or(DEFAULT_RING_RATIO))?
                .normalize_power()
        }
        "4D-2A8PSK-7" | "2A8PSK-7" => {
            return two_amplitude_8psk(7, ring_ratio.unwrap_or(DEFAULT_RING_RATIO))?
                .normalize_power()
        }
        _ => return Err(Error::UnknownFormat(name.to_string())),
    };
    if ring_ratio.is_some() {
        return Err(Error::BadParam(format!(
            "{name} does not take a ring ratio"
        )));
    }
    raw.normalize_power()
}

/// All catalog formats with the requested bits per symbol, default parameters.
pub fn catalog_formats_with_bits(bits: usize) -> Vec<LabeledConstellation> {
    CATALOG_NAMES
        .iter()
        .filter_map(|n| build_catalog_format(n, None).ok())
        .filter(|c| c.bits() == bits)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn gray_code(k: usize) -> usize {
        k ^ (k >> 1)
    }

    #[test]
    fn gray_code_roundtrip_and_adjacency() {
        for k in 0..256usize {
            assert_eq!(gray_inverse(gray_code(k)), k);
        }
        for k in 0..255usize {
            let d = gray_code(k) ^ gray_code(k + 1);
            assert_eq!(d.count_ones(), 1);
        }
    }

    #[test]
    fn catalog_sizes_and_bits() {
        let want = [
            ("PM-QPSK", 16, 4),
            ("PM-16QAM", 256, 8),
            ("PM-32QAM", 1024, 10),
            ("PM-64QAM", 4096, 12),
            ("PS-QPSK", 8, 3),
            ("32SP-QAM8", 32, 5),
            ("128SP-QAM16", 128, 7),
            ("512SP-QAM32", 512, 9),
            ("4D-2A8PSK-5", 32, 5),
            ("4D-2A8PSK-6", 64, 6),
            ("4D-2A8PSK-7", 128, 7),
        ];
        for (name, m, bits) in want {
            let c = build_catalog_format(name, None).unwrap();
            assert_eq!(c.n_points(), m, "{name}");
            assert_eq!(c.bits(), bits, "{name}");
            assert_eq!(c.n_dims(), 4, "{name}");
            assert!(close(c.mean_square_norm(), 2.0, 1e-12), "{name}");
            c.validate().unwrap();
        }
    }

    #[test]
    fn unknown_and_bad_params_are_rejected() {
        assert!(matches!(
            build_catalog_format("PM-123QAM", None),
            Err(Error::UnknownFormat(_))
        ));
        assert!(matches!(
            build_catalog_format("4D-2A8PSK-7", Some(1.2)),
            Err(Error::BadParam(_))
        ));
        assert!(matches!(
            build_catalog_format("PM-QPSK", Some(0.5)),
            Err(Error::BadParam(_))
        ));
    }

    #[test]
    fn pm_16qam_sits_on_scaled_integer_grid() {
        // Second moment of the {±1,±3}² grid is 10 per complex dimension, so
        // normalization scales by 1/sqrt(10).
        let c = build_catalog_format("PM-16QAM", None).unwrap();
        let s = 1.0 / 10.0f64.sqrt();
        for i in 0..c.n_points() {
            for &x in c.point(i) {
                let level = x / s;
                let nearest = level.round();
                assert!(close(level, nearest, 1e-12));
                assert!([1.0, 3.0].contains(&nearest.abs()));
            }
        }
        // All-zero label: Gray pattern 00 per axis is grid position 0, the
        // lowest level -3.
        for &x in c.point(0) {
            assert!(close(x, -3.0 * s, 1e-12));
        }
    }

    #[test]
    fn square_qam_labels_are_gray_between_nearest_neighbors() {
        for bits in [2usize, 4, 6] {
            let c = square_qam_2d(bits).unwrap();
            let d2min = c.min_square_distance();
            for i in 0..c.n_points() {
                for j in 0..c.n_points() {
                    if i == j {
                        continue;
                    }
                    let d2: f64 = c
                        .point(i)
                        .iter()
                        .zip(c.point(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if d2 < d2min * 1.5 {
                        assert_eq!((i ^ j).count_ones(), 1, "bits={bits} {i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn cross_qam32_shape() {
        let c = cross_qam32_2d();
        assert_eq!(c.n_points(), 32);
        c.validate().unwrap();
        for i in 0..32 {
            let p = c.point(i);
            let (ax, ay) = (p[0].abs(), p[1].abs());
            assert!(ax <= 5.0 && ay <= 5.0);
            // Corners of the 6x6 grid are excluded.
            assert!(!(ax == 5.0 && ay == 5.0), "corner at {i}");
        }
        // Average energy of the standard 32-cross on this grid.
        assert!(close(c.mean_square_norm(), 20.0, 1e-12));
    }

    #[test]
    fn ps_qpsk_distance_doubles_pm_qpsk() {
        let ps = build_catalog_format("PS-QPSK", None).unwrap();
        let pm = build_catalog_format("PM-QPSK", None).unwrap();
        assert!(close(
            ps.min_square_distance(),
            2.0 * pm.min_square_distance(),
            1e-12
        ));
    }

    #[test]
    fn sp_qam_distance_doubles_parent() {
        let sp = build_catalog_format("128SP-QAM16", None).unwrap();
        let pm = build_catalog_format("PM-16QAM", None).unwrap();
        assert!(close(
            sp.min_square_distance(),
            2.0 * pm.min_square_distance(),
            1e-12
        ));

        let sp8 = build_catalog_format("32SP-QAM8", None).unwrap();
        let pm8 = pm_product(&rect_qam_2d(2, 1, "8qam"), "PM-8QAM")
            .normalize_power()
            .unwrap();
        assert!(close(
            sp8.min_square_distance(),
            2.0 * pm8.min_square_distance(),
            1e-12
        ));
    }

    #[test]
    fn sp_points_are_a_subset_of_the_parent() {
        // The partition keeps average power, so both normalize by the same
        // scale and the SP points must coincide with parent points.
        let sp = build_catalog_format("128SP-QAM16", None).unwrap();
        let pm = build_catalog_format("PM-16QAM", None).unwrap();
        for i in 0..sp.n_points() {
            let found = (0..pm.n_points()).any(|j| {
                sp.point(i)
                    .iter()
                    .zip(pm.point(j))
                    .all(|(a, b)| (a - b).abs() < 1e-12)
            });
            assert!(found, "SP point {i} missing from parent");
        }
    }

    #[test]
    fn moments_match_enumeration_oracles() {
        let pm_qpsk = build_catalog_format("PM-QPSK", None).unwrap();
        let m = pm_qpsk.moments().unwrap();
        assert!(close(m.kurt_excess, -1.0, 1e-12));
        assert!(close(m.cross4, 0.0, 1e-12));
        assert!(close(m.mu2, 1.0, 1e-12));

        // 16QAM fourth moment over {±1,±3}²: E|x|⁴ = 132, E|x|² = 10.
        let pm_16 = build_catalog_format("PM-16QAM", None).unwrap();
        let m = pm_16.moments().unwrap();
        assert!(close(m.kurt_excess, 132.0 / 100.0 - 2.0, 1e-12));
        assert!(close(m.kurt_excess, -0.68, 1e-12));
        assert!(close(m.cross4, 0.0, 1e-12));

        // PS-QPSK: one polarization silent, |x|² ∈ {0, 2} equally likely.
        let ps = build_catalog_format("PS-QPSK", None).unwrap();
        let m = ps.moments().unwrap();
        assert!(close(m.kurt_excess, 0.0, 1e-12));
        assert!(close(m.cross4, -1.0, 1e-12));

        // Two-ring PSK: closed forms in the ring ratio.
        let r: f64 = 0.65;
        let c = build_catalog_format("4D-2A8PSK-7", None).unwrap();
        let m = c.moments().unwrap();
        let kurt = 2.0 * (1.0 + r.powi(4)) / (1.0 + r * r).powi(2) - 2.0;
        let cross = 4.0 * r * r / (1.0 + r * r).powi(2) - 1.0;
        assert!(close(m.kurt_excess, kurt, 1e-12));
        assert!(close(m.cross4, cross, 1e-12));
        // 4D constant modulus forces kurt_excess + cross4 = -1.
        assert!(close(m.kurt_excess + m.cross4, -1.0, 1e-12));
    }

    #[test]
    fn two_ring_psk_is_constant_modulus() {
        for bits in [5usize, 6, 7] {
            let c = build_catalog_format(&format!("4D-2A8PSK-{bits}"), None).unwrap();
            for i in 0..c.n_points() {
                let p: f64 = c.point(i).iter().map(|x| x * x).sum();
                assert!(close(p, 2.0, 1e-12), "bits={bits} point {i}");
            }
        }
    }

    #[test]
    fn orthant_symmetry_of_catalog_formats() {
        // The 7-bit two-ring format and the PM grids are sign-flip closed;
        // parity-driven formats are not.
        for (name, want) in [
            ("4D-2A8PSK-7", true),
            ("PM-QPSK", true),
            ("PM-16QAM", true),
            ("4D-2A8PSK-5", false),
            ("4D-2A8PSK-6", false),
            ("128SP-QAM16", false),
            ("32SP-QAM8", false),
            ("PS-QPSK", false),
        ] {
            let c = build_catalog_format(name, None).unwrap();
            assert_eq!(c.is_orthant_symmetric(), want, "{name}");
        }
    }

    #[test]
    fn formats_by_bit_count() {
        let m7: Vec<String> = catalog_formats_with_bits(7)
            .iter()
            .map(|c| c.name().to_string())
            .collect();
        assert_eq!(m7, vec!["128SP-QAM16", "4D-2A8PSK-7"]);
        assert_eq!(catalog_formats_with_bits(11).len(), 0);
    }
}
