//! Labeled multidimensional constellations.
//!
//! A constellation is an M x N matrix of real coordinates where row i carries
//! the m-bit big-endian label i (m = log2 M). N counts real dimensions, so a
//! dual-polarization format has N = 4 and N/2 = 2 complex dimensions.

use crate::error::{Error, Result};

/// Mean squared norm target is N/2: unit average power per complex dimension,
/// so SNR = 1 / sigma_z^2 with the noise variance given per complex dimension.
pub fn target_power(n_dims: usize) -> f64 {
    n_dims as f64 / 2.0
}

/// An M-point constellation in N real dimensions with implicit labels.
///
/// Point storage is row-major; the point in row i carries label i. Keeping the
/// label equal to the row index makes the per-bit index sets derivable without
/// a separate label table.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledConstellation {
    n_dims: usize,
    points: Vec<f64>,
    name: String,
}

impl LabeledConstellation {
    /// Builds a constellation from a flat row-major coordinate matrix.
    ///
    /// M must be a power of two with M >= 2, and every coordinate finite.
    pub fn new(n_dims: usize, points: Vec<f64>, name: &str) -> Result<Self> {
        if n_dims == 0 || n_dims % 2 != 0 {
            return Err(Error::BadParam(format!(
                "n_dims must be a positive even number, got {n_dims}"
            )));
        }
        if points.is_empty() || points.len() % n_dims != 0 {
            return Err(Error::BadParam(format!(
                "coordinate count {} is not a multiple of n_dims {n_dims}",
                points.len()
            )));
        }
        let m_points = points.len() / n_dims;
        if m_points < 2 || !m_points.is_power_of_two() {
            return Err(Error::BadParam(format!(
                "point count {m_points} is not a power of two >= 2"
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadParam("non-finite coordinate".into()));
        }
        Ok(LabeledConstellation {
            n_dims,
            points,
            name: name.to_string(),
        })
    }

    /// Number of real dimensions N.
    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    /// Number of points M.
    pub fn n_points(&self) -> usize {
        self.points.len() / self.n_dims
    }

    /// Bits per symbol m = log2(M).
    pub fn bits(&self) -> usize {
        self.n_points().trailing_zeros() as usize
    }

    /// Coordinates of the point with label i.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.n_dims..(i + 1) * self.n_dims]
    }

    /// Flat row-major coordinate matrix.
    pub fn coords(&self) -> &[f64] {
        &self.points
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Value of bit k of label i, with k in 1..=m counted from the most
    /// significant bit.
    pub fn bit(&self, i: usize, k: usize) -> u8 {
        ((i >> (self.bits() - k)) & 1) as u8
    }

    /// Mean squared Euclidean norm over all points.
    pub fn mean_square_norm(&self) -> f64 {
        let m = self.n_points();
        let sum: f64 = self.points.iter().map(|x| x * x).sum();
        sum / m as f64
    }

    /// Returns the same constellation scaled so E[||X||^2] = N/2.
    ///
    /// An already-normalized input is returned unchanged so repeated calls are
    /// byte-stable.
    pub fn normalize_power(&self) -> Result<Self> {
        let p = self.mean_square_norm();
        if p <= 0.0 {
            return Err(Error::AllZeroConstellation);
        }
        let s = (target_power(self.n_dims) / p).sqrt();
        if (s - 1.0).abs() < 1e-13 {
            return Ok(self.clone());
        }
        let points = self.points.iter().map(|x| x * s).collect();
        Ok(LabeledConstellation {
            n_dims: self.n_dims,
            points,
            name: self.name.clone(),
        })
    }

    /// Smallest squared Euclidean distance between any two points.
    pub fn min_square_distance(&self) -> f64 {
        let m = self.n_points();
        let mut best = f64::INFINITY;
        for i in 0..m {
            let pi = self.point(i);
            for j in (i + 1)..m {
                let pj = self.point(j);
                let d2: f64 = pi.iter().zip(pj).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 < best {
                    best = d2;
                }
            }
        }
        best
    }

    /// Checks the full type invariants: distinct points after normalization.
    pub fn validate(&self) -> Result<()> {
        let normed = self.normalize_power()?;
        if normed.min_square_distance() <= 1e-9 * 1e-9 {
            return Err(Error::BadParam(format!(
                "points not pairwise distinct (min distance {:.3e})",
                normed.min_square_distance().sqrt()
            )));
        }
        Ok(())
    }

    /// Index sets I_k^b for every bit position and value.
    pub fn bit_index_sets(&self) -> BitIndexSets {
        let m_bits = self.bits();
        let m_points = self.n_points();
        let mut sets = Vec::with_capacity(m_bits);
        for k in 1..=m_bits {
            let mut pair: [Vec<usize>; 2] = [
                Vec::with_capacity(m_points / 2),
                Vec::with_capacity(m_points / 2),
            ];
            for i in 0..m_points {
                pair[self.bit(i, k) as usize].push(i);
            }
            sets.push(pair);
        }
        BitIndexSets { sets }
    }

    /// Fourth-order modulation moments under a uniform input distribution.
    ///
    /// Defined for dual-polarization (N = 4) constellations; the two complex
    /// dimensions are (x1, x2) and (x3, x4).
    pub fn moments(&self) -> Result<ModulationMoments> {
        if self.n_dims != 4 {
            return Err(Error::WrongDimension {
                expected: 4,
                got: self.n_dims,
            });
        }
        let m = self.n_points() as f64;
        let mut p1 = 0.0; // E|x_1|^2
        let mut p2 = 0.0; // E|x_2|^2
        let mut q1 = 0.0; // E|x_1|^4
        let mut q2 = 0.0; // E|x_2|^4
        let mut c12 = 0.0; // E|x_1|^2 |x_2|^2
        for i in 0..self.n_points() {
            let p = self.point(i);
            let a2 = p[0] * p[0] + p[1] * p[1];
            let b2 = p[2] * p[2] + p[3] * p[3];
            p1 += a2;
            p2 += b2;
            q1 += a2 * a2;
            q2 += b2 * b2;
            c12 += a2 * b2;
        }
        p1 /= m;
        p2 /= m;
        q1 /= m;
        q2 /= m;
        c12 /= m;
        if p1 <= 0.0 || p2 <= 0.0 {
            return Err(Error::AllZeroConstellation);
        }
        Ok(ModulationMoments {
            mu2: 0.5 * (p1 + p2),
            kurt_excess: 0.5 * (q1 / (p1 * p1) + q2 / (p2 * p2)) - 2.0,
            cross4: c12 / (p1 * p2) - 1.0,
        })
    }

    /// True if the point set is mapped to itself by every combination of
    /// coordinate sign flips and no point touches a coordinate axis.
    ///
    /// This is the geometric condition for the format to be expressible as an
    /// orthant seed; labels are not part of the check.
    pub fn is_orthant_symmetric(&self) -> bool {
        let n = self.n_dims;
        if self.n_points() % (1 << n) != 0 {
            return false;
        }
        if self.points.iter().any(|&x| x == 0.0) {
            return false;
        }
        // Reflect every point into the first orthant; the set is sign-flip
        // closed iff each folded point appears exactly 2^N times.
        let mut folded: Vec<Vec<u64>> = (0..self.n_points())
            .map(|i| self.point(i).iter().map(|x| x.abs().to_bits()).collect())
            .collect();
        folded.sort();
        folded
            .chunks(1 << n)
            .all(|c| c.iter().all(|p| *p == c[0]))
    }

    /// Extracts the strictly-positive-orthant points as a seed, in ascending
    /// label order. Requires `is_orthant_symmetric` to hold.
    pub fn first_orthant_seed(&self) -> Result<OrthantSeed> {
        if !self.is_orthant_symmetric() {
            return Err(Error::InfeasibleConstraint(format!(
                "{} is not closed under coordinate sign flips",
                self.name
            )));
        }
        let mut pts = Vec::new();
        for i in 0..self.n_points() {
            let p = self.point(i);
            if p.iter().all(|&x| x > 0.0) {
                pts.extend_from_slice(p);
            }
        }
        OrthantSeed::new(self.n_dims, pts)
    }
}

/// Per-bit index partitions: for each bit position k and value b, the labels
/// whose bit k equals b.
#[derive(Debug, Clone)]
pub struct BitIndexSets {
    sets: Vec<[Vec<usize>; 2]>,
}

impl BitIndexSets {
    /// Indices with bit k (1-based, MSB first) equal to b.
    pub fn set(&self, k: usize, b: u8) -> &[usize] {
        &self.sets[k - 1][b as usize]
    }

    pub fn n_bits(&self) -> usize {
        self.sets.len()
    }
}

/// Fourth-order moments that drive modulation-dependent nonlinear
/// interference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationMoments {
    /// Mean squared magnitude per complex dimension.
    pub mu2: f64,
    /// E[|x_c|^4] / E[|x_c|^2]^2 - 2, averaged over the complex dimensions.
    /// Equals -1 for constant-modulus polarizations, 0 for a circular
    /// Gaussian.
    pub kurt_excess: f64,
    /// E[|x_1|^2 |x_2|^2] / (E[|x_1|^2] E[|x_2|^2]) - 1.
    pub cross4: f64,
}

/// First-orthant generator of an orthant-symmetric constellation: S points
/// with strictly non-negative coordinates, expanded by all 2^N sign patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthantSeed {
    n_dims: usize,
    seed_points: Vec<f64>,
}

impl OrthantSeed {
    pub fn new(n_dims: usize, seed_points: Vec<f64>) -> Result<Self> {
        if n_dims == 0 || n_dims % 2 != 0 {
            return Err(Error::BadParam(format!(
                "n_dims must be a positive even number, got {n_dims}"
            )));
        }
        if seed_points.is_empty() || seed_points.len() % n_dims != 0 {
            return Err(Error::BadParam(
                "seed coordinate count not a multiple of n_dims".into(),
            ));
        }
        let s = seed_points.len() / n_dims;
        if !s.is_power_of_two() {
            return Err(Error::BadParam(format!(
                "seed count {s} is not a power of two"
            )));
        }
        if seed_points.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::BadParam(
                "seed coordinates must be finite and >= 0".into(),
            ));
        }
        Ok(OrthantSeed { n_dims, seed_points })
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn n_seeds(&self) -> usize {
        self.seed_points.len() / self.n_dims
    }

    /// Bits consumed by the seed index: log2(seed count).
    pub fn seed_bits(&self) -> usize {
        self.n_seeds().trailing_zeros() as usize
    }

    pub fn point(&self, t: usize) -> &[f64] {
        &self.seed_points[t * self.n_dims..(t + 1) * self.n_dims]
    }

    pub fn coords(&self) -> &[f64] {
        &self.seed_points
    }
}

/// Expands a first-orthant seed to the full sign-symmetric constellation.
///
/// Label layout: the N sign bits are the most significant bits (bit value 0
/// means positive sign in that dimension, dimension 1 first), followed by the
/// seed index bits. A single sign flip therefore moves a point to a label at
/// Hamming distance one, so the sign bits are Gray across adjacent orthants.
pub fn orthant_expand(seed: &OrthantSeed, name: &str) -> Result<LabeledConstellation> {
    let n = seed.n_dims();
    for t in 0..seed.n_seeds() {
        if let Some(d) = seed.point(t).iter().position(|&x| x == 0.0) {
            return Err(Error::SeedOnAxis { point: t, dim: d + 1 });
        }
    }
    let n_orthants = 1usize << n;
    let s_bits = seed.seed_bits();
    let m = n_orthants * seed.n_seeds();
    let mut points = Vec::with_capacity(m * n);
    for i in 0..m {
        let sign_pattern = i >> s_bits;
        let t = i & (seed.n_seeds() - 1);
        let p = seed.point(t);
        for d in 0..n {
            let neg = (sign_pattern >> (n - 1 - d)) & 1 == 1;
            points.push(if neg { -p[d] } else { p[d] });
        }
    }
    LabeledConstellation::new(n, points, name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn bit_index_sets_follow_big_endian_convention() {
        // M=4 toy constellation; values are irrelevant for index sets.
        let c = LabeledConstellation::new(
            2,
            vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0],
            "qpsk",
        )
        .unwrap();
        let sets = c.bit_index_sets();
        assert_eq!(sets.set(1, 0), &[0, 1]);
        assert_eq!(sets.set(1, 1), &[2, 3]);
        assert_eq!(sets.set(2, 0), &[0, 2]);
        assert_eq!(sets.set(2, 1), &[1, 3]);
    }

    #[test]
    fn bit_index_sets_partition_for_all_bits() {
        let coords: Vec<f64> = (0..64 * 4).map(|v| (v as f64 * 0.37).sin()).collect();
        let c = LabeledConstellation::new(4, coords, "t").unwrap();
        let sets = c.bit_index_sets();
        for k in 1..=c.bits() {
            assert_eq!(sets.set(k, 0).len(), 32);
            assert_eq!(sets.set(k, 1).len(), 32);
            let mut union: Vec<usize> = sets.set(k, 0).to_vec();
            union.extend_from_slice(sets.set(k, 1));
            union.sort();
            assert_eq!(union, (0..64).collect::<Vec<_>>());
        }
    }

    #[test]
    fn normalize_scales_qpsk_to_unit_power() {
        let c = LabeledConstellation::new(
            2,
            vec![3.0, 3.0, 3.0, -3.0, -3.0, 3.0, -3.0, -3.0],
            "qpsk",
        )
        .unwrap();
        let n = c.normalize_power().unwrap();
        assert!(close(n.mean_square_norm(), 1.0, 1e-14));
        let r = 1.0 / (2.0f64).sqrt();
        assert!(close(n.point(0)[0], r, 1e-14));
        assert!(close(n.point(0)[1], r, 1e-14));
    }

    #[test]
    fn normalize_is_idempotent_and_byte_stable() {
        let coords: Vec<f64> = (0..32 * 4).map(|v| ((v * v) as f64 * 0.11).cos()).collect();
        let c = LabeledConstellation::new(4, coords, "t").unwrap();
        let once = c.normalize_power().unwrap();
        let twice = once.normalize_power().unwrap();
        assert_eq!(once.coords(), twice.coords());
        assert!(close(once.mean_square_norm(), 2.0, 1e-12));
    }

    #[test]
    fn all_zero_constellation_is_rejected() {
        let c = LabeledConstellation::new(2, vec![0.0; 8], "z").unwrap();
        assert_eq!(c.normalize_power(), Err(Error::AllZeroConstellation));
    }

    #[test]
    fn orthant_expand_single_2d_seed_gives_qpsk_with_gray_signs() {
        let seed = OrthantSeed::new(2, vec![1.0, 1.0]).unwrap();
        let c = orthant_expand(&seed, "qpsk").unwrap();
        assert_eq!(c.n_points(), 4);
        // Label 0 = (+,+), label 1 (binary 01) flips dimension 2, etc.
        assert_eq!(c.point(0), &[1.0, 1.0]);
        assert_eq!(c.point(1), &[1.0, -1.0]);
        assert_eq!(c.point(2), &[-1.0, 1.0]);
        assert_eq!(c.point(3), &[-1.0, -1.0]);
    }

    #[test]
    fn orthant_expand_counts_and_closure() {
        // 8 distinct strictly positive 4D seed points -> 128 points.
        let coords: Vec<f64> = (0..8 * 4).map(|v| 0.2 + (v as f64 * 0.613).fract()).collect();
        let seed = OrthantSeed::new(4, coords).unwrap();
        let c = orthant_expand(&seed, "os128").unwrap();
        assert_eq!(c.n_points(), 128);
        assert_eq!(c.bits(), 7);
        assert!(c.is_orthant_symmetric());

        // Flipping sign bit j of a label reflects the point in dimension j.
        for i in 0..c.n_points() {
            for d in 0..4 {
                let flipped = i ^ (1 << (c.bits() - 1 - d));
                let a = c.point(i);
                let b = c.point(flipped);
                for e in 0..4 {
                    if e == d {
                        assert_eq!(a[e], -b[e]);
                    } else {
                        assert_eq!(a[e], b[e]);
                    }
                }
            }
        }
    }

    #[test]
    fn orthant_expand_rejects_zero_coordinate() {
        let seed = OrthantSeed::new(2, vec![1.0, 0.0, 0.5, 0.5]).unwrap();
        match orthant_expand(&seed, "bad") {
            Err(Error::SeedOnAxis { point: 0, dim: 2 }) => {}
            other => panic!("expected SeedOnAxis, got {other:?}"),
        }
    }

    #[test]
    fn seed_roundtrip_through_expansion() {
        let coords: Vec<f64> = (0..16 * 4).map(|v| 0.1 + (v as f64 * 0.377).fract()).collect();
        let seed = OrthantSeed::new(4, coords).unwrap();
        let c = orthant_expand(&seed, "m8").unwrap();
        assert_eq!(c.n_points(), 256);
        let back = c.first_orthant_seed().unwrap();
        // Same point set; order may differ, so compare sorted rows.
        let mut a: Vec<Vec<u64>> = (0..seed.n_seeds())
            .map(|t| seed.point(t).iter().map(|x| x.to_bits()).collect())
            .collect();
        let mut b: Vec<Vec<u64>> = (0..back.n_seeds())
            .map(|t| back.point(t).iter().map(|x| x.to_bits()).collect())
            .collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn moments_of_hand_built_pm_qpsk() {
        // Product of two QPSKs, unit power per complex dimension.
        let r = 0.5f64.sqrt();
        let mut coords = Vec::new();
        for i in 0..16 {
            let sx = if i & 8 == 0 { r } else { -r };
            let sy = if i & 4 == 0 { r } else { -r };
            let tx = if i & 2 == 0 { r } else { -r };
            let ty = if i & 1 == 0 { r } else { -r };
            coords.extend_from_slice(&[sx, sy, tx, ty]);
        }
        let c = LabeledConstellation::new(4, coords, "pm-qpsk").unwrap();
        let mom = c.moments().unwrap();
        assert!(close(mom.mu2, 1.0, 1e-15));
        assert!(close(mom.kurt_excess, -1.0, 1e-12));
        assert!(close(mom.cross4, 0.0, 1e-12));
    }

    #[test]
    fn moments_need_four_dimensions() {
        let c = LabeledConstellation::new(2, vec![1.0, 1.0, -1.0, -1.0], "t").unwrap();
        assert_eq!(
            c.moments(),
            Err(Error::WrongDimension { expected: 4, got: 2 })
        );
    }
}
