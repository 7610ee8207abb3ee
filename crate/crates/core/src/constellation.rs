//! Unit-energy 16-QAM with a set-partitioning label for multi-level coding.
//!
//! Points sit on the grid `(2i - 3, 2j - 3) / sqrt(10)` for `i, j` in `0..4`
//! (`i` indexes the in-phase axis). The 4-bit label `b3 b2 b1 b0` (bit `l` is
//! level `l`) is an Ungerboeck partition chain Z² / RZ² / 2Z² / 2RZ² / 4Z²:
//!
//! | level | bit                         | subset min. distance (grid units) |
//! |-------|-----------------------------|-----------------------------------|
//! | 0     | `(i + j) mod 2`             | 2√2 (checkerboard)                |
//! | 1     | `i mod 2`                   | 4                                 |
//! | 2     | `(i/2 + j/2) mod 2`         | 4√2                               |
//! | 3     | `i/2`                       | single point                      |
//!
//! Level 0 is the LDPC-coded level. Full label table, as `label: (I, Q)` in
//! grid units:
//!
//! ```text
//!  0:(-3,-3)  1:(-3,-1)  2:(-1,-1)  3:(-1,-3)  4:(-3, 1)  5:(-3, 3)  6:(-1, 3)  7:(-1, 1)
//!  8:( 1, 1)  9:( 1, 3) 10:( 3, 3) 11:( 3, 1) 12:( 1,-3) 13:( 1,-1) 14:( 3,-1) 15:( 3,-3)
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of constellation points.
pub const ORDER: usize = 16;
/// Bits per label.
pub const LEVELS: usize = 4;
/// Number of distinct energy rings.
pub const RINGS: usize = 3;

/// The 16-QAM alphabet with its labeling and ring structure.
#[derive(Debug, Clone)]
pub struct Constellation {
    /// `points[label]` is the point carrying `label`.
    points: [Complex64; ORDER],
    /// `rings[label]` is the ring index of `points[label]`.
    rings: [usize; ORDER],
}

/// Labels with a given level-0 bit, in increasing label order.
pub fn level0_subset(bit: u8) -> [u8; 8] {
    let mut out = [0u8; 8];
    let mut k = 0;
    for label in 0..ORDER as u8 {
        if label & 1 == bit & 1 {
            out[k] = label;
            k += 1;
        }
    }
    out
}

fn grid_label(i: usize, j: usize) -> u8 {
    let b0 = (i + j) % 2;
    let b1 = i % 2;
    let b2 = (i / 2 + j / 2) % 2;
    let b3 = i / 2;
    (b0 | b1 << 1 | b2 << 2 | b3 << 3) as u8
}

/// Builds the unit-energy 16-QAM constellation.
pub fn build_16qam() -> Constellation {
    let scale = 1.0 / 10f64.sqrt();
    let mut points = [Complex64::new(0.0, 0.0); ORDER];
    let mut rings = [0usize; ORDER];
    for i in 0..4 {
        for j in 0..4 {
            let re = 2.0 * i as f64 - 3.0;
            let im = 2.0 * j as f64 - 3.0;
            let label = grid_label(i, j) as usize;
            points[label] = Complex64::new(re * scale, im * scale);
            // Grid energy is 2, 10 or 18.
            rings[label] = match (re * re + im * im) as u32 {
                2 => 0,
                10 => 1,
                _ => 2,
            };
        }
    }
    Constellation { points, rings }
}

impl Default for Constellation {
    fn default() -> Self {
        build_16qam()
    }
}

impl Constellation {
    /// All points indexed by label.
    pub fn points(&self) -> &[Complex64; ORDER] {
        &self.points
    }

    /// Point carrying `label` (low 4 bits are used).
    #[inline]
    pub fn point(&self, label: u8) -> Complex64 {
        self.points[(label & 0x0f) as usize]
    }

    /// Maps per-level bits `[b0, b1, b2, b3]` to a point.
    #[inline]
    pub fn map_bits(&self, bits: [u8; LEVELS]) -> Complex64 {
        self.point(pack_label(bits))
    }

    /// Ring index of the point carrying `label`.
    #[inline]
    pub fn ring_of_label(&self, label: u8) -> usize {
        self.rings[(label & 0x0f) as usize]
    }

    /// Label of `x`, which must be a constellation point within 1e-9.
    pub fn label_of(&self, x: Complex64) -> Result<u8> {
        self.points
            .iter()
            .position(|p| (p - x).norm() <= 1e-9)
            .map(|l| l as u8)
            .ok_or(Error::InvalidPoint { re: x.re, im: x.im })
    }

    /// Ring index of `x`, ordered by increasing squared magnitude.
    pub fn ring_of(&self, x: Complex64) -> Result<usize> {
        self.label_of(x).map(|l| self.ring_of_label(l))
    }

    /// Squared magnitude of each ring: 0.2, 1.0, 1.8.
    pub fn ring_energies(&self) -> [f64; RINGS] {
        [0.2, 1.0, 1.8]
    }
}

/// Packs per-level bits into a label.
#[inline]
pub fn pack_label(bits: [u8; LEVELS]) -> u8 {
    (bits[0] & 1) | (bits[1] & 1) << 1 | (bits[2] & 1) << 2 | (bits[3] & 1) << 3
}

/// Splits a label into per-level bits.
#[inline]
pub fn unpack_label(label: u8) -> [u8; LEVELS] {
    [label & 1, label >> 1 & 1, label >> 2 & 1, label >> 3 & 1]
}
