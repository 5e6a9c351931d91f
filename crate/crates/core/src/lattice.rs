//! Lattice geometry: n-neighborhoods, 3x3x3 neighborhood codes, and the
//! eight parity subfields used for parallel deletion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{BinaryVolume, Point, Shape};

/// The three neighborhood relations of the cubic lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Adjacency {
    /// Manhattan distance 1 (face neighbors).
    Six,
    /// Manhattan distance <= 2 within the 3x3x3 cube (face and edge neighbors).
    Eighteen,
    /// Chebyshev distance 1 (face, edge and corner neighbors).
    TwentySix,
}

impl Adjacency {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            6 => Ok(Adjacency::Six),
            18 => Ok(Adjacency::Eighteen),
            26 => Ok(Adjacency::TwentySix),
            _ => Err(Error::domain(format!(
                "neighborhood order must be 6, 18 or 26, got {order}"
            ))),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Adjacency::Six => 6,
            Adjacency::Eighteen => 18,
            Adjacency::TwentySix => 26,
        }
    }

    /// Whether two distinct points at offset `d` are adjacent.
    #[inline]
    pub fn admits(self, d: [isize; 3]) -> bool {
        let cheb = d.iter().map(|c| c.abs()).max().unwrap_or(0);
        let manh: isize = d.iter().map(|c| c.abs()).sum();
        if cheb != 1 {
            return false;
        }
        match self {
            Adjacency::Six => manh == 1,
            Adjacency::Eighteen => manh <= 2,
            Adjacency::TwentySix => true,
        }
    }

    /// Neighbor offsets in raster order (x fastest).
    pub fn offsets(self) -> Vec<[isize; 3]> {
        PATCH_OFFSETS
            .iter()
            .copied()
            .filter(|&d| self.admits(d))
            .collect()
    }
}

/// Offsets of the 27 patch positions in raster order; index 13 is the center.
pub const PATCH_OFFSETS: [[isize; 3]; 27] = {
    let mut out = [[0isize; 3]; 27];
    let mut i = 0;
    while i < 27 {
        out[i] = [
            (i % 3) as isize - 1,
            ((i / 3) % 3) as isize - 1,
            (i / 9) as isize - 1,
        ];
        i += 1;
    }
    out
};

pub const PATCH_CENTER: usize = 13;

/// Patch index of an offset in `{-1, 0, 1}^3`.
#[inline]
pub const fn patch_index(d: [isize; 3]) -> usize {
    ((d[0] + 1) + 3 * (d[1] + 1) + 9 * (d[2] + 1)) as usize
}

/// In-bounds `order`-neighbors of `p`, in raster order.
pub fn neighbors(p: Point, adjacency: Adjacency, shape: Shape) -> Result<Vec<Point>> {
    if !shape.contains(p) {
        return Err(Error::domain(format!("point {p:?} outside shape {shape}")));
    }
    Ok(adjacency
        .offsets()
        .into_iter()
        .map(|d| {
            [
                p[0] as isize + d[0],
                p[1] as isize + d[1],
                p[2] as isize + d[2],
            ]
        })
        .filter(|&q| shape.contains_signed(q))
        .map(|q| [q[0] as usize, q[1] as usize, q[2] as usize])
        .collect())
}

/// One configuration of the 26 neighbors of a foreground point.
///
/// Bit `k` holds the k-th neighbor of the 3x3x3 patch in raster order
/// (x fastest, then y, then z) with the center skipped, so patch positions
/// 0..=12 map to bits 0..=12 and positions 14..=26 map to bits 13..=25.
/// The center itself is implicitly foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NeighborhoodConfig(u32);

impl NeighborhoodConfig {
    pub const COUNT: u32 = 1 << 26;
    pub const MASK: u32 = Self::COUNT - 1;
    pub const EMPTY: NeighborhoodConfig = NeighborhoodConfig(0);
    pub const FULL: NeighborhoodConfig = NeighborhoodConfig(Self::MASK);

    pub fn new(bits: u32) -> Result<Self> {
        if bits > Self::MASK {
            return Err(Error::domain(format!(
                "neighborhood code {bits:#x} exceeds 26 bits"
            )));
        }
        Ok(NeighborhoodConfig(bits))
    }

    /// Keeps the low 26 bits.
    #[inline]
    pub const fn from_bits_truncate(bits: u32) -> Self {
        NeighborhoodConfig(bits & Self::MASK)
    }

    #[inline]
    pub const fn bits(self) -> u32 {
        self.0
    }

    /// Number of foreground neighbors.
    #[inline]
    pub const fn count(self) -> u32 {
        self.0.count_ones()
    }

    /// 27-bit patch word indexed by patch position, center bit set.
    #[inline]
    pub const fn patch_word(self) -> u32 {
        let lo = self.0 & 0x1fff;
        let hi = self.0 >> 13;
        lo | (1 << PATCH_CENTER) | (hi << (PATCH_CENTER + 1))
    }

    /// Inverse of [`NeighborhoodConfig::patch_word`]; the center bit is ignored.
    #[inline]
    pub const fn from_patch_word(word: u32) -> Self {
        let lo = word & 0x1fff;
        let hi = (word >> (PATCH_CENTER + 1)) & 0x1fff;
        NeighborhoodConfig(lo | (hi << 13))
    }

    /// The 3x3x3 patch as booleans in raster order; the center is foreground.
    pub fn to_patch(self) -> [bool; 27] {
        let word = self.patch_word();
        std::array::from_fn(|i| word >> i & 1 == 1)
    }

    pub fn from_patch(patch: &[bool; 27]) -> Self {
        let word = patch
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &b)| acc | ((b as u32) << i));
        Self::from_patch_word(word)
    }

    /// The patch as a standalone 3x3x3 volume with the center set to `center`.
    pub fn to_volume(self, center: bool) -> BinaryVolume {
        let word = self.patch_word();
        BinaryVolume::from_fn(Shape::new(3, 3, 3), |p| {
            let i = p[0] + 3 * p[1] + 9 * p[2];
            if i == PATCH_CENTER {
                center
            } else {
                word >> i & 1 == 1
            }
        })
    }

    /// Reads the 26-neighborhood of `p`; out-of-lattice neighbors are background.
    #[inline]
    pub fn from_volume(v: &BinaryVolume, p: Point) -> Self {
        let shape = v.shape();
        let data = v.data();
        let [x, y, z] = p;
        let interior =
            x > 0 && y > 0 && z > 0 && x + 1 < shape.nx && y + 1 < shape.ny && z + 1 < shape.nz;
        let mut word = 0u32;
        if interior {
            let sy = shape.nx;
            let sz = shape.nx * shape.ny;
            let base = shape.index(p) - 1 - sy - sz;
            let mut bit = 0;
            for dz in 0..3 {
                for dy in 0..3 {
                    let row = base + dz * sz + dy * sy;
                    for dx in 0..3 {
                        word |= (data[row + dx] as u32) << bit;
                        bit += 1;
                    }
                }
            }
        } else {
            for (i, d) in PATCH_OFFSETS.iter().enumerate() {
                let q = [x as isize + d[0], y as isize + d[1], z as isize + d[2]];
                if v.get_signed(q) {
                    word |= 1 << i;
                }
            }
        }
        Self::from_patch_word(word)
    }
}

/// One of the eight parity classes `(x mod 2, y mod 2, z mod 2) = (i, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubfieldId {
    i: u8,
    j: u8,
    k: u8,
}

impl SubfieldId {
    /// All subfields in the fixed processing order, lexicographic in `(i, j, k)`.
    pub const ALL: [SubfieldId; 8] = {
        let mut out = [SubfieldId { i: 0, j: 0, k: 0 }; 8];
        let mut n = 0;
        while n < 8 {
            out[n] = SubfieldId {
                i: (n >> 2) as u8 & 1,
                j: (n >> 1) as u8 & 1,
                k: n as u8 & 1,
            };
            n += 1;
        }
        out
    };

    pub fn new(i: u8, j: u8, k: u8) -> Result<Self> {
        if i > 1 || j > 1 || k > 1 {
            return Err(Error::domain(format!(
                "subfield ({i},{j},{k}) not in {{0,1}}^3"
            )));
        }
        Ok(SubfieldId { i, j, k })
    }

    pub fn parts(self) -> (u8, u8, u8) {
        (self.i, self.j, self.k)
    }

    #[inline]
    pub fn contains(self, p: Point) -> bool {
        (p[0] & 1) as u8 == self.i && (p[1] & 1) as u8 == self.j && (p[2] & 1) as u8 == self.k
    }

    /// Points of this subfield inside `shape`, in raster order.
    pub fn points(self, shape: Shape) -> impl Iterator<Item = Point> {
        let (i, j, k) = (self.i as usize, self.j as usize, self.k as usize);
        (k..shape.nz).step_by(2).flat_map(move |z| {
            (j..shape.ny)
                .step_by(2)
                .flat_map(move |y| (i..shape.nx).step_by(2).map(move |x| [x, y, z]))
        })
    }
}

impl std::fmt::Display for SubfieldId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

/// Mask of the points `(x + i, y + j, z + k)` with `x, y, z` even.
pub fn subfield_mask(sf: SubfieldId, shape: Shape) -> BinaryVolume {
    BinaryVolume::from_fn(shape, |p| sf.contains(p))
}
