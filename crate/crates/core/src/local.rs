//! Classification of a foreground point from its 26-neighborhood alone.
//!
//! [`is_simple_exact`] is the reference definition, evaluated literally on
//! 3x3x3 volumes. [`LocalTables`] provides allocation-free bit-level
//! versions of the three classifiers for hot loops (the census and the
//! binary peeler).

use std::sync::OnceLock;

use crate::kernels::Cell;
use crate::lattice::{Adjacency, NeighborhoodConfig, PATCH_CENTER, PATCH_OFFSETS};
use crate::topology::{euler_characteristic, label_components, Target};

/// A point is simple iff deleting it changes neither the number of
/// 26-connected objects nor the Euler characteristic of its 3x3x3 patch.
///
/// Before deletion the center joins every foreground neighbor into one
/// object; after deletion every remaining component still touches the center
/// position, so the object count is just the number of 26-components.
pub fn is_simple_exact(cfg: NeighborhoodConfig) -> bool {
    let before = cfg.to_volume(true);
    let after = cfg.to_volume(false);
    let objects_before = label_components(&before, Adjacency::TwentySix, Target::Foreground).count;
    let objects_after = label_components(&after, Adjacency::TwentySix, Target::Foreground).count;
    if objects_before != objects_after {
        return false;
    }
    euler_characteristic(&before) == euler_characteristic(&after)
}

/// At most one foreground 26-neighbor.
pub fn is_endpoint(cfg: NeighborhoodConfig) -> bool {
    cfg.count() <= 1
}

const NEIGHBORS: u32 = ((1 << 27) - 1) & !(1 << PATCH_CENTER);

/// Precomputed patch masks, all indexed by patch position.
#[derive(Debug)]
pub struct LocalTables {
    faces: u32,
    n18: u32,
    /// The 12 squares through the center, minus the center.
    squares: [u32; 12],
    /// The 8 octants around the center, minus the center.
    octants: [u32; 8],
    /// (care mask, required foreground bits) per pattern, grouped per cell.
    patterns: [Vec<(u32, u32)>; 5],
}

impl LocalTables {
    fn build() -> Self {
        let mut faces = 0;
        let mut n18 = 0;
        for (i, d) in PATCH_OFFSETS.iter().enumerate() {
            if i == PATCH_CENTER {
                continue;
            }
            let m: isize = d.iter().map(|c| c.abs()).sum();
            if m == 1 {
                faces |= 1 << i;
            }
            if m <= 2 {
                n18 |= 1 << i;
            }
        }
        let mut squares = [0u32; 12];
        let mut octants = [0u32; 8];
        let (mut ns, mut no) = (0, 0);
        for (i, d) in PATCH_OFFSETS.iter().enumerate() {
            if i == PATCH_CENTER {
                continue;
            }
            // each cell through the center is identified by its far corner
            let zeros = d.iter().filter(|&&c| c == 0).count();
            let cell_mask = cell_through_center(*d);
            match zeros {
                1 => {
                    squares[ns] = cell_mask;
                    ns += 1;
                }
                0 => {
                    octants[no] = cell_mask;
                    no += 1;
                }
                _ => {}
            }
        }
        let patterns = Cell::ALL.map(|cell| {
            cell.orbit()
                .iter()
                .map(|p| {
                    (
                        p.foreground_mask() | p.background_mask(),
                        p.foreground_mask(),
                    )
                })
                .collect()
        });
        LocalTables {
            faces,
            n18,
            squares,
            octants,
            patterns,
        }
    }

    pub fn get() -> &'static LocalTables {
        static TABLES: OnceLock<LocalTables> = OnceLock::new();
        TABLES.get_or_init(LocalTables::build)
    }

    /// Change of the foreground Euler characteristic when the center is
    /// deleted, from the background cells that contain the center:
    /// one vertex, minus edges, plus squares, minus octants.
    #[inline]
    pub fn euler_delta(&self, cfg: NeighborhoodConfig) -> i32 {
        let bg = !cfg.patch_word() & NEIGHBORS;
        let edges = (bg & self.faces).count_ones() as i32;
        let squares = self.squares.iter().filter(|&&m| bg & m == m).count() as i32;
        let octants = self.octants.iter().filter(|&&m| bg & m == m).count() as i32;
        1 - edges + squares - octants
    }

    /// Euler-characteristic detector: flags the center when deletion leaves
    /// the local genus unchanged. Necessary, not sufficient, for simplicity.
    #[inline]
    pub fn euler_flag(&self, cfg: NeighborhoodConfig) -> bool {
        self.euler_delta(cfg) == 0
    }

    /// Whether the foreground neighbors form exactly one 26-component.
    #[inline]
    pub fn single_component(&self, cfg: NeighborhoodConfig) -> bool {
        let set = cfg.patch_word() & NEIGHBORS;
        if set == 0 {
            return false;
        }
        let mut comp = set & set.wrapping_neg();
        loop {
            let next = dilate26(comp) & set;
            if next == comp {
                return comp == set;
            }
            comp = next;
        }
    }

    /// Bit-level equivalent of [`is_simple_exact`].
    #[inline]
    pub fn simple(&self, cfg: NeighborhoodConfig) -> bool {
        self.euler_flag(cfg) && self.single_component(cfg)
    }

    #[inline]
    fn cell_count(&self, cell: Cell, word: u32) -> u32 {
        self.patterns[cell as usize]
            .iter()
            .filter(|&&(care, fg)| word & care == fg)
            .count() as u32
    }

    /// Boolean characterization, clause by clause.
    #[inline]
    pub fn boolean_simple(&self, cfg: NeighborhoodConfig) -> bool {
        let word = cfg.patch_word();
        let x6_bar = (!word & self.faces).count_ones() as i32;
        if x6_bar == 1 {
            return true;
        }
        if cfg.count() == 1 {
            return true;
        }
        let b26 = self.cell_count(Cell::B26, word);
        if b26 != 0 {
            return false;
        }
        if (word & self.n18).count_ones() == 1 {
            return true;
        }
        if self.cell_count(Cell::ABar6, word) != 0 || self.cell_count(Cell::B18, word) != 0 {
            return false;
        }
        let a18 = self.cell_count(Cell::ABar18, word) as i32;
        let a26 = self.cell_count(Cell::ABar26, word) as i32;
        x6_bar - a18 + a26 == 1
    }
}

/// Mask (without the center) of the square or octant spanned by the center
/// and the far corner `d`.
fn cell_through_center(d: [isize; 3]) -> u32 {
    let mut mask = 0;
    for (i, e) in PATCH_OFFSETS.iter().enumerate() {
        if i == PATCH_CENTER {
            continue;
        }
        let inside = (0..3).all(|a| e[a] == 0 || e[a] == d[a]);
        if inside {
            mask |= 1 << i;
        }
    }
    mask
}

const X_LO: u32 = mask_where(0, 0);
const X_HI: u32 = mask_where(0, 2);
const Y_LO: u32 = mask_where(1, 0);
const Y_HI: u32 = mask_where(1, 2);

const fn mask_where(axis: usize, value: usize) -> u32 {
    let mut m = 0;
    let mut i = 0;
    while i < 27 {
        let c = match axis {
            0 => i % 3,
            1 => (i / 3) % 3,
            _ => i / 9,
        };
        if c == value {
            m |= 1 << i;
        }
        i += 1;
    }
    m
}

/// Separable 3x3x3 dilation of a patch word.
#[inline]
fn dilate26(m: u32) -> u32 {
    const PATCH: u32 = (1 << 27) - 1;
    let m = m | ((m << 1) & !X_LO & PATCH) | ((m >> 1) & !X_HI);
    let m = m | ((m << 3) & !Y_LO & PATCH) | ((m >> 3) & !Y_HI);
    (m | (m << 9) | (m >> 9)) & PATCH
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(bits: u32) -> NeighborhoodConfig {
        NeighborhoodConfig::new(bits).unwrap()
    }

    fn with_offsets(offsets: &[[isize; 3]]) -> NeighborhoodConfig {
        let mut patch = [false; 27];
        for &d in offsets {
            patch[crate::lattice::patch_index(d)] = true;
        }
        NeighborhoodConfig::from_patch(&patch)
    }

    #[test]
    fn isolated_voxel_is_not_simple() {
        assert!(!is_simple_exact(NeighborhoodConfig::EMPTY));
        assert!(!LocalTables::get().simple(NeighborhoodConfig::EMPTY));
        assert_eq!(
            LocalTables::get().euler_delta(NeighborhoodConfig::EMPTY),
            -1
        );
    }

    #[test]
    fn bar_tip_is_simple() {
        let c = with_offsets(&[[1, 0, 0]]);
        assert!(is_simple_exact(c));
        assert_eq!(LocalTables::get().euler_delta(c), 0);
        // any single neighbor, whatever its position
        for k in 0..26 {
            assert!(is_simple_exact(cfg(1 << k)), "bit {k}");
        }
    }

    #[test]
    fn interior_point_is_not_simple() {
        assert!(!is_simple_exact(NeighborhoodConfig::FULL));
        assert_eq!(LocalTables::get().euler_delta(NeighborhoodConfig::FULL), 1);
    }

    #[test]
    fn line_interior_is_not_simple() {
        let c = with_offsets(&[[1, 0, 0], [-1, 0, 0]]);
        assert!(!is_simple_exact(c));
        assert!(!LocalTables::get().boolean_simple(c));
    }

    #[test]
    fn endpoint_definition() {
        assert!(is_endpoint(NeighborhoodConfig::EMPTY));
        assert!(is_endpoint(cfg(1 << 7)));
        assert!(!is_endpoint(cfg(0b11)));
    }

    #[test]
    fn dilation_matches_adjacency() {
        for (i, d) in PATCH_OFFSETS.iter().enumerate() {
            let grown = dilate26(1 << i);
            for (j, e) in PATCH_OFFSETS.iter().enumerate() {
                let adjacent = (0..3).all(|a| (d[a] - e[a]).abs() <= 1);
                assert_eq!(grown >> j & 1 == 1, adjacent, "{d:?} {e:?}");
            }
        }
    }

    #[test]
    fn tables_shape() {
        let t = LocalTables::get();
        assert_eq!(t.faces.count_ones(), 6);
        assert_eq!(t.n18.count_ones(), 18);
        assert!(t.squares.iter().all(|m| m.count_ones() == 3));
        assert!(t.octants.iter().all(|m| m.count_ones() == 7));
    }

    #[test]
    fn fast_classifiers_match_literal_on_pseudorandom_codes() {
        let t = LocalTables::get();
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..3000 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let c = NeighborhoodConfig::from_bits_truncate(state as u32);
            let exact = is_simple_exact(c);
            assert_eq!(t.simple(c), exact, "{c:?}");
            assert_eq!(t.boolean_simple(c), exact, "{c:?}");
            if exact {
                assert!(t.euler_flag(c));
            }
        }
    }
}
