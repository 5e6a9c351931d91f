//! Fixed convolution kernels used by the two simple-point detectors.
//!
//! Convolution here means correlation with zero padding: a kernel with
//! weights `w`, extent `shape` and anchor `origin` maps `x` to
//! `y[p] = sum_k w[k] * x[p + k - origin]`.

use crate::detectors::Detector;
use crate::lattice::{patch_index, PATCH_CENTER, PATCH_OFFSETS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    pub shape: [usize; 3],
    pub origin: [usize; 3],
    /// Raster order, x fastest.
    pub weights: Vec<i8>,
}

impl Kernel {
    pub fn ones(shape: [usize; 3], origin: [usize; 3]) -> Self {
        Kernel {
            shape,
            origin,
            weights: vec![1; shape[0] * shape[1] * shape[2]],
        }
    }

    /// 3x3x3 kernel centered on the output voxel from per-position weights.
    pub fn patch(weights: [i8; 27]) -> Self {
        Kernel {
            shape: [3, 3, 3],
            origin: [1, 1, 1],
            weights: weights.to_vec(),
        }
    }

    /// Non-zero taps as (offset relative to the output voxel, weight).
    pub fn taps(&self) -> Vec<([isize; 3], f64)> {
        let [sx, sy, _] = self.shape;
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0)
            .map(|(i, &w)| {
                let k = [i % sx, (i / sx) % sy, i / (sx * sy)];
                let d = [
                    k[0] as isize - self.origin[0] as isize,
                    k[1] as isize - self.origin[1] as isize,
                    k[2] as isize - self.origin[2] as isize,
                ];
                (d, w as f64)
            })
            .collect()
    }

    pub fn positive_weight(&self) -> u32 {
        self.weights
            .iter()
            .filter(|&&w| w > 0)
            .map(|&w| w as u32)
            .sum()
    }
}

/// Which image a kernel is convolved with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelInput {
    Foreground,
    /// The inverted image `1 - x`.
    Background,
}

/// How a convolution response is turned into a detector quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// The raw response is a count.
    Count,
    /// The pattern is present iff the response reaches `required`; realized as
    /// the gate `max(0, s - (required - 1))`, exact on binary inputs.
    AllPresent { required: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSpec {
    pub name: String,
    pub kernel: Kernel,
    pub input: KernelInput,
    pub reduction: Reduction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelBank {
    pub detector: Detector,
    pub kernels: Vec<KernelSpec>,
}

impl KernelBank {
    pub fn for_detector(detector: Detector) -> Self {
        match detector {
            Detector::Euler => Self::euler(),
            Detector::Boolean => Self::boolean(),
        }
    }

    /// Vertex, three edges, three faces and the octant of the 6-adjacency
    /// cubical complex, each anchored at its lowest corner.
    pub fn euler() -> Self {
        let cell = |name: &str, shape: [usize; 3]| {
            let kernel = Kernel::ones(shape, [0, 0, 0]);
            let required = kernel.positive_weight();
            KernelSpec {
                name: name.to_string(),
                kernel,
                input: KernelInput::Background,
                reduction: Reduction::AllPresent { required },
            }
        };
        KernelBank {
            detector: Detector::Euler,
            kernels: vec![
                cell("vertex", [1, 1, 1]),
                cell("edge_x", [2, 1, 1]),
                cell("edge_y", [1, 2, 1]),
                cell("edge_z", [1, 1, 2]),
                cell("face_xy", [2, 2, 1]),
                cell("face_xz", [2, 1, 2]),
                cell("face_yz", [1, 2, 2]),
                cell("octant", [2, 2, 2]),
            ],
        }
    }

    /// The three neighbor-count kernels followed by every rotation of the
    /// five cell configurations (6 + 8 + 12 + 12 + 8 pattern kernels).
    pub fn boolean() -> Self {
        let count = |name: &str, adjacency: fn([isize; 3]) -> bool, input| {
            let mut w = [0i8; 27];
            for (i, d) in PATCH_OFFSETS.iter().enumerate() {
                if i != PATCH_CENTER && adjacency(*d) {
                    w[i] = 1;
                }
            }
            KernelSpec {
                name: name.to_string(),
                kernel: Kernel::patch(w),
                input,
                reduction: Reduction::Count,
            }
        };
        let mut kernels = vec![
            count("x6_bar", |d| manhattan(d) == 1, KernelInput::Background),
            count("x26", |_| true, KernelInput::Foreground),
            count("x18", |d| manhattan(d) <= 2, KernelInput::Foreground),
        ];
        for cell in Cell::ALL {
            for (r, pattern) in cell.orbit().into_iter().enumerate() {
                let kernel = Kernel::patch(pattern.weights());
                let required = kernel.positive_weight();
                kernels.push(KernelSpec {
                    name: format!("{}_{r}", cell.name()),
                    kernel,
                    input: KernelInput::Foreground,
                    reduction: Reduction::AllPresent { required },
                });
            }
        }
        KernelBank {
            detector: Detector::Boolean,
            kernels,
        }
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&KernelSpec> {
        self.kernels.iter().find(|k| k.name == name)
    }

    /// Pattern kernels of one cell configuration.
    pub fn cell_kernels(&self, cell: Cell) -> impl Iterator<Item = &KernelSpec> {
        let prefix = format!("{}_", cell.name());
        self.kernels
            .iter()
            .filter(move |k| k.name.starts_with(&prefix))
    }
}

/// Box sum over every anchor whose cell lies inside the 3x3x3 patch of the
/// output voxel; turns a per-anchor cell indicator into a per-patch count.
pub fn patch_aggregation(cell: &Kernel) -> Kernel {
    let shape = [4 - cell.shape[0], 4 - cell.shape[1], 4 - cell.shape[2]];
    // anchors run from offset -1 up to 1 - (extent - 1)
    Kernel::ones(shape, [1, 1, 1])
}

fn manhattan(d: [isize; 3]) -> isize {
    d.iter().map(|c| c.abs()).sum()
}

/// The five cell configurations of the Boolean simple-point test.
///
/// `A` configurations are built around background cells, `B`
/// configurations around foreground cells; offsets are relative to the
/// center point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    /// Background face neighbor whose four edge neighbors are foreground.
    ABar6,
    /// Foreground corner neighbor with its three faces and three edges background.
    B26,
    /// Foreground edge neighbor with its two adjacent faces, the two other
    /// faces it touches, and its four neighboring edges background.
    B18,
    /// Background edge neighbor with both adjacent faces background.
    ABar18,
    /// Fully background octant: corner, its three edges and three faces.
    ABar26,
}

impl Cell {
    pub const ALL: [Cell; 5] = [
        Cell::ABar6,
        Cell::B26,
        Cell::B18,
        Cell::ABar18,
        Cell::ABar26,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Cell::ABar6 => "a6_bar",
            Cell::B26 => "b26",
            Cell::B18 => "b18",
            Cell::ABar18 => "a18_bar",
            Cell::ABar26 => "a26_bar",
        }
    }

    fn base(self) -> CellPattern {
        let fg: Vec<[isize; 3]>;
        let bg: Vec<[isize; 3]>;
        match self {
            Cell::ABar6 => {
                bg = vec![[1, 0, 0]];
                fg = vec![[1, 1, 0], [1, -1, 0], [1, 0, 1], [1, 0, -1]];
            }
            Cell::B26 => {
                fg = vec![[1, 1, 1]];
                bg = vec![
                    [1, 0, 0],
                    [0, 1, 0],
                    [0, 0, 1],
                    [1, 1, 0],
                    [1, 0, 1],
                    [0, 1, 1],
                ];
            }
            Cell::B18 => {
                fg = vec![[1, 1, 0]];
                bg = vec![
                    [1, 0, 0],
                    [0, 1, 0],
                    [0, 0, 1],
                    [0, 0, -1],
                    [1, 0, 1],
                    [1, 0, -1],
                    [0, 1, 1],
                    [0, 1, -1],
                ];
            }
            Cell::ABar18 => {
                fg = vec![];
                bg = vec![[1, 1, 0], [1, 0, 0], [0, 1, 0]];
            }
            Cell::ABar26 => {
                fg = vec![];
                bg = vec![
                    [1, 1, 1],
                    [1, 0, 0],
                    [0, 1, 0],
                    [0, 0, 1],
                    [1, 1, 0],
                    [1, 0, 1],
                    [0, 1, 1],
                ];
            }
        }
        CellPattern::new(fg, bg)
    }

    /// All distinct rotations of the configuration, in ascending mask order.
    pub fn orbit(self) -> Vec<CellPattern> {
        let base = self.base();
        let mut out: Vec<CellPattern> = rotations().iter().map(|r| base.rotated(r)).collect();
        out.sort_by_key(|p| (p.foreground_mask(), p.background_mask()));
        out.dedup();
        out
    }
}

/// A partial assignment of the 26 neighbors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellPattern {
    pub foreground: Vec<[isize; 3]>,
    pub background: Vec<[isize; 3]>,
}

impl CellPattern {
    fn new(mut foreground: Vec<[isize; 3]>, mut background: Vec<[isize; 3]>) -> Self {
        foreground.sort();
        background.sort();
        CellPattern {
            foreground,
            background,
        }
    }

    fn rotated(&self, r: &[[isize; 3]; 3]) -> Self {
        let apply = |d: &[isize; 3]| -> [isize; 3] {
            std::array::from_fn(|i| r[i][0] * d[0] + r[i][1] * d[1] + r[i][2] * d[2])
        };
        CellPattern::new(
            self.foreground.iter().map(apply).collect(),
            self.background.iter().map(apply).collect(),
        )
    }

    /// Patch-position mask of the cells required to be foreground.
    pub fn foreground_mask(&self) -> u32 {
        self.foreground
            .iter()
            .fold(0, |m, &d| m | 1 << patch_index(d))
    }

    pub fn background_mask(&self) -> u32 {
        self.background
            .iter()
            .fold(0, |m, &d| m | 1 << patch_index(d))
    }

    /// +1 where foreground is required, -1 where background is required.
    pub fn weights(&self) -> [i8; 27] {
        let mut w = [0i8; 27];
        for &d in &self.foreground {
            w[patch_index(d)] = 1;
        }
        for &d in &self.background {
            w[patch_index(d)] = -1;
        }
        w
    }
}

/// The 24 proper rotations of the cube as signed permutation matrices.
pub fn rotations() -> Vec<[[isize; 3]; 3]> {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut out = Vec::with_capacity(24);
    for perm in PERMS {
        for signs in 0..8u32 {
            let mut m = [[0isize; 3]; 3];
            for (row, &col) in perm.iter().enumerate() {
                m[row][col] = if signs >> row & 1 == 1 { -1 } else { 1 };
            }
            if det(&m) == 1 {
                out.push(m);
            }
        }
    }
    out
}

fn det(m: &[[isize; 3]; 3]) -> isize {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_group_has_24_elements() {
        let r = rotations();
        assert_eq!(r.len(), 24);
        let mut dedup = r.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 24);
    }

    #[test]
    fn orbit_sizes() {
        assert_eq!(Cell::ABar6.orbit().len(), 6);
        assert_eq!(Cell::B26.orbit().len(), 8);
        assert_eq!(Cell::B18.orbit().len(), 12);
        assert_eq!(Cell::ABar18.orbit().len(), 12);
        assert_eq!(Cell::ABar26.orbit().len(), 8);
    }

    #[test]
    fn bank_cardinalities() {
        assert_eq!(KernelBank::euler().len(), 8);
        let b = KernelBank::boolean();
        assert_eq!(b.len(), 3 + 46);
        assert_eq!(b.cell_kernels(Cell::B18).count(), 12);
    }

    #[test]
    fn patterns_never_touch_center() {
        for cell in Cell::ALL {
            for p in cell.orbit() {
                let touched = p.foreground_mask() | p.background_mask();
                assert_eq!(touched >> PATCH_CENTER & 1, 0);
                assert_eq!(p.foreground_mask() & p.background_mask(), 0);
            }
        }
    }

    #[test]
    fn euler_aggregation_shapes() {
        let bank = KernelBank::euler();
        let sums: Vec<usize> = bank
            .kernels
            .iter()
            .map(|k| patch_aggregation(&k.kernel).weights.len())
            .collect();
        assert_eq!(sums, vec![27, 18, 18, 18, 12, 12, 12, 8]);
    }

    #[test]
    fn kernel_taps_are_relative_to_origin() {
        let k = Kernel::ones([2, 1, 1], [0, 0, 0]);
        assert_eq!(k.taps(), vec![([0, 0, 0], 1.0), ([1, 0, 0], 1.0)]);
        let agg = patch_aggregation(&k);
        let taps = agg.taps();
        assert_eq!(taps.first().unwrap().0, [-1, -1, -1]);
        assert_eq!(taps.last().unwrap().0, [0, 1, 1]);
    }
}
