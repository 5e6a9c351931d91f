//! Exact digital topology of binary volumes: component labeling, Euler
//! characteristic, and Betti numbers under (26, 6) connectivity.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::lattice::Adjacency;
use crate::volume::{pad_background, BinaryVolume};

/// Which voxels a labeling pass considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Foreground,
    Background,
}

/// Component labels: 0 for voxels outside the target set, 1..=count otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub labels: Vec<u32>,
    pub count: usize,
}

/// Labels the `adjacency`-connected components of the target set by
/// breadth-first flood fill. Labels are assigned in raster order of each
/// component's first voxel.
pub fn label_components(v: &BinaryVolume, adjacency: Adjacency, target: Target) -> Labels {
    let shape = v.shape();
    let want = match target {
        Target::Foreground => 1,
        Target::Background => 0,
    };
    let offsets = adjacency.offsets();
    let data = v.data();
    let mut labels = vec![0u32; shape.len()];
    let mut queue = VecDeque::new();
    let mut count = 0usize;
    for start in 0..shape.len() {
        if data[start] != want || labels[start] != 0 {
            continue;
        }
        count += 1;
        let label = count as u32;
        labels[start] = label;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let p = shape.point(i);
            for d in &offsets {
                let q = [
                    p[0] as isize + d[0],
                    p[1] as isize + d[1],
                    p[2] as isize + d[2],
                ];
                if !shape.contains_signed(q) {
                    continue;
                }
                let j = shape.index([q[0] as usize, q[1] as usize, q[2] as usize]);
                if data[j] == want && labels[j] == 0 {
                    labels[j] = label;
                    queue.push_back(j);
                }
            }
        }
    }
    Labels { labels, count }
}

/// Cell counts of the cubical complex spanned by the foreground under
/// 6-adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComplexCounts {
    /// Voxels.
    pub v: u64,
    /// 6-adjacent voxel pairs.
    pub e: u64,
    /// Fully occupied 2x2 squares in the xy, xz and yz planes.
    pub f: u64,
    /// Fully occupied 2x2x2 cubes.
    pub oct: u64,
}

impl ComplexCounts {
    /// `v - e + f - oct`, the Euler characteristic of the 6-connected set.
    pub fn alternating_sum(&self) -> i64 {
        self.v as i64 - self.e as i64 + self.f as i64 - self.oct as i64
    }
}

pub fn complex_counts(v: &BinaryVolume) -> ComplexCounts {
    let shape = v.shape();
    let (nx, ny, nz) = (shape.nx, shape.ny, shape.nz);
    let at = |x: usize, y: usize, z: usize| v.data()[x + nx * (y + ny * z)] != 0;
    let mut c = ComplexCounts::default();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if !at(x, y, z) {
                    continue;
                }
                c.v += 1;
                let px = x + 1 < nx && at(x + 1, y, z);
                let py = y + 1 < ny && at(x, y + 1, z);
                let pz = z + 1 < nz && at(x, y, z + 1);
                c.e += px as u64 + py as u64 + pz as u64;
                let pxy = px && py && at(x + 1, y + 1, z);
                let pxz = px && pz && at(x + 1, y, z + 1);
                let pyz = py && pz && at(x, y + 1, z + 1);
                c.f += pxy as u64 + pxz as u64 + pyz as u64;
                if pxy && pxz && pyz && at(x + 1, y + 1, z + 1) {
                    c.oct += 1;
                }
            }
        }
    }
    c
}

/// Euler characteristic of the 26-connected foreground, obtained from the
/// 6-connected background of the volume padded with one background layer:
/// `G26(S) = G6(complement of S) - 1`.
pub fn euler_characteristic(v: &BinaryVolume) -> i64 {
    let background = pad_background(v, 1).inverted();
    complex_counts(&background).alternating_sum() - 1
}

/// Betti numbers and Euler characteristic of a binary volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopologyReport {
    /// 26-connected foreground objects.
    pub beta0: u64,
    /// Tunnels.
    pub beta1: u64,
    /// Cavities: background components enclosed by the foreground.
    pub beta2: u64,
    pub chi: i64,
}

impl TopologyReport {
    pub fn betti(&self) -> (u64, u64, u64) {
        (self.beta0, self.beta1, self.beta2)
    }

    /// Absolute Betti differences against a reference.
    pub fn errors_against(&self, reference: &TopologyReport) -> (u64, u64, u64) {
        (
            self.beta0.abs_diff(reference.beta0),
            self.beta1.abs_diff(reference.beta1),
            self.beta2.abs_diff(reference.beta2),
        )
    }
}

/// `beta0` counts 26-components of the foreground, `beta2` counts
/// 6-components of the background that do not reach the padding layer, and
/// `beta1` follows from `chi = beta0 - beta1 + beta2`.
pub fn betti_numbers(v: &BinaryVolume) -> TopologyReport {
    let beta0 = label_components(v, Adjacency::TwentySix, Target::Foreground).count as u64;
    let padded = pad_background(v, 1);
    // every background component touching the border merges into the pad
    let background = label_components(&padded, Adjacency::Six, Target::Background).count as u64;
    let beta2 = background - 1;
    let chi = euler_characteristic(v);
    let beta1 = beta0 as i64 + beta2 as i64 - chi;
    debug_assert!(beta1 >= 0, "negative beta1 for chi {chi}");
    TopologyReport {
        beta0,
        beta1: beta1.max(0) as u64,
        beta2,
        chi,
    }
}
