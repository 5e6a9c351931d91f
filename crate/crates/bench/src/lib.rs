//! Shared fixtures for the criterion benchmarks.

use voxskel_core::{BinaryVolume, Shape};

/// Solid ball of radius `r` centered in a cube of side `2r + 3`.
pub fn ball(r: usize) -> BinaryVolume {
    let n = 2 * r + 3;
    let c = (n / 2) as isize;
    let r2 = (r * r) as isize;
    BinaryVolume::from_fn(Shape::new(n, n, n), |p| {
        let d: isize = p.iter().map(|&v| (v as isize - c).pow(2)).sum();
        d <= r2
    })
}
