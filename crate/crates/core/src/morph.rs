//! Morphological soft-skeleton baseline: iterated erosion and opening,
//! thresholded at 0.5. It makes no topological guarantee.

use crate::error::{Error, Result};
use crate::volume::{BinaryVolume, Shape};

/// Min or max over a window of 3 along `axis`; out-of-lattice voxels are 0.
fn pool_axis(shape: Shape, src: &[f64], axis: usize, max: bool) -> Vec<f64> {
    let dims = shape.dims();
    let mut out = vec![0.0; src.len()];
    for p in shape.points() {
        let mut acc = src[shape.index(p)];
        for step in [-1isize, 1] {
            let c = p[axis] as isize + step;
            let v = if c < 0 || c >= dims[axis] as isize {
                0.0
            } else {
                let mut q = p;
                q[axis] = c as usize;
                src[shape.index(q)]
            };
            acc = if max { acc.max(v) } else { acc.min(v) };
        }
        out[shape.index(p)] = acc;
    }
    out
}

fn erode(shape: Shape, x: &[f64]) -> Vec<f64> {
    let a = pool_axis(shape, x, 0, false);
    let b = pool_axis(shape, x, 1, false);
    let c = pool_axis(shape, x, 2, false);
    a.iter()
        .zip(&b)
        .zip(&c)
        .map(|((a, b), c)| a.min(*b).min(*c))
        .collect()
}

fn dilate(shape: Shape, x: &[f64]) -> Vec<f64> {
    let a = pool_axis(shape, x, 0, true);
    let b = pool_axis(shape, &a, 1, true);
    pool_axis(shape, &b, 2, true)
}

fn open(shape: Shape, x: &[f64]) -> Vec<f64> {
    dilate(shape, &erode(shape, x))
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

pub fn morphological_skeleton_baseline(
    v: &BinaryVolume,
    iterations: usize,
) -> Result<BinaryVolume> {
    if iterations == 0 {
        return Err(Error::domain(
            "morphological baseline needs at least one iteration",
        ));
    }
    let shape = v.shape();
    let mut img: Vec<f64> = v.data().iter().map(|&b| b as f64).collect();
    let opened = open(shape, &img);
    let mut skel: Vec<f64> = img.iter().zip(&opened).map(|(a, b)| relu(a - b)).collect();
    for _ in 0..iterations {
        img = erode(shape, &img);
        let opened = open(shape, &img);
        for ((s, a), b) in skel.iter_mut().zip(&img).zip(&opened) {
            let delta = relu(a - b);
            *s += relu(delta - *s * delta);
        }
    }
    let data = skel.iter().map(|&s| (s >= 0.5) as u8).collect();
    BinaryVolume::from_vec(shape, data)
}
