//! Synthetic test shapes with known topology, each surrounded by at least
//! one layer of background.
//!
//! | kind          | (b0, b1, b2) |
//! |---------------|--------------|
//! | line          | (1, 0, 0)    |
//! | solid_box     | (1, 0, 0)    |
//! | thick_torus   | (1, 1, 0)    |
//! | hollow_shell  | (1, 0, 1)    |
//! | random_blob   | varies       |

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{BinaryVolume, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Line,
    SolidBox,
    ThickTorus,
    HollowShell,
    RandomBlob,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Line,
        ShapeKind::SolidBox,
        ShapeKind::ThickTorus,
        ShapeKind::HollowShell,
        ShapeKind::RandomBlob,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Line => "line",
            ShapeKind::SolidBox => "solid_box",
            ShapeKind::ThickTorus => "thick_torus",
            ShapeKind::HollowShell => "hollow_shell",
            ShapeKind::RandomBlob => "random_blob",
        }
    }

    /// Betti numbers the kind is built to have, if fixed.
    pub fn expected_betti(self) -> Option<(u64, u64, u64)> {
        match self {
            ShapeKind::Line | ShapeKind::SolidBox => Some((1, 0, 0)),
            ShapeKind::ThickTorus => Some((1, 1, 0)),
            ShapeKind::HollowShell => Some((1, 0, 1)),
            ShapeKind::RandomBlob => None,
        }
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown shape kind `{s}`")))
    }
}

impl std::fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    /// Straight line along x.
    Line {
        length: usize,
    },
    SolidBox {
        extent: [usize; 3],
    },
    /// Torus around the z axis: ring radius `major`, tube radius `minor`.
    ThickTorus {
        major: f64,
        minor: f64,
    },
    /// Ball of radius `outer` minus the concentric ball of radius `outer - thickness`.
    HollowShell {
        outer: f64,
        thickness: f64,
    },
    /// Box-smoothed uniform noise on a `size`^3 grid, thresholded so that
    /// roughly `fill` of the interior is foreground.
    RandomBlob {
        size: usize,
        smoothing: usize,
        fill: f64,
    },
}

impl ShapeSpec {
    pub fn default_for(kind: ShapeKind) -> Self {
        match kind {
            ShapeKind::Line => ShapeSpec::Line { length: 5 },
            ShapeKind::SolidBox => ShapeSpec::SolidBox { extent: [5, 5, 5] },
            ShapeKind::ThickTorus => ShapeSpec::ThickTorus {
                major: 6.0,
                minor: 2.5,
            },
            ShapeKind::HollowShell => ShapeSpec::HollowShell {
                outer: 6.0,
                thickness: 2.0,
            },
            ShapeKind::RandomBlob => ShapeSpec::RandomBlob {
                size: 16,
                smoothing: 2,
                fill: 0.5,
            },
        }
    }

    pub fn kind(&self) -> ShapeKind {
        match self {
            ShapeSpec::Line { .. } => ShapeKind::Line,
            ShapeSpec::SolidBox { .. } => ShapeKind::SolidBox,
            ShapeSpec::ThickTorus { .. } => ShapeKind::ThickTorus,
            ShapeSpec::HollowShell { .. } => ShapeKind::HollowShell,
            ShapeSpec::RandomBlob { .. } => ShapeKind::RandomBlob,
        }
    }
}

fn cube_for_radius(r: f64) -> (usize, f64) {
    let n = (2.0 * r).ceil() as usize + 3;
    (n, (n - 1) as f64 / 2.0)
}

/// Builds the shape; deterministic for a fixed `seed` (only `random_blob`
/// uses it).
pub fn make_shape(spec: &ShapeSpec, seed: u64) -> Result<BinaryVolume> {
    match *spec {
        ShapeSpec::Line { length } => {
            if length == 0 {
                return Err(Error::domain("line length must be positive"));
            }
            Ok(BinaryVolume::from_fn(Shape::new(length + 2, 3, 3), |p| {
                p[1] == 1 && p[2] == 1 && (1..=length).contains(&p[0])
            }))
        }
        ShapeSpec::SolidBox { extent } => {
            if extent.contains(&0) {
                return Err(Error::domain("box extent must be positive on every axis"));
            }
            let shape = Shape::new(extent[0] + 2, extent[1] + 2, extent[2] + 2);
            Ok(BinaryVolume::from_fn(shape, |p| {
                (0..3).all(|a| (1..=extent[a]).contains(&p[a]))
            }))
        }
        ShapeSpec::ThickTorus { major, minor } => {
            if !(minor >= 1.0 && major >= minor + 1.0) {
                return Err(Error::domain(format!(
                    "torus needs minor >= 1 and major >= minor + 1, got major {major} minor {minor}"
                )));
            }
            let (n, c) = cube_for_radius(major + minor);
            let nz = (2.0 * minor).ceil() as usize + 3;
            let cz = (nz - 1) as f64 / 2.0;
            Ok(BinaryVolume::from_fn(Shape::new(n, n, nz), |p| {
                let (x, y, z) = (p[0] as f64 - c, p[1] as f64 - c, p[2] as f64 - cz);
                let ring = (x * x + y * y).sqrt() - major;
                ring * ring + z * z <= minor * minor
            }))
        }
        ShapeSpec::HollowShell { outer, thickness } => {
            if !(thickness >= 2.0 && outer - thickness >= 1.0) {
                return Err(Error::domain(format!(
                    "shell needs thickness >= 2 and a cavity radius >= 1, got outer {outer} thickness {thickness}"
                )));
            }
            let (n, c) = cube_for_radius(outer);
            let inner = outer - thickness;
            Ok(BinaryVolume::from_fn(Shape::new(n, n, n), |p| {
                let r2: f64 = p.iter().map(|&v| (v as f64 - c).powi(2)).sum();
                r2 <= outer * outer && r2 > inner * inner
            }))
        }
        ShapeSpec::RandomBlob {
            size,
            smoothing,
            fill,
        } => {
            if size < 3 {
                return Err(Error::domain("blob size must be at least 3"));
            }
            if !(fill > 0.0 && fill < 1.0) {
                return Err(Error::domain(format!(
                    "blob fill must lie in (0, 1), got {fill}"
                )));
            }
            Ok(random_blob(size, smoothing, fill, seed))
        }
    }
}

fn random_blob(size: usize, smoothing: usize, fill: f64, seed: u64) -> BinaryVolume {
    let shape = Shape::new(size, size, size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field: Vec<f64> = (0..shape.len()).map(|_| rng.gen::<f64>()).collect();
    for axis in 0..3 {
        field = box_blur_axis(shape, &field, axis, smoothing);
    }
    // threshold at the fill quantile of the interior values
    let interior = |p: [usize; 3]| p.iter().all(|&c| c >= 1 && c + 1 < size);
    let mut values: Vec<f64> = shape
        .points()
        .filter(|&p| interior(p))
        .map(|p| field[shape.index(p)])
        .collect();
    values.sort_by(f64::total_cmp);
    let cut = values[((1.0 - fill) * (values.len() - 1) as f64).round() as usize];
    BinaryVolume::from_fn(shape, |p| interior(p) && field[shape.index(p)] > cut)
}

fn box_blur_axis(shape: Shape, src: &[f64], axis: usize, radius: usize) -> Vec<f64> {
    if radius == 0 {
        return src.to_vec();
    }
    let dims = shape.dims();
    let r = radius as isize;
    shape
        .points()
        .map(|p| {
            let mut sum = 0.0;
            let mut n = 0.0;
            for d in -r..=r {
                let c = p[axis] as isize + d;
                if c >= 0 && c < dims[axis] as isize {
                    let mut q = p;
                    q[axis] = c as usize;
                    sum += src[shape.index(q)];
                    n += 1.0;
                }
            }
            sum / n
        })
        .collect()
}
