//! Dense voxel containers.
//!
//! All volumes store their voxels in a single linear buffer with x varying
//! fastest, then y, then z: `index = x + nx * (y + ny * z)`. The same order is
//! used by the on-disk raw format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice point `[x, y, z]`.
pub type Point = [usize; 3];

/// Extent of a volume along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Shape {
    pub const fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Shape { nx, ny, nz }
    }

    /// A 2D image embedded as a single z-slice.
    pub const fn planar(nx: usize, ny: usize) -> Self {
        Shape { nx, ny, nz: 1 }
    }

    pub fn validate(self) -> Result<Self> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::domain(format!("degenerate shape {self}")));
        }
        Ok(self)
    }

    pub const fn len(self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub const fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn dims(self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    #[inline]
    pub fn contains(self, p: Point) -> bool {
        p[0] < self.nx && p[1] < self.ny && p[2] < self.nz
    }

    /// Signed variant of [`Shape::contains`], convenient for neighbor offsets.
    #[inline]
    pub fn contains_signed(self, p: [isize; 3]) -> bool {
        p[0] >= 0
            && p[1] >= 0
            && p[2] >= 0
            && (p[0] as usize) < self.nx
            && (p[1] as usize) < self.ny
            && (p[2] as usize) < self.nz
    }

    #[inline]
    pub fn index(self, p: Point) -> usize {
        debug_assert!(self.contains(p));
        p[0] + self.nx * (p[1] + self.ny * p[2])
    }

    #[inline]
    pub fn point(self, index: usize) -> Point {
        let x = index % self.nx;
        let y = (index / self.nx) % self.ny;
        let z = index / (self.nx * self.ny);
        [x, y, z]
    }

    /// Shape grown by `layers` on both sides of every axis.
    pub fn padded(self, layers: usize) -> Shape {
        Shape::new(
            self.nx + 2 * layers,
            self.ny + 2 * layers,
            self.nz + 2 * layers,
        )
    }

    pub fn points(self) -> impl Iterator<Item = Point> {
        (0..self.len()).map(move |i| self.point(i))
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

/// A binary image: foreground voxels are 1, background voxels are 0.
///
/// The foreground is read with 26-connectivity and the background with
/// 6-connectivity throughout the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryVolume {
    shape: Shape,
    data: Vec<u8>,
}

impl BinaryVolume {
    pub fn zeros(shape: Shape) -> Self {
        BinaryVolume {
            shape,
            data: vec![0; shape.len()],
        }
    }

    pub fn ones(shape: Shape) -> Self {
        BinaryVolume {
            shape,
            data: vec![1; shape.len()],
        }
    }

    pub fn from_vec(shape: Shape, data: Vec<u8>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::domain(format!(
                "expected {} voxels for shape {shape}, got {}",
                shape.len(),
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|&v| v > 1) {
            return Err(Error::domain(format!(
                "voxel {i} has value {}, expected 0 or 1",
                data[i]
            )));
        }
        Ok(BinaryVolume { shape, data })
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(Point) -> bool) -> Self {
        let data = (0..shape.len()).map(|i| f(shape.point(i)) as u8).collect();
        BinaryVolume { shape, data }
    }

    /// Rounds a real-valued field with the `x >= 0.5` rule.
    pub fn from_real(field: &RealVolume) -> Self {
        let data = field.data().iter().map(|&v| (v >= 0.5) as u8).collect();
        BinaryVolume {
            shape: field.shape(),
            data,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, p: Point) -> bool {
        self.data[self.shape.index(p)] != 0
    }

    /// Out-of-lattice points read as background.
    #[inline]
    pub fn get_signed(&self, p: [isize; 3]) -> bool {
        self.shape.contains_signed(p) && self.get([p[0] as usize, p[1] as usize, p[2] as usize])
    }

    #[inline]
    pub fn set(&mut self, p: Point, value: bool) {
        let i = self.shape.index(p);
        self.data[i] = value as u8;
    }

    pub fn count(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn foreground(&self) -> impl Iterator<Item = Point> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, _)| self.shape.point(i))
    }

    pub fn to_real(&self) -> RealVolume {
        RealVolume {
            shape: self.shape,
            data: self.data.iter().map(|&v| v as f64).collect(),
        }
    }

    /// Voxel-wise complement.
    pub fn inverted(&self) -> BinaryVolume {
        BinaryVolume {
            shape: self.shape,
            data: self.data.iter().map(|&v| 1 - v).collect(),
        }
    }

    /// Voxel-wise intersection; shapes must agree.
    pub fn and(&self, other: &BinaryVolume) -> BinaryVolume {
        assert_eq!(self.shape, other.shape, "shape mismatch");
        BinaryVolume {
            shape: self.shape,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    /// Returns true if every foreground voxel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryVolume) -> bool {
        self.shape == other.shape && self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }

    /// Copy of the sub-box starting at `origin` with extent `shape`.
    pub fn crop(&self, origin: Point, shape: Shape) -> Result<BinaryVolume> {
        let end = [
            origin[0] + shape.nx,
            origin[1] + shape.ny,
            origin[2] + shape.nz,
        ];
        if end[0] > self.shape.nx || end[1] > self.shape.ny || end[2] > self.shape.nz {
            return Err(Error::domain(format!(
                "crop {shape} at {origin:?} exceeds {}",
                self.shape
            )));
        }
        Ok(BinaryVolume::from_fn(shape, |p| {
            self.get([p[0] + origin[0], p[1] + origin[1], p[2] + origin[2]])
        }))
    }

    /// Copy of `self` placed at `origin` inside an all-background volume of `shape`.
    pub fn embed(&self, shape: Shape, origin: Point) -> Result<BinaryVolume> {
        let end = [
            origin[0] + self.shape.nx,
            origin[1] + self.shape.ny,
            origin[2] + self.shape.nz,
        ];
        if end[0] > shape.nx || end[1] > shape.ny || end[2] > shape.nz {
            return Err(Error::domain(format!(
                "{} at {origin:?} does not fit in {shape}",
                self.shape
            )));
        }
        let mut out = BinaryVolume::zeros(shape);
        for p in self.foreground() {
            out.set([p[0] + origin[0], p[1] + origin[1], p[2] + origin[2]], true);
        }
        Ok(out)
    }
}

/// Surrounds `v` with `layers` of background on every side.
pub fn pad_background(v: &BinaryVolume, layers: usize) -> BinaryVolume {
    let shape = v.shape().padded(layers);
    v.embed(shape, [layers; 3])
        .expect("padded shape always fits")
}

/// Per-voxel Bernoulli parameters, stored as `f32` to match the on-disk format.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVolume {
    shape: Shape,
    data: Vec<f32>,
}

impl ProbabilityVolume {
    /// Fails on length mismatch, NaN, or values outside `[0, 1]`.
    pub fn from_vec(shape: Shape, data: Vec<f32>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::domain(format!(
                "expected {} voxels for shape {shape}, got {}",
                shape.len(),
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::domain(format!(
                "voxel {i} has value {}, expected a probability in [0, 1]",
                data[i]
            )));
        }
        Ok(ProbabilityVolume { shape, data })
    }

    /// Clamps every value into `[0, 1]`; NaN maps to 0.
    pub fn from_vec_clamped(shape: Shape, data: Vec<f32>) -> Result<Self> {
        let data = data
            .into_iter()
            .map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
            .collect();
        Self::from_vec(shape, data)
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(Point) -> f32) -> Result<Self> {
        let data = (0..shape.len()).map(|i| f(shape.point(i))).collect();
        Self::from_vec(shape, data)
    }

    pub fn from_binary(v: &BinaryVolume) -> Self {
        ProbabilityVolume {
            shape: v.shape(),
            data: v.data().iter().map(|&b| b as f32).collect(),
        }
    }

    /// Maps foreground to `hi` and background to `lo`.
    pub fn from_binary_soft(v: &BinaryVolume, lo: f32, hi: f32) -> Result<Self> {
        let data = v
            .data()
            .iter()
            .map(|&b| if b != 0 { hi } else { lo })
            .collect();
        Self::from_vec(v.shape(), data)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, p: Point) -> f32 {
        self.data[self.shape.index(p)]
    }

    pub fn to_real(&self) -> RealVolume {
        RealVolume {
            shape: self.shape,
            data: self.data.iter().map(|&v| v as f64).collect(),
        }
    }
}

/// Unconstrained real-valued field; the working type of the differentiable path.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVolume {
    shape: Shape,
    data: Vec<f64>,
}

impl RealVolume {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::domain(format!(
                "expected {} values for shape {shape}, got {}",
                shape.len(),
                data.len()
            )));
        }
        Ok(RealVolume { shape, data })
    }

    pub fn filled(shape: Shape, value: f64) -> Self {
        RealVolume {
            shape,
            data: vec![value; shape.len()],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, p: Point) -> f64 {
        self.data[self.shape.index(p)]
    }

    /// Lossy conversion; values are clamped into `[0, 1]`.
    pub fn to_probability(&self) -> ProbabilityVolume {
        ProbabilityVolume {
            shape: self.shape,
            data: self
                .data
                .iter()
                .map(|&v| v.clamp(0.0, 1.0) as f32)
                .collect(),
        }
    }

    /// Zero-extends the field by `layers` on every side.
    pub fn padded(&self, layers: usize) -> RealVolume {
        let shape = self.shape.padded(layers);
        let mut out = RealVolume::filled(shape, 0.0);
        for (i, &v) in self.data.iter().enumerate() {
            let p = self.shape.point(i);
            let q = [p[0] + layers, p[1] + layers, p[2] + layers];
            out.data[shape.index(q)] = v;
        }
        out
    }

    /// Inverse of [`RealVolume::padded`].
    pub fn unpadded(&self, layers: usize) -> RealVolume {
        let s = self.shape;
        let shape = Shape::new(s.nx - 2 * layers, s.ny - 2 * layers, s.nz - 2 * layers);
        let data = shape
            .points()
            .map(|p| self.get([p[0] + layers, p[1] + layers, p[2] + layers]))
            .collect();
        RealVolume { shape, data }
    }
}
