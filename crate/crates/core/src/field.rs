//! The restricted operation set every detector and the peeling step are
//! written against: fixed-kernel convolution, elementwise add, subtract and
//! multiply, scalar scaling, the gate `max(0, x - t)`, sigmoid, log and
//! straight-through rounding.
//!
//! [`Eager`] evaluates the operations directly; the gradient tape in
//! [`crate::diff::GradientTape`] records them for a reverse pass.

use crate::kernels::Kernel;
use crate::volume::Shape;

pub trait FieldOps {
    type Field: Clone;

    fn shape(&self) -> Shape;

    fn constant(&mut self, values: Vec<f64>) -> Self::Field;

    fn fill(&mut self, value: f64) -> Self::Field {
        let n = self.shape().len();
        self.constant(vec![value; n])
    }

    fn conv(&mut self, x: &Self::Field, kernel: &Kernel) -> Self::Field;
    fn add(&mut self, a: &Self::Field, b: &Self::Field) -> Self::Field;
    fn sub(&mut self, a: &Self::Field, b: &Self::Field) -> Self::Field;
    fn mul(&mut self, a: &Self::Field, b: &Self::Field) -> Self::Field;
    fn scale(&mut self, a: &Self::Field, factor: f64) -> Self::Field;
    /// `max(0, a - threshold)`.
    fn gate(&mut self, a: &Self::Field, threshold: f64) -> Self::Field;
    fn sigmoid(&mut self, a: &Self::Field) -> Self::Field;
    fn log(&mut self, a: &Self::Field) -> Self::Field;
    /// Forward: `1` if `a >= 0.5` else `0`. Backward: identity.
    fn ste_round(&mut self, a: &Self::Field) -> Self::Field;
}

/// Gate helpers. All of them are exact indicators on integer-valued inputs.
pub mod gates {
    use super::FieldOps;

    /// `[s >= k]`.
    pub fn at_least<O: FieldOps>(ops: &mut O, s: &O::Field, k: f64) -> O::Field {
        let a = ops.gate(s, k - 1.0);
        let b = ops.gate(s, k);
        ops.sub(&a, &b)
    }

    /// `[s <= k]`.
    pub fn at_most<O: FieldOps>(ops: &mut O, s: &O::Field, k: f64) -> O::Field {
        let neg = ops.scale(s, -1.0);
        let a = ops.gate(&neg, -k - 1.0);
        let b = ops.gate(&neg, -k);
        ops.sub(&a, &b)
    }

    /// `[s == k]` as the product of the two one-sided gates.
    pub fn equals<O: FieldOps>(ops: &mut O, s: &O::Field, k: f64) -> O::Field {
        let lo = at_least(ops, s, k);
        let hi = at_most(ops, s, k);
        ops.mul(&lo, &hi)
    }

    /// `[s == 0]` for non-negative `s`; one gate suffices.
    pub fn is_zero<O: FieldOps>(ops: &mut O, s: &O::Field) -> O::Field {
        at_most(ops, s, 0.0)
    }

    pub fn not<O: FieldOps>(ops: &mut O, a: &O::Field) -> O::Field {
        let one = ops.fill(1.0);
        ops.sub(&one, a)
    }

    /// `1 - prod(1 - a_i)`.
    pub fn any<O: FieldOps>(ops: &mut O, items: &[O::Field]) -> O::Field {
        let mut none: Option<O::Field> = None;
        for a in items {
            let n = not(ops, a);
            none = Some(match none {
                None => n,
                Some(acc) => ops.mul(&acc, &n),
            });
        }
        match none {
            None => ops.fill(0.0),
            Some(n) => not(ops, &n),
        }
    }

    pub fn all<O: FieldOps>(ops: &mut O, items: &[O::Field]) -> O::Field {
        let mut iter = items.iter();
        let Some(first) = iter.next() else {
            return ops.fill(1.0);
        };
        let mut acc = first.clone();
        for a in iter {
            acc = ops.mul(&acc, a);
        }
        acc
    }

    pub fn sum<O: FieldOps>(ops: &mut O, items: &[O::Field]) -> O::Field {
        let mut iter = items.iter();
        let Some(first) = iter.next() else {
            return ops.fill(0.0);
        };
        let mut acc = first.clone();
        for a in iter {
            acc = ops.add(&acc, a);
        }
        acc
    }
}

/// Zero-padded correlation with the taps of a fixed kernel.
pub fn convolve(shape: Shape, input: &[f64], taps: &[([isize; 3], f64)]) -> Vec<f64> {
    let mut out = vec![0.0; shape.len()];
    for &(d, w) in taps {
        accumulate_shifted(shape, input, &mut out, d, w);
    }
    out
}

/// Adjoint of [`convolve`]: scatters `grad` back through every tap.
pub fn convolve_adjoint(shape: Shape, grad: &[f64], taps: &[([isize; 3], f64)], out: &mut [f64]) {
    for &(d, w) in taps {
        accumulate_shifted(shape, grad, out, [-d[0], -d[1], -d[2]], w);
    }
}

/// `out[p] += w * input[p + d]` wherever both indices are inside `shape`.
fn accumulate_shifted(shape: Shape, input: &[f64], out: &mut [f64], d: [isize; 3], w: f64) {
    let (nx, ny, nz) = (shape.nx as isize, shape.ny as isize, shape.nz as isize);
    let range = |n: isize, d: isize| (0.max(-d), n.min(n - d));
    let (x0, x1) = range(nx, d[0]);
    let (y0, y1) = range(ny, d[1]);
    let (z0, z1) = range(nz, d[2]);
    if x0 >= x1 || y0 >= y1 || z0 >= z1 {
        return;
    }
    let len = (x1 - x0) as usize;
    for z in z0..z1 {
        for y in y0..y1 {
            let dst = (x0 + nx * (y + ny * z)) as usize;
            let src = (x0 + d[0] + nx * (y + d[1] + ny * (z + d[2]))) as usize;
            let dst = &mut out[dst..dst + len];
            let src = &input[src..src + len];
            for (o, &i) in dst.iter_mut().zip(src) {
                *o += w * i;
            }
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn round_half_up(x: f64) -> f64 {
    if x >= 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Direct evaluation of the operation set on dense `f64` buffers.
#[derive(Debug, Clone, Copy)]
pub struct Eager {
    shape: Shape,
}

impl Eager {
    pub fn new(shape: Shape) -> Self {
        Eager { shape }
    }

    fn map(a: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        a.iter().map(|&v| f(v)).collect()
    }

    fn zip(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        assert_eq!(a.len(), b.len(), "operand length mismatch");
        a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
    }
}

impl FieldOps for Eager {
    type Field = Vec<f64>;

    fn shape(&self) -> Shape {
        self.shape
    }

    fn constant(&mut self, values: Vec<f64>) -> Vec<f64> {
        assert_eq!(values.len(), self.shape.len(), "constant length mismatch");
        values
    }

    fn conv(&mut self, x: &Vec<f64>, kernel: &Kernel) -> Vec<f64> {
        convolve(self.shape, x, &kernel.taps())
    }

    fn add(&mut self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        Self::zip(a, b, |x, y| x + y)
    }

    fn sub(&mut self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        Self::zip(a, b, |x, y| x - y)
    }

    fn mul(&mut self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        Self::zip(a, b, |x, y| x * y)
    }

    fn scale(&mut self, a: &Vec<f64>, factor: f64) -> Vec<f64> {
        Self::map(a, |x| x * factor)
    }

    fn gate(&mut self, a: &Vec<f64>, threshold: f64) -> Vec<f64> {
        Self::map(a, |x| (x - threshold).max(0.0))
    }

    fn sigmoid(&mut self, a: &Vec<f64>) -> Vec<f64> {
        Self::map(a, sigmoid)
    }

    fn log(&mut self, a: &Vec<f64>) -> Vec<f64> {
        Self::map(a, f64::ln)
    }

    fn ste_round(&mut self, a: &Vec<f64>) -> Vec<f64> {
        Self::map(a, round_half_up)
    }
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;

    #[test]
    fn convolution_matches_direct_sum() {
        let shape = Shape::new(4, 3, 5);
        let input: Vec<f64> = (0..shape.len()).map(|i| ((i * 37) % 11) as f64).collect();
        let kernel = Kernel::patch(std::array::from_fn(|i| (i as i8 % 5) - 2));
        let fast = convolve(shape, &input, &kernel.taps());
        for p in shape.points() {
            let mut expect = 0.0;
            for (d, w) in kernel.taps() {
                let q = [
                    p[0] as isize + d[0],
                    p[1] as isize + d[1],
                    p[2] as isize + d[2],
                ];
                if shape.contains_signed(q) {
                    expect += w * input[shape.index([q[0] as usize, q[1] as usize, q[2] as usize])];
                }
            }
            assert_eq!(fast[shape.index(p)], expect);
        }
    }

    #[test]
    fn adjoint_identity() {
        // <conv(x), y> == <x, conv_adjoint(y)>
        let shape = Shape::new(5, 4, 3);
        let x: Vec<f64> = (0..shape.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..shape.len()).map(|i| (i as f64 * 0.11).cos()).collect();
        let kernel = Kernel::ones([2, 2, 1], [0, 1, 0]);
        let taps = kernel.taps();
        let cx = convolve(shape, &x, &taps);
        let mut aty = vec![0.0; shape.len()];
        convolve_adjoint(shape, &y, &taps, &mut aty);
        let lhs: f64 = cx.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&aty).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn gates_are_exact_on_integers() {
        let mut ops = Eager::new(Shape::new(7, 1, 1));
        let s: Vec<f64> = (-3..4).map(|v| v as f64).collect();
        for k in -2..3 {
            let k = k as f64;
            let ge = at_least(&mut ops, &s, k);
            let le = at_most(&mut ops, &s, k);
            let eq = equals(&mut ops, &s, k);
            for (i, &v) in s.iter().enumerate() {
                assert_eq!(ge[i], (v >= k) as u8 as f64);
                assert_eq!(le[i], (v <= k) as u8 as f64);
                assert_eq!(eq[i], (v == k) as u8 as f64);
            }
        }
    }

    #[test]
    fn boolean_combinators() {
        let mut ops = Eager::new(Shape::new(4, 1, 1));
        let a = vec![0.0, 1.0, 0.0, 1.0];
        let b = vec![0.0, 0.0, 1.0, 1.0];
        assert_eq!(
            any(&mut ops, &[a.clone(), b.clone()]),
            vec![0.0, 1.0, 1.0, 1.0]
        );
        assert_eq!(
            all(&mut ops, &[a.clone(), b.clone()]),
            vec![0.0, 0.0, 0.0, 1.0]
        );
        assert_eq!(sum(&mut ops, &[a, b]), vec![0.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn rounding_tie_goes_up() {
        assert_eq!(round_half_up(0.5), 1.0);
        assert_eq!(round_half_up(0.4999), 0.0);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(-800.0)).abs() < 1e-300);
    }
}
