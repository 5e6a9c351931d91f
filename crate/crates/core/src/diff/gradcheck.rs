//! Finite-difference check of the tape on the differentiable part of the
//! pipeline: relaxed sampling with frozen noise, a neighbor-count
//! convolution, products, a sigmoid and a weighted sum. Rounding and gates
//! (apart from the clamp, which stays inactive for inputs in (0.05, 0.95))
//! are left out because their derivative is zero or undefined almost everywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detectors::neighbor_count_field;
use crate::error::Result;
use crate::field::{Eager, FieldOps};
use crate::volume::Shape;

use super::noise::{logistic_noise, relax_field, NoiseParams};
use super::tape::GradientTape;

/// Smooth scalar probe `sum(w * sigmoid(r * (count26(r) - 4) / 4))` with `r`
/// the relaxed sample of `alpha1`, returned as a per-voxel field before the sum.
pub fn smooth_probe<O: FieldOps>(
    ops: &mut O,
    alpha1: &O::Field,
    noise: &O::Field,
    np: &NoiseParams,
) -> O::Field {
    let r = relax_field(ops, alpha1, noise, np);
    let n = neighbor_count_field(ops, &r);
    let four = ops.fill(4.0);
    let centered = ops.sub(&n, &four);
    let centered = ops.scale(&centered, 0.25);
    let z = ops.mul(&r, &centered);
    ops.sigmoid(&z)
}

/// Outcome of one gradient check.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub tape_gradient: Vec<f64>,
    pub finite_difference: Vec<f64>,
    /// `max |tape - fd| / max |fd|`.
    pub relative_error: f64,
}

fn probe_value(
    shape: Shape,
    alpha: &[f64],
    noise: &[f64],
    weights: &[f64],
    np: &NoiseParams,
) -> f64 {
    let mut ops = Eager::new(shape);
    let out = smooth_probe(&mut ops, &alpha.to_vec(), &noise.to_vec(), np);
    out.iter().zip(weights).map(|(o, w)| o * w).sum()
}

/// Compares the tape gradient of the weighted probe with central differences
/// of step `h` in every voxel. Inputs, noise and weights are drawn from `seed`.
pub fn check_smooth_gradient(
    shape: Shape,
    np: &NoiseParams,
    seed: u64,
    h: f64,
) -> Result<GradCheck> {
    let np = np.validated()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha: Vec<f64> = (0..shape.len())
        .map(|_| rng.gen_range(0.05..0.95))
        .collect();
    let weights: Vec<f64> = (0..shape.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let noise = logistic_noise(shape, seed ^ 0x5eed).into_data();

    let mut tape = GradientTape::new(shape);
    let input = tape.input(alpha.clone());
    let frozen = tape.constant(noise.clone());
    let out = smooth_probe(&mut tape, &input, &frozen, &np);
    let mut grads = tape.backward(out, &weights)?;
    let tape_gradient = grads.take(input).expect("input is on the tape");

    let mut a = alpha.clone();
    let finite_difference: Vec<f64> = (0..shape.len())
        .map(|i| {
            a[i] = alpha[i] + h;
            let hi = probe_value(shape, &a, &noise, &weights, &np);
            a[i] = alpha[i] - h;
            let lo = probe_value(shape, &a, &noise, &weights, &np);
            a[i] = alpha[i];
            (hi - lo) / (2.0 * h)
        })
        .collect();
    let scale = finite_difference.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let worst = tape_gradient
        .iter()
        .zip(&finite_difference)
        .fold(0.0f64, |m, (t, f)| m.max((t - f).abs()));
    Ok(GradCheck {
        tape_gradient,
        finite_difference,
        relative_error: if scale > 0.0 { worst / scale } else { worst },
    })
}
