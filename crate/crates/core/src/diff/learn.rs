//! Learning an input volume whose skeleton matches a target skeleton, by
//! gradient descent through the differentiable pipeline.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detectors::Detector;
use crate::error::{Error, Result};
use crate::field::FieldOps;
use crate::peel::{skeletonize, Iterations, PeelConfig};
use crate::shapes::{make_shape, ShapeKind, ShapeSpec};
use crate::volume::{BinaryVolume, ProbabilityVolume, Shape};

use super::noise::{logistic_noise, NoiseParams};
use super::pipeline::{record_pipeline, PaddedFrame};
use super::tape::GradientTape;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub steps: usize,
    pub lr: f64,
    /// Outer peeling iterations recorded per forward pass.
    pub iterations: usize,
    pub detector: Detector,
    pub preserve_endpoints: bool,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            steps: 600,
            lr: 100.0,
            iterations: 1,
            detector: Detector::Boolean,
            preserve_endpoints: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnOutcome {
    /// Loss before every update plus the loss after the last one.
    pub losses: Vec<f64>,
    pub learned: ProbabilityVolume,
    pub final_output: BinaryVolume,
}

/// `1 - (2 sum(o t) + 1) / (sum(o) + sum(t) + 1)` and its gradient in `o`.
pub fn soft_dice(output: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    let inter: f64 = output.iter().zip(target).map(|(o, t)| o * t).sum();
    let denom = output.iter().sum::<f64>() + target.iter().sum::<f64>() + 1.0;
    let numer = 2.0 * inter + 1.0;
    let loss = 1.0 - numer / denom;
    let grad = target
        .iter()
        .map(|t| -(2.0 * t * denom - numer) / (denom * denom))
        .collect();
    (loss, grad)
}

/// Noise seed of forward pass `step`.
fn step_seed(seed: u64, step: usize) -> u64 {
    seed.wrapping_add(step as u64 + 1)
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// A 20x20x20 target: the skeleton of the default thick torus, centered.
pub fn demo_target() -> BinaryVolume {
    let torus = make_shape(&ShapeSpec::default_for(ShapeKind::ThickTorus), 0)
        .expect("default torus is valid");
    let s = torus.shape();
    let origin = [(20 - s.nx) / 2, (20 - s.ny) / 2, (20 - s.nz) / 2];
    let placed = torus
        .embed(Shape::new(20, 20, 20), origin)
        .expect("torus fits in 20^3");
    skeletonize(&placed, &PeelConfig::default())
}

/// Starting point of the optimization: uniform in `[0.01, 0.99]`.
pub fn initial_probabilities(shape: Shape, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..shape.len())
        .map(|_| 0.01 + 0.98 * rng.sample::<f64, _>(Open01))
        .collect()
}

/// Probabilities are kept in `[PROB_MARGIN, 1 - PROB_MARGIN]` after every update.
pub const PROB_MARGIN: f64 = 1e-3;

/// Optimizes foreground probabilities `alpha1` by projected gradient descent
/// so that the stochastic skeleton of `alpha1` matches `target` under the
/// soft-Dice loss. The initial probabilities are drawn uniformly from
/// `[0.01, 0.99]` with `np.seed`.
pub fn learn_skeleton_demo(
    target: &BinaryVolume,
    np: &NoiseParams,
    cfg: &LearnConfig,
) -> Result<LearnOutcome> {
    let np = np.validated()?;
    if !(cfg.lr.is_finite() && cfg.lr >= 0.0) {
        return Err(Error::domain(format!(
            "learning rate must be finite and >= 0, got {}",
            cfg.lr
        )));
    }
    let shape = target.shape();
    let frame = PaddedFrame::new(shape);
    let peel = PeelConfig::new(cfg.detector, Iterations::Fixed(cfg.iterations))
        .with_endpoints(cfg.preserve_endpoints);
    let t: Vec<f64> = target.data().iter().map(|&b| b as f64).collect();

    let mut a = initial_probabilities(shape, np.seed);

    let mut losses = Vec::with_capacity(cfg.steps + 1);
    let mut final_output = BinaryVolume::zeros(shape);
    for step in 0..=cfg.steps {
        let mut tape = GradientTape::new(frame.padded);
        let alpha = tape.input(frame.pad(&a));
        let noise = logistic_noise(shape, step_seed(np.seed, step));
        let noise = tape.constant(frame.pad(noise.data()));
        let (_, _, out) = record_pipeline(&mut tape, &frame, &alpha, &noise, &peel, &np)?;
        let o = frame.unpad(tape.value(out));
        let (loss, grad) = soft_dice(&o, &t);
        losses.push(loss);
        if step == cfg.steps {
            final_output = frame.unpad_binary(tape.value(out));
            break;
        }
        let mut grads = tape.backward(out, &frame.pad(&grad))?;
        let g = frame.unpad(&grads.take(alpha).expect("input on tape"));
        for (ai, gi) in a.iter_mut().zip(&g) {
            *ai = (*ai - cfg.lr * gi).clamp(PROB_MARGIN, 1.0 - PROB_MARGIN);
        }
    }
    let learned = ProbabilityVolume::from_vec(shape, a.iter().map(|&v| v as f32).collect())?;
    Ok(LearnOutcome {
        losses,
        learned,
        final_output,
    })
}
