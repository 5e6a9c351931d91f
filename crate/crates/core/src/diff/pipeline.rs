//! Differentiable skeletonization: relaxed sampling, straight-through
//! rounding and a fixed number of peeling iterations, all recorded on a tape.

use crate::error::{Error, Result};
use crate::field::FieldOps;
use crate::lattice::{subfield_mask, SubfieldId};
use crate::peel::{peel_field, Iterations, PeelConfig};
use crate::volume::{pad_background, BinaryVolume, ProbabilityVolume, RealVolume, Shape};

use super::noise::{logistic_noise, relax_field, NoiseParams, StochasticSample};
use super::tape::{GradientTape, NodeId};

/// Constant fields for running the peeling step on a volume padded by one
/// layer of background.
#[derive(Debug, Clone)]
pub struct PaddedFrame {
    pub shape: Shape,
    pub padded: Shape,
    /// 1 on the original lattice, 0 on the padding.
    pub interior: Vec<f64>,
    pub subfields: [Vec<f64>; 8],
}

impl PaddedFrame {
    pub fn new(shape: Shape) -> Self {
        let to_field = |v: &BinaryVolume| -> Vec<f64> {
            pad_background(v, 1)
                .data()
                .iter()
                .map(|&b| b as f64)
                .collect()
        };
        PaddedFrame {
            shape,
            padded: shape.padded(1),
            interior: to_field(&BinaryVolume::ones(shape)),
            subfields: SubfieldId::ALL.map(|sf| to_field(&subfield_mask(sf, shape))),
        }
    }

    pub fn pad(&self, data: &[f64]) -> Vec<f64> {
        RealVolume::new(self.shape, data.to_vec())
            .expect("data matches frame shape")
            .padded(1)
            .into_data()
    }

    pub fn unpad(&self, data: &[f64]) -> Vec<f64> {
        RealVolume::new(self.padded, data.to_vec())
            .expect("data matches padded shape")
            .unpadded(1)
            .into_data()
    }

    pub fn unpad_binary(&self, data: &[f64]) -> BinaryVolume {
        let data = self.unpad(data).iter().map(|&v| (v >= 0.5) as u8).collect();
        BinaryVolume::from_vec(self.shape, data).expect("frame shape")
    }
}

/// Node handles of one recorded pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineNodes {
    pub relaxed: NodeId,
    pub hard: NodeId,
    pub output: NodeId,
}

fn fixed_budget(cfg: &PeelConfig) -> Result<usize> {
    match cfg.iterations {
        Iterations::Fixed(n) => Ok(n),
        Iterations::UntilStable => Err(Error::contract(
            "differentiable skeletonization needs a fixed iteration count; until_stable has a data-dependent length",
        )),
    }
}

/// Records sampling, rounding and peeling for padded probabilities `alpha1`
/// and a padded frozen noise field.
pub fn record_pipeline<O: FieldOps>(
    ops: &mut O,
    frame: &PaddedFrame,
    alpha1: &O::Field,
    noise: &O::Field,
    cfg: &PeelConfig,
    np: &NoiseParams,
) -> Result<(O::Field, O::Field, O::Field)> {
    let n = fixed_budget(cfg)?;
    let np = np.validated()?;
    let relaxed = relax_field(ops, alpha1, noise, &np);
    let rounded = ops.ste_round(&relaxed);
    let interior = ops.constant(frame.interior.clone());
    let hard = ops.mul(&rounded, &interior);
    let masks = frame.subfields.clone().map(|m| ops.constant(m));
    let out = peel_field(ops, &hard, &masks, cfg.detector, cfg.preserve_endpoints, n);
    Ok((relaxed, hard, out))
}

/// Result of [`skeletonize_diff`].
#[derive(Debug, Clone)]
pub struct DiffSkeleton {
    pub skeleton: BinaryVolume,
    pub sample: StochasticSample,
    /// Input node holding the padded probabilities.
    pub input: NodeId,
    pub nodes: PipelineNodes,
    pub frame: PaddedFrame,
}

impl DiffSkeleton {
    /// Gradient of a loss with respect to the input probabilities, given the
    /// gradient with respect to the (unpadded) skeleton.
    pub fn input_gradient(&self, tape: &GradientTape, output_grad: &[f64]) -> Result<RealVolume> {
        let seed = self.frame.pad(output_grad);
        let mut grads = tape.backward(self.nodes.output, &seed)?;
        let g = grads.take(self.input).expect("input node is on the tape");
        RealVolume::new(self.frame.shape, self.frame.unpad(&g))
    }
}

/// Records the full pipeline on `tape`, whose shape must be the input shape
/// padded by one layer. The forward output equals binary skeletonization of
/// the hard sample with the same fixed budget.
pub fn skeletonize_diff(
    tape: &mut GradientTape,
    p: &ProbabilityVolume,
    cfg: &PeelConfig,
    np: &NoiseParams,
) -> Result<DiffSkeleton> {
    fixed_budget(cfg)?;
    let frame = PaddedFrame::new(p.shape());
    if tape.shape() != frame.padded {
        return Err(Error::contract(format!(
            "tape shape {} does not match padded input shape {}",
            tape.shape(),
            frame.padded
        )));
    }
    let noise = logistic_noise(p.shape(), np.seed);
    let alpha: Vec<f64> = p.data().iter().map(|&v| v as f64).collect();
    let input = tape.input(frame.pad(&alpha));
    let noise_node = tape.constant(frame.pad(noise.data()));
    let (relaxed, hard, output) = record_pipeline(tape, &frame, &input, &noise_node, cfg, np)?;
    let sample = StochasticSample {
        relaxed: RealVolume::new(p.shape(), frame.unpad(tape.value(relaxed)))?,
        hard: frame.unpad_binary(tape.value(hard)),
        noise,
    };
    Ok(DiffSkeleton {
        skeleton: frame.unpad_binary(tape.value(output)),
        sample,
        input,
        nodes: PipelineNodes {
            relaxed,
            hard,
            output,
        },
        frame,
    })
}
