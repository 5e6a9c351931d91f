//! Gradient support: a reverse-mode tape, reparametrized sampling and the
//! differentiable skeletonization pipeline.

pub mod gradcheck;
pub mod learn;
pub mod noise;
pub mod pipeline;
pub mod tape;

pub use gradcheck::{check_smooth_gradient, smooth_probe, GradCheck};
pub use learn::{
    demo_target, initial_probabilities, learn_skeleton_demo, soft_dice, LearnConfig, LearnOutcome,
};
pub use noise::{logistic_noise, relax_field, sample_relaxed, NoiseParams, StochasticSample};
pub use pipeline::{record_pipeline, skeletonize_diff, DiffSkeleton, PaddedFrame, PipelineNodes};
pub use tape::{GradientTape, Gradients, NodeId, OpKind};
