//! Reparametrized Bernoulli sampling with scaled logistic noise:
//! `X = sigmoid((log(a / (1 - a)) + beta * L) / tau)`, `L = log U - log(1 - U)`.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{gates, Eager, FieldOps};
use crate::volume::{BinaryVolume, ProbabilityVolume, RealVolume, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub beta: f64,
    pub tau: f64,
    pub seed: u64,
    pub clamp_eps: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            beta: 0.33,
            tau: 1.0,
            seed: 0,
            clamp_eps: 1e-6,
        }
    }
}

impl NoiseParams {
    pub fn new(beta: f64, tau: f64, seed: u64) -> Result<Self> {
        NoiseParams {
            beta,
            tau,
            seed,
            ..Default::default()
        }
        .validated()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::domain(format!(
                "beta must be finite and >= 0, got {}",
                self.beta
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::domain(format!(
                "tau must be finite and > 0, got {}",
                self.tau
            )));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 0.5) {
            return Err(Error::domain(format!(
                "clamp_eps must lie in (0, 0.5), got {}",
                self.clamp_eps
            )));
        }
        Ok(self)
    }
}

/// One standard logistic draw per voxel, in volume order.
pub fn logistic_noise(shape: Shape, seed: u64) -> RealVolume {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..shape.len())
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            u.ln() - (1.0 - u).ln()
        })
        .collect();
    RealVolume::new(shape, data).expect("length matches shape")
}

/// The relaxed sample as field operations on probabilities `alpha1` and a
/// frozen noise field. Clamping to `[eps, 1 - eps]` is done with gates:
/// `eps + max(0, a - eps) - max(0, a - (1 - eps))`.
pub fn relax_field<O: FieldOps>(
    ops: &mut O,
    alpha1: &O::Field,
    noise: &O::Field,
    np: &NoiseParams,
) -> O::Field {
    let eps = np.clamp_eps;
    let lo = ops.gate(alpha1, eps);
    let hi = ops.gate(alpha1, 1.0 - eps);
    let floor = ops.fill(eps);
    let c = ops.add(&floor, &lo);
    let c = ops.sub(&c, &hi);
    let one_minus = gates::not(ops, &c);
    let log_c = ops.log(&c);
    let log_1mc = ops.log(&one_minus);
    let logit = ops.sub(&log_c, &log_1mc);
    let scaled_noise = ops.scale(noise, np.beta);
    let z = ops.add(&logit, &scaled_noise);
    let z = ops.scale(&z, 1.0 / np.tau);
    ops.sigmoid(&z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticSample {
    /// Relaxed values before rounding.
    pub relaxed: RealVolume,
    /// `relaxed >= 0.5`.
    pub hard: BinaryVolume,
    /// The logistic draw used.
    pub noise: RealVolume,
}

pub fn sample_relaxed(p: &ProbabilityVolume, np: &NoiseParams) -> Result<StochasticSample> {
    let np = np.validated()?;
    let shape = p.shape();
    let noise = logistic_noise(shape, np.seed);
    let mut ops = Eager::new(shape);
    let alpha: Vec<f64> = p.data().iter().map(|&v| v as f64).collect();
    let relaxed = relax_field(&mut ops, &alpha, &noise.data().to_vec(), &np);
    let hard = ops.ste_round(&relaxed);
    Ok(StochasticSample {
        relaxed: RealVolume::new(shape, relaxed)?,
        hard: BinaryVolume::from_vec(shape, hard.iter().map(|&v| v as u8).collect())?,
        noise,
    })
}
