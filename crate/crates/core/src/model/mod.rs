//! Small differentiable binary classifiers and their local training loops.
//!
//! Parameters live in one flat `Vec<f64>` so the aggregator can treat every
//! architecture uniformly. Layout, layer-major with weights before biases:
//!
//! * linear: `w[0..d], b`
//! * mlp: `W1[h×d] (row per hidden unit), b1[h], w2[h], b2`
//!
//! The MLP uses a `tanh` hidden layer; both architectures end in a single
//! logit passed through a sigmoid.

mod blob;
pub mod objective;
mod train;

pub use train::{local_train_ce, local_train_lmm, train_traced, TrainConfig};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    Linear { input_dim: usize },
    Mlp { input_dim: usize, hidden_dim: usize },
}

impl Architecture {
    pub fn input_dim(&self) -> usize {
        match *self {
            Architecture::Linear { input_dim } | Architecture::Mlp { input_dim, .. } => input_dim,
        }
    }

    pub fn param_count(&self) -> usize {
        match *self {
            Architecture::Linear { input_dim } => input_dim + 1,
            Architecture::Mlp {
                input_dim,
                hidden_dim,
            } => input_dim * hidden_dim + 2 * hidden_dim + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Architecture::Linear { input_dim } if input_dim >= 1 => Ok(()),
            Architecture::Mlp {
                input_dim,
                hidden_dim,
            } if input_dim >= 1 && hidden_dim >= 1 => Ok(()),
            _ => Err(Error::config("arch", "dimensions must be at least 1")),
        }
    }
}

/// A parameter vector tied to its architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    arch: Architecture,
    values: Vec<f64>,
}

impl ModelParams {
    pub fn new(arch: Architecture, values: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        if values.len() != arch.param_count() {
            return Err(Error::DimensionMismatch {
                expected: arch.param_count(),
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("values", "parameters must be finite"));
        }
        Ok(ModelParams { arch, values })
    }

    pub fn zeros(arch: Architecture) -> Self {
        ModelParams {
            arch,
            values: vec![0.0; arch.param_count()],
        }
    }

    pub fn arch(&self) -> Architecture {
        self.arch
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// The pre-sigmoid score.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let v = &self.values;
        match self.arch {
            Architecture::Linear { input_dim: d } => dot(&v[..d], x) + v[d],
            Architecture::Mlp {
                input_dim: d,
                hidden_dim: h,
            } => {
                let (w1, rest) = v.split_at(d * h);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(h);
                let mut z = b2[0];
                for k in 0..h {
                    z += w2[k] * (dot(&w1[k * d..(k + 1) * d], x) + b1[k]).tanh();
                }
                z
            }
        }
    }

    /// Logit together with its gradient with respect to the parameters,
    /// accumulated as `grad += scale · ∂z/∂θ`.
    pub fn logit_accumulate_grad(&self, x: &[f64], scale: f64, grad: &mut [f64]) -> f64 {
        let v = &self.values;
        match self.arch {
            Architecture::Linear { input_dim: d } => {
                for (g, xi) in grad[..d].iter_mut().zip(x) {
                    *g += scale * xi;
                }
                grad[d] += scale;
                dot(&v[..d], x) + v[d]
            }
            Architecture::Mlp {
                input_dim: d,
                hidden_dim: h,
            } => {
                let (w1, rest) = v.split_at(d * h);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(h);
                let mut z = b2[0];
                for k in 0..h {
                    let a = (dot(&w1[k * d..(k + 1) * d], x) + b1[k]).tanh();
                    z += w2[k] * a;
                    let back = scale * w2[k] * (1.0 - a * a);
                    for (g, xi) in grad[k * d..(k + 1) * d].iter_mut().zip(x) {
                        *g += back * xi;
                    }
                    grad[d * h + k] += back;
                    grad[d * h + h + k] += scale * a;
                }
                grad[d * h + 2 * h] += scale;
                z
            }
        }
    }

    pub fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arch.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.arch.input_dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
pub fn init_params(arch: Architecture, seed: u64) -> Result<ModelParams> {
    arch.validate()?;
    let mut rng = seed::rng(seed, &[seed::tag::INIT]);
    let mut params = ModelParams::zeros(arch);
    let v = params.values_mut();
    match arch {
        Architecture::Linear { input_dim: d } => {
            let r = 1.0 / (d as f64).sqrt();
            for w in &mut v[..d] {
                *w = rng.random_range(-r..r);
            }
        }
        Architecture::Mlp {
            input_dim: d,
            hidden_dim: h,
        } => {
            let r1 = 1.0 / (d as f64).sqrt();
            for w in &mut v[..d * h] {
                *w = rng.random_range(-r1..r1);
            }
            let r2 = 1.0 / (h as f64).sqrt();
            for w in &mut v[d * h + h..d * h + 2 * h] {
                *w = rng.random_range(-r2..r2);
            }
        }
    }
    Ok(params)
}

pub fn predict_proba(params: &ModelParams, features: &[f64]) -> Result<f64> {
    params.check_input(features)?;
    Ok(sigmoid(params.logit(features)))
}
