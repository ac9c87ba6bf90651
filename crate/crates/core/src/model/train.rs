use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::objective::{check_fairness_strata, cross_entropy, soft_violation};
use super::ModelParams;
use crate::data::Dataset;
use crate::fairness::Notion;
use crate::{seed, Error, Result};

/// Loss values above this abort training.
const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Lagrangian multiplier on the fairness violation (penalised loss only).
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub notion: Notion,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::config(
                "learning_rate",
                "must be finite and nonnegative",
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::config("lambda", "must be finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum Objective {
    CrossEntropy,
    Lagrangian { lambda: f64, notion: Notion },
}

/// Mini-batch SGD on mean cross-entropy for `cfg.epochs` epochs.
pub fn local_train_ce(
    params: &ModelParams,
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<ModelParams> {
    sgd(params, data, cfg, Objective::CrossEntropy, false).map(|(p, _)| p)
}

/// Mini-batch SGD on `CE(batch) + λ·Δ_k(data)`, where `Δ_k` is the soft
/// violation of `cfg.notion` over the whole local dataset.
///
/// Fails with [`Error::UndefinedFairnessLoss`] when `data` lacks a group or a
/// label stratum the notion needs, including when `λ = 0`: the loss itself is
/// undefined, not just its penalty term.
pub fn local_train_lmm(
    params: &ModelParams,
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<ModelParams> {
    check_fairness_strata(data, cfg.notion)?;
    let objective = Objective::Lagrangian {
        lambda: cfg.lambda,
        notion: cfg.notion,
    };
    sgd(params, data, cfg, objective, false).map(|(p, _)| p)
}

/// As [`local_train_ce`] (or [`local_train_lmm`] when `penalised`), also
/// returning the full-data objective after each epoch.
pub fn train_traced(
    params: &ModelParams,
    data: &Dataset,
    cfg: &TrainConfig,
    penalised: bool,
) -> Result<(ModelParams, Vec<f64>)> {
    let objective = if penalised {
        check_fairness_strata(data, cfg.notion)?;
        Objective::Lagrangian {
            lambda: cfg.lambda,
            notion: cfg.notion,
        }
    } else {
        Objective::CrossEntropy
    };
    sgd(params, data, cfg, objective, true)
}

fn sgd(
    params: &ModelParams,
    data: &Dataset,
    cfg: &TrainConfig,
    objective: Objective,
    trace: bool,
) -> Result<(ModelParams, Vec<f64>)> {
    cfg.validate()?;
    if data.feature_dim() != params.arch().input_dim() {
        return Err(Error::DimensionMismatch {
            expected: params.arch().input_dim(),
            actual: data.feature_dim(),
        });
    }
    let mut theta = params.clone();
    let mut rng = seed::rng(cfg.seed, &[]);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut losses = Vec::new();
    let samples = data.samples();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let (mut loss, mut grad) = cross_entropy(&theta, chunk.iter().map(|&i| &samples[i]));
            if let Objective::Lagrangian { lambda, notion } = objective {
                if lambda != 0.0 {
                    let (v, g) = soft_violation(&theta, data, notion)?;
                    loss += lambda * v;
                    for (a, b) in grad.iter_mut().zip(g) {
                        *a += lambda * b;
                    }
                }
            }
            if !loss.is_finite() || loss > DIVERGENCE_LIMIT || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence {
                    epoch,
                    batch: b + 1,
                    loss,
                });
            }
            for (w, g) in theta.values_mut().iter_mut().zip(&grad) {
                *w -= cfg.learning_rate * g;
            }
        }
        if trace {
            losses.push(full_objective(&theta, data, objective)?);
        }
    }
    if theta.values().iter().any(|w| !w.is_finite()) {
        return Err(Error::Divergence {
            epoch: cfg.epochs,
            batch: 0,
            loss: f64::NAN,
        });
    }
    Ok((theta, losses))
}

fn full_objective(params: &ModelParams, data: &Dataset, objective: Objective) -> Result<f64> {
    let (ce, _) = cross_entropy(params, data.samples());
    Ok(match objective {
        Objective::CrossEntropy => ce,
        Objective::Lagrangian { lambda, notion } => {
            ce + lambda * soft_violation(params, data, notion)?.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, Sample, SynthSpec};
    use crate::model::{init_params, predict_proba, Architecture};

    fn cfg(epochs: usize, lr: f64, batch: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs,
            learning_rate: lr,
            batch_size: batch,
            seed,
            lambda: 0.0,
            notion: Notion::EOpp,
        }
    }

    fn two_points() -> Dataset {
        Dataset::new(
            vec![
                Sample {
                    features: vec![1.0, 0.5],
                    label: 1,
                    group: 0,
                },
                Sample {
                    features: vec![-1.0, -0.5],
                    label: 0,
                    group: 1,
                },
            ],
            2,
            2,
        )
        .unwrap()
    }

    fn toy(seed: u64, flip1: f64) -> Dataset {
        generate_synthetic(&SynthSpec {
            num_samples: 400,
            feature_dim: 2,
            num_groups: 2,
            group_proportions: vec![0.5, 0.5],
            positive_rates: vec![0.5, 0.5],
            class_means: vec![
                [vec![-1.0, 0.0], vec![1.0, 0.0]],
                [vec![-0.5, 1.0], vec![0.5, 1.0]],
            ],
            noise_std: 1.0,
            label_flip_rates: vec![0.0, flip1],
            seed,
        })
        .unwrap()
    }

    #[test]
    fn separable_pair_reaches_full_accuracy() {
        let data = two_points();
        for arch in [
            Architecture::Linear { input_dim: 2 },
            Architecture::Mlp {
                input_dim: 2,
                hidden_dim: 4,
            },
        ] {
            let p0 = init_params(arch, 5).unwrap();
            let p = local_train_ce(&p0, &data, &cfg(500, 0.5, 2, 1)).unwrap();
            for s in data.samples() {
                let yhat = (predict_proba(&p, &s.features).unwrap() >= 0.5) as u8;
                assert_eq!(yhat, s.label);
            }
        }
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let data = toy(1, 0.1);
        let p0 = init_params(
            Architecture::Mlp {
                input_dim: 2,
                hidden_dim: 3,
            },
            2,
        )
        .unwrap();
        let p = local_train_ce(&p0, &data, &cfg(3, 0.0, 16, 9)).unwrap();
        assert_eq!(p, p0);
    }

    #[test]
    fn full_batch_loss_is_non_increasing() {
        for seed in 0..20 {
            let data = toy(seed, 0.2);
            let p0 = init_params(Architecture::Linear { input_dim: 2 }, seed).unwrap();
            let (_, trace) =
                train_traced(&p0, &data, &cfg(30, 0.05, data.len(), seed), false).unwrap();
            assert!(trace.iter().all(|l| l.is_finite()));
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "seed {seed}: {:?}", w);
            }
        }
    }

    #[test]
    fn training_is_seed_deterministic() {
        let data = toy(3, 0.1);
        let p0 = init_params(Architecture::Linear { input_dim: 2 }, 0).unwrap();
        let a = local_train_ce(&p0, &data, &cfg(3, 0.1, 8, 77)).unwrap();
        let b = local_train_ce(&p0, &data, &cfg(3, 0.1, 8, 77)).unwrap();
        let c = local_train_ce(&p0, &data, &cfg(3, 0.1, 8, 78)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn lambda_zero_matches_cross_entropy() {
        let data = toy(4, 0.2);
        let p0 = init_params(Architecture::Linear { input_dim: 2 }, 1).unwrap();
        let c = cfg(4, 0.1, 32, 5);
        assert_eq!(
            local_train_lmm(&p0, &data, &c).unwrap(),
            local_train_ce(&p0, &data, &c).unwrap()
        );
    }

    #[test]
    fn lmm_on_single_group_is_undefined() {
        let samples = (0..10)
            .map(|i| Sample {
                features: vec![i as f64, 0.0],
                label: (i % 2) as u8,
                group: 0,
            })
            .collect();
        let data = Dataset::new(samples, 2, 2).unwrap();
        let p0 = init_params(Architecture::Linear { input_dim: 2 }, 1).unwrap();
        let mut c = cfg(1, 0.1, 4, 0);
        c.lambda = 1.0;
        assert!(matches!(
            local_train_lmm(&p0, &data, &c),
            Err(Error::UndefinedFairnessLoss { .. })
        ));
        // Plain CE is fine on the same data.
        assert!(local_train_ce(&p0, &data, &c).is_ok());
    }

    #[test]
    fn divergence_is_reported() {
        let data = toy(5, 0.0);
        let p0 = init_params(
            Architecture::Mlp {
                input_dim: 2,
                hidden_dim: 8,
            },
            1,
        )
        .unwrap();
        let err = local_train_ce(&p0, &data, &cfg(50, 1e9, 1, 0)).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "{err:?}");
    }

    #[test]
    fn input_is_untouched() {
        let data = toy(6, 0.0);
        let p0 = init_params(Architecture::Linear { input_dim: 2 }, 1).unwrap();
        let before = p0.clone();
        let _ = local_train_ce(&p0, &data, &cfg(2, 0.1, 16, 0)).unwrap();
        assert_eq!(p0, before);
    }
}
