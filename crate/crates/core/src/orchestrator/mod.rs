//! The federated round loop.
//!
//! Each round: sample participating clients, train each one locally from the
//! current global model (concurrently when [`Exec::Parallel`]), aggregate
//! with the configured heuristic, score the new global model on the
//! aggregator set, and update the tracked best model per
//! [`stopping::StoppingRule`].

mod export;
pub mod stopping;

pub use stopping::{Decision, StoppingRule};

use std::time::Instant;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::aggregation::{
    self, check_group_complete, incumbent_wins, ClientSubmission, HeuristicKind, HeuristicSpec,
};
use crate::data::Dataset;
use crate::exec::Exec;
use crate::fairness::{evaluate, violation, FairnessReport, Notion, DEFAULT_THRESHOLD};
use crate::model::objective::check_fairness_strata;
use crate::model::{
    init_params, local_train_ce, local_train_lmm, Architecture, ModelParams, TrainConfig,
};
use crate::{seed, Error, Result};

/// Local model family; the input dimension comes from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    #[default]
    Linear,
    Mlp {
        hidden_dim: usize,
    },
}

impl ModelSpec {
    pub fn arch(self, input_dim: usize) -> Architecture {
        match self {
            ModelSpec::Linear => Architecture::Linear { input_dim },
            ModelSpec::Mlp { hidden_dim } => Architecture::Mlp {
                input_dim,
                hidden_dim,
            },
        }
    }
}

/// Settings of the fairness-penalised local loss used by the oracle baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmmConfig {
    pub lambda: f64,
    pub notion: Notion,
}

impl Default for LmmConfig {
    fn default() -> Self {
        LmmConfig {
            lambda: 1.0,
            notion: Notion::EO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub num_clients: usize,
    /// Maximum number of rounds `T`.
    pub rounds: usize,
    pub local_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub heuristic: HeuristicSpec,
    /// Accuracy tolerance `a`, in percentage points.
    pub accuracy_tolerance: f64,
    /// Threshold round `τ`.
    pub threshold_round: usize,
    #[serde(default = "one")]
    pub participation: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub lmm: LmmConfig,
    /// Widen the FairCheck branch to `0 < Δ_Acc ≤ a`; see [`stopping`].
    #[serde(default)]
    pub fair_check_band: bool,
    #[serde(default = "two")]
    pub band_patience: usize,
    #[serde(default = "half")]
    pub threshold: f64,
    /// Abort the run once it has taken longer than this many seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_secs: Option<f64>,
    /// When non-empty, every scored round checks that the selections for
    /// these α values are nested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nesting_probe_alphas: Vec<f64>,
    #[serde(skip)]
    pub exec: Exec,
}

fn one() -> f64 {
    1.0
}
fn two() -> usize {
    2
}
fn half() -> f64 {
    DEFAULT_THRESHOLD
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_clients == 0 {
            return Err(Error::config("num_clients", "must be at least 1"));
        }
        if self.threshold_round == 0 {
            return Err(Error::config("threshold_round", "must be at least 1"));
        }
        if self.rounds <= self.threshold_round {
            return Err(Error::config(
                "threshold_round",
                format!(
                    "rounds (T = {}) must exceed threshold_round (τ = {})",
                    self.rounds, self.threshold_round
                ),
            ));
        }
        if !(self.accuracy_tolerance.is_finite() && self.accuracy_tolerance > 0.0) {
            return Err(Error::config("accuracy_tolerance", "must be positive"));
        }
        if !(self.participation > 0.0 && self.participation <= 1.0) {
            return Err(Error::config("participation", "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::config("threshold", "must lie in [0, 1]"));
        }
        if let ModelSpec::Mlp { hidden_dim: 0 } = self.model {
            return Err(Error::config("model.hidden_dim", "must be at least 1"));
        }
        if self.fair_check_band && self.band_patience == 0 {
            return Err(Error::config("band_patience", "must be at least 1"));
        }
        if let Some(b) = self.time_budget_secs {
            if b.is_nan() || b <= 0.0 {
                return Err(Error::config("time_budget_secs", "must be positive"));
            }
        }
        if self
            .nesting_probe_alphas
            .iter()
            .any(|a| !(*a > 0.0 && *a <= 100.0))
        {
            return Err(Error::config(
                "nesting_probe_alphas",
                "entries must lie in (0, 100]",
            ));
        }
        self.heuristic.validate()?;
        self.train_config(0).validate()
    }

    fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.local_epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            seed,
            lambda: self.lmm.lambda,
            notion: self.lmm.notion,
        }
    }

    fn stopping_rule(&self) -> Result<StoppingRule> {
        if self.fair_check_band {
            StoppingRule::banded(
                self.accuracy_tolerance,
                self.threshold_round,
                self.band_patience,
            )
        } else {
            StoppingRule::literal(self.accuracy_tolerance, self.threshold_round)
        }
    }
}

/// One round of the log. Rates are in `[0, 1]`; `d_acc` is in percentage
/// points. Violations are measured on the aggregator set, `test_*` on the
/// held-out set when one is supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub selected: Vec<usize>,
    pub aggregated: Vec<usize>,
    pub acc_agg: f64,
    pub acc_test: Option<f64>,
    pub d_eopp: Option<f64>,
    pub d_eo: Option<f64>,
    pub d_ap: Option<f64>,
    pub test_d_eopp: Option<f64>,
    pub test_d_eo: Option<f64>,
    pub test_d_ap: Option<f64>,
    pub d_acc: Option<f64>,
    pub decision: Decision,
    pub phi_best_updated: bool,
    pub fair_check_invoked: bool,
    pub stopped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_nesting_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    /// The tracked best model at exit.
    #[serde(with = "export::params_base64")]
    pub final_params: ModelParams,
    /// Round whose aggregated model is `final_params`.
    pub best_round: usize,
    pub stop_round: usize,
    /// True when the tolerance rule fired before `T` rounds.
    pub stopped_early: bool,
    pub final_agg: FairnessReport,
    pub final_test: Option<FairnessReport>,
    pub logs: Vec<RoundLog>,
    pub wall_clock_secs: f64,
}

/// Scores a global model on the aggregator set for the stopping rule and
/// FairCheck. Swappable so the control flow can be driven by scripted
/// accuracies.
pub trait GlobalEvaluator: Sync {
    fn evaluate(
        &self,
        round: usize,
        params: &ModelParams,
        agg_set: &Dataset,
    ) -> Result<FairnessReport>;
}

/// The real evaluator: hard predictions at a fixed threshold.
#[derive(Debug, Clone, Copy)]
pub struct AggSetEvaluator {
    pub threshold: f64,
}

impl GlobalEvaluator for AggSetEvaluator {
    fn evaluate(
        &self,
        _round: usize,
        params: &ModelParams,
        agg_set: &Dataset,
    ) -> Result<FairnessReport> {
        evaluate(params, agg_set, self.threshold)
    }
}

#[derive(Debug, Clone, Copy)]
enum LocalObjective {
    CrossEntropy,
    Lagrangian,
}

/// Runs the federated protocol with local cross-entropy training.
pub fn run_federated(
    cfg: &RunConfig,
    train_shards: &[Dataset],
    agg_set: &Dataset,
    test_set: Option<&Dataset>,
) -> Result<RunResult> {
    let evaluator = AggSetEvaluator {
        threshold: cfg.threshold,
    };
    run_federated_with(cfg, train_shards, agg_set, test_set, &evaluator)
}

/// [`run_federated`] with a caller-supplied evaluator for the stopping rule.
pub fn run_federated_with(
    cfg: &RunConfig,
    train_shards: &[Dataset],
    agg_set: &Dataset,
    test_set: Option<&Dataset>,
    evaluator: &dyn GlobalEvaluator,
) -> Result<RunResult> {
    simulate(
        cfg,
        train_shards,
        agg_set,
        test_set,
        LocalObjective::CrossEntropy,
        evaluator,
    )
}

/// A single client holding all training data, aggregated with FedAvg.
pub fn run_centralized(
    cfg: &RunConfig,
    full_train: &Dataset,
    agg_set: &Dataset,
    test_set: Option<&Dataset>,
) -> Result<RunResult> {
    let cfg = RunConfig {
        num_clients: 1,
        participation: 1.0,
        heuristic: HeuristicSpec::fed_avg(cfg.heuristic.notion),
        ..cfg.clone()
    };
    run_federated(&cfg, std::slice::from_ref(full_train), agg_set, test_set)
}

/// FedAvg over clients trained with the fairness-penalised loss
/// (`cfg.lmm`). Only meaningful when every shard holds every group; a
/// single-group shard yields [`Error::Client`] wrapping
/// [`Error::UndefinedFairnessLoss`] for the lowest offending client id,
/// reported with round 0 (before any training).
pub fn run_oracle_lmm(
    cfg: &RunConfig,
    homogeneous_shards: &[Dataset],
    agg_set: &Dataset,
    test_set: Option<&Dataset>,
) -> Result<RunResult> {
    for (client, shard) in homogeneous_shards.iter().enumerate() {
        check_fairness_strata(shard, cfg.lmm.notion).map_err(|e| Error::Client {
            client,
            round: 0,
            source: Box::new(e),
        })?;
    }
    let cfg = RunConfig {
        heuristic: HeuristicSpec::fed_avg(cfg.heuristic.notion),
        ..cfg.clone()
    };
    let evaluator = AggSetEvaluator {
        threshold: cfg.threshold,
    };
    simulate(
        &cfg,
        homogeneous_shards,
        agg_set,
        test_set,
        LocalObjective::Lagrangian,
        &evaluator,
    )
}

fn check_inputs(
    cfg: &RunConfig,
    shards: &[Dataset],
    agg_set: &Dataset,
    test_set: Option<&Dataset>,
) -> Result<()> {
    cfg.validate()?;
    if shards.len() != cfg.num_clients {
        return Err(Error::config(
            "num_clients",
            format!(
                "{} shards supplied for {} clients",
                shards.len(),
                cfg.num_clients
            ),
        ));
    }
    let d = agg_set.feature_dim();
    let s = agg_set.num_groups();
    for (i, shard) in shards.iter().chain(test_set).enumerate() {
        if shard.feature_dim() != d {
            return Err(Error::config(
                "train_shards",
                format!(
                    "dataset {i} has feature_dim {}, aggregator set has {d}",
                    shard.feature_dim()
                ),
            ));
        }
        if shard.num_groups() != s {
            return Err(Error::config(
                "train_shards",
                format!(
                    "dataset {i} declares {} groups, aggregator set has {s}",
                    shard.num_groups()
                ),
            ));
        }
    }
    check_group_complete(agg_set, cfg.heuristic.notion)
}

fn participants(cfg: &RunConfig, round: usize) -> Vec<usize> {
    let m = cfg.num_clients;
    let k = ((cfg.participation * m as f64 - 1e-9).ceil() as usize).clamp(1, m);
    if k == m {
        return (0..m).collect();
    }
    let mut rng = seed::rng(cfg.seed, &[seed::tag::PARTICIPATION, round as u64]);
    let mut ids = index::sample(&mut rng, m, k).into_vec();
    ids.sort_unstable();
    ids
}

fn nesting_ok(
    spec: &HeuristicSpec,
    scores: &[aggregation::ScoredSubmission],
    alphas: &[f64],
) -> Result<bool> {
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let select = |a: f64| match spec.kind {
        HeuristicKind::FairAccAvg => aggregation::select_fair_acc_avg(scores, a),
        _ => aggregation::select_fair_avg(scores, a),
    };
    let sets = sorted
        .iter()
        .map(|&a| select(a))
        .collect::<Result<Vec<_>>>()?;
    Ok(sets
        .windows(2)
        .all(|w| w[0].iter().all(|i| w[1].contains(i))))
}

fn simulate(
    cfg: &RunConfig,
    shards: &[Dataset],
    agg_set: &Dataset,
    test_set: Option<&Dataset>,
    objective: LocalObjective,
    evaluator: &dyn GlobalEvaluator,
) -> Result<RunResult> {
    let started = Instant::now();
    check_inputs(cfg, shards, agg_set, test_set)?;
    let arch = cfg.model.arch(agg_set.feature_dim());
    let notion = cfg.heuristic.notion;
    let mut rule = cfg.stopping_rule()?;

    let mut global = init_params(arch, cfg.seed)?;
    let mut best: Option<(ModelParams, FairnessReport, usize)> = None;
    let mut history: Vec<f64> = Vec::with_capacity(cfg.rounds);
    let mut logs: Vec<RoundLog> = Vec::with_capacity(cfg.rounds);
    let mut stopped_early = false;

    for round in 1..=cfg.rounds {
        let selected = participants(cfg, round);
        let submissions = cfg.exec.try_map(&selected, |&client| {
            let train_cfg = cfg.train_config(seed::derive(
                cfg.seed,
                &[seed::tag::CLIENT_TRAIN, client as u64, round as u64],
            ));
            let shard = &shards[client];
            let trained = match objective {
                LocalObjective::CrossEntropy => local_train_ce(&global, shard, &train_cfg),
                LocalObjective::Lagrangian => local_train_lmm(&global, shard, &train_cfg),
            };
            trained
                .map(|params| ClientSubmission {
                    client_id: client,
                    params,
                    num_samples: shard.len(),
                })
                .map_err(|e| Error::Client {
                    client,
                    round,
                    source: Box::new(e),
                })
        })?;

        let aggregate = aggregation::dispatch(&cfg.heuristic, &submissions, agg_set, cfg.exec)?;
        let alpha_nesting_ok = match (&aggregate.scores, cfg.nesting_probe_alphas.is_empty()) {
            (Some(scores), false) => {
                let ok = nesting_ok(&cfg.heuristic, scores, &cfg.nesting_probe_alphas)?;
                log::debug!("round {round}: α-selection nesting holds: {ok}");
                Some(ok)
            }
            _ => None,
        };
        let candidate = aggregate.params;
        let report = evaluator.evaluate(round, &candidate, agg_set)?;
        let test_report = test_set
            .map(|t| evaluate(&candidate, t, cfg.threshold))
            .transpose()?;
        history.push(100.0 * report.accuracy);

        let (decision, d_acc) = rule.decide(&history);
        let mut updated = false;
        let mut fair_checked = false;
        match decision {
            Decision::Replace => updated = true,
            Decision::FairCheck | Decision::FairCheckThenStop => {
                fair_checked = true;
                updated = match &best {
                    Some((_, incumbent, _)) => {
                        !incumbent_wins(violation(incumbent, notion), violation(&report, notion))
                    }
                    None => true,
                };
            }
            Decision::Keep | Decision::Stop => {}
        }
        if updated {
            best = Some((candidate.clone(), report.clone(), round));
        }
        let stopped = matches!(decision, Decision::Stop | Decision::FairCheckThenStop);

        log::debug!(
            "round {round}: acc {:.2}% d_acc {:?} decision {:?}",
            100.0 * report.accuracy,
            d_acc,
            decision
        );
        logs.push(RoundLog {
            round,
            selected,
            aggregated: aggregate.chosen,
            acc_agg: report.accuracy,
            acc_test: test_report.as_ref().map(|r| r.accuracy),
            d_eopp: report.delta_eopp,
            d_eo: report.delta_eo,
            d_ap: report.delta_ap,
            test_d_eopp: test_report.as_ref().and_then(|r| r.delta_eopp),
            test_d_eo: test_report.as_ref().and_then(|r| r.delta_eo),
            test_d_ap: test_report.as_ref().and_then(|r| r.delta_ap),
            d_acc,
            decision,
            phi_best_updated: updated,
            fair_check_invoked: fair_checked,
            stopped,
            alpha_nesting_ok,
        });
        global = candidate;

        if stopped {
            stopped_early = true;
            break;
        }
        if let Some(budget) = cfg.time_budget_secs {
            if started.elapsed().as_secs_f64() > budget {
                return Err(Error::BudgetExceeded {
                    budget_secs: budget,
                    round,
                });
            }
        }
    }

    let (final_params, final_agg, best_round) = best.expect("round 1 always sets the tracked best");
    let final_test = test_set
        .map(|t| evaluate(&final_params, t, cfg.threshold))
        .transpose()?;
    Ok(RunResult {
        config: cfg.clone(),
        final_params,
        best_round,
        stop_round: logs.len(),
        stopped_early,
        final_agg,
        final_test,
        logs,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{
        generate_synthetic, partition_heterogeneous, split_aggregator_set, SynthSpec,
    };

    /// Reports a fixed accuracy (in percent) and Δ per round.
    struct Scripted {
        accs: Vec<f64>,
        deltas: Vec<f64>,
    }

    impl GlobalEvaluator for Scripted {
        fn evaluate(&self, round: usize, _: &ModelParams, _: &Dataset) -> Result<FairnessReport> {
            let d = Some(self.deltas[round - 1]);
            Ok(FairnessReport {
                accuracy: self.accs[round - 1] / 100.0,
                fnr: None,
                fpr: None,
                fnr_by_group: vec![],
                fpr_by_group: vec![],
                delta_eopp: d,
                delta_eo: d,
                delta_ap: d,
            })
        }
    }

    fn data(seed: u64) -> (Vec<Dataset>, Dataset) {
        let spec = SynthSpec {
            num_samples: 600,
            feature_dim: 2,
            num_groups: 2,
            group_proportions: vec![0.5, 0.5],
            positive_rates: vec![0.5, 0.5],
            class_means: vec![
                [vec![-1.0, 0.0], vec![1.0, 0.0]],
                [vec![0.0, -1.0], vec![0.0, 1.0]],
            ],
            noise_std: 0.8,
            label_flip_rates: vec![0.0, 0.1],
            seed,
        };
        let all = generate_synthetic(&spec).unwrap();
        let (agg, train) = split_aggregator_set(&all, 0.2, seed).unwrap();
        (
            partition_heterogeneous(&train, 4, &[0.5, 0.5], seed).unwrap(),
            agg,
        )
    }

    fn config(heuristic: HeuristicSpec) -> RunConfig {
        RunConfig {
            num_clients: 4,
            rounds: 6,
            local_epochs: 1,
            learning_rate: 0.1,
            batch_size: 16,
            heuristic,
            accuracy_tolerance: 1.0,
            threshold_round: 2,
            participation: 1.0,
            seed: 7,
            model: ModelSpec::Linear,
            lmm: LmmConfig::default(),
            fair_check_band: false,
            band_patience: 2,
            threshold: 0.5,
            time_budget_secs: None,
            nesting_probe_alphas: vec![],
            exec: Exec::default(),
        }
    }

    #[test]
    fn scripted_stop_returns_best_from_round_three() {
        let (shards, agg) = data(1);
        let ev = Scripted {
            accs: vec![50.0, 60.0, 70.0, 70.2, 80.0, 90.0],
            deltas: vec![0.3; 6],
        };
        let res = run_federated_with(
            &config(HeuristicSpec::fed_avg(Notion::EO)),
            &shards,
            &agg,
            None,
            &ev,
        )
        .unwrap();
        assert_eq!(res.stop_round, 4);
        assert!(res.stopped_early);
        assert_eq!(res.best_round, 3);
        assert!(res.logs[3].stopped);
        assert!(!res.logs[3].phi_best_updated);
        assert!((res.final_agg.accuracy - 0.70).abs() < 1e-12);
        assert!((res.logs[3].d_acc.unwrap() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn fair_check_keeps_fairer_incumbent() {
        let (shards, agg) = data(2);
        // Round 4: Δ_Acc = |71 - 70| = 1 = a, and the candidate is less fair.
        let ev = Scripted {
            accs: vec![50.0, 60.0, 70.0, 71.0, 90.0, 100.0],
            deltas: vec![0.3, 0.3, 0.1, 0.2, 0.3, 0.3],
        };
        let res = run_federated_with(
            &config(HeuristicSpec::fed_avg(Notion::EO)),
            &shards,
            &agg,
            None,
            &ev,
        )
        .unwrap();
        let r4 = &res.logs[3];
        assert!(r4.fair_check_invoked);
        assert!(!r4.phi_best_updated);
        assert_eq!(res.stop_round, 6);
        assert!(!res.stopped_early);
        assert_eq!(res.best_round, 6);
    }

    #[test]
    fn fair_check_takes_fairer_candidate() {
        let (shards, agg) = data(2);
        let ev = Scripted {
            accs: vec![50.0, 60.0, 70.0, 71.0, 71.5, 100.0],
            deltas: vec![0.3, 0.3, 0.2, 0.1, 0.3, 0.3],
        };
        let res = run_federated_with(
            &config(HeuristicSpec::fed_avg(Notion::EO)),
            &shards,
            &agg,
            None,
            &ev,
        )
        .unwrap();
        assert!(res.logs[3].fair_check_invoked && res.logs[3].phi_best_updated);
        assert_eq!(res.stop_round, 5);
        assert_eq!(res.best_round, 4);
    }

    #[test]
    fn never_stops_when_accuracy_keeps_jumping() {
        let (shards, agg) = data(3);
        let ev = Scripted {
            accs: vec![10.0, 20.0, 30.0, 40.0, 50.0, 60.0],
            deltas: vec![0.1; 6],
        };
        let res = run_federated_with(
            &config(HeuristicSpec::fair_best(Notion::EO)),
            &shards,
            &agg,
            None,
            &ev,
        )
        .unwrap();
        assert_eq!(res.stop_round, 6);
        assert_eq!(res.best_round, 6);
        assert!(res.logs.iter().all(|l| l.phi_best_updated && !l.stopped));
    }

    #[test]
    fn runs_are_deterministic_and_exec_independent() {
        let (shards, agg) = data(4);
        let mut cfg = config(HeuristicSpec::fair_avg(50.0, Notion::EO));
        cfg.exec = Exec::Sequential;
        let a = run_federated(&cfg, &shards, &agg, Some(&agg)).unwrap();
        cfg.exec = Exec::Parallel;
        let b = run_federated(&cfg, &shards, &agg, Some(&agg)).unwrap();
        assert_eq!(a.final_params, b.final_params);
        assert_eq!(a.logs, b.logs);
    }

    #[test]
    fn partial_participation_samples_reproducibly() {
        let mut cfg = config(HeuristicSpec::fed_avg(Notion::EO));
        cfg.num_clients = 10;
        cfg.participation = 0.3;
        for round in 1..5 {
            let ids = participants(&cfg, round);
            assert_eq!(ids.len(), 3);
            assert_eq!(ids, participants(&cfg, round));
            assert!(ids.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn oracle_rejects_single_group_shards() {
        let (shards, agg) = data(5);
        let err = run_oracle_lmm(
            &config(HeuristicSpec::fed_avg(Notion::EO)),
            &shards,
            &agg,
            None,
        )
        .unwrap_err();
        match err {
            Error::Client {
                client,
                round,
                source,
            } => {
                assert_eq!((client, round), (0, 0));
                assert!(matches!(*source, Error::UndefinedFairnessLoss { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn centralized_uses_one_client() {
        let (shards, agg) = data(6);
        let samples = shards
            .iter()
            .flat_map(|s| s.samples().iter().cloned())
            .collect();
        let full = Dataset::new(samples, 2, 2).unwrap();
        let res = run_centralized(
            &config(HeuristicSpec::fair_best(Notion::EO)),
            &full,
            &agg,
            None,
        )
        .unwrap();
        assert_eq!(res.config.num_clients, 1);
        assert!(res.logs.iter().all(|l| l.selected == vec![0]));
        assert!(res.final_agg.accuracy > 0.7);
    }

    #[test]
    fn config_validation_names_fields() {
        let mut cfg = config(HeuristicSpec::fed_avg(Notion::EO));
        cfg.rounds = 2;
        assert!(
            matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "threshold_round")
        );
        let mut cfg = config(HeuristicSpec::fed_avg(Notion::EO));
        cfg.participation = 0.0;
        assert!(
            matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "participation")
        );
    }

    #[test]
    fn shard_count_must_match() {
        let (shards, agg) = data(7);
        let cfg = config(HeuristicSpec::fed_avg(Notion::EO));
        assert!(run_federated(&cfg, &shards[..3], &agg, None).is_err());
    }

    #[test]
    fn json_and_csv_round_trip() {
        let (shards, agg) = data(8);
        let res = run_federated(
            &config(HeuristicSpec::fair_best(Notion::EO)),
            &shards,
            &agg,
            Some(&agg),
        )
        .unwrap();
        let back = RunResult::from_json(&res.to_json().unwrap()).unwrap();
        assert_eq!(back.final_params, res.final_params);
        assert_eq!(back.logs, res.logs);
        let csv = res.round_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), export::ROUND_CSV_HEADER.join(","));
        assert_eq!(lines.count(), res.logs.len());
    }

    #[test]
    fn nesting_probe_reports_per_round() {
        let (shards, agg) = data(9);
        let mut cfg = config(HeuristicSpec::fair_acc_avg(10.0, Notion::EO));
        cfg.nesting_probe_alphas = vec![10.0, 30.0, 60.0, 100.0];
        let res = run_federated(&cfg, &shards, &agg, None).unwrap();
        assert!(res.logs.iter().all(|l| l.alpha_nesting_ok == Some(true)));
    }
}
