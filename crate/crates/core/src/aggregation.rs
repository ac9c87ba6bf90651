//! Aggregator choice functions.
//!
//! Every function here is pure. Weighted means are always summed in
//! ascending `client_id` order and ties are always broken towards the
//! smallest `client_id`, so results do not depend on submission order or on
//! how scoring was scheduled.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::exec::Exec;
use crate::fairness::{evaluate, violation, Notion, DEFAULT_THRESHOLD};
use crate::model::{objective::check_fairness_strata, ModelParams};
use crate::{Error, Result};

/// Floor applied to a zero violation in the accuracy/violation ratio.
pub const RATIO_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientSubmission {
    pub client_id: usize,
    pub params: ModelParams,
    pub num_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicKind {
    #[serde(alias = "fed_avg")]
    FedAvg,
    FairBest,
    FairAvg,
    FairAccAvg,
}

impl HeuristicKind {
    pub fn needs_alpha(self) -> bool {
        matches!(self, HeuristicKind::FairAvg | HeuristicKind::FairAccAvg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicSpec {
    pub kind: HeuristicKind,
    /// Percentage of submissions kept, in (0, 100]. Only for FairAvg and
    /// FairAccAvg.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub notion: Notion,
}

impl HeuristicSpec {
    pub fn fed_avg(notion: Notion) -> Self {
        HeuristicSpec {
            kind: HeuristicKind::FedAvg,
            alpha: None,
            notion,
        }
    }

    pub fn fair_best(notion: Notion) -> Self {
        HeuristicSpec {
            kind: HeuristicKind::FairBest,
            alpha: None,
            notion,
        }
    }

    pub fn fair_avg(alpha: f64, notion: Notion) -> Self {
        HeuristicSpec {
            kind: HeuristicKind::FairAvg,
            alpha: Some(alpha),
            notion,
        }
    }

    pub fn fair_acc_avg(alpha: f64, notion: Notion) -> Self {
        HeuristicSpec {
            kind: HeuristicKind::FairAccAvg,
            alpha: Some(alpha),
            notion,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind.needs_alpha(), self.alpha) {
            (true, None) => Err(Error::config(
                "heuristic.alpha",
                format!("{:?} requires alpha", self.kind),
            )),
            (false, Some(_)) => Err(Error::config(
                "heuristic.alpha",
                format!("{:?} takes no alpha", self.kind),
            )),
            (true, Some(a)) if !(a > 0.0 && a <= 100.0) => Err(Error::config(
                "heuristic.alpha",
                format!("{a} outside (0, 100]"),
            )),
            _ => Ok(()),
        }
    }

    /// Short filesystem-safe label, e.g. `fedavg`, `fair_best`,
    /// `fair_acc_avg-a10`.
    pub fn label(&self) -> String {
        let base = match self.kind {
            HeuristicKind::FedAvg => "fedavg",
            HeuristicKind::FairBest => "fair_best",
            HeuristicKind::FairAvg => "fair_avg",
            HeuristicKind::FairAccAvg => "fair_acc_avg",
        };
        match self.alpha {
            Some(a) => format!("{base}-a{a}"),
            None => base.to_string(),
        }
    }
}

/// A submission with its accuracy and violation on the aggregator set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSubmission {
    pub submission: ClientSubmission,
    pub acc: f64,
    pub delta: Option<f64>,
}

/// Result of one aggregation step.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub params: ModelParams,
    /// Client ids whose parameters entered the output, ascending.
    pub chosen: Vec<usize>,
    /// Per-submission scores, in input order; `None` for FedAvg.
    pub scores: Option<Vec<ScoredSubmission>>,
}

/// Checks the aggregator set has every stratum `notion` needs, so every
/// client's violation is defined.
pub fn check_group_complete(agg_set: &Dataset, notion: Notion) -> Result<()> {
    check_fairness_strata(agg_set, notion).map_err(|e| match e {
        Error::UndefinedFairnessLoss { missing } => {
            Error::Scoring(format!("aggregator set incomplete: {missing}"))
        }
        other => other,
    })
}

pub fn score_submissions(
    subs: &[ClientSubmission],
    agg_set: &Dataset,
    notion: Notion,
    exec: Exec,
) -> Result<Vec<ScoredSubmission>> {
    check_group_complete(agg_set, notion)?;
    exec.try_map(subs, |s| {
        let report = evaluate(&s.params, agg_set, DEFAULT_THRESHOLD)?;
        Ok(ScoredSubmission {
            submission: s.clone(),
            acc: report.accuracy,
            delta: violation(&report, notion),
        })
    })
}

fn check_shared_arch<'a>(mut subs: impl Iterator<Item = &'a ClientSubmission>) -> Result<()> {
    let Some(first) = subs.next() else {
        return Err(Error::Selection("no submissions".into()));
    };
    if first.num_samples == 0 {
        return Err(Error::Selection(format!(
            "client {} reports zero samples",
            first.client_id
        )));
    }
    for s in subs {
        if s.params.arch() != first.params.arch() {
            return Err(Error::ArchMismatch);
        }
        if s.num_samples == 0 {
            return Err(Error::Selection(format!(
                "client {} reports zero samples",
                s.client_id
            )));
        }
    }
    Ok(())
}

/// `Σ (n_i / Σ n_j) θ_i` over `selected`, summed in ascending client id.
fn weighted_mean(selected: &[&ClientSubmission]) -> Result<Aggregate> {
    check_shared_arch(selected.iter().copied())?;
    let mut ordered = selected.to_vec();
    ordered.sort_by_key(|s| s.client_id);
    let total: usize = ordered.iter().map(|s| s.num_samples).sum();
    let arch = ordered[0].params.arch();
    let mut out = vec![0.0; arch.param_count()];
    for s in &ordered {
        let w = s.num_samples as f64 / total as f64;
        for (o, v) in out.iter_mut().zip(s.params.values()) {
            *o += w * v;
        }
    }
    Ok(Aggregate {
        params: ModelParams::new(arch, out)?,
        chosen: ordered.iter().map(|s| s.client_id).collect(),
        scores: None,
    })
}

pub fn fed_avg(subs: &[ClientSubmission]) -> Result<ModelParams> {
    Ok(weighted_mean(&subs.iter().collect::<Vec<_>>())?.params)
}

/// `ceil(alpha/100 · n)`, at least 1.
pub fn top_count(alpha: f64, n: usize) -> usize {
    (((alpha * n as f64) / 100.0 - 1e-9).ceil() as usize).clamp(1, n.max(1))
}

fn defined(scored: &[ScoredSubmission]) -> Result<Vec<(&ScoredSubmission, f64)>> {
    let out: Vec<_> = scored
        .iter()
        .filter_map(|s| s.delta.map(|d| (s, d)))
        .collect();
    if out.is_empty() {
        return Err(Error::Selection(
            "every submission has an undefined violation".into(),
        ));
    }
    Ok(out)
}

/// Client ids of the top-α% submissions by increasing violation.
pub fn select_fair_avg(scored: &[ScoredSubmission], alpha: f64) -> Result<Vec<usize>> {
    let mut ranked = defined(scored)?;
    ranked.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.0.submission.client_id.cmp(&b.0.submission.client_id))
    });
    let k = top_count(alpha, scored.len()).min(ranked.len());
    Ok(ranked[..k]
        .iter()
        .map(|(s, _)| s.submission.client_id)
        .collect())
}

/// Client ids of the top-α% submissions by decreasing
/// `acc / max(delta, ε)`.
pub fn select_fair_acc_avg(scored: &[ScoredSubmission], alpha: f64) -> Result<Vec<usize>> {
    let mut ranked: Vec<(&ScoredSubmission, f64)> = defined(scored)?
        .into_iter()
        .map(|(s, d)| (s, s.acc / d.max(RATIO_EPSILON)))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.0.submission.client_id.cmp(&b.0.submission.client_id))
    });
    let k = top_count(alpha, scored.len()).min(ranked.len());
    Ok(ranked[..k]
        .iter()
        .map(|(s, _)| s.submission.client_id)
        .collect())
}

fn mean_of(scored: &[ScoredSubmission], ids: &[usize]) -> Result<Aggregate> {
    let chosen: Vec<&ClientSubmission> = scored
        .iter()
        .map(|s| &s.submission)
        .filter(|s| ids.contains(&s.client_id))
        .collect();
    weighted_mean(&chosen)
}

pub fn fair_best(scored: &[ScoredSubmission]) -> Result<ModelParams> {
    let best = select_fair_avg(scored, f64::MIN_POSITIVE)?;
    debug_assert_eq!(best.len(), 1);
    let s = scored
        .iter()
        .find(|s| s.submission.client_id == best[0])
        .expect("selected from scored");
    Ok(s.submission.params.clone())
}

pub fn fair_avg(scored: &[ScoredSubmission], alpha: f64) -> Result<ModelParams> {
    Ok(mean_of(scored, &select_fair_avg(scored, alpha)?)?.params)
}

pub fn fair_acc_avg(scored: &[ScoredSubmission], alpha: f64) -> Result<ModelParams> {
    Ok(mean_of(scored, &select_fair_acc_avg(scored, alpha)?)?.params)
}

/// True when the incumbent should be kept: its violation is no larger than
/// the challenger's. Undefined violations lose to defined ones.
pub fn incumbent_wins(incumbent: Option<f64>, challenger: Option<f64>) -> bool {
    let key = |d: Option<f64>| d.unwrap_or(f64::INFINITY);
    key(incumbent) <= key(challenger)
}

/// Returns whichever of `a` (incumbent) and `b` has the smaller violation
/// on `agg_set`; ties keep `a`.
pub fn fair_check(
    a: &ModelParams,
    b: &ModelParams,
    agg_set: &Dataset,
    notion: Notion,
) -> Result<ModelParams> {
    if a.arch() != b.arch() {
        return Err(Error::ArchMismatch);
    }
    check_group_complete(agg_set, notion)?;
    let da = violation(&evaluate(a, agg_set, DEFAULT_THRESHOLD)?, notion);
    let db = violation(&evaluate(b, agg_set, DEFAULT_THRESHOLD)?, notion);
    Ok(if incumbent_wins(da, db) {
        a.clone()
    } else {
        b.clone()
    })
}

/// Applies the heuristic in `spec` to one round's submissions.
pub fn dispatch(
    spec: &HeuristicSpec,
    subs: &[ClientSubmission],
    agg_set: &Dataset,
    exec: Exec,
) -> Result<Aggregate> {
    spec.validate()?;
    if spec.kind == HeuristicKind::FedAvg {
        return weighted_mean(&subs.iter().collect::<Vec<_>>());
    }
    check_shared_arch(subs.iter())?;
    let scored = score_submissions(subs, agg_set, spec.notion, exec)?;
    let ids = match spec.kind {
        HeuristicKind::FairBest => select_fair_avg(&scored, f64::MIN_POSITIVE)?,
        HeuristicKind::FairAvg => select_fair_avg(&scored, spec.alpha.unwrap())?,
        HeuristicKind::FairAccAvg => select_fair_acc_avg(&scored, spec.alpha.unwrap())?,
        HeuristicKind::FedAvg => unreachable!(),
    };
    let mut agg = mean_of(&scored, &ids)?;
    agg.scores = Some(scored);
    Ok(agg)
}
