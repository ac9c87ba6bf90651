//! The four experiment commands.
//!
//! Each command runs its heuristics for every repeat, writes
//! `<out>/<name>/<label>/<repeat>.json` (the full [`RunResult`]) and
//! `<repeat>.rounds.csv` (plot-ready per-round series), then writes
//! `summary.csv` and `summary.json` under `<out>/<name>/`.

use std::path::{Path, PathBuf};

use fairfed::aggregation::HeuristicSpec;
use fairfed::data::Dataset;
use fairfed::exec::Exec;
use fairfed::fairness::Notion;
use fairfed::orchestrator::{self, RunResult};

use crate::config::{ExperimentSpec, LmmShards, Partitioning};
use crate::error::{CliError, Result};
use crate::output::write_atomic;
use crate::summary::{tradeoff_distance, RepeatMetrics, Summary, SummaryRow};

#[derive(Debug, Clone, Copy)]
enum Trainer {
    Federated,
    /// FedAvg over clients trained with the fairness-penalised loss.
    Lagrangian,
}

/// One summary row's worth of runs.
#[derive(Debug, Clone)]
struct Arm {
    label: String,
    heuristic: HeuristicSpec,
    partition: Partitioning,
    trainer: Trainer,
    nesting_probe: Vec<f64>,
}

impl Arm {
    fn new(spec: &ExperimentSpec, heuristic: HeuristicSpec) -> Self {
        Arm {
            label: heuristic.label(),
            heuristic,
            partition: spec.partition.clone(),
            trainer: Trainer::Federated,
            nesting_probe: vec![],
        }
    }
}

/// Runs every repeat of `arm`, persisting each result. Repeats may run
/// concurrently; outputs are keyed by repeat index.
fn run_arm(
    spec: &ExperimentSpec,
    arm: &Arm,
    pool: Option<&Dataset>,
    dir: &Path,
    exec: Exec,
) -> Result<Vec<RunResult>> {
    let repeats: Vec<usize> = (0..spec.repeats).collect();
    exec.try_map(&repeats, |&r| {
        let data = spec.prepare_as(r, pool, &arm.partition)?;
        let cfg = orchestrator::RunConfig {
            seed: spec.repeat_seed(r),
            heuristic: arm.heuristic,
            nesting_probe_alphas: arm.nesting_probe.clone(),
            exec,
            ..spec.run.clone()
        };
        let result = match arm.trainer {
            Trainer::Federated => {
                orchestrator::run_federated(&cfg, &data.shards, &data.agg, data.test.as_ref())
            }
            Trainer::Lagrangian => {
                orchestrator::run_oracle_lmm(&cfg, &data.shards, &data.agg, data.test.as_ref())
            }
        }
        .map_err(|e| CliError::Run(format!("{} repeat {r}: {e}", arm.label)))?;
        if result
            .logs
            .iter()
            .any(|l| l.alpha_nesting_ok == Some(false))
        {
            log::warn!(
                "{} repeat {r}: α selections were not nested in some round",
                arm.label
            );
        }
        let out = dir.join(&arm.label);
        write_atomic(&out.join(format!("{r}.json")), result.to_json()?.as_bytes())?;
        write_atomic(
            &out.join(format!("{r}.rounds.csv")),
            result.round_csv()?.as_bytes(),
        )?;
        log::info!(
            "{} repeat {r}: stopped at round {} (best {}), accuracy {:.2}%",
            arm.label,
            result.stop_round,
            result.best_round,
            RepeatMetrics::of(&result).accuracy
        );
        Ok(result)
    })
}

struct Session<'a> {
    spec: &'a ExperimentSpec,
    dir: PathBuf,
    pool: Option<Dataset>,
    exec: Exec,
}

impl<'a> Session<'a> {
    fn open(spec: &'a ExperimentSpec, out: &Path, exec: Exec) -> Result<Self> {
        spec.validate()?;
        Ok(Session {
            spec,
            dir: out.join(&spec.name),
            pool: spec.load_pool()?,
            exec,
        })
    }

    fn row(&self, arm: &Arm) -> Result<SummaryRow> {
        Ok(self.row_with_metrics(arm)?.0)
    }

    fn row_with_metrics(&self, arm: &Arm) -> Result<(SummaryRow, Vec<RepeatMetrics>)> {
        let results = run_arm(self.spec, arm, self.pool.as_ref(), &self.dir, self.exec)?;
        let metrics: Vec<RepeatMetrics> = results.iter().map(RepeatMetrics::of).collect();
        Ok((SummaryRow::new(arm.label.clone(), &metrics), metrics))
    }

    fn finish(
        &self,
        command: &str,
        rows: Vec<SummaryRow>,
        warnings: Vec<String>,
    ) -> Result<Summary> {
        let summary = Summary {
            experiment: self.spec.name.clone(),
            command: command.into(),
            rows,
            warnings,
        };
        write_atomic(&self.dir.join("summary.csv"), summary.to_csv()?.as_bytes())?;
        write_atomic(&self.dir.join("summary.json"), summary.to_json().as_bytes())?;
        Ok(summary)
    }
}

/// Runs the configured heuristic.
pub fn cmd_run(spec: &ExperimentSpec, out: &Path, exec: Exec) -> Result<Summary> {
    let s = Session::open(spec, out, exec)?;
    let row = s.row(&Arm::new(spec, spec.run.heuristic))?;
    s.finish("run", vec![row], vec![])
}

/// Runs α-FairAvg and α-FairAccAvg for every α, and writes
/// `alpha_sweep.csv` with one line per (heuristic, α).
pub fn cmd_sweep_alpha(
    spec: &ExperimentSpec,
    alphas: &[f64],
    out: &Path,
    exec: Exec,
) -> Result<Summary> {
    if alphas.is_empty() {
        return Err(CliError::Config(
            "sweep.alphas: at least one α is required".into(),
        ));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 100.0)) {
        return Err(CliError::Config(format!(
            "sweep.alphas: {a} outside (0, 100]"
        )));
    }
    let s = Session::open(spec, out, exec)?;
    let notion = spec.run.heuristic.notion;
    let mut rows = Vec::new();
    let mut table = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Run(e.to_string());
    table
        .write_record([
            "heuristic",
            "alpha",
            "accuracy_mean",
            "accuracy_median",
            "d_eopp_mean",
            "d_eo_mean",
            "d_ap_mean",
            "d_eopp_median",
            "d_eo_median",
            "d_ap_median",
        ])
        .map_err(err)?;
    for make in [HeuristicSpec::fair_avg, HeuristicSpec::fair_acc_avg] {
        for &alpha in alphas {
            let mut arm = Arm::new(spec, make(alpha, notion));
            arm.nesting_probe = alphas.to_vec();
            let row = s.row(&arm)?;
            let c = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let kind = arm.label.split('-').next().unwrap_or_default().to_string();
            table
                .write_record([
                    kind,
                    alpha.to_string(),
                    c(row.accuracy.mean),
                    c(row.accuracy.median),
                    c(row.d_eopp.mean),
                    c(row.d_eo.mean),
                    c(row.d_ap.mean),
                    c(row.d_eopp.median),
                    c(row.d_eo.median),
                    c(row.d_ap.median),
                ])
                .map_err(err)?;
            rows.push(row);
        }
    }
    let bytes = table
        .into_inner()
        .map_err(|e| CliError::Run(e.to_string()))?;
    write_atomic(&s.dir.join("alpha_sweep.csv"), &bytes)?;
    s.finish("sweep-alpha", rows, vec![])
}

/// Runs FedAvg, FairBest, α-FairAvg and α-FairAccAvg on the same data and
/// reports improvement over FedAvg plus per-notion trade-off distances.
pub fn cmd_compare(spec: &ExperimentSpec, out: &Path, exec: Exec) -> Result<Summary> {
    let s = Session::open(spec, out, exec)?;
    let notion = spec.run.heuristic.notion;
    let alpha = spec.compare.alpha;
    let heuristics = [
        HeuristicSpec::fed_avg(notion),
        HeuristicSpec::fair_best(notion),
        HeuristicSpec::fair_avg(alpha, notion),
        HeuristicSpec::fair_acc_avg(alpha, notion),
    ];
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for h in heuristics {
        let (mut row, metrics) = s.row_with_metrics(&Arm::new(spec, h))?;
        for (i, n) in Notion::ALL.into_iter().enumerate() {
            match tradeoff_distance(&metrics, n) {
                Ok(d) => row.mahalanobis[i] = Some(d),
                Err(why) => {
                    let msg = format!(
                        "{}: no {} trade-off distance: {why}",
                        row.heuristic,
                        n.as_str()
                    );
                    log::warn!("{msg}");
                    warnings.push(msg);
                }
            }
        }
        rows.push(row);
    }
    let base = rows[0].clone();
    for row in &mut rows[1..] {
        row.set_improvement(&base);
    }
    s.finish("compare", rows, warnings)
}

/// Compares FedAvg and penalised FedAvg on homogeneous shards against the
/// configured heuristic on heterogeneous shards of the same pool.
pub fn cmd_oracle(spec: &ExperimentSpec, out: &Path, exec: Exec) -> Result<Summary> {
    let s = Session::open(spec, out, exec)?;
    let notion = spec.run.heuristic.notion;
    let heterogeneous =
        match &spec.partition {
            p @ Partitioning::Heterogeneous { .. } => p.clone(),
            Partitioning::Homogeneous => return Err(CliError::Config(
                "partition: oracle needs a heterogeneous partitioning for the fairness-aware row"
                    .into(),
            )),
        };
    let fedavg = Arm {
        label: "fedavg-homogeneous".into(),
        heuristic: HeuristicSpec::fed_avg(notion),
        partition: Partitioning::Homogeneous,
        trainer: Trainer::Federated,
        nesting_probe: vec![],
    };
    let lmm = Arm {
        label: format!(
            "fedavg_lmm-{}",
            match spec.oracle.lmm_shards {
                LmmShards::Homogeneous => "homogeneous",
                LmmShards::Heterogeneous => "heterogeneous",
            }
        ),
        partition: match spec.oracle.lmm_shards {
            LmmShards::Homogeneous => Partitioning::Homogeneous,
            LmmShards::Heterogeneous => heterogeneous.clone(),
        },
        trainer: Trainer::Lagrangian,
        ..fedavg.clone()
    };
    let f3 = Arm {
        label: format!("{}-heterogeneous", spec.run.heuristic.label()),
        partition: heterogeneous,
        ..Arm::new(spec, spec.run.heuristic)
    };
    let rows = [fedavg, lmm, f3]
        .iter()
        .map(|arm| s.row(arm))
        .collect::<Result<Vec<_>>>()?;
    s.finish("oracle", rows, vec![])
}
