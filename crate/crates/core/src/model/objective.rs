//! Training objectives with analytic gradients.
//!
//! * Mean binary cross-entropy, written in logit form
//!   `softplus(z) - y·z` so it stays finite for saturated predictions.
//! * The soft fairness violation used by the Lagrangian loss: group error
//!   rates computed from probabilities `p_j` instead of hard predictions,
//!
//!   ```text
//!   sFNR_g = Σ_{j∈g, y=1} (1 - p_j) / #{j∈g, y=1}
//!   sFPR_g = Σ_{j∈g, y=0} p_j       / #{j∈g, y=0}
//!   gap(r) = max_g r_g - min_g r_g       (= |r_1 - r_0| for two groups)
//!   EOpp = gap(sFNR), EO = max(gap(sFPR), gap(sFNR)), AP = gap(sFPR) + gap(sFNR)
//!   ```
//!
//!   A group with no samples in a stratum the notion needs has an empty
//!   denominator, so the loss is undefined rather than merely large.

use super::{sigmoid, ModelParams};
use crate::data::{Dataset, Sample};
use crate::fairness::Notion;
use crate::{Error, Result};

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean cross-entropy over `batch` and its gradient.
pub fn cross_entropy<'a, I>(params: &ModelParams, batch: I) -> (f64, Vec<f64>)
where
    I: IntoIterator<Item = &'a Sample>,
{
    let mut grad = vec![0.0; params.values().len()];
    let mut loss = 0.0;
    let mut n = 0usize;
    for s in batch {
        let z = params.logit(&s.features);
        let y = f64::from(s.label);
        loss += softplus(z) - y * z;
        params.logit_accumulate_grad(&s.features, sigmoid(z) - y, &mut grad);
        n += 1;
    }
    if n > 0 {
        let inv = 1.0 / n as f64;
        loss *= inv;
        for g in &mut grad {
            *g *= inv;
        }
    }
    (loss, grad)
}

/// Checks that `data` has every stratum the soft violation for `notion`
/// divides by.
pub fn check_fairness_strata(data: &Dataset, notion: Notion) -> Result<()> {
    let cells = data.cell_counts();
    for (g, c) in cells.iter().enumerate() {
        if c[0] + c[1] == 0 {
            return Err(Error::UndefinedFairnessLoss {
                missing: format!("no samples of group {g}; every group's error rate is required"),
            });
        }
        if c[1] == 0 {
            return Err(Error::UndefinedFairnessLoss {
                missing: format!("no positive samples in group {g} (FNR denominator is zero)"),
            });
        }
        if notion != Notion::EOpp && c[0] == 0 {
            return Err(Error::UndefinedFairnessLoss {
                missing: format!("no negative samples in group {g} (FPR denominator is zero)"),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Gap {
    value: f64,
    hi: usize,
    lo: usize,
}

fn gap(rates: &[f64]) -> Gap {
    let mut hi = 0;
    let mut lo = 0;
    for (g, &r) in rates.iter().enumerate() {
        if r > rates[hi] {
            hi = g;
        }
        if r < rates[lo] {
            lo = g;
        }
    }
    Gap {
        value: rates[hi] - rates[lo],
        hi,
        lo,
    }
}

/// Soft violation of `notion` on all of `data`, and its gradient.
pub fn soft_violation(
    params: &ModelParams,
    data: &Dataset,
    notion: Notion,
) -> Result<(f64, Vec<f64>)> {
    check_fairness_strata(data, notion)?;
    let s = data.num_groups();
    let cells = data.cell_counts();
    let probs: Vec<f64> = data
        .samples()
        .iter()
        .map(|x| sigmoid(params.logit(&x.features)))
        .collect();

    let mut fnr = vec![0.0; s];
    let mut fpr = vec![0.0; s];
    for (x, &p) in data.samples().iter().zip(&probs) {
        if x.label == 1 {
            fnr[x.group] += 1.0 - p;
        } else {
            fpr[x.group] += p;
        }
    }
    for g in 0..s {
        fnr[g] /= cells[g][1] as f64;
        if cells[g][0] > 0 {
            fpr[g] /= cells[g][0] as f64;
        }
    }

    // Coefficient of each group rate in the violation (±1 or 0).
    let mut c_fnr = vec![0.0; s];
    let mut c_fpr = vec![0.0; s];
    let fnr_gap = gap(&fnr);
    let add = |c: &mut Vec<f64>, g: Gap| {
        c[g.hi] += 1.0;
        c[g.lo] -= 1.0;
    };
    let value = match notion {
        Notion::EOpp => {
            add(&mut c_fnr, fnr_gap);
            fnr_gap.value
        }
        Notion::EO => {
            let fpr_gap = gap(&fpr);
            if fpr_gap.value > fnr_gap.value {
                add(&mut c_fpr, fpr_gap);
                fpr_gap.value
            } else {
                add(&mut c_fnr, fnr_gap);
                fnr_gap.value
            }
        }
        Notion::AP => {
            let fpr_gap = gap(&fpr);
            add(&mut c_fnr, fnr_gap);
            add(&mut c_fpr, fpr_gap);
            fpr_gap.value + fnr_gap.value
        }
    };

    let mut grad = vec![0.0; params.values().len()];
    for (x, &p) in data.samples().iter().zip(&probs) {
        let g = x.group;
        let coef = if x.label == 1 {
            -c_fnr[g] / cells[g][1] as f64
        } else {
            c_fpr[g] / cells[g][0] as f64
        };
        if coef != 0.0 {
            params.logit_accumulate_grad(&x.features, coef * p * (1.0 - p), &mut grad);
        }
    }
    Ok((value, grad))
}
