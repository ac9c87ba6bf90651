//! The accuracy-tolerance stopping rule.
//!
//! Accuracies are in percent. From round `τ + 1` on, each round compares the
//! accuracy of the model it just aggregated against the best of the `τ`
//! preceding rounds:
//!
//! ```text
//! Δ_Acc = |acc_t - max(acc_{t-1}, …, acc_{t-τ})|
//! Δ_Acc <  a  → stop, returning the tracked best model
//! Δ_Acc >  a  → the new model becomes the tracked best
//! Δ_Acc == a  → FairCheck between the tracked best and the new model
//! ```
//!
//! Rounds `t ≤ τ` always replace the tracked best. Equality is tested with a
//! band of [`EQUALITY_BAND`].
//!
//! The optional band mode widens the middle branch: any `0 < Δ_Acc ≤ a`
//! triggers FairCheck, and the run stops once `Δ_Acc ≤ a` has held for
//! `patience` consecutive rounds.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const EQUALITY_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Replace,
    FairCheck,
    /// Leave the tracked best untouched (band mode, `Δ_Acc == 0`).
    Keep,
    Stop,
    /// Band mode: run FairCheck on this round's model, then stop.
    FairCheckThenStop,
}

#[derive(Debug, Clone)]
pub struct StoppingRule {
    tolerance: f64,
    threshold_round: usize,
    band_patience: Option<usize>,
    streak: usize,
}

impl StoppingRule {
    pub fn literal(tolerance: f64, threshold_round: usize) -> Result<Self> {
        Self::new(tolerance, threshold_round, None)
    }

    pub fn banded(tolerance: f64, threshold_round: usize, patience: usize) -> Result<Self> {
        if patience == 0 {
            return Err(Error::config("band_patience", "must be at least 1"));
        }
        Self::new(tolerance, threshold_round, Some(patience))
    }

    fn new(tolerance: f64, threshold_round: usize, band_patience: Option<usize>) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::config("accuracy_tolerance", "must be positive"));
        }
        if threshold_round == 0 {
            return Err(Error::config("threshold_round", "must be at least 1"));
        }
        Ok(StoppingRule {
            tolerance,
            threshold_round,
            band_patience,
            streak: 0,
        })
    }

    /// `history[i]` is the accuracy (percent) of round `i + 1`'s model; the
    /// last entry is the current round. Returns `None` for rounds `t ≤ τ`.
    pub fn delta_acc(&self, history: &[f64]) -> Option<f64> {
        let t = history.len();
        if t <= self.threshold_round {
            return None;
        }
        let current = history[t - 1];
        let best_recent = history[t - 1 - self.threshold_round..t - 1]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        Some((current - best_recent).abs())
    }

    pub fn decide(&mut self, history: &[f64]) -> (Decision, Option<f64>) {
        let Some(d) = self.delta_acc(history) else {
            return (Decision::Replace, None);
        };
        let a = self.tolerance;
        let decision = match self.band_patience {
            None => {
                if d < a - EQUALITY_BAND {
                    Decision::Stop
                } else if d > a + EQUALITY_BAND {
                    Decision::Replace
                } else {
                    Decision::FairCheck
                }
            }
            Some(patience) => {
                if d > a + EQUALITY_BAND {
                    self.streak = 0;
                    Decision::Replace
                } else {
                    self.streak += 1;
                    match (self.streak >= patience, d > 0.0) {
                        (true, true) => Decision::FairCheckThenStop,
                        (true, false) => Decision::Stop,
                        (false, true) => Decision::FairCheck,
                        (false, false) => Decision::Keep,
                    }
                }
            }
        };
        (decision, Some(d))
    }
}
