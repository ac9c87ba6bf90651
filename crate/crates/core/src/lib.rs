//! Single-process simulator for fairness-aware federated learning when every
//! client holds data from a single demographic group.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`] generates, loads and partitions datasets carrying a sensitive
//!   attribute, and carves out the aggregator set.
//! * [`model`] holds small differentiable binary classifiers and their SGD
//!   loops (plain cross-entropy and the Lagrangian fairness-penalised loss).
//! * [`fairness`] computes hard-prediction group-fairness metrics, the
//!   coefficient of variation and the Mahalanobis trade-off distance.
//! * [`aggregation`] implements the aggregator's choice functions (FedAvg,
//!   FairBest, α-FairAvg, α-FairAccAvg) and FairCheck.
//! * [`orchestrator`] drives the round loop with accuracy-tolerance stopping
//!   and best-model tracking.
//!
//! Client-level work runs on rayon when the `parallel` feature is enabled
//! (the default); see [`exec`].

pub mod aggregation;
pub mod data;
mod error;
pub mod exec;
pub mod fairness;
pub mod model;
pub mod orchestrator;
pub mod seed;

pub use error::{Error, Result};
