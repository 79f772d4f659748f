//! Performance and cost modelling for disaster-recovery backup systems.
//!
//! Job logs and restore measurements feed discrete-time stock-and-flow
//! models of a backup system; the runs yield throughput, storage and cost
//! figures, which are projected onto a test data volume and checked
//! against business-impact targets.

// `!(x > 0.0)` is used on purpose: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bia;
pub mod cost;
pub mod engine;
pub mod error;
pub mod io;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod reliability;

pub use bia::{BiaTargets, ComplianceReport, ComplianceVerdict, Status};
pub use cost::{CostBreakdown, ObjectStoreRates, TransactionCounts, VaultRates};
pub use engine::{run, ComponentKind, Model, ModelComponent, Ref, RunResult, Series};
pub use error::{Error, Result};
pub use io::scenario::{load_scenario, LoadedScenario, Scenario, SystemKind};
pub use metrics::{JobSample, Projection, Rate, RateBasis, RestoreSample, SourceTier};
pub use pipeline::{evaluate_all, evaluate_scenario, ScenarioResults};
pub use reliability::{FailureBasis, ReliabilityComponent, SeriesSystem, SystemReliability};
