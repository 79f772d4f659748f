//! Scenario files.
//!
//! A scenario is a TOML document; see `scenarios/README.md` for the full
//! key reference. Relative data paths resolve against the directory of the
//! scenario file. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bia::BiaTargets;
use crate::cost::{ObjectStoreRates, TransactionCounts, VaultRates};
use crate::error::{Error, Result};
use crate::io::joblog::{parse_job_log, parse_restore_samples};
use crate::metrics::{JobSample, RestoreSample};
use crate::models::{SuppliedAverages, DEFAULT_FRONTEND_GB};
use crate::reliability::{ReliabilityComponent, SeriesSystem, RECONCILED_MISSION_H};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Hybrid,
    CloudVault,
}

impl SystemKind {
    pub fn label(&self) -> &'static str {
        match self {
            SystemKind::Hybrid => "hybrid",
            SystemKind::CloudVault => "cloud vault",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pricing {
    ObjectStore(ObjectStoreRates),
    Vault(VaultRates),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityConfig {
    pub mission_h: f64,
    pub components: Vec<ReliabilityComponent>,
}

impl ReliabilityConfig {
    pub fn system(&self) -> Result<SeriesSystem> {
        SeriesSystem::new(self.components.clone())
    }
}

/// A fully validated scenario with defaults filled in.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub name: String,
    pub system: SystemKind,
    pub job_logs: Vec<PathBuf>,
    pub restore_samples: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_data_mb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frontend_gb: Option<f64>,
    #[serde(skip_serializing_if = "SuppliedAverages::is_empty")]
    pub supplied_averages: SuppliedAverages,
    pub pricing: Pricing,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transactions: Option<TransactionCounts>,
    pub bia: BiaTargets,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reliability: Option<ReliabilityConfig>,
    /// Human-readable notes on every default that was filled in.
    #[serde(skip)]
    pub applied_defaults: Vec<String>,
}

// `applied_defaults` describes how a scenario was parsed, not what it is.
impl PartialEq for Scenario {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name
            && self.system == o.system
            && self.job_logs == o.job_logs
            && self.restore_samples == o.restore_samples
            && self.test_data_mb == o.test_data_mb
            && self.frontend_gb == o.frontend_gb
            && self.supplied_averages == o.supplied_averages
            && self.pricing == o.pricing
            && self.transactions == o.transactions
            && self.bia == o.bia
            && self.reliability == o.reliability
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReliability {
    mission_h: Option<f64>,
    components: Vec<ReliabilityComponent>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    system: SystemKind,
    job_logs: Vec<PathBuf>,
    restore_samples: Vec<PathBuf>,
    test_data_mb: Option<f64>,
    frontend_gb: Option<f64>,
    supplied_averages: Option<SuppliedAverages>,
    pricing: Pricing,
    transactions: Option<TransactionCounts>,
    bia: BiaTargets,
    reliability: Option<RawReliability>,
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
            .unwrap_or(0);
        Error::parse(line, e.message().to_string())
    })?;
    let mut notes = Vec::new();

    match (raw.system, &raw.pricing) {
        (SystemKind::Hybrid, Pricing::ObjectStore(r)) => r.validate()?,
        (SystemKind::CloudVault, Pricing::Vault(r)) => r.validate()?,
        (kind, _) => {
            return Err(Error::config(format!(
                "pricing kind does not match a {} system",
                kind.label()
            )))
        }
    }
    let expected_logs = match raw.system {
        SystemKind::Hybrid => 1,
        SystemKind::CloudVault => 2,
    };
    if raw.job_logs.len() != expected_logs {
        return Err(Error::config(format!(
            "a {} scenario needs {expected_logs} job log(s), got {}",
            raw.system.label(),
            raw.job_logs.len()
        )));
    }
    if raw.restore_samples.is_empty() {
        return Err(Error::config(
            "at least one restore sample file is required",
        ));
    }
    if let Some(t) = raw.test_data_mb {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::config(format!("test_data_mb must be > 0, got {t}")));
        }
    }
    raw.bia.validate()?;

    let (frontend_gb, transactions) = match raw.system {
        SystemKind::Hybrid => {
            if raw.frontend_gb.is_some() {
                return Err(Error::config(
                    "frontend_gb only applies to cloud vault systems",
                ));
            }
            if raw.bia.cloud_tiering_threshold_days.is_none() {
                return Err(Error::config(
                    "hybrid targets need bia.cloud_tiering_threshold_days",
                ));
            }
            let tx = raw.transactions.unwrap_or_else(|| {
                let d = TransactionCounts::default();
                notes.push(format!(
                    "transactions defaulted to {} ingress/egress and {} listing operations per month",
                    d.ingress_egress_ops, d.listing_ops
                ));
                d
            });
            if tx.ingress_egress_ops < 0.0 || tx.listing_ops < 0.0 {
                return Err(Error::config("transaction counts must be >= 0"));
            }
            (None, Some(tx))
        }
        SystemKind::CloudVault => {
            if raw.transactions.is_some() {
                return Err(Error::config("transactions only apply to hybrid systems"));
            }
            if raw.bia.cloud_tiering_threshold_days.is_some() {
                return Err(Error::config(
                    "cloud_tiering_threshold_days only applies to hybrid targets",
                ));
            }
            let f = raw.frontend_gb.unwrap_or_else(|| {
                notes.push(format!("frontend_gb defaulted to {DEFAULT_FRONTEND_GB} GB"));
                DEFAULT_FRONTEND_GB
            });
            if !(f >= 0.0) {
                return Err(Error::config(format!("frontend_gb must be >= 0, got {f}")));
            }
            (Some(f), None)
        }
    };

    let supplied_averages = raw.supplied_averages.unwrap_or_default();
    supplied_averages.validate()?;

    let reliability = match raw.reliability {
        None => None,
        Some(r) => {
            let mission_h = r.mission_h.unwrap_or_else(|| {
                notes.push(format!(
                    "reliability.mission_h defaulted to {RECONCILED_MISSION_H} h"
                ));
                RECONCILED_MISSION_H
            });
            if !(mission_h >= 0.0) {
                return Err(Error::config(format!(
                    "mission_h must be >= 0, got {mission_h}"
                )));
            }
            let cfg = ReliabilityConfig {
                mission_h,
                components: r.components,
            };
            cfg.system()?;
            Some(cfg)
        }
    };

    Ok(Scenario {
        name: raw.name,
        system: raw.system,
        job_logs: raw.job_logs,
        restore_samples: raw.restore_samples,
        test_data_mb: raw.test_data_mb,
        frontend_gb,
        supplied_averages,
        pricing: raw.pricing,
        transactions,
        bia: raw.bia,
        reliability,
        applied_defaults: notes,
    })
}

/// Canonical TOML with every default written out.
pub fn render_scenario(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenario values are always representable in TOML")
}

/// A scenario together with the data it references.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub source: PathBuf,
    pub job_logs: Vec<Vec<JobSample>>,
    pub restore_samples: Vec<RestoreSample>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn with_file_context(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<LoadedScenario> {
    let path = path.as_ref();
    let scenario = parse_scenario(&read(path)?).map_err(|e| with_file_context(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &PathBuf| -> Result<PathBuf> {
        let full = if p.is_absolute() {
            p.clone()
        } else {
            base.join(p)
        };
        if !full.is_file() {
            return Err(Error::config(format!(
                "scenario '{}' references missing file {}",
                scenario.name,
                full.display()
            )));
        }
        Ok(full)
    };
    let job_logs = scenario
        .job_logs
        .iter()
        .map(|p| {
            let full = resolve(p)?;
            parse_job_log(&read(&full)?).map_err(|e| with_file_context(&full, e))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut restore_samples = Vec::new();
    for p in &scenario.restore_samples {
        let full = resolve(p)?;
        restore_samples
            .extend(parse_restore_samples(&read(&full)?).map_err(|e| with_file_context(&full, e))?);
    }
    Ok(LoadedScenario {
        scenario,
        source: path.to_path_buf(),
        job_logs,
        restore_samples,
    })
}
