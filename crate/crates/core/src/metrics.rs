//! Measured job samples and the rate calculus built on them.
//!
//! All durations are seconds and all data amounts are decimal megabytes.
//! Backup logs recorded in minutes are converted at ingestion, so nothing
//! below this point ever sees a minute value.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const SECONDS_PER_MINUTE: f64 = 60.0;
/// Decimal gigabyte. Cloud pricing is quoted per GB = 1000 MB.
pub const MB_PER_GB: f64 = 1000.0;

pub fn mb_to_gb(mb: f64) -> f64 {
    mb / MB_PER_GB
}

/// One measured backup job.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JobSample {
    /// 1-based period index.
    pub day: u32,
    pub data_mb: f64,
    pub duration_s: f64,
}

impl JobSample {
    pub fn new(day: u32, data_mb: f64, duration_s: f64) -> Result<Self> {
        if day < 1 {
            return Err(Error::domain(format!("day index must be >= 1, got {day}")));
        }
        if !(data_mb >= 0.0) || !data_mb.is_finite() {
            return Err(Error::domain(format!(
                "data amount must be a finite value >= 0, got {data_mb}"
            )));
        }
        if !(duration_s > 0.0) || !duration_s.is_finite() {
            return Err(Error::domain(format!(
                "duration must be a finite value > 0, got {duration_s}"
            )));
        }
        Ok(JobSample {
            day,
            data_mb,
            duration_s,
        })
    }

    pub fn throughput(&self) -> Result<f64> {
        throughput(self.data_mb, self.duration_s)
    }
}

/// Checks the log-level invariant: day indices strictly increasing.
pub fn validate_job_log(samples: &[JobSample]) -> Result<()> {
    for pair in samples.windows(2) {
        if pair[1].day <= pair[0].day {
            return Err(Error::domain(format!(
                "day indices must be strictly increasing ({} follows {})",
                pair[1].day, pair[0].day
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTier {
    /// Appliance-local storage.
    Local,
    /// Cloud tier behind the appliance.
    Archive,
    /// Cloud recovery vault.
    Vault,
}

impl SourceTier {
    pub fn as_str(&self) -> &'static str {
        match self {
            SourceTier::Local => "local",
            SourceTier::Archive => "archive",
            SourceTier::Vault => "vault",
        }
    }
}

impl fmt::Display for SourceTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SourceTier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "local" => Ok(SourceTier::Local),
            "archive" => Ok(SourceTier::Archive),
            "vault" => Ok(SourceTier::Vault),
            other => Err(Error::domain(format!("unknown source tier '{other}'"))),
        }
    }
}

/// One measured restore of a recovery point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestoreSample {
    pub source_tier: SourceTier,
    pub data_mb: f64,
    pub duration_s: f64,
}

impl RestoreSample {
    pub fn new(source_tier: SourceTier, data_mb: f64, duration_s: f64) -> Result<Self> {
        if !(data_mb > 0.0) || !data_mb.is_finite() {
            return Err(Error::domain(format!(
                "restored data must be a finite value > 0, got {data_mb}"
            )));
        }
        if !(duration_s > 0.0) || !duration_s.is_finite() {
            return Err(Error::domain(format!(
                "restore duration must be a finite value > 0, got {duration_s}"
            )));
        }
        Ok(RestoreSample {
            source_tier,
            data_mb,
            duration_s,
        })
    }
}

/// Data rate in MB/s.
pub fn throughput(data_mb: f64, duration_s: f64) -> Result<f64> {
    if !(duration_s > 0.0) {
        return Err(Error::domain(format!(
            "throughput needs a positive duration, got {duration_s} s"
        )));
    }
    Ok(data_mb / duration_s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputSummary {
    pub per_sample: Vec<f64>,
    /// Mean of the per-sample rates.
    pub mean_arithmetic: f64,
    /// Total data over total time.
    pub mean_aggregate: f64,
}

impl ThroughputSummary {
    pub fn min(&self) -> f64 {
        self.per_sample
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.per_sample
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn summarize_throughput(samples: &[JobSample]) -> Result<ThroughputSummary> {
    if samples.is_empty() {
        return Err(Error::domain("cannot summarize an empty job log"));
    }
    let per_sample = samples
        .iter()
        .map(JobSample::throughput)
        .collect::<Result<Vec<_>>>()?;
    let mean_arithmetic = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
    let total_data: f64 = samples.iter().map(|s| s.data_mb).sum();
    let total_time: f64 = samples.iter().map(|s| s.duration_s).sum();
    let mean_aggregate = total_data / total_time;
    Ok(ThroughputSummary {
        per_sample,
        mean_arithmetic,
        mean_aggregate,
    })
}

/// Seconds needed per restored megabyte.
pub fn restore_time_per_mb(sample: &RestoreSample) -> Result<f64> {
    if !(sample.data_mb > 0.0) {
        return Err(Error::domain(format!(
            "restore time per MB needs restored data > 0, got {} MB",
            sample.data_mb
        )));
    }
    Ok(sample.duration_s / sample.data_mb)
}

/// Restored megabytes per second.
pub fn recovery_throughput(sample: &RestoreSample) -> Result<f64> {
    throughput(sample.data_mb, sample.duration_s)
}

/// A rate used to turn a data volume into a time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Rate {
    /// MB/s; time = data / rate.
    Throughput(f64),
    /// s/MB; time = data * rate.
    SecondsPerMb(f64),
}

impl Rate {
    pub fn value(&self) -> f64 {
        match *self {
            Rate::Throughput(v) | Rate::SecondsPerMb(v) => v,
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Rate::Throughput(_) => "MB/s",
            Rate::SecondsPerMb(_) => "s/MB",
        }
    }

    /// Seconds to move `data_mb` at this rate.
    pub fn seconds_for(&self, data_mb: f64) -> f64 {
        match *self {
            Rate::Throughput(r) => data_mb / r,
            Rate::SecondsPerMb(r) => data_mb * r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operation {
    Backup,
    Restore(SourceTier),
}

/// A named rate together with the operation it times.
#[derive(Debug, Clone, PartialEq)]
pub struct RateBasis {
    pub label: String,
    pub operation: Operation,
    pub rate: Rate,
}

impl RateBasis {
    pub fn backup(label: impl Into<String>, rate: Rate) -> Self {
        RateBasis {
            label: label.into(),
            operation: Operation::Backup,
            rate,
        }
    }

    pub fn restore(label: impl Into<String>, tier: SourceTier, rate: Rate) -> Self {
        RateBasis {
            label: label.into(),
            operation: Operation::Restore(tier),
            rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedTime {
    pub basis: RateBasis,
    pub seconds: f64,
}

impl ProjectedTime {
    pub fn hours(&self) -> f64 {
        self.seconds / SECONDS_PER_HOUR
    }
}

/// Backup and restore times for a hypothetical data volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub test_data_mb: f64,
    pub times: Vec<ProjectedTime>,
}

impl Projection {
    /// A projection with no rates, i.e. nothing measured.
    pub fn empty(test_data_mb: f64) -> Self {
        Projection {
            test_data_mb,
            times: Vec::new(),
        }
    }

    pub fn backups(&self) -> impl Iterator<Item = &ProjectedTime> {
        self.times
            .iter()
            .filter(|t| t.basis.operation == Operation::Backup)
    }

    pub fn restores(&self) -> impl Iterator<Item = &ProjectedTime> {
        self.times
            .iter()
            .filter(|t| matches!(t.basis.operation, Operation::Restore(_)))
    }

    pub fn get(&self, label: &str) -> Option<&ProjectedTime> {
        self.times.iter().find(|t| t.basis.label == label)
    }
}

pub fn project(test_data_mb: f64, rates: &[RateBasis]) -> Result<Projection> {
    if !(test_data_mb > 0.0) || !test_data_mb.is_finite() {
        return Err(Error::domain(format!(
            "test data must be a finite value > 0, got {test_data_mb} MB"
        )));
    }
    let times = rates
        .iter()
        .map(|basis| {
            let r = basis.rate.value();
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::domain(format!(
                    "rate '{}' must be a finite value > 0, got {r} {}",
                    basis.label,
                    basis.rate.unit()
                )));
            }
            Ok(ProjectedTime {
                basis: basis.clone(),
                seconds: basis.rate.seconds_for(test_data_mb),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Projection {
        test_data_mb,
        times,
    })
}
