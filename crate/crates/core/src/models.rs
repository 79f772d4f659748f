//! The two concrete protection-system models and their test-data extensions.
//!
//! Hybrid: a backup appliance receives one job per day for 14 days; copies
//! older than the tiering threshold move to a cloud tier in the period after
//! the backup window. Cloud: two agent jobs per day upload directly into a
//! recovery vault for 7 days, with an eighth period showing the settled vault.
//!
//! Derived variables (mean throughputs, restore rates, monthly cost) are
//! computed inside the model as sample-and-hold or running-mean converters,
//! so their final-period values are the published derived figures.

use serde::{Deserialize, Serialize};

use crate::cost::{
    cloud_vault_cost, hybrid_cloud_cost, ObjectStoreRates, TransactionCounts, VaultRates,
};
use crate::engine::{ComponentKind, Model, ModelComponent, Ref};
use crate::error::{Error, Result};
use crate::metrics::{
    mb_to_gb, validate_job_log, JobSample, RestoreSample, SourceTier, SECONDS_PER_HOUR,
};

pub const HYBRID_BACKUP_PERIODS: usize = 14;
pub const CLOUD_BACKUP_PERIODS: usize = 7;

/// Component names used by the built-in models.
pub mod names {
    pub const DAILY_BACKUP: &str = "DailyBackup";
    pub const BACKUP_DURATION: &str = "BackupDuration";
    pub const DAILY_THROUGHPUT: &str = "DailyThroughput";
    pub const THROUGHPUT_SUM: &str = "DailyThroughputSum";
    pub const SAMPLE_COUNT: &str = "BackupSampleCount";
    pub const MEAN_DAILY_THROUGHPUT: &str = "MeanDailyThroughput";
    pub const TIERING_MOVE: &str = "TieringMove";
    pub const LOCAL_STORAGE: &str = "LocalStorage";
    pub const CLOUD_TIER: &str = "CloudTier";
    pub const RESTORE_DATA_LOCAL: &str = "RestoreDataLocal";
    pub const RESTORE_TIME_LOCAL: &str = "RestoreTimeLocal";
    pub const RESTORE_DATA_ARCHIVE: &str = "RestoreDataArchive";
    pub const RESTORE_TIME_ARCHIVE: &str = "RestoreTimeArchive";
    pub const RESTORE_PER_MB_LOCAL: &str = "RestoreTimePerMbLocal";
    pub const RESTORE_PER_MB_ARCHIVE: &str = "RestoreTimePerMbArchive";
    pub const MONTHLY_COST: &str = "MonthlyServiceCost";

    pub const JOB1_DATA: &str = "Job1Data";
    pub const JOB1_DURATION: &str = "Job1Duration";
    pub const JOB1_THROUGHPUT: &str = "Job1Throughput";
    pub const MEAN_JOB1_THROUGHPUT: &str = "MeanJob1Throughput";
    pub const JOB2_DATA: &str = "Job2Data";
    pub const JOB2_DURATION: &str = "Job2Duration";
    pub const JOB2_THROUGHPUT: &str = "Job2Throughput";
    pub const MEAN_JOB2_THROUGHPUT: &str = "MeanJob2Throughput";
    pub const DAILY_TRANSFER: &str = "DailyTransfer";
    pub const RECOVERY_VAULT: &str = "RecoveryVault";
    pub const RECOVERY_DATA: &str = "RecoveryData";
    pub const RECOVERY_TIME: &str = "RecoveryTime";
    pub const RECOVERY_THROUGHPUT: &str = "RecoveryThroughput";

    pub const TEST_DATA: &str = "TestData";
    pub const BACKUP_TIME_TEST: &str = "BackupTimeTestData";
    pub const RESTORE_TIME_ARCHIVE_TEST: &str = "RestoreTimeArchiveTestData";
    pub const RESTORE_TIME_LOCAL_TEST: &str = "RestoreTimeLocalTestData";
    pub const BACKUP_TIME_JOB1_TEST: &str = "BackupTimeJob1TestData";
    pub const BACKUP_TIME_JOB2_TEST: &str = "BackupTimeJob2TestData";
    pub const RECOVERY_TIME_TEST: &str = "RecoveryTimeTestData";
    pub const TOTAL_COST_TEST: &str = "TotalServiceCostTestData";
}

use names::*;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HybridPricing {
    pub rates: ObjectStoreRates,
    pub transactions: TransactionCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudPricing {
    pub rates: VaultRates,
    /// Size of the protected instance; drives the per-instance fee.
    pub frontend_gb: f64,
}

/// Default frontend size: the top of the cheapest instance tier.
pub const DEFAULT_FRONTEND_GB: f64 = 50.0;

impl Default for CloudPricing {
    fn default() -> Self {
        CloudPricing {
            rates: VaultRates::default(),
            frontend_gb: DEFAULT_FRONTEND_GB,
        }
    }
}

/// What a model was built as; extension needs to know which derived
/// converters exist and how the system is priced.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Family {
    #[default]
    Custom,
    Hybrid {
        pricing: HybridPricing,
        extended: bool,
    },
    Cloud {
        pricing: CloudPricing,
        extended: bool,
    },
}

/// Externally supplied averages that replace the model's own when extending.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuppliedAverages {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_daily_throughput: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restore_per_mb_local: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restore_per_mb_archive: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job1_throughput: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job2_throughput: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery_throughput: Option<f64>,
}

impl SuppliedAverages {
    pub fn is_empty(&self) -> bool {
        *self == SuppliedAverages::default()
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("mean_daily_throughput", self.mean_daily_throughput),
            ("restore_per_mb_local", self.restore_per_mb_local),
            ("restore_per_mb_archive", self.restore_per_mb_archive),
            ("job1_throughput", self.job1_throughput),
            ("job2_throughput", self.job2_throughput),
            ("recovery_throughput", self.recovery_throughput),
        ];
        for (name, v) in all {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::config(format!(
                        "supplied average '{name}' must be a finite value > 0, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Places job-log values on a per-period series by day index.
fn per_period(log: &[JobSample], periods: usize, pick: impl Fn(&JobSample) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; periods];
    for s in log {
        out[s.day as usize - 1] = pick(s);
    }
    out
}

fn check_log(log: &[JobSample], periods: usize, what: &str) -> Result<()> {
    if log.len() != periods {
        return Err(Error::config(format!(
            "{what} needs {periods} samples, got {}",
            log.len()
        )));
    }
    validate_job_log(log).map_err(|e| Error::config(format!("{what}: {e}")))?;
    if let Some(s) = log.iter().find(|s| s.day as usize > periods) {
        return Err(Error::config(format!(
            "{what}: day {} is outside the {periods}-day backup window",
            s.day
        )));
    }
    Ok(())
}

/// Per-period throughput plus a running arithmetic mean over the periods
/// that carried a job.
fn add_throughput_chain(
    m: &mut Model,
    data: &str,
    duration: &str,
    rate: &str,
    sum: &str,
    count: &str,
    mean: &str,
) -> Result<()> {
    m.add(ModelComponent::formula(
        rate,
        ComponentKind::Converter,
        "MB/s",
        "data / duration",
        vec![Ref::current(data), Ref::current(duration)],
        |a| ratio_or_zero(a[0], a[1]),
    ))?
    .add(ModelComponent::formula(
        sum,
        ComponentKind::Converter,
        "MB/s",
        "running sum of rate",
        vec![Ref::lagged(sum, 1), Ref::current(rate)],
        |a| a[0] + a[1],
    ))?
    .add(ModelComponent::formula(
        count,
        ComponentKind::Converter,
        "jobs",
        "running count of jobs",
        vec![Ref::lagged(count, 1), Ref::current(duration)],
        |a| a[0] + if a[1] > 0.0 { 1.0 } else { 0.0 },
    ))?
    .add(ModelComponent::formula(
        mean,
        ComponentKind::Converter,
        "MB/s",
        "sum / count",
        vec![Ref::current(sum), Ref::current(count)],
        |a| ratio_or_zero(a[0], a[1]),
    ))?;
    Ok(())
}

/// A ratio sampled when its denominator is present and held afterwards.
fn add_held_ratio(m: &mut Model, name: &str, unit: &str, num: &str, den: &str) -> Result<()> {
    m.add(ModelComponent::formula(
        name,
        ComponentKind::Converter,
        unit,
        "num / den, held",
        vec![Ref::current(num), Ref::current(den), Ref::lagged(name, 1)],
        |a| if a[1] > 0.0 { a[0] / a[1] } else { a[2] },
    ))?;
    Ok(())
}

fn restore_totals(samples: &[RestoreSample], tier: SourceTier) -> Option<(f64, f64)> {
    let matching: Vec<_> = samples.iter().filter(|s| s.source_tier == tier).collect();
    if matching.is_empty() {
        return None;
    }
    Some((
        matching.iter().map(|s| s.data_mb).sum(),
        matching.iter().map(|s| s.duration_s).sum(),
    ))
}

fn single_period(value: f64, period: usize, horizon: usize) -> Vec<f64> {
    let mut v = vec![0.0; horizon];
    v[period - 1] = value;
    v
}

pub fn build_hybrid_basic(
    job_log: &[JobSample],
    restore_samples: &[RestoreSample],
    tiering_threshold_days: usize,
    pricing: &HybridPricing,
) -> Result<Model> {
    check_log(job_log, HYBRID_BACKUP_PERIODS, "hybrid job log")?;
    if tiering_threshold_days < 1 {
        return Err(Error::config("tiering threshold must be at least one day"));
    }
    pricing.rates.validate()?;
    if pricing.transactions.ingress_egress_ops < 0.0 || pricing.transactions.listing_ops < 0.0 {
        return Err(Error::config("transaction counts must be >= 0"));
    }
    if let Some(s) = restore_samples
        .iter()
        .find(|s| s.source_tier == SourceTier::Vault)
    {
        return Err(Error::config(format!(
            "hybrid restore samples cannot come from the {} tier",
            s.source_tier
        )));
    }
    let (local_mb, local_s) = restore_totals(restore_samples, SourceTier::Local)
        .ok_or_else(|| Error::config("hybrid model needs a local restore sample"))?;
    let (archive_mb, archive_s) = restore_totals(restore_samples, SourceTier::Archive)
        .ok_or_else(|| Error::config("hybrid model needs an archive restore sample"))?;

    let horizon = HYBRID_BACKUP_PERIODS + 1;
    let mut m = Model::new("hybrid-basic", horizon)?;
    m.add(ModelComponent::input(
        DAILY_BACKUP,
        ComponentKind::Flow,
        "MB",
    ))?
    .add(ModelComponent::input(
        BACKUP_DURATION,
        ComponentKind::Converter,
        "s",
    ))?;
    add_throughput_chain(
        &mut m,
        DAILY_BACKUP,
        BACKUP_DURATION,
        DAILY_THROUGHPUT,
        THROUGHPUT_SUM,
        SAMPLE_COUNT,
        MEAN_DAILY_THROUGHPUT,
    )?;
    // A copy written on day d expires from local storage on day d + threshold.
    m.add(ModelComponent::formula(
        TIERING_MOVE,
        ComponentKind::Flow,
        "MB",
        format!("daily backup delayed {tiering_threshold_days}"),
        vec![Ref::lagged(DAILY_BACKUP, tiering_threshold_days)],
        |a| a[0],
    ))?
    .add(ModelComponent::stock(
        LOCAL_STORAGE,
        "MB",
        0.0,
        &[DAILY_BACKUP],
        &[TIERING_MOVE],
    ))?
    .add(ModelComponent::stock(
        CLOUD_TIER,
        "MB",
        0.0,
        &[TIERING_MOVE],
        &[],
    ))?;

    m.add(ModelComponent::input(
        RESTORE_DATA_LOCAL,
        ComponentKind::Converter,
        "MB",
    ))?
    .add(ModelComponent::input(
        RESTORE_TIME_LOCAL,
        ComponentKind::Converter,
        "s",
    ))?
    .add(ModelComponent::input(
        RESTORE_DATA_ARCHIVE,
        ComponentKind::Converter,
        "MB",
    ))?
    .add(ModelComponent::input(
        RESTORE_TIME_ARCHIVE,
        ComponentKind::Converter,
        "s",
    ))?;
    add_held_ratio(
        &mut m,
        RESTORE_PER_MB_LOCAL,
        "s/MB",
        RESTORE_TIME_LOCAL,
        RESTORE_DATA_LOCAL,
    )?;
    add_held_ratio(
        &mut m,
        RESTORE_PER_MB_ARCHIVE,
        "s/MB",
        RESTORE_TIME_ARCHIVE,
        RESTORE_DATA_ARCHIVE,
    )?;

    let p = *pricing;
    m.add(ModelComponent::formula(
        MONTHLY_COST,
        ComponentKind::Converter,
        "USD/month",
        "object-store cost of the cloud tier",
        vec![Ref::current(CLOUD_TIER), Ref::current(TIERING_MOVE)],
        move |a| {
            hybrid_cloud_cost(
                mb_to_gb(a[0] + a[1]),
                p.transactions.ingress_egress_ops,
                p.transactions.listing_ops,
                &p.rates,
            )
            .map(|c| c.total)
            .unwrap_or(f64::NAN)
        },
    ))?;

    m.set_input(DAILY_BACKUP, per_period(job_log, horizon, |s| s.data_mb))
        .set_input(
            BACKUP_DURATION,
            per_period(job_log, horizon, |s| s.duration_s),
        )
        // local restore sampled in the last backup period, archive one period later
        .set_input(
            RESTORE_DATA_LOCAL,
            single_period(local_mb, horizon - 1, horizon),
        )
        .set_input(
            RESTORE_TIME_LOCAL,
            single_period(local_s, horizon - 1, horizon),
        )
        .set_input(
            RESTORE_DATA_ARCHIVE,
            single_period(archive_mb, horizon, horizon),
        )
        .set_input(
            RESTORE_TIME_ARCHIVE,
            single_period(archive_s, horizon, horizon),
        );
    m.family = Family::Hybrid {
        pricing: *pricing,
        extended: false,
    };
    Ok(m)
}

pub fn build_cloud_basic(
    job1_log: &[JobSample],
    job2_log: &[JobSample],
    restore_sample: &RestoreSample,
    pricing: &CloudPricing,
) -> Result<Model> {
    check_log(job1_log, CLOUD_BACKUP_PERIODS, "job1 log")?;
    check_log(job2_log, CLOUD_BACKUP_PERIODS, "job2 log")?;
    if restore_sample.source_tier != SourceTier::Vault {
        return Err(Error::config(format!(
            "cloud recovery sample must come from the vault, not the {} tier",
            restore_sample.source_tier
        )));
    }
    pricing.rates.validate()?;
    if !(pricing.frontend_gb >= 0.0) {
        return Err(Error::config(format!(
            "frontend size must be >= 0, got {} GB",
            pricing.frontend_gb
        )));
    }

    let horizon = CLOUD_BACKUP_PERIODS + 1;
    let mut m = Model::new("cloud-basic", horizon)?;
    m.add(ModelComponent::input(
        JOB1_DATA,
        ComponentKind::Converter,
        "MB",
    ))?
    .add(ModelComponent::input(
        JOB1_DURATION,
        ComponentKind::Converter,
        "s",
    ))?
    .add(ModelComponent::input(
        JOB2_DATA,
        ComponentKind::Converter,
        "MB",
    ))?
    .add(ModelComponent::input(
        JOB2_DURATION,
        ComponentKind::Converter,
        "s",
    ))?;
    add_throughput_chain(
        &mut m,
        JOB1_DATA,
        JOB1_DURATION,
        JOB1_THROUGHPUT,
        "Job1ThroughputSum",
        "Job1SampleCount",
        MEAN_JOB1_THROUGHPUT,
    )?;
    add_throughput_chain(
        &mut m,
        JOB2_DATA,
        JOB2_DURATION,
        JOB2_THROUGHPUT,
        "Job2ThroughputSum",
        "Job2SampleCount",
        MEAN_JOB2_THROUGHPUT,
    )?;
    m.add(ModelComponent::formula(
        DAILY_TRANSFER,
        ComponentKind::Flow,
        "MB",
        "job1 + job2",
        vec![Ref::current(JOB1_DATA), Ref::current(JOB2_DATA)],
        |a| a[0] + a[1],
    ))?
    .add(ModelComponent::stock(
        RECOVERY_VAULT,
        "MB",
        0.0,
        &[DAILY_TRANSFER],
        &[],
    ))?
    .add(ModelComponent::input(
        RECOVERY_DATA,
        ComponentKind::Converter,
        "MB",
    ))?
    .add(ModelComponent::input(
        RECOVERY_TIME,
        ComponentKind::Converter,
        "s",
    ))?;
    add_held_ratio(
        &mut m,
        RECOVERY_THROUGHPUT,
        "MB/s",
        RECOVERY_DATA,
        RECOVERY_TIME,
    )?;

    let rates = pricing.rates.clone();
    let frontend = pricing.frontend_gb;
    m.add(ModelComponent::formula(
        MONTHLY_COST,
        ComponentKind::Converter,
        "USD/month",
        "vault cost of stored data",
        vec![Ref::current(RECOVERY_VAULT), Ref::current(DAILY_TRANSFER)],
        move |a| {
            cloud_vault_cost(frontend, mb_to_gb(a[0] + a[1]), &rates)
                .map(|c| c.total)
                .unwrap_or(f64::NAN)
        },
    ))?;

    // Logs cover the backup window only; the post-cycle period reads zero.
    let window = CLOUD_BACKUP_PERIODS;
    m.set_input(JOB1_DATA, per_period(job1_log, window, |s| s.data_mb))
        .set_input(
            JOB1_DURATION,
            per_period(job1_log, window, |s| s.duration_s),
        )
        .set_input(JOB2_DATA, per_period(job2_log, window, |s| s.data_mb))
        .set_input(
            JOB2_DURATION,
            per_period(job2_log, window, |s| s.duration_s),
        )
        .set_input(
            RECOVERY_DATA,
            single_period(restore_sample.data_mb, horizon, horizon),
        )
        .set_input(
            RECOVERY_TIME,
            single_period(restore_sample.duration_s, horizon, horizon),
        );
    m.family = Family::Cloud {
        pricing: pricing.clone(),
        extended: false,
    };
    Ok(m)
}

/// Uses the supplied value as a constant converter when present, otherwise
/// the model's own derived converter. Returns the name to depend on.
fn rate_source(m: &mut Model, derived: &str, supplied: Option<f64>, unit: &str) -> Result<String> {
    match supplied {
        Some(v) => {
            let name = format!("Supplied{derived}");
            m.add(ModelComponent::constant(name.clone(), unit, v))?;
            Ok(name)
        }
        None => Ok(derived.to_string()),
    }
}

fn time_from_throughput(m: &mut Model, name: &str, rate: &str) -> Result<()> {
    m.add(ModelComponent::formula(
        name,
        ComponentKind::Converter,
        "h",
        "test data / throughput",
        vec![Ref::current(TEST_DATA), Ref::current(rate)],
        |a| ratio_or_zero(a[0], a[1]) / SECONDS_PER_HOUR,
    ))?;
    Ok(())
}

fn time_from_per_mb(m: &mut Model, name: &str, rate: &str) -> Result<()> {
    m.add(ModelComponent::formula(
        name,
        ComponentKind::Converter,
        "h",
        "test data * time per MB",
        vec![Ref::current(TEST_DATA), Ref::current(rate)],
        |a| a[0] * a[1] / SECONDS_PER_HOUR,
    ))?;
    Ok(())
}

/// Adds the test-data components to a basic model. Existing components are
/// untouched, so every basic series is unchanged in the extended run. Time
/// converters read zero until the rate they depend on has been observed.
pub fn extend_with_test_data(
    model: &Model,
    test_data_mb: f64,
    supplied: Option<&SuppliedAverages>,
) -> Result<Model> {
    if !(test_data_mb > 0.0) || !test_data_mb.is_finite() {
        return Err(Error::config(format!(
            "test data must be a finite value > 0, got {test_data_mb} MB"
        )));
    }
    let supplied = supplied.copied().unwrap_or_default();
    supplied.validate()?;
    let mut m = model.clone();
    match model.family.clone() {
        Family::Custom => Err(Error::config(
            "only the built-in hybrid and cloud models can be extended",
        )),
        Family::Hybrid { extended: true, .. } | Family::Cloud { extended: true, .. } => {
            Err(Error::config("model is already extended"))
        }
        Family::Hybrid { pricing, .. } => {
            m.add(ModelComponent::constant(TEST_DATA, "MB", test_data_mb))?;
            let mean = rate_source(
                &mut m,
                MEAN_DAILY_THROUGHPUT,
                supplied.mean_daily_throughput,
                "MB/s",
            )?;
            let archive = rate_source(
                &mut m,
                RESTORE_PER_MB_ARCHIVE,
                supplied.restore_per_mb_archive,
                "s/MB",
            )?;
            let local = rate_source(
                &mut m,
                RESTORE_PER_MB_LOCAL,
                supplied.restore_per_mb_local,
                "s/MB",
            )?;
            time_from_throughput(&mut m, BACKUP_TIME_TEST, &mean)?;
            time_from_per_mb(&mut m, RESTORE_TIME_ARCHIVE_TEST, &archive)?;
            time_from_per_mb(&mut m, RESTORE_TIME_LOCAL_TEST, &local)?;
            m.add(ModelComponent::formula(
                TOTAL_COST_TEST,
                ComponentKind::Converter,
                "USD/month",
                "object-store cost of test data",
                vec![Ref::current(TEST_DATA)],
                move |a| {
                    hybrid_cloud_cost(
                        mb_to_gb(a[0]),
                        pricing.transactions.ingress_egress_ops,
                        pricing.transactions.listing_ops,
                        &pricing.rates,
                    )
                    .map(|c| c.total)
                    .unwrap_or(f64::NAN)
                },
            ))?;
            m.set_id("hybrid-extended");
            m.family = Family::Hybrid {
                pricing,
                extended: true,
            };
            Ok(m)
        }
        Family::Cloud { pricing, .. } => {
            m.add(ModelComponent::constant(TEST_DATA, "MB", test_data_mb))?;
            let job1 = rate_source(
                &mut m,
                MEAN_JOB1_THROUGHPUT,
                supplied.job1_throughput,
                "MB/s",
            )?;
            let job2 = rate_source(
                &mut m,
                MEAN_JOB2_THROUGHPUT,
                supplied.job2_throughput,
                "MB/s",
            )?;
            let recovery = rate_source(
                &mut m,
                RECOVERY_THROUGHPUT,
                supplied.recovery_throughput,
                "MB/s",
            )?;
            time_from_throughput(&mut m, BACKUP_TIME_JOB1_TEST, &job1)?;
            time_from_throughput(&mut m, BACKUP_TIME_JOB2_TEST, &job2)?;
            time_from_throughput(&mut m, RECOVERY_TIME_TEST, &recovery)?;
            let rates = pricing.rates.clone();
            m.add(ModelComponent::formula(
                TOTAL_COST_TEST,
                ComponentKind::Converter,
                "USD/month",
                "vault cost of test data",
                vec![Ref::current(TEST_DATA)],
                move |a| {
                    let gb = mb_to_gb(a[0]);
                    cloud_vault_cost(gb, gb, &rates)
                        .map(|c| c.total)
                        .unwrap_or(f64::NAN)
                },
            ))?;
            m.set_id("cloud-extended");
            m.family = Family::Cloud {
                pricing,
                extended: true,
            };
            Ok(m)
        }
    }
}
