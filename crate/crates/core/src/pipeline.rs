//! End-to-end evaluation of a loaded scenario: basic and extended model
//! runs, projections, costs, reliability and BIA compliance.

use std::thread;

use crate::bia::{evaluate, ComplianceReport, Observations};
use crate::cost::{cloud_vault_cost, hybrid_cloud_cost, CostBreakdown};
use crate::engine::{run, RunResult};
use crate::error::{Error, Result};
use crate::io::plot::PlotSeries;
use crate::io::scenario::{LoadedScenario, Pricing, SystemKind};
use crate::metrics::{
    mb_to_gb, project, recovery_throughput, restore_time_per_mb, summarize_throughput, Projection,
    Rate, RateBasis, RestoreSample, SourceTier, ThroughputSummary,
};
use crate::models::{
    build_cloud_basic, build_hybrid_basic, extend_with_test_data, names, CloudPricing,
    HybridPricing, CLOUD_BACKUP_PERIODS, HYBRID_BACKUP_PERIODS,
};
use crate::reliability::{SystemReliability, RECONCILED_MISSION_H, STATED_MISSION_H};

/// One named derived value read from a model run.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub label: &'static str,
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone)]
pub struct ScenarioResults {
    pub name: String,
    pub system: SystemKind,
    pub basic: RunResult,
    pub extended: Option<RunResult>,
    pub throughput: Vec<(String, ThroughputSummary)>,
    /// Final-period values of the basic model's derived converters and stocks.
    pub derived: Vec<Metric>,
    /// Rates used for projections, after supplied overrides.
    pub rates: Vec<RateBasis>,
    pub projection: Option<Projection>,
    pub basic_cost: CostBreakdown,
    pub test_cost: Option<CostBreakdown>,
    pub reliability: Option<SystemReliability>,
    pub compliance: ComplianceReport,
    pub notes: Vec<String>,
}

impl ScenarioResults {
    pub fn test_data_mb(&self) -> Option<f64> {
        self.projection.as_ref().map(|p| p.test_data_mb)
    }

    pub fn derived(&self, label: &str) -> Option<f64> {
        self.derived
            .iter()
            .find(|m| m.label == label)
            .map(|m| m.value)
    }

    /// Series for plotting, from the extended run when there is one.
    /// Series fed by the job logs stop at the end of the backup window
    /// unless `all_periods` is set.
    pub fn plot_series(&self, components: &[&str], all_periods: bool) -> Result<Vec<PlotSeries>> {
        let run = self.extended.as_ref().unwrap_or(&self.basic);
        let (window, logged) = backup_window(self.system);
        components
            .iter()
            .map(|&name| {
                let series = run.series(name)?;
                let last = (!all_periods && logged.contains(&name)).then_some(window);
                Ok(PlotSeries::from_series(name, series, last))
            })
            .collect()
    }
}

/// Length of the backup window and the components that follow the job logs.
pub fn backup_window(system: SystemKind) -> (usize, &'static [&'static str]) {
    match system {
        SystemKind::Hybrid => (
            HYBRID_BACKUP_PERIODS,
            &[
                names::DAILY_BACKUP,
                names::BACKUP_DURATION,
                names::DAILY_THROUGHPUT,
            ],
        ),
        SystemKind::CloudVault => (
            CLOUD_BACKUP_PERIODS,
            &[
                names::JOB1_DATA,
                names::JOB1_DURATION,
                names::JOB1_THROUGHPUT,
                names::JOB2_DATA,
                names::JOB2_DURATION,
                names::JOB2_THROUGHPUT,
                names::DAILY_TRANSFER,
            ],
        ),
    }
}

fn metric(run: &RunResult, label: &'static str, component: &str) -> Result<Metric> {
    let series = run.series(component)?;
    Ok(Metric {
        label,
        value: series.last(),
        unit: series.unit.clone(),
    })
}

/// Folds several samples from one tier into a single aggregate sample.
fn aggregate(samples: &[RestoreSample], tier: SourceTier) -> Result<RestoreSample> {
    let (data, time) = samples
        .iter()
        .filter(|s| s.source_tier == tier)
        .fold((0.0, 0.0), |(d, t), s| (d + s.data_mb, t + s.duration_s));
    RestoreSample::new(tier, data, time)
        .map_err(|_| Error::config(format!("no usable {tier} restore sample")))
}

fn supplied_or(notes: &mut Vec<String>, label: &str, supplied: Option<f64>, computed: f64) -> f64 {
    match supplied {
        Some(v) => {
            notes.push(format!(
                "{label}: using supplied average {v} (computed from samples: {computed:.6})"
            ));
            v
        }
        None => computed,
    }
}

fn peak(run: &RunResult, component: &str) -> Result<f64> {
    Ok(run
        .series(component)?
        .values
        .iter()
        .copied()
        .fold(0.0, f64::max))
}

pub fn evaluate_scenario(
    loaded: &LoadedScenario,
    test_data_override: Option<f64>,
) -> Result<ScenarioResults> {
    let sc = &loaded.scenario;
    let mut notes = sc.applied_defaults.clone();
    let test_data_mb = test_data_override.or(sc.test_data_mb);
    let supplied = sc.supplied_averages;

    let (basic, extended, throughput, derived, rates, basic_cost, test_cost, loss_component) =
        match (sc.system, &sc.pricing) {
            (SystemKind::Hybrid, Pricing::ObjectStore(rates)) => {
                let pricing = HybridPricing {
                    rates: *rates,
                    transactions: sc.transactions.unwrap_or_default(),
                };
                let log = &loaded.job_logs[0];
                let threshold = sc
                    .bia
                    .cloud_tiering_threshold_days
                    .ok_or_else(|| Error::config("hybrid scenario without tiering threshold"))?;
                let model =
                    build_hybrid_basic(log, &loaded.restore_samples, threshold as usize, &pricing)?;
                let basic = run(&model)?;
                let summary = summarize_throughput(log)?;
                let local =
                    restore_time_per_mb(&aggregate(&loaded.restore_samples, SourceTier::Local)?)?;
                let archive =
                    restore_time_per_mb(&aggregate(&loaded.restore_samples, SourceTier::Archive)?)?;
                let rates_used = vec![
                    RateBasis::backup(
                        "daily backup",
                        Rate::Throughput(supplied_or(
                            &mut notes,
                            "mean daily throughput",
                            supplied.mean_daily_throughput,
                            summary.mean_arithmetic,
                        )),
                    ),
                    RateBasis::restore(
                        "archive",
                        SourceTier::Archive,
                        Rate::SecondsPerMb(supplied_or(
                            &mut notes,
                            "archive restore time per MB",
                            supplied.restore_per_mb_archive,
                            archive,
                        )),
                    ),
                    RateBasis::restore(
                        "local",
                        SourceTier::Local,
                        Rate::SecondsPerMb(supplied_or(
                            &mut notes,
                            "local restore time per MB",
                            supplied.restore_per_mb_local,
                            local,
                        )),
                    ),
                ];
                let derived = vec![
                    metric(
                        &basic,
                        "mean daily throughput",
                        names::MEAN_DAILY_THROUGHPUT,
                    )?,
                    metric(
                        &basic,
                        "restore time per MB (local)",
                        names::RESTORE_PER_MB_LOCAL,
                    )?,
                    metric(
                        &basic,
                        "restore time per MB (archive)",
                        names::RESTORE_PER_MB_ARCHIVE,
                    )?,
                    metric(&basic, "monthly service cost", names::MONTHLY_COST)?,
                    metric(&basic, "local storage", names::LOCAL_STORAGE)?,
                    metric(&basic, "cloud tier", names::CLOUD_TIER)?,
                ];
                let tx = pricing.transactions;
                let basic_cost = hybrid_cloud_cost(
                    mb_to_gb(basic.final_value(names::CLOUD_TIER)?),
                    tx.ingress_egress_ops,
                    tx.listing_ops,
                    rates,
                )?;
                let (extended, test_cost) = match test_data_mb {
                    Some(t) => (
                        Some(run(&extend_with_test_data(&model, t, Some(&supplied))?)?),
                        Some(hybrid_cloud_cost(
                            mb_to_gb(t),
                            tx.ingress_egress_ops,
                            tx.listing_ops,
                            rates,
                        )?),
                    ),
                    None => (None, None),
                };
                (
                    basic,
                    extended,
                    vec![("daily backup".to_string(), summary)],
                    derived,
                    rates_used,
                    basic_cost,
                    test_cost,
                    names::DAILY_BACKUP,
                )
            }
            (SystemKind::CloudVault, Pricing::Vault(rates)) => {
                let pricing = CloudPricing {
                    rates: rates.clone(),
                    frontend_gb: sc.frontend_gb.unwrap_or(crate::models::DEFAULT_FRONTEND_GB),
                };
                let vault = aggregate(&loaded.restore_samples, SourceTier::Vault)?;
                let (job1, job2) = (&loaded.job_logs[0], &loaded.job_logs[1]);
                let model = build_cloud_basic(job1, job2, &vault, &pricing)?;
                let basic = run(&model)?;
                let s1 = summarize_throughput(job1)?;
                let s2 = summarize_throughput(job2)?;
                let rates_used = vec![
                    RateBasis::backup(
                        "job1",
                        Rate::Throughput(supplied_or(
                            &mut notes,
                            "job1 throughput",
                            supplied.job1_throughput,
                            s1.mean_arithmetic,
                        )),
                    ),
                    RateBasis::backup(
                        "job2",
                        Rate::Throughput(supplied_or(
                            &mut notes,
                            "job2 throughput",
                            supplied.job2_throughput,
                            s2.mean_arithmetic,
                        )),
                    ),
                    RateBasis::restore(
                        "vault",
                        SourceTier::Vault,
                        Rate::Throughput(supplied_or(
                            &mut notes,
                            "recovery throughput",
                            supplied.recovery_throughput,
                            recovery_throughput(&vault)?,
                        )),
                    ),
                ];
                let derived = vec![
                    metric(&basic, "mean job1 throughput", names::MEAN_JOB1_THROUGHPUT)?,
                    metric(&basic, "mean job2 throughput", names::MEAN_JOB2_THROUGHPUT)?,
                    metric(&basic, "recovery throughput", names::RECOVERY_THROUGHPUT)?,
                    metric(&basic, "monthly service cost", names::MONTHLY_COST)?,
                    metric(&basic, "recovery vault", names::RECOVERY_VAULT)?,
                ];
                let basic_cost = cloud_vault_cost(
                    pricing.frontend_gb,
                    mb_to_gb(basic.final_value(names::RECOVERY_VAULT)?),
                    rates,
                )?;
                let (extended, test_cost) = match test_data_mb {
                    Some(t) => (
                        Some(run(&extend_with_test_data(&model, t, Some(&supplied))?)?),
                        Some(cloud_vault_cost(mb_to_gb(t), mb_to_gb(t), rates)?),
                    ),
                    None => (None, None),
                };
                (
                    basic,
                    extended,
                    vec![("job1".to_string(), s1), ("job2".to_string(), s2)],
                    derived,
                    rates_used,
                    basic_cost,
                    test_cost,
                    names::DAILY_TRANSFER,
                )
            }
            _ => return Err(Error::config("pricing kind does not match system kind")),
        };

    let projection = test_data_mb.map(|t| project(t, &rates)).transpose()?;

    let reliability = match &sc.reliability {
        Some(cfg) => {
            let basis = if cfg.mission_h == RECONCILED_MISSION_H {
                " (reconciled basis)"
            } else if cfg.mission_h == STATED_MISSION_H {
                " (stated 15-day basis)"
            } else {
                ""
            };
            notes.push(format!(
                "reliability mission time {} h{basis}",
                cfg.mission_h
            ));
            Some(cfg.system()?.evaluate(cfg.mission_h)?)
        }
        None => None,
    };

    let observations = projection
        .as_ref()
        .map(Observations::from_projection)
        .unwrap_or_default()
        .with_achieved_rpo_days(sc.bia.backup_frequency_days)
        .with_data_loss_mb(peak(&basic, loss_component)?);
    let compliance = evaluate(sc.name.clone(), &observations, &sc.bia);

    Ok(ScenarioResults {
        name: sc.name.clone(),
        system: sc.system,
        basic,
        extended,
        throughput,
        derived,
        rates,
        projection,
        basic_cost,
        test_cost,
        reliability,
        compliance,
        notes,
    })
}

/// Evaluates scenarios concurrently; results keep the input order.
pub fn evaluate_all(
    scenarios: &[LoadedScenario],
    test_data_override: Option<f64>,
) -> Vec<Result<ScenarioResults>> {
    thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || evaluate_scenario(s, test_data_override)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario evaluation panicked"))
            .collect()
    })
}
