//! Business Impact Analysis targets and compliance checks.
//!
//! Ties are resolved in favour of compliance: a measured value equal to its
//! target passes, matching the inclusive "at most" targets of a BIA table.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Operation, Projection};

pub const HOURS_PER_DAY: f64 = 24.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiaTargets {
    pub agent: String,
    pub backup_frequency_days: f64,
    pub backup_retention_days: u32,
    /// Stored verbatim (e.g. "7+7+60"); not interpreted.
    pub recovery_points_scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud_tiering_threshold_days: Option<u32>,
    pub rpo_target_days: f64,
    pub rto_target_hours: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wrt_hours: Option<f64>,
    /// Maximum tolerable data loss.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_data_loss_mb: Option<f64>,
}

impl BiaTargets {
    pub fn validate(&self) -> Result<()> {
        let positive = |what: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{what} must be > 0, got {v}")))
            }
        };
        positive("backup_frequency_days", self.backup_frequency_days)?;
        positive("backup_retention_days", self.backup_retention_days as f64)?;
        positive("rpo_target_days", self.rpo_target_days)?;
        positive("rto_target_hours", self.rto_target_hours)?;
        if let Some(t) = self.cloud_tiering_threshold_days {
            positive("cloud_tiering_threshold_days", t as f64)?;
        }
        if let Some(w) = self.wrt_hours {
            positive("wrt_hours", w)?;
        }
        if let Some(d) = self.max_data_loss_mb {
            positive("max_data_loss_mb", d)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Unit {
    Hours,
    Days,
    Megabytes,
}

impl Unit {
    pub fn symbol(&self) -> &'static str {
        match self {
            Unit::Hours => "h",
            Unit::Days => "d",
            Unit::Megabytes => "MB",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn hours(value: f64) -> Self {
        Quantity {
            value,
            unit: Unit::Hours,
        }
    }

    pub fn days(value: f64) -> Self {
        Quantity {
            value,
            unit: Unit::Days,
        }
    }

    pub fn megabytes(value: f64) -> Self {
        Quantity {
            value,
            unit: Unit::Megabytes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    NotEvaluable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotEvaluable => "N/A",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplianceVerdict {
    pub metric: String,
    pub measured: Option<Quantity>,
    pub target: Option<Quantity>,
    pub relation: Relation,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplianceReport {
    pub scenario: String,
    pub verdicts: Vec<ComplianceVerdict>,
    pub mtd_hours: Option<f64>,
}

impl ComplianceReport {
    pub fn count(&self, status: Status) -> usize {
        self.verdicts.iter().filter(|v| v.status == status).count()
    }

    pub fn has_failures(&self) -> bool {
        self.count(Status::Fail) > 0
    }

    pub fn verdict(&self, metric: &str) -> Option<&ComplianceVerdict> {
        self.verdicts.iter().find(|v| v.metric == metric)
    }
}

/// Maximum tolerable downtime: technical recovery plus work recovery.
pub fn mtd(rto_h: f64, wrt_h: f64) -> Result<f64> {
    if !(rto_h >= 0.0) || !(wrt_h >= 0.0) {
        return Err(Error::domain(format!(
            "RTO and WRT must be >= 0, got {rto_h} h and {wrt_h} h"
        )));
    }
    Ok(rto_h + wrt_h)
}

pub fn check(
    metric: impl Into<String>,
    measured: Quantity,
    target: Quantity,
    relation: Relation,
) -> Result<ComplianceVerdict> {
    let metric = metric.into();
    if measured.unit != target.unit {
        return Err(Error::domain(format!(
            "'{metric}': measured in {} but target in {}",
            measured.unit.symbol(),
            target.unit.symbol()
        )));
    }
    let holds = match relation {
        Relation::AtMost => measured.value <= target.value,
        Relation::AtLeast => measured.value >= target.value,
    };
    Ok(ComplianceVerdict {
        metric,
        measured: Some(measured),
        target: Some(target),
        relation,
        status: if holds { Status::Pass } else { Status::Fail },
    })
}

fn verdict(
    metric: String,
    measured: Option<Quantity>,
    target: Option<Quantity>,
    relation: Relation,
) -> ComplianceVerdict {
    match (measured, target) {
        (Some(m), Some(t)) => check(metric.clone(), m, t, relation).unwrap_or(ComplianceVerdict {
            metric,
            measured: Some(m),
            target: Some(t),
            relation,
            status: Status::NotEvaluable,
        }),
        _ => ComplianceVerdict {
            metric,
            measured,
            target,
            relation,
            status: Status::NotEvaluable,
        },
    }
}

/// Measured or projected quantities a scenario is judged on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Observations {
    /// `(label, hours)` per restore path.
    pub restore_times_h: Vec<(String, f64)>,
    /// `(label, hours)` per backup job.
    pub backup_times_h: Vec<(String, f64)>,
    /// Worst-case age of the newest restorable copy.
    pub achieved_rpo_days: Option<f64>,
    /// Worst-case data written since the last copy.
    pub data_loss_mb: Option<f64>,
}

impl Observations {
    pub fn from_projection(projection: &Projection) -> Self {
        let mut obs = Observations::default();
        for t in &projection.times {
            let entry = (t.basis.label.clone(), t.hours());
            match t.basis.operation {
                Operation::Backup => obs.backup_times_h.push(entry),
                Operation::Restore(_) => obs.restore_times_h.push(entry),
            }
        }
        obs
    }

    pub fn with_achieved_rpo_days(mut self, days: f64) -> Self {
        self.achieved_rpo_days = Some(days);
        self
    }

    pub fn with_data_loss_mb(mut self, mb: f64) -> Self {
        self.data_loss_mb = Some(mb);
        self
    }
}

/// Judges observations against targets. Missing data yields `NotEvaluable`
/// verdicts rather than errors.
pub fn evaluate(
    scenario: impl Into<String>,
    observations: &Observations,
    targets: &BiaTargets,
) -> ComplianceReport {
    let rto = Quantity::hours(targets.rto_target_hours);
    let window = Quantity::hours(targets.backup_frequency_days * HOURS_PER_DAY);
    let mut verdicts = Vec::new();

    if observations.restore_times_h.is_empty() {
        verdicts.push(verdict(
            "restore time".into(),
            None,
            Some(rto),
            Relation::AtMost,
        ));
    }
    for (label, h) in &observations.restore_times_h {
        verdicts.push(verdict(
            format!("restore time ({label})"),
            Some(Quantity::hours(*h)),
            Some(rto),
            Relation::AtMost,
        ));
    }
    if observations.backup_times_h.is_empty() {
        verdicts.push(verdict(
            "backup time".into(),
            None,
            Some(window),
            Relation::AtMost,
        ));
    }
    for (label, h) in &observations.backup_times_h {
        verdicts.push(verdict(
            format!("backup time ({label})"),
            Some(Quantity::hours(*h)),
            Some(window),
            Relation::AtMost,
        ));
    }
    verdicts.push(verdict(
        "RPO".into(),
        observations.achieved_rpo_days.map(Quantity::days),
        Some(Quantity::days(targets.rpo_target_days)),
        Relation::AtMost,
    ));
    verdicts.push(verdict(
        "data loss".into(),
        observations.data_loss_mb.map(Quantity::megabytes),
        targets.max_data_loss_mb.map(Quantity::megabytes),
        Relation::AtMost,
    ));

    // MTD uses the slowest restore path.
    let worst_restore = observations
        .restore_times_h
        .iter()
        .map(|(_, h)| *h)
        .fold(None, |acc: Option<f64>, h| {
            Some(acc.map_or(h, |a| a.max(h)))
        });
    let mtd_hours = match (worst_restore, targets.wrt_hours) {
        (Some(r), Some(w)) => mtd(r, w).ok(),
        _ => None,
    };

    ComplianceReport {
        scenario: scenario.into(),
        verdicts,
        mtd_hours,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{project, Rate, RateBasis, SourceTier};
    use proptest::prelude::*;

    fn avamar() -> BiaTargets {
        BiaTargets {
            agent: "Avamar".into(),
            backup_frequency_days: 1.0,
            backup_retention_days: 14,
            recovery_points_scheme: "7+7+60".into(),
            cloud_tiering_threshold_days: Some(14),
            rpo_target_days: 7.0,
            rto_target_hours: 5.0,
            wrt_hours: None,
            max_data_loss_mb: None,
        }
    }

    #[test]
    fn mtd_examples() {
        assert_eq!(mtd(5.0, 3.0).unwrap(), 8.0);
        assert_eq!(mtd(0.0, 2.5).unwrap(), 2.5);
        assert!((mtd(3.09239, 1.90761).unwrap() - 5.0).abs() < 1e-12);
        assert!(mtd(-1.0, 1.0).is_err());
        assert!(mtd(1.0, -1.0).is_err());
    }

    #[test]
    fn check_examples() {
        let five = Quantity::hours(5.0);
        let pass = check("RTO", Quantity::hours(3.09239), five, Relation::AtMost).unwrap();
        assert_eq!(pass.status, Status::Pass);
        let fail = check("RTO", Quantity::hours(38.016), five, Relation::AtMost).unwrap();
        assert_eq!(fail.status, Status::Fail);
        let cloud = check("RTO", Quantity::hours(26.47), five, Relation::AtMost).unwrap();
        assert_eq!(cloud.status, Status::Fail);
        let tie = check("RTO", five, five, Relation::AtMost).unwrap();
        assert_eq!(tie.status, Status::Pass);
        let at_least = check(
            "x",
            Quantity::hours(5.0),
            Quantity::hours(4.0),
            Relation::AtLeast,
        )
        .unwrap();
        assert_eq!(at_least.status, Status::Pass);
        assert!(check("RTO", Quantity::days(1.0), five, Relation::AtMost).is_err());
    }

    #[test]
    fn hybrid_projection_verdicts() {
        let p = project(
            531012.0,
            &[
                RateBasis::backup("daily backup", Rate::Throughput(54.2224)),
                RateBasis::restore("archive", SourceTier::Archive, Rate::SecondsPerMb(0.25773)),
                RateBasis::restore("local", SourceTier::Local, Rate::SecondsPerMb(0.0209649)),
            ],
        )
        .unwrap();
        let obs = Observations::from_projection(&p).with_achieved_rpo_days(1.0);
        let report = evaluate("hybrid", &obs, &avamar());
        let status = |m: &str| report.verdict(m).unwrap().status;
        assert_eq!(status("restore time (local)"), Status::Pass);
        assert_eq!(status("restore time (archive)"), Status::Fail);
        assert_eq!(status("RPO"), Status::Pass);
        assert_eq!(status("backup time (daily backup)"), Status::Pass);
        assert_eq!(status("data loss"), Status::NotEvaluable);
        assert_eq!(report.mtd_hours, None);
    }

    #[test]
    fn empty_observations_are_not_evaluable() {
        let report = evaluate("empty", &Observations::default(), &avamar());
        assert!(!report.verdicts.is_empty());
        assert!(report
            .verdicts
            .iter()
            .all(|v| v.status == Status::NotEvaluable));
        assert_eq!(report.verdicts.len(), 4);
    }

    #[test]
    fn mtd_needs_restore_time_and_wrt() {
        let mut t = avamar();
        t.wrt_hours = Some(2.0);
        let obs = Observations {
            restore_times_h: vec![("a".into(), 1.5), ("b".into(), 3.0)],
            ..Default::default()
        };
        assert_eq!(evaluate("s", &obs, &t).mtd_hours, Some(5.0));
        assert_eq!(evaluate("s", &Observations::default(), &t).mtd_hours, None);
        assert_eq!(evaluate("s", &obs, &avamar()).mtd_hours, None);
    }

    #[test]
    fn data_loss_checked_when_both_sides_present() {
        let mut t = avamar();
        t.max_data_loss_mb = Some(30_000.0);
        let obs = Observations::default().with_data_loss_mb(27_342.0);
        let r = evaluate("s", &obs, &t);
        assert_eq!(r.verdict("data loss").unwrap().status, Status::Pass);
    }

    #[test]
    fn target_validation() {
        assert!(avamar().validate().is_ok());
        let mut t = avamar();
        t.rto_target_hours = 0.0;
        assert!(t.validate().is_err());
    }

    proptest! {
        #[test]
        fn mtd_is_commutative(a in 0.0f64..1e4, b in 0.0f64..1e4) {
            prop_assert_eq!(mtd(a, b).unwrap(), mtd(b, a).unwrap());
            prop_assert_eq!(mtd(a, b).unwrap(), a + b);
        }

        #[test]
        fn check_is_monotone(m1 in 0.0f64..100.0, d in 0.0f64..100.0, t in 0.0f64..100.0) {
            let m2 = m1 + d;
            let target = Quantity::hours(t);
            let v2 = check("x", Quantity::hours(m2), target, Relation::AtMost).unwrap();
            if v2.status == Status::Pass {
                let v1 = check("x", Quantity::hours(m1), target, Relation::AtMost).unwrap();
                prop_assert_eq!(v1.status, Status::Pass);
            }
        }

        #[test]
        fn verdict_count_is_deterministic(times in prop::collection::vec(0.0f64..100.0, 0..4)) {
            let obs = Observations {
                restore_times_h: times.iter().enumerate().map(|(i, &h)| (format!("r{i}"), h)).collect(),
                ..Default::default()
            };
            let a = evaluate("s", &obs, &avamar());
            let b = evaluate("s", &obs, &avamar());
            prop_assert_eq!(a, b);
        }
    }
}
