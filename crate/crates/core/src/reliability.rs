//! Exponential (constant-hazard) component reliability and series composition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mission time that reproduces the published component reliabilities.
pub const RECONCILED_MISSION_H: f64 = 372.0;
/// The stated 15-day analysis window.
pub const STATED_MISSION_H: f64 = 360.0;

/// Probability of surviving `mission_h` hours with the given MTBF.
pub fn component_reliability(mtbf_h: f64, mission_h: f64) -> Result<f64> {
    if !(mtbf_h > 0.0) {
        return Err(Error::domain(format!("MTBF must be > 0, got {mtbf_h} h")));
    }
    if !(mission_h >= 0.0) {
        return Err(Error::domain(format!(
            "mission time must be >= 0, got {mission_h} h"
        )));
    }
    Ok((-mission_h / mtbf_h).exp())
}

/// MTBF under which an exponential component meets `sla` over `reference_period_h`.
pub fn sla_to_mtbf(sla: f64, reference_period_h: f64) -> Result<f64> {
    if !(sla > 0.0 && sla < 1.0) {
        return Err(Error::domain(format!("SLA must lie in (0, 1), got {sla}")));
    }
    if !(reference_period_h > 0.0) {
        return Err(Error::domain(format!(
            "SLA reference period must be > 0, got {reference_period_h} h"
        )));
    }
    Ok(reference_period_h / -sla.ln())
}

/// Reliability of components in series: the product of the parts.
pub fn series_reliability(values: &[f64]) -> Result<f64> {
    values.iter().try_fold(1.0, |acc, &v| {
        if (0.0..=1.0).contains(&v) {
            Ok(acc * v)
        } else {
            Err(Error::domain(format!(
                "reliability must lie in [0, 1], got {v}"
            )))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FailureBasis {
    Mtbf { mtbf_h: f64 },
    Sla { sla: f64, reference_period_h: f64 },
}

impl FailureBasis {
    pub fn mtbf_h(&self) -> Result<f64> {
        match *self {
            FailureBasis::Mtbf { mtbf_h } => {
                if mtbf_h > 0.0 {
                    Ok(mtbf_h)
                } else {
                    Err(Error::domain(format!("MTBF must be > 0, got {mtbf_h} h")))
                }
            }
            FailureBasis::Sla {
                sla,
                reference_period_h,
            } => {
                // sla == 1 means no failures at all
                if sla == 1.0 && reference_period_h > 0.0 {
                    Ok(f64::INFINITY)
                } else {
                    sla_to_mtbf(sla, reference_period_h)
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FailureBasis::Mtbf { mtbf_h } => format!("MTBF {mtbf_h} h"),
            FailureBasis::Sla {
                sla,
                reference_period_h,
            } => format!("SLA {sla} over {reference_period_h} h"),
        }
    }
}

/// A series element parameterized either by MTBF or by an SLA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComponentEntry", into = "ComponentEntry")]
pub struct ReliabilityComponent {
    pub name: String,
    pub basis: FailureBasis,
}

/// Configuration shape: `name` plus either `mtbf_h` or `sla` and `reference_period_h`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentEntry {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mtbf_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sla: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_period_h: Option<f64>,
}

impl TryFrom<ComponentEntry> for ReliabilityComponent {
    type Error = String;

    fn try_from(e: ComponentEntry) -> std::result::Result<Self, String> {
        let basis = match (e.mtbf_h, e.sla, e.reference_period_h) {
            (Some(mtbf_h), None, None) => FailureBasis::Mtbf { mtbf_h },
            (None, Some(sla), Some(reference_period_h)) => FailureBasis::Sla {
                sla,
                reference_period_h,
            },
            _ => {
                return Err(format!(
                    "component '{}' needs either mtbf_h or both sla and reference_period_h",
                    e.name
                ))
            }
        };
        let c = ReliabilityComponent {
            name: e.name,
            basis,
        };
        c.basis.mtbf_h().map_err(|err| err.to_string())?;
        Ok(c)
    }
}

impl From<ReliabilityComponent> for ComponentEntry {
    fn from(c: ReliabilityComponent) -> Self {
        let (mtbf_h, sla, reference_period_h) = match c.basis {
            FailureBasis::Mtbf { mtbf_h } => (Some(mtbf_h), None, None),
            FailureBasis::Sla {
                sla,
                reference_period_h,
            } => (None, Some(sla), Some(reference_period_h)),
        };
        ComponentEntry {
            name: c.name,
            mtbf_h,
            sla,
            reference_period_h,
        }
    }
}

impl ReliabilityComponent {
    pub fn mtbf(name: impl Into<String>, mtbf_h: f64) -> Self {
        ReliabilityComponent {
            name: name.into(),
            basis: FailureBasis::Mtbf { mtbf_h },
        }
    }

    pub fn sla(name: impl Into<String>, sla: f64, reference_period_h: f64) -> Self {
        ReliabilityComponent {
            name: name.into(),
            basis: FailureBasis::Sla {
                sla,
                reference_period_h,
            },
        }
    }

    pub fn reliability(&self, mission_h: f64) -> Result<f64> {
        let mtbf = self.basis.mtbf_h()?;
        if mtbf.is_infinite() {
            Ok(1.0)
        } else {
            component_reliability(mtbf, mission_h)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSystem {
    components: Vec<ReliabilityComponent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentResult {
    pub name: String,
    pub basis: FailureBasis,
    pub reliability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemReliability {
    pub mission_h: f64,
    pub components: Vec<ComponentResult>,
    pub system: f64,
}

impl SeriesSystem {
    pub fn new(components: Vec<ReliabilityComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain(
                "a series system needs at least one component",
            ));
        }
        Ok(SeriesSystem { components })
    }

    pub fn components(&self) -> &[ReliabilityComponent] {
        &self.components
    }

    pub fn evaluate(&self, mission_h: f64) -> Result<SystemReliability> {
        let components = self
            .components
            .iter()
            .map(|c| {
                Ok(ComponentResult {
                    name: c.name.clone(),
                    basis: c.basis,
                    reliability: c.reliability(mission_h)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = components.iter().map(|c| c.reliability).collect();
        Ok(SystemReliability {
            mission_h,
            system: series_reliability(&values)?,
            components,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn component_examples() {
        let dc = component_reliability(61320.0, 372.0).unwrap();
        assert!((dc - 0.993952).abs() < 2e-5);
        let isp = component_reliability(17520.0, 372.0).unwrap();
        assert!((isp - 0.978981).abs() < 2e-5);
        assert_eq!(component_reliability(1234.0, 0.0).unwrap(), 1.0);
        // the stated 360 h window gives a visibly different value
        let dc360 = component_reliability(61320.0, 360.0).unwrap();
        assert!((dc360 - 0.994146).abs() < 1e-6);
        assert!(component_reliability(0.0, 1.0).is_err());
        assert!(component_reliability(-5.0, 1.0).is_err());
        assert!(component_reliability(5.0, -1.0).is_err());
    }

    #[test]
    fn sla_conversion() {
        let m = sla_to_mtbf(0.9995, 360.0).unwrap();
        // 360 / -ln(0.9995) = 719_819.98 h
        assert!((m - 719_820.0).abs() < 0.1, "{m}");
        assert!((component_reliability(m, 360.0).unwrap() - 0.9995).abs() < 1e-12);
        let dc = sla_to_mtbf(0.993952, 372.0).unwrap();
        assert!((dc - 61_321.7).abs() < 0.1, "{dc}");
        assert!(sla_to_mtbf(1.0, 360.0).is_err());
        assert!(sla_to_mtbf(0.0, 360.0).is_err());
        assert!(sla_to_mtbf(0.5, 0.0).is_err());
    }

    #[test]
    fn series_examples() {
        assert_eq!(series_reliability(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(series_reliability(&[0.5]).unwrap(), 0.5);
        assert!(series_reliability(&[0.5, 1.1]).is_err());
        assert!(series_reliability(&[-0.1]).is_err());
    }

    #[test]
    fn system_evaluation_reports_each_component() {
        let sys = SeriesSystem::new(vec![
            ReliabilityComponent::mtbf("Cloud", 61320.0),
            ReliabilityComponent::mtbf("DC", 61320.0),
            ReliabilityComponent::mtbf("ISP", 17520.0),
        ])
        .unwrap();
        let r = sys.evaluate(RECONCILED_MISSION_H).unwrap();
        assert_eq!(r.components.len(), 3);
        assert_eq!(r.components[0].reliability, r.components[1].reliability);
        let product: f64 = r.components.iter().map(|c| c.reliability).product();
        assert_eq!(r.system, product);
        assert!(SeriesSystem::new(vec![]).is_err());
    }

    #[test]
    fn sla_component_meets_its_sla_over_the_reference_period() {
        let c = ReliabilityComponent::sla("Cloud", 0.9995, 360.0);
        assert!((c.reliability(360.0).unwrap() - 0.9995).abs() < 1e-12);
        let perfect = ReliabilityComponent::sla("Perfect", 1.0, 360.0);
        assert_eq!(perfect.reliability(1e6).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn reliability_is_monotone(mtbf in 1.0f64..1e6, t in 0.0f64..1e5, dt in 1e-3f64..1e3) {
            let r = component_reliability(mtbf, t).unwrap();
            prop_assert!(r > 0.0 && r <= 1.0);
            let later = component_reliability(mtbf, t + dt).unwrap();
            prop_assert!(later <= r);
            if r > 1e-300 && (dt / mtbf) > 1e-12 {
                prop_assert!(later < r);
            }
            let sturdier = component_reliability(mtbf * 2.0, t).unwrap();
            prop_assert!(sturdier >= r);
        }

        #[test]
        fn series_is_bounded_and_commutative(values in prop::collection::vec(0.0f64..=1.0, 1..8)) {
            let r = series_reliability(&values).unwrap();
            let min = values.iter().copied().fold(1.0, f64::min);
            prop_assert!(r <= min);
            let mut rev = values.clone();
            rev.reverse();
            prop_assert!((series_reliability(&rev).unwrap() - r).abs() <= 1e-15);
            let mut with_one = values.clone();
            with_one.push(1.0);
            prop_assert_eq!(series_reliability(&with_one).unwrap(), r);
        }

        #[test]
        fn sla_round_trip(sla in 0.5f64..0.999999, period in 1.0f64..1e5) {
            let mtbf = sla_to_mtbf(sla, period).unwrap();
            let back = component_reliability(mtbf, period).unwrap();
            prop_assert!(((back - sla) / sla).abs() <= 1e-12);
        }
    }
}
