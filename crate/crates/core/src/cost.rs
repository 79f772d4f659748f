//! Monthly cloud-service cost models.
//!
//! Two pricing shapes are supported: object storage behind a backup
//! appliance (per-GB plus per-10K-operation charges) and a recovery vault
//! (per-protected-instance fee tiered on frontend size, plus per-GB stored).
//! Quantities are decimal GB; costs are flat per calendar month.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const OPS_BLOCK: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectStoreRates {
    pub per_gb_month: f64,
    pub per_10k_ingress_egress: f64,
    pub per_10k_listing: f64,
}

impl Default for ObjectStoreRates {
    fn default() -> Self {
        ObjectStoreRates {
            per_gb_month: 0.02,
            per_10k_ingress_egress: 0.54,
            per_10k_listing: 0.5,
        }
    }
}

impl ObjectStoreRates {
    pub fn validate(&self) -> Result<()> {
        non_negative("per_gb_month", self.per_gb_month)?;
        non_negative("per_10k_ingress_egress", self.per_10k_ingress_egress)?;
        non_negative("per_10k_listing", self.per_10k_listing)
    }
}

/// Monthly operation counts billed against object storage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransactionCounts {
    pub ingress_egress_ops: f64,
    pub listing_ops: f64,
}

impl Default for TransactionCounts {
    fn default() -> Self {
        TransactionCounts {
            ingress_egress_ops: 10_000.0,
            listing_ops: 10_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeeTier {
    /// Inclusive upper bound on frontend size for this tier.
    pub up_to_gb: f64,
    pub fee: f64,
}

/// Omitted keys take the default (published) table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VaultRates {
    pub per_gb_month: f64,
    /// Fixed tiers in ascending order of `up_to_gb`.
    pub instance_fee_tiers: Vec<FeeTier>,
    /// Beyond the last tier the fee is `fee_per_block * ceil(frontend / block_gb)`.
    pub overflow_block_gb: f64,
    pub overflow_fee_per_block: f64,
}

impl Default for VaultRates {
    fn default() -> Self {
        VaultRates {
            per_gb_month: 0.0448,
            instance_fee_tiers: vec![
                FeeTier {
                    up_to_gb: 50.0,
                    fee: 5.0,
                },
                FeeTier {
                    up_to_gb: 500.0,
                    fee: 10.0,
                },
            ],
            overflow_block_gb: 500.0,
            overflow_fee_per_block: 10.0,
        }
    }
}

impl VaultRates {
    pub fn validate(&self) -> Result<()> {
        non_negative("per_gb_month", self.per_gb_month)?;
        non_negative("overflow_fee_per_block", self.overflow_fee_per_block)?;
        if !(self.overflow_block_gb > 0.0) {
            return Err(Error::domain(format!(
                "overflow_block_gb must be > 0, got {}",
                self.overflow_block_gb
            )));
        }
        let mut prev: Option<&FeeTier> = None;
        for tier in &self.instance_fee_tiers {
            non_negative("tier fee", tier.fee)?;
            non_negative("tier bound", tier.up_to_gb)?;
            if let Some(p) = prev {
                if !(tier.up_to_gb > p.up_to_gb) {
                    return Err(Error::domain(format!(
                        "tier bounds must be strictly increasing ({} after {})",
                        tier.up_to_gb, p.up_to_gb
                    )));
                }
                if tier.fee < p.fee {
                    return Err(Error::domain(format!(
                        "tier fees must not decrease ({} after {})",
                        tier.fee, p.fee
                    )));
                }
            }
            prev = Some(tier);
        }
        if let Some(last) = prev {
            let first_overflow = self.overflow_fee_per_block
                * (last.up_to_gb / self.overflow_block_gb).ceil().max(1.0);
            if first_overflow < last.fee {
                return Err(Error::domain(format!(
                    "overflow fee {first_overflow} just above {} GB is below the last tier fee {}",
                    last.up_to_gb, last.fee
                )));
            }
        }
        Ok(())
    }
}

/// A month's bill split by charge type. `total` is the sum of the parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub storage_cost: f64,
    pub transaction_cost: f64,
    pub instance_cost: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn new(storage_cost: f64, transaction_cost: f64, instance_cost: f64) -> Self {
        CostBreakdown {
            storage_cost,
            transaction_cost,
            instance_cost,
            total: storage_cost + transaction_cost + instance_cost,
        }
    }
}

fn non_negative(what: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} must be a finite value >= 0, got {v}"
        )))
    }
}

pub fn hybrid_cloud_cost(
    tiered_gb: f64,
    ingress_egress_ops: f64,
    listing_ops: f64,
    rates: &ObjectStoreRates,
) -> Result<CostBreakdown> {
    non_negative("tiered_gb", tiered_gb)?;
    non_negative("ingress_egress_ops", ingress_egress_ops)?;
    non_negative("listing_ops", listing_ops)?;
    rates.validate()?;
    let storage = tiered_gb * rates.per_gb_month;
    let transactions = rates.per_10k_ingress_egress * ingress_egress_ops / OPS_BLOCK
        + rates.per_10k_listing * listing_ops / OPS_BLOCK;
    Ok(CostBreakdown::new(storage, transactions, 0.0))
}

/// Per-instance monthly fee for a protected server of `frontend_gb`.
///
/// With the default table: up to 50 GB costs 5, up to 500 GB costs 10, and
/// larger instances pay 10 per started 500 GB.
pub fn vault_instance_fee(frontend_gb: f64, rates: &VaultRates) -> f64 {
    let size = frontend_gb.max(0.0);
    for tier in &rates.instance_fee_tiers {
        if size <= tier.up_to_gb {
            return tier.fee;
        }
    }
    rates.overflow_fee_per_block * (size / rates.overflow_block_gb).ceil()
}

pub fn cloud_vault_cost(
    frontend_gb: f64,
    stored_gb: f64,
    rates: &VaultRates,
) -> Result<CostBreakdown> {
    non_negative("frontend_gb", frontend_gb)?;
    non_negative("stored_gb", stored_gb)?;
    rates.validate()?;
    Ok(CostBreakdown::new(
        stored_gb * rates.per_gb_month,
        0.0,
        vault_instance_fee(frontend_gb, rates),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hybrid_examples() {
        let r = ObjectStoreRates::default();
        let basic = hybrid_cloud_cost(26.956, 10_000.0, 10_000.0, &r).unwrap();
        assert!((basic.total - 1.57912).abs() < 1e-9);
        assert!((basic.storage_cost - 0.53912).abs() < 1e-12);
        assert!((basic.transaction_cost - 1.04).abs() < 1e-12);
        assert_eq!(basic.instance_cost, 0.0);

        let test = hybrid_cloud_cost(531.012, 10_000.0, 10_000.0, &r).unwrap();
        assert!((test.total - 11.66024).abs() < 1e-9);

        let zero = hybrid_cloud_cost(0.0, 0.0, 0.0, &r).unwrap();
        assert_eq!(zero.total, 0.0);
    }

    #[test]
    fn negative_inputs_are_rejected() {
        let r = ObjectStoreRates::default();
        assert!(hybrid_cloud_cost(-1.0, 0.0, 0.0, &r).is_err());
        assert!(hybrid_cloud_cost(1.0, -1.0, 0.0, &r).is_err());
        assert!(cloud_vault_cost(-1.0, 0.0, &VaultRates::default()).is_err());
        assert!(cloud_vault_cost(0.0, -0.5, &VaultRates::default()).is_err());
        let bad = ObjectStoreRates {
            per_gb_month: -0.02,
            ..r
        };
        assert!(hybrid_cloud_cost(1.0, 0.0, 0.0, &bad).is_err());
    }

    #[test]
    fn instance_fee_tiers() {
        let r = VaultRates::default();
        assert_eq!(vault_instance_fee(0.0, &r), 5.0);
        assert_eq!(vault_instance_fee(50.0, &r), 5.0);
        assert_eq!(vault_instance_fee(50.001, &r), 10.0);
        assert_eq!(vault_instance_fee(500.0, &r), 10.0);
        assert_eq!(vault_instance_fee(500.001, &r), 20.0);
        assert_eq!(vault_instance_fee(531.012, &r), 20.0);
        assert_eq!(vault_instance_fee(1000.0, &r), 20.0);
        assert_eq!(vault_instance_fee(1000.5, &r), 30.0);
    }

    #[test]
    fn vault_examples() {
        let r = VaultRates::default();
        let basic = cloud_vault_cost(50.0, 63.103, &r).unwrap();
        assert!((basic.total - 7.82701).abs() < 1e-5);
        let test = cloud_vault_cost(531.012, 531.012, &r).unwrap();
        assert!((test.total - 43.78934).abs() < 1e-5);
        let empty = cloud_vault_cost(0.0, 0.0, &r).unwrap();
        assert_eq!(empty.total, 5.0);
        assert_eq!(empty.transaction_cost, 0.0);
    }

    #[test]
    fn tier_validation() {
        let mut r = VaultRates::default();
        r.instance_fee_tiers[1].up_to_gb = 40.0;
        assert!(r.validate().is_err());
        let mut r = VaultRates::default();
        r.instance_fee_tiers[1].fee = 1.0;
        assert!(r.validate().is_err());
        let r = VaultRates {
            overflow_fee_per_block: 1.0,
            ..Default::default()
        };
        assert!(r.validate().is_err());
        assert!(VaultRates::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn hybrid_cost_is_monotone(
            gb in 0.0f64..1e5, ops in 0.0f64..1e7, list in 0.0f64..1e7,
            dgb in 0.0f64..1e4, dops in 0.0f64..1e6,
        ) {
            let r = ObjectStoreRates::default();
            let base = hybrid_cloud_cost(gb, ops, list, &r).unwrap().total;
            prop_assert!(hybrid_cloud_cost(gb + dgb, ops, list, &r).unwrap().total >= base);
            prop_assert!(hybrid_cloud_cost(gb, ops + dops, list, &r).unwrap().total >= base);
            prop_assert!(hybrid_cloud_cost(gb, ops, list + dops, &r).unwrap().total >= base);
        }

        #[test]
        fn vault_cost_is_monotone(front in 0.0f64..5e3, stored in 0.0f64..5e3, d in 0.0f64..1e3) {
            let r = VaultRates::default();
            let base = cloud_vault_cost(front, stored, &r).unwrap().total;
            prop_assert!(cloud_vault_cost(front + d, stored, &r).unwrap().total >= base);
            prop_assert!(cloud_vault_cost(front, stored + d, &r).unwrap().total >= base);
        }

        #[test]
        fn storage_is_linear(gb in 0.0f64..1e6) {
            let r = ObjectStoreRates::default();
            let one = hybrid_cloud_cost(gb, 0.0, 0.0, &r).unwrap().storage_cost;
            let two = hybrid_cloud_cost(2.0 * gb, 0.0, 0.0, &r).unwrap().storage_cost;
            prop_assert_eq!(two, 2.0 * one);
            let v = VaultRates::default();
            let one = cloud_vault_cost(0.0, gb, &v).unwrap().storage_cost;
            let two = cloud_vault_cost(0.0, 2.0 * gb, &v).unwrap().storage_cost;
            prop_assert_eq!(two, 2.0 * one);
        }

        #[test]
        fn fee_is_a_step_with_inclusive_upper_bounds(front in 0.0f64..1e4) {
            let r = VaultRates::default();
            let fee = vault_instance_fee(front, &r);
            prop_assert!(fee == 5.0 || (fee >= 10.0 && fee % 10.0 == 0.0));
            // a bound belongs to the tier below it
            for bound in [50.0, 500.0, 1000.0, 1500.0] {
                let below = vault_instance_fee(bound - 1e-9, &r);
                let at = vault_instance_fee(bound, &r);
                let above = vault_instance_fee(bound + 1e-9, &r);
                prop_assert!(at == below && above >= at);
            }
        }

        #[test]
        fn breakdown_sums_exactly(front in 0.0f64..5e3, stored in 0.0f64..5e3, ops in 0.0f64..1e6) {
            let c = cloud_vault_cost(front, stored, &VaultRates::default()).unwrap();
            prop_assert_eq!(c.total, c.storage_cost + c.transaction_cost + c.instance_cost);
            let h = hybrid_cloud_cost(stored, ops, ops, &ObjectStoreRates::default()).unwrap();
            prop_assert!((h.total - (h.storage_cost + h.transaction_cost + h.instance_cost)).abs() <= 1e-9);
        }
    }
}
