use std::ops::AddAssign;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Exact day cost split into its three components.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CostLedger {
    pub lost_sale_cost: u64,
    pub travel_cost: u64,
    pub facility_cost: u64,
}

impl CostLedger {
    pub fn total(&self) -> u64 {
        self.lost_sale_cost + self.travel_cost + self.facility_cost
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&LedgerJson::from(*self)).expect("ledger serializes")
    }

    pub fn from_json_str(text: &str) -> serde_json::Result<Self> {
        let raw: LedgerJson = serde_json::from_str(text)?;
        let ledger = CostLedger {
            lost_sale_cost: raw.lost_sale_cost,
            travel_cost: raw.travel_cost,
            facility_cost: raw.facility_cost,
        };
        if ledger.total() != raw.total {
            return Err(serde::de::Error::custom(format!(
                "total {} does not equal the component sum {}",
                raw.total,
                ledger.total()
            )));
        }
        Ok(ledger)
    }
}

impl AddAssign for CostLedger {
    fn add_assign(&mut self, rhs: Self) {
        self.lost_sale_cost += rhs.lost_sale_cost;
        self.travel_cost += rhs.travel_cost;
        self.facility_cost += rhs.facility_cost;
    }
}

impl std::iter::Sum for CostLedger {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(CostLedger::default(), |mut acc, l| {
            acc += l;
            acc
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LedgerJson {
    lost_sale_cost: u64,
    travel_cost: u64,
    facility_cost: u64,
    total: u64,
}

impl From<CostLedger> for LedgerJson {
    fn from(l: CostLedger) -> Self {
        Self {
            lost_sale_cost: l.lost_sale_cost,
            travel_cost: l.travel_cost,
            facility_cost: l.facility_cost,
            total: l.total(),
        }
    }
}

/// Per-day ledgers of one scenario plus exact means.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioResult {
    pub day_ledgers: Vec<CostLedger>,
    pub totals: CostLedger,
}

impl ScenarioResult {
    pub fn from_days(day_ledgers: Vec<CostLedger>) -> Self {
        let totals = day_ledgers.iter().copied().sum();
        Self { day_ledgers, totals }
    }

    pub fn num_days(&self) -> usize {
        self.day_ledgers.len()
    }

    fn mean_of(&self, sum: u64) -> Ratio<u64> {
        Ratio::new(sum, self.num_days().max(1) as u64)
    }

    pub fn mean_total(&self) -> Ratio<u64> {
        self.mean_of(self.totals.total())
    }

    pub fn mean_lost(&self) -> Ratio<u64> {
        self.mean_of(self.totals.lost_sale_cost)
    }

    pub fn mean_travel(&self) -> Ratio<u64> {
        self.mean_of(self.totals.travel_cost)
    }

    pub fn mean_facility(&self) -> Ratio<u64> {
        self.mean_of(self.totals.facility_cost)
    }

    /// Fraction of all cost that is lost-sale cost; 0 when nothing was spent.
    pub fn lost_share(&self) -> f64 {
        match self.totals.total() {
            0 => 0.0,
            total => self.totals.lost_sale_cost as f64 / total as f64,
        }
    }
}
