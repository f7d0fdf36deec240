//! Scenario parameters shared by every module.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{blocks, GridCoord};

/// Cost rates in the smallest currency unit, held constant over the day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParams {
    pub lost_sale_per_unit: u64,
    pub travel_per_block: u64,
    pub facility_open_per_time_unit: u64,
}

impl CostParams {
    pub const ZERO: CostParams = CostParams {
        lost_sale_per_unit: 0,
        travel_per_block: 0,
        facility_open_per_time_unit: 0,
    };

    pub const fn new(lost_sale: u64, travel: u64, facility_open: u64) -> Self {
        Self {
            lost_sale_per_unit: lost_sale,
            travel_per_block: travel,
            facility_open_per_time_unit: facility_open,
        }
    }
}

/// Per-customer patience drawn uniformly from `min..=max` instead of the
/// scenario-wide radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatienceRange {
    pub min: u32,
    pub max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid_width: u32,
    pub grid_height: u32,
    pub fleet_size: u32,
    pub customers_per_day: u32,
    pub time_units_per_day: u32,
    pub demand_probability: f64,
    pub patience_radius: u32,
    pub vehicle_speed: u32,
    pub costs: CostParams,
    pub facility_capacity: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patience_override: Option<PatienceRange>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::real_case()
    }
}

impl ScenarioConfig {
    /// 7x7 grid, 49 vehicles, free facilities, $1 per block, $50 per lost
    /// sale, 3-block patience, 100 customers over a 600-unit day at 5%
    /// per-block demand.
    pub fn real_case() -> Self {
        Self {
            grid_width: 7,
            grid_height: 7,
            fleet_size: 49,
            customers_per_day: 100,
            time_units_per_day: 600,
            demand_probability: 0.05,
            patience_radius: 3,
            vehicle_speed: 1,
            costs: CostParams::new(50, 1, 0),
            facility_capacity: 49,
            patience_override: None,
        }
    }

    /// The random test scenarios: $5 lost sale, $5 per block, and a facility
    /// cost of $5, $10 or $15 per time unit.
    pub fn random_case(facility_open_per_time_unit: u64, patience_radius: u32) -> Self {
        Self {
            patience_radius,
            costs: CostParams::new(5, 5, facility_open_per_time_unit),
            ..Self::real_case()
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.grid_width == 0 || self.grid_height == 0 {
            return fail(format!(
                "grid must have at least one block, got {}x{}",
                self.grid_width, self.grid_height
            ));
        }
        if !(0.0..=1.0).contains(&self.demand_probability) {
            return fail(format!(
                "demand_probability {} outside [0, 1]",
                self.demand_probability
            ));
        }
        if self.vehicle_speed == 0 {
            return fail("vehicle_speed must be at least 1".into());
        }
        if self.time_units_per_day == 0 {
            return fail("time_units_per_day must be at least 1".into());
        }
        if self.facility_capacity == 0 {
            return fail("facility_capacity must be at least 1".into());
        }
        if let Some(range) = self.patience_override {
            if range.min > range.max {
                return fail(format!(
                    "patience_override min {} exceeds max {}",
                    range.min, range.max
                ));
            }
        }
        Ok(())
    }

    pub fn block_count(&self) -> usize {
        self.grid_width as usize * self.grid_height as usize
    }

    pub fn contains(&self, c: GridCoord) -> bool {
        c.x < self.grid_width && c.y < self.grid_height
    }

    pub fn check_on_grid(&self, c: GridCoord) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OffGrid {
                coord: c,
                width: self.grid_width,
                height: self.grid_height,
            })
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = GridCoord> {
        blocks(self.grid_width, self.grid_height)
    }

    /// Largest Manhattan distance between two blocks.
    pub fn diameter(&self) -> u32 {
        self.grid_width - 1 + self.grid_height - 1
    }

    /// Largest patience any customer of this scenario can have.
    pub fn max_patience(&self) -> u32 {
        match self.patience_override {
            Some(range) => range.max.max(self.patience_radius),
            None => self.patience_radius,
        }
    }

    pub fn midpoint(&self) -> GridCoord {
        GridCoord::new((self.grid_width - 1) / 2, (self.grid_height - 1) / 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_case_round_trips_through_json() {
        let config = ScenarioConfig::real_case();
        let text = serde_json::to_string_pretty(&config).unwrap();
        assert_eq!(ScenarioConfig::from_json_str(&text).unwrap(), config);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut value = serde_json::to_value(ScenarioConfig::real_case()).unwrap();
        value["surge_pricing"] = serde_json::json!(true);
        assert!(ScenarioConfig::from_json_str(&value.to_string()).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = [
            ScenarioConfig { grid_width: 0, ..ScenarioConfig::real_case() },
            ScenarioConfig { demand_probability: 1.5, ..ScenarioConfig::real_case() },
            ScenarioConfig { vehicle_speed: 0, ..ScenarioConfig::real_case() },
            ScenarioConfig { time_units_per_day: 0, ..ScenarioConfig::real_case() },
            ScenarioConfig { facility_capacity: 0, ..ScenarioConfig::real_case() },
        ];
        for config in bad {
            assert!(config.validate().is_err(), "{config:?}");
        }
    }

    #[test]
    fn midpoint_of_seven_by_seven() {
        assert_eq!(ScenarioConfig::real_case().midpoint(), GridCoord::new(3, 3));
        assert_eq!(ScenarioConfig::real_case().diameter(), 12);
    }
}
