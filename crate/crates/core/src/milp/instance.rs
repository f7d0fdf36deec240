use std::collections::{BTreeSet, HashMap};

use crate::config::{CostParams, ScenarioConfig};
use crate::demand::CustomerRequest;
use crate::engine::SystemState;
use crate::error::{Error, Result};
use crate::grid::{manhattan_distance, travel_time, GridCoord};
use crate::layout::FacilityLayout;

/// One realized customer, with locations as indices into
/// [`ModelInstance::locations`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceCustomer {
    pub id: usize,
    pub origin: usize,
    pub destination: usize,
    pub arrival: u32,
    pub patience: u32,
}

/// How the day boundary is treated for trips still under way at the end of
/// the day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HorizonPolicy {
    /// The model spans exactly the day; trips that cannot be back home by
    /// the last time unit are forbidden.
    #[default]
    Strict,
    /// The horizon is extended by the longest possible trip so every trip
    /// started during the day can finish. Facility cost stops at the end of
    /// the day.
    ExtendTail,
}

/// Deterministic-equivalent data of one realized day.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInstance {
    pub locations: Vec<GridCoord>,
    pub horizon: u32,
    pub customers: Vec<InstanceCustomer>,
    /// Vehicle ids stationed at each location, fixed over time.
    pub vehicle_pools: Vec<Vec<usize>>,
    pub distances: Vec<Vec<u32>>,
    pub travel_times: Vec<Vec<u32>>,
    /// Cost rates for each time unit.
    pub costs: Vec<CostParams>,
    /// Maximum open facilities for each time unit.
    pub facility_capacity: Vec<u32>,
    pub big_m: i64,
    pub fleet_size: u32,
}

impl ModelInstance {
    /// The day realized by `requests` on `layout`. Customer indices are the
    /// request ids, so ids must be `0..requests.len()`.
    pub fn from_scenario(
        config: &ScenarioConfig,
        layout: &FacilityLayout,
        requests: &[CustomerRequest],
        horizon: HorizonPolicy,
    ) -> Result<Self> {
        config.validate()?;
        layout.validate(config)?;
        let locations: Vec<GridCoord> = config.blocks().collect();
        let loc = |c: GridCoord| c.row_major(config.grid_width);

        let mut customers = vec![None; requests.len()];
        for r in requests {
            r.validate(config)?;
            let slot = customers.get_mut(r.id as usize).ok_or_else(|| {
                Error::InvalidConfig(format!("customer ids must be 0..{}, got {}", requests.len(), r.id))
            })?;
            if slot.is_some() {
                return Err(Error::InvalidConfig(format!("customer id {} repeated", r.id)));
            }
            *slot = Some(InstanceCustomer {
                id: r.id as usize,
                origin: loc(r.origin),
                destination: loc(r.destination),
                arrival: r.arrival_time,
                patience: r.patience_radius,
            });
        }
        let customers = customers.into_iter().map(|c| c.expect("every slot filled")).collect();

        let mut vehicle_pools = vec![Vec::new(); locations.len()];
        for v in SystemState::new(layout).vehicles {
            vehicle_pools[loc(v.home_facility)].push(v.id as usize);
        }

        let distances: Vec<Vec<u32>> = locations
            .iter()
            .map(|&a| locations.iter().map(|&b| manhattan_distance(a, b)).collect())
            .collect();
        let travel_times: Vec<Vec<u32>> = locations
            .iter()
            .map(|&a| locations.iter().map(|&b| travel_time(a, b, config.vehicle_speed)).collect())
            .collect();

        let day = config.time_units_per_day;
        let total = match horizon {
            HorizonPolicy::Strict => day,
            HorizonPolicy::ExtendTail => day + 3 * config.diameter().div_ceil(config.vehicle_speed),
        };
        let costs = (0..total)
            .map(|t| if t < day { config.costs } else { CostParams { facility_open_per_time_unit: 0, ..config.costs } })
            .collect();

        let mut instance = Self {
            locations,
            horizon: total,
            customers,
            vehicle_pools,
            distances,
            travel_times,
            costs,
            facility_capacity: vec![config.facility_capacity; total as usize],
            big_m: default_big_m(config.diameter(), config.max_patience()),
            fleet_size: config.fleet_size,
        };
        // A single-block grid with zero patience would otherwise get N = 0.
        instance.big_m = instance.big_m.max(instance.min_big_m());
        Ok(instance)
    }

    pub fn with_big_m(mut self, big_m: i64) -> Self {
        self.big_m = big_m;
        self
    }

    /// Smallest admissible big-M: one more than every distance and patience
    /// radius.
    pub fn min_big_m(&self) -> i64 {
        let max_d = self.distances.iter().flatten().copied().max().unwrap_or(0);
        let max_s = self.customers.iter().map(|c| c.patience).max().unwrap_or(0);
        i64::from(max_d.max(max_s)) + 1
    }

    pub fn check(&self) -> Result<()> {
        let required = self.min_big_m() - 1;
        if self.big_m <= required {
            return Err(Error::BigMTooSmall { big_m: self.big_m, required });
        }
        let n = self.locations.len();
        let t = self.horizon as usize;
        if self.distances.len() != n || self.travel_times.len() != n || self.vehicle_pools.len() != n {
            return Err(Error::InvalidConfig("per-location tables do not match the location count".into()));
        }
        if self.costs.len() != t || self.facility_capacity.len() != t {
            return Err(Error::InvalidConfig("per-time tables do not match the horizon".into()));
        }
        for c in &self.customers {
            if c.origin >= n || c.destination >= n || c.origin == c.destination || c.arrival >= self.horizon {
                return Err(Error::InvalidConfig(format!("customer {} out of range", c.id)));
            }
        }
        Ok(())
    }

    /// Customers present at each (location, time), i.e. the sets M_{v,t}.
    pub fn customers_at(&self) -> HashMap<(usize, u32), Vec<usize>> {
        let mut map: HashMap<(usize, u32), Vec<usize>> = HashMap::new();
        for c in &self.customers {
            map.entry((c.origin, c.arrival)).or_default().push(c.id);
        }
        map
    }

    pub fn home_of(&self) -> HashMap<usize, usize> {
        self.vehicle_pools
            .iter()
            .enumerate()
            .flat_map(|(u, pool)| pool.iter().map(move |&c| (c, u)))
            .collect()
    }

    /// Duration of a trip from `facility` to the customer, on to the
    /// destination and back.
    pub fn trip_duration(&self, facility: usize, origin: usize, destination: usize) -> u32 {
        let tt = &self.travel_times;
        tt[facility][origin] + tt[origin][destination] + tt[destination][facility]
    }

    /// (location, time) pairs with at least one departure variable: a
    /// customer appearing there, or a vehicle pool that could serve a
    /// customer elsewhere at that time.
    pub fn departure_slots(&self) -> BTreeSet<(usize, u32)> {
        let mut slots = BTreeSet::new();
        for m in &self.customers {
            slots.insert((m.origin, m.arrival));
            for (u, pool) in self.vehicle_pools.iter().enumerate() {
                if u != m.origin && !pool.is_empty() {
                    slots.insert((u, m.arrival));
                }
            }
        }
        slots
    }

    pub fn trip_blocks(&self, facility: usize, origin: usize, destination: usize) -> u32 {
        let d = &self.distances;
        d[facility][origin] + d[origin][destination] + d[destination][facility]
    }
}

/// Ten times the largest distance a patience constraint can involve.
pub fn default_big_m(diameter: u32, max_patience: u32) -> i64 {
    10 * (i64::from(diameter) + i64::from(max_patience))
}
