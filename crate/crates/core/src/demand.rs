//! Seeded daily demand.
//!
//! Every block independently spawns a customer with probability
//! `demand_probability` in every time unit, scanned chronologically and then
//! row-major, until the day's pool of `customers_per_day` is used up.

use std::io::{Read, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::grid::GridCoord;

pub type CustomerId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CustomerRequest {
    pub id: CustomerId,
    pub origin: GridCoord,
    pub destination: GridCoord,
    pub arrival_time: u32,
    pub patience_radius: u32,
}

impl CustomerRequest {
    pub fn validate(&self, config: &ScenarioConfig) -> Result<()> {
        config.check_on_grid(self.origin)?;
        config.check_on_grid(self.destination)?;
        if self.origin == self.destination {
            return Err(Error::InvalidConfig(format!(
                "customer {} has identical origin and destination {}",
                self.id, self.origin
            )));
        }
        if self.arrival_time >= config.time_units_per_day {
            return Err(Error::InvalidConfig(format!(
                "customer {} arrives at t={} outside the {}-unit day",
                self.id, self.arrival_time, config.time_units_per_day
            )));
        }
        Ok(())
    }
}

/// Independent random stream for one day of one master seed.
pub fn day_rng(seed: u64, day: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(day);
    rng
}

pub fn generate_day_demand(config: &ScenarioConfig, seed: u64, day: u64) -> Vec<CustomerRequest> {
    let block_count = config.block_count();
    let pool = config.customers_per_day as usize;
    let mut requests = Vec::with_capacity(pool.min(4096));
    // A single-block city has nowhere to go.
    if block_count < 2 || pool == 0 || config.demand_probability <= 0.0 {
        return requests;
    }

    let mut rng = day_rng(seed, day);
    'day: for t in 0..config.time_units_per_day {
        for origin_index in 0..block_count {
            if !rng.gen_bool(config.demand_probability) {
                continue;
            }
            let mut dest_index = rng.gen_range(0..block_count - 1);
            if dest_index >= origin_index {
                dest_index += 1;
            }
            let patience_radius = match config.patience_override {
                Some(range) => rng.gen_range(range.min..=range.max),
                None => config.patience_radius,
            };
            requests.push(CustomerRequest {
                id: requests.len() as CustomerId,
                origin: GridCoord::from_row_major(origin_index, config.grid_width),
                destination: GridCoord::from_row_major(dest_index, config.grid_width),
                arrival_time: t,
                patience_radius,
            });
            if requests.len() == pool {
                break 'day;
            }
        }
    }
    requests
}

#[derive(Debug, Serialize, Deserialize)]
struct RequestRow {
    id: CustomerId,
    origin_x: u32,
    origin_y: u32,
    dest_x: u32,
    dest_y: u32,
    arrival_time: u32,
    patience_radius: u32,
}

pub fn write_requests_csv<W: Write>(writer: W, requests: &[CustomerRequest]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for r in requests {
        out.serialize(RequestRow {
            id: r.id,
            origin_x: r.origin.x,
            origin_y: r.origin.y,
            dest_x: r.destination.x,
            dest_y: r.destination.y,
            arrival_time: r.arrival_time,
            patience_radius: r.patience_radius,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_requests_csv<R: Read>(reader: R) -> Result<Vec<CustomerRequest>> {
    csv::Reader::from_reader(reader)
        .deserialize::<RequestRow>()
        .map(|row| {
            let row = row?;
            Ok(CustomerRequest {
                id: row.id,
                origin: GridCoord::new(row.origin_x, row.origin_y),
                destination: GridCoord::new(row.dest_x, row.dest_y),
                arrival_time: row.arrival_time,
                patience_radius: row.patience_radius,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PatienceRange;
    use proptest::prelude::*;

    #[test]
    fn zero_probability_yields_nothing() {
        let config = ScenarioConfig { demand_probability: 0.0, ..ScenarioConfig::real_case() };
        assert!(generate_day_demand(&config, 1, 0).is_empty());
    }

    #[test]
    fn certain_demand_fills_pool_in_three_time_units() {
        let config = ScenarioConfig { demand_probability: 1.0, ..ScenarioConfig::real_case() };
        let requests = generate_day_demand(&config, 42, 3);
        assert_eq!(requests.len(), 100);
        let per_t = |t| requests.iter().filter(|r| r.arrival_time == t).count();
        assert_eq!((per_t(0), per_t(1), per_t(2)), (49, 49, 2));
        assert_eq!(requests[99].arrival_time, 2);
        // Row-major scan: the first arrival of each time unit starts at (0,0).
        assert_eq!(requests[0].origin, GridCoord::new(0, 0));
        assert_eq!(requests[49].origin, GridCoord::new(0, 0));
        assert_eq!(requests[99].origin, GridCoord::new(1, 0));
    }

    #[test]
    fn csv_round_trip() {
        let requests = generate_day_demand(&ScenarioConfig::real_case(), 9, 9);
        let mut buf = Vec::new();
        write_requests_csv(&mut buf, &requests).unwrap();
        let header = std::str::from_utf8(&buf).unwrap().lines().next().unwrap().to_owned();
        assert_eq!(header, "id,origin_x,origin_y,dest_x,dest_y,arrival_time,patience_radius");
        assert_eq!(read_requests_csv(buf.as_slice()).unwrap(), requests);
    }

    #[test]
    fn override_draws_within_range() {
        let config = ScenarioConfig {
            patience_override: Some(PatienceRange { min: 2, max: 5 }),
            ..ScenarioConfig::real_case()
        };
        let requests = generate_day_demand(&config, 3, 0);
        assert!(requests.iter().all(|r| (2..=5).contains(&r.patience_radius)));
        assert!(requests.iter().any(|r| r.patience_radius != requests[0].patience_radius));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn requests_respect_invariants(
            seed in any::<u64>(),
            day in 0u64..1000,
            w in 1u32..8,
            h in 1u32..8,
            p in 0.0f64..=1.0,
            pool in 0u32..150,
            horizon in 1u32..50,
        ) {
            let config = ScenarioConfig {
                grid_width: w,
                grid_height: h,
                demand_probability: p,
                customers_per_day: pool,
                time_units_per_day: horizon,
                ..ScenarioConfig::real_case()
            };
            let requests = generate_day_demand(&config, seed, day);
            prop_assert!(requests.len() <= pool as usize);
            for (i, r) in requests.iter().enumerate() {
                prop_assert_eq!(r.id as usize, i);
                prop_assert!(r.validate(&config).is_ok());
            }
            prop_assert!(requests.windows(2).all(|pair| pair[0].arrival_time <= pair[1].arrival_time));
            prop_assert_eq!(&requests, &generate_day_demand(&config, seed, day));
        }
    }
}
