use std::collections::HashMap;

use num_traits::Zero;

use super::instance::{HorizonPolicy, ModelInstance};
use super::model::VariableIndex;
use super::Rational;
use crate::config::ScenarioConfig;
use crate::demand::CustomerRequest;
use crate::engine::{Event, EventLog};
use crate::error::{Error, Result};
use crate::grid::travel_time;
use crate::layout::FacilityLayout;

/// Expresses a simulated day as an assignment over the model of that day.
///
/// The strict horizon is used when every trip is back home before the end
/// of the day, the extended one otherwise. `n` follows the flow balance and
/// `g` equals `n * f` wherever the model declares it.
pub fn encode_simulation(
    config: &ScenarioConfig,
    layout: &FacilityLayout,
    requests: &[CustomerRequest],
    log: &EventLog,
) -> Result<(ModelInstance, HashMap<VariableIndex, Rational>)> {
    let speed = config.vehicle_speed;
    let tt = |a, b| travel_time(a, b, speed);
    let ends_late = log.iter().any(|e| match *e {
        Event::ServedSameLocation { origin, destination, t, .. } => {
            t + tt(origin, destination) + tt(destination, origin) >= config.time_units_per_day
        }
        Event::ServedCrossLocation { vehicle_facility: u, origin, destination, t, .. } => {
            t + tt(u, origin) + tt(origin, destination) + tt(destination, u) >= config.time_units_per_day
        }
        _ => false,
    });
    let policy = if ends_late { HorizonPolicy::ExtendTail } else { HorizonPolicy::Strict };
    let instance = ModelInstance::from_scenario(config, layout, requests, policy)?;
    let loc = |c: crate::grid::GridCoord| c.row_major(config.grid_width);
    let home = instance.home_of();
    let horizon = instance.horizon;
    let one = Rational::from_integer(1);

    let mut assignment: HashMap<VariableIndex, Rational> = HashMap::new();
    let mut decided = vec![false; instance.customers.len()];
    let n_loc = instance.locations.len();
    let mut departures = vec![vec![0i64; horizon as usize]; n_loc];
    let mut returns = vec![vec![0i64; horizon as usize + 1]; n_loc];

    let bad = |msg: String| Error::MalformedLog(msg);
    let mut claim = |customer: u32, origin, t: u32| -> Result<usize> {
        let m = instance
            .customers
            .get(customer as usize)
            .ok_or_else(|| bad(format!("event for unknown customer {customer}")))?;
        if m.origin != loc(origin) || m.arrival != t {
            return Err(bad(format!("event for customer {customer} disagrees with its request")));
        }
        if std::mem::replace(&mut decided[customer as usize], true) {
            return Err(bad(format!("customer {customer} decided twice")));
        }
        Ok(customer as usize)
    };

    for event in log.iter() {
        match *event {
            Event::ServedSameLocation { customer, vehicle, origin, destination, t } => {
                let m = claim(customer, origin, t)?;
                let (v, k) = (loc(origin), loc(destination));
                if k != instance.customers[m].destination {
                    return Err(bad(format!("customer {customer} dropped at the wrong block")));
                }
                if home.get(&(vehicle as usize)) != Some(&v) {
                    return Err(bad(format!("vehicle {vehicle} is not stationed at {origin}")));
                }
                assignment.insert(VariableIndex::X { origin: v, customer: m, destination: k, t }, one);
                departures[v][t as usize] += 1;
                let back = t + instance.travel_times[v][k] + instance.travel_times[k][v];
                returns[v][back.min(horizon) as usize] += 1;
            }
            Event::ServedCrossLocation { customer, vehicle, vehicle_facility, origin, destination, t } => {
                let m = claim(customer, origin, t)?;
                let (u, v, k) = (loc(vehicle_facility), loc(origin), loc(destination));
                if k != instance.customers[m].destination {
                    return Err(bad(format!("customer {customer} dropped at the wrong block")));
                }
                if home.get(&(vehicle as usize)) != Some(&u) {
                    return Err(bad(format!("vehicle {vehicle} is not stationed at {vehicle_facility}")));
                }
                let c = vehicle as usize;
                assignment.insert(
                    VariableIndex::Y { customer: m, origin: v, vehicle: c, facility: u, destination: k, t },
                    one,
                );
                let back = t + instance.trip_duration(u, v, k);
                if u != k {
                    assignment.insert(VariableIndex::Z { vehicle: c, from: k, to: u, t: back }, one);
                }
                departures[u][t as usize] += 1;
                returns[u][back.min(horizon) as usize] += 1;
            }
            Event::LostSale { customer, origin, t } => {
                let m = claim(customer, origin, t)?;
                assignment.insert(VariableIndex::W { customer: m, origin: loc(origin), t }, one);
            }
            Event::FacilityOpenTick { .. } => {}
        }
    }
    if let Some(m) = decided.iter().position(|d| !d) {
        return Err(bad(format!("customer {m} has no outcome in the log")));
    }

    let open: Vec<usize> = layout.facilities.iter().map(|&f| loc(f)).collect();
    for &v in &open {
        for t in 0..horizon {
            assignment.insert(VariableIndex::F { location: v, t }, one);
        }
    }
    let slots = instance.departure_slots();
    let fleet = i64::from(instance.fleet_size);
    for v in 0..n_loc {
        let mut n = instance.vehicle_pools[v].len() as i64;
        for t in 0..horizon {
            if t > 0 {
                n += returns[v][t as usize] - departures[v][t as usize - 1];
            }
            if !(0..=fleet).contains(&n) {
                return Err(bad(format!("vehicle count at location {v} leaves [0, {fleet}] at t={t}")));
            }
            let value = Rational::from_integer(n.into());
            assignment.insert(VariableIndex::N { location: v, t }, value);
            if slots.contains(&(v, t)) && open.contains(&v) {
                assignment.insert(VariableIndex::G { location: v, t }, value);
            }
        }
    }
    assignment.retain(|_, v| !v.is_zero());
    Ok((instance, assignment))
}
