//! After-the-fact checks of a simulated day against the formulation's
//! operational rules.

use std::collections::HashMap;

use crate::config::ScenarioConfig;
use crate::demand::CustomerRequest;
use crate::grid::{manhattan_distance, travel_time, GridCoord};
use crate::layout::FacilityLayout;

use super::{DayOutcome, Event, SystemState, VehicleId};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks outcome exclusivity, patience feasibility, single assignment,
/// return-home, vehicle conservation at the end of the day and agreement of
/// the ledger with costs recomputed from the log.
pub fn audit_day(
    config: &ScenarioConfig,
    layout: &FacilityLayout,
    requests: &[CustomerRequest],
    outcome: &DayOutcome,
) -> AuditReport {
    let mut violations = Vec::new();
    let homes: Vec<GridCoord> = SystemState::new(layout)
        .vehicles
        .iter()
        .map(|v| v.home_facility)
        .collect();
    let by_id: HashMap<_, _> = requests.iter().map(|r| (r.id, r)).collect();
    let mut outcomes_seen: HashMap<u32, usize> = HashMap::new();
    let mut trips: HashMap<VehicleId, Vec<(u32, u32)>> = HashMap::new();
    let mut ticks = 0usize;
    let speed = config.vehicle_speed;

    for event in outcome.log.iter() {
        if let Some(id) = event.customer() {
            *outcomes_seen.entry(id).or_default() += 1;
            match by_id.get(&id) {
                None => violations.push(format!("event for unknown customer {id}")),
                Some(r) if r.arrival_time != event.time() => violations.push(format!(
                    "customer {id} resolved at t={} but arrived at t={}",
                    event.time(),
                    r.arrival_time
                )),
                Some(_) => {}
            }
        }
        match *event {
            Event::ServedSameLocation { customer, vehicle, origin, destination, t } => {
                match homes.get(vehicle as usize) {
                    Some(&home) if home == origin => {}
                    _ => violations.push(format!(
                        "customer {customer}: vehicle {vehicle} is not stationed at {origin}"
                    )),
                }
                let duration = 2 * travel_time(origin, destination, speed);
                trips.entry(vehicle).or_default().push((t, t + duration));
            }
            Event::ServedCrossLocation { customer, vehicle, vehicle_facility, origin, destination, t } => {
                if homes.get(vehicle as usize) != Some(&vehicle_facility) {
                    violations.push(format!(
                        "customer {customer}: vehicle {vehicle} does not return to {vehicle_facility}"
                    ));
                }
                if vehicle_facility == origin {
                    violations.push(format!("customer {customer}: cross-location trip from own block"));
                }
                let reach = manhattan_distance(vehicle_facility, origin);
                if let Some(r) = by_id.get(&customer) {
                    if reach > r.patience_radius {
                        violations.push(format!(
                            "customer {customer}: vehicle {reach} blocks away exceeds patience {}",
                            r.patience_radius
                        ));
                    }
                }
                let duration = travel_time(vehicle_facility, origin, speed)
                    + travel_time(origin, destination, speed)
                    + travel_time(destination, vehicle_facility, speed);
                trips.entry(vehicle).or_default().push((t, t + duration));
            }
            Event::LostSale { .. } => {}
            Event::FacilityOpenTick { facility, t } => {
                ticks += 1;
                if !layout.facilities.contains(&facility) || t >= config.time_units_per_day {
                    violations.push(format!("unexpected facility tick at {facility}, t={t}"));
                }
            }
        }
    }

    for r in requests {
        match outcomes_seen.get(&r.id).copied().unwrap_or(0) {
            1 => {}
            n => violations.push(format!("customer {} has {n} outcomes", r.id)),
        }
    }
    if ticks != layout.len() * config.time_units_per_day as usize {
        violations.push(format!(
            "{ticks} facility ticks, expected {}",
            layout.len() * config.time_units_per_day as usize
        ));
    }

    for (vehicle, mut spans) in trips {
        spans.sort_unstable();
        for pair in spans.windows(2) {
            if pair[1].0 < pair[0].1 {
                violations.push(format!(
                    "vehicle {vehicle} dispatched at t={} while busy until t={}",
                    pair[1].0, pair[0].1
                ));
            }
        }
    }

    let end = &outcome.final_state;
    if let Err(msg) = end.check_conservation() {
        violations.push(msg);
    }
    for v in &end.vehicles {
        if !v.is_idle() || homes.get(v.id as usize) != Some(&v.home_facility) {
            violations.push(format!("vehicle {} ends the day {:?} away from home", v.id, v.status));
        }
    }
    for ((facility, idle), &initial) in end.idle_count_per_facility().zip(&layout.initial_vehicles) {
        if idle != initial as usize {
            violations.push(format!("facility {facility} ends with {idle} idle, started with {initial}"));
        }
    }

    let recomputed = outcome.log.recompute_ledger(&config.costs);
    if recomputed != outcome.ledger {
        violations.push(format!(
            "ledger {:?} differs from the log's recomputed {:?}",
            outcome.ledger, recomputed
        ));
    }
    AuditReport { violations }
}
