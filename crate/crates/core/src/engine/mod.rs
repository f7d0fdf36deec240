//! Discrete-time dispatch simulation.
//!
//! Each time unit: vehicles finishing a phase move on, arriving customers
//! are matched in priority order (least patient first), costs accrue, and
//! the clock ticks. After the last time unit, in-flight trips finish with no
//! new arrivals and no further facility cost.

mod audit;
mod ledger;
mod log;
mod state;

pub use audit::{audit_day, AuditReport};
pub use ledger::{CostLedger, ScenarioResult};
pub use log::{Event, EventLog};
pub use state::{SystemState, TripPlan, Vehicle, VehicleId, VehicleStatus};

use crate::config::{CostParams, ScenarioConfig};
use crate::demand::{generate_day_demand, CustomerRequest};
use crate::error::{Error, Result};
use crate::grid::{manhattan_distance, travel_time};
use crate::layout::FacilityLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchDecision {
    SameLocation,
    CrossLocation(crate::grid::GridCoord),
    Lost,
}

/// Outcome chosen for one customer by a dispatch policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    Serve(VehicleId),
    Reject,
}

pub trait DispatchPolicy {
    fn assign(&mut self, state: &SystemState, customer: &CustomerRequest) -> Assignment;
}

/// Idle vehicle at the customer's own block if any, otherwise the nearest
/// open facility with an idle vehicle provided it lies within the
/// customer's patience radius.
pub fn match_customer(state: &SystemState, customer: &CustomerRequest) -> MatchDecision {
    if state.idle_count(customer.origin) > 0 {
        return MatchDecision::SameLocation;
    }
    // Row-major scan order with a strict comparison keeps the first of equidistant facilities.
    let nearest = state
        .facilities_with_idle()
        .map(|f| (manhattan_distance(f, customer.origin), f))
        .fold(None, |best: Option<(u32, _)>, cand| match best {
            Some(b) if b.0 <= cand.0 => Some(b),
            _ => Some(cand),
        });
    match nearest {
        Some((d, facility)) if d <= customer.patience_radius => MatchDecision::CrossLocation(facility),
        _ => MatchDecision::Lost,
    }
}

/// The dynamic matching heuristic.
#[derive(Debug, Default, Clone, Copy)]
pub struct NearestAvailable;

impl DispatchPolicy for NearestAvailable {
    fn assign(&mut self, state: &SystemState, customer: &CustomerRequest) -> Assignment {
        let facility = match match_customer(state, customer) {
            MatchDecision::SameLocation => customer.origin,
            MatchDecision::CrossLocation(f) => f,
            MatchDecision::Lost => return Assignment::Reject,
        };
        state
            .first_idle_at(facility)
            .map_or(Assignment::Reject, Assignment::Serve)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub served_same_location: u32,
    pub served_cross_location: u32,
    pub lost: u32,
}

/// One day of simulation driven step by step.
#[derive(Debug, Clone)]
pub struct Simulator {
    state: SystemState,
    costs: CostParams,
    speed: u32,
    horizon: u32,
    ledger: CostLedger,
    counts: OutcomeCounts,
    log: Option<EventLog>,
    busy: Vec<VehicleId>,
}

impl Simulator {
    pub fn new(config: &ScenarioConfig, layout: &FacilityLayout) -> Result<Self> {
        config.validate()?;
        layout.validate(config)?;
        Ok(Self {
            state: SystemState::new(layout),
            costs: config.costs,
            speed: config.vehicle_speed,
            horizon: config.time_units_per_day,
            ledger: CostLedger::default(),
            counts: OutcomeCounts::default(),
            log: Some(EventLog::default()),
            busy: Vec::new(),
        })
    }

    /// Skips event recording; only the ledger is kept.
    pub fn without_log(mut self) -> Self {
        self.log = None;
        self
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn ledger(&self) -> CostLedger {
        self.ledger
    }

    pub fn counts(&self) -> OutcomeCounts {
        self.counts
    }

    pub fn log(&self) -> Option<&EventLog> {
        self.log.as_ref()
    }

    pub fn clock(&self) -> u32 {
        self.state.clock
    }

    pub fn has_busy_vehicles(&self) -> bool {
        !self.busy.is_empty()
    }

    /// Advances one time unit with the given arrivals, all stamped with the
    /// current clock.
    pub fn step(&mut self, arrivals: &[CustomerRequest], policy: &mut impl DispatchPolicy) -> Result<()> {
        let clock = self.state.clock;
        if let Some(c) = arrivals.iter().find(|c| c.arrival_time != clock) {
            return Err(Error::ClockMismatch {
                customer: c.id,
                arrival: c.arrival_time,
                clock,
            });
        }

        self.release_vehicles();

        let mut queue: Vec<&CustomerRequest> = arrivals.iter().collect();
        queue.sort_by_key(|c| (c.patience_radius, c.id));
        for customer in queue {
            let assignment = policy.assign(&self.state, customer);
            self.apply(customer, assignment)?;
        }

        if clock < self.horizon {
            let open = self.state.open_facilities().len() as u64;
            self.ledger.facility_cost += self.costs.facility_open_per_time_unit * open;
            if let Some(log) = self.log.as_mut() {
                for &facility in self.state.open_facilities() {
                    log.push(Event::FacilityOpenTick { facility, t: clock });
                }
            }
        }
        self.state.clock += 1;
        Ok(())
    }

    /// Jumps over time units in which nothing can happen, charging only
    /// the facility cost. Same result as stepping with no arrivals.
    fn idle_until(&mut self, until: u32) {
        let until = until.min(self.horizon);
        let open = self.state.open_facilities().len() as u64;
        let units = u64::from(until.saturating_sub(self.state.clock));
        self.ledger.facility_cost += self.costs.facility_open_per_time_unit * open * units;
        if let Some(log) = self.log.as_mut() {
            for t in self.state.clock..until {
                for &facility in self.state.open_facilities() {
                    log.push(Event::FacilityOpenTick { facility, t });
                }
            }
        }
        self.state.clock = self.state.clock.max(until);
    }

    fn release_vehicles(&mut self) {
        let clock = self.state.clock;
        let mut i = 0;
        while i < self.busy.len() {
            let id = self.busy[i];
            if self.state.vehicles[id as usize].advance(clock) {
                self.state.park(id);
                self.busy.swap_remove(i);
            } else {
                i += 1;
            }
        }
    }

    fn apply(&mut self, customer: &CustomerRequest, assignment: Assignment) -> Result<()> {
        let t = self.state.clock;
        let vehicle_id = match assignment {
            Assignment::Reject => {
                self.ledger.lost_sale_cost += self.costs.lost_sale_per_unit;
                self.counts.lost += 1;
                if let Some(log) = self.log.as_mut() {
                    log.push(Event::LostSale { customer: customer.id, origin: customer.origin, t });
                }
                return Ok(());
            }
            Assignment::Serve(id) => id,
        };

        let infeasible = |reason: String| Error::InfeasibleDispatch { customer: customer.id, reason };
        let home = self
            .state
            .vehicles
            .get(vehicle_id as usize)
            .ok_or_else(|| infeasible(format!("no vehicle {vehicle_id}")))?
            .home_facility;
        let reach = manhattan_distance(home, customer.origin);
        if reach > customer.patience_radius {
            return Err(infeasible(format!(
                "vehicle {vehicle_id} is {reach} blocks away, patience is {}",
                customer.patience_radius
            )));
        }
        if !self.state.take_idle(vehicle_id) {
            return Err(infeasible(format!("vehicle {vehicle_id} is not idle")));
        }

        let (o, d) = (customer.origin, customer.destination);
        let pickup_at = t + travel_time(home, o, self.speed);
        let dropoff_at = pickup_at + travel_time(o, d, self.speed);
        let home_at = dropoff_at + travel_time(d, home, self.speed);
        let blocks = reach + manhattan_distance(o, d) + manhattan_distance(d, home);
        self.ledger.travel_cost += self.costs.travel_per_block * u64::from(blocks);

        let vehicle = &mut self.state.vehicles[vehicle_id as usize];
        vehicle.trip = Some(TripPlan {
            customer: customer.id,
            pickup_at,
            dropoff_at,
            home_at,
        });
        vehicle.status = VehicleStatus::TravelingToCustomer { arrival: pickup_at };
        vehicle.available_at = home_at;
        // A co-located vehicle picks up on the spot.
        vehicle.advance(t);
        self.busy.push(vehicle_id);

        let event = if home == o {
            self.counts.served_same_location += 1;
            Event::ServedSameLocation {
                customer: customer.id,
                vehicle: vehicle_id,
                origin: o,
                destination: d,
                t,
            }
        } else {
            self.counts.served_cross_location += 1;
            Event::ServedCrossLocation {
                customer: customer.id,
                vehicle: vehicle_id,
                vehicle_facility: home,
                origin: o,
                destination: d,
                t,
            }
        };
        if let Some(log) = self.log.as_mut() {
            log.push(event);
        }
        Ok(())
    }

    /// Runs the day's remaining time units and then lets in-flight trips
    /// finish.
    pub fn run_to_end(
        &mut self,
        requests: &[CustomerRequest],
        policy: &mut impl DispatchPolicy,
    ) -> Result<()> {
        let buckets = bucket_by_time(requests, self.horizon)?;
        while self.state.clock < self.horizon {
            let clock = self.state.clock as usize;
            if self.busy.is_empty() && buckets[clock].is_empty() {
                let next = buckets[clock..].iter().position(|b| !b.is_empty()).map_or(buckets.len(), |i| clock + i);
                self.idle_until(next as u32);
                continue;
            }
            self.step(&buckets[clock], policy)?;
        }
        while self.has_busy_vehicles() {
            self.step(&[], policy)?;
        }
        Ok(())
    }
}

/// Groups requests by arrival time unit; rejects requests outside the day.
pub fn bucket_by_time(requests: &[CustomerRequest], horizon: u32) -> Result<Vec<Vec<CustomerRequest>>> {
    let mut buckets = vec![Vec::new(); horizon as usize];
    for r in requests {
        let slot = buckets.get_mut(r.arrival_time as usize).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "customer {} arrives at t={} outside the {horizon}-unit day",
                r.id, r.arrival_time
            ))
        })?;
        slot.push(*r);
    }
    Ok(buckets)
}

#[derive(Debug, Clone)]
pub struct DayOutcome {
    pub log: EventLog,
    pub ledger: CostLedger,
    pub counts: OutcomeCounts,
    pub final_state: SystemState,
}

/// One day under the nearest-available heuristic, ending with every vehicle
/// idle at home.
pub fn run_day(
    config: &ScenarioConfig,
    layout: &FacilityLayout,
    day_requests: &[CustomerRequest],
) -> Result<DayOutcome> {
    run_day_with(config, layout, day_requests, &mut NearestAvailable)
}

pub fn run_day_with(
    config: &ScenarioConfig,
    layout: &FacilityLayout,
    day_requests: &[CustomerRequest],
    policy: &mut impl DispatchPolicy,
) -> Result<DayOutcome> {
    let mut sim = Simulator::new(config, layout)?;
    sim.run_to_end(day_requests, policy)?;
    Ok(DayOutcome {
        log: sim.log.take().unwrap_or_default(),
        ledger: sim.ledger,
        counts: sim.counts,
        final_state: sim.state,
    })
}

/// Ledger-only day, skipping the event log.
pub fn run_day_ledger(
    config: &ScenarioConfig,
    layout: &FacilityLayout,
    day_requests: &[CustomerRequest],
) -> Result<CostLedger> {
    let mut sim = Simulator::new(config, layout)?.without_log();
    sim.run_to_end(day_requests, &mut NearestAvailable)?;
    Ok(sim.ledger)
}

/// `num_days` independent days; day `d` draws demand from stream `d` of
/// `master_seed`.
pub fn run_scenario(
    config: &ScenarioConfig,
    layout: &FacilityLayout,
    num_days: u32,
    master_seed: u64,
) -> Result<ScenarioResult> {
    if num_days == 0 {
        return Err(Error::InvalidConfig("num_days must be at least 1".into()));
    }
    let days = (0..u64::from(num_days))
        .map(|day| {
            let requests = generate_day_demand(config, master_seed, day);
            run_day_ledger(config, layout, &requests)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioResult::from_days(days))
}

#[cfg(test)]
mod tests;
