//! Exhaustive search over dispatch decisions on toy instances.
//!
//! Every arriving customer is either rejected or served by any idle vehicle
//! whose facility lies within the customer's patience radius, in the
//! engine's own processing order. The cheapest complete sequence is the
//! optimum over the heuristic's action set, so it lower-bounds the
//! heuristic on the same day.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CostParams, ScenarioConfig};
use crate::demand::{CustomerId, CustomerRequest};
use crate::engine::{run_day, run_day_with, Assignment, DayOutcome, DispatchPolicy, SystemState};
use crate::error::{Error, Result};
use crate::grid::{manhattan_distance, GridCoord};
use crate::layout::{random_layout, FacilityLayout};

pub const MAX_GRID_SIDE: u32 = 3;
pub const MAX_HORIZON: u32 = 6;
pub const MAX_VEHICLES: u32 = 2;
pub const MAX_CUSTOMERS: usize = 3;

/// A day small enough to enumerate.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyInstance {
    config: ScenarioConfig,
    layout: FacilityLayout,
    requests: Vec<CustomerRequest>,
}

impl TinyInstance {
    pub fn new(config: ScenarioConfig, layout: FacilityLayout, requests: Vec<CustomerRequest>) -> Result<Self> {
        config.validate()?;
        layout.validate(&config)?;
        let over = |what: String| Err(Error::OracleBounds(what));
        if config.grid_width > MAX_GRID_SIDE || config.grid_height > MAX_GRID_SIDE {
            return over(format!("grid {}x{} exceeds 3x3", config.grid_width, config.grid_height));
        }
        if config.time_units_per_day > MAX_HORIZON {
            return over(format!("horizon {} exceeds {MAX_HORIZON}", config.time_units_per_day));
        }
        if layout.total_vehicles() > MAX_VEHICLES {
            return over(format!("{} vehicles exceed {MAX_VEHICLES}", layout.total_vehicles()));
        }
        if requests.len() > MAX_CUSTOMERS {
            return over(format!("{} customers exceed {MAX_CUSTOMERS}", requests.len()));
        }
        for r in &requests {
            r.validate(&config)?;
        }
        Ok(Self { config, layout, requests })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn layout(&self) -> &FacilityLayout {
        &self.layout
    }

    pub fn requests(&self) -> &[CustomerRequest] {
        &self.requests
    }
}

/// Replays a fixed list of decisions, one per customer in processing order.
/// Customers past the end of the script are rejected.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPolicy {
    script: Vec<(CustomerId, Assignment)>,
    next: usize,
    /// Feasible choices for the first customer past the script.
    frontier: Option<Vec<Assignment>>,
}

impl ScriptedPolicy {
    pub fn new(script: Vec<(CustomerId, Assignment)>) -> Self {
        Self { script, ..Self::default() }
    }
}

impl DispatchPolicy for ScriptedPolicy {
    fn assign(&mut self, state: &SystemState, customer: &CustomerRequest) -> Assignment {
        let i = self.next;
        self.next += 1;
        if let Some(&(id, choice)) = self.script.get(i) {
            debug_assert_eq!(id, customer.id, "script out of step with the engine");
            return choice;
        }
        if i == self.script.len() {
            self.frontier = Some(feasible_choices(state, customer));
        }
        Assignment::Reject
    }
}

/// Every idle vehicle within reach, lowest id first, then rejection.
pub fn feasible_choices(state: &SystemState, customer: &CustomerRequest) -> Vec<Assignment> {
    state
        .vehicles
        .iter()
        .filter(|v| v.is_idle() && manhattan_distance(v.home_facility, customer.origin) <= customer.patience_radius)
        .map(|v| Assignment::Serve(v.id))
        .chain(std::iter::once(Assignment::Reject))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub cost: u64,
    /// Decisions in processing order.
    pub trace: Vec<(CustomerId, Assignment)>,
    /// Complete decision sequences evaluated.
    pub sequences: u64,
}

/// Minimum total cost over all feasible decision sequences. Ties keep the
/// first sequence found, serving before rejecting and lower vehicle ids
/// first.
pub fn exact_min_cost(instance: &TinyInstance) -> Result<OracleSolution> {
    let mut best: Option<OracleSolution> = None;
    let mut sequences = 0;
    let mut stack = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        let mut policy = ScriptedPolicy::new(prefix.clone());
        let outcome = run_day_with(&instance.config, &instance.layout, &instance.requests, &mut policy)?;
        match policy.frontier {
            Some(choices) => {
                let id = processing_order(&instance.requests)[prefix.len()];
                // Reverse so the first choice is explored first.
                for choice in choices.into_iter().rev() {
                    let mut next = prefix.clone();
                    next.push((id, choice));
                    stack.push(next);
                }
            }
            None => {
                sequences += 1;
                let cost = outcome.ledger.total();
                if best.as_ref().is_none_or(|b| cost < b.cost) {
                    best = Some(OracleSolution { cost, trace: prefix, sequences: 0 });
                }
            }
        }
    }
    let mut best = best.expect("the all-reject sequence always completes");
    best.sequences = sequences;
    Ok(best)
}

/// Customer ids in the order the engine decides them.
pub fn processing_order(requests: &[CustomerRequest]) -> Vec<CustomerId> {
    let mut order: Vec<_> = requests.iter().map(|r| (r.arrival_time, r.patience_radius, r.id)).collect();
    order.sort_unstable();
    order.into_iter().map(|k| k.2).collect()
}

/// Runs `trace` through the engine, e.g. to encode an optimal solution.
pub fn replay(instance: &TinyInstance, trace: &[(CustomerId, Assignment)]) -> Result<DayOutcome> {
    run_day_with(&instance.config, &instance.layout, &instance.requests, &mut ScriptedPolicy::new(trace.to_vec()))
}

/// Heuristic and optimal cost of one instance.
pub fn compare(instance: &TinyInstance) -> Result<(u64, u64)> {
    let heuristic = run_day(&instance.config, &instance.layout, &instance.requests)?.ledger.total();
    Ok((heuristic, exact_min_cost(instance)?.cost))
}

/// A random instance within the oracle bounds.
pub fn random_tiny_instance(seed: u64) -> TinyInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.gen_range(1..=MAX_GRID_SIDE);
    let h = rng.gen_range(if w == 1 { 2 } else { 1 }..=MAX_GRID_SIDE);
    let blocks = w * h;
    let fleet = rng.gen_range(1..=MAX_VEHICLES);
    let horizon = rng.gen_range(1..=MAX_HORIZON);
    let n = rng.gen_range(0..=MAX_CUSTOMERS);
    let config = ScenarioConfig {
        grid_width: w,
        grid_height: h,
        fleet_size: fleet,
        customers_per_day: n as u32,
        time_units_per_day: horizon,
        demand_probability: 0.0,
        patience_radius: rng.gen_range(0..=w + h - 2),
        vehicle_speed: 1,
        costs: CostParams::new(rng.gen_range(1..=60), rng.gen_range(0..=5), rng.gen_range(0..=3)),
        facility_capacity: blocks,
        patience_override: None,
    };
    let k = rng.gen_range(1..=fleet.min(blocks)) as usize;
    let layout = random_layout(k, &config, rng.gen()).expect("k is within the grid");
    let block = |rng: &mut ChaCha8Rng| GridCoord::from_row_major(rng.gen_range(0..blocks as usize), w);
    let requests = (0..n as u32)
        .map(|id| {
            let origin = block(&mut rng);
            let destination = loop {
                let d = block(&mut rng);
                if d != origin {
                    break d;
                }
            };
            CustomerRequest {
                id,
                origin,
                destination,
                arrival_time: rng.gen_range(0..horizon),
                patience_radius: rng.gen_range(0..=config.patience_radius),
            }
        })
        .collect();
    TinyInstance::new(config, layout, requests).expect("generated within bounds")
}
