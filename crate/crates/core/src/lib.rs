//! Autonomous-vehicle pooling on a grid city.
//!
//! The crate simulates a fleet stationed at facilities on a block grid,
//! matching arriving customers to idle vehicles under per-customer patience
//! radii. Around the simulator sit a symbolic mixed-integer model of the
//! same system (built, exported as LP text and checked against candidate
//! solutions), an exhaustive optimizer for toy instances, and a sweep
//! harness for layout, demand and patience studies.

pub mod config;
pub mod demand;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod layout;
pub mod milp;
pub mod oracle;

pub use config::{CostParams, PatienceRange, ScenarioConfig};
pub use demand::{generate_day_demand, CustomerId, CustomerRequest};
pub use engine::{
    match_customer, run_day, run_day_ledger, run_scenario, CostLedger, DayOutcome, EventLog,
    MatchDecision, ScenarioResult, Simulator,
};
pub use error::{Error, Result};
pub use grid::{manhattan_distance, travel_time, GridCoord};
pub use layout::{canonical_layout, random_layout, FacilityLayout, CANONICAL_FACILITY_COUNTS};
