//! Shared fixtures for the criterion benches.

use avpool_core::{canonical_layout, generate_day_demand, CustomerRequest, FacilityLayout, ScenarioConfig};

/// Default scenario, the `k`-facility canonical layout and one day of demand.
pub fn day_fixture(k: usize, seed: u64) -> (ScenarioConfig, FacilityLayout, Vec<CustomerRequest>) {
    let config = ScenarioConfig::real_case();
    let layout = canonical_layout(k, &config).expect("k within the grid");
    let requests = generate_day_demand(&config, seed, 0);
    (config, layout, requests)
}
