use super::*;
use crate::grid::GridCoord;
use crate::layout::canonical_layout;

fn c(x: u32, y: u32) -> GridCoord {
    GridCoord::new(x, y)
}

fn customer(id: u32, origin: GridCoord, destination: GridCoord, t: u32, patience: u32) -> CustomerRequest {
    CustomerRequest { id, origin, destination, arrival_time: t, patience_radius: patience }
}

fn config(costs: CostParams, fleet: u32) -> ScenarioConfig {
    ScenarioConfig { costs, fleet_size: fleet, ..ScenarioConfig::real_case() }
}

fn layout(entries: &[(GridCoord, u32)]) -> FacilityLayout {
    FacilityLayout {
        facilities: entries.iter().map(|e| e.0).collect(),
        initial_vehicles: entries.iter().map(|e| e.1).collect(),
    }
}

#[test]
fn match_prefers_vehicle_on_the_same_block() {
    let state = SystemState::new(&layout(&[(c(2, 2), 1), (c(2, 3), 1)]));
    let req = customer(0, c(2, 2), c(5, 5), 0, 3);
    assert_eq!(match_customer(&state, &req), MatchDecision::SameLocation);
}

#[test]
fn match_respects_patience_radius() {
    let state = SystemState::new(&layout(&[(c(0, 0), 1)]));
    let far = customer(0, c(2, 3), c(6, 6), 0, 3);
    assert_eq!(match_customer(&state, &far), MatchDecision::Lost);
    let near = customer(1, c(1, 1), c(6, 6), 0, 3);
    assert_eq!(match_customer(&state, &near), MatchDecision::CrossLocation(c(0, 0)));
}

#[test]
fn match_without_idle_vehicles_is_lost() {
    let state = SystemState::new(&layout(&[(c(0, 0), 0)]));
    let req = customer(0, c(0, 0), c(1, 0), 0, 10);
    assert_eq!(match_customer(&state, &req), MatchDecision::Lost);
}

#[test]
fn equidistant_facilities_break_ties_row_major() {
    // Both facilities are two blocks from (2,2); (2,0) comes first row-major.
    let state = SystemState::new(&layout(&[(c(0, 2), 1), (c(2, 0), 1)]));
    let req = customer(0, c(2, 2), c(6, 6), 0, 5);
    assert_eq!(match_customer(&state, &req), MatchDecision::CrossLocation(c(2, 0)));
}

#[test]
fn same_location_trip_costs_the_round_trip() {
    let cfg = config(CostParams::new(50, 5, 0), 1);
    let mut sim = Simulator::new(&cfg, &layout(&[(c(1, 1), 1)])).unwrap();
    sim.step(&[customer(0, c(1, 1), c(1, 4), 0, 0)], &mut NearestAvailable).unwrap();
    assert_eq!(sim.ledger().travel_cost, 30);
    let v = &sim.state().vehicles[0];
    assert_eq!(v.status, VehicleStatus::Serving { dropoff: 3 });
    assert_eq!(v.available_at, 6);
}

#[test]
fn cross_location_trip_costs_all_three_legs() {
    // d(u,v)=2, d(v,k)=3, d(k,u)=5
    let cfg = config(CostParams::new(50, 5, 0), 1);
    let mut sim = Simulator::new(&cfg, &layout(&[(c(0, 0), 1)])).unwrap();
    sim.step(&[customer(0, c(1, 1), c(3, 2), 0, 3)], &mut NearestAvailable).unwrap();
    assert_eq!(sim.ledger().travel_cost, 50);
    assert_eq!(sim.state().vehicles[0].available_at, 10);
    assert_eq!(sim.state().vehicles[0].status, VehicleStatus::TravelingToCustomer { arrival: 2 });

    let mut seen = vec![];
    while sim.clock() < 11 {
        seen.push(sim.state().vehicles[0].status);
        sim.step(&[], &mut NearestAvailable).unwrap();
        sim.state().check_conservation().unwrap();
    }
    assert!(seen.contains(&VehicleStatus::Serving { dropoff: 5 }));
    assert!(seen.contains(&VehicleStatus::ReturningToFacility { arrival: 10 }));
    // Idle again exactly when the round trip ends.
    assert_eq!(sim.state().vehicles[0].status, VehicleStatus::Idle);
    assert_eq!(sim.state().idle_count(c(0, 0)), 1);
}

#[test]
fn lost_sale_and_free_facilities() {
    let cfg = config(CostParams::new(50, 1, 0), 9);
    let nine = canonical_layout(9, &cfg).unwrap();
    let mut sim = Simulator::new(&cfg, &nine).unwrap();
    let corner = customer(0, c(0, 6), c(0, 5), 0, 0);
    let outcome = if nine.facilities.contains(&corner.origin) { 0 } else { 50 };
    sim.step(&[corner], &mut NearestAvailable).unwrap();
    assert_eq!(sim.ledger().lost_sale_cost, outcome);
    assert_eq!(sim.ledger().facility_cost, 0);
}

#[test]
fn vehicle_busy_until_round_trip_completes() {
    let cfg = config(CostParams::new(50, 1, 0), 1);
    let mut sim = Simulator::new(&cfg, &layout(&[(c(0, 0), 1)])).unwrap();
    sim.step(&[customer(0, c(0, 0), c(1, 0), 0, 0)], &mut NearestAvailable).unwrap();
    sim.step(&[customer(1, c(0, 0), c(1, 0), 1, 0)], &mut NearestAvailable).unwrap();
    sim.step(&[customer(2, c(0, 0), c(1, 0), 2, 0)], &mut NearestAvailable).unwrap();
    assert_eq!(sim.counts(), OutcomeCounts { served_same_location: 2, served_cross_location: 0, lost: 1 });
}

#[test]
fn less_patient_customers_are_served_first() {
    let cfg = config(CostParams::new(50, 1, 0), 1);
    let mut sim = Simulator::new(&cfg, &layout(&[(c(0, 0), 1)])).unwrap();
    let patient = customer(0, c(0, 0), c(3, 0), 0, 5);
    let impatient = customer(1, c(0, 0), c(0, 3), 0, 0);
    sim.step(&[patient, impatient], &mut NearestAvailable).unwrap();
    let log = sim.log().unwrap();
    assert!(log.iter().any(|e| matches!(e, Event::ServedSameLocation { customer: 1, .. })));
    assert!(log.iter().any(|e| matches!(e, Event::LostSale { customer: 0, .. })));
}

#[test]
fn stale_arrival_is_a_contract_violation() {
    let cfg = config(CostParams::new(50, 1, 0), 1);
    let mut sim = Simulator::new(&cfg, &layout(&[(c(0, 0), 1)])).unwrap();
    let err = sim.step(&[customer(0, c(0, 0), c(1, 0), 3, 0)], &mut NearestAvailable);
    assert!(matches!(err, Err(Error::ClockMismatch { customer: 0, arrival: 3, clock: 0 })));
}

#[test]
fn scripted_infeasible_dispatch_is_rejected() {
    struct Always(VehicleId);
    impl DispatchPolicy for Always {
        fn assign(&mut self, _: &SystemState, _: &CustomerRequest) -> Assignment {
            Assignment::Serve(self.0)
        }
    }
    let cfg = config(CostParams::new(50, 1, 0), 1);
    let mut sim = Simulator::new(&cfg, &layout(&[(c(0, 0), 1)])).unwrap();
    let err = sim.step(&[customer(0, c(5, 5), c(1, 0), 0, 2)], &mut Always(0));
    assert!(matches!(err, Err(Error::InfeasibleDispatch { .. })));
}

#[test]
fn empty_day_only_pays_for_facilities() {
    let cfg = config(CostParams::new(50, 1, 7), 49);
    let lay = canonical_layout(4, &cfg).unwrap();
    let out = run_day(&cfg, &lay, &[]).unwrap();
    assert_eq!(out.ledger, CostLedger { lost_sale_cost: 0, travel_cost: 0, facility_cost: 7 * 4 * 600 });
}

#[test]
fn single_co_located_trip_day() {
    let cfg = config(CostParams::new(50, 1, 0), 1);
    let out = run_day(&cfg, &layout(&[(c(3, 3), 1)]), &[customer(0, c(3, 3), c(3, 4), 10, 3)]).unwrap();
    assert_eq!(out.ledger.total(), 2);
}

#[test]
fn day_ends_with_every_vehicle_home() {
    let cfg = ScenarioConfig { demand_probability: 0.3, ..ScenarioConfig::real_case() };
    let lay = canonical_layout(6, &cfg).unwrap();
    // Late arrivals force trips past the horizon.
    let mut requests = generate_day_demand(&cfg, 5, 0);
    let late = customer(requests.len() as u32, c(3, 3), c(0, 0), 599, 3);
    requests.push(late);
    let out = run_day(&cfg, &lay, &requests).unwrap();
    assert!(out.final_state.clock > 600);
    assert_eq!(out.final_state.total_idle(), 49);
    assert!(out.final_state.vehicles.iter().all(Vehicle::is_idle));
    let report = audit_day(&cfg, &lay, &requests, &out);
    assert!(report.is_clean(), "{:?}", report.violations);
}

#[test]
fn scenario_cardinality_and_determinism() {
    let cfg = ScenarioConfig::real_case();
    let lay = canonical_layout(9, &cfg).unwrap();
    let a = run_scenario(&cfg, &lay, 100, 17).unwrap();
    assert_eq!(a.num_days(), 100);
    assert_eq!(a, run_scenario(&cfg, &lay, 100, 17).unwrap());
    assert!(run_scenario(&cfg, &lay, 0, 17).is_err());
}

#[test]
fn zero_rates_cost_nothing() {
    let cfg = config(CostParams::ZERO, 49);
    let lay = canonical_layout(13, &cfg).unwrap();
    let result = run_scenario(&cfg, &lay, 10, 3).unwrap();
    assert!(result.day_ledgers.iter().all(|l| *l == CostLedger::default()));
}

#[test]
fn ledger_only_path_agrees_with_logged_path() {
    let cfg = ScenarioConfig::random_case(10, 4);
    let lay = canonical_layout(6, &cfg).unwrap();
    for day in 0..5 {
        let requests = generate_day_demand(&cfg, 8, day);
        let logged = run_day(&cfg, &lay, &requests).unwrap();
        assert_eq!(logged.ledger, run_day_ledger(&cfg, &lay, &requests).unwrap());
        assert_eq!(logged.log.recompute_ledger(&cfg.costs), logged.ledger);
    }
}

#[test]
fn skipping_quiet_units_matches_stepping_every_unit() {
    let config = ScenarioConfig { costs: CostParams::new(50, 1, 3), ..ScenarioConfig::real_case() };
    for k in [1, 6, 49] {
        let layout = canonical_layout(k, &config).unwrap();
        for day in 0..5 {
            let requests = generate_day_demand(&config, 17, day);
            let mut fast = Simulator::new(&config, &layout).unwrap();
            fast.run_to_end(&requests, &mut NearestAvailable).unwrap();

            let mut slow = Simulator::new(&config, &layout).unwrap();
            let buckets = bucket_by_time(&requests, config.time_units_per_day).unwrap();
            for bucket in &buckets {
                slow.step(bucket, &mut NearestAvailable).unwrap();
            }
            while slow.has_busy_vehicles() {
                slow.step(&[], &mut NearestAvailable).unwrap();
            }
            assert_eq!(fast.ledger(), slow.ledger());
            assert_eq!(fast.log().unwrap().iter().collect::<Vec<_>>(), slow.log().unwrap().iter().collect::<Vec<_>>());
            assert_eq!(fast.clock(), slow.clock());
        }
    }
}

#[test]
fn wider_patience_can_lose_more_customers_on_a_single_day() {
    // A neighbour borrows the only vehicle for a long trip, so two later
    // customers on its own block go unserved. With zero patience the
    // neighbour is lost instead and both locals are served.
    let config = ScenarioConfig { costs: CostParams::new(50, 1, 0), fleet_size: 1, ..ScenarioConfig::real_case() };
    let layout = layout(&[(c(0, 0), 1)]);
    let day = |patience| {
        vec![
            customer(0, c(1, 0), c(6, 6), 0, patience),
            customer(1, c(0, 0), c(1, 0), 1, 0),
            customer(2, c(0, 0), c(1, 0), 3, 0),
        ]
    };
    assert_eq!(run_day(&config, &layout, &day(0)).unwrap().counts.lost, 1);
    assert_eq!(run_day(&config, &layout, &day(1)).unwrap().counts.lost, 2);
}

#[test]
fn zero_patience_loses_most_over_the_real_case() {
    let mut lost_at = Vec::new();
    for patience in 0..=10 {
        let config = ScenarioConfig { patience_radius: patience, ..ScenarioConfig::real_case() };
        let layout = canonical_layout(9, &config).unwrap();
        let lost: u32 = (0..20)
            .map(|d| run_day(&config, &layout, &generate_day_demand(&config, 5, d)).unwrap().counts.lost)
            .sum();
        lost_at.push(lost);
    }
    assert!(lost_at.iter().all(|&l| l <= lost_at[0]), "{lost_at:?}");
}
