//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero when any fails.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use avpool_core::engine::{audit_day, bucket_by_time, Event, NearestAvailable};
use avpool_core::experiments::{run_sweep, write_rows_csv, SweepDimension, SweepRow, SweepSpec};
use avpool_core::milp::{build_model, encode_simulation, validate_solution, Rational};
use avpool_core::oracle::{exact_min_cost, random_tiny_instance};
use avpool_core::{
    canonical_layout, generate_day_demand, manhattan_distance, random_layout, run_day, travel_time, CostParams,
    FacilityLayout, GridCoord, PatienceRange, ScenarioConfig, Simulator, CANONICAL_FACILITY_COUNTS,
};

const NUM_DAYS: u32 = 100;
const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
/// Criterion 1: layouts with k >= 9 may differ by at most this fraction of
/// the smallest of them.
const STABLE_SPREAD: (u64, u64) = (15, 100);
const STABLE_FROM_K: usize = 9;
const SWEEP_TIME_LIMIT_SECS: f64 = 300.0;
/// Criterion 2: Spearman correlation of k and mean cost must not exceed this.
const SPEARMAN_MAX: f64 = -0.9;
const PATIENT: u32 = 10;
const DEMAND_RATES: [f64; 6] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30];
const ORACLE_INSTANCES: u64 = 100;
const MILP_DAYS: u64 = 20;
const MILP_MAX_SIDE: u32 = 4;
const MILP_MAX_HORIZON: u32 = 20;
const INVARIANT_DAYS: u64 = 1000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn sweep(base: ScenarioConfig, dimension: SweepDimension, layouts: Vec<usize>) -> Vec<SweepRow> {
    run_sweep(&SweepSpec { base, dimension, layouts, num_days: NUM_DAYS, seeds: SEEDS.to_vec(), output: None })
        .expect("sweep runs")
}

/// Mean daily total over every seed, per layout.
fn pooled_means(rows: &[SweepRow]) -> BTreeMap<usize, Ratio<u64>> {
    let mut sums: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    for row in rows {
        let e = sums.entry(row.layout_k).or_default();
        e.0 += row.result.totals.total();
        e.1 += row.result.num_days() as u64;
    }
    sums.into_iter().map(|(k, (s, n))| (k, Ratio::new(s, n))).collect()
}

fn layout_sweep(patience: u32, ks: &[usize]) -> BTreeMap<usize, Ratio<u64>> {
    let base = ScenarioConfig { patience_radius: patience, ..ScenarioConfig::real_case() };
    pooled_means(&sweep(base, SweepDimension::Layout(ks.to_vec()), vec![]))
}

fn f(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn show(means: &BTreeMap<usize, Ratio<u64>>) -> String {
    means.iter().map(|(k, m)| format!("k{k}={:.1}", f(*m))).collect::<Vec<_>>().join(" ")
}

/// Average ranks, ties sharing the mean of their positions.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        for &o in &order[i..=j] {
            out[o] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    out
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (a, b) = (ranks(xs), ranks(ys));
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn sweep_csv(rows: &[SweepRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_rows_csv(&mut buf, rows).expect("csv to memory");
    buf
}

fn criterion_1_and_8() -> (Verdict, Verdict) {
    let base = ScenarioConfig::real_case();
    let dim = SweepDimension::Layout(CANONICAL_FACILITY_COUNTS.to_vec());
    let start = Instant::now();
    let rows = sweep(base.clone(), dim.clone(), vec![]);
    let secs = start.elapsed().as_secs_f64();
    let means = pooled_means(&rows);
    let stable: Vec<Ratio<u64>> = means.iter().filter(|(k, _)| **k >= STABLE_FROM_K).map(|(_, m)| *m).collect();
    let (lo, hi) = (*stable.iter().min().unwrap(), *stable.iter().max().unwrap());
    let (num, den) = STABLE_SPREAD;
    let within = (hi - lo) * den <= lo * num;
    let improves = means[&9] < means[&1];
    let c1 = verdict(
        improves && within && secs < SWEEP_TIME_LIMIT_SECS,
        format!(
            "k9 < k1: {improves}; k>=9 spread {:.3} <= {:.2}: {within}; sweep {secs:.1}s; {}",
            f((hi - lo) / lo),
            num as f64 / den as f64,
            show(&means)
        ),
    );
    let again = sweep(base, dim, vec![]);
    let (a, b) = (sweep_csv(&rows), sweep_csv(&again));
    let c8 = verdict(a == b, format!("{} CSV bytes, identical: {}", a.len(), a == b));
    (c1, c8)
}

fn criterion_2() -> Verdict {
    let means = layout_sweep(0, &CANONICAL_FACILITY_COUNTS);
    let ks: Vec<f64> = means.keys().map(|&k| k as f64).collect();
    let costs: Vec<f64> = means.values().map(|&m| f(m)).collect();
    let rho = spearman(&ks, &costs);
    verdict(rho <= SPEARMAN_MAX, format!("spearman {rho:.3} <= {SPEARMAN_MAX}; {}", show(&means)))
}

fn criterion_3() -> Verdict {
    let impatient = layout_sweep(0, &CANONICAL_FACILITY_COUNTS);
    let worst = impatient.values().max().unwrap();
    let a = impatient[&1] == *worst;
    let patient = layout_sweep(PATIENT, &CANONICAL_FACILITY_COUNTS);
    let b = patient[&1] <= patient[&49];
    verdict(
        a && b,
        format!(
            "patience 0, k1 is max: {a}; patience {PATIENT}, k1 {:.1} <= k49 {:.1}: {b}",
            f(patient[&1]),
            f(patient[&49])
        ),
    )
}

fn criterion_4() -> Verdict {
    let means = layout_sweep(PATIENT, &[2, 3, 4, 5, 6, 7]);
    let avg = |ks: &[usize]| ks.iter().map(|k| means[k]).sum::<Ratio<u64>>() / ks.len() as u64;
    let (low, high) = (avg(&[2, 3, 4]), avg(&[5, 6, 7]));
    verdict(high < low, format!("mean k5-7 {:.1} < mean k2-4 {:.1}; {}", f(high), f(low), show(&means)))
}

fn criterion_5() -> Verdict {
    let rows = sweep(
        ScenarioConfig::real_case(),
        SweepDimension::DemandProbability(DEMAND_RATES.to_vec()),
        CANONICAL_FACILITY_COUNTS.to_vec(),
    );
    let mut series: BTreeMap<(usize, u64), Vec<(f64, &SweepRow)>> = BTreeMap::new();
    for row in &rows {
        let p: f64 = row.sweep_value.parse().unwrap();
        series.entry((row.layout_k, row.seed)).or_default().push((p, row));
    }
    let mut not_increasing = Vec::new();
    let mut share_not_rising = Vec::new();
    for ((k, seed), mut s) in series {
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        if s.windows(2).any(|w| w[1].1.mean_total() <= w[0].1.mean_total()) {
            not_increasing.push(format!("k{k}/s{seed}"));
        }
        let share = |row: &SweepRow| Ratio::new(row.result.totals.lost_sale_cost, row.result.totals.total().max(1));
        if share(s.last().unwrap().1) <= share(s[0].1) {
            share_not_rising.push(format!("k{k}/s{seed}"));
        }
    }
    let n = CANONICAL_FACILITY_COUNTS.len() * SEEDS.len();
    verdict(
        not_increasing.is_empty() && share_not_rising.is_empty(),
        format!(
            "cost strictly increasing in p on {}/{n} (layout, seed) series (failing: {}); lost share rises on {}/{n} (failing: {})",
            n - not_increasing.len(),
            not_increasing.join(","),
            n - share_not_rising.len(),
            share_not_rising.join(",")
        ),
    )
}

fn criterion_6() -> Verdict {
    let mut below = Vec::new();
    let mut equal = 0;
    for seed in 0..ORACLE_INSTANCES {
        let inst = random_tiny_instance(seed);
        let heuristic = run_day(inst.config(), inst.layout(), inst.requests()).unwrap().ledger.total();
        let optimal = exact_min_cost(&inst).unwrap().cost;
        if heuristic < optimal {
            below.push(seed);
        }
        equal += usize::from(heuristic == optimal);
    }
    verdict(
        below.is_empty() && equal >= 1,
        format!("{ORACLE_INSTANCES} instances, heuristic below optimum on {below:?}, optimal on {equal}"),
    )
}

fn small_day(seed: u64) -> (ScenarioConfig, FacilityLayout, Vec<avpool_core::CustomerRequest>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.gen_range(2..=MILP_MAX_SIDE);
    let h = rng.gen_range(2..=MILP_MAX_SIDE);
    let config = ScenarioConfig {
        grid_width: w,
        grid_height: h,
        fleet_size: rng.gen_range(1..=6),
        customers_per_day: rng.gen_range(1..=15),
        time_units_per_day: rng.gen_range(5..=MILP_MAX_HORIZON),
        demand_probability: rng.gen_range(0.05..0.4),
        patience_radius: rng.gen_range(0..=4),
        vehicle_speed: 1,
        costs: CostParams::new(rng.gen_range(5..=60), rng.gen_range(1..=5), rng.gen_range(0..=15)),
        facility_capacity: w * h,
        patience_override: None,
    };
    let k = rng.gen_range(1..=config.fleet_size.min(w * h)) as usize;
    let layout = random_layout(k, &config, rng.gen()).unwrap();
    let requests = generate_day_demand(&config, rng.gen(), 0);
    (config, layout, requests)
}

fn criterion_7() -> Verdict {
    let mut failures = Vec::new();
    let mut customers = 0;
    for seed in 0..MILP_DAYS {
        let (config, layout, requests) = small_day(seed);
        customers += requests.len();
        let outcome = run_day(&config, &layout, &requests).unwrap();
        let (inst, assignment) = encode_simulation(&config, &layout, &requests, &outcome.log).unwrap();
        let report = validate_solution(&build_model(&inst).unwrap(), &assignment);
        let ledger = Rational::from_integer(outcome.ledger.total().into());
        if !report.feasible || report.objective != ledger {
            failures.push(format!("day {seed}: feasible {} objective {} ledger {ledger}", report.feasible, report.objective));
        }
    }
    verdict(
        failures.is_empty(),
        format!("{MILP_DAYS} days, {customers} customers, mismatches: [{}]", failures.join("; ")),
    )
}

fn random_real_scale_day(seed: u64) -> (ScenarioConfig, FacilityLayout, Vec<avpool_core::CustomerRequest>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs = if rng.gen_bool(0.5) {
        CostParams::new(50, 1, 0)
    } else {
        CostParams::new(5, 5, [5, 10, 15][rng.gen_range(0..3)])
    };
    let patience_override = rng.gen_bool(0.3).then(|| {
        let min = rng.gen_range(1..=5);
        PatienceRange { min, max: rng.gen_range(min..=10) }
    });
    let config = ScenarioConfig {
        costs,
        patience_radius: rng.gen_range(0..=10),
        patience_override,
        demand_probability: DEMAND_RATES[rng.gen_range(0..DEMAND_RATES.len())],
        ..ScenarioConfig::real_case()
    };
    let k = rng.gen_range(1..=49);
    let layout = if rng.gen_bool(0.5) {
        canonical_layout(k, &config).unwrap()
    } else {
        random_layout(k, &config, rng.gen()).unwrap()
    };
    let requests = generate_day_demand(&config, rng.gen(), seed);
    (config, layout, requests)
}

/// Steps one day unit by unit, checking every invariant after each step
/// against values computed here from first principles.
fn check_day(seed: u64) -> Result<(), String> {
    let (config, layout, requests) = random_real_scale_day(seed);
    let costs = config.costs;
    let speed = config.vehicle_speed;
    let by_id: HashMap<u32, _> = requests.iter().map(|r| (r.id, *r)).collect();
    let homes: Vec<GridCoord> = layout
        .facilities
        .iter()
        .zip(&layout.initial_vehicles)
        .flat_map(|(&f, &n)| std::iter::repeat_n(f, n as usize))
        .collect();
    let mut busy_until = vec![0u32; homes.len()];
    let mut decided = HashSet::new();

    let mut sim = Simulator::new(&config, &layout).map_err(|e| e.to_string())?;
    let buckets = bucket_by_time(&requests, config.time_units_per_day).map_err(|e| e.to_string())?;
    let mut seen = 0;
    let mut expected = 0u64;
    loop {
        let t = sim.clock();
        if t >= config.time_units_per_day && !sim.has_busy_vehicles() {
            break;
        }
        let arrivals = buckets.get(t as usize).map_or(&[][..], |b| b.as_slice());
        sim.step(arrivals, &mut NearestAvailable).map_err(|e| e.to_string())?;
        sim.state().check_conservation().map_err(|e| format!("t={t}: {e}"))?;

        let events = &sim.log().unwrap().events;
        for event in &events[seen..] {
            match *event {
                Event::LostSale { customer, .. } => {
                    expected += costs.lost_sale_per_unit;
                    if !decided.insert(customer) {
                        return Err(format!("customer {customer} decided twice"));
                    }
                }
                Event::ServedSameLocation { customer, vehicle, origin, destination, t: at } => {
                    let v = vehicle as usize;
                    if homes[v] != origin || busy_until[v] > at || !decided.insert(customer) {
                        return Err(format!("bad same-location service of {customer} by {vehicle} at {at}"));
                    }
                    expected += costs.travel_per_block * 2 * u64::from(manhattan_distance(origin, destination));
                    busy_until[v] = at + travel_time(origin, destination, speed) + travel_time(destination, origin, speed);
                }
                Event::ServedCrossLocation { customer, vehicle, vehicle_facility: u, origin, destination, t: at } => {
                    let v = vehicle as usize;
                    let reach = manhattan_distance(u, origin);
                    if homes[v] != u || busy_until[v] > at || reach > by_id[&customer].patience_radius || !decided.insert(customer) {
                        return Err(format!("bad cross-location service of {customer} by {vehicle} at {at}"));
                    }
                    let blocks = reach + manhattan_distance(origin, destination) + manhattan_distance(destination, u);
                    expected += costs.travel_per_block * u64::from(blocks);
                    busy_until[v] = at
                        + travel_time(u, origin, speed)
                        + travel_time(origin, destination, speed)
                        + travel_time(destination, u, speed);
                }
                Event::FacilityOpenTick { t: at, .. } => {
                    if at >= config.time_units_per_day {
                        return Err(format!("facility charged after the day at {at}"));
                    }
                    expected += costs.facility_open_per_time_unit;
                }
            }
        }
        seen = events.len();
        if sim.ledger().total() != expected {
            return Err(format!("t={t}: ledger {} but events cost {expected}", sim.ledger().total()));
        }
    }

    if decided.len() != requests.len() {
        return Err(format!("{} of {} customers decided", decided.len(), requests.len()));
    }
    for (v, vehicle) in sim.state().vehicles.iter().enumerate() {
        if !vehicle.is_idle() || vehicle.home_facility != homes[v] {
            return Err(format!("vehicle {v} not idle at home at day end"));
        }
    }
    let fast = run_day(&config, &layout, &requests).map_err(|e| e.to_string())?;
    if fast.ledger != sim.ledger() {
        return Err("stepped and fast-forwarded days disagree".into());
    }
    let audit = audit_day(&config, &layout, &requests, &fast);
    if !audit.is_clean() {
        return Err(format!("audit: {:?}", audit.violations));
    }
    Ok(())
}

fn criterion_9() -> Verdict {
    use rayon::prelude::*;
    let failures: Vec<String> = (0..INVARIANT_DAYS)
        .into_par_iter()
        .filter_map(|seed| check_day(seed).err().map(|e| format!("day {seed}: {e}")))
        .collect();
    verdict(
        failures.is_empty(),
        format!("{INVARIANT_DAYS} days, {} with violations {:?}", failures.len(), failures.iter().take(3).collect::<Vec<_>>()),
    )
}

fn main() {
    let start = Instant::now();
    let (c1, c8) = criterion_1_and_8();
    let results = [
        ("1 diminishing returns", c1),
        ("2 impatient customers favor dispersion", criterion_2()),
        ("3 patient customers favor pooling", criterion_3()),
        ("4 patience-10 non-monotonicity", criterion_4()),
        ("5 demand sweep", criterion_5()),
        ("6 oracle bound", criterion_6()),
        ("7 MILP cross-validation", criterion_7()),
        ("8 determinism", c8),
        ("9 invariant suite", criterion_9()),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
