//! `avpool`: simulate, sweep, export and check the dispatch model.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use avpool_core::experiments::{run_sweep, SweepDimension, SweepSpec};
use avpool_core::milp::{
    build_model, encode_simulation, export_lp, parse_lp, read_assignment, read_variable_map, validate_solution,
    variable_map, write_assignment, HorizonPolicy, ModelInstance,
};
use avpool_core::oracle::{compare, random_tiny_instance};
use avpool_core::{
    canonical_layout, generate_day_demand, run_day, FacilityLayout, ScenarioConfig, CANONICAL_FACILITY_COUNTS,
};

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "avpool", version, about = "Autonomous-vehicle pooling simulator and MILP tooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate days under the nearest-available heuristic.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 100)]
        days: u32,
        /// Output directory for events, day ledgers and the totals.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a layout, demand or patience sweep over canonical layouts.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        dimension: Dimension,
        /// Comma-separated swept values; defaults to the standard study.
        #[arg(long)]
        values: Option<String>,
        /// Comma-separated facility counts crossed with the swept values.
        #[arg(long)]
        layouts: Option<String>,
        #[arg(long, default_value = "0,1,2,3,4")]
        seeds: String,
        #[arg(long, default_value_t = 100)]
        days: u32,
        /// CSV file to write.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Write the mixed-integer model of one realized day.
    ExportMilp {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Day index whose demand is realized.
        #[arg(long, default_value_t = 0)]
        day: u64,
        /// Extend the horizon so trips started late in the day can finish.
        #[arg(long)]
        extend_horizon: bool,
        #[arg(long)]
        big_m: Option<i64>,
        /// Also write the heuristic's run of that day as an assignment. The
        /// horizon then follows the run.
        #[arg(long)]
        with_assignment: bool,
        #[arg(long, default_value = "milp")]
        out: PathBuf,
    },
    /// Check an assignment against an LP file.
    Validate {
        #[arg(long)]
        lp: PathBuf,
        #[arg(long)]
        var_map: Option<PathBuf>,
        #[arg(long)]
        assignment: PathBuf,
    },
    /// Compare the heuristic with exhaustive search on random tiny instances.
    OracleCompare {
        #[arg(long, default_value_t = 100)]
        instances: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Scenario JSON; the real-case parameters when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 9, conflicts_with = "layout_file")]
    layout_k: usize,
    #[arg(long)]
    layout_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Dimension {
    Layout,
    Demand,
    Patience,
}

fn load_config(path: Option<&Path>) -> anyhow::Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::load(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(ScenarioConfig::real_case()),
    }
}

impl ScenarioArgs {
    fn resolve(&self) -> anyhow::Result<(ScenarioConfig, FacilityLayout)> {
        let config = load_config(self.config.as_deref())?;
        let layout = match &self.layout_file {
            Some(p) => FacilityLayout::load(p).with_context(|| format!("reading layout {}", p.display()))?,
            None => canonical_layout(self.layout_k, &config)?,
        };
        layout.validate(&config)?;
        Ok((config, layout))
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> anyhow::Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| anyhow::anyhow!("bad {what} value {s:?}")))
        .collect()
}

fn simulate(scenario: &ScenarioArgs, days: u32, out: &Path) -> anyhow::Result<()> {
    let (config, layout) = scenario.resolve()?;
    if days == 0 {
        bail!("--days must be at least 1");
    }
    let events = out.join("events");
    fs::create_dir_all(&events)?;
    let mut table = String::from("day,lost_sale_cost,travel_cost,facility_cost,total\n");
    let mut totals = avpool_core::CostLedger::default();
    for day in 0..days {
        let requests = generate_day_demand(&config, scenario.seed, u64::from(day));
        let outcome = run_day(&config, &layout, &requests)?;
        outcome.log.write_csv(fs::File::create(events.join(format!("day_{day:03}.csv")))?)?;
        let l = outcome.ledger;
        writeln!(table, "{day},{},{},{},{}", l.lost_sale_cost, l.travel_cost, l.facility_cost, l.total())?;
        totals += l;
    }
    fs::write(out.join("day_ledgers.csv"), table)?;
    fs::write(out.join("ledger.json"), totals.to_json() + "\n")?;
    println!(
        "{days} days, total cost {} (lost {}, travel {}, facility {})",
        totals.total(),
        totals.lost_sale_cost,
        totals.travel_cost,
        totals.facility_cost
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    config: Option<&Path>,
    dimension: Dimension,
    values: Option<&str>,
    layouts: Option<&str>,
    seeds: &str,
    days: u32,
    out: &Path,
) -> anyhow::Result<()> {
    let base = load_config(config)?;
    let dimension = match dimension {
        Dimension::Layout => SweepDimension::Layout(match values {
            Some(v) => parse_list(v, "layout")?,
            None => CANONICAL_FACILITY_COUNTS.to_vec(),
        }),
        Dimension::Demand => SweepDimension::DemandProbability(match values {
            Some(v) => parse_list(v, "demand")?,
            None => vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30],
        }),
        Dimension::Patience => SweepDimension::Patience(match values {
            Some(v) => parse_list(v, "patience")?,
            None => (0..=10).collect(),
        }),
    };
    let spec = SweepSpec {
        base,
        dimension,
        layouts: match layouts {
            Some(v) => parse_list(v, "layout")?,
            None => CANONICAL_FACILITY_COUNTS.to_vec(),
        },
        num_days: days,
        seeds: parse_list(seeds, "seed")?,
        output: Some(out.to_path_buf()),
    };
    let threads = std::env::var("AVPOOL_THREADS").ok();
    let rows = match threads {
        Some(t) => {
            let n: usize = t.parse().context("AVPOOL_THREADS must be a positive integer")?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            pool.install(|| run_sweep(&spec))?
        }
        None => run_sweep(&spec)?,
    };
    println!("{} rows written to {}", rows.len(), out.display());
    Ok(())
}

fn export_milp(
    scenario: &ScenarioArgs,
    day: u64,
    extend_horizon: bool,
    big_m: Option<i64>,
    with_assignment: bool,
    out: &Path,
) -> anyhow::Result<()> {
    let (config, layout) = scenario.resolve()?;
    let requests = generate_day_demand(&config, scenario.seed, day);
    let (instance, assignment) = if with_assignment {
        let outcome = run_day(&config, &layout, &requests)?;
        let (instance, assignment) = encode_simulation(&config, &layout, &requests, &outcome.log)?;
        (instance, Some(assignment))
    } else {
        let horizon = if extend_horizon { HorizonPolicy::ExtendTail } else { HorizonPolicy::Strict };
        (ModelInstance::from_scenario(&config, &layout, &requests, horizon)?, None)
    };
    let instance = match big_m {
        Some(n) => instance.with_big_m(n),
        None => instance,
    };
    let model = build_model(&instance)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("model.lp"), export_lp(&model))?;
    fs::write(out.join("varmap.json"), variable_map(&model) + "\n")?;
    if let Some(assignment) = assignment {
        fs::write(out.join("assignment.json"), write_assignment(&assignment) + "\n")?;
    }
    println!(
        "{} customers, {} variables, {} rows written to {}",
        instance.customers.len(),
        model.variables.len(),
        model.constraints.len(),
        out.display()
    );
    Ok(())
}

/// Returns whether the assignment is feasible.
fn validate(lp: &Path, var_map: Option<&Path>, assignment: &Path) -> anyhow::Result<bool> {
    let model = parse_lp(&fs::read_to_string(lp).with_context(|| format!("reading {}", lp.display()))?)?;
    if let Some(path) = var_map {
        let map = read_variable_map(&fs::read_to_string(path)?)?;
        let declared: HashMap<String, _> = model.variables.iter().map(|v| (v.index.to_string(), v.index)).collect();
        if map.len() != declared.len() || map.iter().any(|(name, index)| declared.get(name) != Some(index)) {
            bail!("variable map {} does not match {}", path.display(), lp.display());
        }
    }
    let values = read_assignment(&fs::read_to_string(assignment)?)?;
    let report = validate_solution(&model, &values);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report.feasible)
}

fn oracle_compare(instances: u32, seed: u64) -> anyhow::Result<()> {
    if instances == 0 {
        bail!("--instances must be at least 1");
    }
    let mut gaps = Vec::with_capacity(instances as usize);
    for i in 0..u64::from(instances) {
        let instance = random_tiny_instance(seed.wrapping_add(i));
        let (heuristic, optimal) = compare(&instance)?;
        gaps.push(heuristic as i64 - optimal as i64);
    }
    let min = *gaps.iter().min().expect("at least one instance");
    let max = *gaps.iter().max().expect("at least one instance");
    let mean = gaps.iter().sum::<i64>() as f64 / gaps.len() as f64;
    let optimal = gaps.iter().filter(|&&g| g == 0).count();
    println!("instances {instances}");
    println!("heuristic optimal {optimal}");
    println!("gap min {min} mean {mean:.3} max {max}");
    if min < 0 {
        bail!("heuristic beat exhaustive search on some instance");
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Simulate { scenario, days, out } => simulate(&scenario, days, &out)?,
        Command::Sweep { config, dimension, values, layouts, seeds, days, out } => sweep(
            config.as_deref(),
            dimension,
            values.as_deref(),
            layouts.as_deref(),
            &seeds,
            days,
            &out,
        )?,
        Command::ExportMilp { scenario, day, extend_horizon, big_m, with_assignment, out } => {
            export_milp(&scenario, day, extend_horizon, big_m, with_assignment, &out)?
        }
        Command::Validate { lp, var_map, assignment } => {
            if !validate(&lp, var_map.as_deref(), &assignment)? {
                return Ok(ExitCode::from(EXIT_INFEASIBLE));
            }
        }
        Command::OracleCompare { instances, seed } => oracle_compare(instances, seed)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
