//! Sweep harness for the layout, demand-rate and patience studies.

use std::io::Write;
use std::path::PathBuf;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::engine::{run_scenario, ScenarioResult};
use crate::error::{Error, Result};
use crate::layout::canonical_layout;

#[derive(Debug, Clone, PartialEq)]
pub enum SweepDimension {
    /// Canonical facility counts; each value is its own layout.
    Layout(Vec<usize>),
    DemandProbability(Vec<f64>),
    Patience(Vec<u32>),
}

impl SweepDimension {
    pub fn name(&self) -> &'static str {
        match self {
            SweepDimension::Layout(_) => "layout",
            SweepDimension::DemandProbability(_) => "demand_probability",
            SweepDimension::Patience(_) => "patience",
        }
    }

    fn len(&self) -> usize {
        match self {
            SweepDimension::Layout(v) => v.len(),
            SweepDimension::DemandProbability(v) => v.len(),
            SweepDimension::Patience(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub dimension: SweepDimension,
    /// Canonical facility counts crossed with the swept values; unused for
    /// layout sweeps.
    pub layouts: Vec<usize>,
    pub num_days: u32,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimension.len() == 0 {
            return Err(Error::InvalidSweep("swept value list is empty".into()));
        }
        if !matches!(self.dimension, SweepDimension::Layout(_)) && self.layouts.is_empty() {
            return Err(Error::InvalidSweep("layout list is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidSweep("seed list is empty".into()));
        }
        if self.num_days == 0 {
            return Err(Error::InvalidSweep("num_days must be at least 1".into()));
        }
        self.base.validate()
    }

    /// (swept value label, config, layout k) per row, in output order, before
    /// crossing with seeds.
    fn cells(&self) -> Vec<(String, ScenarioConfig, usize)> {
        let base = &self.base;
        match &self.dimension {
            SweepDimension::Layout(ks) => ks.iter().map(|&k| (k.to_string(), base.clone(), k)).collect(),
            SweepDimension::DemandProbability(ps) => ps
                .iter()
                .flat_map(|&p| {
                    self.layouts.iter().map(move |&k| {
                        let config = ScenarioConfig { demand_probability: p, ..base.clone() };
                        (p.to_string(), config, k)
                    })
                })
                .collect(),
            SweepDimension::Patience(rs) => rs
                .iter()
                .flat_map(|&r| {
                    self.layouts.iter().map(move |&k| {
                        let config = ScenarioConfig { patience_radius: r, ..base.clone() };
                        (r.to_string(), config, k)
                    })
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_dim: &'static str,
    pub sweep_value: String,
    pub layout_k: usize,
    pub seed: u64,
    pub result: ScenarioResult,
}

impl SweepRow {
    pub fn mean_total(&self) -> Ratio<u64> {
        self.result.mean_total()
    }

    pub fn mean_total_f64(&self) -> f64 {
        ratio_to_f64(self.result.mean_total())
    }

    pub fn lost_share(&self) -> f64 {
        self.result.lost_share()
    }
}

pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Runs every (swept value, layout, seed) cell, in parallel on the current
/// rayon pool, returning rows in that nested order. Writes the CSV when the
/// spec names an output path.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let jobs: Vec<(String, ScenarioConfig, usize, u64)> = spec
        .cells()
        .into_iter()
        .flat_map(|(label, config, k)| spec.seeds.iter().map(move |&s| (label.clone(), config.clone(), k, s)))
        .collect();
    let rows = jobs
        .into_par_iter()
        .map(|(sweep_value, config, k, seed)| {
            let layout = canonical_layout(k, &config)?;
            let result = run_scenario(&config, &layout, spec.num_days, seed)?;
            Ok(SweepRow {
                sweep_dim: spec.dimension.name(),
                sweep_value,
                layout_k: k,
                seed,
                result,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = &spec.output {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        write_rows_csv(std::fs::File::create(path)?, &rows)?;
    }
    Ok(rows)
}

pub fn write_rows_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "sweep_dim",
        "sweep_value",
        "layout_k",
        "seed",
        "mean_total",
        "mean_lost",
        "mean_travel",
        "mean_facility",
        "lost_share",
    ])?;
    for row in rows {
        let r = &row.result;
        out.write_record([
            row.sweep_dim.to_string(),
            row.sweep_value.clone(),
            row.layout_k.to_string(),
            row.seed.to_string(),
            ratio_to_f64(r.mean_total()).to_string(),
            ratio_to_f64(r.mean_lost()).to_string(),
            ratio_to_f64(r.mean_travel()).to_string(),
            ratio_to_f64(r.mean_facility()).to_string(),
            r.lost_share().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Each value divided by the series maximum; all zeros when the maximum is
/// not positive.
pub fn normalize(series: &[f64]) -> Vec<f64> {
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max > 0.0 {
        series.iter().map(|v| v / max).collect()
    } else {
        vec![0.0; series.len()]
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "series lengths differ");
    let (rx, ry) = (ranks(xs), ranks(ys));
    pearson(&rx, &ry)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx.sqrt() * vy.sqrt())
}

/// Direction a cost series is expected to move along the swept dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    NonDecreasing,
    NonIncreasing,
}

/// Pairs of consecutive swept values (per layout and seed) where mean total
/// cost moves against `trend`. Rows must come from one sweep in its output
/// order.
pub fn monotonicity_violations(rows: &[SweepRow], trend: Trend) -> Vec<(usize, u64, String, String)> {
    let mut keys: Vec<(usize, u64)> = rows.iter().map(|r| (r.layout_k, r.seed)).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut out = Vec::new();
    for (k, seed) in keys {
        let series: Vec<&SweepRow> = rows.iter().filter(|r| r.layout_k == k && r.seed == seed).collect();
        for pair in series.windows(2) {
            let (a, b) = (pair[0].mean_total(), pair[1].mean_total());
            let bad = match trend {
                Trend::NonDecreasing => b < a,
                Trend::NonIncreasing => b > a,
            };
            if bad {
                out.push((k, seed, pair[0].sweep_value.clone(), pair[1].sweep_value.clone()));
            }
        }
    }
    out
}
