//! Facility placement and the initial split of the fleet across facilities.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::grid::{manhattan_distance, GridCoord};

/// Facility counts of the ten shipped layout scenarios, from one central
/// facility to one facility on every block.
pub const CANONICAL_FACILITY_COUNTS: [usize; 10] = [1, 2, 4, 6, 9, 13, 20, 30, 42, 49];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacilityLayout {
    pub facilities: Vec<GridCoord>,
    pub initial_vehicles: Vec<u32>,
}

impl FacilityLayout {
    /// Splits `fleet_size` as evenly as possible; the first facilities in
    /// placement order take the remainder.
    pub fn with_even_split(facilities: Vec<GridCoord>, fleet_size: u32) -> Self {
        let k = facilities.len() as u32;
        let initial_vehicles = (0..k)
            .map(|i| fleet_size / k + u32::from(i < fleet_size % k))
            .collect();
        Self {
            facilities,
            initial_vehicles,
        }
    }

    pub fn len(&self) -> usize {
        self.facilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facilities.is_empty()
    }

    pub fn total_vehicles(&self) -> u32 {
        self.initial_vehicles.iter().sum()
    }

    pub fn validate(&self, config: &ScenarioConfig) -> Result<()> {
        if self.facilities.len() != self.initial_vehicles.len() {
            return Err(Error::InvalidLayout(format!(
                "{} facilities but {} vehicle counts",
                self.facilities.len(),
                self.initial_vehicles.len()
            )));
        }
        let mut seen = HashSet::new();
        for &f in &self.facilities {
            config.check_on_grid(f)?;
            if !seen.insert(f) {
                return Err(Error::InvalidLayout(format!("facility {f} listed twice")));
            }
        }
        if self.total_vehicles() != config.fleet_size {
            return Err(Error::InvalidLayout(format!(
                "layout stations {} vehicles but the fleet has {}",
                self.total_vehicles(),
                config.fleet_size
            )));
        }
        if self.facilities.len() > config.facility_capacity as usize {
            return Err(Error::InvalidLayout(format!(
                "{} facilities exceed the capacity of {}",
                self.facilities.len(),
                config.facility_capacity
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&LayoutFile::from(self))?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: LayoutFile = serde_json::from_str(text)?;
        Ok(file.into())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutFile {
    facilities: Vec<FacilityEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FacilityEntry {
    x: u32,
    y: u32,
    vehicles: u32,
}

impl From<&FacilityLayout> for LayoutFile {
    fn from(layout: &FacilityLayout) -> Self {
        Self {
            facilities: layout
                .facilities
                .iter()
                .zip(&layout.initial_vehicles)
                .map(|(c, &vehicles)| FacilityEntry {
                    x: c.x,
                    y: c.y,
                    vehicles,
                })
                .collect(),
        }
    }
}

impl From<LayoutFile> for FacilityLayout {
    fn from(file: LayoutFile) -> Self {
        let (facilities, initial_vehicles) = file
            .facilities
            .into_iter()
            .map(|e| (GridCoord::new(e.x, e.y), e.vehicles))
            .unzip();
        Self {
            facilities,
            initial_vehicles,
        }
    }
}

fn check_count(k: usize, config: &ScenarioConfig) -> Result<()> {
    let blocks = config.block_count();
    if k == 0 || k > blocks {
        return Err(Error::FacilityCountOutOfRange { k, blocks });
    }
    Ok(())
}

/// Evenly spread layout of `k` facilities: the grid midpoint first, then the
/// block farthest (Manhattan) from everything chosen so far, ties going to the
/// earliest block in row-major order.
pub fn canonical_layout(k: usize, config: &ScenarioConfig) -> Result<FacilityLayout> {
    check_count(k, config)?;
    let candidates: Vec<GridCoord> = config.blocks().collect();
    let first = config.midpoint();
    let mut chosen = vec![first];
    let mut nearest: Vec<u32> = candidates
        .iter()
        .map(|&c| manhattan_distance(c, first))
        .collect();

    while chosen.len() < k {
        let mut best: Option<usize> = None;
        for (i, &d) in nearest.iter().enumerate() {
            // Chosen blocks sit at distance 0 and never win while any other block is left.
            if d == 0 {
                continue;
            }
            if best.is_none_or(|b| d > nearest[b]) {
                best = Some(i);
            }
        }
        let pick = candidates[best.expect("k never exceeds the block count")];
        chosen.push(pick);
        for (i, &c) in candidates.iter().enumerate() {
            nearest[i] = nearest[i].min(manhattan_distance(c, pick));
        }
    }
    Ok(FacilityLayout::with_even_split(chosen, config.fleet_size))
}

/// `k` distinct blocks sampled uniformly without replacement.
pub fn random_layout(k: usize, config: &ScenarioConfig, seed: u64) -> Result<FacilityLayout> {
    check_count(k, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let facilities = sample(&mut rng, config.block_count(), k)
        .into_iter()
        .map(|i| GridCoord::from_row_major(i, config.grid_width))
        .collect();
    Ok(FacilityLayout::with_even_split(facilities, config.fleet_size))
}
