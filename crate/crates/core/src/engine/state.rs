use std::collections::{BTreeSet, HashMap};

use crate::demand::CustomerId;
use crate::grid::GridCoord;
use crate::layout::FacilityLayout;

pub type VehicleId = u32;

/// Lifecycle of one vehicle. Timestamps mark when the current phase ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VehicleStatus {
    Idle,
    TravelingToCustomer { arrival: u32 },
    Serving { dropoff: u32 },
    ReturningToFacility { arrival: u32 },
}

/// Phase boundaries of one committed trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripPlan {
    pub customer: CustomerId,
    pub pickup_at: u32,
    pub dropoff_at: u32,
    pub home_at: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vehicle {
    pub id: VehicleId,
    pub home_facility: GridCoord,
    pub status: VehicleStatus,
    /// Next time the vehicle is idle at home.
    pub available_at: u32,
    pub trip: Option<TripPlan>,
}

impl Vehicle {
    pub fn is_idle(&self) -> bool {
        self.status == VehicleStatus::Idle
    }

    /// Moves through every phase ending at `clock`. Returns true when the
    /// vehicle became idle.
    pub(crate) fn advance(&mut self, clock: u32) -> bool {
        loop {
            let Some(plan) = self.trip else { return false };
            self.status = match self.status {
                VehicleStatus::TravelingToCustomer { arrival } if arrival == clock => {
                    VehicleStatus::Serving { dropoff: plan.dropoff_at }
                }
                VehicleStatus::Serving { dropoff } if dropoff == clock => {
                    VehicleStatus::ReturningToFacility { arrival: plan.home_at }
                }
                VehicleStatus::ReturningToFacility { arrival } if arrival == clock => {
                    self.trip = None;
                    self.status = VehicleStatus::Idle;
                    return true;
                }
                _ => return false,
            };
        }
    }
}

/// Snapshot of the fleet at `clock`.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub clock: u32,
    pub vehicles: Vec<Vehicle>,
    facilities: Vec<GridCoord>,
    facility_index: HashMap<GridCoord, usize>,
    /// Idle vehicles parked at each facility, lowest id first.
    idle: Vec<BTreeSet<VehicleId>>,
    /// Facility indices sorted row-major, for deterministic nearest-facility scans.
    scan_order: Vec<usize>,
}

impl SystemState {
    /// Every vehicle idle at its home facility at t = 0. Vehicle ids are
    /// assigned facility by facility in layout order.
    pub fn new(layout: &FacilityLayout) -> Self {
        let mut vehicles = Vec::with_capacity(layout.total_vehicles() as usize);
        let mut idle = vec![BTreeSet::new(); layout.len()];
        for (i, (&home, &count)) in layout.facilities.iter().zip(&layout.initial_vehicles).enumerate() {
            for _ in 0..count {
                let id = vehicles.len() as VehicleId;
                idle[i].insert(id);
                vehicles.push(Vehicle {
                    id,
                    home_facility: home,
                    status: VehicleStatus::Idle,
                    available_at: 0,
                    trip: None,
                });
            }
        }
        let facility_index = layout.facilities.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut scan_order: Vec<usize> = (0..layout.len()).collect();
        scan_order.sort_by_key(|&i| layout.facilities[i].row_major_key());
        Self {
            clock: 0,
            vehicles,
            facilities: layout.facilities.clone(),
            facility_index,
            idle,
            scan_order,
        }
    }

    pub fn open_facilities(&self) -> &[GridCoord] {
        &self.facilities
    }

    pub fn fleet_size(&self) -> usize {
        self.vehicles.len()
    }

    pub fn is_open(&self, block: GridCoord) -> bool {
        self.facility_index.contains_key(&block)
    }

    pub fn idle_count(&self, facility: GridCoord) -> usize {
        self.facility_index
            .get(&facility)
            .map_or(0, |&i| self.idle[i].len())
    }

    pub fn idle_count_per_facility(&self) -> impl Iterator<Item = (GridCoord, usize)> + '_ {
        self.facilities.iter().zip(&self.idle).map(|(&c, set)| (c, set.len()))
    }

    pub fn total_idle(&self) -> usize {
        self.idle.iter().map(BTreeSet::len).sum()
    }

    /// Lowest-id idle vehicle at `facility`.
    pub fn first_idle_at(&self, facility: GridCoord) -> Option<VehicleId> {
        let &i = self.facility_index.get(&facility)?;
        self.idle[i].first().copied()
    }

    /// Open facilities with at least one idle vehicle, in row-major order.
    pub fn facilities_with_idle(&self) -> impl Iterator<Item = GridCoord> + '_ {
        self.scan_order
            .iter()
            .filter(|&&i| !self.idle[i].is_empty())
            .map(|&i| self.facilities[i])
    }

    pub(crate) fn take_idle(&mut self, vehicle: VehicleId) -> bool {
        let home = self.vehicles[vehicle as usize].home_facility;
        let i = self.facility_index[&home];
        self.idle[i].remove(&vehicle)
    }

    pub(crate) fn park(&mut self, vehicle: VehicleId) {
        let home = self.vehicles[vehicle as usize].home_facility;
        let i = self.facility_index[&home];
        self.idle[i].insert(vehicle);
    }

    /// Idle parking counts agree with vehicle statuses and the fleet is
    /// fully accounted for.
    pub fn check_conservation(&self) -> Result<(), String> {
        let not_idle = self.vehicles.iter().filter(|v| !v.is_idle()).count();
        let idle = self.total_idle();
        if idle + not_idle != self.vehicles.len() {
            return Err(format!(
                "t={}: {idle} idle + {not_idle} busy != fleet of {}",
                self.clock,
                self.vehicles.len()
            ));
        }
        for (i, set) in self.idle.iter().enumerate() {
            for &id in set {
                let v = &self.vehicles[id as usize];
                if !v.is_idle() || v.home_facility != self.facilities[i] {
                    return Err(format!(
                        "t={}: vehicle {id} parked at {} but is {:?} with home {}",
                        self.clock, self.facilities[i], v.status, v.home_facility
                    ));
                }
            }
        }
        for v in &self.vehicles {
            let ts = match v.status {
                VehicleStatus::Idle => continue,
                VehicleStatus::TravelingToCustomer { arrival } => arrival,
                VehicleStatus::Serving { dropoff } => dropoff,
                VehicleStatus::ReturningToFacility { arrival } => arrival,
            };
            if ts < self.clock {
                return Err(format!("t={}: vehicle {} has stale timestamp {ts}", self.clock, v.id));
            }
        }
        Ok(())
    }
}
