use std::io::Write;

use serde::Serialize;

use crate::config::CostParams;
use crate::demand::CustomerId;
use crate::engine::VehicleId;
use crate::error::Result;
use crate::grid::{manhattan_distance, GridCoord};

use super::CostLedger;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    ServedSameLocation {
        customer: CustomerId,
        vehicle: VehicleId,
        origin: GridCoord,
        destination: GridCoord,
        t: u32,
    },
    ServedCrossLocation {
        customer: CustomerId,
        vehicle: VehicleId,
        vehicle_facility: GridCoord,
        origin: GridCoord,
        destination: GridCoord,
        t: u32,
    },
    LostSale {
        customer: CustomerId,
        origin: GridCoord,
        t: u32,
    },
    FacilityOpenTick {
        facility: GridCoord,
        t: u32,
    },
}

impl Event {
    pub fn customer(&self) -> Option<CustomerId> {
        match *self {
            Event::ServedSameLocation { customer, .. }
            | Event::ServedCrossLocation { customer, .. }
            | Event::LostSale { customer, .. } => Some(customer),
            Event::FacilityOpenTick { .. } => None,
        }
    }

    pub fn time(&self) -> u32 {
        match *self {
            Event::ServedSameLocation { t, .. }
            | Event::ServedCrossLocation { t, .. }
            | Event::LostSale { t, .. }
            | Event::FacilityOpenTick { t, .. } => t,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Event::ServedSameLocation { .. } => "served_same_location",
            Event::ServedCrossLocation { .. } => "served_cross_location",
            Event::LostSale { .. } => "lost_sale",
            Event::FacilityOpenTick { .. } => "facility_open",
        }
    }
}

/// Chronological record of one simulated day.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.events.iter()
    }

    /// Cost of the day recomputed from scratch out of the recorded events.
    pub fn recompute_ledger(&self, costs: &CostParams) -> CostLedger {
        let mut ledger = CostLedger::default();
        for event in &self.events {
            match *event {
                Event::ServedSameLocation { origin, destination, .. } => {
                    let blocks = manhattan_distance(origin, destination) + manhattan_distance(destination, origin);
                    ledger.travel_cost += costs.travel_per_block * u64::from(blocks);
                }
                Event::ServedCrossLocation { vehicle_facility, origin, destination, .. } => {
                    let blocks = manhattan_distance(vehicle_facility, origin)
                        + manhattan_distance(origin, destination)
                        + manhattan_distance(destination, vehicle_facility);
                    ledger.travel_cost += costs.travel_per_block * u64::from(blocks);
                }
                Event::LostSale { .. } => ledger.lost_sale_cost += costs.lost_sale_per_unit,
                Event::FacilityOpenTick { .. } => {
                    ledger.facility_cost += costs.facility_open_per_time_unit
                }
            }
        }
        ledger
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        for event in &self.events {
            out.serialize(EventRow::from(event))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct EventRow {
    event_type: &'static str,
    customer_id: Option<CustomerId>,
    vehicle_id: Option<VehicleId>,
    facility_x: Option<u32>,
    facility_y: Option<u32>,
    origin_x: Option<u32>,
    origin_y: Option<u32>,
    dest_x: Option<u32>,
    dest_y: Option<u32>,
    t: u32,
}

impl From<&Event> for EventRow {
    fn from(event: &Event) -> Self {
        let mut row = EventRow {
            event_type: event.kind(),
            customer_id: event.customer(),
            vehicle_id: None,
            facility_x: None,
            facility_y: None,
            origin_x: None,
            origin_y: None,
            dest_x: None,
            dest_y: None,
            t: event.time(),
        };
        let (facility, origin, destination) = match *event {
            Event::ServedSameLocation { vehicle, origin, destination, .. } => {
                row.vehicle_id = Some(vehicle);
                (Some(origin), Some(origin), Some(destination))
            }
            Event::ServedCrossLocation { vehicle, vehicle_facility, origin, destination, .. } => {
                row.vehicle_id = Some(vehicle);
                (Some(vehicle_facility), Some(origin), Some(destination))
            }
            Event::LostSale { origin, .. } => (None, Some(origin), None),
            Event::FacilityOpenTick { facility, .. } => (Some(facility), None, None),
        };
        row.facility_x = facility.map(|c| c.x);
        row.facility_y = facility.map(|c| c.y);
        row.origin_x = origin.map(|c| c.x);
        row.origin_y = origin.map(|c| c.y);
        row.dest_x = destination.map(|c| c.x);
        row.dest_y = destination.map(|c| c.y);
        row
    }
}
