//! Instantiates the formulation over a realized day.
//!
//! Row families, with `dep(u,t)` the vehicles leaving `u` at `t` and
//! `ret(v,t)` those arriving home at `v` at `t`:
//!
//! * `supply`: `dep(u,t) <= g(u,t)`, where `g` linearizes `n(u,t) * f(u,t)`
//!   through `lin_n`, `lin_f` and `lin_nf`.
//! * `flow`: `n(v,t) = n(v,t-1) - dep(v,t-1) + ret(v,t)`; `n(v,0)` is fixed
//!   to the vehicles stationed at `v`.
//! * `return`: a cross-location trip forces the matching `z` at its return
//!   time; `retlink` stops `z` from firing without such a trip.
//! * `cust` / `veh`: each customer takes at most one vehicle, each vehicle
//!   at most one customer per time unit.
//! * `patience`: big-M row allowing a cross-location vehicle only within the
//!   customer's radius.
//! * `demand`: every customer is served on the spot, served from elsewhere,
//!   or lost.
//! * `cap`: open facilities per time unit.

use std::collections::{BTreeMap, HashMap};

use super::instance::ModelInstance;
use super::model::{Model, RowFamily, Sense, VarId, VarKind, VariableIndex};
use super::Rational;
use crate::error::Result;

fn r(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn row_name(family: RowFamily, indices: &[u64]) -> String {
    let mut name = family.tag().to_string();
    for i in indices {
        name.push('_');
        name.push_str(&i.to_string());
    }
    name
}

/// Forbids a variable outright. It stays integral with both bounds at zero
/// so exported files state the bound explicitly.
fn fix_zero(model: &mut Model, id: VarId) {
    let var = model.var_mut(id);
    var.kind = VarKind::Integer;
    var.upper = Some(r(0));
}

pub fn build_model(instance: &ModelInstance) -> Result<Model> {
    instance.check()?;
    let horizon = instance.horizon;
    let n_loc = instance.locations.len();
    let fleet = i64::from(instance.fleet_size);
    let big_m = instance.big_m;
    let tt = &instance.travel_times;
    let dist = &instance.distances;
    let mut model = Model::default();

    // Departures and returns per (location, time), filled as trips are
    // declared. Trips ending at the vehicle's home return without a z.
    let mut departures: BTreeMap<(usize, u32), Vec<VarId>> = BTreeMap::new();
    let mut direct_returns: HashMap<(usize, u32), Vec<VarId>> = HashMap::new();
    // Return landings per z index: (vehicle, from, to, t).
    let mut landings: BTreeMap<(usize, usize, usize, u32), Vec<VarId>> = BTreeMap::new();
    let mut x_of = Vec::with_capacity(instance.customers.len());
    let mut y_of: Vec<Vec<(usize, usize, VarId)>> = Vec::with_capacity(instance.customers.len());
    let mut live_y: Vec<(VarId, VariableIndex)> = Vec::new();

    for m in &instance.customers {
        let (v, k, t) = (m.origin, m.destination, m.arrival);
        let id = model.binary(VariableIndex::X { origin: v, customer: m.id, destination: k, t });
        let back = t + tt[v][k] + tt[k][v];
        if back < horizon {
            direct_returns.entry((v, back)).or_default().push(id);
        } else {
            fix_zero(&mut model, id);
        }
        departures.entry((v, t)).or_default().push(id);
        x_of.push(id);
    }

    for m in &instance.customers {
        let (v, k, t) = (m.origin, m.destination, m.arrival);
        let mut ys = Vec::new();
        // u == k is kept: the vehicle is home as soon as it drops off.
        for u in (0..n_loc).filter(|&u| u != v) {
            for &c in &instance.vehicle_pools[u] {
                let index = VariableIndex::Y { customer: m.id, origin: v, vehicle: c, facility: u, destination: k, t };
                let id = model.binary(index);
                let back = t + instance.trip_duration(u, v, k);
                if back < horizon && u == k {
                    direct_returns.entry((u, back)).or_default().push(id);
                } else if back < horizon {
                    landings.entry((c, k, u, back)).or_default().push(id);
                    live_y.push((id, index));
                } else {
                    fix_zero(&mut model, id);
                }
                departures.entry((u, t)).or_default().push(id);
                ys.push((u, c, id));
            }
        }
        y_of.push(ys);
    }

    for to in 0..n_loc {
        for &c in &instance.vehicle_pools[to] {
            for from in (0..n_loc).filter(|&f| f != to) {
                for t in 0..horizon {
                    let id = model.binary(VariableIndex::Z { vehicle: c, from, to, t });
                    if !landings.contains_key(&(c, from, to, t)) {
                        fix_zero(&mut model, id);
                    }
                }
            }
        }
    }

    let w_of: Vec<VarId> = instance
        .customers
        .iter()
        .map(|m| model.binary(VariableIndex::W { customer: m.id, origin: m.origin, t: m.arrival }))
        .collect();

    for location in 0..n_loc {
        for t in 0..horizon {
            model.binary(VariableIndex::F { location, t });
        }
    }
    for location in 0..n_loc {
        let stationed = r(instance.vehicle_pools[location].len() as i64);
        for t in 0..horizon {
            let (lo, hi) = if t == 0 { (stationed, stationed) } else { (r(0), r(fleet)) };
            model.add_variable(VariableIndex::N { location, t }, VarKind::Integer, lo, Some(hi));
        }
    }
    let f = |model: &Model, location, t| model.id_of(&VariableIndex::F { location, t }).expect("f declared");
    let n = |model: &Model, location, t| model.id_of(&VariableIndex::N { location, t }).expect("n declared");

    // supply with linearized n * f
    for (&(u, t), dep) in &departures {
        let g = model.add_variable(VariableIndex::G { location: u, t }, VarKind::Integer, r(0), Some(r(fleet)));
        let (nv, fv) = (n(&model, u, t), f(&model, u, t));
        let idx = [u as u64, t.into()];
        let mut terms: Vec<_> = dep.iter().map(|&id| (id, r(1))).collect();
        terms.push((g, r(-1)));
        model.add_constraint(row_name(RowFamily::Supply, &idx), terms, Sense::Le, r(0));
        model.add_constraint(row_name(RowFamily::LinearizeN, &idx), vec![(g, r(1)), (nv, r(-1))], Sense::Le, r(0));
        model.add_constraint(row_name(RowFamily::LinearizeF, &idx), vec![(g, r(1)), (fv, r(-fleet))], Sense::Le, r(0));
        model.add_constraint(
            row_name(RowFamily::LinearizeNF, &idx),
            vec![(g, r(1)), (nv, r(-1)), (fv, r(-fleet))],
            Sense::Ge,
            r(-fleet),
        );
    }

    // flow balance
    for v in 0..n_loc {
        for t in 1..horizon {
            let mut terms = vec![(n(&model, v, t), r(1)), (n(&model, v, t - 1), r(-1))];
            if let Some(dep) = departures.get(&(v, t - 1)) {
                terms.extend(dep.iter().map(|&id| (id, r(1))));
            }
            for &c in &instance.vehicle_pools[v] {
                for from in (0..n_loc).filter(|&fr| fr != v) {
                    let z = model.id_of(&VariableIndex::Z { vehicle: c, from, to: v, t }).expect("z declared");
                    terms.push((z, r(-1)));
                }
            }
            if let Some(back) = direct_returns.get(&(v, t)) {
                terms.extend(back.iter().map(|&id| (id, r(-1))));
            }
            model.add_constraint(row_name(RowFamily::FlowBalance, &[v as u64, t.into()]), terms, Sense::Eq, r(0));
        }
    }

    // return home after a cross-location trip
    for &(id, index) in &live_y {
        let VariableIndex::Y { customer, origin, vehicle, facility, destination, t } = index else {
            unreachable!("only y variables are tracked")
        };
        let back = t + instance.trip_duration(facility, origin, destination);
        let z = model
            .id_of(&VariableIndex::Z { vehicle, from: destination, to: facility, t: back })
            .expect("landing z declared");
        model.add_constraint(
            row_name(RowFamily::Return, &[customer as u64, vehicle as u64, facility as u64]),
            vec![(id, r(1)), (z, r(-1))],
            Sense::Le,
            r(0),
        );
    }
    for (&(c, from, to, t), ys) in &landings {
        let z = model.id_of(&VariableIndex::Z { vehicle: c, from, to, t }).expect("z declared");
        let mut terms = vec![(z, r(1))];
        terms.extend(ys.iter().map(|&id| (id, r(-1))));
        model.add_constraint(
            row_name(RowFamily::ReturnLink, &[c as u64, from as u64, to as u64, t.into()]),
            terms,
            Sense::Le,
            r(0),
        );
    }

    // each customer at most one vehicle
    for (m, ys) in instance.customers.iter().zip(&y_of) {
        if ys.is_empty() {
            continue;
        }
        let terms = ys.iter().map(|&(_, _, id)| (id, r(1))).collect();
        model.add_constraint(row_name(RowFamily::CustomerOnce, &[m.id as u64]), terms, Sense::Le, r(1));
    }

    // each vehicle at most one customer per time unit
    let mut per_vehicle: BTreeMap<(usize, usize, u32), Vec<VarId>> = BTreeMap::new();
    for (m, ys) in instance.customers.iter().zip(&y_of) {
        for &(u, c, id) in ys {
            per_vehicle.entry((c, u, m.arrival)).or_default().push(id);
        }
    }
    for (&(c, u, t), ids) in &per_vehicle {
        let terms = ids.iter().map(|&id| (id, r(1))).collect();
        model.add_constraint(
            row_name(RowFamily::VehicleOnce, &[c as u64, u as u64, t.into()]),
            terms,
            Sense::Le,
            r(1),
        );
    }

    // patience: N(1 - sum y - x) + sum y d(u,v) <= S(1 - w) + N w
    for (i, m) in instance.customers.iter().enumerate() {
        let s = i64::from(m.patience);
        let mut terms: Vec<_> = y_of[i]
            .iter()
            .map(|&(u, _, id)| (id, r(i64::from(dist[u][m.origin]) - big_m)))
            .collect();
        terms.push((x_of[i], r(-big_m)));
        terms.push((w_of[i], r(s - big_m)));
        model.add_constraint(row_name(RowFamily::Patience, &[m.id as u64]), terms, Sense::Le, r(s - big_m));
    }

    // demand fulfillment
    for (i, m) in instance.customers.iter().enumerate() {
        let mut terms = vec![(x_of[i], r(1)), (w_of[i], r(1))];
        terms.extend(y_of[i].iter().map(|&(_, _, id)| (id, r(1))));
        model.add_constraint(row_name(RowFamily::Demand, &[m.id as u64]), terms, Sense::Eq, r(1));
    }

    // facility capacity
    for t in 0..horizon {
        let terms = (0..n_loc).map(|v| (f(&model, v, t), r(1))).collect();
        let cap = i64::from(instance.facility_capacity[t as usize]);
        model.add_constraint(row_name(RowFamily::Capacity, &[t.into()]), terms, Sense::Le, r(cap));
    }

    // objective
    let mut objective = Vec::new();
    for (i, m) in instance.customers.iter().enumerate() {
        let rates = instance.costs[m.arrival as usize];
        let (v, k) = (m.origin, m.destination);
        let k1 = rates.lost_sale_per_unit as i64;
        let k2 = rates.travel_per_block as i64;
        objective.push((w_of[i], r(k1)));
        objective.push((x_of[i], r(k2 * i64::from(dist[v][k] + dist[k][v]))));
        for &(u, _, id) in &y_of[i] {
            objective.push((id, r(k2 * i64::from(instance.trip_blocks(u, v, k)))));
        }
    }
    for location in 0..n_loc {
        for t in 0..horizon {
            let k3 = instance.costs[t as usize].facility_open_per_time_unit as i64;
            objective.push((f(&model, location, t), r(k3)));
        }
    }
    model.set_objective(objective);
    Ok(model)
}

#[cfg(test)]
mod tests;
