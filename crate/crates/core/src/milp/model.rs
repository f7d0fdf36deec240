use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Rational;

/// Location, customer and vehicle indices are positions in the owning
/// instance: locations row-major, customers and vehicles by id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariableIndex {
    /// Customer served by a vehicle already at its block.
    X { origin: usize, customer: usize, destination: usize, t: u32 },
    /// Customer served by vehicle `vehicle` stationed at `facility`.
    Y { customer: usize, origin: usize, vehicle: usize, facility: usize, destination: usize, t: u32 },
    /// Vehicle `vehicle` returns from `from` to its home `to` at `t`.
    Z { vehicle: usize, from: usize, to: usize, t: u32 },
    W { customer: usize, origin: usize, t: u32 },
    F { location: usize, t: u32 },
    N { location: usize, t: u32 },
    /// Product `n * f` of the supply constraint.
    G { location: usize, t: u32 },
}

impl VariableIndex {
    pub fn family(&self) -> char {
        match self {
            VariableIndex::X { .. } => 'x',
            VariableIndex::Y { .. } => 'y',
            VariableIndex::Z { .. } => 'z',
            VariableIndex::W { .. } => 'w',
            VariableIndex::F { .. } => 'f',
            VariableIndex::N { .. } => 'n',
            VariableIndex::G { .. } => 'g',
        }
    }

    pub fn indices(&self) -> Vec<u64> {
        let u = |v: usize| v as u64;
        match *self {
            VariableIndex::X { origin, customer, destination, t } => {
                vec![u(origin), u(customer), u(destination), t.into()]
            }
            VariableIndex::Y { customer, origin, vehicle, facility, destination, t } => vec![
                u(customer),
                u(origin),
                u(vehicle),
                u(facility),
                u(destination),
                t.into(),
            ],
            VariableIndex::Z { vehicle, from, to, t } => vec![u(vehicle), u(from), u(to), t.into()],
            VariableIndex::W { customer, origin, t } => vec![u(customer), u(origin), t.into()],
            VariableIndex::F { location, t }
            | VariableIndex::N { location, t }
            | VariableIndex::G { location, t } => vec![u(location), t.into()],
        }
    }

    pub fn from_parts(family: char, idx: &[u64]) -> Option<Self> {
        let s = |i: usize| idx[i] as usize;
        let t = |i: usize| u32::try_from(idx[i]).ok();
        let expected = match family {
            'x' | 'z' => 4,
            'y' => 6,
            'w' => 3,
            'f' | 'n' | 'g' => 2,
            _ => return None,
        };
        if idx.len() != expected {
            return None;
        }
        Some(match family {
            'x' => VariableIndex::X { origin: s(0), customer: s(1), destination: s(2), t: t(3)? },
            'y' => VariableIndex::Y {
                customer: s(0),
                origin: s(1),
                vehicle: s(2),
                facility: s(3),
                destination: s(4),
                t: t(5)?,
            },
            'z' => VariableIndex::Z { vehicle: s(0), from: s(1), to: s(2), t: t(3)? },
            'w' => VariableIndex::W { customer: s(0), origin: s(1), t: t(2)? },
            'f' => VariableIndex::F { location: s(0), t: t(1)? },
            'n' => VariableIndex::N { location: s(0), t: t(1)? },
            _ => VariableIndex::G { location: s(0), t: t(1)? },
        })
    }
}

impl fmt::Display for VariableIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family())?;
        for i in self.indices() {
            write!(f, "_{i}")?;
        }
        Ok(())
    }
}

impl FromStr for VariableIndex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('_');
        let family = parts
            .next()
            .filter(|p| p.len() == 1)
            .and_then(|p| p.chars().next())
            .ok_or_else(|| format!("bad variable name {s:?}"))?;
        let idx = parts
            .map(|p| p.parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| format!("bad variable name {s:?}"))?;
        VariableIndex::from_parts(family, &idx).ok_or_else(|| format!("bad variable name {s:?}"))
    }
}

/// Name and index tuple as stored in the JSON variable map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexTuple {
    pub family: String,
    pub indices: Vec<u64>,
}

impl From<VariableIndex> for IndexTuple {
    fn from(v: VariableIndex) -> Self {
        Self {
            family: v.family().to_string(),
            indices: v.indices(),
        }
    }
}

impl TryFrom<&IndexTuple> for VariableIndex {
    type Error = String;

    fn try_from(t: &IndexTuple) -> Result<Self, Self::Error> {
        let mut chars = t.family.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => VariableIndex::from_parts(c, &t.indices)
                .ok_or_else(|| format!("bad index tuple {t:?}")),
            _ => Err(format!("bad family {:?}", t.family)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub index: VariableIndex,
    pub kind: VarKind,
    pub lower: Rational,
    /// `None` is unbounded above.
    pub upper: Option<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

/// Constraint families of the formulation, used as row-name prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowFamily {
    Supply,
    LinearizeN,
    LinearizeF,
    LinearizeNF,
    FlowBalance,
    Return,
    ReturnLink,
    CustomerOnce,
    VehicleOnce,
    Patience,
    Demand,
    Capacity,
}

impl RowFamily {
    pub fn tag(self) -> &'static str {
        match self {
            RowFamily::Supply => "supply",
            RowFamily::LinearizeN => "lin_n",
            RowFamily::LinearizeF => "lin_f",
            RowFamily::LinearizeNF => "lin_nf",
            RowFamily::FlowBalance => "flow",
            RowFamily::Return => "return",
            RowFamily::ReturnLink => "retlink",
            RowFamily::CustomerOnce => "cust",
            RowFamily::VehicleOnce => "veh",
            RowFamily::Patience => "patience",
            RowFamily::Demand => "demand",
            RowFamily::Capacity => "cap",
        }
    }

    pub const ALL: [RowFamily; 12] = [
        RowFamily::Supply,
        RowFamily::LinearizeN,
        RowFamily::LinearizeF,
        RowFamily::LinearizeNF,
        RowFamily::FlowBalance,
        RowFamily::Return,
        RowFamily::ReturnLink,
        RowFamily::CustomerOnce,
        RowFamily::VehicleOnce,
        RowFamily::Patience,
        RowFamily::Demand,
        RowFamily::Capacity,
    ];

    /// Family of a row named `<tag>_<indices>`.
    pub fn of_row(name: &str) -> Option<RowFamily> {
        // Longest tag first so "lin_nf" is not read as "lin_n".
        let mut all = Self::ALL;
        all.sort_by_key(|f| std::cmp::Reverse(f.tag().len()));
        all.into_iter().find(|f| {
            name.strip_prefix(f.tag())
                .is_some_and(|rest| rest.is_empty() || rest.starts_with('_'))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(VarId, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// A minimization MILP over named, indexed variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub variables: Vec<Variable>,
    pub objective: Vec<(VarId, Rational)>,
    pub constraints: Vec<LinearConstraint>,
    lookup: HashMap<VariableIndex, VarId>,
}

impl Model {
    pub fn add_variable(&mut self, index: VariableIndex, kind: VarKind, lower: Rational, upper: Option<Rational>) -> VarId {
        assert!(!self.lookup.contains_key(&index), "variable {index} declared twice");
        let id = VarId(self.variables.len());
        self.variables.push(Variable { index, kind, lower, upper });
        self.lookup.insert(index, id);
        id
    }

    pub fn binary(&mut self, index: VariableIndex) -> VarId {
        self.add_variable(index, VarKind::Binary, Rational::from_integer(0), Some(Rational::from_integer(1)))
    }

    pub fn id_of(&self, index: &VariableIndex) -> Option<VarId> {
        self.lookup.get(index).copied()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn var_mut(&mut self, id: VarId) -> &mut Variable {
        &mut self.variables[id.0]
    }

    /// Adds a row, merging repeated variables into one term and dropping
    /// zero coefficients.
    pub fn add_constraint(&mut self, name: String, terms: Vec<(VarId, Rational)>, sense: Sense, rhs: Rational) {
        let terms = merge_terms(terms);
        self.constraints.push(LinearConstraint { name, terms, sense, rhs });
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, Rational)>) {
        self.objective = merge_terms(terms);
    }

    pub fn count_family(&self, family: char) -> usize {
        self.variables.iter().filter(|v| v.index.family() == family).count()
    }

    pub fn rows_in(&self, family: RowFamily) -> impl Iterator<Item = &LinearConstraint> {
        self.constraints
            .iter()
            .filter(move |c| RowFamily::of_row(&c.name) == Some(family))
    }
}

fn merge_terms(terms: Vec<(VarId, Rational)>) -> Vec<(VarId, Rational)> {
    let mut merged: Vec<(VarId, Rational)> = Vec::with_capacity(terms.len());
    let mut position: HashMap<VarId, usize> = HashMap::new();
    for (id, coef) in terms {
        match position.get(&id) {
            Some(&i) => merged[i].1 += coef,
            None => {
                position.insert(id, merged.len());
                merged.push((id, coef));
            }
        }
    }
    merged.retain(|(_, c)| *c != Rational::from_integer(0));
    merged
}
