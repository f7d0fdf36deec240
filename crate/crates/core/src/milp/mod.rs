//! Deterministic-equivalent MILP of one day: construction, LP export,
//! exact solution checking and encoding of simulated days as assignments.

mod build;
mod encode;
mod instance;
mod lp;
mod model;
mod validate;

pub use build::build_model;
pub use encode::encode_simulation;
pub use instance::{default_big_m, HorizonPolicy, InstanceCustomer, ModelInstance};
pub use lp::{
    export_lp, parse_lp, read_assignment, read_variable_map, variable_map, write_assignment, write_lp,
};
pub use model::{
    IndexTuple, LinearConstraint, Model, RowFamily, Sense, VarId, VarKind, Variable, VariableIndex,
};
pub use validate::{validate_solution, RowViolation, ValidationReport};

/// Exact arithmetic for coefficients, assignments and objective values.
pub type Rational = num_rational::Ratio<i128>;
