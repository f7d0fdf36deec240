use std::collections::HashMap;

use num_traits::Signed;
use serde::Serialize;

use super::model::{Model, Sense, VarKind, VariableIndex};
use super::Rational;

/// A row whose left-hand side misses its bound. `slack` is negative by the
/// amount of the violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowViolation {
    pub name: String,
    #[serde(serialize_with = "ser_ratio")]
    pub lhs: Rational,
    pub sense: &'static str,
    #[serde(serialize_with = "ser_ratio")]
    pub rhs: Rational,
    #[serde(serialize_with = "ser_ratio")]
    pub slack: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub feasible: bool,
    pub violated_rows: Vec<RowViolation>,
    /// Variables outside their bounds, with the offending value.
    pub bound_violations: Vec<(String, String)>,
    pub integrality_violations: Vec<(String, String)>,
    /// Assigned names the model does not declare.
    pub unknown_variables: Vec<String>,
    #[serde(serialize_with = "ser_ratio")]
    pub objective: Rational,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Checks `assignment` against every row, bound and integrality
/// requirement of `model`. Unassigned variables are taken as zero.
pub fn validate_solution(model: &Model, assignment: &HashMap<VariableIndex, Rational>) -> ValidationReport {
    let zero = Rational::from_integer(0);
    let mut values = vec![zero; model.variables.len()];
    let mut unknown_variables = Vec::new();
    for (index, &value) in assignment {
        match model.id_of(index) {
            Some(id) => values[id.0] = value,
            None if value == zero => {}
            None => unknown_variables.push(index.to_string()),
        }
    }
    unknown_variables.sort();

    let mut bound_violations = Vec::new();
    let mut integrality_violations = Vec::new();
    for (var, &value) in model.variables.iter().zip(&values) {
        let one = Rational::from_integer(1);
        let binary_miss = var.kind == VarKind::Binary && (value < zero || value > one);
        if binary_miss || value < var.lower || var.upper.is_some_and(|u| value > u) {
            bound_violations.push((var.index.to_string(), value.to_string()));
        }
        if var.kind != VarKind::Continuous && !value.is_integer() {
            integrality_violations.push((var.index.to_string(), value.to_string()));
        }
    }

    let mut violated_rows = Vec::new();
    for row in &model.constraints {
        let lhs: Rational = row.terms.iter().map(|&(id, c)| c * values[id.0]).sum();
        let slack = match row.sense {
            Sense::Le => row.rhs - lhs,
            Sense::Ge => lhs - row.rhs,
            Sense::Eq => -(lhs - row.rhs).abs(),
        };
        if slack < zero {
            violated_rows.push(RowViolation {
                name: row.name.clone(),
                lhs,
                sense: row.sense.symbol(),
                rhs: row.rhs,
                slack,
            });
        }
    }

    let objective = model.objective.iter().map(|&(id, c)| c * values[id.0]).sum();
    let feasible = violated_rows.is_empty()
        && bound_violations.is_empty()
        && integrality_violations.is_empty()
        && unknown_variables.is_empty();
    ValidationReport {
        feasible,
        violated_rows,
        bound_violations,
        integrality_violations,
        unknown_variables,
        objective,
    }
}
