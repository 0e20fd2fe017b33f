//! Problem files: a JSON description of one equation.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use opcalc_core::{
    Coefficient, EquationSpec, Exact, Float, FormalSeries, IcConvention, Rhs, SeriesError, DEFAULT_TRUNCATION,
};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    nu: f64,
    operator: Vec<Value>,
    #[serde(default)]
    rhs: Option<Value>,
    /// When false the right-hand side is only known through its truncation.
    #[serde(default = "default_true")]
    rhs_finite: bool,
    initial_conditions: Vec<Value>,
    truncation: Option<i64>,
    tolerance: Option<f64>,
    real_form: Option<bool>,
    ic_convention: Option<IcConventionName>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum IcConventionName {
    Generalized,
    LeadingCoefficients,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Exact,
    Float,
}

/// Exact values are strings, floating values are numbers, in either case
/// alone or as a `[re, im]` pair.
fn kind_of(v: &Value) -> Result<Kind, CliError> {
    match v {
        Value::String(_) => Ok(Kind::Exact),
        Value::Number(_) => Ok(Kind::Float),
        Value::Array(parts) if parts.len() == 2 => {
            let a = kind_of(&parts[0])?;
            if a == kind_of(&parts[1])? {
                Ok(a)
            } else {
                Err(CliError::MixedCoefficients)
            }
        }
        other => Err(CliError::Schema(format!("not a coefficient: {other}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Equation {
    Exact(EquationSpec<Exact>),
    Float(EquationSpec<Float>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub equation: Equation,
    pub truncation: i64,
    pub tolerance: f64,
    pub real_form: bool,
}

pub fn default_truncation() -> Result<i64, CliError> {
    match std::env::var("OPCALC_TRUNCATION") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Schema(format!("OPCALC_TRUNCATION is not an integer: {s:?}"))),
        Err(_) => Ok(DEFAULT_TRUNCATION),
    }
}

fn build<C: Coefficient>(file: &ProblemFile) -> Result<EquationSpec<C>, CliError> {
    let coefficients = |values: &[Value]| {
        values
            .iter()
            .map(|v| C::from_json(v).map_err(|e| CliError::Schema(e.to_string())))
            .collect::<Result<Vec<C>, _>>()
    };
    let rhs = match &file.rhs {
        None | Some(Value::Null) => Rhs::Zero,
        Some(v) => {
            let mut obj = v.clone();
            if let Some(map) = obj.as_object_mut() {
                map.entry("nu").or_insert(Value::from(file.nu));
            }
            let series = FormalSeries::<C>::from_json(&obj).map_err(|e: SeriesError| CliError::Schema(e.to_string()))?;
            if file.rhs_finite {
                Rhs::Finite(series)
            } else {
                Rhs::Series(series)
            }
        }
    };
    Ok(EquationSpec {
        nu: file.nu,
        operator: coefficients(&file.operator)?,
        rhs,
        initial_conditions: coefficients(&file.initial_conditions)?,
        ic_convention: match file.ic_convention {
            Some(IcConventionName::LeadingCoefficients) => IcConvention::LeadingCoefficients,
            _ => IcConvention::Generalized,
        },
    })
}

pub fn parse(text: &str) -> Result<Problem, CliError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| {
        if e.is_data() {
            CliError::Schema(e.to_string())
        } else {
            CliError::InvalidJson(e.to_string())
        }
    })?;
    if file.operator.is_empty() {
        return Err(CliError::Schema("\"operator\" must list at least one coefficient".into()));
    }
    let mut values: Vec<&Value> = file.operator.iter().chain(&file.initial_conditions).collect();
    if let Some(coeffs) = file.rhs.as_ref().and_then(|r| r.get("coefficients")).and_then(Value::as_array) {
        values.extend(coeffs);
    }
    let kinds = values.into_iter().map(kind_of).collect::<Result<Vec<_>, _>>()?;
    let kind = kinds[0];
    if kinds.iter().any(|k| *k != kind) {
        return Err(CliError::MixedCoefficients);
    }
    let truncation = match file.truncation {
        Some(t) => t,
        None => default_truncation()?,
    };
    let order = file.operator.len() as i64 - 1;
    if truncation < order {
        return Err(CliError::Schema(format!(
            "truncation {truncation} is below the operator order {order}"
        )));
    }
    let equation = match kind {
        Kind::Exact => Equation::Exact(build(&file)?),
        Kind::Float => Equation::Float(build(&file)?),
    };
    Ok(Problem {
        equation,
        truncation,
        tolerance: file.tolerance.unwrap_or(1e-10),
        real_form: file.real_form.unwrap_or(false),
    })
}

pub fn load(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}
