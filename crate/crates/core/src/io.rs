//! JSON file formats for walks, representations, dimension sequences and
//! reconstruction problems. Exact quantities travel as `"p/q"` strings.

use std::path::Path;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::rational::{format_rational, parse_rational, RationalParseError};
use crate::reconstruct::ReconstructionProblem;
use crate::rep::{InvariantDimensionSequence, RepError, WeightDecomposition};
use crate::walk::{StepDistribution, WalkError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("bad rational {text:?}: {source}")]
    Rational {
        text: String,
        #[source]
        source: RationalParseError,
    },
    #[error("invalid walk: {0}")]
    InvalidWalk(#[from] WalkError),
    #[error("invalid representation: {0}")]
    InvalidRep(#[from] RepError),
}

impl FormatError {
    /// True for failures of the input itself rather than of file access.
    pub fn is_validation(&self) -> bool {
        matches!(self, Self::InvalidWalk(_) | Self::InvalidRep(_))
    }
}

fn rational(text: &str) -> Result<num_rational::BigRational, FormatError> {
    parse_rational(text).map_err(|source| FormatError::Rational {
        text: text.to_owned(),
        source,
    })
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WalkEntry {
    step: i64,
    prob: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WalkFile {
    entries: Vec<WalkEntry>,
}

pub fn parse_walk_json(text: &str) -> Result<StepDistribution, FormatError> {
    let file: WalkFile = from_json(text)?;
    let entries = file
        .entries
        .iter()
        .map(|e| Ok((e.step, rational(&e.prob)?)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(StepDistribution::new(entries)?)
}

pub fn parse_walk_file(path: &Path) -> Result<StepDistribution, FormatError> {
    parse_walk_json(&read_text(path)?)
}

pub fn walk_to_json(w: &StepDistribution) -> String {
    let file = WalkFile {
        entries: w
            .entries()
            .map(|(step, p)| WalkEntry {
                step,
                prob: format_rational(p),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("walk serializes")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepEntry {
    weight: i64,
    mult: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepFile {
    weights: Vec<RepEntry>,
}

pub fn parse_rep_json(text: &str) -> Result<WeightDecomposition, FormatError> {
    let file: RepFile = from_json(text)?;
    Ok(WeightDecomposition::new(
        file.weights.iter().map(|e| (e.weight, e.mult)),
    )?)
}

pub fn parse_rep_file(path: &Path) -> Result<WeightDecomposition, FormatError> {
    parse_rep_json(&read_text(path)?)
}

pub fn rep_to_json(r: &WeightDecomposition) -> String {
    let file = RepFile {
        weights: r
            .entries()
            .map(|(weight, mult)| RepEntry { weight, mult })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("rep serializes")
}

/// Dimensions may be JSON integers or, when they outgrow 64 bits, decimal
/// strings.
pub fn parse_dims_json(text: &str) -> Result<InvariantDimensionSequence, FormatError> {
    let value: Value = from_json(text)?;
    let Some(obj) = value.as_object() else {
        return Err(FormatError::Parse(
            "expected an object with a \"dims\" array".into(),
        ));
    };
    if let Some(k) = obj.keys().find(|k| *k != "dims") {
        return Err(FormatError::Parse(format!("unknown field {k:?}")));
    }
    let Some(arr) = obj.get("dims").and_then(Value::as_array) else {
        return Err(FormatError::Parse("missing \"dims\" array".into()));
    };
    let dims = arr
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            Value::Number(n) if n.is_i64() => Ok(BigInt::from(n.as_i64().unwrap_or_default())),
            Value::Number(n) if n.is_u64() => Ok(BigInt::from(n.as_u64().unwrap_or_default())),
            Value::String(s) => s
                .trim()
                .parse::<BigInt>()
                .map_err(|_| FormatError::Parse(format!("dims[{i}]: {s:?} is not an integer"))),
            other => Err(FormatError::Parse(format!(
                "dims[{i}]: {other} is not an integer"
            ))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InvariantDimensionSequence::new(dims)?)
}

pub fn parse_dims_file(path: &Path) -> Result<InvariantDimensionSequence, FormatError> {
    parse_dims_json(&read_text(path)?)
}

pub fn dims_to_json(d: &InvariantDimensionSequence) -> String {
    let dims: Vec<Value> = d
        .dims
        .iter()
        .map(|x| match x.to_u64() {
            Some(v) => Value::from(v),
            None => Value::from(x.to_string()),
        })
        .collect();
    serde_json::json!({ "dims": dims }).to_string()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    targets: Vec<String>,
    support_bound: usize,
    tolerance: f64,
    #[serde(default = "default_true")]
    require_primitive: bool,
}

pub fn parse_problem_json(text: &str) -> Result<ReconstructionProblem, FormatError> {
    let file: ProblemFile = from_json(text)?;
    let targets = file
        .targets
        .iter()
        .map(|t| rational(t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut p = ReconstructionProblem::new(targets, file.support_bound, file.tolerance);
    p.require_primitive = file.require_primitive;
    Ok(p)
}

pub fn parse_problem_file(path: &Path) -> Result<ReconstructionProblem, FormatError> {
    parse_problem_json(&read_text(path)?)
}

pub fn problem_to_json(p: &ReconstructionProblem) -> String {
    let file = ProblemFile {
        targets: p.targets.iter().map(format_rational).collect(),
        support_bound: p.support_bound,
        tolerance: p.tolerance,
        require_primitive: p.require_primitive,
    };
    serde_json::to_string_pretty(&file).expect("problem serializes")
}
