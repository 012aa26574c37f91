//! Condition predicates and question annotations.
//!
//! One equality semantics is used everywhere a cell is compared to a value:
//! trimmed, case-folded string equality, or numeric equality when both
//! sides parse as finite numbers.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("unknown condition operator '{0}'")]
    UnknownOp(String),
    #[error("condition value is empty")]
    EmptyValue,
    #[error("annotation has no answer columns")]
    NoAnswerColumns,
    #[error("column {column} is out of range for a table with {width} columns")]
    ColumnOutOfRange { column: usize, width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Equals,
    GreaterThan,
    LessThan,
}

impl Op {
    pub fn as_str(&self) -> &'static str {
        match self {
            Op::Equals => "equals",
            Op::GreaterThan => "greater_than",
            Op::LessThan => "less_than",
        }
    }
}

impl FromStr for Op {
    type Err = AnnotationError;

    /// Accepts the long names and the WikiSQL symbols `=`, `>`, `<`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "equals" | "=" | "==" | "eq" => Ok(Op::Equals),
            "greater_than" | ">" | "gt" => Ok(Op::GreaterThan),
            "less_than" | "<" | "lt" => Ok(Op::LessThan),
            _ => Err(AnnotationError::UnknownOp(s.to_string())),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(column, op, value)` with `column` a global column index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub column: usize,
    pub op: Op,
    pub value: String,
}

impl Condition {
    pub fn new(column: usize, op: Op, value: impl Into<String>) -> Result<Self, AnnotationError> {
        let value = value.into();
        if value.trim().is_empty() {
            return Err(AnnotationError::EmptyValue);
        }
        Ok(Self { column, op, value })
    }

    pub fn is_satisfied_by(&self, cell: &str) -> bool {
        condition_satisfied(cell, self)
    }
}

/// Conditions, answer columns and gold answers for one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub conditions: Vec<Condition>,
    pub answer_columns: BTreeSet<usize>,
    #[serde(default)]
    pub gold_answers: Vec<String>,
}

impl Annotation {
    pub fn new(
        conditions: Vec<Condition>,
        answer_columns: BTreeSet<usize>,
        gold_answers: Vec<String>,
    ) -> Result<Self, AnnotationError> {
        if answer_columns.is_empty() {
            return Err(AnnotationError::NoAnswerColumns);
        }
        Ok(Self {
            conditions,
            answer_columns,
            gold_answers,
        })
    }

    /// Checks every column index against a table width.
    pub fn validate_width(&self, width: usize) -> Result<(), AnnotationError> {
        let columns = self
            .conditions
            .iter()
            .map(|c| c.column)
            .chain(self.answer_columns.iter().copied());
        for column in columns {
            if column >= width {
                return Err(AnnotationError::ColumnOutOfRange { column, width });
            }
        }
        Ok(())
    }

    pub fn condition_columns(&self) -> BTreeSet<usize> {
        self.conditions.iter().map(|c| c.column).collect()
    }

    /// Condition columns together with answer columns.
    pub fn relevant_columns(&self) -> BTreeSet<usize> {
        let mut cols = self.condition_columns();
        cols.extend(self.answer_columns.iter().copied());
        cols
    }
}

/// Parses a finite number; strings without any digit never count as numeric.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if !s.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Trimmed, lowercased form used for string comparisons.
pub fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Equality under the engine-wide semantics.
pub fn values_equal(a: &str, b: &str) -> bool {
    match (parse_number(a), parse_number(b)) {
        (Some(x), Some(y)) => x == y,
        _ => normalize(a) == normalize(b),
    }
}

/// Hashable key such that `values_equal(a, b)` iff `value_key(a) == value_key(b)`.
pub fn value_key(s: &str) -> String {
    match parse_number(s) {
        // -0.0 and 0.0 compare equal, so fold them together.
        Some(v) if v == 0.0 => "#0".to_string(),
        Some(v) => format!("#{v:e}"),
        None => format!("${}", normalize(s)),
    }
}

fn compare(cell: &str, value: &str) -> Ordering {
    match (parse_number(cell), parse_number(value)) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
        _ => normalize(cell).cmp(&normalize(value)),
    }
}

pub fn condition_satisfied(cell: &str, cond: &Condition) -> bool {
    match cond.op {
        Op::Equals => values_equal(cell, &cond.value),
        Op::GreaterThan => compare(cell, &cond.value) == Ordering::Greater,
        Op::LessThan => compare(cell, &cond.value) == Ordering::Less,
    }
}
