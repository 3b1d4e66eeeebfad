use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::numkernel::NumError;
use crate::operator::OpError;
use crate::polys::PolyError;
use crate::sections::SectionError;
use crate::triplet::TripletError;
use crate::weyl::WeylError;

use super::fmt_g17;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("invalid value for {field}: {msg}")]
    Validation { field: String, msg: String },
    #[error(transparent)]
    Operator(#[from] OpError),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Triplet(#[from] TripletError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

fn op_code(e: &OpError) -> i32 {
    match e {
        OpError::UnknownFixture(_) | OpError::BadParam(_) | OpError::NotScalar => EXIT_INPUT,
        _ => EXIT_NUMERIC,
    }
}

fn poly_code(e: &PolyError) -> i32 {
    match e {
        PolyError::Operator(o) => op_code(o),
        PolyError::NotCompletelyIndeterminate(_)
        | PolyError::NotCauchy { .. }
        | PolyError::NotNonNegative { .. }
        | PolyError::AlphaNotNegative(_) => {
            EXIT_INCONCLUSIVE
        }
        PolyError::NotScalar => EXIT_INPUT,
        _ => EXIT_NUMERIC,
    }
}

fn weyl_code(e: &WeylError) -> i32 {
    match e {
        WeylError::Poly(p) => poly_code(p),
        WeylError::BadPoint(_) => EXIT_INPUT,
        WeylError::LimitNotSettled(_) => EXIT_INCONCLUSIVE,
        _ => EXIT_NUMERIC,
    }
}

impl CliError {
    /// 0 success, 1 input error, 2 inconclusive verdict, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Validation { .. } | Self::Io(_) => EXIT_INPUT,
            Self::Operator(e) => op_code(e),
            Self::Numeric(_) => EXIT_NUMERIC,
            Self::Poly(e) => poly_code(e),
            Self::Weyl(e) => weyl_code(e),
            Self::Triplet(e) => match e {
                TripletError::Poly(p) => poly_code(p),
                TripletError::Operator(o) => op_code(o),
                TripletError::Numeric(_) | TripletError::BoundaryDefect { .. } => EXIT_NUMERIC,
                _ => EXIT_INPUT,
            },
            Self::Section(e) => match e {
                SectionError::Poly(p) => poly_code(p),
                SectionError::Operator(o) => op_code(o),
                SectionError::Numeric(_) | SectionError::SingularPAtN { .. } | SectionError::ZeroCornerDenominator { .. } => {
                    EXIT_NUMERIC
                }
                _ => EXIT_INPUT,
            },
        }
    }
}

/// One table cell. Non-finite numbers are written as strings.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Int(i) => s.serialize_i64(*i),
            Self::Num(x) if x.is_finite() => s.serialize_f64(*x),
            Self::Num(x) => s.serialize_str(&fmt_g17(*x)),
            Self::Text(t) => s.serialize_str(t),
        }
    }
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Self::Int(i) => i.to_string(),
            Self::Num(x) => fmt_g17(*x),
            Self::Text(t) => t.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Self::Int(x as i64)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Self::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Self::Text(x.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub verdicts: BTreeMap<String, Value>,
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Self { command: command.into(), config, verdicts: BTreeMap::new(), tables: Vec::new(), warnings: Vec::new(), exit_code: EXIT_OK }
    }

    pub fn verdict(&mut self, key: &str, value: impl Into<Value>) {
        self.verdicts.insert(key.into(), value.into());
    }

    /// Records a finite number, or its text form when it is not finite.
    pub fn number(&mut self, key: &str, x: f64) {
        let v = match x.is_finite() {
            true => Value::from(x),
            false => Value::from(fmt_g17(x)),
        };
        self.verdicts.insert(key.into(), v);
    }

    /// Raises the exit code to `code` unless it is already higher.
    pub fn escalate(&mut self, code: i32) {
        self.exit_code = self.exit_code.max(code);
    }

    /// Records a failed command.
    pub fn fail(&mut self, err: &CliError) {
        self.verdict("error", err.to_string());
        self.escalate(err.exit_code());
    }
}
