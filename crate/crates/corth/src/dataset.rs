//! The unit of ingestion and analysis: a named covariate matrix plus a
//! response vector.

use crate::error::{Error, Result};
use crate::linmodel::DesignMatrix;

/// Minimum rows for any analysis; below this cross-fitting with two folds
/// cannot hold out and train at the same time.
pub const MIN_OBSERVATIONS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: DesignMatrix,
    y: Vec<f64>,
    column_names: Vec<String>,
    response_name: String,
}

impl Dataset {
    pub fn new(
        x: DesignMatrix,
        y: Vec<f64>,
        column_names: Vec<String>,
        response_name: String,
    ) -> Result<Self> {
        if x.n() < MIN_OBSERVATIONS {
            return Err(Error::InvalidParameter(format!(
                "dataset needs at least {MIN_OBSERVATIONS} observations, got {}",
                x.n()
            )));
        }
        if y.len() != x.n() {
            return Err(Error::DimensionMismatch {
                context: "response vector",
                expected: x.n(),
                actual: y.len(),
            });
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if column_names.len() != x.p() {
            return Err(Error::DimensionMismatch {
                context: "column names",
                expected: x.p(),
                actual: column_names.len(),
            });
        }
        for (i, name) in column_names.iter().enumerate() {
            if name == &response_name || column_names[..i].contains(name) {
                return Err(Error::DuplicateColumnName(name.clone()));
            }
        }
        Ok(Self {
            x,
            y,
            column_names,
            response_name,
        })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    /// Number of covariate columns.
    pub fn p(&self) -> usize {
        self.x.p()
    }

    pub fn x(&self) -> &DesignMatrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    /// Dataset restricted to `rows` (repeats allowed, serving bootstrap
    /// resampling). Errors if fewer than [`MIN_OBSERVATIONS`] rows remain.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Self::new(
            self.x.select_rows(rows),
            rows.iter().map(|&r| self.y[r]).collect(),
            self.column_names.clone(),
            self.response_name.clone(),
        )
    }
}
