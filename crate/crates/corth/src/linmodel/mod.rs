//! Linear modeling on dense column-major matrices: standardization, lasso by
//! cyclic coordinate descent, cross-validated penalty selection, and
//! ridge-stabilized least squares.

mod lasso;
mod ols;

pub use lasso::{lasso_cv, lasso_fit, lasso_fit_with, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use ols::{linear_projection, ols_fit, SecondMoments};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A column is treated as constant when its population sd is below this
/// times (1 + |mean|); catches columns like [0.1, 0.1, 0.1] whose deviations
/// are pure rounding noise without flagging genuinely tiny signals.
pub const CONSTANT_COLUMN_REL_TOL: f64 = 1e-12;

/// Dense column-major design matrix. Construction validates shape and
/// finiteness, so downstream numerics never see NaN or infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>, // column-major, length n * p
}

impl DesignMatrix {
    /// Builds from `p` columns of length `n`. `n` is explicit so that
    /// zero-column matrices (a legal design) still carry a row count.
    pub fn from_columns(n: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "design matrix needs at least one row".into(),
            ));
        }
        let p = columns.len();
        let mut values = Vec::with_capacity(n * p);
        for col in &columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "design matrix column",
                    expected: n,
                    actual: col.len(),
                });
            }
            values.extend_from_slice(col);
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n, p, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Column `j` as a contiguous slice.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[col * self.n + row]
    }

    /// Copy of the matrix restricted to `rows` (in the given order; repeats
    /// allowed, so this also serves bootstrap resampling).
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.p);
        for j in 0..self.p {
            let col = self.column(j);
            values.extend(rows.iter().map(|&r| col[r]));
        }
        Self {
            n: rows.len(),
            p: self.p,
            values,
        }
    }

    /// Copy of the matrix without column `j`.
    pub fn drop_column(&self, j: usize) -> Self {
        let mut values = Vec::with_capacity(self.n * (self.p - 1));
        for c in 0..self.p {
            if c != j {
                values.extend_from_slice(self.column(c));
            }
        }
        Self {
            n: self.n,
            p: self.p - 1,
            values,
        }
    }
}

/// Per-column transform recorded by [`standardize`]. Constant columns keep
/// scale 1 (never divide by ~0) and are flagged so fitters can skip them.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub constant_columns: Vec<bool>,
}

/// Centers each column and divides by its population standard deviation.
/// Flagged constant columns come back as exact zero columns.
pub fn standardize(x: &DesignMatrix) -> (DesignMatrix, Standardization) {
    let n = x.n();
    let nf = n as f64;
    let mut means = Vec::with_capacity(x.p());
    let mut scales = Vec::with_capacity(x.p());
    let mut constant_columns = Vec::with_capacity(x.p());
    let mut values = Vec::with_capacity(n * x.p());
    for j in 0..x.p() {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / nf;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        let sd = var.sqrt();
        let constant = sd <= CONSTANT_COLUMN_REL_TOL * (1.0 + mean.abs());
        means.push(mean);
        scales.push(if constant { 1.0 } else { sd });
        constant_columns.push(constant);
        if constant {
            values.extend(std::iter::repeat(0.0).take(n));
        } else {
            values.extend(col.iter().map(|v| (v - mean) / sd));
        }
    }
    (
        DesignMatrix {
            n,
            p: x.p(),
            values,
        },
        Standardization {
            means,
            scales,
            constant_columns,
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Lasso,
    Ols,
    Projection,
}

/// Fitted linear model. Coefficients are always on the original covariate
/// scale; columns that were constant in the training data get exactly 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearPredictor {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub method: FitMethod,
    /// Penalty the model was fit at; `None` for unpenalized fits.
    pub lambda: Option<f64>,
}

impl LinearPredictor {
    /// Model that predicts `value` regardless of input; handy as a stub
    /// nuisance in tests.
    pub fn constant(value: f64, p: usize) -> Self {
        Self {
            intercept: value,
            coefficients: vec![0.0; p],
            method: FitMethod::Ols,
            lambda: None,
        }
    }
}

/// Evaluates `model` on every row of `x`.
pub fn predict(model: &LinearPredictor, x: &DesignMatrix) -> Result<Vec<f64>> {
    if model.coefficients.len() != x.p() {
        return Err(Error::DimensionMismatch {
            context: "predictor coefficients",
            expected: x.p(),
            actual: model.coefficients.len(),
        });
    }
    let mut out = vec![model.intercept; x.n()];
    for (j, &c) in model.coefficients.iter().enumerate() {
        if c != 0.0 {
            for (o, v) in out.iter_mut().zip(x.column(j)) {
                *o += c * v;
            }
        }
    }
    Ok(out)
}

/// Cross-validation settings for [`lasso_cv`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub grid_size: usize,
    pub lambda_min_ratio: f64,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            grid_size: 100,
            lambda_min_ratio: 1e-4,
            seed: 0,
        }
    }
}

pub(crate) fn validate_response(x: &DesignMatrix, y: &[f64]) -> Result<()> {
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
    Ok(())
}
