//! Lasso by cyclic coordinate descent with an active-set strategy, plus
//! K-fold cross-validation over a log-spaced penalty grid.

use super::{
    standardize, validate_response, CvConfig, DesignMatrix, FitMethod, LinearPredictor,
    Standardization,
};
use crate::error::{Error, Result};
use crate::folds::shuffled_assignment;
use crate::seed::{rng_from, tag};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Lasso fit at a single penalty with the default tolerance and sweep cap.
///
/// Minimizes `(1/2n) * ||y - b0 - X b||^2 + lambda * ||b||_1` with the
/// penalty applied on standardized columns; returned coefficients are mapped
/// back to the original scale and constant columns get exactly 0.
pub fn lasso_fit(x: &DesignMatrix, y: &[f64], lambda: f64) -> Result<LinearPredictor> {
    lasso_fit_with(x, y, lambda, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// [`lasso_fit`] with explicit convergence controls.
pub fn lasso_fit_with(
    x: &DesignMatrix,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LinearPredictor> {
    validate_response(x, y)?;
    validate_penalty(lambda)?;
    validate_controls(tol, max_iter)?;
    let (xs, info) = standardize(x);
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut state = CdState::new(&xs, &info, yc);
    state.run(lambda, tol, max_iter, None);
    let (coefficients, intercept) = state.original_scale_terms(&info, y_mean);
    Ok(LinearPredictor {
        intercept,
        coefficients,
        method: FitMethod::Lasso,
        lambda: Some(lambda),
    })
}

/// Selects the penalty by K-fold cross-validation and refits on all rows.
///
/// The grid holds `grid_size` log-spaced values from `lambda_max` (the
/// smallest penalty nulling every coefficient on the standardized full data)
/// down to `lambda_max * lambda_min_ratio`. The curve minimized is the
/// fold-averaged validation MSE; exact ties prefer the larger penalty. The
/// returned model is bit-identical to `lasso_fit(x, y, best_lambda)`.
pub fn lasso_cv(x: &DesignMatrix, y: &[f64], cfg: &CvConfig) -> Result<(f64, LinearPredictor)> {
    validate_response(x, y)?;
    if cfg.folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "cross-validation needs at least 2 folds, got {}",
            cfg.folds
        )));
    }
    if x.n() < cfg.folds {
        return Err(Error::TooFewObservations {
            n: x.n(),
            folds: cfg.folds,
        });
    }
    if cfg.grid_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "penalty grid needs at least 2 values, got {}",
            cfg.grid_size
        )));
    }
    if !(cfg.lambda_min_ratio > 0.0 && cfg.lambda_min_ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda_min_ratio must lie in (0, 1), got {}",
            cfg.lambda_min_ratio
        )));
    }

    let n = x.n();
    let grid = penalty_grid(x, y, cfg);
    let assignment = shuffled_assignment(n, cfg.folds, &mut rng_from(cfg.seed, &[tag::CV_FOLDS]));

    let mut cv_error = vec![0.0; grid.len()];
    for fold in 0..cfg.folds {
        let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != fold).collect();
        let val: Vec<usize> = (0..n).filter(|&i| assignment[i] == fold).collect();
        let xt = x.select_rows(&train);
        let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let yt_mean = yt.iter().sum::<f64>() / yt.len() as f64;
        let ytc: Vec<f64> = yt.iter().map(|v| v - yt_mean).collect();
        let (xts, tinfo) = standardize(&xt);
        // Covariance mode: the whole descending path revisits the same
        // coordinates, so O(p)-per-update bookkeeping dominates O(n).
        let mut state = CdState::new_covariance(&xts, &tinfo, ytc);
        for (t, &lambda) in grid.iter().enumerate() {
            state.run(lambda, DEFAULT_TOL, DEFAULT_MAX_ITER, None);
            let (coefs, intercept) = state.original_scale_terms(&tinfo, yt_mean);
            let mut pred = vec![intercept; val.len()];
            for (j, &c) in coefs.iter().enumerate() {
                if c != 0.0 {
                    let col = x.column(j);
                    for (o, &row) in pred.iter_mut().zip(&val) {
                        *o += c * col[row];
                    }
                }
            }
            let sse: f64 = pred
                .iter()
                .zip(&val)
                .map(|(&p, &row)| (y[row] - p) * (y[row] - p))
                .sum();
            cv_error[t] += sse / val.len() as f64;
        }
    }
    for e in &mut cv_error {
        *e /= cfg.folds as f64;
    }

    // Descending grid + strict inequality = ties resolve to the larger
    // penalty.
    let mut best = 0;
    for t in 1..grid.len() {
        if cv_error[t] < cv_error[best] {
            best = t;
        }
    }
    let best_lambda = grid[best];
    let model = lasso_fit(x, y, best_lambda)?;
    Ok((best_lambda, model))
}

/// Log-spaced descending penalty grid anchored at
/// `lambda_max = ||X_std' (y - ybar)||_inf / n`.
fn penalty_grid(x: &DesignMatrix, y: &[f64], cfg: &CvConfig) -> Vec<f64> {
    let (xs, info) = standardize(x);
    let n = x.n() as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let mut lambda_max = 0.0f64;
    for j in 0..xs.p() {
        if info.constant_columns[j] {
            continue;
        }
        let dot: f64 = xs
            .column(j)
            .iter()
            .zip(y)
            .map(|(v, yi)| v * (yi - y_mean))
            .sum();
        lambda_max = lambda_max.max((dot / n).abs());
    }
    let t_max = (cfg.grid_size - 1) as f64;
    (0..cfg.grid_size)
        .map(|t| lambda_max * cfg.lambda_min_ratio.powf(t as f64 / t_max))
        .collect()
}

fn validate_penalty(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "penalty must be a finite non-negative number, got {lambda}"
        )));
    }
    Ok(())
}

fn validate_controls(tol: f64, max_iter: usize) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be a finite positive number, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter(
            "max_iter must be at least 1".into(),
        ));
    }
    Ok(())
}

fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// Gradient bookkeeping for coordinate descent. Both modes apply the same
/// updates in the same order; they differ only in what is kept current after
/// each coefficient change, so results agree up to floating-point rounding.
enum Gradients {
    /// Residual `yc - Xs b` kept current: O(n) per coordinate update. Exact
    /// objective values for free, so single fits and traced runs use this.
    Naive { residual: Vec<f64> },
    /// Every column's gradient `(1/n) xs_j' (yc - Xs b)` kept current via
    /// Gram columns: O(p) per update and per optimality check, which wins on
    /// long penalty paths where n >> p.
    Cov {
        c: Vec<f64>,
        /// Lazily materialized Gram columns `(1/n) Xs' xs_k`; only columns
        /// that ever activate are formed.
        gram: Vec<Option<Vec<f64>>>,
        /// Centered response, kept to reconstruct the residual on demand.
        yc: Vec<f64>,
    },
}

/// Coordinate-descent state on a standardized design, warm-startable across
/// a penalty path.
pub(super) struct CdState<'a> {
    xs: &'a DesignMatrix,
    /// Indices of non-constant columns; only these are ever updated.
    eligible: Vec<usize>,
    /// `(1/n) * ||xs_j||^2`; ~1 after standardization but kept exact.
    col_norm2: Vec<f64>,
    beta: Vec<f64>,
    grads: Gradients,
    n_inv: f64,
}

impl<'a> CdState<'a> {
    pub(super) fn new(xs: &'a DesignMatrix, info: &Standardization, yc: Vec<f64>) -> Self {
        Self::build(xs, info, Gradients::Naive { residual: yc })
    }

    /// Covariance-mode state; standardized constant columns are all-zero, so
    /// their initial gradients come out exactly 0.
    pub(super) fn new_covariance(
        xs: &'a DesignMatrix,
        info: &Standardization,
        yc: Vec<f64>,
    ) -> Self {
        let n_inv = 1.0 / xs.n() as f64;
        let c = (0..xs.p())
            .map(|j| xs.column(j).iter().zip(&yc).map(|(v, r)| v * r).sum::<f64>() * n_inv)
            .collect();
        let gram = vec![None; xs.p()];
        Self::build(xs, info, Gradients::Cov { c, gram, yc })
    }

    fn build(xs: &'a DesignMatrix, info: &Standardization, grads: Gradients) -> Self {
        let n_inv = 1.0 / xs.n() as f64;
        let eligible: Vec<usize> = (0..xs.p())
            .filter(|&j| !info.constant_columns[j])
            .collect();
        let col_norm2 = (0..xs.p())
            .map(|j| xs.column(j).iter().map(|v| v * v).sum::<f64>() * n_inv)
            .collect();
        Self {
            xs,
            eligible,
            col_norm2,
            beta: vec![0.0; xs.p()],
            grads,
            n_inv,
        }
    }

    /// Current gradient `(1/n) xs_j' (yc - Xs b)` of coordinate `j`.
    fn gradient(&self, j: usize) -> f64 {
        match &self.grads {
            Gradients::Naive { residual } => {
                self.xs
                    .column(j)
                    .iter()
                    .zip(residual)
                    .map(|(v, r)| v * r)
                    .sum::<f64>()
                    * self.n_inv
            }
            Gradients::Cov { c, .. } => c[j],
        }
    }

    /// Propagates a coefficient change `delta` at coordinate `j` to whatever
    /// the active mode keeps current.
    fn apply_update(&mut self, j: usize, delta: f64) {
        match &mut self.grads {
            Gradients::Naive { residual } => {
                for (r, v) in residual.iter_mut().zip(self.xs.column(j)) {
                    *r -= delta * v;
                }
            }
            Gradients::Cov { c, gram, .. } => {
                if gram[j].is_none() {
                    let col_j = self.xs.column(j);
                    let mut g = vec![0.0; self.xs.p()];
                    for &m in &self.eligible {
                        g[m] = self
                            .xs
                            .column(m)
                            .iter()
                            .zip(col_j)
                            .map(|(a, b)| a * b)
                            .sum::<f64>()
                            * self.n_inv;
                    }
                    gram[j] = Some(g);
                }
                let gj = gram[j].as_ref().expect("gram column just materialized");
                for &m in &self.eligible {
                    c[m] -= delta * gj[m];
                }
            }
        }
    }

    /// One pass over `coords`; returns the largest absolute coefficient
    /// change.
    fn sweep(&mut self, coords: &[usize], lambda: f64) -> f64 {
        let mut max_delta = 0.0f64;
        for &j in coords {
            let grad = self.gradient(j);
            let rho = grad + self.col_norm2[j] * self.beta[j];
            let bnew = soft_threshold(rho, lambda) / self.col_norm2[j];
            let delta = bnew - self.beta[j];
            if delta != 0.0 {
                self.apply_update(j, delta);
                self.beta[j] = bnew;
            }
            max_delta = max_delta.max(delta.abs());
        }
        max_delta
    }

    /// Largest violation of the subgradient optimality conditions at
    /// `lambda`.
    fn kkt_gap(&self, lambda: f64) -> f64 {
        let mut gap = 0.0f64;
        for &j in &self.eligible {
            let grad = self.gradient(j);
            let v = if self.beta[j] != 0.0 {
                (grad - lambda * self.beta[j].signum()).abs()
            } else {
                (grad.abs() - lambda).max(0.0)
            };
            gap = gap.max(v);
        }
        gap
    }

    fn objective(&self, lambda: f64) -> f64 {
        let sse: f64 = match &self.grads {
            Gradients::Naive { residual } => residual.iter().map(|r| r * r).sum(),
            Gradients::Cov { yc, .. } => {
                let mut r = yc.clone();
                for &j in &self.eligible {
                    let b = self.beta[j];
                    if b != 0.0 {
                        for (ri, v) in r.iter_mut().zip(self.xs.column(j)) {
                            *ri -= b * v;
                        }
                    }
                }
                r.iter().map(|v| v * v).sum()
            }
        };
        0.5 * sse * self.n_inv + lambda * self.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// Runs sweeps until the largest coefficient change drops below `tol`
    /// (and the optimality gap confirms convergence) or `max_iter` sweeps
    /// elapse. Most sweeps cycle only the active set; full passes refresh it.
    /// When `trace` is given, the objective is recorded after every sweep.
    pub(super) fn run(
        &mut self,
        lambda: f64,
        tol: f64,
        max_iter: usize,
        mut trace: Option<&mut Vec<f64>>,
    ) -> usize {
        let mut sweeps = 0;
        let eligible = self.eligible.clone();
        loop {
            let delta = self.sweep(&eligible, lambda);
            sweeps += 1;
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(self.objective(lambda));
            }
            if sweeps >= max_iter {
                return sweeps;
            }
            if delta < tol && self.kkt_gap(lambda) <= 5.0 * tol {
                return sweeps;
            }
            let active: Vec<usize> = eligible
                .iter()
                .copied()
                .filter(|&j| self.beta[j] != 0.0)
                .collect();
            loop {
                let d = self.sweep(&active, lambda);
                sweeps += 1;
                if let Some(tr) = trace.as_deref_mut() {
                    tr.push(self.objective(lambda));
                }
                if d < tol || sweeps >= max_iter {
                    break;
                }
            }
            if sweeps >= max_iter {
                return sweeps;
            }
        }
    }

    /// Maps standardized coefficients back to the original covariate scale.
    pub(super) fn original_scale_terms(
        &self,
        info: &Standardization,
        y_mean: f64,
    ) -> (Vec<f64>, f64) {
        let coefficients: Vec<f64> = self
            .beta
            .iter()
            .enumerate()
            .map(|(j, b)| {
                if info.constant_columns[j] {
                    0.0
                } else {
                    b / info.scales[j]
                }
            })
            .collect();
        let intercept = y_mean
            - coefficients
                .iter()
                .zip(&info.means)
                .map(|(c, m)| c * m)
                .sum::<f64>();
        (coefficients, intercept)
    }
}
