//! Least squares with an optional ridge stabilizer, solved by Cholesky on
//! the centered Gram matrix.

use super::{
    validate_response, DesignMatrix, FitMethod, LinearPredictor, CONSTANT_COLUMN_REL_TOL,
};
use crate::error::{Error, Result};

/// A Cholesky pivot below this fraction of its original diagonal entry marks
/// the Gram matrix as numerically singular. Exact duplicate columns land
/// orders of magnitude below it; legitimately correlated designs stay above
/// unless collinear to ~12 digits.
const PIVOT_REL_TOL: f64 = 1e-11;

/// Least-squares fit of `y` on `x` with intercept, solving
/// `(Xc' Xc + n * ridge_eps * I) b = Xc' yc` on centered data.
///
/// `ridge_eps = 0` requests the exact solution and fails with a singularity
/// error when the design does not determine one.
pub fn ols_fit(x: &DesignMatrix, y: &[f64], ridge_eps: f64) -> Result<LinearPredictor> {
    fit(x, y, ridge_eps, FitMethod::Ols)
}

/// Identical numerics to [`ols_fit`]; exists as the named population-
/// projection nuisance so fitted models advertise how they were produced.
pub fn linear_projection(x: &DesignMatrix, y: &[f64], ridge_eps: f64) -> Result<LinearPredictor> {
    fit(x, y, ridge_eps, FitMethod::Projection)
}

fn fit(x: &DesignMatrix, y: &[f64], ridge_eps: f64, method: FitMethod) -> Result<LinearPredictor> {
    validate_response(x, y)?;
    if !ridge_eps.is_finite() || ridge_eps < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ridge_eps must be a finite non-negative number, got {ridge_eps}"
        )));
    }
    let n = x.n();
    let nf = n as f64;
    let p = x.p();
    let y_mean = y.iter().sum::<f64>() / nf;

    // Constant columns cannot carry signal after centering; they are excluded
    // from the solve and reported with coefficient exactly 0.
    let mut means = vec![0.0; p];
    let mut active = Vec::with_capacity(p);
    for j in 0..p {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / nf;
        means[j] = mean;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        if var.sqrt() > CONSTANT_COLUMN_REL_TOL * (1.0 + mean.abs()) {
            active.push(j);
        }
    }

    let a = active.len();
    let mut coefficients = vec![0.0; p];
    if a > 0 {
        // Centered copies of the active columns.
        let centered: Vec<Vec<f64>> = active
            .iter()
            .map(|&j| x.column(j).iter().map(|v| v - means[j]).collect())
            .collect();
        let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

        let mut gram = vec![0.0; a * a];
        for r in 0..a {
            for c in 0..=r {
                let dot: f64 = centered[r]
                    .iter()
                    .zip(&centered[c])
                    .map(|(u, v)| u * v)
                    .sum();
                gram[r * a + c] = dot;
                gram[c * a + r] = dot;
            }
            gram[r * a + r] += nf * ridge_eps;
        }
        let mut rhs: Vec<f64> = centered
            .iter()
            .map(|col| col.iter().zip(&yc).map(|(u, v)| u * v).sum())
            .collect();

        cholesky_solve_in_place(&mut gram, a, &mut rhs)?;
        for (&j, &b) in active.iter().zip(&rhs) {
            coefficients[j] = b;
        }
    }

    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&means)
            .map(|(c, m)| c * m)
            .sum::<f64>();
    Ok(LinearPredictor {
        intercept,
        coefficients,
        method,
        lambda: None,
    })
}

/// Centered second moments of a fixed set of columns over a fixed row set.
///
/// One O(n * dim^2) pass stores every pairwise centered dot product, after
/// which [`SecondMoments::project`] solves the least-squares projection of
/// any column onto any subset of the others without revisiting the rows.
/// The arithmetic reproduces [`linear_projection`] on the corresponding
/// submatrix bit for bit: same means, same Gram entries, same solve.
pub struct SecondMoments {
    dim: usize,
    n: usize,
    means: Vec<f64>,
    /// Per column, whether it passes the non-constant test applied to design
    /// columns in [`ols_fit`].
    non_constant: Vec<bool>,
    /// Row-major `dim x dim` Gram of the centered columns.
    gram: Vec<f64>,
}

impl SecondMoments {
    /// All columns must share one length; rows enter sums in slice order.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let dim = columns.len();
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "second moments need at least one column".into(),
            ));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "second moments need at least one row".into(),
            ));
        }
        for col in columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "second-moment column",
                    expected: n,
                    actual: col.len(),
                });
            }
        }
        let nf = n as f64;
        let mut means = Vec::with_capacity(dim);
        let mut non_constant = Vec::with_capacity(dim);
        let mut centered = Vec::with_capacity(dim);
        for col in columns {
            let mean = col.iter().sum::<f64>() / nf;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
            means.push(mean);
            non_constant.push(var.sqrt() > CONSTANT_COLUMN_REL_TOL * (1.0 + mean.abs()));
            centered.push(col.iter().map(|v| v - mean).collect::<Vec<f64>>());
        }
        let mut gram = vec![0.0; dim * dim];
        for a in 0..dim {
            for b in 0..=a {
                let dot: f64 = centered[a]
                    .iter()
                    .zip(&centered[b])
                    .map(|(u, v)| u * v)
                    .sum();
                gram[a * dim + b] = dot;
                gram[b * dim + a] = dot;
            }
        }
        Ok(Self {
            dim,
            n,
            means,
            non_constant,
            gram,
        })
    }

    /// Least-squares projection of column `target` onto `regressors`,
    /// matching `linear_projection(submatrix, target_column, ridge_eps)`
    /// exactly. Returned coefficients align with `regressors`; constant
    /// regressors get exactly 0.
    pub fn project(
        &self,
        target: usize,
        regressors: &[usize],
        ridge_eps: f64,
    ) -> Result<LinearPredictor> {
        if !ridge_eps.is_finite() || ridge_eps < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ridge_eps must be a finite non-negative number, got {ridge_eps}"
            )));
        }
        debug_assert!(target < self.dim && regressors.iter().all(|&j| j < self.dim));
        debug_assert!(!regressors.contains(&target));
        let nf = self.n as f64;
        let y_mean = self.means[target];
        // Positions (within `regressors`) of the columns entering the solve.
        let active: Vec<usize> = (0..regressors.len())
            .filter(|&r| self.non_constant[regressors[r]])
            .collect();
        let a = active.len();
        let mut coefficients = vec![0.0; regressors.len()];
        if a > 0 {
            let mut gram = vec![0.0; a * a];
            for r in 0..a {
                for c in 0..=r {
                    let v = self.gram[regressors[active[r]] * self.dim + regressors[active[c]]];
                    gram[r * a + c] = v;
                    gram[c * a + r] = v;
                }
                gram[r * a + r] += nf * ridge_eps;
            }
            let mut rhs: Vec<f64> = active
                .iter()
                .map(|&r| self.gram[regressors[r] * self.dim + target])
                .collect();
            cholesky_solve_in_place(&mut gram, a, &mut rhs)?;
            for (&r, &b) in active.iter().zip(&rhs) {
                coefficients[r] = b;
            }
        }
        let intercept = y_mean
            - coefficients
                .iter()
                .zip(regressors.iter().map(|&j| self.means[j]))
                .map(|(c, m)| c * m)
                .sum::<f64>();
        Ok(LinearPredictor {
            intercept,
            coefficients,
            method: FitMethod::Projection,
            lambda: None,
        })
    }
}

/// In-place lower Cholesky factorization and solve of a symmetric system.
/// `a` is row-major `dim x dim`; `rhs` is overwritten with the solution.
fn cholesky_solve_in_place(a: &mut [f64], dim: usize, rhs: &mut [f64]) -> Result<()> {
    let thresholds: Vec<f64> = (0..dim).map(|j| PIVOT_REL_TOL * a[j * dim + j]).collect();
    for j in 0..dim {
        let mut d = a[j * dim + j];
        for k in 0..j {
            d -= a[j * dim + k] * a[j * dim + k];
        }
        if d <= thresholds[j] || !d.is_finite() {
            return Err(Error::SingularDesign);
        }
        let l = d.sqrt();
        a[j * dim + j] = l;
        for i in (j + 1)..dim {
            let mut v = a[i * dim + j];
            for k in 0..j {
                v -= a[i * dim + k] * a[j * dim + k];
            }
            a[i * dim + j] = v / l;
        }
    }
    // Forward substitution: L z = rhs.
    for i in 0..dim {
        let mut v = rhs[i];
        for k in 0..i {
            v -= a[i * dim + k] * rhs[k];
        }
        rhs[i] = v / a[i * dim + i];
    }
    // Back substitution: L' b = z.
    for i in (0..dim).rev() {
        let mut v = rhs[i];
        for k in (i + 1)..dim {
            v -= a[k * dim + i] * rhs[k];
        }
        rhs[i] = v / a[i * dim + i];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn matrix(cols: Vec<Vec<f64>>) -> DesignMatrix {
        let n = cols[0].len();
        DesignMatrix::from_columns(n, cols).unwrap()
    }

    #[test]
    fn recovers_exact_affine_relationship() {
        let x = matrix(vec![
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![0.0, 1.0, 0.0, 1.0, 1.0],
        ]);
        let y: Vec<f64> = (0..5)
            .map(|i| 2.0 + 3.0 * x.value(i, 0) - 1.5 * x.value(i, 1))
            .collect();
        let m = ols_fit(&x, &y, 0.0).unwrap();
        assert!((m.intercept - 2.0).abs() < 1e-10);
        assert!((m.coefficients[0] - 3.0).abs() < 1e-10);
        assert!((m.coefficients[1] + 1.5).abs() < 1e-10);
        assert_eq!(m.method, FitMethod::Ols);
        assert_eq!(m.lambda, None);
    }

    #[test]
    fn empty_design_yields_mean_model() {
        let x = DesignMatrix::from_columns(4, vec![]).unwrap();
        let m = ols_fit(&x, &[1.0, 2.0, 3.0, 6.0], 0.0).unwrap();
        assert_eq!(m.intercept, 3.0);
        assert!(m.coefficients.is_empty());
    }

    #[test]
    fn duplicate_columns_are_singular_without_ridge() {
        let c = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x = matrix(vec![c.clone(), c]);
        let y = vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        match ols_fit(&x, &y, 0.0) {
            Err(Error::SingularDesign) => {}
            other => panic!("expected singular design, got {other:?}"),
        }
        assert_eq!(
            Error::SingularDesign.to_string(),
            "singular design; supply ridge_eps"
        );
        // A positive ridge resolves it, splitting weight across the copies.
        let m = ols_fit(&x, &y, 1e-8).unwrap();
        assert!((m.coefficients[0] - m.coefficients[1]).abs() < 1e-6);
    }

    #[test]
    fn ridge_shrinks_monotonically() {
        let mut rng = rng_from(11, &[1]);
        let n = 60;
        let x1: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 1.0 + 2.0 * x1[i] - x2[i] + 0.1 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let x = matrix(vec![x1, x2]);
        let norm = |m: &LinearPredictor| {
            m.coefficients
                .iter()
                .map(|c| c * c)
                .sum::<f64>()
                .sqrt()
        };
        let exact = norm(&ols_fit(&x, &y, 0.0).unwrap());
        let light = norm(&ols_fit(&x, &y, 1e-4).unwrap());
        let heavy = norm(&ols_fit(&x, &y, 1.0).unwrap());
        assert!(exact > light && light > heavy);
    }

    #[test]
    fn constant_columns_get_zero_coefficient() {
        let x = matrix(vec![vec![5.0, 5.0, 5.0, 5.0], vec![1.0, 2.0, 3.0, 4.0]]);
        let y = vec![2.0, 4.0, 6.0, 8.0];
        let m = ols_fit(&x, &y, 0.0).unwrap();
        assert_eq!(m.coefficients[0], 0.0);
        assert!((m.coefficients[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn projection_matches_ols_bit_for_bit() {
        let mut rng = rng_from(5, &[2]);
        for trial in 0..10u64 {
            let n = 30 + (trial as usize) * 7;
            let cols: Vec<Vec<f64>> = (0..4)
                .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            let y: Vec<f64> = (0..n)
                .map(|i| cols[0][i] - 2.0 * cols[2][i] + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let x = matrix(cols);
            let a = ols_fit(&x, &y, 1e-8).unwrap();
            let b = linear_projection(&x, &y, 1e-8).unwrap();
            assert_eq!(a.coefficients, b.coefficients);
            assert_eq!(a.intercept, b.intercept);
            assert_eq!(b.method, FitMethod::Projection);
        }
    }

    #[test]
    fn second_moments_projection_is_bit_identical_to_direct_fit() {
        // Columns include a constant and a near-duplicate pair so both the
        // constant-exclusion and the singular/ridge paths are exercised.
        let mut rng = rng_from(14, &[5]);
        let n = 90;
        let mut cols: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        cols.push(vec![2.5; n]);
        cols.push(cols[1].clone()); // exact duplicate of column 1
        let dim = cols.len();

        let moments = SecondMoments::from_columns(&cols).unwrap();
        for target in 0..dim {
            let regressors: Vec<usize> = (0..dim).filter(|&j| j != target).collect();
            let sub = matrix(regressors.iter().map(|&j| cols[j].clone()).collect());
            for ridge in [0.0, 1e-8] {
                let direct = linear_projection(&sub, &cols[target], ridge);
                let shared = moments.project(target, &regressors, ridge);
                match (direct, shared) {
                    (Ok(a), Ok(b)) => {
                        assert_eq!(a.coefficients, b.coefficients, "target {target}");
                        assert_eq!(a.intercept.to_bits(), b.intercept.to_bits());
                        assert_eq!(a.method, b.method);
                    }
                    (Err(Error::SingularDesign), Err(Error::SingularDesign)) => {
                        assert_eq!(ridge, 0.0, "ridge {ridge} should have resolved it");
                    }
                    (d, s) => panic!("target {target} ridge {ridge}: {d:?} vs {s:?}"),
                }
            }
        }
    }

    #[test]
    fn second_moments_rejects_bad_shapes() {
        assert!(SecondMoments::from_columns(&[]).is_err());
        assert!(SecondMoments::from_columns(&[vec![]]).is_err());
        assert!(matches!(
            SecondMoments::from_columns(&[vec![1.0, 2.0], vec![3.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
        let m = SecondMoments::from_columns(&[vec![1.0, 2.0], vec![0.5, 0.25]]).unwrap();
        assert!(m.project(0, &[1], -1.0).is_err());
    }

    #[test]
    fn projecting_column_onto_itself_is_one_hot() {
        let mut rng = rng_from(9, &[3]);
        let n = 200;
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let target = cols[1].clone();
        let x = matrix(cols);
        let m = linear_projection(&x, &target, 1e-8).unwrap();
        assert!((m.coefficients[1] - 1.0).abs() < 1e-6);
        assert!(m.coefficients[0].abs() < 1e-6);
        assert!(m.coefficients[2].abs() < 1e-6);
        assert!(m.intercept.abs() < 1e-6);
    }

    #[test]
    fn independent_noise_has_near_zero_coefficients() {
        let mut rng = rng_from(21, &[4]);
        let n = 50_000;
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let m = ols_fit(&matrix(cols), &y, 0.0).unwrap();
        for c in &m.coefficients {
            assert!(c.abs() < 0.05, "coefficient {c} too large for pure noise");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = matrix(vec![vec![1.0, 2.0, 3.0]]);
        assert!(matches!(
            ols_fit(&x, &[1.0, 2.0], 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ols_fit(&x, &[1.0, f64::INFINITY, 3.0], 0.0),
            Err(Error::NonFinite)
        ));
        assert!(ols_fit(&x, &[1.0, 2.0, 3.0], -1.0).is_err());
    }
}
