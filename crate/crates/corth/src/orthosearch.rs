//! Per-feature orthogonal-score search for direct causal parents.
//!
//! For each covariate X_i the routine cross-fits two nuisance regressions on
//! the remaining covariates Z = X_{-i} (one for the feature, one for the
//! response), then evaluates on each held-out fold
//!
//! * a partialled-out effect estimate `theta`,
//! * the expected conditional covariance `chi` between response and feature
//!   residuals, and
//! * the variance `sigma^2` of chi's per-observation summands.
//!
//! `chi` is zero exactly when X_i is not a direct parent of the response, so
//! scaling the fold-averaged estimate by `sqrt(n)/sigma` gives an
//! asymptotically standard-normal test statistic under the null. Features
//! whose two-sided p-value clears the (optionally Bonferroni-corrected)
//! level are reported as parents.

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::folds::shuffled_assignment;
use crate::linmodel::{
    lasso_cv, lasso_fit, linear_projection, predict, CvConfig, DesignMatrix, LinearPredictor,
    SecondMoments,
};
use crate::seed::{derive, rng_from, tag};
use crate::stats::two_sided_p;

pub use crate::stats::normal_quantile;

/// Two fold-level estimates agreeing worse than this (relative to the scale
/// of their summands) indicate an implementation fault, not noise.
pub const CHI_FORM_REL_TOL: f64 = 1e-10;

/// `|sum(V * D)|` at or below this is treated as a degenerate fold: the
/// feature carries no residual variation and no effect is identified.
pub const DEGENERATE_DENOMINATOR_TOL: f64 = 1e-12;

const ROLE_TREATMENT: u64 = 0;
const ROLE_OUTCOME: u64 = 1;

/// Row-to-fold assignment with fold sizes differing by at most one.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldPartition {
    assignment: Vec<usize>,
    folds: usize,
}

/// Randomly partitions `n` rows into `folds` balanced folds.
pub fn partition(n: usize, folds: usize, seed: u64) -> Result<FoldPartition> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "cross-fitting needs at least 2 folds, got {folds}"
        )));
    }
    if folds > n {
        return Err(Error::InvalidParameter(format!(
            "cannot split {n} observations into {folds} folds"
        )));
    }
    let assignment = shuffled_assignment(n, folds, &mut rng_from(seed, &[tag::PARTITION]));
    Ok(FoldPartition { assignment, folds })
}

impl FoldPartition {
    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Rows of fold `k`, ascending.
    pub fn fold_rows(&self, k: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == k)
            .collect()
    }

    /// Rows outside fold `k`, ascending.
    pub fn complement_rows(&self, k: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != k)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.folds];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Nuisance learner used for both per-feature regressions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nuisance {
    /// Lasso with the penalty chosen by cross-validation per fit.
    LassoCv,
    /// Lasso at one fixed penalty.
    LassoFixed(f64),
    /// Least-squares projection (exact solve, ridge fallback on singular
    /// designs).
    Projection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Cross-fitting folds K.
    pub folds: usize,
    /// Significance level for the parent test.
    pub alpha: f64,
    /// Divide alpha by the feature count before testing.
    pub bonferroni: bool,
    pub nuisance: Nuisance,
    /// Settings for `lasso_cv` nuisance fits.
    pub cv: CvConfig,
    /// Ridge applied when a projection nuisance hits a singular design;
    /// 0 disables the fallback.
    pub projection_ridge: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            folds: 2,
            alpha: 0.05,
            bonferroni: true,
            nuisance: Nuisance::LassoCv,
            cv: CvConfig::default(),
            projection_ridge: 1e-8,
            seed: 0,
        }
    }
}

/// The two cross-fitted regressions for one (feature, fold) pair: `m_hat`
/// predicts the feature from Z, `g_hat` predicts the response from Z.
#[derive(Clone, Debug)]
pub struct NuisanceFit {
    pub m_hat: LinearPredictor,
    pub g_hat: LinearPredictor,
}

/// Fits both nuisance regressions for feature `i` on the complement of fold
/// `k`. Each fit draws its randomness from a stream keyed by
/// `(seed, feature, fold, role)`, so fits are reproducible in any order.
pub fn fit_nuisance(
    data: &Dataset,
    i: usize,
    part: &FoldPartition,
    k: usize,
    cfg: &SearchConfig,
) -> Result<NuisanceFit> {
    let train = part.complement_rows(k);
    let z = data.x().select_rows(&train).drop_column(i);
    let d_col = data.x().column(i);
    let d: Vec<f64> = train.iter().map(|&r| d_col[r]).collect();
    let y: Vec<f64> = train.iter().map(|&r| data.y()[r]).collect();

    let m_hat = fit_one(&z, &d, i, k, ROLE_TREATMENT, cfg);
    let g_hat = fit_one(&z, &y, i, k, ROLE_OUTCOME, cfg);
    Ok(NuisanceFit {
        m_hat: m_hat?,
        g_hat: g_hat?,
    })
}

fn fit_one(
    z: &DesignMatrix,
    target: &[f64],
    i: usize,
    k: usize,
    role: u64,
    cfg: &SearchConfig,
) -> Result<LinearPredictor> {
    match cfg.nuisance {
        Nuisance::LassoCv => {
            let cv = CvConfig {
                seed: derive(cfg.seed, &[tag::NUISANCE, i as u64, k as u64, role]),
                ..cfg.cv.clone()
            };
            lasso_cv(z, target, &cv).map(|(_, model)| model)
        }
        Nuisance::LassoFixed(lambda) => lasso_fit(z, target, lambda),
        Nuisance::Projection => match linear_projection(z, target, 0.0) {
            Err(Error::SingularDesign) if cfg.projection_ridge > 0.0 => {
                linear_projection(z, target, cfg.projection_ridge)
            }
            other => other,
        },
    }
}

/// Centered second moments of `[X, y]` (response at index `d`) on the
/// complement of fold `k`. One pass serves all of the fold's projection
/// fits, each of which would otherwise recompute a Gram of the same columns.
fn fold_moments(data: &Dataset, part: &FoldPartition, k: usize) -> Result<SecondMoments> {
    let train = part.complement_rows(k);
    let d = data.p();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    for j in 0..d {
        let col = data.x().column(j);
        columns.push(train.iter().map(|&r| col[r]).collect());
    }
    columns.push(train.iter().map(|&r| data.y()[r]).collect());
    SecondMoments::from_columns(&columns)
}

/// Projection with the same singular-design/ridge fallback as [`fit_one`].
fn project_one(
    moments: &SecondMoments,
    target: usize,
    regressors: &[usize],
    cfg: &SearchConfig,
) -> Result<LinearPredictor> {
    match moments.project(target, regressors, 0.0) {
        Err(Error::SingularDesign) if cfg.projection_ridge > 0.0 => {
            moments.project(target, regressors, cfg.projection_ridge)
        }
        other => other,
    }
}

/// [`fit_nuisance`] for the projection learner, solved from the fold's
/// shared second moments; produces bit-identical models.
fn fit_nuisance_from_moments(
    moments: &SecondMoments,
    i: usize,
    d: usize,
    cfg: &SearchConfig,
) -> Result<NuisanceFit> {
    let regressors: Vec<usize> = (0..d).filter(|&j| j != i).collect();
    let m_hat = project_one(moments, i, &regressors, cfg);
    let g_hat = project_one(moments, d, &regressors, cfg);
    Ok(NuisanceFit {
        m_hat: m_hat?,
        g_hat: g_hat?,
    })
}

/// Held-out fold values and nuisance predictions for one (feature, fold).
struct FoldEval {
    d: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
    g: Vec<f64>,
}

fn fold_eval(
    data: &Dataset,
    i: usize,
    part: &FoldPartition,
    k: usize,
    fit: &NuisanceFit,
) -> Result<FoldEval> {
    let rows = part.fold_rows(k);
    let z = data.x().select_rows(&rows).drop_column(i);
    let d_col = data.x().column(i);
    Ok(FoldEval {
        d: rows.iter().map(|&r| d_col[r]).collect(),
        y: rows.iter().map(|&r| data.y()[r]).collect(),
        m: predict(&fit.m_hat, &z)?,
        g: predict(&fit.g_hat, &z)?,
    })
}

impl FoldEval {
    /// Per-observation summand of the conditional-covariance estimate in its
    /// expanded form `-y*m - d*g + m*g + y*d`.
    fn chi_summand(&self, idx: usize) -> f64 {
        let (d, y, m, g) = (self.d[idx], self.y[idx], self.m[idx], self.g[idx]);
        -y * m - d * g + m * g + y * d
    }
}

/// Fold-level effect estimate: `sum(V * (y - g)) / sum(V * D)` with
/// `V = D - m`. Errors when the denominator is numerically zero (the feature
/// has no residual variation on this fold).
pub fn theta_fold(
    data: &Dataset,
    i: usize,
    part: &FoldPartition,
    k: usize,
    fit: &NuisanceFit,
) -> Result<f64> {
    let ev = fold_eval(data, i, part, k, fit)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for idx in 0..ev.d.len() {
        let v = ev.d[idx] - ev.m[idx];
        num += v * (ev.y[idx] - ev.g[idx]);
        den += v * ev.d[idx];
    }
    if den.abs() <= DEGENERATE_DENOMINATOR_TOL {
        return Err(Error::DegenerateResidualVariance { feature: i });
    }
    Ok(num / den)
}

/// Both algebraic forms of the fold-level conditional-covariance estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiForms {
    /// Mean of `-y*m - d*g + m*g + y*d`.
    pub expansion: f64,
    /// Mean of `(y - g) * (d - m)`.
    pub residual_product: f64,
}

impl ChiForms {
    /// Absolute disagreement allowed between the forms, scaled by the
    /// magnitude of what was averaged (cancellation can make both means tiny
    /// relative to their summands).
    pub fn tolerance(&self, summand_scale: f64) -> f64 {
        CHI_FORM_REL_TOL
            * summand_scale
                .max(self.expansion.abs())
                .max(self.residual_product.abs())
                .max(f64::MIN_POSITIVE)
    }
}

/// Computes the conditional-covariance estimate both ways.
pub fn chi_fold_forms(
    data: &Dataset,
    i: usize,
    part: &FoldPartition,
    k: usize,
    fit: &NuisanceFit,
) -> Result<ChiForms> {
    let ev = fold_eval(data, i, part, k, fit)?;
    let n = ev.d.len() as f64;
    let mut expansion = 0.0;
    let mut residual_product = 0.0;
    for idx in 0..ev.d.len() {
        expansion += ev.chi_summand(idx);
        residual_product += (ev.y[idx] - ev.g[idx]) * (ev.d[idx] - ev.m[idx]);
    }
    Ok(ChiForms {
        expansion: expansion / n,
        residual_product: residual_product / n,
    })
}

/// Fold-level conditional-covariance estimate (expanded form). Debug builds
/// cross-check it against the residual-product form.
pub fn chi_fold(
    data: &Dataset,
    i: usize,
    part: &FoldPartition,
    k: usize,
    fit: &NuisanceFit,
) -> Result<f64> {
    let forms = chi_fold_forms(data, i, part, k, fit)?;
    #[cfg(debug_assertions)]
    {
        let ev = fold_eval(data, i, part, k, fit)?;
        let scale = (0..ev.d.len())
            .map(|idx| ev.chi_summand(idx).abs())
            .sum::<f64>()
            / ev.d.len() as f64;
        debug_assert!(
            (forms.expansion - forms.residual_product).abs() <= forms.tolerance(scale),
            "chi forms disagree: {} vs {}",
            forms.expansion,
            forms.residual_product
        );
    }
    Ok(forms.expansion)
}

/// Fold-level variance of the chi summands around the fold estimate
/// `chi_k`; the returned value is a variance, not a standard deviation.
pub fn sigma_fold(
    data: &Dataset,
    i: usize,
    part: &FoldPartition,
    k: usize,
    fit: &NuisanceFit,
    chi_k: f64,
) -> Result<f64> {
    let ev = fold_eval(data, i, part, k, fit)?;
    let n = ev.d.len() as f64;
    let mut acc = 0.0;
    for idx in 0..ev.d.len() {
        let dev = ev.chi_summand(idx) - chi_k;
        acc += dev * dev;
    }
    Ok(acc / n)
}

/// Pools fold-level results: means for `theta` and `chi`, and the square
/// root of the mean fold variance for `sigma`.
pub fn aggregate_feature(thetas: &[f64], chis: &[f64], variances: &[f64]) -> (f64, f64, f64) {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    (mean(thetas), mean(chis), mean(variances).sqrt())
}

/// Outcome of the normality test for one feature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestOutcome {
    pub z: f64,
    pub p_value: f64,
    pub is_parent: bool,
}

/// Tests `chi_hat` against N(0, sigma_hat^2 / n); `n` is the total
/// observation count across folds. With `sigma_hat == 0` the test degenerates
/// to an exact rule: any nonzero `chi_hat` is a parent (z reported as the
/// +inf sentinel), zero is not.
pub fn test_feature(
    chi_hat: f64,
    sigma_hat: f64,
    n: usize,
    n_features: usize,
    cfg: &SearchConfig,
) -> TestOutcome {
    let alpha_eff = if cfg.bonferroni {
        cfg.alpha / n_features as f64
    } else {
        cfg.alpha
    };
    if sigma_hat == 0.0 {
        return if chi_hat != 0.0 {
            TestOutcome {
                z: f64::INFINITY,
                p_value: 0.0,
                is_parent: true,
            }
        } else {
            TestOutcome {
                z: 0.0,
                p_value: 1.0,
                is_parent: false,
            }
        };
    }
    let z = chi_hat * (n as f64).sqrt() / sigma_hat;
    let p_value = two_sided_p(z);
    TestOutcome {
        z,
        p_value,
        is_parent: p_value < alpha_eff,
    }
}

/// Per-feature search result. For failed features the point estimates and z
/// are NaN (serialized as JSON null), the p-value is pinned to 1, and the
/// feature is never reported as a parent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureStat {
    pub name: String,
    pub theta_hat: f64,
    pub chi_hat: f64,
    pub sigma_hat: f64,
    pub z: f64,
    pub p_value: f64,
    pub is_parent: bool,
    pub failed: bool,
}

impl FeatureStat {
    fn failed(name: String) -> Self {
        Self {
            name,
            theta_hat: f64::NAN,
            chi_hat: f64::NAN,
            sigma_hat: f64::NAN,
            z: f64::NAN,
            p_value: 1.0,
            is_parent: false,
            failed: true,
        }
    }
}

/// Full search result.
#[derive(Clone, Debug)]
pub struct ParentReport {
    pub n: usize,
    pub config: SearchConfig,
    pub features: Vec<FeatureStat>,
    /// Nuisance fits attempted; diagnostics only, not serialized.
    pub nuisance_fits: usize,
}

impl ParentReport {
    pub fn decision_vector(&self) -> Vec<bool> {
        self.features.iter().map(|f| f.is_parent).collect()
    }

    pub fn failed_count(&self) -> usize {
        self.features.iter().filter(|f| f.failed).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

impl Serialize for ParentReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ParentReport", 4)?;
        s.serialize_field("version", &1u32)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("config", &self.config)?;
        s.serialize_field("features", &self.features)?;
        s.end()
    }
}

/// Runs the full search: one balanced partition, 2·d·K nuisance fits, and a
/// per-feature test. A failure in any step for one feature marks only that
/// feature as failed; the others are unaffected. Output is independent of
/// thread count.
pub fn discover(data: &Dataset, cfg: &SearchConfig) -> Result<ParentReport> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "significance level must lie in (0, 1), got {}",
            cfg.alpha
        )));
    }
    let part = partition(data.n(), cfg.folds, derive(cfg.seed, &[tag::PARTITION]))?;
    let d = data.p();
    // Projection nuisances all solve against the same per-fold Gram, so it
    // is computed once up front instead of 2·d times.
    let moments = match cfg.nuisance {
        Nuisance::Projection => Some(
            (0..cfg.folds)
                .map(|k| fold_moments(data, &part, k))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    let results: Vec<(FeatureStat, usize)> = (0..d)
        .into_par_iter()
        .map(|i| run_feature(data, &part, i, d, cfg, moments.as_deref()))
        .collect();
    let nuisance_fits = results.iter().map(|(_, fits)| fits).sum();
    Ok(ParentReport {
        n: data.n(),
        config: cfg.clone(),
        features: results.into_iter().map(|(stat, _)| stat).collect(),
        nuisance_fits,
    })
}

fn run_feature(
    data: &Dataset,
    part: &FoldPartition,
    i: usize,
    d: usize,
    cfg: &SearchConfig,
    moments: Option<&[SecondMoments]>,
) -> (FeatureStat, usize) {
    let name = data.column_names()[i].clone();
    let mut fits = 0usize;
    let mut thetas = Vec::with_capacity(cfg.folds);
    let mut chis = Vec::with_capacity(cfg.folds);
    let mut variances = Vec::with_capacity(cfg.folds);
    let mut ok = true;
    for k in 0..cfg.folds {
        // Both regressions are attempted for every fold even after an
        // earlier failure, keeping the fit count at exactly 2 per fold.
        fits += 2;
        let attempt = match moments {
            Some(m) => fit_nuisance_from_moments(&m[k], i, d, cfg),
            None => fit_nuisance(data, i, part, k, cfg),
        };
        let fit = match attempt {
            Ok(fit) => fit,
            Err(_) => {
                ok = false;
                continue;
            }
        };
        if !ok {
            continue;
        }
        let fold_result = (|| -> Result<()> {
            let theta = theta_fold(data, i, part, k, &fit)?;
            let chi = chi_fold(data, i, part, k, &fit)?;
            let var = sigma_fold(data, i, part, k, &fit, chi)?;
            thetas.push(theta);
            chis.push(chi);
            variances.push(var);
            Ok(())
        })();
        if fold_result.is_err() {
            ok = false;
        }
    }
    if !ok {
        return (FeatureStat::failed(name), fits);
    }
    let (theta_hat, chi_hat, sigma_hat) = aggregate_feature(&thetas, &chis, &variances);
    let outcome = test_feature(chi_hat, sigma_hat, data.n(), d, cfg);
    (
        FeatureStat {
            name,
            theta_hat,
            chi_hat,
            sigma_hat,
            z: outcome.z,
            p_value: outcome.p_value,
            is_parent: outcome.is_parent,
            failed: false,
        },
        fits,
    )
}
