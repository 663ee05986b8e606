//! Experiment harness: parameter-grid sweeps over the simulator, a
//! lasso-selection baseline, grouped metric aggregation, and stability
//! frequencies over repeated randomized runs.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, MIN_OBSERVATIONS};
use crate::error::{Error, Result};
use crate::linmodel::{lasso_cv, CvConfig};
use crate::metrics::{confusion, metrics, MetricsReport};
use crate::orthosearch::{discover, SearchConfig};
use crate::seed::{derive, rng_from, tag};
use crate::semgen::{sample_dag, sample_data, GenConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Corth,
    LassoBaseline,
}

impl Method {
    /// Stable stream key for seed derivation; must never be renumbered.
    fn code(self) -> u64 {
        match self {
            Method::Corth => 0,
            Method::LassoBaseline => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Corth => "corth",
            Method::LassoBaseline => "lasso_baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cartesian sweep specification. Cells enumerate in field order: node
/// count, sparsity, nonlinear probability, noise variance, observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub node_counts: Vec<usize>,
    pub sparsities: Vec<f64>,
    pub nonlinear_probs: Vec<f64>,
    pub noise_vars: Vec<f64>,
    pub obs_counts: Vec<usize>,
    #[serde(default = "default_graphs_per_cell")]
    pub graphs_per_cell: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_graphs_per_cell() -> usize {
    100
}

fn default_methods() -> Vec<Method> {
    vec![Method::Corth, Method::LassoBaseline]
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cell {
    d: usize,
    p_s: f64,
    p_n: f64,
    noise_var: f64,
    z: usize,
}

impl SweepGrid {
    fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("node_counts", self.node_counts.is_empty()),
            ("sparsities", self.sparsities.is_empty()),
            ("nonlinear_probs", self.nonlinear_probs.is_empty()),
            ("noise_vars", self.noise_vars.is_empty()),
            ("obs_counts", self.obs_counts.is_empty()),
            ("methods", self.methods.is_empty()),
        ] {
            if empty {
                return Err(Error::InvalidParameter(format!(
                    "sweep grid field {name} must be nonempty"
                )));
            }
        }
        if self.graphs_per_cell == 0 {
            return Err(Error::InvalidParameter(
                "graphs_per_cell must be at least 1".into(),
            ));
        }
        if self.obs_counts.iter().any(|&z| z < MIN_OBSERVATIONS) {
            return Err(Error::InvalidParameter(format!(
                "every observation count must be at least {MIN_OBSERVATIONS}"
            )));
        }
        // Probe one generator config per cell so bad cell parameters fail
        // up front instead of mid-sweep.
        for cell in self.cells() {
            GenConfig::new(cell.d, cell.p_s, cell.p_n, cell.noise_var, cell.z, 0);
            sample_dag(&GenConfig::new(
                cell.d, cell.p_s, cell.p_n, cell.noise_var, 4, 0,
            ))?;
        }
        Ok(())
    }

    fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &d in &self.node_counts {
            for &p_s in &self.sparsities {
                for &p_n in &self.nonlinear_probs {
                    for &noise_var in &self.noise_vars {
                        for &z in &self.obs_counts {
                            cells.push(Cell {
                                d,
                                p_s,
                                p_n,
                                noise_var,
                                z,
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    pub fn cell_count(&self) -> usize {
        self.node_counts.len()
            * self.sparsities.len()
            * self.nonlinear_probs.len()
            * self.noise_vars.len()
            * self.obs_counts.len()
    }

    pub fn record_count(&self) -> usize {
        self.cell_count() * self.graphs_per_cell * self.methods.len()
    }
}

/// One (cell, graph, method) result row.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub d: usize,
    pub p_s: f64,
    pub p_n: f64,
    pub noise_var: f64,
    pub z: usize,
    pub graph_seed: u64,
    pub method: Method,
    #[serde(flatten)]
    pub metrics: MetricsReport,
    pub wall_time_seconds: f64,
    pub failed_features: usize,
}

pub const RECORD_CSV_HEADER: &str =
    "d,p_s,p_n,noise_var,z,graph_seed,method,tpr,fpr,csi,acc,f1,mcc,wall_time_seconds,failed_features";

/// Writes records in the fixed column order. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_records_csv<W: Write>(records: &[RunRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{RECORD_CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.d,
            r.p_s,
            r.p_n,
            r.noise_var,
            r.z,
            r.graph_seed,
            r.method,
            r.metrics.tpr,
            r.metrics.fpr,
            r.metrics.csi,
            r.metrics.acc,
            r.metrics.f1,
            r.metrics.mcc,
            r.wall_time_seconds,
            r.failed_features
        )?;
    }
    Ok(())
}

/// Decision vector from cross-validated lasso of the response on all
/// covariates: a feature is selected when its coefficient is nonzero
/// (beyond 1e-10) at the chosen penalty.
pub fn lasso_baseline(data: &Dataset, cv: &CvConfig) -> Result<Vec<bool>> {
    let (_, model) = lasso_cv(data.x(), data.y(), cv)?;
    Ok(model.coefficients.iter().map(|c| c.abs() > 1e-10).collect())
}

fn run_methods(cell: Cell, graph_seed: u64, grid: &SweepGrid, search_cfg: &SearchConfig) -> Result<Vec<RunRecord>> {
    let gen_cfg = GenConfig {
        seed: graph_seed,
        ..GenConfig::new(cell.d, cell.p_s, cell.p_n, cell.noise_var, cell.z, 0)
    };
    let dag = sample_dag(&gen_cfg)?;
    let sim = sample_data(&dag, &gen_cfg)?;
    let mut records = Vec::with_capacity(grid.methods.len());
    for &method in &grid.methods {
        let method_seed = derive(graph_seed, &[tag::BENCH_METHOD, method.code()]);
        let start = Instant::now();
        let outcome: Result<(Vec<bool>, usize)> = match method {
            Method::Corth => {
                let cfg = SearchConfig {
                    seed: method_seed,
                    ..search_cfg.clone()
                };
                discover(&sim.dataset, &cfg)
                    .map(|report| (report.decision_vector(), report.failed_count()))
            }
            Method::LassoBaseline => {
                let cv = CvConfig {
                    seed: method_seed,
                    ..search_cfg.cv.clone()
                };
                lasso_baseline(&sim.dataset, &cv).map(|dec| (dec, 0))
            }
        };
        let wall_time_seconds = start.elapsed().as_secs_f64();
        // A failed run keeps its row so sweeps never lose cells: metrics go
        // NaN and every feature counts as failed.
        let (metrics_report, failed_features) = match outcome {
            Ok((dec, failed)) => (
                metrics(confusion(&dec, &sim.true_parents)?),
                failed,
            ),
            Err(_) => (MetricsReport::nan(), sim.dataset.p()),
        };
        records.push(RunRecord {
            d: cell.d,
            p_s: cell.p_s,
            p_n: cell.p_n,
            noise_var: cell.noise_var,
            z: cell.z,
            graph_seed,
            method,
            metrics: metrics_report,
            wall_time_seconds,
            failed_features,
        });
    }
    Ok(records)
}

/// Runs every (cell, graph, method) combination. Graphs are sampled from
/// seeds derived per (cell index, graph index), so records are identical
/// across thread counts and reruns, wall time aside. Output order is
/// (cell, graph, method).
pub fn run_grid(grid: &SweepGrid, search_cfg: &SearchConfig) -> Result<Vec<RunRecord>> {
    grid.validate()?;
    let cells = grid.cells();
    let jobs: Vec<(usize, Cell, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(cell_idx, &cell)| {
            (0..grid.graphs_per_cell).map(move |graph_idx| (cell_idx, cell, graph_idx))
        })
        .collect();
    let nested: Vec<Vec<RunRecord>> = jobs
        .into_par_iter()
        .map(|(cell_idx, cell, graph_idx)| {
            let graph_seed = derive(
                grid.base_seed,
                &[tag::BENCH_GRAPH, cell_idx as u64, graph_idx as u64],
            );
            run_methods(cell, graph_seed, grid, search_cfg)
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct AggregateRow {
    pub value: f64,
    pub method: Method,
    pub runs: usize,
    #[serde(flatten)]
    pub means: MetricsReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct AggregateReport {
    pub group_by: String,
    pub rows: Vec<AggregateRow>,
}

/// Mean metrics per (group value, method), grouped by one cell parameter.
/// Rows come out sorted by value then method, so output is deterministic.
pub fn aggregate(records: &[RunRecord], group_by: &str) -> Result<AggregateReport> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to aggregate".into()));
    }
    let key: fn(&RunRecord) -> f64 = match group_by {
        "d" => |r| r.d as f64,
        "p_s" => |r| r.p_s,
        "p_n" => |r| r.p_n,
        "noise_var" => |r| r.noise_var,
        "z" => |r| r.z as f64,
        _ => return Err(Error::UnknownGroupKey(group_by.to_string())),
    };
    let mut tagged: Vec<(f64, Method, &MetricsReport)> = records
        .iter()
        .map(|r| (key(r), r.method, &r.metrics))
        .collect();
    tagged.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| a.1.code().cmp(&b.1.code()))
    });
    let mut rows: Vec<AggregateRow> = Vec::new();
    for (value, method, m) in tagged {
        let fresh = match rows.last() {
            Some(row) => row.value != value || row.method != method,
            None => true,
        };
        if fresh {
            rows.push(AggregateRow {
                value,
                method,
                runs: 0,
                means: MetricsReport {
                    tpr: 0.0,
                    fpr: 0.0,
                    csi: 0.0,
                    acc: 0.0,
                    f1: 0.0,
                    mcc: 0.0,
                },
            });
        }
        let row = rows.last_mut().unwrap();
        row.runs += 1;
        row.means.tpr += m.tpr;
        row.means.fpr += m.fpr;
        row.means.csi += m.csi;
        row.means.acc += m.acc;
        row.means.f1 += m.f1;
        row.means.mcc += m.mcc;
    }
    for row in &mut rows {
        let n = row.runs as f64;
        row.means.tpr /= n;
        row.means.fpr /= n;
        row.means.csi /= n;
        row.means.acc /= n;
        row.means.f1 /= n;
        row.means.mcc /= n;
    }
    Ok(AggregateReport {
        group_by: group_by.to_string(),
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResampleMode {
    /// Vary only the fold-partition and nuisance-CV randomness per run.
    Reseed,
    /// Additionally resample ceil(fraction * n) rows with replacement.
    Bootstrap(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityEntry {
    pub name: String,
    pub selection_rate: f64,
    /// 1 + number of features with strictly higher rate; ties share a rank.
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub runs: usize,
    pub failed_runs: usize,
    /// Per-covariate rates, in dataset column order.
    pub features: Vec<StabilityEntry>,
    /// Feature indices sorted by rate descending (index ascending on ties).
    pub ranking: Vec<usize>,
}

/// Repeats discover `runs` times under varied randomness and reports how
/// often each feature is declared a parent. A failed run counts as zero
/// selections for every feature, so rate * runs stays an integer.
pub fn stability(
    data: &Dataset,
    cfg: &SearchConfig,
    runs: usize,
    resample: ResampleMode,
) -> Result<StabilityReport> {
    if runs == 0 {
        return Err(Error::InvalidParameter(
            "stability needs at least 1 run".into(),
        ));
    }
    if let ResampleMode::Bootstrap(fraction) = resample {
        if !fraction.is_finite() || fraction <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bootstrap fraction must be a positive finite number, got {fraction}"
            )));
        }
        let m = (fraction * data.n() as f64).ceil() as usize;
        if m < MIN_OBSERVATIONS {
            return Err(Error::InvalidParameter(format!(
                "bootstrap fraction {fraction} keeps only {m} rows; need at least {MIN_OBSERVATIONS}"
            )));
        }
    }
    let outcomes: Vec<Option<Vec<bool>>> = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let seed_r = derive(cfg.seed, &[tag::STABILITY_RUN, r]);
            let run_cfg = SearchConfig {
                seed: seed_r,
                ..cfg.clone()
            };
            let run = || -> Result<Vec<bool>> {
                let report = match resample {
                    ResampleMode::Reseed => discover(data, &run_cfg)?,
                    ResampleMode::Bootstrap(fraction) => {
                        let mut rng = rng_from(seed_r, &[tag::BOOTSTRAP]);
                        let m = (fraction * data.n() as f64).ceil() as usize;
                        let rows: Vec<usize> =
                            (0..m).map(|_| rng.gen_range(0..data.n())).collect();
                        discover(&data.select_rows(&rows)?, &run_cfg)?
                    }
                };
                Ok(report.decision_vector())
            };
            run().ok()
        })
        .collect();

    let p = data.p();
    let mut counts = vec![0usize; p];
    let mut failed_runs = 0usize;
    for outcome in &outcomes {
        match outcome {
            Some(dec) => {
                for (c, &sel) in counts.iter_mut().zip(dec) {
                    *c += sel as usize;
                }
            }
            None => failed_runs += 1,
        }
    }
    let rates: Vec<f64> = counts.iter().map(|&c| c as f64 / runs as f64).collect();
    let features: Vec<StabilityEntry> = rates
        .iter()
        .enumerate()
        .map(|(i, &rate)| StabilityEntry {
            name: data.column_names()[i].clone(),
            selection_rate: rate,
            rank: 1 + rates.iter().filter(|&&other| other > rate).count(),
        })
        .collect();
    let mut ranking: Vec<usize> = (0..p).collect();
    ranking.sort_by(|&a, &b| rates[b].total_cmp(&rates[a]).then(a.cmp(&b)));
    Ok(StabilityReport {
        runs,
        failed_runs,
        features,
        ranking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linmodel::DesignMatrix;
    use crate::orthosearch::Nuisance;
    use rand_distr::StandardNormal;

    fn tiny_grid() -> SweepGrid {
        SweepGrid {
            node_counts: vec![3, 4],
            sparsities: vec![0.5],
            nonlinear_probs: vec![0.0],
            noise_vars: vec![1.0],
            obs_counts: vec![60],
            graphs_per_cell: 2,
            methods: vec![Method::Corth, Method::LassoBaseline],
            base_seed: 9,
        }
    }

    fn fast_search() -> SearchConfig {
        SearchConfig {
            nuisance: Nuisance::Projection,
            ..SearchConfig::default()
        }
    }

    /// Gaussian design with y = signal(x) + noise, for baseline tests.
    fn synthetic(
        n: usize,
        p: usize,
        seed: u64,
        signal: impl Fn(&[f64]) -> f64,
    ) -> Dataset {
        let mut rng = rng_from(seed, &[99]);
        let mut cols = vec![Vec::with_capacity(n); p];
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..p)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            y.push(signal(&row) + rng.sample::<f64, _>(StandardNormal));
            for (j, &v) in row.iter().enumerate() {
                cols[j].push(v);
            }
        }
        let names = (0..p).map(|j| format!("x{j}")).collect();
        Dataset::new(DesignMatrix::from_columns(n, cols).unwrap(), y, names, "y".into()).unwrap()
    }

    #[test]
    fn record_count_and_order_follow_grid() {
        let grid = tiny_grid();
        let records = run_grid(&grid, &fast_search()).unwrap();
        assert_eq!(records.len(), grid.record_count());
        assert_eq!(records.len(), 2 * 2 * 2);
        // Cell order: d=3 before d=4; within a graph, methods in grid order.
        assert_eq!(records[0].d, 3);
        assert_eq!(records[0].method, Method::Corth);
        assert_eq!(records[1].method, Method::LassoBaseline);
        assert_eq!(records[0].graph_seed, records[1].graph_seed);
        assert_ne!(records[0].graph_seed, records[2].graph_seed);
        assert_eq!(records[4].d, 4);
        assert!(records.iter().all(|r| r.wall_time_seconds >= 0.0));
    }

    #[test]
    fn rerun_is_identical_except_wall_time() {
        let grid = tiny_grid();
        let a = run_grid(&grid, &fast_search()).unwrap();
        let b = run_grid(&grid, &fast_search()).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.graph_seed, rb.graph_seed);
            assert_eq!(ra.method, rb.method);
            assert_eq!(ra.metrics, rb.metrics);
            assert_eq!(ra.failed_features, rb.failed_features);
        }
    }

    #[test]
    fn csv_has_fixed_header_and_one_row_per_record() {
        let grid = SweepGrid {
            graphs_per_cell: 1,
            ..tiny_grid()
        };
        let records = run_grid(&grid, &fast_search()).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], RECORD_CSV_HEADER);
        assert_eq!(lines.len(), 1 + records.len());
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 15);
        }
    }

    #[test]
    fn grid_validation_rejects_empty_and_degenerate() {
        let mut grid = tiny_grid();
        grid.methods.clear();
        assert!(run_grid(&grid, &fast_search()).is_err());
        let mut grid = tiny_grid();
        grid.obs_counts = vec![2];
        assert!(run_grid(&grid, &fast_search()).is_err());
        let mut grid = tiny_grid();
        grid.sparsities = vec![1.5];
        assert!(run_grid(&grid, &fast_search()).is_err());
        let mut grid = tiny_grid();
        grid.graphs_per_cell = 0;
        assert!(run_grid(&grid, &fast_search()).is_err());
    }

    #[test]
    fn baseline_selects_strong_signal() {
        let data = synthetic(2_000, 10, 5, |row| 5.0 * row[1]);
        let dec = lasso_baseline(&data, &CvConfig::default()).unwrap();
        assert!(dec[1]);
        let again = lasso_baseline(&data, &CvConfig::default()).unwrap();
        assert_eq!(dec, again);
    }

    #[test]
    fn baseline_stays_sparse_on_pure_noise() {
        let mut sparse_enough = 0;
        let reps = 100;
        for seed in 0..reps {
            let data = synthetic(200, 10, 1000 + seed, |_| 0.0);
            let dec = lasso_baseline(&data, &CvConfig::default()).unwrap();
            if dec.iter().filter(|&&b| b).count() <= 2 {
                sparse_enough += 1;
            }
        }
        assert!(
            sparse_enough >= 80,
            "only {sparse_enough}/{reps} runs selected <= 2 noise features"
        );
    }

    #[test]
    fn aggregate_means_match_hand_computation() {
        let grid = tiny_grid();
        let records = run_grid(&grid, &fast_search()).unwrap();
        let report = aggregate(&records, "d").unwrap();
        // 2 d-values x 2 methods.
        assert_eq!(report.rows.len(), 4);
        assert_eq!(report.rows[0].value, 3.0);
        assert_eq!(report.rows[0].method, Method::Corth);
        assert_eq!(report.rows[1].method, Method::LassoBaseline);
        assert_eq!(report.rows[2].value, 4.0);
        let total: usize = report.rows.iter().map(|r| r.runs).sum();
        assert_eq!(total, records.len());
        for row in &report.rows {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.d as f64 == row.value && r.method == row.method)
                .collect();
            assert_eq!(group.len(), row.runs);
            let mean_acc: f64 =
                group.iter().map(|r| r.metrics.acc).sum::<f64>() / group.len() as f64;
            assert!((row.means.acc - mean_acc).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_single_record_equals_itself() {
        let grid = SweepGrid {
            node_counts: vec![3],
            graphs_per_cell: 1,
            methods: vec![Method::Corth],
            ..tiny_grid()
        };
        let records = run_grid(&grid, &fast_search()).unwrap();
        assert_eq!(records.len(), 1);
        let report = aggregate(&records, "z").unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].runs, 1);
        assert_eq!(report.rows[0].means, records[0].metrics);
    }

    #[test]
    fn aggregate_rejects_unknown_key_and_empty_input() {
        let grid = SweepGrid {
            graphs_per_cell: 1,
            methods: vec![Method::Corth],
            ..tiny_grid()
        };
        let records = run_grid(&grid, &fast_search()).unwrap();
        let err = aggregate(&records, "alpha").unwrap_err();
        assert_eq!(err.to_string(), "unknown group key: alpha");
        assert!(aggregate(&[], "d").is_err());
    }

    #[test]
    fn stability_single_run_matches_discover() {
        let data = synthetic(400, 3, 7, |row| 3.0 * row[0]);
        let cfg = fast_search();
        let report = stability(&data, &cfg, 1, ResampleMode::Reseed).unwrap();
        assert_eq!(report.runs, 1);
        assert_eq!(report.failed_runs, 0);
        let single = discover(
            &data,
            &SearchConfig {
                seed: derive(cfg.seed, &[tag::STABILITY_RUN, 0]),
                ..cfg.clone()
            },
        )
        .unwrap();
        let rates: Vec<f64> = report.features.iter().map(|f| f.selection_rate).collect();
        let expected: Vec<f64> = single
            .decision_vector()
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect();
        assert_eq!(rates, expected);
    }

    #[test]
    fn stability_ranks_strong_parent_first_with_shared_ties() {
        let data = synthetic(600, 3, 13, |row| 4.0 * row[0]);
        let report = stability(&data, &fast_search(), 20, ResampleMode::Reseed).unwrap();
        assert_eq!(report.features[0].selection_rate, 1.0);
        assert_eq!(report.features[0].rank, 1);
        // Both noise features should be selected rarely; equal rates must
        // share a rank.
        for pair in report.features.windows(2).skip(1) {
            if pair[0].selection_rate == pair[1].selection_rate {
                assert_eq!(pair[0].rank, pair[1].rank);
            }
        }
        assert_eq!(report.ranking[0], 0);
        for entry in &report.features {
            let scaled = entry.selection_rate * report.runs as f64;
            assert!((scaled - scaled.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn stability_bootstrap_is_deterministic_and_validated() {
        let data = synthetic(200, 3, 17, |row| 3.0 * row[2]);
        let cfg = fast_search();
        let a = stability(&data, &cfg, 5, ResampleMode::Bootstrap(0.8)).unwrap();
        let b = stability(&data, &cfg, 5, ResampleMode::Bootstrap(0.8)).unwrap();
        let rates = |r: &StabilityReport| -> Vec<f64> {
            r.features.iter().map(|f| f.selection_rate).collect()
        };
        assert_eq!(rates(&a), rates(&b));
        assert_eq!(a.features[2].selection_rate, 1.0);
        assert!(stability(&data, &cfg, 0, ResampleMode::Reseed).is_err());
        assert!(stability(&data, &cfg, 5, ResampleMode::Bootstrap(0.0)).is_err());
        assert!(stability(&data, &cfg, 5, ResampleMode::Bootstrap(0.001)).is_err());
    }
}
