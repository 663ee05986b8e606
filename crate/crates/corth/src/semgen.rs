//! Synthetic structural-equation benchmark generator: random DAGs over d
//! nodes with linear or tanh edge contributions and Gaussian noise, plus the
//! ground-truth parent sets the search is scored against.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linmodel::DesignMatrix;
use crate::seed::{rng_from, tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Linear,
    Nonlinear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
    /// Multiplier on the contribution: `weight * x` for linear edges,
    /// `weight * tanh(beta * x)` for nonlinear ones.
    pub weight: f64,
}

/// A sampled (or hand-built) graph: node count, topological order, response
/// node, and weighted edges. Every edge must point forward in `order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagSpec {
    pub d: usize,
    pub order: Vec<usize>,
    pub target: usize,
    pub edges: Vec<Edge>,
}

impl DagSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!(
                "graph needs at least 2 nodes, got {}",
                self.d
            )));
        }
        if self.order.len() != self.d {
            return Err(Error::InvalidParameter(
                "topological order must list every node exactly once".into(),
            ));
        }
        let mut position = vec![usize::MAX; self.d];
        for (pos, &node) in self.order.iter().enumerate() {
            if node >= self.d || position[node] != usize::MAX {
                return Err(Error::InvalidParameter(
                    "topological order must list every node exactly once".into(),
                ));
            }
            position[node] = pos;
        }
        if self.target >= self.d {
            return Err(Error::InvalidParameter(format!(
                "target node {} out of range for {} nodes",
                self.target, self.d
            )));
        }
        for e in &self.edges {
            if e.src >= self.d || e.dst >= self.d || e.src == e.dst {
                return Err(Error::InvalidParameter(format!(
                    "edge {} -> {} out of range",
                    e.src, e.dst
                )));
            }
            if position[e.src] >= position[e.dst] {
                return Err(Error::InvalidParameter(format!(
                    "edge {} -> {} points against the topological order",
                    e.src, e.dst
                )));
            }
            if !e.weight.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(())
    }

    /// Nodes exported as covariates: all but the target, ascending.
    pub fn covariate_nodes(&self) -> Vec<usize> {
        (0..self.d).filter(|&v| v != self.target).collect()
    }
}

/// Generator settings. `new` fills in the benchmark defaults: tanh scale
/// `alpha = 0.5`, slope `beta = 1.5`, and a linear weight of 2 for small
/// graphs (d <= 10) or 0.5 for larger ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub d: usize,
    /// Probability of including each forward edge.
    pub sparsity: f64,
    /// Probability that an included edge contributes nonlinearly.
    pub nonlinear_prob: f64,
    pub noise_var: f64,
    pub n_obs: usize,
    /// Nonlinear contribution scale.
    pub alpha: f64,
    /// Nonlinear contribution slope inside tanh.
    pub beta: f64,
    /// Linear edge weight.
    pub theta: f64,
    pub seed: u64,
    /// Response node override; default is the last node in topological
    /// order, which guarantees the response has no descendants.
    pub target: Option<usize>,
    /// Force every edge into the target to contribute linearly.
    pub force_linear_target: bool,
}

impl GenConfig {
    pub fn new(
        d: usize,
        sparsity: f64,
        nonlinear_prob: f64,
        noise_var: f64,
        n_obs: usize,
        seed: u64,
    ) -> Self {
        Self {
            d,
            sparsity,
            nonlinear_prob,
            noise_var,
            n_obs,
            alpha: 0.5,
            beta: 1.5,
            theta: if d <= 10 { 2.0 } else { 0.5 },
            seed,
            target: None,
            force_linear_target: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!(
                "graph needs at least 2 nodes, got {}",
                self.d
            )));
        }
        for (name, p) in [
            ("sparsity", self.sparsity),
            ("nonlinear_prob", self.nonlinear_prob),
        ] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be a finite positive number, got {}",
                self.noise_var
            )));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("theta", self.theta),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if let Some(t) = self.target {
            if t >= self.d {
                return Err(Error::InvalidParameter(format!(
                    "target node {t} out of range for {} nodes",
                    self.d
                )));
            }
        }
        Ok(())
    }
}

/// Samples a random DAG: a uniformly shuffled topological order, each
/// forward edge included with probability `sparsity`, and each included
/// edge nonlinear with probability `nonlinear_prob`.
pub fn sample_dag(cfg: &GenConfig) -> Result<DagSpec> {
    cfg.validate()?;
    let mut rng = rng_from(cfg.seed, &[tag::DAG]);
    let mut order: Vec<usize> = (0..cfg.d).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng);
    let target = cfg.target.unwrap_or(order[cfg.d - 1]);

    let mut edges = Vec::new();
    for a in 0..cfg.d {
        for b in (a + 1)..cfg.d {
            if !rng.gen_bool(cfg.sparsity) {
                continue;
            }
            // The kind is always drawn so that toggling the force flag
            // cannot shift randomness for unrelated edges.
            let drawn_nonlinear = rng.gen_bool(cfg.nonlinear_prob);
            let (src, dst) = (order[a], order[b]);
            let kind = if cfg.force_linear_target && dst == target {
                EdgeKind::Linear
            } else if drawn_nonlinear {
                EdgeKind::Nonlinear
            } else {
                EdgeKind::Linear
            };
            let weight = match kind {
                EdgeKind::Linear => cfg.theta,
                EdgeKind::Nonlinear => cfg.alpha,
            };
            edges.push(Edge {
                src,
                dst,
                kind,
                weight,
            });
        }
    }
    let dag = DagSpec {
        d: cfg.d,
        order,
        target,
        edges,
    };
    dag.validate()?;
    Ok(dag)
}

/// Simulated draw from a DAG plus the ground truth the search is scored
/// against.
#[derive(Clone, Debug)]
pub struct SimulatedDataset {
    pub dataset: Dataset,
    pub dag: DagSpec,
    /// Parent indicator per covariate column of `dataset`.
    pub true_parents: Vec<bool>,
}

/// Ancestrally samples `cfg.n_obs` observations from `dag`. Nodes become
/// columns named by node index (`x3`); the target node becomes the response
/// `y`. Per-node noise draws come from streams keyed by node index, so the
/// data for a given (dag, config) pair is reproducible bit for bit.
pub fn sample_data(dag: &DagSpec, cfg: &GenConfig) -> Result<SimulatedDataset> {
    dag.validate()?;
    cfg.validate()?;
    let n = cfg.n_obs;
    let sd = cfg.noise_var.sqrt();

    let mut incoming: Vec<Vec<&Edge>> = vec![Vec::new(); dag.d];
    for e in &dag.edges {
        incoming[e.dst].push(e);
    }

    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); dag.d];
    for &node in &dag.order {
        let mut rng = rng_from(cfg.seed, &[tag::NODE_NOISE, node as u64]);
        let mut col: Vec<f64> = (0..n)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        for e in &incoming[node] {
            let src = &cols[e.src];
            match e.kind {
                EdgeKind::Linear => {
                    for (v, &x) in col.iter_mut().zip(src) {
                        *v += e.weight * x;
                    }
                }
                EdgeKind::Nonlinear => {
                    for (v, &x) in col.iter_mut().zip(src) {
                        *v += e.weight * (cfg.beta * x).tanh();
                    }
                }
            }
        }
        cols[node] = col;
    }

    let covariates = dag.covariate_nodes();
    let names: Vec<String> = covariates.iter().map(|&v| format!("x{v}")).collect();
    let y = std::mem::take(&mut cols[dag.target]);
    let x_cols: Vec<Vec<f64>> = covariates
        .iter()
        .map(|&v| std::mem::take(&mut cols[v]))
        .collect();
    let dataset = Dataset::new(
        DesignMatrix::from_columns(n, x_cols)?,
        y,
        names,
        "y".into(),
    )?;
    Ok(SimulatedDataset {
        dataset,
        dag: dag.clone(),
        true_parents: true_parents(dag),
    })
}

/// Parent indicator per covariate column (ascending node index, target
/// skipped): true when the node has a direct edge into the target.
pub fn true_parents(dag: &DagSpec) -> Vec<bool> {
    dag.covariate_nodes()
        .iter()
        .map(|&v| {
            dag.edges
                .iter()
                .any(|e| e.src == v && e.dst == dag.target)
        })
        .collect()
}

/// Names of the true parent columns, for the truth sidecar.
pub fn parent_names(dag: &DagSpec) -> Vec<String> {
    dag.covariate_nodes()
        .iter()
        .zip(true_parents(dag))
        .filter(|(_, is_parent)| *is_parent)
        .map(|(&v, _)| format!("x{v}"))
        .collect()
}
