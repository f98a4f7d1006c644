//! Random forests and squared-loss gradient boosting over [`RegressionTree`]s.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, RegressionTree, TreeParams};
use super::{rng_stream, Dataset};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combiner {
    /// Forest: average of tree outputs.
    Mean,
    /// Boosting: `base_score + learning_rate * sum` of tree outputs.
    Sum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub combiner: Combiner,
    pub base_score: f64,
    /// Shrinkage applied to every tree under [`Combiner::Sum`]; ignored for
    /// forests.
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
    #[serde(default)]
    pub feature_names: Vec<String>,
}

impl TreeEnsemble {
    /// Weight multiplying each tree's output.
    pub fn tree_weight(&self) -> f64 {
        match self.combiner {
            Combiner::Mean => 1.0 / self.trees.len() as f64,
            Combiner::Sum => self.learning_rate,
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(x)).sum();
        match self.combiner {
            Combiner::Mean => self.base_score + sum / self.trees.len() as f64,
            Combiner::Sum => self.base_score + self.learning_rate * sum,
        }
    }

    pub fn predict(&self, data: &Dataset) -> Vec<f64> {
        (0..data.n_rows()).map(|i| self.predict_row(data.row(i))).collect()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Split gain summed over every node of every tree.
    pub fn feature_importance(&self) -> Vec<f64> {
        let p = self.n_features();
        let mut out = vec![0.0; p];
        for tree in &self.trees {
            for (o, g) in out.iter_mut().zip(tree.feature_importance(p)) {
                *o += g;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::InvalidTree("ensemble has no trees".into()));
        }
        if !self.base_score.is_finite() {
            return Err(Error::InvalidTree("non-finite base_score".into()));
        }
        if self.combiner == Combiner::Sum && !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidTree(format!("invalid learning_rate {}", self.learning_rate)));
        }
        let p = if self.feature_names.is_empty() {
            usize::MAX
        } else {
            self.feature_names.len()
        };
        for (t, tree) in self.trees.iter().enumerate() {
            tree.validate(p)
                .map_err(|e| Error::InvalidTree(format!("tree {t}: {e}")))?;
        }
        Ok(())
    }
}

fn default_n_trees() -> usize {
    200
}
fn default_forest_depth() -> usize {
    8
}
fn default_min_leaf() -> usize {
    5
}
fn default_true() -> bool {
    true
}
fn default_n_stages() -> usize {
    200
}
fn default_learning_rate() -> f64 {
    0.1
}
fn default_gbdt_depth() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    #[serde(default = "default_n_trees")]
    pub n_trees: usize,
    /// Candidate features per node; `None` means `max(1, p / 3)`.
    #[serde(default)]
    pub mtry: Option<usize>,
    #[serde(default = "default_forest_depth")]
    pub max_depth: usize,
    #[serde(default = "default_min_leaf")]
    pub min_samples_leaf: usize,
    #[serde(default = "default_true")]
    pub bootstrap: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: default_n_trees(),
            mtry: None,
            max_depth: default_forest_depth(),
            min_samples_leaf: default_min_leaf(),
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    #[serde(default = "default_n_stages")]
    pub n_stages: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_gbdt_depth")]
    pub max_depth: usize,
    #[serde(default = "default_min_leaf")]
    pub min_samples_leaf: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            n_stages: default_n_stages(),
            learning_rate: default_learning_rate(),
            max_depth: default_gbdt_depth(),
            min_samples_leaf: default_min_leaf(),
            seed: 0,
        }
    }
}

/// Bagged CART forest. Tree `t` draws its bootstrap sample and its per-node
/// feature candidates from stream `t` of a generator seeded with
/// `params.seed`, so the result does not depend on how trees are scheduled
/// across threads.
pub fn fit_random_forest(data: &Dataset, params: &ForestParams) -> Result<TreeEnsemble> {
    data.require_complete()?;
    if params.n_trees < 1 {
        return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
    }
    let n = data.n_rows();
    let p = data.n_features();
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        mtry: Some(params.mtry.unwrap_or((p / 3).max(1))),
    };
    let indices: Vec<u64> = (0..params.n_trees as u64).collect();
    let trees = crate::par_map(&indices, |&t| {
        let mut rng = rng_stream(params.seed, t);
        let rows: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        grow(data, data.target(), rows, &tree_params, &mut rng)
    });
    Ok(TreeEnsemble {
        combiner: Combiner::Mean,
        base_score: 0.0,
        learning_rate: 1.0,
        trees: trees.into_iter().collect::<Result<_>>()?,
        feature_names: data.feature_names().to_vec(),
    })
}

/// Squared-loss gradient boosting: start from the training mean and fit
/// each stage to the current residuals, shrunk by `learning_rate`.
pub fn fit_gbdt(data: &Dataset, params: &GbdtParams) -> Result<TreeEnsemble> {
    data.require_complete()?;
    if params.n_stages < 1 {
        return Err(Error::InvalidParameter("n_stages must be at least 1".into()));
    }
    let lr = params.learning_rate;
    if !(lr > 0.0 && lr <= 1.0) {
        return Err(Error::InvalidParameter(format!("learning_rate {lr} outside (0, 1]")));
    }
    let n = data.n_rows();
    let y = data.target();
    let base = y.iter().sum::<f64>() / n as f64;
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        mtry: None,
    };
    let mut prediction = vec![base; n];
    let mut residual = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_stages);
    for stage in 0..params.n_stages {
        for i in 0..n {
            residual[i] = y[i] - prediction[i];
        }
        let mut rng = rng_stream(params.seed, stage as u64);
        let tree = grow(data, &residual, (0..n).collect(), &tree_params, &mut rng)?;
        for (i, p) in prediction.iter_mut().enumerate() {
            *p += lr * tree.predict_row(data.row(i));
        }
        trees.push(tree);
    }
    Ok(TreeEnsemble {
        combiner: Combiner::Sum,
        base_score: base,
        learning_rate: lr,
        trees,
        feature_names: data.feature_names().to_vec(),
    })
}
