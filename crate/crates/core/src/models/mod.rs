//! Regression models, cross-validation, feature elimination and tuning.

mod cv;
mod ensemble;
mod linear;
mod metrics;
mod rfe;
mod search;
mod tree;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cv::{fold_assignment, k_fold_cv, ColumnImputer, CvReport};
pub use ensemble::{fit_gbdt, fit_random_forest, Combiner, ForestParams, GbdtParams, TreeEnsemble};
pub use linear::{fit_linear_family, LinearKind, LinearModel};
pub use metrics::r_squared;
pub use rfe::recursive_feature_elimination;
pub use search::{build_spec, random_search, ModelFamily, ParamRange, SearchResult, SearchSpace};
pub use tree::{fit_regression_tree, RegressionTree, TreeNode, TreeParams};

use crate::{Error, Result};

/// Dense design matrix plus target. Missing feature values are NaN and are
/// only allowed before per-fold imputation; every `fit_*` rejects them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    n_rows: usize,
    feature_names: Vec<String>,
    target: Vec<f64>,
    row_ids: Vec<String>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, feature_names: Vec<String>, target: Vec<f64>, row_ids: Vec<String>) -> Result<Self> {
        let n = target.len();
        let p = feature_names.len();
        if x.len() != n * p {
            return Err(Error::InvalidParameter(format!(
                "{} feature values for {n} rows x {p} columns",
                x.len()
            )));
        }
        if row_ids.len() != n {
            return Err(Error::InvalidParameter("row id count differs from target length".into()));
        }
        if target.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidParameter("target contains non-finite values".into()));
        }
        if x.iter().any(|v| v.is_infinite()) {
            return Err(Error::InvalidParameter("features contain infinite values".into()));
        }
        Ok(Self {
            x,
            n_rows: n,
            feature_names,
            target,
            row_ids,
        })
    }

    /// Rows given as slices, ids generated as `0..n`.
    pub fn from_rows(rows: &[Vec<f64>], target: Vec<f64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidParameter("rows differ in length".into()));
        }
        let names = (0..p).map(|j| format!("x{j}")).collect();
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(rows.concat(), names, target, ids)
    }

    pub fn from_features(matrix: &crate::ingest::FeatureMatrix, target: Vec<f64>) -> Result<Self> {
        Self::new(matrix.to_dense(), matrix.column_names(), target, matrix.row_ids().to_vec())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.x[i * p..(i + 1) * p]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.n_features() + j]
    }

    /// Subset of rows, in the given order (repeats allowed).
    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(rows.len() * self.n_features());
        for &r in rows {
            x.extend_from_slice(self.row(r));
        }
        Dataset {
            x,
            n_rows: rows.len(),
            feature_names: self.feature_names.clone(),
            target: rows.iter().map(|&r| self.target[r]).collect(),
            row_ids: rows.iter().map(|&r| self.row_ids[r].clone()).collect(),
        }
    }

    /// Subset of columns, in the given order.
    pub fn take_columns(&self, cols: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(self.n_rows * cols.len());
        for i in 0..self.n_rows {
            let row = self.row(i);
            x.extend(cols.iter().map(|&c| row[c]));
        }
        Dataset {
            x,
            n_rows: self.n_rows,
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            target: self.target.clone(),
            row_ids: self.row_ids.clone(),
        }
    }

    pub fn with_target(&self, target: Vec<f64>) -> Result<Dataset> {
        Dataset::new(self.x.clone(), self.feature_names.clone(), target, self.row_ids.clone())
    }

    pub(crate) fn require_complete(&self) -> Result<()> {
        if self.n_rows < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 rows to fit, got {}",
                self.n_rows
            )));
        }
        let p = self.n_features();
        if let Some(pos) = self.x.iter().position(|v| v.is_nan()) {
            return Err(Error::MissingValues(self.feature_names[pos % p].clone()));
        }
        Ok(())
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }
}

/// A model family with fully specified hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Ols,
    Ridge { lambda: f64 },
    Lasso { lambda: f64 },
    RandomForest(ForestParams),
    Gbdt(GbdtParams),
}

impl ModelSpec {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelSpec::Ols => ModelFamily::Ols,
            ModelSpec::Ridge { .. } => ModelFamily::Ridge,
            ModelSpec::Lasso { .. } => ModelFamily::Lasso,
            ModelSpec::RandomForest(_) => ModelFamily::RandomForest,
            ModelSpec::Gbdt(_) => ModelFamily::Gbdt,
        }
    }

    /// Same spec with the model's own seed replaced. Linear specs are
    /// returned unchanged.
    pub fn with_seed(&self, seed: u64) -> ModelSpec {
        match self {
            ModelSpec::RandomForest(p) => ModelSpec::RandomForest(ForestParams { seed, ..p.clone() }),
            ModelSpec::Gbdt(p) => ModelSpec::Gbdt(GbdtParams { seed, ..p.clone() }),
            other => other.clone(),
        }
    }

    pub fn fit(&self, data: &Dataset) -> Result<FittedModel> {
        Ok(match self {
            ModelSpec::Ols => FittedModel::Linear(fit_linear_family(data, LinearKind::Ols, 0.0)?),
            ModelSpec::Ridge { lambda } => FittedModel::Linear(fit_linear_family(data, LinearKind::Ridge, *lambda)?),
            ModelSpec::Lasso { lambda } => FittedModel::Linear(fit_linear_family(data, LinearKind::Lasso, *lambda)?),
            ModelSpec::RandomForest(p) => FittedModel::Ensemble(fit_random_forest(data, p)?),
            ModelSpec::Gbdt(p) => FittedModel::Ensemble(fit_gbdt(data, p)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_type", rename_all = "snake_case")]
pub enum FittedModel {
    Linear(LinearModel),
    #[serde(rename = "tree_ensemble")]
    Ensemble(TreeEnsemble),
}

impl FittedModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self {
            FittedModel::Linear(m) => m.predict_row(x),
            FittedModel::Ensemble(m) => m.predict_row(x),
        }
    }

    pub fn predict(&self, data: &Dataset) -> Vec<f64> {
        (0..data.n_rows()).map(|i| self.predict_row(data.row(i))).collect()
    }

    /// Per-feature importance used by recursive feature elimination:
    /// summed split gain for trees, |standardized coefficient| for linear
    /// models.
    pub fn feature_importance(&self) -> Vec<f64> {
        match self {
            FittedModel::Linear(m) => m.standardized_coefficients().iter().map(|c| c.abs()).collect(),
            FittedModel::Ensemble(m) => m.feature_importance(),
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            FittedModel::Linear(m) => &m.feature_names,
            FittedModel::Ensemble(m) => &m.feature_names,
        }
    }

    pub fn as_ensemble(&self) -> Result<&TreeEnsemble> {
        match self {
            FittedModel::Ensemble(e) => Ok(e),
            FittedModel::Linear(_) => Err(Error::ModelNotTree),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: FittedModel = serde_json::from_str(text)?;
        if let FittedModel::Ensemble(e) = &model {
            e.validate()?;
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Independent random stream `stream` of the generator seeded by `seed`.
pub(crate) fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
