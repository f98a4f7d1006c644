//! Shapley-value attributions for tree ensembles.
//!
//! The value of a feature subset `S` is the path-dependent conditional
//! expectation of the model: descend each tree following `x` on features in
//! `S` and averaging both branches by training cover elsewhere.
//! [`tree_shap`] computes exact Shapley values of that game in polynomial
//! time; [`brute_force_shapley`] enumerates all subsets and serves as the
//! reference.

mod report;
mod treeshap;

use serde::{Deserialize, Serialize};

use crate::models::{Dataset, RegressionTree, TreeEnsemble};
use crate::{Error, Result};

pub use report::{
    
    force_plot_data, global_importance, write_force_plot, write_global_importance, write_shap_values, Direction,
    FeatureImportance, ForceArrow, ForcePlot, GlobalImportance,
};

/// Subsets are enumerated as bitmasks; beyond this the oracle is too slow.
pub const BRUTE_FORCE_MAX_FEATURES: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapExplanation {
    /// Expected model output with no feature known.
    pub base_value: f64,
    pub contributions: Vec<f64>,
    pub prediction: f64,
    pub feature_names: Vec<String>,
    pub feature_values: Vec<f64>,
}

impl ShapExplanation {
    /// `|base + sum(phi) - prediction|`, relative to `max(1, |prediction|)`.
    pub fn local_accuracy_error(&self) -> f64 {
        let total = self.base_value + self.contributions.iter().sum::<f64>();
        (total - self.prediction).abs() / self.prediction.abs().max(1.0)
    }
}

/// Path-dependent conditional expectation of one tree given the features
/// flagged in `known`.
pub fn tree_conditional_expectation(tree: &RegressionTree, x: &[f64], known: &[bool]) -> f64 {
    fn walk(tree: &RegressionTree, x: &[f64], known: &[bool], i: usize) -> f64 {
        let node = &tree.nodes[i];
        match node.split() {
            None => node.value,
            Some((f, t, l, r)) if known[f] => walk(tree, x, known, if x[f] <= t { l } else { r }),
            Some((_, _, l, r)) => {
                let (cl, cr) = (tree.nodes[l].cover as f64, tree.nodes[r].cover as f64);
                (cl * walk(tree, x, known, l) + cr * walk(tree, x, known, r)) / (cl + cr)
            }
        }
    }
    walk(tree, x, known, 0)
}

/// Cover-weighted mean of the leaves: the expectation with nothing known.
pub fn tree_expected_value(tree: &RegressionTree) -> f64 {
    fn walk(tree: &RegressionTree, i: usize) -> f64 {
        let node = &tree.nodes[i];
        match node.split() {
            None => node.value,
            Some((_, _, l, r)) => {
                let (cl, cr) = (tree.nodes[l].cover as f64, tree.nodes[r].cover as f64);
                (cl * walk(tree, l) + cr * walk(tree, r)) / (cl + cr)
            }
        }
    }
    walk(tree, 0)
}

fn ensemble_value(ensemble: &TreeEnsemble, x: &[f64], known: &[bool]) -> f64 {
    let sum: f64 = ensemble
        .trees
        .iter()
        .map(|t| tree_conditional_expectation(t, x, known))
        .sum();
    ensemble.base_score + ensemble.tree_weight() * sum
}

fn check_covers(ensemble: &TreeEnsemble) -> Result<()> {
    for (t, tree) in ensemble.trees.iter().enumerate() {
        if let Some(node) = tree.nodes.iter().position(|n| n.cover == 0) {
            return Err(Error::MissingCover { tree: t, node });
        }
    }
    Ok(())
}

fn check_input(ensemble: &TreeEnsemble, x: &[f64]) -> Result<()> {
    if ensemble.trees.is_empty() {
        return Err(Error::InvalidTree("ensemble has no trees".into()));
    }
    if x.len() != ensemble.n_features() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.n_features(),
            found: x.len(),
        });
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::MissingValues("explained row".into()));
    }
    check_covers(ensemble)
}

fn explanation(ensemble: &TreeEnsemble, x: &[f64], base_value: f64, contributions: Vec<f64>) -> ShapExplanation {
    ShapExplanation {
        base_value,
        contributions,
        prediction: ensemble.predict_row(x),
        feature_names: ensemble.feature_names.clone(),
        feature_values: x.to_vec(),
    }
}

/// Shapley values by enumerating all `2^p` feature subsets.
pub fn brute_force_shapley(ensemble: &TreeEnsemble, x: &[f64]) -> Result<ShapExplanation> {
    let p = ensemble.n_features();
    if p > BRUTE_FORCE_MAX_FEATURES {
        return Err(Error::TooManyFeatures(p));
    }
    check_input(ensemble, x)?;

    let mut known = vec![false; p];
    let values: Vec<f64> = (0u32..1 << p)
        .map(|mask| {
            for (j, k) in known.iter_mut().enumerate() {
                *k = mask >> j & 1 == 1;
            }
            ensemble_value(ensemble, x, &known)
        })
        .collect();

    let factorial: Vec<f64> = (0..=p).scan(1.0, |acc, k| {
        if k > 0 {
            *acc *= k as f64;
        }
        Some(*acc)
    }).collect();
    let mut phi = vec![0.0; p];
    for (i, phi_i) in phi.iter_mut().enumerate() {
        let bit = 1u32 << i;
        for mask in 0u32..1 << p {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let w = factorial[s] * factorial[p - s - 1] / factorial[p];
            *phi_i += w * (values[(mask | bit) as usize] - values[mask as usize]);
        }
    }
    Ok(explanation(ensemble, x, values[0], phi))
}

/// Exact path-dependent Shapley values in time polynomial in tree size.
/// Per-tree attributions are combined with the ensemble's tree weight.
pub fn tree_shap(ensemble: &TreeEnsemble, x: &[f64]) -> Result<ShapExplanation> {
    check_input(ensemble, x)?;
    let w = ensemble.tree_weight();
    let mut phi = vec![0.0; ensemble.n_features()];
    let mut expected = 0.0;
    for tree in &ensemble.trees {
        treeshap::accumulate(tree, x, w, &mut phi);
        expected += tree_expected_value(tree);
    }
    Ok(explanation(ensemble, x, ensemble.base_score + w * expected, phi))
}

/// [`tree_shap`] for every row of `data`, in row order.
pub fn explain_rows(ensemble: &TreeEnsemble, data: &Dataset) -> Result<Vec<ShapExplanation>> {
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    crate::par_map(&rows, |&i| tree_shap(ensemble, data.row(i))).into_iter().collect()
}
