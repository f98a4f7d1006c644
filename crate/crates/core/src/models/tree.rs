//! CART regression trees with variance-reduction splits.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, Result};

/// One node of a flat, preorder tree. Internal nodes carry `feature`,
/// `threshold` and both children; rows with `x[feature] <= threshold` go
/// left. `value` is the mean training target of the node and `cover` the
/// number of training rows routed through it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    #[serde(default)]
    pub feature: Option<usize>,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub left: Option<usize>,
    #[serde(default)]
    pub right: Option<usize>,
    pub value: f64,
    #[serde(default)]
    pub cover: u64,
    /// Reduction in squared error achieved by this split.
    #[serde(default)]
    pub gain: f64,
}

impl TreeNode {
    pub fn leaf(value: f64, cover: u64) -> Self {
        Self {
            feature: None,
            threshold: None,
            left: None,
            right: None,
            value,
            cover,
            gain: 0.0,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.feature.is_none()
    }

    /// (feature, threshold, left, right) of an internal node.
    pub fn split(&self) -> Option<(usize, f64, usize, usize)> {
        Some((self.feature?, self.threshold?, self.left?, self.right?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.nodes[self.leaf_index(x)].value
    }

    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        while let Some((f, t, l, r)) = self.nodes[i].split() {
            i = if x[f] <= t { l } else { r };
        }
        i
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(t: &RegressionTree, i: usize) -> usize {
            match t.nodes[i].split() {
                Some((_, _, l, r)) => 1 + walk(t, l).max(walk(t, r)),
                None => 0,
            }
        }
        walk(self, 0)
    }

    pub fn feature_importance(&self, n_features: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_features];
        for node in &self.nodes {
            if let Some(f) = node.feature {
                out[f] += node.gain;
            }
        }
        out
    }

    /// Structural checks for trees read from disk: children point forward,
    /// split fields are complete, features are in range and, where covers
    /// are present, each internal cover is the sum of its children's.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidTree("tree has no nodes".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let fields = [
                node.feature.is_some(),
                node.threshold.is_some(),
                node.left.is_some(),
                node.right.is_some(),
            ];
            if fields.iter().any(|f| *f != fields[0]) {
                return Err(Error::InvalidTree(format!("node {i} has a partial split")));
            }
            if !node.value.is_finite() {
                return Err(Error::InvalidTree(format!("node {i} has a non-finite value")));
            }
            if let Some((f, t, l, r)) = node.split() {
                if f >= n_features {
                    return Err(Error::InvalidTree(format!("node {i} splits on unknown feature {f}")));
                }
                if !t.is_finite() {
                    return Err(Error::InvalidTree(format!("node {i} has a non-finite threshold")));
                }
                if l <= i || r <= i || l >= self.nodes.len() || r >= self.nodes.len() || l == r {
                    return Err(Error::InvalidTree(format!("node {i} has invalid children")));
                }
                let (cl, cr) = (self.nodes[l].cover, self.nodes[r].cover);
                if node.cover > 0 && cl > 0 && cr > 0 && node.cover != cl + cr {
                    return Err(Error::InvalidTree(format!("node {i} cover differs from its children")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features drawn as split candidates at each node; `None` means all.
    pub mtry: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 8,
            min_samples_leaf: 1,
            mtry: None,
        }
    }
}

/// Greedy CART fit on all rows of `data`.
///
/// At each node `mtry` candidate features are drawn without replacement from
/// `rng`. Split points are midpoints between adjacent distinct values; equal
/// gains go to the lowest feature index, then the lowest threshold. A node
/// becomes a leaf at `max_depth`, when no split leaves `min_samples_leaf`
/// rows on both sides, or when the best gain is zero.
pub fn fit_regression_tree<R: Rng + ?Sized>(data: &Dataset, params: &TreeParams, rng: &mut R) -> Result<RegressionTree> {
    data.require_complete()?;
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    grow(data, data.target(), rows, params, rng)
}

pub(crate) fn grow<R: Rng + ?Sized>(
    data: &Dataset,
    targets: &[f64],
    mut rows: Vec<usize>,
    params: &TreeParams,
    rng: &mut R,
) -> Result<RegressionTree> {
    let p = data.n_features();
    if params.max_depth < 1 {
        return Err(Error::InvalidParameter("max_depth must be at least 1".into()));
    }
    let mtry = params.mtry.unwrap_or(p);
    if p == 0 || mtry < 1 || mtry > p {
        return Err(Error::InvalidParameter(format!("mtry {mtry} must be in 1..={p}")));
    }
    if rows.is_empty() {
        return Err(Error::InvalidParameter("cannot grow a tree on zero rows".into()));
    }
    let mut builder = Builder {
        data,
        targets,
        params,
        mtry,
        min_leaf: params.min_samples_leaf.max(1),
        nodes: Vec::new(),
        scratch: Vec::with_capacity(rows.len()),
    };
    builder.build(&mut rows, 0, rng);
    Ok(RegressionTree { nodes: builder.nodes })
}

struct Builder<'a> {
    data: &'a Dataset,
    targets: &'a [f64],
    params: &'a TreeParams,
    mtry: usize,
    min_leaf: usize,
    nodes: Vec<TreeNode>,
    scratch: Vec<(f64, f64)>,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn build<R: Rng + ?Sized>(&mut self, rows: &mut [usize], depth: usize, rng: &mut R) -> usize {
        let m = rows.len();
        let mean = rows.iter().map(|&r| self.targets[r]).sum::<f64>() / m as f64;
        let index = self.nodes.len();
        self.nodes.push(TreeNode::leaf(mean, m as u64));

        let first = self.targets[rows[0]];
        let constant = rows.iter().all(|&r| self.targets[r] == first);
        if depth >= self.params.max_depth || m < 2 * self.min_leaf || constant {
            return index;
        }
        let Some(split) = self.best_split(rows, mean, rng) else {
            return index;
        };

        let (mut left, mut right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.data.value(r, split.feature) <= split.threshold);
        let l = self.build(&mut left, depth + 1, rng);
        let r = self.build(&mut right, depth + 1, rng);
        let node = &mut self.nodes[index];
        node.feature = Some(split.feature);
        node.threshold = Some(split.threshold);
        node.left = Some(l);
        node.right = Some(r);
        node.gain = split.gain;
        index
    }

    fn best_split<R: Rng + ?Sized>(&mut self, rows: &[usize], mean: f64, rng: &mut R) -> Option<Split> {
        let m = rows.len();
        let p = self.data.n_features();
        let mut candidates = sample(rng, p, self.mtry).into_vec();
        candidates.sort_unstable();

        let mut best: Option<Split> = None;
        for f in candidates {
            self.scratch.clear();
            self.scratch
                .extend(rows.iter().map(|&r| (self.data.value(r, f), self.targets[r] - mean)));
            self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            let total: f64 = self.scratch.iter().map(|s| s.1).sum();
            let base = total * total / m as f64;
            let mut left_sum = 0.0;
            for i in 1..m {
                left_sum += self.scratch[i - 1].1;
                let (lo, hi) = (self.scratch[i - 1].0, self.scratch[i].0);
                if lo >= hi || i < self.min_leaf || m - i < self.min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / i as f64 + right_sum * right_sum / (m - i) as f64 - base;
                if gain > best.as_ref().map_or(0.0, |b| b.gain) {
                    let mid = (lo + hi) / 2.0;
                    let threshold = if lo <= mid && mid < hi { mid } else { lo };
                    best = Some(Split {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}
