//! Recursive feature elimination by model importance.

use super::{ColumnImputer, Dataset, ModelSpec};
use crate::{Error, Result};

/// Repeatedly fits `spec` on the surviving columns and drops the `step`
/// least important ones (never going below `n_keep`). Importance ties drop
/// the column with the higher original index first. Missing values are
/// mean-imputed over the rows of `data` once up front. Returns the kept
/// column names in their original order.
pub fn recursive_feature_elimination(
    data: &Dataset,
    spec: &ModelSpec,
    step: usize,
    n_keep: usize,
    seed: u64,
) -> Result<Vec<String>> {
    let p = data.n_features();
    if n_keep < 1 || n_keep > p {
        return Err(Error::InvalidParameter(format!("n_keep {n_keep} must be in 1..={p}")));
    }
    if step < 1 {
        return Err(Error::InvalidParameter("step must be at least 1".into()));
    }
    let mut filled = data.clone();
    ColumnImputer::fit(data).apply(&mut filled);
    let spec = spec.with_seed(seed);

    let mut remaining: Vec<usize> = (0..p).collect();
    while remaining.len() > n_keep {
        let model = spec.fit(&filled.take_columns(&remaining))?;
        let importance = model.feature_importance();
        let mut order: Vec<usize> = (0..remaining.len()).collect();
        order.sort_by(|&a, &b| importance[a].total_cmp(&importance[b]).then(remaining[b].cmp(&remaining[a])));
        let n_drop = step.min(remaining.len() - n_keep);
        let mut drop: Vec<usize> = order[..n_drop].iter().map(|&k| remaining[k]).collect();
        drop.sort_unstable();
        log::debug!("rfe: dropping {:?}", drop.iter().map(|&j| &data.feature_names()[j]).collect::<Vec<_>>());
        remaining.retain(|j| drop.binary_search(j).is_err());
    }
    Ok(remaining.iter().map(|&j| data.feature_names()[j].clone()).collect())
}
