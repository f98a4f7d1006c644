//! Seeded k-fold cross-validation with per-fold imputation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{r_squared, Dataset, ModelSpec};
use crate::{Error, Result};

/// Column means learned from training rows, used to fill NaN cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnImputer {
    pub means: Vec<f64>,
}

impl ColumnImputer {
    /// Means over the non-missing cells of each column. A column with no
    /// observed value in `data` is filled with 0.
    pub fn fit(data: &Dataset) -> Self {
        let p = data.n_features();
        let mut sums = vec![0.0; p];
        let mut counts = vec![0usize; p];
        for i in 0..data.n_rows() {
            for (j, v) in data.row(i).iter().enumerate() {
                if !v.is_nan() {
                    sums[j] += v;
                    counts[j] += 1;
                }
            }
        }
        let means = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
            .collect();
        Self { means }
    }

    pub fn apply(&self, data: &mut Dataset) {
        let p = data.n_features();
        for (k, v) in data.values_mut().iter_mut().enumerate() {
            if v.is_nan() {
                *v = self.means[k % p];
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_r2: Vec<f64>,
    /// R² over the concatenated out-of-fold predictions.
    pub pooled_r2: f64,
    pub mean_fold_r2: f64,
    /// Out-of-fold prediction for every row, in input order.
    pub oof_predictions: Vec<f64>,
    /// Fold index of every row.
    pub folds: Vec<usize>,
    /// Imputation means learned on each fold's training rows.
    pub imputation_means: Vec<Vec<f64>>,
}

/// Fold index for each of `n` rows. Rows are shuffled by `seed`, then cut
/// into `k` consecutive blocks; the first `n % k` blocks get one extra row.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k}; need at least 2 folds")));
    }
    if n < k {
        return Err(Error::TooFewRows { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = vec![0; n];
    let mut pos = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &row in &order[pos..pos + size] {
            folds[row] = f;
        }
        pos += size;
    }
    Ok(folds)
}

/// Fit `spec` on k-1 folds and predict the held-out one, k times. Missing
/// feature values are imputed with means from the training folds only; the
/// linear family standardizes inside its own fit, so scaling statistics
/// are also training-only.
pub fn k_fold_cv(data: &Dataset, spec: &ModelSpec, k: usize, seed: u64) -> Result<CvReport> {
    let n = data.n_rows();
    let folds = fold_assignment(n, k, seed)?;
    let fold_ids: Vec<usize> = (0..k).collect();
    // (held-out rows, their predictions, fold R², imputation means)
    type FoldOutcome = (Vec<usize>, Vec<f64>, f64, Vec<f64>);
    let results = crate::par_map(&fold_ids, |&f| -> Result<FoldOutcome> {
        let test_rows: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
        let train_rows: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
        let mut train = data.take_rows(&train_rows);
        let mut test = data.take_rows(&test_rows);
        let imputer = ColumnImputer::fit(&train);
        imputer.apply(&mut train);
        imputer.apply(&mut test);
        let model = spec.fit(&train)?;
        let pred = model.predict(&test);
        let r2 = r_squared(test.target(), &pred)?;
        Ok((test_rows, pred, r2, imputer.means))
    });

    let mut oof = vec![f64::NAN; n];
    let mut fold_r2 = Vec::with_capacity(k);
    let mut imputation_means = Vec::with_capacity(k);
    for result in results {
        let (rows, pred, r2, means) = result?;
        for (r, p) in rows.into_iter().zip(pred) {
            oof[r] = p;
        }
        fold_r2.push(r2);
        imputation_means.push(means);
    }
    let pooled_r2 = r_squared(data.target(), &oof)?;
    let mean_fold_r2 = fold_r2.iter().sum::<f64>() / k as f64;
    Ok(CvReport {
        fold_r2,
        pooled_r2,
        mean_fold_r2,
        oof_predictions: oof,
        folds,
        imputation_means,
    })
}
