//! Random hyperparameter search scored by pooled cross-validated R².

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{k_fold_cv, rng_stream, Dataset, ForestParams, GbdtParams, ModelSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Ols,
    Lasso,
    Ridge,
    Gbdt,
    RandomForest,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 5] = [
        ModelFamily::Ols,
        ModelFamily::Lasso,
        ModelFamily::Ridge,
        ModelFamily::Gbdt,
        ModelFamily::RandomForest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Ols => "ols",
            ModelFamily::Lasso => "lasso",
            ModelFamily::Ridge => "ridge",
            ModelFamily::Gbdt => "gbdt",
            ModelFamily::RandomForest => "random_forest",
        }
    }

    /// Spec with the pinned default hyperparameters. Penalized linear
    /// models start at lambda = 1.
    pub fn default_spec(self, seed: u64) -> ModelSpec {
        match self {
            ModelFamily::Ols => ModelSpec::Ols,
            ModelFamily::Lasso => ModelSpec::Lasso { lambda: 1.0 },
            ModelFamily::Ridge => ModelSpec::Ridge { lambda: 1.0 },
            ModelFamily::Gbdt => ModelSpec::Gbdt(GbdtParams { seed, ..GbdtParams::default() }),
            ModelFamily::RandomForest => ModelSpec::RandomForest(ForestParams { seed, ..ForestParams::default() }),
        }
    }

    /// Search space used when none is configured: lambda over [1e-4, 1e2]
    /// for the penalized models, nothing otherwise.
    pub fn default_space(self) -> SearchSpace {
        let mut space = SearchSpace::new();
        if matches!(self, ModelFamily::Lasso | ModelFamily::Ridge) {
            space.insert("lambda".into(), ParamRange::Range { min: 1e-4, max: 1e2 });
        }
        space
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelFamily::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model family {s:?}")))
    }
}

/// Either a closed interval or an explicit list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamRange {
    Range { min: f64, max: f64 },
    Choice { choice: Vec<f64> },
}

pub type SearchSpace = BTreeMap<String, ParamRange>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: ModelSpec,
    pub best_r2: f64,
    /// Every evaluated spec with its pooled R², in draw order.
    pub trials: Vec<(ModelSpec, f64)>,
}

const LOG_SCALE: [&str; 2] = ["lambda", "learning_rate"];
const INTEGER: [&str; 5] = ["n_trees", "n_stages", "max_depth", "min_samples_leaf", "mtry"];

fn draw<R: Rng>(name: &str, range: &ParamRange, rng: &mut R) -> Result<f64> {
    match range {
        ParamRange::Choice { choice } => {
            if choice.is_empty() {
                return Err(Error::InvalidParameter(format!("empty choice list for {name}")));
            }
            Ok(choice[rng.random_range(0..choice.len())])
        }
        &ParamRange::Range { min, max } => {
            if !(min <= max) || !min.is_finite() || !max.is_finite() {
                return Err(Error::InvalidParameter(format!("bad range for {name}: [{min}, {max}]")));
            }
            if INTEGER.contains(&name) {
                let (lo, hi) = (min.ceil() as i64, max.floor() as i64);
                if lo > hi {
                    return Err(Error::InvalidParameter(format!("no integer in range for {name}")));
                }
                Ok(rng.random_range(lo..=hi) as f64)
            } else if LOG_SCALE.contains(&name) {
                if min <= 0.0 {
                    return Err(Error::InvalidParameter(format!("log-scaled {name} needs min > 0")));
                }
                if min == max {
                    return Ok(min);
                }
                Ok(rng.random_range(min.ln()..=max.ln()).exp().clamp(min, max))
            } else if min == max {
                Ok(min)
            } else {
                Ok(rng.random_range(min..=max))
            }
        }
    }
}

fn as_count(name: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be a non-negative integer, got {v}")))
    }
}

/// Applies named parameter values to the family's default spec.
pub fn build_spec(family: ModelFamily, params: &BTreeMap<String, f64>, seed: u64) -> Result<ModelSpec> {
    let mut spec = family.default_spec(seed);
    for (name, &v) in params {
        let unknown = || Error::InvalidParameter(format!("{family} has no parameter {name:?}"));
        match (&mut spec, name.as_str()) {
            (ModelSpec::Ridge { lambda } | ModelSpec::Lasso { lambda }, "lambda") => *lambda = v,
            (ModelSpec::RandomForest(p), "n_trees") => p.n_trees = as_count(name, v)?,
            (ModelSpec::RandomForest(p), "mtry") => p.mtry = Some(as_count(name, v)?),
            (ModelSpec::RandomForest(p), "max_depth") => p.max_depth = as_count(name, v)?,
            (ModelSpec::RandomForest(p), "min_samples_leaf") => p.min_samples_leaf = as_count(name, v)?,
            (ModelSpec::Gbdt(p), "n_stages") => p.n_stages = as_count(name, v)?,
            (ModelSpec::Gbdt(p), "learning_rate") => p.learning_rate = v,
            (ModelSpec::Gbdt(p), "max_depth") => p.max_depth = as_count(name, v)?,
            (ModelSpec::Gbdt(p), "min_samples_leaf") => p.min_samples_leaf = as_count(name, v)?,
            _ => return Err(unknown()),
        }
    }
    Ok(spec)
}

/// Draws `n_iter` parameter tuples from `space` (log-uniform for `lambda`
/// and `learning_rate`, inclusive integers for counts, uniform otherwise),
/// scores each by `k`-fold CV and keeps the best pooled R². Ties keep the
/// earliest draw. Parameters are drawn in name order.
pub fn random_search(
    data: &Dataset,
    family: ModelFamily,
    space: &SearchSpace,
    n_iter: usize,
    k: usize,
    seed: u64,
) -> Result<SearchResult> {
    if n_iter < 1 {
        return Err(Error::InvalidParameter("n_iter must be at least 1".into()));
    }
    let mut rng = rng_stream(seed, u64::MAX);
    let mut trials = Vec::with_capacity(n_iter);
    for _ in 0..n_iter {
        let mut params = BTreeMap::new();
        for (name, range) in space {
            params.insert(name.clone(), draw(name, range, &mut rng)?);
        }
        let spec = build_spec(family, &params, seed)?;
        let r2 = k_fold_cv(data, &spec, k, seed)?.pooled_r2;
        log::debug!("search {family}: {params:?} -> {r2:.4}");
        trials.push((spec, r2));
    }
    let mut best = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.1 > trials[best].1 {
            best = i;
        }
    }
    Ok(SearchResult {
        best: trials[best].0.clone(),
        best_r2: trials[best].1,
        trials,
    })
}
