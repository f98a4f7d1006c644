//! Wealth index and household indicator targets.
//!
//! The wealth index is the first principal component of the standardized
//! asset variables, computed over all households pooled and then averaged
//! per cluster.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdRecord {
    pub cluster_id: String,
    pub assets: Vec<f64>,
    pub toilet_outside: u8,
    pub improved_water: u8,
    pub head_higher_edu: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRow {
    pub cluster_id: String,
    pub wealth_index: f64,
    pub toilet_access: f64,
    pub clean_water: f64,
    pub educational_attainment: f64,
}

impl TargetRow {
    pub fn get(&self, column: &str) -> Option<f64> {
        match column {
            "wealth_index" => Some(self.wealth_index),
            "toilet_access" => Some(self.toilet_access),
            "clean_water" => Some(self.clean_water),
            "educational_attainment" => Some(self.educational_attainment),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetTable {
    pub rows: Vec<TargetRow>,
}

impl TargetTable {
    pub const COLUMNS: [&'static str; 4] = ["wealth_index", "toilet_access", "clean_water", "educational_attainment"];

    pub fn get(&self, cluster_id: &str) -> Option<&TargetRow> {
        self.rows.iter().find(|r| r.cluster_id == cluster_id)
    }

    /// Target values aligned to `cluster_ids`.
    pub fn aligned(&self, cluster_ids: &[String], column: &str) -> Result<Vec<f64>> {
        if !Self::COLUMNS.contains(&column) {
            return Err(Error::InvalidParameter(format!("unknown target column `{column}`")));
        }
        let by_id: HashMap<&str, &TargetRow> = self.rows.iter().map(|r| (r.cluster_id.as_str(), r)).collect();
        cluster_ids
            .iter()
            .map(|id| {
                by_id
                    .get(id.as_str())
                    .and_then(|r| r.get(column))
                    .ok_or_else(|| Error::UnknownCluster(id.clone()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// One score per input row.
    pub scores: Vec<f64>,
    /// Unit-norm leading eigenvector, one entry per input column; dropped
    /// constant columns get 0.
    pub loadings: Vec<f64>,
    /// Leading eigenvalue of the correlation matrix.
    pub eigenvalue: f64,
    /// Leading eigenvalue divided by the number of retained columns.
    pub explained_share: f64,
    /// Indices of zero-variance columns that were left out.
    pub dropped: Vec<usize>,
}

const POWER_TOLERANCE: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;

/// First principal component of the correlation matrix of `rows`.
///
/// Columns are z-scored with population standard deviations. The sign is
/// fixed so the loadings sum to a nonnegative number (ties: first nonzero
/// loading positive).
pub fn pca_first_component(rows: &[Vec<f64>]) -> Result<PcaResult> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!("PCA needs at least 2 rows, got {n}")));
    }
    let p = rows[0].len();
    if p == 0 {
        return Err(Error::DegenerateInput("PCA needs at least one column".into()));
    }
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::DegenerateInput("rows differ in length".into()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite asset value".into()));
    }

    let nf = n as f64;
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut centers = Vec::new();
    let mut scales = Vec::new();
    for j in 0..p {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / nf;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / nf;
        let sd = var.sqrt();
        if sd <= 1e-12 * mean.abs().max(1.0) {
            log::warn!("dropping zero-variance asset column {j} from the wealth index");
            dropped.push(j);
        } else {
            kept.push(j);
            centers.push(mean);
            scales.push(sd);
        }
    }
    let q = kept.len();
    if q == 0 {
        return Err(Error::DegenerateInput("every asset column is constant".into()));
    }

    let z: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| (0..q).map(|k| (r[kept[k]] - centers[k]) / scales[k]).collect())
        .collect();
    let mut corr = vec![vec![0.0; q]; q];
    for a in 0..q {
        for b in a..q {
            let s = z.iter().map(|r| r[a] * r[b]).sum::<f64>() / nf;
            corr[a][b] = s;
            corr[b][a] = s;
        }
    }

    let (eigenvalue, mut vector) = leading_eigenpair(&corr);
    orient(&mut vector);

    let scores = z
        .iter()
        .map(|r| r.iter().zip(&vector).map(|(a, b)| a * b).sum())
        .collect();
    let mut loadings = vec![0.0; p];
    for (k, &j) in kept.iter().enumerate() {
        loadings[j] = vector[k];
    }
    Ok(PcaResult {
        scores,
        loadings,
        eigenvalue,
        explained_share: eigenvalue / q as f64,
        dropped,
    })
}

/// Power iteration from the normalized all-ones vector. The standard basis
/// vectors are tried as extra starts, since the all-ones start can be
/// orthogonal to the leading eigenvector (e.g. two anti-correlated columns).
fn leading_eigenpair(m: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let q = m.len();
    let mut starts = vec![vec![1.0 / (q as f64).sqrt(); q]];
    if q > 1 {
        for i in 0..q {
            let mut e = vec![0.0; q];
            e[i] = 1.0;
            starts.push(e);
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in starts {
        let Some((value, vector)) = power_iteration(m, start) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((b, _)) => value > b + 1e-12 * b.abs().max(1.0),
        };
        if better {
            best = Some((value, vector));
        }
    }
    best.unwrap_or_else(|| (0.0, vec![1.0 / (q as f64).sqrt(); q]))
}

fn power_iteration(m: &[Vec<f64>], mut v: Vec<f64>) -> Option<(f64, Vec<f64>)> {
    let multiply = |v: &[f64]| -> Vec<f64> { m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect() };
    for _ in 0..POWER_MAX_ITER {
        let mut w = multiply(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let delta = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < POWER_TOLERANCE {
            break;
        }
    }
    let mv = multiply(&v);
    let value = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
    Some((value, v))
}

fn orient(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    let flip = if sum.abs() > 1e-12 {
        sum < 0.0
    } else {
        v.iter().find(|x| x.abs() > 1e-12).is_some_and(|x| *x < 0.0)
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Per-cluster wealth index and indicator proportions.
///
/// Rows follow `clusters` when given (a listed cluster without households is
/// an error) and the first appearance of each cluster id otherwise.
pub fn derive_cluster_targets(households: &[HouseholdRecord], clusters: Option<&[String]>) -> Result<TargetTable> {
    for h in households {
        for (name, flag) in [
            ("toilet_outside", h.toilet_outside),
            ("improved_water", h.improved_water),
            ("head_higher_edu", h.head_higher_edu),
        ] {
            if flag > 1 {
                return Err(Error::InvalidRecord(format!(
                    "household in `{}`: {name} must be 0 or 1",
                    h.cluster_id
                )));
            }
        }
    }
    let assets: Vec<Vec<f64>> = households.iter().map(|h| h.assets.clone()).collect();
    let pca = pca_first_component(&assets)?;

    let mut order: Vec<String> = Vec::new();
    let mut members: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, h) in households.iter().enumerate() {
        members
            .entry(h.cluster_id.as_str())
            .or_insert_with(|| {
                order.push(h.cluster_id.clone());
                Vec::new()
            })
            .push(i);
    }
    let order = match clusters {
        Some(ids) => ids.to_vec(),
        None => order,
    };

    let rows = order
        .into_iter()
        .map(|id| {
            let idx = members.get(id.as_str()).ok_or_else(|| Error::EmptyCluster(id.clone()))?;
            let m = idx.len() as f64;
            let mean_of = |f: &dyn Fn(&HouseholdRecord) -> f64| idx.iter().map(|&i| f(&households[i])).sum::<f64>() / m;
            Ok(TargetRow {
                wealth_index: idx.iter().map(|&i| pca.scores[i]).sum::<f64>() / m,
                toilet_access: mean_of(&|h| h.toilet_outside as f64),
                clean_water: mean_of(&|h| h.improved_water as f64),
                educational_attainment: mean_of(&|h| h.head_higher_edu as f64),
                cluster_id: id,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TargetTable { rows })
}

/// Reads `cluster_id,toilet_outside,improved_water,head_higher_edu,asset...`.
/// Returns the records and the asset column names.
pub fn read_households(path: impl AsRef<Path>) -> Result<(Vec<HouseholdRecord>, Vec<String>)> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 5 {
        return Err(Error::parse(path, 1, "household file needs at least one asset column"));
    }
    let asset_names: Vec<String> = headers.iter().skip(4).map(str::to_string).collect();
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let flag = |i: usize| -> Result<u8> {
            match &record[i] {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(Error::parse(path, line, format!("`{}` must be 0 or 1, got `{other}`", &headers[i]))),
            }
        };
        let assets = record
            .iter()
            .skip(4)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::parse(path, line, format!("bad asset value `{v}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(HouseholdRecord {
            cluster_id: record[0].to_string(),
            toilet_outside: flag(1)?,
            improved_water: flag(2)?,
            head_higher_edu: flag(3)?,
            assets,
        });
    }
    Ok((out, asset_names))
}

pub fn write_households(path: impl AsRef<Path>, households: &[HouseholdRecord], asset_names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["cluster_id", "toilet_outside", "improved_water", "head_higher_edu"];
    header.extend(asset_names.iter().map(String::as_str));
    w.write_record(&header)?;
    for h in households {
        let mut rec = vec![
            h.cluster_id.clone(),
            h.toilet_outside.to_string(),
            h.improved_water.to_string(),
            h.head_higher_edu.to_string(),
        ];
        rec.extend(h.assets.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_targets(path: impl AsRef<Path>, table: &TargetTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in &table.rows {
        w.serialize(row)?;
    }
    if table.rows.is_empty() {
        let mut header = vec!["cluster_id"];
        header.extend(TargetTable::COLUMNS);
        w.write_record(&header)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_targets(path: impl AsRef<Path>) -> Result<TargetTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let rows = reader.deserialize().collect::<std::result::Result<Vec<TargetRow>, _>>()?;
    Ok(TargetTable { rows })
}
