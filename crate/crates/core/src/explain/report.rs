//! Per-prediction force-plot tables and global importance rankings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ShapExplanation;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increase,
    Decrease,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Increase => "increase",
            Direction::Decrease => "decrease",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceArrow {
    pub feature: String,
    pub feature_value: f64,
    pub contribution: f64,
    pub direction: Direction,
}

/// Everything needed to draw one force plot: arrows push the prediction
/// away from the base value, largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcePlot {
    pub base_value: f64,
    pub prediction: f64,
    pub arrows: Vec<ForceArrow>,
}

/// Nonzero contributions sorted by magnitude, descending. Equal magnitudes
/// keep feature order.
pub fn force_plot_data(explanation: &ShapExplanation) -> ForcePlot {
    let mut arrows: Vec<ForceArrow> = explanation
        .contributions
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, &c)| ForceArrow {
            feature: explanation.feature_names[j].clone(),
            feature_value: explanation.feature_values[j],
            contribution: c,
            direction: if c > 0.0 { Direction::Increase } else { Direction::Decrease },
        })
        .collect();
    arrows.sort_by(|a, b| b.contribution.abs().total_cmp(&a.contribution.abs()));
    ForcePlot {
        base_value: explanation.base_value,
        prediction: explanation.prediction,
        arrows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub mean_abs_shap: f64,
    /// (feature value, SHAP value) for every explained row.
    pub points: Vec<(f64, f64)>,
}

/// Features ranked by mean absolute SHAP value, descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub features: Vec<FeatureImportance>,
}

impl GlobalImportance {
    /// 0-based rank of `feature`, if present.
    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.features.iter().position(|f| f.feature == feature)
    }
}

pub fn global_importance(explanations: &[ShapExplanation]) -> Result<GlobalImportance> {
    let first = explanations
        .first()
        .ok_or_else(|| Error::InvalidParameter("no explanations to aggregate".into()))?;
    let names = &first.feature_names;
    if explanations.iter().any(|e| &e.feature_names != names || e.contributions.len() != names.len()) {
        return Err(Error::InvalidParameter("explanations disagree on the feature set".into()));
    }
    let n = explanations.len() as f64;
    let mut features: Vec<FeatureImportance> = names
        .iter()
        .enumerate()
        .map(|(j, name)| FeatureImportance {
            feature: name.clone(),
            mean_abs_shap: explanations.iter().map(|e| e.contributions[j].abs()).sum::<f64>() / n,
            points: explanations.iter().map(|e| (e.feature_values[j], e.contributions[j])).collect(),
        })
        .collect();
    features.sort_by(|a, b| b.mean_abs_shap.total_cmp(&a.mean_abs_shap));
    Ok(GlobalImportance { features })
}

#[derive(Serialize)]
struct BaseValue {
    base_value: f64,
}

/// Long-format SHAP table `cluster_id,feature,feature_value,shap_value`,
/// plus `<path>.json` holding `{"base_value": ..}` of the first row.
pub fn write_shap_values(path: impl AsRef<Path>, ids: &[String], explanations: &[ShapExplanation]) -> Result<()> {
    let path = path.as_ref();
    if ids.len() != explanations.len() {
        return Err(Error::DimensionMismatch {
            expected: explanations.len(),
            found: ids.len(),
        });
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["cluster_id", "feature", "feature_value", "shap_value"])?;
    for (id, e) in ids.iter().zip(explanations) {
        for j in 0..e.contributions.len() {
            w.write_record([
                id.as_str(),
                e.feature_names[j].as_str(),
                &e.feature_values[j].to_string(),
                &e.contributions[j].to_string(),
            ])?;
        }
    }
    w.flush()?;
    let base = BaseValue {
        base_value: explanations.first().map_or(0.0, |e| e.base_value),
    };
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".json");
    std::fs::write(sidecar, serde_json::to_string_pretty(&base)? + "\n")?;
    Ok(())
}

/// Force-plot table: a `base` row, one `contribution` row per arrow and a
/// closing `prediction` row.
pub fn write_force_plot(path: impl AsRef<Path>, plot: &ForcePlot) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["kind", "feature", "feature_value", "value", "direction"])?;
    w.write_record(["base", "", "", &plot.base_value.to_string(), ""])?;
    for a in &plot.arrows {
        w.write_record([
            "contribution",
            a.feature.as_str(),
            &a.feature_value.to_string(),
            &a.contribution.to_string(),
            a.direction.as_str(),
        ])?;
    }
    w.write_record(["prediction", "", "", &plot.prediction.to_string(), ""])?;
    w.flush()?;
    Ok(())
}

/// `rank,feature,mean_abs_shap`, rank starting at 1.
pub fn write_global_importance(path: impl AsRef<Path>, importance: &GlobalImportance) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rank", "feature", "mean_abs_shap"])?;
    for (i, f) in importance.features.iter().enumerate() {
        w.write_record([&(i + 1).to_string(), f.feature.as_str(), &f.mean_abs_shap.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
