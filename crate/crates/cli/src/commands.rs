//! One function per subcommand. Every output is a pure function of the
//! inputs and the seed: maps are ordered and nothing records wall time.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wealthmap::explain::{explain_rows, force_plot_data, global_importance, write_force_plot, write_global_importance, write_shap_values};
use wealthmap::ingest::{self, FeatureMatrix, FeatureOptions, SourceGroup};
use wealthmap::models::{
    k_fold_cv, random_search, recursive_feature_elimination, ColumnImputer, Dataset, FittedModel, ModelFamily, ModelSpec,
};
use wealthmap::synth::{self, generate_scene, write_scene};
use wealthmap::targets::{self, pca_first_component};

use crate::{CliError, Settings};

pub const FEATURES: &str = "features.csv";
pub const TARGETS: &str = "targets.csv";
pub const PCA: &str = "pca.json";
pub const MODEL: &str = "model.json";
pub const IMPUTER: &str = "imputer.json";
pub const TRAIN_METRICS: &str = "train_metrics.json";
pub const BENCHMARK_CSV: &str = "benchmark.csv";
pub const METRICS: &str = "metrics.json";
pub const SHAP_VALUES: &str = "shap_values.csv";
pub const GLOBAL_IMPORTANCE: &str = "global_importance.csv";
pub const FORCE_PLOT_DIR: &str = "force_plots";
pub const PREDICTIONS: &str = "predictions.csv";
pub const SCENE_CONFIG: &str = "scene_config.json";

/// Benchmark columns, in output order.
pub const GROUPS: [&str; 4] = ["SM", "RS", "POI", "All"];

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn require(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Input(format!("input file {} does not exist", path.display())))
    }
}

pub fn synth(s: &Settings) -> Result<(), CliError> {
    let scene = generate_scene(&s.config.synth).map_err(|e| CliError::Input(e.to_string()))?;
    write_scene(&scene, &s.out)?;
    write_json(&s.out.join(SCENE_CONFIG), &scene.config)?;
    log::info!("wrote {} clusters to {}", scene.clusters.len(), s.out.display());
    Ok(())
}

pub fn features(s: &Settings) -> Result<(), CliError> {
    let (clusters_path, pois_path, social_path) = (s.clusters(), s.pois(), s.social());
    for p in [&clusters_path, &pois_path, &social_path] {
        require(p)?;
    }
    let clusters = ingest::read_clusters(&clusters_path)?;
    let rasters = s
        .rasters()?
        .into_iter()
        .map(|(name, path)| {
            require(&path)?;
            Ok((name, ingest::read_raster(&path)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let pois = ingest::read_pois(&pois_path)?;
    let social = ingest::read_social(&social_path)?;
    let options = FeatureOptions {
        poi_categories: s.config.poi_categories.clone(),
    };
    let matrix = ingest::assemble_features(&clusters, &rasters, &pois, &social, &options)?;
    ingest::write_features(s.out.join(FEATURES), &matrix)?;
    log::info!("{} clusters x {} features", matrix.n_rows(), matrix.n_cols());
    Ok(())
}

#[derive(Debug, Serialize)]
struct PcaSummary {
    assets: Vec<String>,
    loadings: Vec<f64>,
    eigenvalue: f64,
    explained_share: f64,
    dropped: Vec<String>,
}

pub fn targets(s: &Settings) -> Result<(), CliError> {
    let hh_path = s.households();
    require(&hh_path)?;
    let (households, assets) = targets::read_households(&hh_path)?;
    // Follow the cluster file's order when there is one.
    let clusters_path = s.clusters();
    let order: Option<Vec<String>> = if clusters_path.is_file() {
        Some(ingest::read_clusters(&clusters_path)?.into_iter().map(|c| c.id).collect())
    } else {
        None
    };
    let table = targets::derive_cluster_targets(&households, order.as_deref())?;
    targets::write_targets(s.out.join(TARGETS), &table)?;

    let rows: Vec<Vec<f64>> = households.iter().map(|h| h.assets.clone()).collect();
    let pca = pca_first_component(&rows)?;
    let summary = PcaSummary {
        dropped: pca.dropped.iter().map(|&j| assets[j].clone()).collect(),
        assets,
        loadings: pca.loadings,
        eigenvalue: pca.eigenvalue,
        explained_share: pca.explained_share,
    };
    write_json(&s.out.join(PCA), &summary)?;
    Ok(())
}

/// Feature matrix with the configured target aligned to its rows.
fn load_training(s: &Settings) -> Result<(FeatureMatrix, Vec<f64>), CliError> {
    let (fpath, tpath) = (s.features(), s.targets());
    require(&fpath)?;
    require(&tpath)?;
    let matrix = ingest::read_features(&fpath)?;
    let table = targets::read_targets(&tpath)?;
    let y = table.aligned(matrix.row_ids(), &s.config.target)?;
    Ok((matrix, y))
}

/// Columns of `matrix` belonging to a benchmark group ("All" keeps all).
fn group_columns(matrix: &FeatureMatrix, group: &str) -> Result<FeatureMatrix, CliError> {
    if group == "All" {
        return Ok(matrix.clone());
    }
    let g: SourceGroup = group.parse()?;
    Ok(matrix.select_group(g))
}

/// Tuned spec when the family has a non-empty search space, default spec
/// otherwise.
fn spec_for(s: &Settings, family: ModelFamily, data: &Dataset) -> Result<ModelSpec, CliError> {
    let space = s.config.search.space(family);
    if space.is_empty() {
        return Ok(family.default_spec(s.seed));
    }
    let result = random_search(data, family, &space, s.config.search.n_iter, s.config.k, s.seed)?;
    Ok(result.best)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ImputerFile {
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct TrainMetrics {
    seed: u64,
    k: usize,
    target: String,
    spec: ModelSpec,
    selected_features: Vec<String>,
    pooled_r2: f64,
    mean_fold_r2: f64,
    fold_r2: Vec<f64>,
}

/// RFE within each source group; the union keeps the original column order.
fn rfe_per_group(s: &Settings, matrix: &FeatureMatrix, y: &[f64], spec: &ModelSpec) -> Result<Vec<String>, CliError> {
    let rfe = &s.config.rfe;
    let mut keep = Vec::new();
    for g in SourceGroup::ALL {
        let sub = matrix.select_group(g);
        if sub.n_cols() == 0 {
            continue;
        }
        let data = Dataset::from_features(&sub, y.to_vec())?;
        let n_keep = rfe.n_keep.min(sub.n_cols());
        keep.extend(recursive_feature_elimination(&data, spec, rfe.step, n_keep, s.seed)?);
    }
    Ok(matrix.column_names().into_iter().filter(|c| keep.contains(c)).collect())
}

pub fn train(s: &Settings) -> Result<(), CliError> {
    let (matrix, y) = load_training(s)?;
    let full = Dataset::from_features(&matrix, y.clone())?;
    let base_spec = match &s.config.model {
        Some(spec) => spec.with_seed(s.seed),
        None => ModelFamily::RandomForest.default_spec(s.seed),
    };

    let selected = if s.config.rfe.enabled {
        let rfe = &s.config.rfe;
        if rfe.per_group {
            rfe_per_group(s, &matrix, &y, &base_spec)?
        } else {
            recursive_feature_elimination(&full, &base_spec, rfe.step, rfe.n_keep.min(matrix.n_cols()), s.seed)?
        }
    } else {
        matrix.column_names()
    };
    let data = Dataset::from_features(&matrix.select_names(&selected)?, y)?;

    let spec = if s.config.tune {
        let space = s.config.search.space(base_spec.family());
        if space.is_empty() {
            return Err(CliError::Input(format!("tuning requested but {} has an empty search space", base_spec.family())));
        }
        random_search(&data, base_spec.family(), &space, s.config.search.n_iter, s.config.k, s.seed)?.best
    } else {
        base_spec
    };

    let cv = k_fold_cv(&data, &spec, s.config.k, s.seed)?;
    let imputer = ColumnImputer::fit(&data);
    let mut filled = data.clone();
    imputer.apply(&mut filled);
    let model = spec.fit(&filled)?;
    model.save(s.out.join(MODEL))?;
    write_json(
        &s.out.join(IMPUTER),
        &ImputerFile {
            feature_names: data.feature_names().to_vec(),
            means: imputer.means,
        },
    )?;
    write_json(
        &s.out.join(TRAIN_METRICS),
        &TrainMetrics {
            seed: s.seed,
            k: s.config.k,
            target: s.config.target.clone(),
            spec,
            selected_features: selected,
            pooled_r2: cv.pooled_r2,
            mean_fold_r2: cv.mean_fold_r2,
            fold_r2: cv.fold_r2,
        },
    )?;
    log::info!("trained; cross-validated pooled R² {:.4}", cv.pooled_r2);
    Ok(())
}

/// `metrics.json` written by `benchmark`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkMetrics {
    /// Pooled out-of-fold R² per model and source group.
    pub grid: BTreeMap<String, BTreeMap<String, f64>>,
    /// Per-fold R² per model and source group.
    pub folds: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    pub mean_fold: BTreeMap<String, BTreeMap<String, f64>>,
    /// Hyperparameters actually used in each cell.
    pub params: BTreeMap<String, BTreeMap<String, ModelSpec>>,
    pub seed: u64,
    pub k: usize,
    pub target: String,
    pub versions: BTreeMap<String, String>,
}

pub fn run_benchmark(s: &Settings) -> Result<BenchmarkMetrics, CliError> {
    let (matrix, y) = load_training(s)?;
    let mut m = BenchmarkMetrics {
        grid: BTreeMap::new(),
        folds: BTreeMap::new(),
        mean_fold: BTreeMap::new(),
        params: BTreeMap::new(),
        seed: s.seed,
        k: s.config.k,
        target: s.config.target.clone(),
        versions: BTreeMap::from([
            ("wealthmap".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ]),
    };
    for &family in &s.config.families {
        let name = family.name().to_string();
        for group in GROUPS {
            let sub = group_columns(&matrix, group)?;
            if sub.n_cols() == 0 {
                return Err(CliError::Input(format!("feature matrix has no {group} columns")));
            }
            let data = Dataset::from_features(&sub, y.clone())?;
            let spec = spec_for(s, family, &data)?;
            let cv = k_fold_cv(&data, &spec, s.config.k, s.seed)?;
            log::info!("{name} / {group}: pooled R² {:.4}", cv.pooled_r2);
            m.grid.entry(name.clone()).or_default().insert(group.into(), cv.pooled_r2);
            m.folds.entry(name.clone()).or_default().insert(group.into(), cv.fold_r2);
            m.mean_fold.entry(name.clone()).or_default().insert(group.into(), cv.mean_fold_r2);
            m.params.entry(name.clone()).or_default().insert(group.into(), spec);
        }
    }
    Ok(m)
}

pub fn benchmark(s: &Settings) -> Result<(), CliError> {
    let m = run_benchmark(s)?;
    let mut w = csv::Writer::from_path(s.out.join(BENCHMARK_CSV))?;
    let mut header = vec!["model"];
    header.extend(GROUPS);
    w.write_record(&header)?;
    for &family in &s.config.families {
        let row = &m.grid[family.name()];
        let mut rec = vec![family.name().to_string()];
        rec.extend(GROUPS.iter().map(|g| format!("{:.6}", row[*g])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    write_json(&s.out.join(METRICS), &m)
}

/// Trained model plus the feature matrix restricted to its columns, with
/// training means filled into missing cells.
fn load_for_inference(s: &Settings) -> Result<(FittedModel, Dataset), CliError> {
    let (mpath, fpath) = (s.model(), s.features());
    require(&mpath)?;
    require(&fpath)?;
    let model = FittedModel::load(&mpath).map_err(|e| match e {
        wealthmap::Error::Json(e) => CliError::Input(format!("{}: {e}", mpath.display())),
        other => other.into(),
    })?;
    let matrix = ingest::read_features(&fpath)?;
    let names = model.feature_names().to_vec();
    let matrix = matrix.select_names(&names)?;
    let zeros = vec![0.0; matrix.n_rows()];
    let mut data = Dataset::from_features(&matrix, zeros)?;

    let ipath = mpath.with_file_name(IMPUTER);
    let imputer = if ipath.is_file() {
        let file: ImputerFile = read_json(&ipath)?;
        if file.feature_names != names {
            return Err(CliError::Input(format!("{} does not match the model's features", ipath.display())));
        }
        ColumnImputer { means: file.means }
    } else {
        ColumnImputer::fit(&data)
    };
    imputer.apply(&mut data);
    Ok((model, data))
}

pub fn explain(s: &Settings) -> Result<(), CliError> {
    let (model, data) = load_for_inference(s)?;
    let ensemble = model.as_ensemble()?;
    let explanations = explain_rows(ensemble, &data)?;
    let worst = explanations.iter().map(|e| e.local_accuracy_error()).fold(0.0, f64::max);
    if worst > 1e-9 {
        log::warn!("local accuracy off by {worst:e}");
    }
    write_shap_values(s.out.join(SHAP_VALUES), data.row_ids(), &explanations)?;
    write_global_importance(s.out.join(GLOBAL_IMPORTANCE), &global_importance(&explanations)?)?;

    if let Some(rows) = &s.config.explain.rows {
        let dir = s.out.join(FORCE_PLOT_DIR);
        std::fs::create_dir_all(&dir)?;
        for id in rows {
            let i = data
                .row_ids()
                .iter()
                .position(|r| r == id)
                .ok_or_else(|| CliError::Input(format!("unknown cluster id `{id}`")))?;
            write_force_plot(dir.join(format!("{id}.csv")), &force_plot_data(&explanations[i]))?;
        }
    }
    Ok(())
}

pub fn predict(s: &Settings) -> Result<(), CliError> {
    let (model, data) = load_for_inference(s)?;
    let mut w = csv::Writer::from_path(s.out.join(PREDICTIONS))?;
    w.write_record(["cluster_id", "prediction"])?;
    for (id, p) in data.row_ids().iter().zip(model.predict(&data)) {
        w.write_record([id.clone(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Default synthetic-scene file layout, re-exported for tests.
pub use synth::files;
