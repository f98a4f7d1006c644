//! WebAssembly bindings for the static demo page in `www/`.
//!
//! A [`Demo`] holds one small synthetic scene plus a random forest trained
//! on it. The page calls three operations: zonal statistics around a
//! clicked point, the asset-based wealth index, and a SHAP force plot for
//! one cluster. Every method returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;
use wealthmap::explain::{force_plot_data, tree_shap};
use wealthmap::geo::GeoPoint;
use wealthmap::ingest::{assemble_features, FeatureOptions};
use wealthmap::models::{ColumnImputer, Dataset, ForestParams, ModelSpec, TreeEnsemble};
use wealthmap::raster::zonal_statistics;
use wealthmap::synth::{generate_scene, SceneConfig, SyntheticScene};
use wealthmap::targets::{derive_cluster_targets, pca_first_component, TargetTable};

/// Scene small enough to generate and train in well under a second.
pub fn demo_config(seed: u64, n_clusters: usize) -> SceneConfig {
    SceneConfig {
        n_clusters,
        lat_range: [12.0, 13.0],
        lon_range: [121.0, 122.2],
        seed,
        ..SceneConfig::default()
    }
}

pub struct DemoCore {
    scene: SyntheticScene,
    targets: TargetTable,
    data: Dataset,
    forest: TreeEnsemble,
}

#[derive(Serialize)]
struct RasterPreview<'a> {
    name: &'a str,
    rows: usize,
    cols: usize,
    /// Center of the north-west cell.
    north: f64,
    west: f64,
    cell_deg: f64,
    /// Row-major from the north edge; `null` for clouded cells.
    values: Vec<Option<f64>>,
    clusters: Vec<ClusterDot<'a>>,
}

#[derive(Serialize)]
struct ClusterDot<'a> {
    id: &'a str,
    lat: f64,
    lon: f64,
    urban: bool,
}

#[derive(Serialize)]
struct ZonalReply {
    raster: String,
    radius_m: f64,
    cells: usize,
    count: usize,
    mean: f64,
    max: f64,
    min: f64,
    variance: f64,
    skewness: f64,
    kurtosis: f64,
}

#[derive(Serialize)]
struct WealthReply {
    assets: Vec<String>,
    loadings: Vec<f64>,
    explained_share: f64,
    /// Per cluster: (id, wealth index, latent wealth).
    clusters: Vec<(String, f64, f64)>,
    /// Pearson correlation between index and latent wealth.
    correlation: f64,
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

impl DemoCore {
    pub fn new(seed: u64, n_clusters: usize, n_trees: usize) -> Result<Self, String> {
        let scene = generate_scene(&demo_config(seed, n_clusters)).map_err(err)?;
        let matrix = assemble_features(&scene.clusters, &scene.rasters, &scene.pois, &scene.social, &FeatureOptions::default())
            .map_err(err)?;
        let ids: Vec<String> = scene.clusters.iter().map(|c| c.id.clone()).collect();
        let targets = derive_cluster_targets(&scene.households, Some(&ids)).map_err(err)?;
        let y = targets.aligned(&ids, "wealth_index").map_err(err)?;
        let mut data = Dataset::from_features(&matrix, y).map_err(err)?;
        ColumnImputer::fit(&data).apply(&mut data);
        let spec = ModelSpec::RandomForest(ForestParams {
            n_trees,
            max_depth: 6,
            seed,
            ..ForestParams::default()
        });
        let forest = spec.fit(&data).map_err(err)?.as_ensemble().map_err(err)?.clone();
        Ok(Self {
            scene,
            targets,
            data,
            forest,
        })
    }

    pub fn raster_names(&self) -> Vec<String> {
        self.scene.rasters.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn preview(&self, raster: &str) -> Result<String, String> {
        let (name, grid) = self
            .scene
            .rasters
            .iter()
            .find(|(n, _)| n == raster)
            .ok_or_else(|| format!("no raster named `{raster}`"))?;
        let values = (0..grid.n_rows())
            .flat_map(|r| (0..grid.n_cols()).map(move |c| (r, c)))
            .map(|(r, c)| (!grid.is_nodata(r, c)).then(|| grid.get(r, c)))
            .collect();
        let clusters = self
            .scene
            .clusters
            .iter()
            .map(|c| ClusterDot {
                id: &c.id,
                lat: c.centroid.lat(),
                lon: c.centroid.lon(),
                urban: c.urbanity == wealthmap::geo::Urbanity::Urban,
            })
            .collect();
        let preview = RasterPreview {
            name,
            rows: grid.n_rows(),
            cols: grid.n_cols(),
            north: grid.origin_lat(),
            west: grid.origin_lon(),
            cell_deg: grid.cell_deg(),
            values,
            clusters,
        };
        serde_json::to_string(&preview).map_err(err)
    }

    pub fn zonal(&self, raster: &str, lat: f64, lon: f64, radius_m: f64) -> Result<String, String> {
        let (_, grid) = self
            .scene
            .rasters
            .iter()
            .find(|(n, _)| n == raster)
            .ok_or_else(|| format!("no raster named `{raster}`"))?;
        let center = GeoPoint::new(lat, lon).map_err(err)?;
        let cells = grid.cells_within(center, radius_m).len();
        let s = zonal_statistics(grid, center, radius_m).map_err(err)?;
        serde_json::to_string(&ZonalReply {
            raster: raster.to_string(),
            radius_m,
            cells,
            count: s.count,
            mean: s.mean,
            max: s.maximum,
            min: s.minimum,
            variance: s.variance,
            skewness: s.skewness,
            kurtosis: s.kurtosis,
        })
        .map_err(err)
    }

    pub fn wealth_index(&self) -> Result<String, String> {
        let rows: Vec<Vec<f64>> = self.scene.households.iter().map(|h| h.assets.clone()).collect();
        let pca = pca_first_component(&rows).map_err(err)?;
        let index: Vec<f64> = self.targets.rows.iter().map(|r| r.wealth_index).collect();
        let clusters = self
            .targets
            .rows
            .iter()
            .zip(&self.scene.latent_wealth)
            .map(|(r, &w)| (r.cluster_id.clone(), r.wealth_index, w))
            .collect();
        serde_json::to_string(&WealthReply {
            assets: self.scene.asset_names.clone(),
            loadings: pca.loadings,
            explained_share: pca.explained_share,
            clusters,
            correlation: pearson(&index, &self.scene.latent_wealth),
        })
        .map_err(err)
    }

    pub fn force_plot(&self, cluster: usize) -> Result<String, String> {
        if cluster >= self.data.n_rows() {
            return Err(format!("cluster index {cluster} out of range"));
        }
        let e = tree_shap(&self.forest, self.data.row(cluster)).map_err(err)?;
        let plot = force_plot_data(&e);
        let mut v = serde_json::to_value(&plot).map_err(err)?;
        v["cluster_id"] = self.data.row_ids()[cluster].clone().into();
        v["observed"] = self.data.target()[cluster].into();
        serde_json::to_string(&v).map_err(err)
    }
}

/// JavaScript handle on a [`DemoCore`].
#[wasm_bindgen]
pub struct Demo(DemoCore);

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64, n_clusters: usize, n_trees: usize) -> Result<Demo, JsValue> {
        DemoCore::new(seed, n_clusters, n_trees).map(Demo).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen(js_name = rasterNames)]
    pub fn raster_names(&self) -> Vec<String> {
        self.0.raster_names()
    }

    pub fn preview(&self, raster: &str) -> Result<String, JsValue> {
        js(self.0.preview(raster))
    }

    pub fn zonal(&self, raster: &str, lat: f64, lon: f64, radius_m: f64) -> Result<String, JsValue> {
        js(self.0.zonal(raster, lat, lon, radius_m))
    }

    #[wasm_bindgen(js_name = wealthIndex)]
    pub fn wealth_index(&self) -> Result<String, JsValue> {
        js(self.0.wealth_index())
    }

    #[wasm_bindgen(js_name = forcePlot)]
    pub fn force_plot(&self, cluster: usize) -> Result<String, JsValue> {
        js(self.0.force_plot(cluster))
    }
}
