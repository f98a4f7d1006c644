//! Seeded synthetic scenes with a known latent wealth factor.
//!
//! Every cluster gets a latent wealth `w ~ N(0, 1)`. Each input family
//! carries a partial, noisy view of it:
//!
//! * night lights: a bump around the centroid whose height grows as
//!   `exp(w)`; temperature and vegetation get weaker bumps;
//! * points of interest: per-category Poisson counts with rate
//!   `base * exp(slope * w)`, scattered inside the cluster radius, plus
//!   uniform background clutter;
//! * social media: segment shares `logistic(b * w + noise)`;
//! * households: asset `i` owned with probability
//!   `logistic(c_i * (w + e) + d_i)`, `e` a household-level deviation.
//!
//! About 5% of raster cells are clouded out. Sub-generators draw from
//! separate streams of the seed, so all output is a function of the config.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geo::{haversine_deg, ClusterSite, GeoPoint, Urbanity, EARTH_RADIUS_M};
use crate::ingest::{write_clusters, write_pois, write_raster, write_social, PoiRecord, SocialRecord};
use crate::models::rng_stream;
use crate::raster::RasterGrid;
use crate::targets::{write_households, HouseholdRecord};
use crate::{Error, Result};

pub const NODATA: f64 = -9999.0;

/// Names of the generated rasters, in file order.
pub const RASTER_NAMES: [&str; 3] = ["ntl", "temperature", "ndvi"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiCategory {
    pub name: String,
    /// Expected count in a cluster of average wealth.
    pub base_rate: f64,
    /// Log-rate increase per unit of latent wealth.
    pub wealth_slope: f64,
}

impl PoiCategory {
    fn new(name: &str, base_rate: f64, wealth_slope: f64) -> Self {
        Self {
            name: name.into(),
            base_rate,
            wealth_slope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub n_clusters: usize,
    pub households_per_cluster: usize,
    pub n_assets: usize,
    /// Extent as `[south, north]` and `[west, east]` in degrees.
    pub lat_range: [f64; 2],
    pub lon_range: [f64; 2],
    pub cell_deg: f64,
    pub cloud_fraction: f64,
    pub poi_categories: Vec<PoiCategory>,
    /// Uniform clutter POIs per cluster, spread over the whole extent.
    pub background_pois_per_cluster: f64,
    /// Range of the asset slopes `c_i`.
    pub asset_slope_range: [f64; 2],
    /// Range of the asset offsets `d_i`.
    pub asset_offset_range: [f64; 2],
    /// Scales every noise term: household deviations, raster speckle,
    /// social-share noise. Zero leaves only sampling noise.
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_clusters: 1000,
            households_per_cluster: 20,
            n_assets: 10,
            lat_range: [12.0, 15.0],
            lon_range: [121.0, 123.5],
            cell_deg: 0.01,
            cloud_fraction: 0.05,
            poi_categories: vec![
                PoiCategory::new("bank", 0.8, 1.0),
                PoiCategory::new("restaurant", 3.0, 0.7),
                PoiCategory::new("convenience_store", 4.0, 0.4),
                PoiCategory::new("hospital", 0.4, 0.6),
                PoiCategory::new("public_school", 2.0, 0.1),
            ],
            background_pois_per_cluster: 1.0,
            asset_slope_range: [0.6, 1.6],
            asset_offset_range: [-1.0, 1.0],
            noise_sd: 0.5,
            seed: 42,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_clusters < 1 || self.households_per_cluster < 1 || self.n_assets < 1 {
            return bad("cluster, household and asset counts must be at least 1".into());
        }
        let [s, n] = self.lat_range;
        let [w, e] = self.lon_range;
        if !(-89.0 <= s && s < n && n <= 89.0 && -180.0 <= w && w < e && e <= 180.0) {
            return bad(format!("bad extent {:?} x {:?}", self.lat_range, self.lon_range));
        }
        if !(self.cell_deg > 0.0) || self.cell_deg > (n - s).min(e - w) {
            return bad(format!("bad cell size {}", self.cell_deg));
        }
        if !(0.0..1.0).contains(&self.cloud_fraction) {
            return bad(format!("cloud_fraction {} outside [0, 1)", self.cloud_fraction));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return bad(format!("noise_sd {} must be >= 0", self.noise_sd));
        }
        if !(self.background_pois_per_cluster >= 0.0) {
            return bad("background_pois_per_cluster must be >= 0".into());
        }
        let [c_lo, c_hi] = self.asset_slope_range;
        if !(c_lo > 0.0 && c_lo <= c_hi) {
            return bad("asset slopes must be positive".into());
        }
        let [d_lo, d_hi] = self.asset_offset_range;
        if !(d_lo <= d_hi) {
            return bad("asset offset range is inverted".into());
        }
        for c in &self.poi_categories {
            if c.name.is_empty() || c.name.contains(',') || !(c.base_rate >= 0.0) || !c.wealth_slope.is_finite() {
                return bad(format!("bad POI category {:?}", c.name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub config: SceneConfig,
    pub clusters: Vec<ClusterSite>,
    pub asset_names: Vec<String>,
    pub households: Vec<HouseholdRecord>,
    pub rasters: Vec<(String, RasterGrid)>,
    pub pois: Vec<PoiRecord>,
    pub social: Vec<SocialRecord>,
    /// Ground truth, one value per cluster in cluster order. Never written
    /// next to the model inputs.
    pub latent_wealth: Vec<f64>,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Point at `distance_m` along `bearing` from (`lat`, `lon`).
fn destination(lat: f64, lon: f64, distance_m: f64, bearing: f64) -> (f64, f64) {
    let (phi1, lambda1) = (lat.to_radians(), lon.to_radians());
    let delta = distance_m / EARTH_RADIUS_M;
    let phi2 = (phi1.sin() * delta.cos() + phi1.cos() * delta.sin() * bearing.cos()).asin();
    let lambda2 = lambda1 + (bearing.sin() * delta.sin() * phi1.cos()).atan2(delta.cos() - phi1.sin() * phi2.sin());
    (phi2.to_degrees(), lambda2.to_degrees())
}

// Stream ids for the sub-generators.
const S_CLUSTERS: u64 = 1;
const S_RASTERS: u64 = 2;
const S_POIS: u64 = 3;
const S_SOCIAL: u64 = 4;
const S_HOUSEHOLDS: u64 = 5;

pub fn generate_scene(config: &SceneConfig) -> Result<SyntheticScene> {
    config.validate()?;
    let (clusters, latent) = clusters(config);
    let rasters = rasters(config, &clusters, &latent)?;
    let pois = pois(config, &clusters, &latent)?;
    let social = social(config, &clusters, &latent)?;
    let (asset_names, households) = households(config, &clusters, &latent);
    Ok(SyntheticScene {
        config: config.clone(),
        clusters,
        asset_names,
        households,
        rasters,
        pois,
        social,
        latent_wealth: latent,
    })
}

fn clusters(config: &SceneConfig) -> (Vec<ClusterSite>, Vec<f64>) {
    let mut rng = rng_stream(config.seed, S_CLUSTERS);
    // Keep centroids a rural radius away from the raster edge.
    let margin = 0.06;
    let [s, n] = config.lat_range;
    let [w, e] = config.lon_range;
    let width = (config.n_clusters.max(2) - 1).to_string().len();
    let mut sites = Vec::with_capacity(config.n_clusters);
    let mut latent = Vec::with_capacity(config.n_clusters);
    for i in 0..config.n_clusters {
        let wealth = normal(&mut rng);
        let lat = rng.random_range((s + margin).min(n)..=(n - margin).max(s));
        let lon = rng.random_range((w + margin).min(e)..=(e - margin).max(w));
        let urbanity = if rng.random::<f64>() < logistic(0.8 * wealth - 0.4) {
            Urbanity::Urban
        } else {
            Urbanity::Rural
        };
        sites.push(ClusterSite {
            id: format!("c{i:0width$}"),
            centroid: GeoPoint::new(lat, lon).expect("inside validated extent"),
            urbanity,
        });
        latent.push(wealth);
    }
    (sites, latent)
}

fn rasters(config: &SceneConfig, sites: &[ClusterSite], latent: &[f64]) -> Result<Vec<(String, RasterGrid)>> {
    let mut rng = rng_stream(config.seed, S_RASTERS);
    let [s, n] = config.lat_range;
    let [w, e] = config.lon_range;
    let cell = config.cell_deg;
    let n_rows = ((n - s) / cell).round().max(1.0) as usize;
    let n_cols = ((e - w) / cell).round().max(1.0) as usize;
    let origin_lat = n - cell / 2.0;
    let origin_lon = w + cell / 2.0;
    let center = |r: usize, c: usize| (origin_lat - r as f64 * cell, origin_lon + c as f64 * cell);

    // Development footprint: sum of Gaussian bumps around each centroid.
    let mut lights = vec![0.0; n_rows * n_cols];
    let mut footprint = vec![0.0; n_rows * n_cols];
    for (site, &wealth) in sites.iter().zip(latent) {
        let sigma = site.radius_m() * 0.35;
        let jitter = config.noise_sd * 0.4 * normal(&mut rng);
        let height = 8.0 * (wealth + jitter).exp();
        let reach = 3.0 * sigma / 111_000.0;
        let (lat, lon) = (site.centroid.lat(), site.centroid.lon());
        let r_lo = (((origin_lat - (lat + reach)) / cell).floor().max(0.0)) as usize;
        let r_hi = (((origin_lat - (lat - reach)) / cell).ceil().max(0.0) as usize).min(n_rows - 1);
        let lon_reach = reach / lat.to_radians().cos();
        let c_lo = (((lon - lon_reach - origin_lon) / cell).floor().max(0.0)) as usize;
        let c_hi = (((lon + lon_reach - origin_lon) / cell).ceil().max(0.0) as usize).min(n_cols - 1);
        for r in r_lo..=r_hi {
            for c in c_lo..=c_hi {
                let (clat, clon) = center(r, c);
                let d = haversine_deg(lat, lon, clat, clon);
                let k = (-0.5 * (d / sigma).powi(2)).exp();
                lights[r * n_cols + c] += height * k;
                footprint[r * n_cols + c] += (1.0 + 0.5 * wealth) * k;
            }
        }
    }

    let mut ntl = Vec::with_capacity(lights.len());
    let mut temperature = Vec::with_capacity(lights.len());
    let mut ndvi = Vec::with_capacity(lights.len());
    for r in 0..n_rows {
        let (lat, _) = center(r, 0);
        for c in 0..n_cols {
            let k = r * n_cols + c;
            let speckle = config.noise_sd * normal(&mut rng);
            ntl.push(round4((lights[k] + 2.0 + 2.0 * speckle).max(0.0)));
            let t = 30.0 - 0.8 * (lat - s) + 0.6 * footprint[k].min(3.0) + 0.6 * config.noise_sd * normal(&mut rng);
            temperature.push(round4(t));
            let v = 0.7 - 0.12 * footprint[k] + 0.1 * config.noise_sd * normal(&mut rng);
            ndvi.push(round4(v.clamp(-1.0, 1.0)));
        }
    }

    let mut out = Vec::new();
    for (name, mut values) in RASTER_NAMES.iter().zip([ntl, temperature, ndvi]) {
        for v in values.iter_mut() {
            if rng.random::<f64>() < config.cloud_fraction {
                *v = NODATA;
            }
        }
        out.push((
            name.to_string(),
            RasterGrid::new(origin_lat, origin_lon, cell, n_rows, n_cols, NODATA, values)?,
        ));
    }
    Ok(out)
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidParameter(format!("poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

fn pois(config: &SceneConfig, sites: &[ClusterSite], latent: &[f64]) -> Result<Vec<PoiRecord>> {
    let mut rng = rng_stream(config.seed, S_POIS);
    let mut out = Vec::new();
    let mut push = |rng: &mut ChaCha8Rng, category: &PoiCategory, lat: f64, lon: f64, wealth: f64| {
        let mut attributes = std::collections::BTreeMap::new();
        if category.name == "public_school" {
            let has_water = rng.random::<f64>() < logistic(0.3 + 1.2 * wealth);
            attributes.insert("has_water".to_string(), f64::from(u8::from(has_water)));
        }
        out.push(PoiRecord {
            category: category.name.clone(),
            location: GeoPoint::new(lat.clamp(-90.0, 90.0), lon.clamp(-180.0, 180.0)).expect("clamped"),
            attributes,
        });
    };
    for (site, &wealth) in sites.iter().zip(latent) {
        for category in &config.poi_categories {
            let count = poisson(&mut rng, category.base_rate * (category.wealth_slope * wealth).exp())?;
            for _ in 0..count {
                let distance = site.radius_m() * 0.95 * rng.random::<f64>().sqrt();
                let bearing = rng.random_range(0.0..std::f64::consts::TAU);
                let (lat, lon) = destination(site.centroid.lat(), site.centroid.lon(), distance, bearing);
                push(&mut rng, category, lat, lon, wealth);
            }
        }
    }
    if !config.poi_categories.is_empty() {
        let n_background = poisson(&mut rng, config.background_pois_per_cluster * sites.len() as f64)?;
        let [s, n] = config.lat_range;
        let [w, e] = config.lon_range;
        for _ in 0..n_background {
            let category = &config.poi_categories[rng.random_range(0..config.poi_categories.len())];
            let (lat, lon) = (rng.random_range(s..=n), rng.random_range(w..=e));
            let wealth = normal(&mut rng);
            push(&mut rng, category, lat, lon, wealth);
        }
    }
    Ok(out)
}

fn social(config: &SceneConfig, sites: &[ClusterSite], latent: &[f64]) -> Result<Vec<SocialRecord>> {
    let mut rng = rng_stream(config.seed, S_SOCIAL);
    let noise = config.noise_sd * 3.0;
    let mut out = Vec::with_capacity(sites.len());
    for (site, &wealth) in sites.iter().zip(latent) {
        let scale = match site.urbanity {
            Urbanity::Urban => 900.0,
            Urbanity::Rural => 600.0,
        };
        let reach = 0.3 * wealth + 0.5 * noise * normal(&mut rng);
        let total = poisson(&mut rng, scale * reach.exp())?;
        let mut share = |b0: f64, b1: f64| -> Result<u64> {
            let p = logistic(b0 + b1 * wealth + noise * normal(&mut rng));
            let dist = Binomial::new(total, p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(dist.sample(&mut rng))
        };
        out.push(SocialRecord {
            cluster_id: site.id.clone(),
            total_users: total,
            users_4g: share(-0.3, 0.8)?,
            users_3g: share(-0.4, -0.1)?,
            users_2g: share(-1.5, -0.6)?,
            users_wifi: share(-1.0, 0.6)?,
            users_apple: share(-2.5, 0.7)?,
            users_midhigh_consumer: share(-1.2, 0.8)?,
        });
    }
    Ok(out)
}

fn households(config: &SceneConfig, sites: &[ClusterSite], latent: &[f64]) -> (Vec<String>, Vec<HouseholdRecord>) {
    let mut rng = rng_stream(config.seed, S_HOUSEHOLDS);
    let [c_lo, c_hi] = config.asset_slope_range;
    let [d_lo, d_hi] = config.asset_offset_range;
    let slopes: Vec<f64> = (0..config.n_assets).map(|_| rng.random_range(c_lo..=c_hi)).collect();
    let offsets: Vec<f64> = (0..config.n_assets).map(|_| rng.random_range(d_lo..=d_hi)).collect();
    let names = (1..=config.n_assets).map(|i| format!("asset_{i}")).collect();
    let bernoulli = |rng: &mut ChaCha8Rng, p: f64| u8::from(rng.random::<f64>() < p);
    let mut out = Vec::with_capacity(sites.len() * config.households_per_cluster);
    for (site, &wealth) in sites.iter().zip(latent) {
        for _ in 0..config.households_per_cluster {
            let h = wealth + config.noise_sd * normal(&mut rng);
            let assets = slopes
                .iter()
                .zip(&offsets)
                .map(|(c, d)| f64::from(bernoulli(&mut rng, logistic(c * h + d))))
                .collect();
            out.push(HouseholdRecord {
                cluster_id: site.id.clone(),
                assets,
                toilet_outside: bernoulli(&mut rng, logistic(-0.5 - h)),
                improved_water: bernoulli(&mut rng, logistic(0.5 + h)),
                head_higher_edu: bernoulli(&mut rng, logistic(-1.0 + 0.8 * h)),
            });
        }
    }
    (names, out)
}

/// File names used by [`write_scene`], relative to the output directory.
pub mod files {
    pub const CLUSTERS: &str = "clusters.csv";
    pub const HOUSEHOLDS: &str = "households.csv";
    pub const POIS: &str = "pois.csv";
    pub const SOCIAL: &str = "social.csv";
    pub const RASTER_DIR: &str = "rasters";
    pub const TRUTH_DIR: &str = "truth";
    pub const LATENT: &str = "latent_wealth.csv";
}

/// Writes the model inputs into `dir` and the latent wealth into
/// `dir/truth/`, which no pipeline stage reads.
pub fn write_scene(scene: &SyntheticScene, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir.join(files::RASTER_DIR))?;
    std::fs::create_dir_all(dir.join(files::TRUTH_DIR))?;
    write_clusters(dir.join(files::CLUSTERS), &scene.clusters)?;
    write_households(dir.join(files::HOUSEHOLDS), &scene.households, &scene.asset_names)?;
    write_pois(dir.join(files::POIS), &scene.pois)?;
    write_social(dir.join(files::SOCIAL), &scene.social)?;
    for (name, raster) in &scene.rasters {
        write_raster(dir.join(files::RASTER_DIR).join(format!("{name}.asc")), raster)?;
    }
    let mut w = csv::Writer::from_path(dir.join(files::TRUTH_DIR).join(files::LATENT))?;
    w.write_record(["cluster_id", "latent_wealth"])?;
    for (site, v) in scene.clusters.iter().zip(&scene.latent_wealth) {
        w.write_record([site.id.as_str(), &v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{derive_cluster_targets, pca_first_component};

    fn small() -> SceneConfig {
        SceneConfig {
            n_clusters: 60,
            households_per_cluster: 8,
            n_assets: 4,
            lat_range: [14.0, 14.6],
            lon_range: [121.0, 121.5],
            ..SceneConfig::default()
        }
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn shapes_and_ids_are_consistent() {
        let cfg = small();
        let scene = generate_scene(&cfg).unwrap();
        assert_eq!(scene.clusters.len(), 60);
        assert_eq!(scene.latent_wealth.len(), 60);
        assert_eq!(scene.households.len(), 480);
        assert_eq!(scene.social.len(), 60);
        assert_eq!(scene.rasters.len(), 3);
        let ids: std::collections::HashSet<&str> = scene.clusters.iter().map(|c| c.id.as_str()).collect();
        assert!(scene.households.iter().all(|h| ids.contains(h.cluster_id.as_str()) && h.assets.len() == 4));
        assert!(scene.social.iter().all(|s| s.validate().is_ok()));
    }

    #[test]
    fn cloud_fraction_is_about_five_percent() {
        let scene = generate_scene(&small()).unwrap();
        for (_, r) in &scene.rasters {
            let clouded = r.values().iter().filter(|v| **v == r.nodata()).count();
            let share = clouded as f64 / r.values().len() as f64;
            assert!((share - 0.05).abs() < 0.01, "{share}");
        }
    }

    #[test]
    fn same_seed_same_files() {
        let cfg = small();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        write_scene(&generate_scene(&cfg).unwrap(), a.path()).unwrap();
        write_scene(&generate_scene(&cfg).unwrap(), b.path()).unwrap();
        for name in ["clusters.csv", "households.csv", "pois.csv", "social.csv", "rasters/ntl.asc", "truth/latent_wealth.csv"] {
            assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
        }
        let other = generate_scene(&SceneConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(other.latent_wealth, generate_scene(&small()).unwrap().latent_wealth);
    }

    #[test]
    fn latent_wealth_stays_out_of_inputs() {
        let dir = tempfile::tempdir().unwrap();
        write_scene(&generate_scene(&small()).unwrap(), dir.path()).unwrap();
        for entry in std::fs::read_dir(dir.path()).unwrap() {
            let path = entry.unwrap().path();
            if path.is_file() {
                let text = std::fs::read_to_string(&path).unwrap();
                assert!(!text.contains("latent"), "{path:?}");
            }
        }
        assert!(dir.path().join("truth/latent_wealth.csv").exists());
    }

    #[test]
    fn signal_only_single_asset_tracks_latent_wealth() {
        // A shallow slope keeps ownership probability close to linear in w,
        // and many households make the cluster share precise.
        let cfg = SceneConfig {
            n_clusters: 200,
            households_per_cluster: 2000,
            n_assets: 1,
            asset_slope_range: [0.5, 0.5],
            asset_offset_range: [0.0, 0.0],
            noise_sd: 0.0,
            lat_range: [14.0, 15.0],
            lon_range: [121.0, 122.0],
            ..SceneConfig::default()
        };
        let scene = generate_scene(&cfg).unwrap();
        let rows: Vec<Vec<f64>> = scene.households.iter().map(|h| h.assets.clone()).collect();
        assert_eq!(pca_first_component(&rows).unwrap().loadings, vec![1.0]);
        let table = derive_cluster_targets(&scene.households, None).unwrap();
        let index: Vec<f64> = table.rows.iter().map(|r| r.wealth_index).collect();
        let r = pearson(&index, &scene.latent_wealth);
        assert!(r >= 0.99, "{r}");
    }

    #[test]
    fn default_households_give_a_faithful_index() {
        let scene = generate_scene(&SceneConfig { n_clusters: 300, ..SceneConfig::default() }).unwrap();
        let table = derive_cluster_targets(&scene.households, None).unwrap();
        let index: Vec<f64> = table.rows.iter().map(|r| r.wealth_index).collect();
        let r = pearson(&index, &scene.latent_wealth);
        assert!(r >= 0.9, "{r}");
    }

    #[test]
    fn config_validation() {
        assert!(SceneConfig { n_clusters: 0, ..small() }.validate().is_err());
        assert!(SceneConfig { noise_sd: -1.0, ..small() }.validate().is_err());
        assert!(SceneConfig { lat_range: [15.0, 14.0], ..small() }.validate().is_err());
        assert!(SceneConfig { asset_slope_range: [0.0, 1.0], ..small() }.validate().is_err());
        let json: SceneConfig = serde_json::from_str(r#"{"n_clusters": 5}"#).unwrap();
        assert_eq!(json.n_assets, 10);
    }
}
