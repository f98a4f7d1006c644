//! Pipeline configuration: one JSON document, overridden by flags.
//!
//! Precedence for every setting is command-line flag, then config file, then
//! built-in default. Relative paths inside the config resolve against the
//! config file's directory; input paths that are not given default to the
//! file names written by `synth` and the earlier stages inside the output
//! directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wealthmap::models::{ModelFamily, ModelSpec, SearchSpace};
use wealthmap::synth::{files, SceneConfig};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub clusters: Option<PathBuf>,
    pub households: Option<PathBuf>,
    pub pois: Option<PathBuf>,
    pub social: Option<PathBuf>,
    /// Raster name to file. Empty means every `*.asc` in `<out>/rasters`.
    pub rasters: BTreeMap<String, PathBuf>,
    pub features: Option<PathBuf>,
    pub targets: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub n_iter: usize,
    /// Per-family search spaces; families not listed use their default
    /// space (lambda in [1e-4, 1e2] for ridge and lasso, none otherwise).
    pub spaces: BTreeMap<ModelFamily, SearchSpace>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_iter: 10,
            spaces: BTreeMap::new(),
        }
    }
}

impl SearchConfig {
    pub fn space(&self, family: ModelFamily) -> SearchSpace {
        self.spaces.get(&family).cloned().unwrap_or_else(|| family.default_space())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfeConfig {
    pub enabled: bool,
    pub step: usize,
    pub n_keep: usize,
    /// Also select within single-source groups, not only on the combined
    /// matrix.
    pub per_group: bool,
}

impl Default for RfeConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            step: 1,
            n_keep: 10,
            per_group: false,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    /// Cluster ids to explain with one force plot each; all rows when unset.
    pub rows: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub inputs: Inputs,
    /// POI categories that always get a count column.
    pub poi_categories: Vec<String>,
    /// Target column: wealth_index, toilet_access, clean_water or
    /// educational_attainment.
    pub target: String,
    pub k: usize,
    /// Model for `train`; the random-forest defaults when unset.
    pub model: Option<ModelSpec>,
    /// Tune the `train` model by random search instead of using it as is.
    pub tune: bool,
    pub search: SearchConfig,
    pub rfe: RfeConfig,
    /// Model rows of the benchmark grid.
    pub families: Vec<ModelFamily>,
    pub explain: ExplainConfig,
    pub synth: SceneConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: None,
            out: None,
            inputs: Inputs::default(),
            poi_categories: Vec::new(),
            target: "wealth_index".into(),
            k: 5,
            model: None,
            tune: false,
            search: SearchConfig::default(),
            rfe: RfeConfig::default(),
            families: ModelFamily::ALL.to_vec(),
            explain: ExplainConfig::default(),
            synth: SceneConfig::default(),
        }
    }
}

/// Configuration after flags are applied and paths resolved.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub out: PathBuf,
    pub config: PipelineConfig,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl Settings {
    pub fn load(config: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> Result<Self, CliError> {
        let (mut cfg, base) = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
                let cfg: PipelineConfig = serde_json::from_str(&text)
                    .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (cfg, base)
            }
            None => (PipelineConfig::default(), PathBuf::new()),
        };
        let seed = seed
            .or(cfg.seed)
            .ok_or_else(|| CliError::Input("a seed is required: pass --seed or set \"seed\" in the config".into()))?;
        let out = match out {
            Some(o) => o.to_path_buf(),
            None => cfg.out.as_deref().map(|o| resolve(&base, o)).unwrap_or_else(|| PathBuf::from(".")),
        };
        if cfg.k < 2 {
            return Err(CliError::Input(format!("k = {} must be at least 2", cfg.k)));
        }
        if cfg.families.is_empty() {
            return Err(CliError::Input("no model families configured".into()));
        }
        let inputs = &mut cfg.inputs;
        for p in [
            &mut inputs.clusters,
            &mut inputs.households,
            &mut inputs.pois,
            &mut inputs.social,
            &mut inputs.features,
            &mut inputs.targets,
            &mut inputs.model,
        ]
        .into_iter()
        .flatten()
        {
            *p = resolve(&base, p);
        }
        for p in inputs.rasters.values_mut() {
            *p = resolve(&base, p);
        }
        cfg.seed = Some(seed);
        cfg.synth.seed = seed;
        Ok(Settings { seed, out, config: cfg })
    }

    fn input(&self, given: &Option<PathBuf>, default: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.out.join(default))
    }

    pub fn clusters(&self) -> PathBuf {
        self.input(&self.config.inputs.clusters, files::CLUSTERS)
    }

    pub fn households(&self) -> PathBuf {
        self.input(&self.config.inputs.households, files::HOUSEHOLDS)
    }

    pub fn pois(&self) -> PathBuf {
        self.input(&self.config.inputs.pois, files::POIS)
    }

    pub fn social(&self) -> PathBuf {
        self.input(&self.config.inputs.social, files::SOCIAL)
    }

    pub fn features(&self) -> PathBuf {
        self.input(&self.config.inputs.features, "features.csv")
    }

    pub fn targets(&self) -> PathBuf {
        self.input(&self.config.inputs.targets, "targets.csv")
    }

    pub fn model(&self) -> PathBuf {
        self.input(&self.config.inputs.model, "model.json")
    }

    /// Named rasters, sorted by name.
    pub fn rasters(&self) -> Result<Vec<(String, PathBuf)>, CliError> {
        if !self.config.inputs.rasters.is_empty() {
            return Ok(self.config.inputs.rasters.clone().into_iter().collect());
        }
        let dir = self.out.join(files::RASTER_DIR);
        let entries = match std::fs::read_dir(&dir) {
            Ok(entries) => entries,
            Err(_) => return Ok(Vec::new()),
        };
        let mut out = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| CliError::Input(e.to_string()))?.path();
            if path.extension().is_some_and(|e| e == "asc") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    out.push((stem.to_string(), path.clone()));
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 5, "out": "run", "inputs": {"clusters": "data/c.csv"}, "k": 3}"#).unwrap();
        let s = Settings::load(Some(&path), None, None).unwrap();
        assert_eq!(s.seed, 5);
        assert_eq!(s.out, dir.path().join("run"));
        assert_eq!(s.clusters(), dir.path().join("data/c.csv"));
        assert_eq!(s.features(), dir.path().join("run/features.csv"));
        assert_eq!(s.config.k, 3);
        assert_eq!(s.config.synth.seed, 5);

        let s = Settings::load(Some(&path), Some(9), Some(Path::new("elsewhere"))).unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.out, PathBuf::from("elsewhere"));
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(matches!(Settings::load(None, None, None), Err(CliError::Input(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 1, "sede": 2}"#).unwrap();
        assert!(Settings::load(Some(&path), None, None).is_err());
    }

    #[test]
    fn search_spaces_parse() {
        let cfg: PipelineConfig = serde_json::from_str(
            r#"{"search": {"n_iter": 3, "spaces": {"gbdt": {"learning_rate": {"min": 0.01, "max": 0.3}}}},
                "model": {"family": "gbdt", "n_stages": 50}}"#,
        )
        .unwrap();
        assert_eq!(cfg.search.space(ModelFamily::Gbdt).len(), 1);
        assert_eq!(cfg.search.space(ModelFamily::Ridge).len(), 1);
        assert!(cfg.search.space(ModelFamily::RandomForest).is_empty());
    }
}
