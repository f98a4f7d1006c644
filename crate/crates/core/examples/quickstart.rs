//! Cross-validate a forest on the default synthetic scene and print the
//! top global SHAP features.

use wealthmap::explain::{explain_rows, global_importance};
use wealthmap::ingest::{assemble_features, FeatureOptions};
use wealthmap::models::{k_fold_cv, ColumnImputer, Dataset, ModelFamily};
use wealthmap::synth::{generate_scene, SceneConfig};
use wealthmap::targets::derive_cluster_targets;

fn main() -> Result<(), wealthmap::Error> {
    let scene = generate_scene(&SceneConfig::default())?;
    let x = assemble_features(&scene.clusters, &scene.rasters, &scene.pois, &scene.social, &FeatureOptions::default())?;
    let ids = x.row_ids().to_vec();
    let y = derive_cluster_targets(&scene.households, Some(&ids))?.aligned(&ids, "wealth_index")?;
    let mut data = Dataset::from_features(&x, y)?;

    let spec = ModelFamily::RandomForest.default_spec(42);
    println!("pooled R² {:.3}", k_fold_cv(&data, &spec, 5, 42)?.pooled_r2);

    ColumnImputer::fit(&data).apply(&mut data);
    let model = spec.fit(&data)?;
    let shap = explain_rows(model.as_ensemble()?, &data)?;
    for f in global_importance(&shap)?.features.iter().take(5) {
        println!("{:<24} {:.4}", f.feature, f.mean_abs_shap);
    }
    Ok(())
}
