//! Small-area wealth estimation from open geospatial data.
//!
//! The crate covers the whole modelling pipeline:
//!
//! * [`geo`]: great-circle distance and exact radius queries around survey
//!   cluster centroids (2 km for urban clusters, 5 km for rural ones).
//! * [`raster`]: georeferenced grids with a cloud mask and zonal moments.
//! * [`ingest`]: file formats and assembly of the per-cluster feature matrix
//!   from social-media, remote-sensing and point-of-interest sources.
//! * [`targets`]: the asset-based wealth index (first principal component)
//!   and the derived household indicators.
//! * [`models`]: linear models, regression trees, random forests, gradient
//!   boosting, k-fold cross-validation, recursive feature elimination and
//!   random hyperparameter search.
//! * [`explain`]: exact path-dependent TreeSHAP with a brute-force Shapley
//!   reference implementation.
//! * [`synth`]: a seeded synthetic scene with known latent wealth.

// `!(x > 0.0)` guards are written that way on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod explain;
pub mod geo;
pub mod ingest;
pub mod models;
pub mod raster;
pub mod synth;
pub mod targets;

pub use error::{Error, Result};

/// Order-preserving map that runs on the rayon pool when the `parallel`
/// feature is on.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
