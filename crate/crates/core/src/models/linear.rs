//! Ordinary least squares, ridge and lasso on internally standardized
//! features.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, Result};

const LASSO_TOLERANCE: f64 = 1e-8;
const LASSO_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    Ols,
    Ridge,
    Lasso,
}

/// A fitted linear model. `coefficients` and `intercept` are in original
/// feature units; the standardization used during fitting is kept so the
/// penalized coefficients can be recovered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    /// Population standard deviations; 1 for constant columns, which are
    /// excluded from the fit and get a zero coefficient.
    pub scales: Vec<f64>,
}

impl LinearModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Coefficients on the standardized scale.
    pub fn standardized_coefficients(&self) -> Vec<f64> {
        self.coefficients.iter().zip(&self.scales).map(|(c, s)| c * s).collect()
    }
}

/// Fits OLS, ridge or lasso.
///
/// Features are centered and scaled to unit population variance. Ridge
/// solves `(Z'Z + lambda I) b = Z'y`; lasso minimizes
/// `||y - Z b||^2 / (2n) + lambda ||b||_1` by cyclic coordinate descent. The
/// intercept is never penalized.
pub fn fit_linear_family(data: &Dataset, kind: LinearKind, lambda: f64) -> Result<LinearModel> {
    data.require_complete()?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda {lambda} must be finite and >= 0")));
    }
    if kind == LinearKind::Ols && lambda != 0.0 {
        return Err(Error::InvalidParameter("OLS takes no penalty".into()));
    }
    let n = data.n_rows();
    let p = data.n_features();
    let nf = n as f64;

    let mut means = vec![0.0; p];
    let mut scales = vec![1.0; p];
    let mut active = Vec::new();
    for j in 0..p {
        let mean = (0..n).map(|i| data.value(i, j)).sum::<f64>() / nf;
        let var = (0..n).map(|i| (data.value(i, j) - mean).powi(2)).sum::<f64>() / nf;
        means[j] = mean;
        let sd = var.sqrt();
        if sd > 1e-12 * mean.abs().max(1.0) {
            scales[j] = sd;
            active.push(j);
        }
    }
    let y_mean = data.target().iter().sum::<f64>() / nf;
    let yc: Vec<f64> = data.target().iter().map(|y| y - y_mean).collect();
    let q = active.len();
    let z = DMatrix::from_fn(n, q, |i, k| {
        let j = active[k];
        (data.value(i, j) - means[j]) / scales[j]
    });

    let beta: Vec<f64> = if q == 0 {
        Vec::new()
    } else {
        match kind {
            LinearKind::Ols | LinearKind::Ridge => solve_ridge(&z, &yc, lambda)?,
            LinearKind::Lasso => coordinate_descent(&z, &yc, lambda),
        }
    };

    let mut coefficients = vec![0.0; p];
    for (k, &j) in active.iter().enumerate() {
        coefficients[j] = beta[k] / scales[j];
    }
    let intercept = y_mean - coefficients.iter().zip(&means).map(|(c, m)| c * m).sum::<f64>();
    Ok(LinearModel {
        kind,
        coefficients,
        intercept,
        lambda,
        feature_names: data.feature_names().to_vec(),
        means,
        scales,
    })
}

fn solve_ridge(z: &DMatrix<f64>, yc: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let q = z.ncols();
    let mut gram = z.transpose() * z;
    for k in 0..q {
        gram[(k, k)] += lambda;
    }
    let rhs = z.transpose() * DVector::from_column_slice(yc);
    let max_diag = (0..q).map(|k| gram[(k, k)]).fold(0.0, f64::max);
    let chol = gram.cholesky().ok_or(Error::SingularSystem)?;
    // A tiny pivot means the columns are (numerically) collinear.
    let l = chol.l_dirty();
    if (0..q).any(|k| l[(k, k)] * l[(k, k)] <= 1e-10 * max_diag) {
        return Err(Error::SingularSystem);
    }
    Ok(chol.solve(&rhs).iter().copied().collect())
}

fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

fn coordinate_descent(z: &DMatrix<f64>, yc: &[f64], lambda: f64) -> Vec<f64> {
    let (n, q) = z.shape();
    let nf = n as f64;
    let col_sq: Vec<f64> = (0..q).map(|k| z.column(k).norm_squared() / nf).collect();
    let mut beta = vec![0.0; q];
    let mut residual = yc.to_vec();
    for _ in 0..LASSO_MAX_SWEEPS {
        let mut max_change: f64 = 0.0;
        for k in 0..q {
            let col = z.column(k);
            let rho = col.iter().zip(&residual).map(|(a, r)| a * r).sum::<f64>() / nf + col_sq[k] * beta[k];
            let updated = soft_threshold(rho, lambda) / col_sq[k];
            let delta = updated - beta[k];
            if delta != 0.0 {
                for (r, a) in residual.iter_mut().zip(col.iter()) {
                    *r -= a * delta;
                }
                beta[k] = updated;
            }
            max_change = max_change.max(delta.abs());
        }
        if max_change < LASSO_TOLERANCE {
            break;
        }
    }
    beta
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(seed: u64, n: usize, p: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-2.0..3.0)).collect()).collect();
        let y = rows
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, v)| (j as f64 - 1.0) * v).sum::<f64>() + rng.random_range(-0.5..0.5))
            .collect();
        Dataset::from_rows(&rows, y).unwrap()
    }

    #[test]
    fn exact_line() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.7]).collect();
        let y = rows.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        let m = fit_linear_family(&Dataset::from_rows(&rows, y).unwrap(), LinearKind::Ols, 0.0).unwrap();
        assert!((m.coefficients[0] - 2.0).abs() < 1e-9);
        assert!((m.intercept - 1.0).abs() < 1e-9);
        assert!((m.predict_row(&[10.0]) - 21.0).abs() < 1e-9);
    }

    #[test]
    fn ridge_without_penalty_is_ols() {
        let d = random_data(1, 40, 4);
        let ols = fit_linear_family(&d, LinearKind::Ols, 0.0).unwrap();
        let ridge = fit_linear_family(&d, LinearKind::Ridge, 0.0).unwrap();
        for (a, b) in ols.coefficients.iter().zip(&ridge.coefficients) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((ols.intercept - ridge.intercept).abs() < 1e-9);
    }

    #[test]
    fn ridge_shrinks() {
        let d = random_data(2, 40, 3);
        let a = fit_linear_family(&d, LinearKind::Ridge, 0.1).unwrap();
        let b = fit_linear_family(&d, LinearKind::Ridge, 100.0).unwrap();
        let norm = |m: &LinearModel| m.standardized_coefficients().iter().map(|c| c * c).sum::<f64>();
        assert!(norm(&b) < norm(&a));
    }

    /// Smallest lambda at which every lasso coefficient is zero, computed
    /// directly from the standardized design.
    fn kill_threshold(d: &Dataset) -> f64 {
        let n = d.n_rows() as f64;
        let ym = d.target().iter().sum::<f64>() / n;
        (0..d.n_features())
            .map(|j| {
                let col: Vec<f64> = (0..d.n_rows()).map(|i| d.value(i, j)).collect();
                let m = col.iter().sum::<f64>() / n;
                let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
                (col.iter().zip(d.target()).map(|(v, y)| (v - m) / sd * (y - ym)).sum::<f64>() / n).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn lasso_above_threshold_is_empty() {
        let d = random_data(3, 50, 5);
        let t = kill_threshold(&d);
        for lambda in [t, t * 1.5, 1e3] {
            let m = fit_linear_family(&d, LinearKind::Lasso, lambda).unwrap();
            assert!(m.coefficients.iter().all(|c| *c == 0.0));
            let mean = d.target().iter().sum::<f64>() / d.n_rows() as f64;
            assert!((m.intercept - mean).abs() < 1e-12);
        }
        let m = fit_linear_family(&d, LinearKind::Lasso, t * 0.9).unwrap();
        assert!(m.coefficients.iter().any(|c| *c != 0.0));
    }

    #[test]
    fn lasso_with_tiny_penalty_approaches_ols() {
        let d = random_data(4, 60, 3);
        let ols = fit_linear_family(&d, LinearKind::Ols, 0.0).unwrap();
        let lasso = fit_linear_family(&d, LinearKind::Lasso, 1e-10).unwrap();
        for (a, b) in ols.coefficients.iter().zip(&lasso.coefficients) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn lasso_single_feature_closed_form() {
        // With one standardized feature the solution is S(z'y/n, lambda).
        let rows: Vec<Vec<f64>> = vec![vec![-1.0], vec![0.0], vec![1.0], vec![2.0]];
        let y = vec![0.0, 1.0, 1.0, 3.0];
        let d = Dataset::from_rows(&rows, y).unwrap();
        let m = fit_linear_family(&d, LinearKind::Lasso, 0.2).unwrap();
        let sd = 1.25f64.sqrt();
        let rho = (-1.5 * -1.25 + -0.5 * -0.25 + 0.5 * -0.25 + 1.5 * 1.75) / sd / 4.0;
        assert!((m.standardized_coefficients()[0] - (rho - 0.2)).abs() < 1e-9);
    }

    #[test]
    fn collinear_ols_is_singular_but_ridge_is_not() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, 2.0 * i as f64 + 1.0]).collect();
        let y: Vec<f64> = (0..8).map(|i| (i * i) as f64).collect();
        let d = Dataset::from_rows(&rows, y).unwrap();
        assert!(matches!(fit_linear_family(&d, LinearKind::Ols, 0.0), Err(Error::SingularSystem)));
        assert!(fit_linear_family(&d, LinearKind::Ridge, 0.5).is_ok());
    }

    #[test]
    fn constant_columns_get_zero_weight() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![3.0, i as f64]).collect();
        let y: Vec<f64> = (0..6).map(|i| 1.0 + i as f64).collect();
        let m = fit_linear_family(&Dataset::from_rows(&rows, y).unwrap(), LinearKind::Ols, 0.0).unwrap();
        assert_eq!(m.coefficients[0], 0.0);
        assert!((m.coefficients[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parameter_checks() {
        let d = random_data(5, 10, 2);
        assert!(fit_linear_family(&d, LinearKind::Ols, 1.0).is_err());
        assert!(fit_linear_family(&d, LinearKind::Ridge, -1.0).is_err());
        assert!(fit_linear_family(&d, LinearKind::Lasso, f64::NAN).is_err());
    }
}
