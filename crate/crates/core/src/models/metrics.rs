use crate::{Error, Result};

/// Coefficient of determination `1 - SS_res / SS_tot`. Negative values are
/// returned as-is.
pub fn r_squared(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::InvalidParameter(format!(
            "r_squared: {} targets vs {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::InvalidParameter("r_squared needs at least 2 values".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::ZeroVarianceTarget);
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_and_constant_predictions() {
        let y = [1.0, 4.0, 2.0, 8.0];
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        assert_eq!(r_squared(&y, &[3.75; 4]).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed() {
        // SS_res = 1, SS_tot = 2
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap(), 0.5);
    }

    #[test]
    fn negative_values_are_allowed() {
        assert!(r_squared(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() < 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(r_squared(&[2.0, 2.0], &[1.0, 3.0]), Err(Error::ZeroVarianceTarget)));
        assert!(r_squared(&[1.0, 2.0], &[1.0]).is_err());
        assert!(r_squared(&[1.0], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn invariant_under_shared_affine_maps(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            scale in 0.01f64..100.0,
            shift in -1e3f64..1e3,
        ) {
            let y: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let yhat: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            prop_assume!(y.iter().any(|v| (v - y[0]).abs() > 1e-3));
            let a = r_squared(&y, &yhat).unwrap();
            let ty: Vec<f64> = y.iter().map(|v| v * scale + shift).collect();
            let tyhat: Vec<f64> = yhat.iter().map(|v| v * scale + shift).collect();
            let b = r_squared(&ty, &tyhat).unwrap();
            prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
        }
    }
}
