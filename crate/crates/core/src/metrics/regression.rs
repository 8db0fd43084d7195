//! Regression metrics.

use crate::error::{Error, Result};

/// Root mean squared error.
pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidInput(format!(
            "value vectors differ in length: {} vs {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mse = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p).powi(2))
        .sum::<f64>()
        / y_true.len() as f64;
    Ok(mse.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_vectors_score_zero() {
        assert_eq!(rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn hand_checked_errors() {
        // errors [3, -4] -> sqrt(25/2)
        let got = rmse(&[0.0, 0.0], &[3.0, -4.0]).unwrap();
        assert!((got - (12.5f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_offset_gives_its_magnitude() {
        let y = [1.0, 5.0, -2.0, 0.25];
        let shifted: Vec<f64> = y.iter().map(|v| v - 1.75).collect();
        assert!((rmse(&y, &shifted).unwrap() - 1.75).abs() < 1e-12);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(rmse(&[], &[]).is_err());
    }
}
