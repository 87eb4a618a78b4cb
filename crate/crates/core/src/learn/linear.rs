//! Ordinal ridge regression: targets 0/1/2, prediction rounded and clamped.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::PressureLevel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRegression {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearRegression {
    /// Minimizes `||X w + b - y||^2 + lambda ||w||^2` with an unpenalized bias.
    pub fn fit(rows: &[Vec<f64>], labels: &[usize], lambda: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Training("training split is empty".into()));
        }
        let d = rows[0].len();
        let x_mean: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let y_mean = labels.iter().map(|&y| y as f64).sum::<f64>() / n as f64;

        let x = DMatrix::from_fn(n, d, |i, j| rows[i][j] - x_mean[j]);
        let y = DVector::from_iterator(n, labels.iter().map(|&v| v as f64 - y_mean));
        let mut gram = x.transpose() * &x;
        for j in 0..d {
            gram[(j, j)] += lambda;
        }
        let rhs = x.transpose() * y;
        let w = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => gram
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Training("singular normal equations; increase the ridge term".into()))?,
        };
        let weights: Vec<f64> = w.iter().copied().collect();
        let bias = y_mean - weights.iter().zip(&x_mean).map(|(a, b)| a * b).sum::<f64>();
        Ok(LinearRegression { weights, bias })
    }

    pub fn predict_value(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Rounds a regression output to the nearest level, clamped to Low..=High.
pub(crate) fn ordinal_level(value: f64) -> PressureLevel {
    let idx = if value.is_nan() {
        1.0
    } else {
        value.round().clamp(0.0, 2.0)
    };
    PressureLevel::from_index(idx as usize).unwrap()
}
