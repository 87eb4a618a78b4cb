//! One-vs-rest linear SVMs trained by full-batch subgradient descent.
//!
//! Each machine minimizes `0.5 ||w||^2 + C * mean_i hinge(y_i (w.x_i + b))`.
//! The objective is 1-strongly convex in `w`, so the step at epoch `t` is
//! `1 / t`. Full-batch steps make the result independent of sample order
//! and unchanged when every sample is repeated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::N_CLASSES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Primal objective value for `targets` in {-1, +1}.
    pub fn objective(&self, rows: &[Vec<f64>], targets: &[f64], c: f64) -> f64 {
        let reg = 0.5 * self.weights.iter().map(|w| w * w).sum::<f64>();
        let hinge = rows
            .iter()
            .zip(targets)
            .map(|(x, &y)| (1.0 - y * self.decision(x)).max(0.0))
            .sum::<f64>()
            / rows.len() as f64;
        reg + c * hinge
    }

    fn fit(rows: &[Vec<f64>], targets: &[f64], c: f64, epochs: usize) -> Self {
        let n = rows.len() as f64;
        let d = rows[0].len();
        let mut m = BinarySvm {
            weights: vec![0.0; d],
            bias: 0.0,
        };
        let mut grad_w = vec![0.0; d];
        for t in 1..=epochs {
            grad_w.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for (x, &y) in rows.iter().zip(targets) {
                if y * m.decision(x) < 1.0 {
                    for (g, &v) in grad_w.iter_mut().zip(x) {
                        *g += y * v;
                    }
                    grad_b += y;
                }
            }
            let eta = 1.0 / t as f64;
            for (w, g) in m.weights.iter_mut().zip(&grad_w) {
                *w = (1.0 - eta) * *w + eta * c * g / n;
            }
            m.bias += eta * c * grad_b / n;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    /// One machine per pressure level, Low first.
    pub machines: Vec<BinarySvm>,
}

impl LinearSvm {
    pub fn fit(rows: &[Vec<f64>], labels: &[usize], c: f64, epochs: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Training("training split is empty".into()));
        }
        let mut present = [false; N_CLASSES];
        labels.iter().for_each(|&l| present[l] = true);
        if present.iter().filter(|&&p| p).count() < 2 {
            return Err(Error::Training(
                "SVM needs at least two classes; use a constant predictor for single-class data".into(),
            ));
        }
        if c.is_nan() || c <= 0.0 {
            return Err(Error::Config(format!("SVM C must be positive, got {c}")));
        }
        let machines = (0..N_CLASSES)
            .map(|k| {
                let targets: Vec<f64> = labels.iter().map(|&l| if l == k { 1.0 } else { -1.0 }).collect();
                BinarySvm::fit(rows, &targets, c, epochs)
            })
            .collect();
        Ok(LinearSvm { machines })
    }

    pub fn decision(&self, x: &[f64]) -> [f64; N_CLASSES] {
        let mut out = [0.0; N_CLASSES];
        for (o, m) in out.iter_mut().zip(&self.machines) {
            *o = m.decision(x);
        }
        out
    }
}
