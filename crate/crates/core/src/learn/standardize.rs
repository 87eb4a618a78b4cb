use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-dimension z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero-variance dimensions store 1.
    pub std: Vec<f64>,
}

impl Standardization {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    pub fn apply_all(&self, rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

pub fn standardize_fit(rows: &[&[f64]]) -> Result<Standardization> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Training("cannot standardize an empty training set".into()))?;
    let d = first.len();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        if r.len() != d {
            return Err(Error::FeatureDimension {
                expected: d,
                got: r.len(),
            });
        }
        for (m, &v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for r in rows {
        for ((s, &v), &m) in var.iter_mut().zip(r.iter()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var
        .into_iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            // near-constant dimensions would only amplify rounding noise
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    Ok(Standardization { mean, std })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_dimension() {
        let rows: Vec<&[f64]> = vec![&[0.0, 5.0], &[2.0, 5.0]];
        let s = standardize_fit(&rows).unwrap();
        assert_eq!(s.mean, vec![1.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        assert_eq!(s.apply(&[2.0, 5.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn transformed_train_has_unit_moments() {
        let mut rng = crate::rng::rng_new(2);
        let data: Vec<Vec<f64>> = (0..200)
            .map(|_| vec![rng.uniform(-3.0, 10.0), 100.0 + 7.0 * rng.normal()])
            .collect();
        let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let s = standardize_fit(&rows).unwrap();
        let z = s.apply_all(&rows);
        for d in 0..2 {
            let m = z.iter().map(|r| r[d]).sum::<f64>() / 200.0;
            let v = z.iter().map(|r| (r[d] - m).powi(2)).sum::<f64>() / 200.0;
            assert!(m.abs() < 1e-9);
            assert!((v.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_and_ragged_rejected() {
        assert!(standardize_fit(&[]).is_err());
        let rows: Vec<&[f64]> = vec![&[1.0, 2.0], &[1.0]];
        assert!(standardize_fit(&rows).is_err());
    }
}
