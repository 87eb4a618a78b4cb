//! Scheme-by-model accuracy table with a chance baseline.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::types::PressureLevel;

use super::{evaluate, train, Dataset, EvalReport, LabeledSample, ModelKind, TrainConfig, N_CLASSES};

pub const BASELINE_LABEL: &str = "Chance";

/// Repetitions averaged by the uniform-guess baseline.
const BASELINE_REPEATS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub scheme: String,
    pub model: String,
    pub train_acc: f64,
    pub test_acc: f64,
    /// Train minus test accuracy.
    pub gap: f64,
    pub test_confusion: [[usize; N_CLASSES]; N_CLASSES],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub seed: u64,
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkTable {
    pub fn find(&self, scheme: &str, model: &str) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.model == model)
    }

    pub fn baseline(&self) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.model == BASELINE_LABEL)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,model,train_acc,test_acc,gap\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6}",
                r.scheme, r.model, r.train_acc, r.test_acc, r.gap
            );
        }
        out
    }

    /// Fixed-width text table.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<8} {:<7} {:>9} {:>9} {:>8}\n",
            "scheme", "model", "train", "test", "gap"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:<7} {:>8.2}% {:>8.2}% {:>+7.2}%",
                r.scheme,
                r.model,
                100.0 * r.train_acc,
                100.0 * r.test_acc,
                100.0 * r.gap
            );
        }
        out
    }
}

fn uniform_guess_accuracy(labels: &[PressureLevel], rng: &mut Rng) -> (f64, [[usize; N_CLASSES]; N_CLASSES]) {
    if labels.is_empty() {
        return (0.0, [[0; N_CLASSES]; N_CLASSES]);
    }
    let mut acc = 0.0;
    let mut confusion = [[0usize; N_CLASSES]; N_CLASSES];
    for rep in 0..BASELINE_REPEATS {
        let report = EvalReport::from_pairs(
            labels
                .iter()
                .map(|&t| (t, PressureLevel::from_index(rng.below(N_CLASSES)).unwrap())),
        );
        acc += report.accuracy;
        if rep == 0 {
            confusion = report.confusion;
        }
    }
    (acc / BASELINE_REPEATS as f64, confusion)
}

/// Mean accuracy of uniform random guessing on the train and test labels.
pub fn chance_baseline(train: &[LabeledSample], test: &[LabeledSample], seed: u64) -> BenchmarkRow {
    let mut rng = Rng::derive(seed, 0xBA5E);
    let labels = |s: &[LabeledSample]| s.iter().map(|x| x.label).collect::<Vec<_>>();
    let (train_acc, _) = uniform_guess_accuracy(&labels(train), &mut rng);
    let (test_acc, test_confusion) = uniform_guess_accuracy(&labels(test), &mut rng);
    BenchmarkRow {
        scheme: "-".into(),
        model: BASELINE_LABEL.into(),
        train_acc,
        test_acc,
        gap: train_acc - test_acc,
        test_confusion,
    }
}

/// Trains and evaluates every (dataset, kind) cell, then appends the chance
/// baseline. All datasets must carry the same frames and labels.
pub fn benchmark(datasets: &[Dataset], kinds: &[ModelKind], config: &TrainConfig) -> Result<BenchmarkTable> {
    let key = |d: &Dataset| -> Vec<(String, usize, PressureLevel)> {
        d.train
            .iter()
            .chain(&d.test)
            .map(|s| (s.meta.clip.clone(), s.meta.frame_index, s.label))
            .collect()
    };
    if let Some(first) = datasets.first() {
        let reference = key(first);
        if let Some(bad) = datasets.iter().find(|d| key(d) != reference) {
            return Err(Error::Training(format!(
                "dataset {} does not share frames and labels with {}",
                bad.scheme, first.scheme
            )));
        }
    }
    let cells: Vec<(&Dataset, ModelKind)> = datasets
        .iter()
        .flat_map(|d| kinds.iter().map(move |&k| (d, k)))
        .collect();
    let mut rows = cells
        .par_iter()
        .map(|&(data, kind)| {
            let model = train(kind, data, config)?;
            let tr = evaluate(&model, &data.train)?;
            let te = evaluate(&model, &data.test)?;
            Ok(BenchmarkRow {
                scheme: data.scheme.name(),
                model: kind.name().into(),
                train_acc: tr.accuracy,
                test_acc: te.accuracy,
                gap: tr.accuracy - te.accuracy,
                test_confusion: te.confusion,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = datasets.first() {
        rows.push(chance_baseline(&first.train, &first.test, config.seed));
    }
    Ok(BenchmarkTable {
        seed: config.seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureVector, SchemeSet};
    use crate::learn::{dataset_from_rows, testutil};
    use crate::rng::rng_new;

    fn rescheme(d: &Dataset, scheme: SchemeSet) -> Dataset {
        let re = |v: &[LabeledSample]| {
            v.iter()
                .map(|s| LabeledSample {
                    features: FeatureVector {
                        values: s.features.values.clone(),
                        scheme,
                    },
                    ..s.clone()
                })
                .collect()
        };
        Dataset::new(re(&d.train), re(&d.test), scheme).unwrap()
    }

    #[test]
    fn row_count_and_baseline() {
        let mut rng = rng_new(61);
        let train = testutil::blobs(&mut rng, &testutil::TRIANGLE, 20, 0.7);
        let test = testutil::blobs(&mut rng, &testutil::TRIANGLE, 100, 0.7);
        let base = dataset_from_rows(&train, &test).unwrap();
        let datasets: Vec<Dataset> = SchemeSet::benchmark_sets()
            .into_iter()
            .map(|s| rescheme(&base, s))
            .collect();
        let cfg = TrainConfig {
            gbt_rounds: 5,
            ann_epochs: 5,
            svm_epochs: 20,
            ..TrainConfig::default()
        };
        let table = benchmark(&datasets, &ModelKind::ALL, &cfg).unwrap();
        assert_eq!(table.rows.len(), 10 * 4 + 1);
        let b = table.baseline().unwrap();
        assert!((b.test_acc - 1.0 / 3.0).abs() < 0.03, "{}", b.test_acc);
        assert!(table.find("ShaLaw", "SVM").is_some());
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 42);
        assert!(csv.starts_with("scheme,model,train_acc,test_acc,gap\n"));
        for r in &table.rows {
            assert!((r.gap - (r.train_acc - r.test_acc)).abs() < 1e-15);
        }
    }

    #[test]
    fn benchmark_is_deterministic() {
        let mut rng = rng_new(62);
        let rows = testutil::blobs(&mut rng, &testutil::TRIANGLE, 15, 1.0);
        let data = dataset_from_rows(&rows[..30], &rows[30..]).unwrap();
        let cfg = TrainConfig {
            gbt_rounds: 5,
            ann_epochs: 5,
            ..TrainConfig::default()
        };
        let a = benchmark(std::slice::from_ref(&data), &ModelKind::ALL, &cfg).unwrap();
        let b = benchmark(std::slice::from_ref(&data), &ModelKind::ALL, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn mismatched_datasets_rejected() {
        let a = dataset_from_rows(&[(vec![1.0], PressureLevel::Low)], &[]).unwrap();
        let b = dataset_from_rows(&[(vec![1.0], PressureLevel::High)], &[]).unwrap();
        assert!(benchmark(&[a, b], &[ModelKind::Reg], &TrainConfig::default()).is_err());
    }
}
