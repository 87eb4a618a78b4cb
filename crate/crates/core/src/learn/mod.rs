//! Classifiers mapping texture features to pressure levels, plus evaluation
//! and the scheme-by-model benchmark.

mod ann;
mod bench;
mod gbt;
mod linear;
mod standardize;
mod svm;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, SchemeSet};
use crate::types::{CupSize, PressureLevel, Quadrant};

pub use ann::Mlp;
pub use bench::{benchmark, chance_baseline, BenchmarkRow, BenchmarkTable, BASELINE_LABEL};
pub use gbt::{GbtEnsemble, RegressionTree};
pub use linear::LinearRegression;
pub use standardize::{standardize_fit, Standardization};
pub use svm::LinearSvm;

pub const N_CLASSES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleMeta {
    pub cup: CupSize,
    pub quadrant: Quadrant,
    pub clip: String,
    pub frame_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub label: PressureLevel,
    pub meta: SampleMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub train: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
    pub scheme: SchemeSet,
}

impl Dataset {
    /// Checks shared dimension/scheme, finiteness and train/test disjointness.
    pub fn new(train: Vec<LabeledSample>, test: Vec<LabeledSample>, scheme: SchemeSet) -> Result<Self> {
        let dim = train.first().or(test.first()).map(|s| s.features.len());
        for s in train.iter().chain(&test) {
            if s.features.scheme != scheme {
                return Err(Error::Training(format!(
                    "sample {}#{} has scheme {} in a {} dataset",
                    s.meta.clip, s.meta.frame_index, s.features.scheme, scheme
                )));
            }
            if Some(s.features.len()) != dim {
                return Err(Error::FeatureDimension {
                    expected: dim.unwrap_or(0),
                    got: s.features.len(),
                });
            }
            if s.features.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Training(format!(
                    "non-finite feature in {}#{}",
                    s.meta.clip, s.meta.frame_index
                )));
            }
        }
        let train_keys: HashSet<(&str, usize)> = train
            .iter()
            .map(|s| (s.meta.clip.as_str(), s.meta.frame_index))
            .collect();
        if let Some(s) = test
            .iter()
            .find(|s| train_keys.contains(&(s.meta.clip.as_str(), s.meta.frame_index)))
        {
            return Err(Error::Training(format!(
                "frame {}#{} is in both train and test",
                s.meta.clip, s.meta.frame_index
            )));
        }
        Ok(Dataset { train, test, scheme })
    }

    pub fn dim(&self) -> usize {
        self.train.first().or(self.test.first()).map_or(0, |s| s.features.len())
    }
}

/// Builds a dataset from raw rows; used by tests and synthetic toy problems.
pub fn dataset_from_rows(train: &[(Vec<f64>, PressureLevel)], test: &[(Vec<f64>, PressureLevel)]) -> Result<Dataset> {
    let scheme = SchemeSet::single(crate::features::Scheme::Entropy);
    let wrap = |rows: &[(Vec<f64>, PressureLevel)], clip: &str| -> Vec<LabeledSample> {
        rows.iter()
            .enumerate()
            .map(|(i, (x, y))| LabeledSample {
                features: FeatureVector {
                    values: x.clone(),
                    scheme,
                },
                label: *y,
                meta: SampleMeta {
                    cup: CupSize::A,
                    quadrant: Quadrant::LeftQ2,
                    clip: clip.to_string(),
                    frame_index: i,
                },
            })
            .collect()
    };
    Dataset::new(wrap(train, "train"), wrap(test, "test"), scheme)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "REG")]
    Reg,
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "GBT")]
    Gbt,
    #[serde(rename = "ANN")]
    Ann,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Reg, ModelKind::Svm, ModelKind::Gbt, ModelKind::Ann];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Reg => "REG",
            ModelKind::Svm => "SVM",
            ModelKind::Gbt => "GBT",
            ModelKind::Ann => "ANN",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model {s:?} (expected reg, svm, gbt or ann)")))
    }
}

/// Fixed hyperparameters for all four learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    pub reg_lambda: f64,
    pub svm_c: f64,
    pub svm_epochs: usize,
    pub gbt_depth: usize,
    pub gbt_rounds: usize,
    pub gbt_shrinkage: f64,
    pub ann_hidden: usize,
    pub ann_epochs: usize,
    pub ann_learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            reg_lambda: 1e-3,
            svm_c: 1.0,
            svm_epochs: 200,
            gbt_depth: 3,
            gbt_rounds: 100,
            gbt_shrinkage: 0.1,
            ann_hidden: 32,
            ann_epochs: 500,
            ann_learning_rate: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum ModelParams {
    #[serde(rename = "REG")]
    Reg(LinearRegression),
    #[serde(rename = "SVM")]
    Svm(LinearSvm),
    #[serde(rename = "GBT")]
    Gbt(GbtEnsemble),
    #[serde(rename = "ANN")]
    Ann(Mlp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub scheme: SchemeSet,
    pub standardization: Standardization,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::Reg(_) => ModelKind::Reg,
            ModelParams::Svm(_) => ModelKind::Svm,
            ModelParams::Gbt(_) => ModelKind::Gbt,
            ModelParams::Ann(_) => ModelKind::Ann,
        }
    }

    pub fn dim(&self) -> usize {
        self.standardization.dim()
    }

    /// Raw per-model scores on a standardized copy of `x`: one value for
    /// REG, one per class otherwise.
    pub fn decision(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::FeatureDimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let z = self.standardization.apply(x);
        Ok(match &self.params {
            ModelParams::Reg(m) => vec![m.predict_value(&z)],
            ModelParams::Svm(m) => m.decision(&z).to_vec(),
            ModelParams::Gbt(m) => m.logits(&z).to_vec(),
            ModelParams::Ann(m) => m.probabilities(&z).to_vec(),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<PressureLevel> {
        let scores = self.decision(x)?;
        Ok(match &self.params {
            ModelParams::Reg(_) => linear::ordinal_level(scores[0]),
            _ => argmax_high(&scores),
        })
    }
}

/// Index of the largest score; exact ties go to the higher pressure level.
pub fn argmax_high(scores: &[f64]) -> PressureLevel {
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] >= scores[best] {
            best = i;
        }
    }
    PressureLevel::from_index(best).expect("three classes")
}

pub(crate) struct Design {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

fn design(data: &Dataset) -> Result<(Standardization, Design)> {
    if data.train.is_empty() {
        return Err(Error::Training("training split is empty".into()));
    }
    let raw: Vec<&[f64]> = data.train.iter().map(|s| s.features.values.as_slice()).collect();
    let standardization = standardize_fit(&raw)?;
    let rows = standardization.apply_all(&raw);
    let labels = data.train.iter().map(|s| s.label.index()).collect();
    Ok((standardization, Design { rows, labels }))
}

pub fn train_reg(data: &Dataset, config: &TrainConfig) -> Result<TrainedModel> {
    let (standardization, d) = design(data)?;
    let params = ModelParams::Reg(LinearRegression::fit(&d.rows, &d.labels, config.reg_lambda)?);
    Ok(TrainedModel {
        scheme: data.scheme,
        standardization,
        params,
    })
}

pub fn train_svm(data: &Dataset, config: &TrainConfig) -> Result<TrainedModel> {
    let (standardization, d) = design(data)?;
    let params = ModelParams::Svm(LinearSvm::fit(&d.rows, &d.labels, config.svm_c, config.svm_epochs)?);
    Ok(TrainedModel {
        scheme: data.scheme,
        standardization,
        params,
    })
}

pub fn train_gbt(data: &Dataset, config: &TrainConfig) -> Result<TrainedModel> {
    let (standardization, d) = design(data)?;
    let params = ModelParams::Gbt(GbtEnsemble::fit(
        &d.rows,
        &d.labels,
        config.gbt_rounds,
        config.gbt_depth,
        config.gbt_shrinkage,
    ));
    Ok(TrainedModel {
        scheme: data.scheme,
        standardization,
        params,
    })
}

pub fn train_ann(data: &Dataset, config: &TrainConfig) -> Result<TrainedModel> {
    let (standardization, d) = design(data)?;
    let params = ModelParams::Ann(Mlp::fit(
        &d.rows,
        &d.labels,
        config.ann_hidden,
        config.ann_epochs,
        config.ann_learning_rate,
        config.seed,
    ));
    Ok(TrainedModel {
        scheme: data.scheme,
        standardization,
        params,
    })
}

pub fn train(kind: ModelKind, data: &Dataset, config: &TrainConfig) -> Result<TrainedModel> {
    match kind {
        ModelKind::Reg => train_reg(data, config),
        ModelKind::Svm => train_svm(data, config),
        ModelKind::Gbt => train_gbt(data, config),
        ModelKind::Ann => train_ann(data, config),
    }
}

/// Accuracy and confusion counts (rows = truth, columns = prediction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub confusion: [[usize; N_CLASSES]; N_CLASSES],
    pub n: usize,
}

impl EvalReport {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (PressureLevel, PressureLevel)>) -> Self {
        let mut confusion = [[0usize; N_CLASSES]; N_CLASSES];
        let mut n = 0;
        for (truth, pred) in pairs {
            confusion[truth.index()][pred.index()] += 1;
            n += 1;
        }
        let correct: usize = (0..N_CLASSES).map(|i| confusion[i][i]).sum();
        let accuracy = if n == 0 { 0.0 } else { correct as f64 / n as f64 };
        EvalReport { accuracy, confusion, n }
    }
}

pub fn evaluate(model: &TrainedModel, samples: &[LabeledSample]) -> Result<EvalReport> {
    let preds = samples
        .iter()
        .map(|s| Ok((s.label, model.predict(&s.features.values)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_pairs(preds))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_new;

    #[test]
    fn eval_report_examples() {
        use PressureLevel::*;
        let r = EvalReport::from_pairs([(Low, Low), (Medium, Medium), (High, High), (High, High)]);
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion, [[1, 0, 0], [0, 1, 0], [0, 0, 2]]);

        let r = EvalReport::from_pairs(vec![(Low, Medium); 5]);
        assert_eq!(r.accuracy, 0.0);
        assert_eq!(r.confusion[0][1], 5);
        assert_eq!(r.n, 5);
    }

    #[test]
    fn uniform_random_predictor_near_one_third() {
        let mut rng = rng_new(17);
        let pairs = (0..10_000).map(|i| {
            let truth = PressureLevel::from_index(i % 3).unwrap();
            (truth, PressureLevel::from_index(rng.below(3)).unwrap())
        });
        let r = EvalReport::from_pairs(pairs);
        assert!((r.accuracy - 1.0 / 3.0).abs() < 0.02, "{}", r.accuracy);
        assert_eq!(r.confusion.iter().flatten().sum::<usize>(), 10_000);
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let mut rng = rng_new(1);
        let rows = testutil::blobs(&mut rng, &testutil::TRIANGLE, 10, 0.5);
        let data = dataset_from_rows(&rows, &rows[..0]).unwrap();
        let model = train_reg(&data, &TrainConfig::default()).unwrap();
        let bad = dataset_from_rows(&[(vec![1.0, 2.0, 3.0], PressureLevel::Low)], &[]).unwrap();
        assert!(matches!(
            evaluate(&model, &bad.train),
            Err(Error::FeatureDimension { .. })
        ));
    }

    #[test]
    fn dataset_rejects_overlap_and_mixed_dims() {
        let a = (vec![1.0], PressureLevel::Low);
        let wrapped = dataset_from_rows(std::slice::from_ref(&a), &[]).unwrap();
        let mut test = wrapped.train.clone();
        assert!(Dataset::new(wrapped.train.clone(), test.clone(), wrapped.scheme).is_err());
        test[0].meta.frame_index = 7;
        assert!(Dataset::new(wrapped.train.clone(), test.clone(), wrapped.scheme).is_ok());
        test[0].features.values.push(2.0);
        assert!(Dataset::new(wrapped.train, test, wrapped.scheme).is_err());
    }

    #[test]
    fn standardization_uses_train_only() {
        // canary: test features far from train features
        let train: Vec<_> = (0..20)
            .map(|i| (vec![i as f64], PressureLevel::from_index(i % 3).unwrap()))
            .collect();
        let test: Vec<_> = (0..20).map(|i| (vec![1000.0 + i as f64], PressureLevel::Low)).collect();
        let data = dataset_from_rows(&train, &test).unwrap();
        let model = train_reg(&data, &TrainConfig::default()).unwrap();
        let train_rows: Vec<&[f64]> = data.train.iter().map(|s| s.features.values.as_slice()).collect();
        let all_rows: Vec<&[f64]> = data
            .train
            .iter()
            .chain(&data.test)
            .map(|s| s.features.values.as_slice())
            .collect();
        let train_only = standardize_fit(&train_rows).unwrap();
        let leaked = standardize_fit(&all_rows).unwrap();
        assert_ne!(train_only, leaked);
        assert_eq!(model.standardization, train_only);
    }

    #[test]
    fn training_is_bit_deterministic() {
        let mut rng = rng_new(4);
        let rows = testutil::blobs(&mut rng, &testutil::TRIANGLE, 20, 0.8);
        let data = dataset_from_rows(&rows, &[]).unwrap();
        let cfg = TrainConfig {
            gbt_rounds: 10,
            ann_epochs: 20,
            ..TrainConfig::default()
        };
        for kind in ModelKind::ALL {
            let a = train(kind, &data, &cfg).unwrap();
            let b = train(kind, &data, &cfg).unwrap();
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap(),
                "{kind}"
            );
        }
    }

    #[test]
    fn model_serde_round_trip() {
        let mut rng = rng_new(5);
        let rows = testutil::blobs(&mut rng, &testutil::TRIANGLE, 10, 0.8);
        let data = dataset_from_rows(&rows, &[]).unwrap();
        let cfg = TrainConfig {
            gbt_rounds: 5,
            ann_epochs: 5,
            ..TrainConfig::default()
        };
        for kind in ModelKind::ALL {
            let m = train(kind, &data, &cfg).unwrap();
            let back: TrainedModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
            assert_eq!(back.kind(), kind);
            for (x, _) in &rows {
                assert_eq!(back.predict(x).unwrap(), m.predict(x).unwrap());
            }
        }
    }

    #[test]
    fn argmax_tie_goes_high() {
        assert_eq!(argmax_high(&[1.0, 1.0, 0.0]), PressureLevel::Medium);
        assert_eq!(argmax_high(&[0.2, 0.2, 0.2]), PressureLevel::High);
        assert_eq!(argmax_high(&[3.0, 1.0, 2.0]), PressureLevel::Low);
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!("svm".parse::<ModelKind>().unwrap(), ModelKind::Svm);
        assert_eq!("GBT".parse::<ModelKind>().unwrap(), ModelKind::Gbt);
        assert!("knn".parse::<ModelKind>().is_err());
    }
}
