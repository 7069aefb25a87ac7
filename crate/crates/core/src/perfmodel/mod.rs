//! Random-forest regression of algorithm precision, and the cross-suite
//! median-absolute-error matrix (rows: train suite, columns: test suite).

mod tree;

use std::io::Read;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use tree::{fit_tree, Node, RegressionTree};

use crate::data::LabeledCorpus;
use crate::error::{Error, Result};
use crate::format::{csv_line, fmt6};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub tree_count: usize,
    /// Resample n-of-n with replacement for every tree.
    pub bootstrap: bool,
    /// Fraction of features considered at each split.
    pub split_candidate_fraction: f64,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            tree_count: 100,
            bootstrap: true,
            split_candidate_fraction: 1.0,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_depth: None,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tree_count == 0 {
            return Err(Error::invalid("tree_count must be positive"));
        }
        if !(self.split_candidate_fraction > 0.0 && self.split_candidate_fraction <= 1.0) {
            return Err(Error::invalid("split_candidate_fraction must lie in (0, 1]"));
        }
        if self.min_samples_split < 2 {
            return Err(Error::invalid("min_samples_split must be at least 2"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::invalid("min_samples_leaf must be positive"));
        }
        if self.max_depth == Some(0) {
            return Err(Error::invalid("max_depth must be positive"));
        }
        Ok(())
    }

    pub(crate) fn candidate_feature_count(&self, width: usize) -> usize {
        ((self.split_candidate_fraction * width as f64) as usize).clamp(1, width)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<RegressionTree>,
    pub config: ForestConfig,
    pub train_suite: String,
    pub feature_count: usize,
}

/// Fits a forest on the records of `suite` within `labeled`.
pub fn fit_forest(labeled: &LabeledCorpus, suite: &str, config: &ForestConfig) -> Result<ForestModel> {
    let (x, y) = labeled.suite_data(suite);
    if x.is_empty() {
        return Err(Error::invalid(format!("suite {suite:?} has no labeled records")));
    }
    fit_forest_on(&x, &y, suite, config)
}

/// Fits `config.tree_count` trees in parallel. Tree `t` draws its bootstrap
/// sample and feature orders from stream `t` of `config.seed`, so the result
/// does not depend on scheduling.
pub fn fit_forest_on(
    features: &[Vec<f64>],
    targets: &[f64],
    train_suite: &str,
    config: &ForestConfig,
) -> Result<ForestModel> {
    config.validate()?;
    if features.len() < 2 {
        return Err(Error::invalid(format!(
            "suite {train_suite:?} needs at least 2 labeled records, has {}",
            features.len()
        )));
    }
    if features.len() != targets.len() {
        return Err(Error::invalid("feature rows and targets differ in length"));
    }
    let n = features.len();
    let trees = (0..config.tree_count)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(config.seed, rng::FOREST_TREE, t as u64);
            let sample: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            tree::fit_tree_on(features, targets, sample, config, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        trees,
        config: config.clone(),
        train_suite: train_suite.to_string(),
        feature_count: features[0].len(),
    })
}

/// Mean of the per-tree predictions for every row.
pub fn predict(model: &ForestModel, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    if let Some(row) = features.iter().find(|r| r.len() != model.feature_count) {
        return Err(Error::invalid(format!(
            "feature width {} does not match the model's {}",
            row.len(),
            model.feature_count
        )));
    }
    let count = model.trees.len() as f64;
    Ok(features
        .par_iter()
        .map(|row| model.trees.iter().map(|t| t.predict_one(row)).sum::<f64>() / count)
        .collect())
}

/// Median absolute error; the mean of the two middle values for even counts.
pub fn mdae(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} predictions for {} actual values",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("median absolute error of empty vectors"));
    }
    let mut errs: Vec<f64> = predicted.iter().zip(actual).map(|(p, a)| (p - a).abs()).collect();
    errs.sort_by(f64::total_cmp);
    let n = errs.len();
    Ok(if n % 2 == 1 {
        errs[n / 2]
    } else {
        (errs[n / 2 - 1] + errs[n / 2]) / 2.0
    })
}

/// Cross-suite MDAE grid. `mdae[i][j]` is the error of the model trained on
/// `train_suites[i]` when evaluated on `test_suites[j]`; the self cell holds
/// the resubstitution error, repeated in `train_mdae`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationMatrix {
    pub train_suites: Vec<String>,
    pub test_suites: Vec<String>,
    pub mdae: Vec<Vec<f64>>,
    pub train_mdae: Vec<f64>,
}

impl EvaluationMatrix {
    pub fn get(&self, train: &str, test: &str) -> Option<f64> {
        let i = self.train_suites.iter().position(|s| s == train)?;
        let j = self.test_suites.iter().position(|s| s == test)?;
        Some(self.mdae[i][j])
    }

    pub fn train_error(&self, train: &str) -> Option<f64> {
        let i = self.train_suites.iter().position(|s| s == train)?;
        Some(self.train_mdae[i])
    }

    /// `mdae.csv`: header `train_suite,<test suites>,train`.
    pub fn to_csv_string(&self) -> String {
        let mut out = csv_line(
            std::iter::once("train_suite".to_string())
                .chain(self.test_suites.iter().cloned())
                .chain(std::iter::once("train".to_string())),
        );
        for ((suite, row), &train) in self.train_suites.iter().zip(&self.mdae).zip(&self.train_mdae) {
            out.push_str(&csv_line(
                std::iter::once(suite.clone())
                    .chain(row.iter().map(|&v| fmt6(v)))
                    .chain(std::iter::once(fmt6(train))),
            ));
        }
        out
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(file, &path.display().to_string())
    }

    pub fn parse_csv<R: Read>(input: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let header = rdr.headers().map_err(|e| Error::from_csv(source_name, e))?.clone();
        let cols = header.len();
        if cols < 3 || &header[0] != "train_suite" || &header[cols - 1] != "train" {
            return Err(Error::table(
                source_name,
                1,
                "header must be train_suite,<test suites>,train",
            ));
        }
        let test_suites: Vec<String> = header.iter().skip(1).take(cols - 2).map(str::to_string).collect();
        let mut train_suites = Vec::new();
        let mut mdae = Vec::new();
        let mut train_mdae = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::from_csv(source_name, e))?;
            let line = i + 2;
            if rec.len() != cols {
                return Err(Error::table(source_name, line, "wrong number of fields"));
            }
            let values = rec
                .iter()
                .skip(1)
                .map(|c| match c.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
                    _ => Err(Error::table(source_name, line, format!("invalid error value {c:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            train_suites.push(rec[0].to_string());
            train_mdae.push(values[cols - 2]);
            mdae.push(values[..cols - 2].to_vec());
        }
        if train_suites.is_empty() {
            return Err(Error::table(source_name, 1, "no rows"));
        }
        Ok(EvaluationMatrix {
            train_suites,
            test_suites,
            mdae,
            train_mdae,
        })
    }
}

/// Trains one forest per suite and evaluates it on every suite.
pub fn cross_suite_evaluate(labeled: &LabeledCorpus, config: &ForestConfig) -> Result<EvaluationMatrix> {
    let suites = labeled.corpus().suite_ids().to_vec();
    if suites.len() < 2 {
        return Err(Error::invalid("need at least 2 suites for cross-suite evaluation"));
    }
    let data: Vec<(Vec<Vec<f64>>, Vec<f64>)> = suites.iter().map(|s| labeled.suite_data(s)).collect();
    for (s, (x, _)) in suites.iter().zip(&data) {
        if x.len() < 2 {
            return Err(Error::invalid(format!(
                "suite {s:?} has {} labeled records; at least 2 are needed",
                x.len()
            )));
        }
    }
    let mut mdae_rows = Vec::with_capacity(suites.len());
    let mut train_mdae = Vec::with_capacity(suites.len());
    for (i, suite) in suites.iter().enumerate() {
        let (x, y) = &data[i];
        let model = fit_forest_on(x, y, suite, config)?;
        let row = data
            .iter()
            .map(|(tx, ty)| mdae(&predict(&model, tx)?, ty))
            .collect::<Result<Vec<_>>>()?;
        train_mdae.push(row[i]);
        mdae_rows.push(row);
    }
    Ok(EvaluationMatrix {
        train_suites: suites.clone(),
        test_suites: suites,
        mdae: mdae_rows,
        train_mdae,
    })
}
