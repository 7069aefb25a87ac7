//! Feature and performance tables.
//!
//! `features.csv` has the header `suite,instance_id,<f1>,...,<fn>` with one
//! row per problem instance. `performance.csv` has the header
//! `suite,instance_id,algorithm,precision`. Both are plain comma-separated
//! UTF-8 with a `.` decimal point.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::csv_line;

/// Floor applied by [`TargetTransform::Log10Floored`]; the solver tolerance
/// below which a run counts as having hit the optimum.
pub const PRECISION_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceRecord {
    pub suite_id: String,
    pub instance_id: String,
    pub features: Vec<f64>,
}

/// Instances from one or more benchmark suites, all described by the same
/// ordered feature set.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    records: Vec<InstanceRecord>,
    feature_names: Vec<String>,
    suite_ids: Vec<String>,
}

impl Corpus {
    /// Validates and builds a corpus. Suite order is order of first
    /// appearance in `records`.
    pub fn new(feature_names: Vec<String>, records: Vec<InstanceRecord>) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::invalid("corpus needs at least one feature"));
        }
        if records.is_empty() {
            return Err(Error::invalid("corpus needs at least one record"));
        }
        let mut seen_names = HashSet::new();
        for name in &feature_names {
            if !seen_names.insert(name.as_str()) {
                return Err(Error::invalid(format!("duplicate feature name {name:?}")));
            }
        }
        let n = feature_names.len();
        let mut keys = HashSet::new();
        let mut suite_ids: Vec<String> = Vec::new();
        for rec in &records {
            if rec.features.len() != n {
                return Err(Error::invalid(format!(
                    "record ({}, {}) has {} features, expected {n}",
                    rec.suite_id,
                    rec.instance_id,
                    rec.features.len()
                )));
            }
            if let Some(pos) = rec.features.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "record ({}, {}) has non-finite value in column {}",
                    rec.suite_id, rec.instance_id, feature_names[pos]
                )));
            }
            if !keys.insert((rec.suite_id.as_str(), rec.instance_id.as_str())) {
                return Err(Error::invalid(format!(
                    "duplicate instance key ({}, {})",
                    rec.suite_id, rec.instance_id
                )));
            }
            if !suite_ids.contains(&rec.suite_id) {
                suite_ids.push(rec.suite_id.clone());
            }
        }
        Ok(Corpus {
            records,
            feature_names,
            suite_ids,
        })
    }

    pub fn records(&self) -> &[InstanceRecord] {
        &self.records
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn suite_ids(&self) -> &[String] {
        &self.suite_ids
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    /// Feature vectors in record order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.features.clone()).collect()
    }

    /// Suite label of every record, in record order.
    pub fn suite_labels(&self) -> Vec<String> {
        self.records.iter().map(|r| r.suite_id.clone()).collect()
    }

    /// Indices of the records belonging to `suite`.
    pub fn suite_indices(&self, suite: &str) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.suite_id == suite)
            .map(|(i, _)| i)
            .collect()
    }

    /// Renders the corpus in `features.csv` layout. Values are written with
    /// shortest round-trip precision so a reload is lossless.
    pub fn to_csv_string(&self) -> String {
        let mut out = csv_line(
            ["suite", "instance_id"]
                .into_iter()
                .map(str::to_string)
                .chain(self.feature_names.iter().cloned()),
        );
        for rec in &self.records {
            out.push_str(&csv_line(
                [rec.suite_id.clone(), rec.instance_id.clone()]
                    .into_iter()
                    .chain(rec.features.iter().map(|v| format!("{v:?}"))),
            ));
        }
        out
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn check_header(source_name: &str, header: &csv::StringRecord) -> Result<()> {
    let mut seen = HashSet::new();
    for col in header.iter() {
        if col.is_empty() {
            return Err(Error::table(source_name, 1, "empty header column"));
        }
        if !seen.insert(col) {
            return Err(Error::table(source_name, 1, format!("duplicate header column {col:?}")));
        }
    }
    Ok(())
}

fn parse_finite(source_name: &str, row: usize, column: &str, cell: &str) -> Result<f64> {
    let value: f64 = cell.trim().parse().map_err(|_| {
        Error::table(
            source_name,
            row,
            format!("column {column:?}: non-numeric value {cell:?}"),
        )
    })?;
    if !value.is_finite() {
        return Err(Error::table(
            source_name,
            row,
            format!("column {column:?}: non-finite value {cell:?}"),
        ));
    }
    Ok(value)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input)
}

pub fn load_feature_table(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    parse_feature_table(open(path)?, &path.display().to_string())
}

/// Parses `features.csv` content. `source_name` is used in error messages.
pub fn parse_feature_table<R: Read>(input: R, source_name: &str) -> Result<Corpus> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| Error::from_csv(source_name, e))?.clone();
    if header.is_empty() {
        return Err(Error::table(source_name, 1, "empty file"));
    }
    check_header(source_name, &header)?;
    if header.len() < 3 || &header[0] != "suite" || &header[1] != "instance_id" {
        return Err(Error::table(
            source_name,
            1,
            "header must be suite,instance_id,<feature>...",
        ));
    }
    let feature_names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut records = Vec::new();
    let mut keys = HashSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::from_csv(source_name, e))?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        if row.len() != header.len() {
            return Err(Error::table(
                source_name,
                line,
                format!("expected {} fields, found {}", header.len(), row.len()),
            ));
        }
        let suite_id = row[0].to_string();
        let instance_id = row[1].to_string();
        if suite_id.is_empty() || instance_id.is_empty() {
            return Err(Error::table(source_name, line, "empty suite or instance_id"));
        }
        if !keys.insert((suite_id.clone(), instance_id.clone())) {
            return Err(Error::table(
                source_name,
                line,
                format!("duplicate instance key ({suite_id}, {instance_id})"),
            ));
        }
        let features = feature_names
            .iter()
            .enumerate()
            .map(|(j, name)| parse_finite(source_name, line, name, &row[j + 2]))
            .collect::<Result<Vec<_>>>()?;
        records.push(InstanceRecord {
            suite_id,
            instance_id,
            features,
        });
    }
    if records.is_empty() {
        return Err(Error::table(source_name, 1, "empty file: no data rows"));
    }
    Corpus::new(feature_names, records)
}

/// Precision (error to the global optimum) of one algorithm per instance.
#[derive(Clone, Debug, PartialEq)]
pub struct PerformanceTable {
    algorithm: String,
    entries: BTreeMap<(String, String), f64>,
}

impl PerformanceTable {
    pub fn new(
        algorithm: impl Into<String>,
        entries: impl IntoIterator<Item = ((String, String), f64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (key, precision) in entries {
            if !(precision >= 0.0) || !precision.is_finite() {
                return Err(Error::invalid(format!(
                    "negative precision {precision} for ({}, {})",
                    key.0, key.1
                )));
            }
            if map.insert(key.clone(), precision).is_some() {
                return Err(Error::invalid(format!(
                    "duplicate performance entry ({}, {})",
                    key.0, key.1
                )));
            }
        }
        Ok(PerformanceTable {
            algorithm: algorithm.into(),
            entries: map,
        })
    }

    pub fn algorithm(&self) -> &str {
        &self.algorithm
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, suite: &str, instance: &str) -> Option<f64> {
        self.entries.get(&(suite.to_string(), instance.to_string())).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(String, String), &f64)> {
        self.entries.iter()
    }
}

pub fn load_performance_table(path: impl AsRef<Path>, algorithm: &str) -> Result<PerformanceTable> {
    let path = path.as_ref();
    parse_performance_table(open(path)?, &path.display().to_string(), algorithm)
}

/// Algorithm names present in a `performance.csv`, in first-appearance order.
pub fn performance_algorithms(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    parse_performance_algorithms(open(path)?, &path.display().to_string())
}

pub fn parse_performance_algorithms<R: Read>(input: R, source_name: &str) -> Result<Vec<String>> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| Error::from_csv(source_name, e))?.clone();
    check_header(source_name, &header)?;
    let mut names: Vec<String> = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::from_csv(source_name, e))?;
        if let Some(alg) = row.get(2) {
            if !names.iter().any(|n| n == alg) {
                names.push(alg.to_string());
            }
        }
    }
    Ok(names)
}

pub fn parse_performance_table<R: Read>(input: R, source_name: &str, algorithm: &str) -> Result<PerformanceTable> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| Error::from_csv(source_name, e))?.clone();
    if header.is_empty() {
        return Err(Error::table(source_name, 1, "empty file"));
    }
    check_header(source_name, &header)?;
    let expected = ["suite", "instance_id", "algorithm", "precision"];
    if header.len() != 4 || header.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(Error::table(
            source_name,
            1,
            "header must be suite,instance_id,algorithm,precision",
        ));
    }
    let mut entries = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::from_csv(source_name, e))?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        if row.len() != 4 {
            return Err(Error::table(
                source_name,
                line,
                format!("malformed row: expected 4 fields, found {}", row.len()),
            ));
        }
        // Every row is validated, not just the requested algorithm's.
        let precision = parse_finite(source_name, line, "precision", &row[3])?;
        if precision < 0.0 {
            return Err(Error::table(
                source_name,
                line,
                format!("negative precision {precision}"),
            ));
        }
        if &row[2] != algorithm {
            continue;
        }
        let key = (row[0].to_string(), row[1].to_string());
        if entries.insert(key, precision).is_some() {
            return Err(Error::table(
                source_name,
                line,
                format!("duplicate performance entry ({}, {}, {algorithm})", &row[0], &row[1]),
            ));
        }
    }
    if entries.is_empty() {
        return Err(Error::Invalid(format!(
            "{source_name}: no entries for algorithm {algorithm:?}"
        )));
    }
    Ok(PerformanceTable {
        algorithm: algorithm.to_string(),
        entries,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationScheme {
    /// Subtract the mean, divide by the population standard deviation.
    #[default]
    ZScore,
    /// Subtract the minimum, divide by the range.
    MinMax,
}

impl std::str::FromStr for NormalizationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z-score" => Ok(NormalizationScheme::ZScore),
            "min-max" => Ok(NormalizationScheme::MinMax),
            other => Err(Error::invalid(format!(
                "unknown normalization scheme {other:?} (expected z-score or min-max)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormalizationOptions {
    pub scheme: NormalizationScheme,
    /// Fit location and scale on these suites only; `None` fits on every
    /// record.
    pub fit_suites: Option<Vec<String>>,
}

/// Per-feature affine transform `x -> (x - location) / scale`, plus the
/// features it dropped for having no spread.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub scheme: NormalizationScheme,
    pub feature_names: Vec<String>,
    pub location: Vec<f64>,
    pub scale: Vec<f64>,
    pub dropped_features: Vec<String>,
}

impl NormalizationParams {
    fn column_indices(&self, corpus: &Corpus) -> Result<Vec<usize>> {
        self.feature_names
            .iter()
            .map(|name| {
                corpus
                    .feature_names()
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| Error::invalid(format!("feature {name:?} missing from corpus")))
            })
            .collect()
    }

    /// Applies the transform to any corpus carrying the retained features.
    pub fn apply(&self, corpus: &Corpus) -> Result<Corpus> {
        let cols = self.column_indices(corpus)?;
        self.map_columns(corpus, &cols, |v, j| (v - self.location[j]) / self.scale[j])
    }

    /// Maps normalized values back to the original units.
    pub fn invert(&self, corpus: &Corpus) -> Result<Corpus> {
        let cols = self.column_indices(corpus)?;
        self.map_columns(corpus, &cols, |v, j| v * self.scale[j] + self.location[j])
    }

    fn map_columns(&self, corpus: &Corpus, cols: &[usize], f: impl Fn(f64, usize) -> f64) -> Result<Corpus> {
        let records = corpus
            .records()
            .iter()
            .map(|r| InstanceRecord {
                suite_id: r.suite_id.clone(),
                instance_id: r.instance_id.clone(),
                features: cols.iter().enumerate().map(|(j, &c)| f(r.features[c], j)).collect(),
            })
            .collect();
        Corpus::new(self.feature_names.clone(), records)
    }
}

/// Z-score standardization fitted over every record of the corpus.
pub fn normalize_features(corpus: &Corpus) -> Result<(Corpus, NormalizationParams)> {
    normalize_features_with(corpus, &NormalizationOptions::default())
}

pub fn normalize_features_with(
    corpus: &Corpus,
    options: &NormalizationOptions,
) -> Result<(Corpus, NormalizationParams)> {
    let fit_rows: Vec<&InstanceRecord> = match &options.fit_suites {
        None => corpus.records().iter().collect(),
        Some(suites) => {
            for s in suites {
                if !corpus.suite_ids().contains(s) {
                    return Err(Error::invalid(format!("unknown fit suite {s:?}")));
                }
            }
            corpus
                .records()
                .iter()
                .filter(|r| suites.contains(&r.suite_id))
                .collect()
        }
    };
    if fit_rows.is_empty() {
        return Err(Error::invalid("normalization needs at least one record"));
    }
    let n = fit_rows.len() as f64;
    let mut params = NormalizationParams {
        scheme: options.scheme,
        feature_names: Vec::new(),
        location: Vec::new(),
        scale: Vec::new(),
        dropped_features: Vec::new(),
    };
    for (j, name) in corpus.feature_names().iter().enumerate() {
        let column = fit_rows.iter().map(|r| r.features[j]);
        let (location, scale, reference) = match options.scheme {
            NormalizationScheme::ZScore => {
                let mean = column.clone().sum::<f64>() / n;
                let var = column.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                (mean, var.sqrt(), mean.abs())
            }
            NormalizationScheme::MinMax => {
                let min = column.clone().fold(f64::INFINITY, f64::min);
                let max = column.fold(f64::NEG_INFINITY, f64::max);
                (min, max - min, min.abs().max(max.abs()))
            }
        };
        // Spread at rounding-noise level counts as constant.
        if scale <= 1e-12 * reference.max(1.0) {
            params.dropped_features.push(name.clone());
        } else {
            params.feature_names.push(name.clone());
            params.location.push(location);
            params.scale.push(scale);
        }
    }
    if params.feature_names.is_empty() {
        return Err(Error::invalid(
            "no informative features: every feature has zero variance",
        ));
    }
    let normalized = params.apply(corpus)?;
    Ok((normalized, params))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetTransform {
    #[default]
    Raw,
    /// `log10(max(precision, 1e-8))`
    Log10Floored,
}

impl TargetTransform {
    pub fn apply(self, precision: f64) -> f64 {
        match self {
            TargetTransform::Raw => precision,
            TargetTransform::Log10Floored => precision.max(PRECISION_FLOOR).log10(),
        }
    }
}

impl std::str::FromStr for TargetTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(TargetTransform::Raw),
            "log10-floored" => Ok(TargetTransform::Log10Floored),
            other => Err(Error::invalid(format!(
                "unknown target transform {other:?} (expected raw or log10-floored)"
            ))),
        }
    }
}

/// A corpus with one regression target per record.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledCorpus {
    corpus: Corpus,
    targets: Vec<f64>,
    algorithm: String,
    transform: TargetTransform,
    unmatched: usize,
}

impl LabeledCorpus {
    pub fn new(
        corpus: Corpus,
        targets: Vec<f64>,
        algorithm: impl Into<String>,
        transform: TargetTransform,
    ) -> Result<Self> {
        if targets.len() != corpus.len() {
            return Err(Error::invalid(format!(
                "{} targets for {} records",
                targets.len(),
                corpus.len()
            )));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("non-finite target"));
        }
        Ok(LabeledCorpus {
            corpus,
            targets,
            algorithm: algorithm.into(),
            transform,
            unmatched: 0,
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn algorithm(&self) -> &str {
        &self.algorithm
    }

    pub fn transform(&self) -> TargetTransform {
        self.transform
    }

    /// Corpus records dropped at join time for lack of a performance entry.
    pub fn unmatched(&self) -> usize {
        self.unmatched
    }

    /// Feature rows and targets of one suite.
    pub fn suite_data(&self, suite: &str) -> (Vec<Vec<f64>>, Vec<f64>) {
        self.corpus
            .suite_indices(suite)
            .into_iter()
            .map(|i| (self.corpus.records()[i].features.clone(), self.targets[i]))
            .unzip()
    }

    /// Renders targets in `performance.csv` layout. Fails on negative
    /// targets, which are not valid precisions.
    pub fn to_performance_csv(&self) -> Result<String> {
        let mut out = csv_line(["suite", "instance_id", "algorithm", "precision"]);
        for (rec, &t) in self.corpus.records().iter().zip(&self.targets) {
            if t < 0.0 {
                return Err(Error::invalid(format!(
                    "negative precision {t} for ({}, {})",
                    rec.suite_id, rec.instance_id
                )));
            }
            out.push_str(&csv_line([
                rec.suite_id.clone(),
                rec.instance_id.clone(),
                self.algorithm.clone(),
                format!("{t:?}"),
            ]));
        }
        Ok(out)
    }
}

/// Attaches performance targets to corpus records by `(suite, instance_id)`.
/// Records without an entry are dropped and counted in
/// [`LabeledCorpus::unmatched`].
pub fn join_targets(corpus: &Corpus, perf: &PerformanceTable, transform: TargetTransform) -> Result<LabeledCorpus> {
    let mut records = Vec::new();
    let mut targets = Vec::new();
    for rec in corpus.records() {
        if let Some(p) = perf.get(&rec.suite_id, &rec.instance_id) {
            records.push(rec.clone());
            targets.push(transform.apply(p));
        }
    }
    if records.is_empty() {
        return Err(Error::invalid(format!(
            "disjoint keys: no corpus record has a {:?} performance entry",
            perf.algorithm()
        )));
    }
    let unmatched = corpus.len() - records.len();
    let joined = Corpus::new(corpus.feature_names().to_vec(), records)?;
    let mut labeled = LabeledCorpus::new(joined, targets, perf.algorithm(), transform)?;
    labeled.unmatched = unmatched;
    Ok(labeled)
}
