//! Links feature-space similarity to performance-space generalization, and
//! builds suites: synthetic mixtures, maximal-independent-set selections, and
//! single-cluster suites.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::ClusteringModel;
use crate::coverage::{cosine_similarity, SimilarityMatrix};
use crate::data::{Corpus, InstanceRecord, LabeledCorpus, TargetTransform};
use crate::error::{Error, Result};
use crate::format::{csv_line, fmt6};
use crate::perfmodel::{fit_forest_on, mdae, predict, EvaluationMatrix, ForestConfig};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSuite {
    pub label: String,
    /// Mixture weights over clusters; nonnegative, summing to 1.
    pub weights: Vec<f64>,
    pub count: usize,
    /// Multiplier on the cluster spread for this suite's instances.
    #[serde(default = "one")]
    pub spread_scale: f64,
}

fn one() -> f64 {
    1.0
}

/// `target = weights . x + offset` for instances drawn from one cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTarget {
    pub weights: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub cluster_centers: Vec<Vec<f64>>,
    pub cluster_spread: f64,
    pub suites: Vec<SyntheticSuite>,
    /// One affine map per cluster.
    pub target_rule: Vec<AffineTarget>,
    pub noise_scale: f64,
    pub seed: u64,
    #[serde(default = "default_algorithm")]
    pub algorithm: String,
}

fn default_algorithm() -> String {
    "synthetic".to_string()
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.cluster_centers.len();
        if k == 0 || self.suites.is_empty() {
            return Err(Error::invalid(
                "synthetic spec needs at least one cluster and one suite",
            ));
        }
        let dim = self.cluster_centers[0].len();
        if dim == 0 || self.cluster_centers.iter().any(|c| c.len() != dim) {
            return Err(Error::invalid("cluster centers must share a positive dimension"));
        }
        if !(self.cluster_spread > 0.0) || !(self.noise_scale >= 0.0) {
            return Err(Error::invalid(
                "cluster_spread must be positive and noise_scale nonnegative",
            ));
        }
        if self.target_rule.len() != k || self.target_rule.iter().any(|t| t.weights.len() != dim) {
            return Err(Error::invalid(
                "target_rule needs one affine map per cluster, matching the dimension",
            ));
        }
        let mut labels = HashSet::new();
        for s in &self.suites {
            if !labels.insert(s.label.as_str()) {
                return Err(Error::invalid(format!("duplicate suite label {:?}", s.label)));
            }
            if s.count == 0 || !(s.spread_scale > 0.0) {
                return Err(Error::invalid(format!(
                    "suite {:?} needs count >= 1 and positive spread_scale",
                    s.label
                )));
            }
            if s.weights.len() != k || s.weights.iter().any(|w| !(*w >= 0.0)) {
                return Err(Error::invalid(format!(
                    "suite {:?} needs {k} nonnegative weights",
                    s.label
                )));
            }
            let sum: f64 = s.weights.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "suite {:?} weights sum to {sum}, not 1",
                    s.label
                )));
            }
        }
        Ok(())
    }
}

/// A synthetic corpus plus the cluster each instance was drawn from.
#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub labeled: LabeledCorpus,
    pub true_clusters: Vec<usize>,
}

/// Draws every instance from an isotropic Gaussian around a cluster sampled
/// from its suite's mixture weights; targets follow that cluster's affine map
/// plus Gaussian noise. Suite `s` uses RNG stream `s` of the spec's seed.
pub fn synth_corpus(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let dim = spec.cluster_centers[0].len();
    let feature_names: Vec<String> = (1..=dim).map(|j| format!("f{j}")).collect();
    let mut records = Vec::new();
    let mut targets = Vec::new();
    let mut true_clusters = Vec::new();
    for (s, suite) in spec.suites.iter().enumerate() {
        let mut rng = rng::stream(spec.seed, rng::SYNTH, s as u64);
        let spread = spec.cluster_spread * suite.spread_scale;
        for i in 0..suite.count {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut cluster = suite.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
            for (c, &w) in suite.weights.iter().enumerate() {
                acc += w;
                if w > 0.0 && u < acc {
                    cluster = c;
                    break;
                }
            }
            let features: Vec<f64> = spec.cluster_centers[cluster]
                .iter()
                .map(|&m| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + spread * z
                })
                .collect();
            let rule = &spec.target_rule[cluster];
            let mut target = rule.offset + rule.weights.iter().zip(&features).map(|(w, x)| w * x).sum::<f64>();
            if spec.noise_scale > 0.0 {
                target += Normal::new(0.0, spec.noise_scale)
                    .expect("positive noise scale")
                    .sample(&mut rng);
            }
            records.push(InstanceRecord {
                suite_id: suite.label.clone(),
                instance_id: format!("i{i}"),
                features,
            });
            targets.push(target);
            true_clusters.push(cluster);
        }
    }
    let corpus = Corpus::new(feature_names, records)?;
    Ok(SyntheticCorpus {
        labeled: LabeledCorpus::new(corpus, targets, spec.algorithm.clone(), TargetTransform::Raw)?,
        true_clusters,
    })
}

/// Runs greedy maximal-independent-set selection `run_count` times on the
/// graph joining instances whose feature cosine similarity is at least
/// `similarity_threshold`. Each run visits vertices in its own random order
/// and keeps every vertex with no kept neighbour. Returns record indices,
/// sorted, per run.
pub fn mis_select_suites(
    corpus: &Corpus,
    similarity_threshold: f64,
    run_count: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if corpus.is_empty() {
        return Err(Error::invalid("cannot select from an empty corpus"));
    }
    if !(similarity_threshold > 0.0 && similarity_threshold < 1.0) {
        return Err(Error::invalid("similarity threshold must lie in (0, 1)"));
    }
    let n = corpus.len();
    let adjacency = similarity_graph(corpus, similarity_threshold);
    Ok((0..run_count)
        .into_par_iter()
        .map(|run| {
            let mut rng = rng::stream(seed, rng::MIS_RUN, run as u64);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut blocked = vec![false; n];
            let mut chosen = Vec::new();
            for v in order {
                if blocked[v] {
                    continue;
                }
                chosen.push(v);
                blocked[v] = true;
                for &u in &adjacency[v] {
                    blocked[u] = true;
                }
            }
            chosen.sort_unstable();
            chosen
        })
        .collect())
}

/// Neighbour lists of the instance similarity graph. Zero feature vectors
/// have undefined cosine and get no edges.
pub fn similarity_graph(corpus: &Corpus, threshold: f64) -> Vec<Vec<usize>> {
    let rows = corpus.records();
    (0..rows.len())
        .into_par_iter()
        .map(|i| {
            (0..rows.len())
                .filter(|&j| {
                    j != i
                        && cosine_similarity(&rows[i].features, &rows[j].features)
                            .map(|s| s >= threshold)
                            .unwrap_or(false)
                })
                .collect()
        })
        .collect()
}

/// Builds one suite per selection, labeled `<prefix>1`, `<prefix>2`, ...
/// Instance ids become `<suite>/<instance_id>` of the source record.
pub fn suites_from_selections(corpus: &Corpus, selections: &[Vec<usize>], prefix: &str) -> Result<Corpus> {
    let mut records = Vec::new();
    for (r, sel) in selections.iter().enumerate() {
        for &i in sel {
            let src = corpus
                .records()
                .get(i)
                .ok_or_else(|| Error::invalid(format!("selection index {i} out of range")))?;
            records.push(InstanceRecord {
                suite_id: format!("{prefix}{}", r + 1),
                instance_id: format!("{}/{}", src.suite_id, src.instance_id),
                features: src.features.clone(),
            });
        }
    }
    Corpus::new(corpus.feature_names().to_vec(), records)
}

fn cluster_members(corpus_len: usize, model: &ClusteringModel, cluster_index: usize) -> Result<Vec<usize>> {
    if model.assignments.len() != corpus_len {
        return Err(Error::invalid(format!(
            "clustering covers {} records, corpus has {corpus_len}",
            model.assignments.len()
        )));
    }
    if cluster_index >= model.k {
        return Err(Error::invalid(format!(
            "cluster index {cluster_index} out of range for k = {}",
            model.k
        )));
    }
    let members: Vec<usize> = (0..corpus_len)
        .filter(|&i| model.assignments[i] == cluster_index)
        .collect();
    if members.is_empty() {
        return Err(Error::invalid(format!("cluster {cluster_index} is empty")));
    }
    Ok(members)
}

/// Appends a suite named `label` holding a copy of every instance assigned to
/// `cluster_index`, whatever suite it came from.
pub fn single_cluster_suite(
    corpus: &Corpus,
    model: &ClusteringModel,
    cluster_index: usize,
    label: &str,
) -> Result<Corpus> {
    single_cluster_records(corpus, model, cluster_index, label).map(|(c, _)| c)
}

/// [`single_cluster_suite`] carrying the targets of the copied records.
pub fn single_cluster_suite_labeled(
    labeled: &LabeledCorpus,
    model: &ClusteringModel,
    cluster_index: usize,
    label: &str,
) -> Result<LabeledCorpus> {
    let (corpus, members) = single_cluster_records(labeled.corpus(), model, cluster_index, label)?;
    let mut targets = labeled.targets().to_vec();
    targets.extend(members.iter().map(|&i| labeled.targets()[i]));
    LabeledCorpus::new(corpus, targets, labeled.algorithm(), labeled.transform())
}

fn single_cluster_records(
    corpus: &Corpus,
    model: &ClusteringModel,
    cluster_index: usize,
    label: &str,
) -> Result<(Corpus, Vec<usize>)> {
    if corpus.suite_ids().iter().any(|s| s == label) {
        return Err(Error::invalid(format!("suite {label:?} already exists")));
    }
    let members = cluster_members(corpus.len(), model, cluster_index)?;
    let mut records = corpus.records().to_vec();
    records.extend(members.iter().map(|&i| {
        let src = &corpus.records()[i];
        InstanceRecord {
            suite_id: label.to_string(),
            instance_id: format!("{}/{}", src.suite_id, src.instance_id),
            features: src.features.clone(),
        }
    }));
    Ok((Corpus::new(corpus.feature_names().to_vec(), records)?, members))
}

/// Errors of one train suite's models (one per algorithm) on the other
/// suites; the layout of `bs6_eval.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSuiteTable {
    pub train_suite: String,
    pub algorithms: Vec<String>,
    pub test_suites: Vec<String>,
    pub mdae: Vec<Vec<f64>>,
    pub train_mdae: Vec<f64>,
}

impl TrainSuiteTable {
    /// Header `algorithm,<test suites>`, one row per algorithm.
    pub fn to_csv_string(&self) -> String {
        let mut out = csv_line(std::iter::once("algorithm".to_string()).chain(self.test_suites.iter().cloned()));
        for (alg, row) in self.algorithms.iter().zip(&self.mdae) {
            out.push_str(&csv_line(
                std::iter::once(alg.clone()).chain(row.iter().map(|&v| fmt6(v))),
            ));
        }
        out
    }
}

/// Trains on `train_suite` once per labeled corpus (one per algorithm) and
/// evaluates on every other suite.
pub fn evaluate_train_suite(
    per_algorithm: &[LabeledCorpus],
    train_suite: &str,
    config: &ForestConfig,
) -> Result<TrainSuiteTable> {
    let first = per_algorithm
        .first()
        .ok_or_else(|| Error::invalid("no algorithms to evaluate"))?;
    let test_suites: Vec<String> = first
        .corpus()
        .suite_ids()
        .iter()
        .filter(|s| *s != train_suite)
        .cloned()
        .collect();
    if test_suites.is_empty() {
        return Err(Error::invalid("need at least one suite besides the train suite"));
    }
    let mut table = TrainSuiteTable {
        train_suite: train_suite.to_string(),
        algorithms: Vec::new(),
        test_suites: test_suites.clone(),
        mdae: Vec::new(),
        train_mdae: Vec::new(),
    };
    for labeled in per_algorithm {
        let (x, y) = labeled.suite_data(train_suite);
        if x.is_empty() {
            return Err(Error::invalid(format!(
                "train suite {train_suite:?} has no records for {}",
                labeled.algorithm()
            )));
        }
        let model = fit_forest_on(&x, &y, train_suite, config)?;
        table.train_mdae.push(mdae(&predict(&model, &x)?, &y)?);
        let row = test_suites
            .iter()
            .map(|s| {
                let (tx, ty) = labeled.suite_data(s);
                if tx.is_empty() {
                    return Err(Error::invalid(format!(
                        "suite {s:?} has no records for {}",
                        labeled.algorithm()
                    )));
                }
                mdae(&predict(&model, &tx)?, &ty)
            })
            .collect::<Result<Vec<_>>>()?;
        table.algorithms.push(labeled.algorithm().to_string());
        table.mdae.push(row);
    }
    Ok(table)
}

/// Ranks starting at 1; tied values share the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. `None` when either
/// input is constant or shorter than 2.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// More similar suites got lower error (negative rank correlation).
    Consistent,
    Violated,
    /// A constant similarity or error row carries no ordering.
    InsufficientVariation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub train_suite: String,
    pub test_suites: Vec<String>,
    pub similarity: Vec<f64>,
    pub mdae: Vec<f64>,
    pub rank_correlation: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suites: Vec<SuiteRecord>,
    /// Median of the defined rank correlations.
    pub median_rank_correlation: Option<f64>,
}

impl Report {
    pub fn record(&self, train_suite: &str) -> Option<&SuiteRecord> {
        self.suites.iter().find(|r| r.train_suite == train_suite)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// For every train suite, correlates its similarity to each other suite with
/// the error its model makes there.
pub fn generalizability_report(sim: &SimilarityMatrix, eval: &EvaluationMatrix) -> Result<Report> {
    let m = sim.len();
    if m < 3 {
        return Err(Error::invalid(
            "correlation needs at least 2 test suites (3 suites in total)",
        ));
    }
    let sim_set: HashSet<&String> = sim.suite_ids().iter().collect();
    let train_set: HashSet<&String> = eval.train_suites.iter().collect();
    if sim_set != train_set || !sim.suite_ids().iter().all(|s| eval.test_suites.contains(s)) {
        return Err(Error::invalid(
            "similarity and evaluation matrices cover different suites",
        ));
    }
    let mut records = Vec::with_capacity(m);
    for train in &eval.train_suites {
        let test_suites: Vec<String> = sim.suite_ids().iter().filter(|s| *s != train).cloned().collect();
        let similarity: Vec<f64> = test_suites
            .iter()
            .map(|t| sim.get(train, t).expect("label checked"))
            .collect();
        let errors: Vec<f64> = test_suites
            .iter()
            .map(|t| eval.get(train, t).expect("label checked"))
            .collect();
        let rank_correlation = spearman(&similarity, &errors);
        let verdict = match rank_correlation {
            None => Verdict::InsufficientVariation,
            Some(r) if r < 0.0 => Verdict::Consistent,
            Some(_) => Verdict::Violated,
        };
        records.push(SuiteRecord {
            train_suite: train.clone(),
            test_suites,
            similarity,
            mdae: errors,
            rank_correlation,
            verdict,
        });
    }
    let mut defined: Vec<f64> = records.iter().filter_map(|r| r.rank_correlation).collect();
    defined.sort_by(f64::total_cmp);
    let median_rank_correlation = match defined.len() {
        0 => None,
        n if n % 2 == 1 => Some(defined[n / 2]),
        n => Some((defined[n / 2 - 1] + defined[n / 2]) / 2.0),
    };
    Ok(Report {
        suites: records,
        median_rank_correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn spearman_extremes() {
        assert_eq!(spearman(&[3.0, 2.0, 1.0], &[1.0, 5.0, 9.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 5.0, 9.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]), None);
    }

    fn square_sim(values: Vec<Vec<f64>>) -> SimilarityMatrix {
        SimilarityMatrix::from_values(labels(&["A", "B", "C", "D"]), values).unwrap()
    }

    fn eval(mdae_rows: Vec<Vec<f64>>) -> EvaluationMatrix {
        EvaluationMatrix {
            train_suites: labels(&["A", "B", "C", "D"]),
            test_suites: labels(&["A", "B", "C", "D"]),
            train_mdae: (0..4).map(|i| mdae_rows[i][i]).collect(),
            mdae: mdae_rows,
        }
    }

    #[test]
    fn anti_monotone_is_consistent_and_constant_is_insufficient() {
        let sim = square_sim(vec![
            vec![1.0, 0.9, 0.5, 0.1],
            vec![0.9, 1.0, 0.6, 0.2],
            vec![0.5, 0.6, 1.0, 0.3],
            vec![0.1, 0.2, 0.3, 1.0],
        ]);
        let ev = eval(vec![
            vec![0.0, 1.0, 2.0, 3.0],
            vec![1.0, 0.0, 1.0, 1.0],
            vec![3.0, 2.0, 0.0, 1.0],
            vec![3.0, 2.0, 1.0, 0.0],
        ]);
        let r = generalizability_report(&sim, &ev).unwrap();
        let a = r.record("A").unwrap();
        assert_eq!(a.rank_correlation, Some(-1.0));
        assert_eq!(a.verdict, Verdict::Consistent);
        assert_eq!(r.record("B").unwrap().verdict, Verdict::InsufficientVariation);
        assert_eq!(r.record("C").unwrap().verdict, Verdict::Violated);
        assert_eq!(r.record("D").unwrap().rank_correlation, Some(-1.0));
        // defined correlations: -1, +1, -1 -> median -1
        assert_eq!(r.median_rank_correlation, Some(-1.0));
    }

    #[test]
    fn report_needs_three_suites() {
        let sim = SimilarityMatrix::from_values(labels(&["A", "B"]), vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let ev = EvaluationMatrix {
            train_suites: labels(&["A", "B"]),
            test_suites: labels(&["A", "B"]),
            mdae: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            train_mdae: vec![0.0, 0.0],
        };
        let err = generalizability_report(&sim, &ev).unwrap_err();
        assert!(err.to_string().contains("at least 2 test suites"));
    }

    fn corpus(points: &[[f64; 2]]) -> Corpus {
        Corpus::new(
            labels(&["x", "y"]),
            points
                .iter()
                .enumerate()
                .map(|(i, p)| InstanceRecord {
                    suite_id: "S".into(),
                    instance_id: format!("i{i}"),
                    features: p.to_vec(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn mis_empty_graph_keeps_all() {
        let c = corpus(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]);
        for sel in mis_select_suites(&c, 0.5, 3, 1).unwrap() {
            assert_eq!(sel, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn mis_complete_graph_keeps_one() {
        let c = corpus(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [0.5, 0.5]]);
        let runs = mis_select_suites(&c, 0.9, 5, 7).unwrap();
        assert_eq!(runs.len(), 5);
        assert!(runs.iter().all(|s| s.len() == 1));
    }

    #[test]
    fn mis_threshold_bounds() {
        let c = corpus(&[[1.0, 0.0]]);
        assert!(mis_select_suites(&c, 0.0, 1, 0).is_err());
        assert!(mis_select_suites(&c, 1.0, 1, 0).is_err());
    }

    fn model(assignments: Vec<usize>, k: usize) -> ClusteringModel {
        let json = serde_json::json!({
            "k": k,
            "centroids": vec![vec![0.0, 0.0]; k],
            "assignments": assignments,
            "inertia": 0.0,
            "seed": 0
        });
        ClusteringModel::from_json(&json.to_string()).unwrap()
    }

    #[test]
    fn single_cluster_whole_corpus() {
        let c = corpus(&[[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]]);
        let out = single_cluster_suite(&c, &model(vec![0, 0, 0], 2), 0, "BS6").unwrap();
        assert_eq!(out.suite_ids(), ["S", "BS6"]);
        assert_eq!(out.suite_indices("BS6").len(), 3);
        assert_eq!(out.records()[3].instance_id, "S/i0");
        assert!(single_cluster_suite(&c, &model(vec![0, 0, 0], 2), 1, "BS6").is_err());
        assert!(single_cluster_suite(&c, &model(vec![0, 0, 0], 2), 2, "BS6").is_err());
        assert!(single_cluster_suite(&c, &model(vec![0, 0, 0], 2), 0, "S").is_err());
    }

    fn spec() -> SyntheticSpec {
        SyntheticSpec {
            cluster_centers: vec![vec![0.0, 0.0], vec![20.0, 0.0]],
            cluster_spread: 1.0,
            suites: vec![SyntheticSuite {
                label: "A".into(),
                weights: vec![1.0, 0.0],
                count: 25,
                spread_scale: 1.0,
            }],
            target_rule: vec![
                AffineTarget {
                    weights: vec![2.0, -1.0],
                    offset: 3.0,
                },
                AffineTarget {
                    weights: vec![0.0, 0.0],
                    offset: 0.0,
                },
            ],
            noise_scale: 0.0,
            seed: 11,
            algorithm: "synthetic".into(),
        }
    }

    #[test]
    fn synth_forced_cluster_and_exact_targets() {
        let out = synth_corpus(&spec()).unwrap();
        assert!(out.true_clusters.iter().all(|&c| c == 0));
        for (rec, &t) in out.labeled.corpus().records().iter().zip(out.labeled.targets()) {
            assert!(rec.features[0].abs() < 6.0);
            approx::assert_abs_diff_eq!(t, 3.0 + 2.0 * rec.features[0] - rec.features[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn synth_is_deterministic_and_validated() {
        let a = synth_corpus(&spec()).unwrap();
        let b = synth_corpus(&spec()).unwrap();
        assert_eq!(a.labeled, b.labeled);
        let mut bad = spec();
        bad.suites[0].weights = vec![0.5, 0.6];
        assert!(synth_corpus(&bad).is_err());
        let mut bad = spec();
        bad.cluster_centers.clear();
        assert!(synth_corpus(&bad).is_err());
    }
}
