//! Benchmark-suite generalizability analysis: cluster instances in landscape
//! feature space, compare suites by their cluster coverage, and check whether
//! coverage similarity predicts how well performance models transfer.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Symmetric matrices are filled by (i, j) index pairs.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod clustering;
pub mod coverage;
pub mod data;
pub mod error;
pub mod format;
pub mod perfmodel;
pub mod plot;
mod rng;

pub use analysis::{
    generalizability_report, mis_select_suites, single_cluster_suite, single_cluster_suite_labeled, spearman,
    suites_from_selections, synth_corpus, Report, SuiteRecord, SyntheticSpec, TrainSuiteTable, Verdict,
};
pub use clustering::{
    assign, kmeans_fit, kmeans_fit_with, select_k, silhouette, ClusteringModel, KMeansConfig, KSelectionMethod,
    KSelectionReport,
};
pub use coverage::{
    agglomerate, cosine_similarity, coverage_matrix, leaf_order, similarity_matrix, CoverageMatrix, Dendrogram, Merge,
    SimilarityMatrix,
};
pub use data::{
    join_targets, load_feature_table, load_performance_table, normalize_features, normalize_features_with,
    parse_feature_table, parse_performance_algorithms, parse_performance_table, Corpus, InstanceRecord, LabeledCorpus,
    NormalizationOptions, NormalizationParams, NormalizationScheme, PerformanceTable, TargetTransform,
};
pub use error::{Error, Result};
pub use perfmodel::{cross_suite_evaluate, fit_forest, mdae, predict, EvaluationMatrix, ForestConfig, ForestModel};
