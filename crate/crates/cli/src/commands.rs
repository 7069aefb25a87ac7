use std::path::Path;

use anyhow::{bail, Context, Result};
use genscope::analysis::{evaluate_train_suite, suites_from_selections};
use genscope::clustering::{default_k_range, distortion};
use genscope::coverage::leaf_order;
use genscope::plot::{dendrogram_svg, similarity_heatmap_svg};
use genscope::{
    agglomerate, coverage_matrix, cross_suite_evaluate, generalizability_report, join_targets, kmeans_fit,
    mis_select_suites, normalize_features_with, parse_feature_table, parse_performance_algorithms,
    parse_performance_table, select_k, silhouette, similarity_matrix, single_cluster_suite, synth_corpus,
    ClusteringModel, Corpus, CoverageMatrix, Dendrogram, EvaluationMatrix, ForestConfig, KSelectionMethod,
    KSelectionReport, LabeledCorpus, NormalizationOptions, NormalizationScheme, PerformanceTable, SimilarityMatrix,
    SyntheticSpec, TargetTransform,
};

use crate::artifacts::ArtifactSet;
use crate::config::{KSelectionConfig, PipelineConfig};
use crate::{EvaluateArgs, MisSelectArgs, ReportArgs, SimilarityArgs, SynthArgs};

fn source(path: &Path) -> String {
    path.display().to_string()
}

fn load_corpus(set: &mut ArtifactSet, path: &Path) -> Result<Corpus> {
    let bytes = set.read_input(path)?;
    Ok(parse_feature_table(bytes.as_slice(), &source(path))?)
}

fn require_suites(corpus: &Corpus, path: &Path) -> Result<()> {
    let m = corpus.suite_ids().len();
    if m < 2 {
        bail!("{}: need at least 2 suites, found {m}", path.display());
    }
    Ok(())
}

fn normalize(corpus: &Corpus, scheme: Option<NormalizationScheme>) -> Result<Corpus> {
    Ok(match scheme {
        Some(scheme) => {
            let options = NormalizationOptions {
                scheme,
                fit_suites: None,
            };
            normalize_features_with(corpus, &options)?.0
        }
        None => corpus.clone(),
    })
}

/// Fits the requested fixed k, or searches the configured range (default
/// `[2, min(20, n / 5)]`).
fn cluster(points: &[Vec<f64>], k: &KSelectionConfig, seed: u64) -> Result<(ClusteringModel, KSelectionReport)> {
    k.validate()?;
    let method = k.method();
    if let Some(fixed) = k.fixed_k {
        let model = kmeans_fit(points, fixed, seed)?;
        let score = match method {
            KSelectionMethod::Silhouette => silhouette(points, &model.assignments)?,
            KSelectionMethod::ElbowDistortion => distortion(points, &model)?,
        };
        let report = KSelectionReport {
            method,
            candidate_ks: vec![fixed],
            scores: vec![score],
            chosen_k: fixed,
        };
        return Ok((model, report));
    }
    let n = points.len();
    let (default_lo, default_hi) = default_k_range(n);
    let lo = k.k_min.unwrap_or(default_lo);
    let hi = k.k_max.unwrap_or_else(|| default_hi.max(lo + 1).min(n));
    if lo >= hi {
        bail!("cannot search k in [{lo}, {hi}] with {n} instances; pass a fixed --k");
    }
    Ok(select_k(points, lo, hi, method, seed)?)
}

struct FeatureStage {
    normalized: Corpus,
    model: ClusteringModel,
    selection: KSelectionReport,
    coverage: CoverageMatrix,
    similarity: SimilarityMatrix,
    dendrogram: Dendrogram,
}

fn feature_stage(
    corpus: &Corpus,
    scheme: Option<NormalizationScheme>,
    k: &KSelectionConfig,
    seed: u64,
) -> Result<FeatureStage> {
    let normalized = normalize(corpus, scheme)?;
    let (model, selection) = cluster(&normalized.points(), k, seed)?;
    let coverage = coverage_matrix(&normalized.suite_labels(), &model.assignments, model.k)?;
    let similarity = similarity_matrix(&coverage)?;
    let dendrogram = agglomerate(&similarity)?;
    Ok(FeatureStage {
        normalized,
        model,
        selection,
        coverage,
        similarity,
        dendrogram,
    })
}

fn add_similarity(set: &mut ArtifactSet, similarity: &SimilarityMatrix, dendrogram: &Dendrogram) {
    set.add("similarity.csv", similarity.to_csv_string());
    set.add(
        "similarity.svg",
        similarity_heatmap_svg(similarity, &leaf_order(dendrogram)),
    );
    set.add("dendrogram.svg", dendrogram_svg(dendrogram));
}

fn add_feature_stage(set: &mut ArtifactSet, stage: &FeatureStage) {
    set.chosen_k = Some(stage.model.k);
    set.add("coverage.csv", stage.coverage.to_csv_string());
    add_similarity(set, &stage.similarity, &stage.dendrogram);
    set.add("kselection.csv", stage.selection.to_csv_string());
    let mut model = stage.model.to_json();
    model.push('\n');
    set.add("clustering.json", model);
}

/// Algorithms to evaluate: the requested ones, or every algorithm in the file.
fn algorithms(bytes: &[u8], path: &Path, requested: &[String]) -> Result<Vec<String>> {
    let available = parse_performance_algorithms(bytes, &source(path))?;
    if requested.is_empty() {
        if available.is_empty() {
            bail!("{}: no performance rows", path.display());
        }
        return Ok(available);
    }
    for r in requested {
        if !available.contains(r) {
            bail!(
                "{}: no entries for algorithm {r:?} (found {})",
                path.display(),
                available.join(", ")
            );
        }
    }
    Ok(requested.to_vec())
}

fn single_algorithm(bytes: &[u8], path: &Path, requested: Option<&str>) -> Result<String> {
    let requested: Vec<String> = requested.into_iter().map(str::to_string).collect();
    let mut algs = algorithms(bytes, path, &requested)?;
    if algs.len() != 1 {
        bail!(
            "{} holds {} algorithms ({}); choose one with --algorithm",
            path.display(),
            algs.len(),
            algs.join(", ")
        );
    }
    Ok(algs.remove(0))
}

fn join(corpus: &Corpus, perf: &PerformanceTable, transform: TargetTransform) -> Result<LabeledCorpus> {
    let labeled = join_targets(corpus, perf, transform)?;
    if labeled.unmatched() > 0 {
        eprintln!(
            "warning: {} instance(s) have no {:?} performance entry and were left out",
            labeled.unmatched(),
            perf.algorithm()
        );
    }
    Ok(labeled)
}

pub fn similarity(args: &SimilarityArgs, seed: u64) -> Result<ArtifactSet> {
    let mut set = ArtifactSet::new("similarity");
    set.seed = Some(seed);
    if let Some(path) = &args.coverage {
        let bytes = set.read_input(path)?;
        let coverage = CoverageMatrix::parse_csv(bytes.as_slice(), &source(path), Some(args.coverage_tolerance))?;
        if coverage.suite_ids().len() < 2 {
            bail!(
                "{}: need at least 2 suites, found {}",
                path.display(),
                coverage.suite_ids().len()
            );
        }
        let similarity = similarity_matrix(&coverage)?;
        let dendrogram = agglomerate(&similarity)?;
        set.chosen_k = Some(coverage.k());
        set.add("coverage.csv", coverage.to_csv_string());
        add_similarity(&mut set, &similarity, &dendrogram);
        return Ok(set);
    }
    let path = args.features.as_deref().context("pass --features or --coverage")?;
    let corpus = load_corpus(&mut set, path)?;
    require_suites(&corpus, path)?;
    let k = args.k.apply(KSelectionConfig::default());
    let stage = feature_stage(&corpus, args.normalization.scheme(), &k, seed)?;
    add_feature_stage(&mut set, &stage);
    Ok(set)
}

pub fn evaluate(args: &EvaluateArgs, seed: u64) -> Result<ArtifactSet> {
    let mut set = ArtifactSet::new("evaluate");
    set.seed = Some(seed);
    let corpus = load_corpus(&mut set, &args.features)?;
    let corpus = normalize(&corpus, args.normalization.scheme())?;
    let perf_bytes = set.read_input(&args.performance)?;
    let perf_source = source(&args.performance);
    let forest = ForestConfig {
        seed,
        ..args.forest.apply(ForestConfig::default())
    };
    forest.validate()?;

    let Some(model_path) = &args.clustering else {
        if args.cluster_index.is_some() {
            bail!("--cluster-index needs --clustering");
        }
        require_suites(&corpus, &args.features)?;
        if args.algorithm.len() > 1 {
            bail!("mdae.csv covers one algorithm; pass a single --algorithm");
        }
        let alg = single_algorithm(
            &perf_bytes,
            &args.performance,
            args.algorithm.first().map(String::as_str),
        )?;
        let perf = parse_performance_table(perf_bytes.as_slice(), &perf_source, &alg)?;
        let labeled = join(&corpus, &perf, args.target_transform)?;
        let eval = cross_suite_evaluate(&labeled, &forest)?;
        set.add("mdae.csv", eval.to_csv_string());
        return Ok(set);
    };

    let index = args.cluster_index.context("--clustering needs --cluster-index")?;
    let model_bytes = set.read_input(model_path)?;
    let model_text = String::from_utf8(model_bytes).with_context(|| format!("{}: not UTF-8", model_path.display()))?;
    let model = ClusteringModel::from_json(&model_text).with_context(|| format!("{}", model_path.display()))?;
    let extended = single_cluster_suite(&corpus, &model, index, &args.cluster_label)?;
    let originals = corpus
        .records()
        .iter()
        .zip(&model.assignments)
        .filter(|(_, &a)| a == index);
    let copies = &extended.records()[corpus.len()..];

    let mut per_algorithm = Vec::new();
    for alg in algorithms(&perf_bytes, &args.performance, &args.algorithm)? {
        let perf = parse_performance_table(perf_bytes.as_slice(), &perf_source, &alg)?;
        let mut entries: Vec<((String, String), f64)> =
            perf.entries().map(|((s, i), &p)| ((s.clone(), i.clone()), p)).collect();
        for ((src, _), copy) in originals.clone().zip(copies) {
            if let Some(p) = perf.get(&src.suite_id, &src.instance_id) {
                entries.push(((copy.suite_id.clone(), copy.instance_id.clone()), p));
            }
        }
        let perf = PerformanceTable::new(alg, entries)?;
        per_algorithm.push(join(&extended, &perf, args.target_transform)?);
    }
    let table = evaluate_train_suite(&per_algorithm, &args.cluster_label, &forest)?;
    set.add("bs6_eval.csv", table.to_csv_string());
    Ok(set)
}

pub fn report(args: &ReportArgs) -> Result<ArtifactSet> {
    let mut set = ArtifactSet::new("report");
    let sim_bytes = set.read_input(&args.similarity)?;
    let similarity = SimilarityMatrix::parse_csv(sim_bytes.as_slice(), &source(&args.similarity))?;
    let eval_bytes = set.read_input(&args.mdae)?;
    let eval = EvaluationMatrix::parse_csv(eval_bytes.as_slice(), &source(&args.mdae))?;
    set.add("report.json", generalizability_report(&similarity, &eval)?.to_json());
    Ok(set)
}

pub fn synth(args: &SynthArgs, seed: Option<u64>) -> Result<ArtifactSet> {
    let mut set = ArtifactSet::new("synth");
    let bytes = set.read_input(&args.spec)?;
    let mut spec: SyntheticSpec =
        serde_json::from_slice(&bytes).with_context(|| format!("{}: invalid synthetic spec", args.spec.display()))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    set.seed = Some(spec.seed);
    let out = synth_corpus(&spec)?;
    set.add("features.csv", out.labeled.corpus().to_csv_string());
    set.add("performance.csv", out.labeled.to_performance_csv()?);
    Ok(set)
}

pub fn mis_select(args: &MisSelectArgs, seed: u64) -> Result<ArtifactSet> {
    let mut set = ArtifactSet::new("mis-select");
    set.seed = Some(seed);
    let corpus = load_corpus(&mut set, &args.features)?;
    let graph_corpus = normalize(&corpus, args.normalization.scheme())?;
    let runs = mis_select_suites(&graph_corpus, args.threshold, args.runs, seed)?;
    let suites = suites_from_selections(&corpus, &runs, &args.prefix)?;
    set.add("features.csv", suites.to_csv_string());
    if let Some(path) = &args.performance {
        let bytes = set.read_input(path)?;
        let sources: Vec<_> = runs.iter().flatten().map(|&i| &corpus.records()[i]).collect();
        let mut csv = String::new();
        for alg in algorithms(&bytes, path, &[])? {
            let perf = parse_performance_table(bytes.as_slice(), &source(path), &alg)?;
            let entries: Vec<((String, String), f64)> = suites
                .records()
                .iter()
                .zip(&sources)
                .filter_map(|(rec, src)| {
                    perf.get(&src.suite_id, &src.instance_id)
                        .map(|p| ((rec.suite_id.clone(), rec.instance_id.clone()), p))
                })
                .collect();
            if entries.is_empty() {
                continue;
            }
            let labeled = join_targets(&suites, &PerformanceTable::new(alg, entries)?, TargetTransform::Raw)?;
            let block = labeled.to_performance_csv()?;
            let body = if csv.is_empty() {
                &block[..]
            } else {
                &block[block.find('\n').map_or(0, |i| i + 1)..]
            };
            csv.push_str(body);
        }
        if csv.is_empty() {
            bail!("{}: no performance entries for the selected instances", path.display());
        }
        set.add("performance.csv", csv);
    }
    Ok(set)
}

pub fn pipeline(config: &PipelineConfig) -> Result<ArtifactSet> {
    config.validate()?;
    let features = config.features.as_deref().expect("validated");
    let performance = config.performance.as_deref().expect("validated");
    let seed = config.seed.expect("validated");
    let mut set = ArtifactSet::new("pipeline");
    set.seed = Some(seed);
    let mut recorded = config.clone();
    recorded.output_dir = None;
    recorded.forest.seed = seed;
    set.settings = Some(serde_json::to_value(&recorded).expect("config serializes"));

    let corpus = load_corpus(&mut set, features)?;
    require_suites(&corpus, features)?;
    let scheme = config.normalize.then_some(config.normalization_scheme);
    let stage = feature_stage(&corpus, scheme, &config.k_selection, seed)?;

    let perf_bytes = set.read_input(performance)?;
    let alg = single_algorithm(&perf_bytes, performance, config.algorithm.as_deref())?;
    let perf = parse_performance_table(perf_bytes.as_slice(), &source(performance), &alg)?;
    let labeled = join(&stage.normalized, &perf, config.target_transform)?;
    let forest = ForestConfig {
        seed,
        ..config.forest.clone()
    };
    let eval = cross_suite_evaluate(&labeled, &forest)?;
    let report = generalizability_report(&stage.similarity, &eval)?;

    add_feature_stage(&mut set, &stage);
    set.add("mdae.csv", eval.to_csv_string());
    set.add("report.json", report.to_json());
    Ok(set)
}
