//! K-Means over the union of instance feature vectors, with the number of
//! clusters chosen by mean silhouette or by the elbow of the distortion
//! curve.
//!
//! All distances are squared Euclidean except inside [`silhouette`], which
//! uses plain Euclidean distance. Ties between equally near centroids go to
//! the lower centroid index.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    /// Independent k-means++ restarts; the lowest-inertia run wins.
    pub n_init: usize,
    pub max_iter: usize,
    /// Lloyd stops once no centroid moves farther than this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            n_init: 10,
            max_iter: 300,
            tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances of every point to its centroid.
    pub inertia: f64,
    pub seed: u64,
    #[serde(skip)]
    trace: Vec<f64>,
}

impl ClusteringModel {
    /// Inertia after every assignment step of the winning Lloyd run.
    pub fn inertia_trace(&self) -> &[f64] {
        &self.trace
    }

    pub fn dimension(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ClusteringModel =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("clustering model: {e}")))?;
        if model.k == 0 || model.centroids.len() != model.k {
            return Err(Error::invalid("clustering model: centroid count differs from k"));
        }
        if model.assignments.iter().any(|&a| a >= model.k) {
            return Err(Error::invalid("clustering model: assignment out of range"));
        }
        Ok(model)
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let dim = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::invalid("no points to cluster"))?;
    if dim == 0 {
        return Err(Error::invalid("points have zero dimensions"));
    }
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("points have differing dimensions"));
    }
    Ok(dim)
}

/// Number of distinct vectors among `points` (bitwise comparison).
pub fn distinct_count(points: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = points
        .iter()
        .map(|p| p.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

fn kmeans_plus_plus<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            // guard against falling off the end through rounding
            if d2[chosen] == 0.0 {
                chosen = d2
                    .iter()
                    .rposition(|&d| d > 0.0)
                    .expect("positive total has a positive term");
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

struct LloydRun {
    centroids: Vec<Vec<f64>>,
    assignments: Vec<usize>,
    inertia: f64,
    trace: Vec<f64>,
}

fn assign_all(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    points.iter().map(|p| nearest(p, centroids)).unzip()
}

/// Lloyd iterations from the given centroids. Requires at least `k`
/// distinct points so an empty cluster can always be reseeded.
fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, config: &KMeansConfig) -> LloydRun {
    let k = centroids.len();
    let dim = points[0].len();
    let mut trace = Vec::new();
    let mut iter = 0;
    loop {
        let (mut labels, mut dists) = assign_all(points, &centroids);
        // Reseed empty clusters at the point farthest from its centroid.
        for _ in 0..k {
            let mut sizes = vec![0usize; k];
            for &l in &labels {
                sizes[l] += 1;
            }
            let Some(empty) = sizes.iter().position(|&s| s == 0) else {
                break;
            };
            let mut far = 0;
            for i in 1..points.len() {
                if dists[i] > dists[far] {
                    far = i;
                }
            }
            centroids[empty] = points[far].clone();
            (labels, dists) = assign_all(points, &centroids);
        }
        let inertia: f64 = dists.iter().sum();
        trace.push(inertia);
        if iter >= config.max_iter {
            return LloydRun {
                centroids,
                assignments: labels,
                inertia,
                trace,
            };
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut shift = 0.0f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let mean: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq_dist(&mean, &centroids[c]).sqrt());
            centroids[c] = mean;
        }
        iter += 1;
        if shift < config.tol {
            // one more assignment pass so labels match the final centroids
            let (labels, dists) = assign_all(points, &centroids);
            let sizes_ok = {
                let mut seen = vec![false; k];
                labels.iter().for_each(|&l| seen[l] = true);
                seen.iter().all(|&s| s)
            };
            if sizes_ok {
                let inertia: f64 = dists.iter().sum();
                trace.push(inertia);
                return LloydRun {
                    centroids,
                    assignments: labels,
                    inertia,
                    trace,
                };
            }
        }
    }
}

fn validate_k(points: &[Vec<f64>], k: usize) -> Result<()> {
    check_points(points)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the number of points ({})",
            points.len()
        )));
    }
    let distinct = distinct_count(points);
    if k > distinct {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the number of distinct points ({distinct})"
        )));
    }
    Ok(())
}

/// K-Means with the default configuration.
pub fn kmeans_fit(points: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusteringModel> {
    kmeans_fit_with(points, k, seed, &KMeansConfig::default())
}

/// Best of `config.n_init` k-means++ restarts by inertia. Restarts run in
/// parallel, each on its own RNG stream; the result equals a sequential run.
pub fn kmeans_fit_with(points: &[Vec<f64>], k: usize, seed: u64, config: &KMeansConfig) -> Result<ClusteringModel> {
    validate_k(points, k)?;
    if config.n_init == 0 {
        return Err(Error::invalid("n_init must be at least 1"));
    }
    let runs: Vec<LloydRun> = (0..config.n_init)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, rng::KMEANS_RESTART, r as u64);
            let init = kmeans_plus_plus(points, k, &mut rng);
            lloyd(points, init, config)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.inertia < a.inertia { b } else { a })
        .expect("n_init >= 1");
    Ok(ClusteringModel {
        k,
        centroids: best.centroids,
        assignments: best.assignments,
        inertia: best.inertia,
        seed,
        trace: best.trace,
    })
}

/// A single Lloyd run from caller-supplied centroids.
pub fn kmeans_from_centroids(
    points: &[Vec<f64>],
    centroids: Vec<Vec<f64>>,
    seed: u64,
    config: &KMeansConfig,
) -> Result<ClusteringModel> {
    let dim = check_points(points)?;
    if centroids.iter().any(|c| c.len() != dim) {
        return Err(Error::invalid("centroid dimension differs from points"));
    }
    let k = centroids.len();
    validate_k(points, k)?;
    let run = lloyd(points, centroids, config);
    Ok(ClusteringModel {
        k,
        centroids: run.centroids,
        assignments: run.assignments,
        inertia: run.inertia,
        seed,
        trace: run.trace,
    })
}

/// Refines a `k`-cluster model into `k + 1` clusters by adding the point
/// worst served by `model` as a new centroid. The result never has higher
/// inertia than `model`.
pub fn grow(points: &[Vec<f64>], model: &ClusteringModel, config: &KMeansConfig) -> Result<ClusteringModel> {
    check_dims(points, model)?;
    let (_, dists) = assign_all(points, &model.centroids);
    let mut worst = 0;
    for i in 1..points.len() {
        if dists[i] > dists[worst] {
            worst = i;
        }
    }
    let mut init = model.centroids.clone();
    init.push(points[worst].clone());
    kmeans_from_centroids(points, init, model.seed, config)
}

fn check_dims(points: &[Vec<f64>], model: &ClusteringModel) -> Result<()> {
    let dim = model.dimension();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::invalid(format!(
            "dimension mismatch: point has {} values, centroids have {dim}",
            p.len()
        )));
    }
    Ok(())
}

/// Nearest-centroid index for each point.
pub fn assign(points: &[Vec<f64>], model: &ClusteringModel) -> Result<Vec<usize>> {
    check_dims(points, model)?;
    Ok(points.iter().map(|p| nearest(p, &model.centroids).0).collect())
}

/// Mean squared distance of each point to its nearest centroid.
pub fn distortion(points: &[Vec<f64>], model: &ClusteringModel) -> Result<f64> {
    check_dims(points, model)?;
    if points.is_empty() {
        return Err(Error::invalid("distortion of an empty point set"));
    }
    let total: f64 = points.iter().map(|p| nearest(p, &model.centroids).1).sum();
    Ok(total / points.len() as f64)
}

/// Mean silhouette coefficient. Points alone in their cluster score 0.
pub fn silhouette(points: &[Vec<f64>], assignments: &[usize]) -> Result<f64> {
    check_points(points)?;
    if points.len() != assignments.len() {
        return Err(Error::invalid("points and assignments differ in length"));
    }
    let labels = assignments.iter().copied().max().unwrap_or(0) + 1;
    let mut sizes = vec![0usize; labels];
    for &a in assignments {
        sizes[a] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::invalid("silhouette undefined for k=1"));
    }
    let scores: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let own = assignments[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; labels];
            for (j, p) in points.iter().enumerate() {
                if j != i {
                    sums[assignments[j]] += sq_dist(&points[i], p).sqrt();
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..labels)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / points.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KSelectionMethod {
    Silhouette,
    ElbowDistortion,
}

impl std::str::FromStr for KSelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "silhouette" => Ok(KSelectionMethod::Silhouette),
            "elbow" | "elbow-distortion" => Ok(KSelectionMethod::ElbowDistortion),
            other => Err(Error::invalid(format!(
                "unknown k selection method {other:?} (expected silhouette or elbow)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSelectionReport {
    pub method: KSelectionMethod,
    pub candidate_ks: Vec<usize>,
    /// Mean silhouette or distortion, one per candidate.
    pub scores: Vec<f64>,
    pub chosen_k: usize,
}

impl KSelectionReport {
    /// `kselection.csv`: `k,<score name>,chosen`.
    pub fn to_csv_string(&self) -> String {
        let name = match self.method {
            KSelectionMethod::Silhouette => "silhouette",
            KSelectionMethod::ElbowDistortion => "distortion",
        };
        let mut out = format!("k,{name},chosen\n");
        for (&k, &s) in self.candidate_ks.iter().zip(&self.scores) {
            out.push_str(&format!(
                "{k},{},{}\n",
                crate::format::fmt6(s),
                u8::from(k == self.chosen_k)
            ));
        }
        out
    }
}

/// The search range used when none is given: `[2, min(20, n / 5)]`.
pub fn default_k_range(point_count: usize) -> (usize, usize) {
    (2, 20.min(point_count / 5))
}

/// Picks k in `[k_min, k_max]` and returns the model refit at the chosen k.
///
/// Candidates above the number of distinct points are skipped. The elbow
/// method scores each k by distortion along a nested path (each k keeps the
/// better of a fresh fit and [`grow`] of the previous model, so the curve is
/// non-increasing) and picks the largest discrete second difference.
pub fn select_k(
    points: &[Vec<f64>],
    k_min: usize,
    k_max: usize,
    method: KSelectionMethod,
    seed: u64,
) -> Result<(ClusteringModel, KSelectionReport)> {
    select_k_with(points, k_min, k_max, method, seed, &KMeansConfig::default())
}

pub fn select_k_with(
    points: &[Vec<f64>],
    k_min: usize,
    k_max: usize,
    method: KSelectionMethod,
    seed: u64,
    config: &KMeansConfig,
) -> Result<(ClusteringModel, KSelectionReport)> {
    check_points(points)?;
    if k_min < 2 || k_min >= k_max || k_max > points.len() {
        return Err(Error::invalid(format!(
            "invalid k range [{k_min}, {k_max}] for {} points (need 2 <= k_min < k_max <= points)",
            points.len()
        )));
    }
    let distinct = distinct_count(points);
    let candidate_ks: Vec<usize> = (k_min..=k_max.min(distinct)).collect();
    if candidate_ks.is_empty() {
        return Err(Error::invalid(format!(
            "only {distinct} distinct points; cannot form {k_min} clusters"
        )));
    }

    let (scores, chosen_k) = match method {
        KSelectionMethod::Silhouette => {
            let mut scores = Vec::with_capacity(candidate_ks.len());
            for &k in &candidate_ks {
                let model = kmeans_fit_with(points, k, seed, config)?;
                scores.push(silhouette(points, &model.assignments)?);
            }
            let mut best = 0;
            for i in 1..scores.len() {
                if scores[i] > scores[best] {
                    best = i;
                }
            }
            (scores, candidate_ks[best])
        }
        KSelectionMethod::ElbowDistortion => {
            let mut scores = Vec::with_capacity(candidate_ks.len());
            let mut prev: Option<ClusteringModel> = None;
            for &k in &candidate_ks {
                let fresh = kmeans_fit_with(points, k, seed, config)?;
                let model = match prev.take() {
                    Some(p) => {
                        let grown = grow(points, &p, config)?;
                        if grown.inertia < fresh.inertia {
                            grown
                        } else {
                            fresh
                        }
                    }
                    None => fresh,
                };
                scores.push(model.inertia / points.len() as f64);
                prev = Some(model);
            }
            (scores.clone(), candidate_ks[elbow_index(&scores)])
        }
    };

    let model = kmeans_fit_with(points, chosen_k, seed, config)?;
    Ok((
        model,
        KSelectionReport {
            method,
            candidate_ks,
            scores,
            chosen_k,
        },
    ))
}

/// Index of the largest second difference `d[i-1] - 2 d[i] + d[i+1]` over
/// interior points, ties to the lowest index. With fewer than three values
/// the curve has no interior and the first index is returned.
pub fn elbow_index(curve: &[f64]) -> usize {
    if curve.len() < 3 {
        return 0;
    }
    let mut best = 1;
    let mut best_val = f64::NEG_INFINITY;
    for i in 1..curve.len() - 1 {
        let v = curve[i - 1] - 2.0 * curve[i] + curve[i + 1];
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    best
}
