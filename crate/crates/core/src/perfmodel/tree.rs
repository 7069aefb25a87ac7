use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ForestConfig;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A CART regression tree stored as a flat node array; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    /// Single-leaf tree predicting `value` everywhere.
    pub fn constant(value: f64) -> Self {
        RegressionTree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict_one(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

struct BestSplit {
    cost: f64,
    feature: usize,
    threshold: f64,
    /// number of samples going left in the sorted order
    left_len: usize,
}

/// Fits one tree on all rows of `features`.
pub fn fit_tree<R: Rng>(
    features: &[Vec<f64>],
    targets: &[f64],
    config: &ForestConfig,
    rng: &mut R,
) -> Result<RegressionTree> {
    if features.is_empty() || targets.is_empty() {
        return Err(Error::invalid("cannot fit a tree on empty input"));
    }
    let sample: Vec<usize> = (0..features.len()).collect();
    fit_tree_on(features, targets, sample, config, rng)
}

/// Fits one tree on the multiset of rows `sample` (indices may repeat, as
/// in a bootstrap resample).
pub(crate) fn fit_tree_on<R: Rng>(
    features: &[Vec<f64>],
    targets: &[f64],
    sample: Vec<usize>,
    config: &ForestConfig,
    rng: &mut R,
) -> Result<RegressionTree> {
    if features.len() != targets.len() {
        return Err(Error::invalid(format!(
            "{} feature rows for {} targets",
            features.len(),
            targets.len()
        )));
    }
    let width = features.first().map_or(0, Vec::len);
    if width == 0 || features.iter().any(|r| r.len() != width) {
        return Err(Error::invalid("feature matrix must be rectangular and non-empty"));
    }
    if sample.is_empty() {
        return Err(Error::invalid("cannot fit a tree on empty input"));
    }
    let try_features = config.candidate_feature_count(width);

    let mut nodes = Vec::new();
    // (node slot, sample indices, depth)
    let mut stack = vec![(0usize, sample, 0usize)];
    nodes.push(Node::Leaf { value: 0.0 });
    while let Some((slot, idx, depth)) = stack.pop() {
        let mean = idx.iter().map(|&i| targets[i]).sum::<f64>() / idx.len() as f64;
        let first = targets[idx[0]];
        let constant = idx.iter().all(|&i| targets[i] == first);
        let depth_ok = config.max_depth.is_none_or(|d| depth < d);
        let split = if constant || idx.len() < config.min_samples_split || !depth_ok {
            None
        } else {
            best_split(
                features,
                targets,
                &idx,
                width,
                try_features,
                config.min_samples_leaf,
                rng,
            )
        };
        match split {
            None => nodes[slot] = Node::Leaf { value: mean },
            Some((best, sorted)) => {
                let (l, r) = sorted.split_at(best.left_len);
                let left = nodes.len();
                nodes.push(Node::Leaf { value: 0.0 });
                let right = nodes.len();
                nodes.push(Node::Leaf { value: 0.0 });
                nodes[slot] = Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left,
                    right,
                };
                stack.push((right, r.to_vec(), depth + 1));
                stack.push((left, l.to_vec(), depth + 1));
            }
        }
    }
    Ok(RegressionTree { nodes })
}

/// Lowest weighted child squared error over candidate features; ties go to
/// the lower feature index, then the lower threshold. Features are visited in
/// a random order; past the first `try_features` the search continues only
/// until some valid split has been found.
fn best_split<R: Rng>(
    features: &[Vec<f64>],
    targets: &[f64],
    idx: &[usize],
    width: usize,
    try_features: usize,
    min_leaf: usize,
    rng: &mut R,
) -> Option<(BestSplit, Vec<usize>)> {
    let n = idx.len();
    if n < 2 * min_leaf.max(1) {
        return None;
    }
    let mut order: Vec<usize> = (0..width).collect();
    if try_features < width {
        order.shuffle(rng);
    }
    let mean = idx.iter().map(|&i| targets[i]).sum::<f64>() / n as f64;

    let mut best: Option<(BestSplit, Vec<usize>)> = None;
    let mut sorted = idx.to_vec();
    for (visited, &f) in order.iter().enumerate() {
        if visited >= try_features && best.is_some() {
            break;
        }
        sorted.sort_by(|&a, &b| features[a][f].total_cmp(&features[b][f]).then(a.cmp(&b)));
        let total: f64 = sorted.iter().map(|&i| targets[i] - mean).sum();
        let total_sq: f64 = sorted.iter().map(|&i| (targets[i] - mean).powi(2)).sum();
        let mut sum_l = 0.0;
        let mut sq_l = 0.0;
        for p in 1..n {
            let y = targets[sorted[p - 1]] - mean;
            sum_l += y;
            sq_l += y * y;
            if p < min_leaf || n - p < min_leaf {
                continue;
            }
            let lo = features[sorted[p - 1]][f];
            let hi = features[sorted[p]][f];
            if lo >= hi {
                continue;
            }
            let (nl, nr) = (p as f64, (n - p) as f64);
            let sum_r = total - sum_l;
            let sq_r = total_sq - sq_l;
            let cost = (sq_l - sum_l * sum_l / nl) + (sq_r - sum_r * sum_r / nr);
            let mut threshold = lo + (hi - lo) / 2.0;
            if threshold >= hi {
                threshold = lo;
            }
            let better = match &best {
                None => true,
                Some((b, _)) => cost < b.cost || (cost == b.cost && (f, threshold) < (b.feature, b.threshold)),
            };
            if better {
                best = Some((
                    BestSplit {
                        cost,
                        feature: f,
                        threshold,
                        left_len: p,
                    },
                    sorted.clone(),
                ));
            }
        }
    }
    best
}
