#![allow(dead_code)]

use genscope::analysis::{synth_corpus, AffineTarget, SyntheticSpec, SyntheticSuite};
use genscope::LabeledCorpus;

/// One suite per center, `count` points each; returns the labeled corpus and
/// the generating blob of every record.
pub fn blobs(centers: &[Vec<f64>], count: usize, spread: f64, seed: u64) -> (LabeledCorpus, Vec<usize>) {
    let k = centers.len();
    let dim = centers[0].len();
    let spec = SyntheticSpec {
        cluster_centers: centers.to_vec(),
        cluster_spread: spread,
        suites: (0..k)
            .map(|c| SyntheticSuite {
                label: format!("B{c}"),
                weights: (0..k).map(|j| if j == c { 1.0 } else { 0.0 }).collect(),
                count,
                spread_scale: 1.0,
            })
            .collect(),
        target_rule: (0..k)
            .map(|_| AffineTarget {
                weights: vec![1.0; dim],
                offset: 0.0,
            })
            .collect(),
        noise_scale: 0.0,
        seed,
        algorithm: "synthetic".into(),
    };
    let out = synth_corpus(&spec).unwrap();
    (out.labeled, out.true_clusters)
}

/// Vertices of a scaled simplex-like arrangement: center `c` sits at
/// `separation` along axis `c`.
pub fn axis_centers(k: usize, dim: usize, separation: f64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|c| (0..dim).map(|d| if d == c { separation } else { 0.0 }).collect())
        .collect()
}

/// Maps every predicted cluster to the truth label it shares the most
/// points with, and reports whether that map is a bijection that recovers
/// the truth exactly.
pub fn same_partition(predicted: &[usize], truth: &[usize]) -> bool {
    use std::collections::HashMap;
    let mut forward: HashMap<usize, usize> = HashMap::new();
    let mut backward: HashMap<usize, usize> = HashMap::new();
    for (&p, &t) in predicted.iter().zip(truth) {
        if *forward.entry(p).or_insert(t) != t || *backward.entry(t).or_insert(p) != p {
            return false;
        }
    }
    true
}
