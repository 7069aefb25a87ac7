//! Deterministic inputs for the benchmarks.

use genscope::analysis::{AffineTarget, SyntheticSuite};
use genscope::{synth_corpus, LabeledCorpus, SyntheticSpec};

/// `suites` suites of `per_suite` instances over `clusters` Gaussian blobs in
/// `dim` dimensions. Suite `s` weights cluster `s % clusters` three times as
/// heavily as each other cluster.
pub fn corpus(suites: usize, per_suite: usize, clusters: usize, dim: usize, seed: u64) -> LabeledCorpus {
    assert!(clusters <= dim, "blob centers sit on coordinate axes");
    let spec = SyntheticSpec {
        cluster_centers: (0..clusters)
            .map(|c| (0..dim).map(|d| if d == c { 8.0 } else { 0.0 }).collect())
            .collect(),
        cluster_spread: 1.0,
        suites: (0..suites)
            .map(|s| SyntheticSuite {
                label: format!("S{s}"),
                weights: (0..clusters)
                    .map(|c| (if c == s % clusters { 3.0 } else { 1.0 }) / (clusters as f64 + 2.0))
                    .collect(),
                count: per_suite,
                spread_scale: 1.0,
            })
            .collect(),
        target_rule: (0..clusters)
            .map(|c| AffineTarget {
                weights: (0..dim).map(|d| ((c + d) % 3) as f64 - 1.0).collect(),
                offset: 10.0 * c as f64,
            })
            .collect(),
        noise_scale: 0.1,
        seed,
        algorithm: "bench".into(),
    };
    synth_corpus(&spec).expect("valid bench spec").labeled
}

#[cfg(test)]
mod tests {
    #[test]
    fn corpus_has_requested_shape() {
        let c = super::corpus(3, 20, 2, 4, 1);
        assert_eq!(c.corpus().len(), 60);
        assert_eq!(c.corpus().suite_ids().len(), 3);
    }
}
