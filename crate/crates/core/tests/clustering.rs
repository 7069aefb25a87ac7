mod common;

use genscope::clustering::{distortion, select_k, silhouette, KSelectionMethod};
use genscope::kmeans_fit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{axis_centers, blobs, same_partition};

fn blob_means(points: &[Vec<f64>], truth: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &t) in points.iter().zip(truth) {
        counts[t] += 1;
        for (s, v) in sums[t].iter_mut().zip(p) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, c)| s.into_iter().map(|v| v / c as f64).collect())
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn two_planted_blobs_centroids_near_sample_means() {
    let (spread, size) = (0.5, 150);
    let (labeled, truth) = blobs(&[vec![0.0, 0.0], vec![10.0, 0.0]], size, spread, 3);
    let points = labeled.corpus().points();
    let model = kmeans_fit(&points, 2, 9).unwrap();
    assert!(same_partition(&model.assignments, &truth));
    let means = blob_means(&points, &truth, 2);
    let bound = 3.0 * spread / (size as f64).sqrt();
    for c in 0..2 {
        let t = truth[model.assignments.iter().position(|&a| a == c).unwrap()];
        assert!(dist(&model.centroids[c], &means[t]) <= bound);
    }
}

#[test]
fn tight_far_blobs_score_high() {
    let (labeled, truth) = blobs(&[vec![0.0, 0.0], vec![20.0, 0.0]], 60, 0.5, 4);
    let points = labeled.corpus().points();
    assert!(silhouette(&points, &truth).unwrap() > 0.9);
}

#[test]
fn random_labels_on_one_blob_score_near_zero() {
    let (labeled, _) = blobs(&[vec![0.0, 0.0, 0.0]], 300, 1.0, 5);
    let points = labeled.corpus().points();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let labels: Vec<usize> = (0..points.len()).map(|_| rng.random_range(0..3)).collect();
    let s = silhouette(&points, &labels).unwrap();
    assert!((-0.2..=0.2).contains(&s), "silhouette {s}");
}

#[test]
fn silhouette_recovers_three_blobs() {
    let (labeled, truth) = blobs(&axis_centers(3, 3, 10.0), 80, 1.0, 7);
    let points = labeled.corpus().points();
    let (model, report) = select_k(&points, 2, 8, KSelectionMethod::Silhouette, 8).unwrap();
    assert_eq!(report.chosen_k, 3);
    assert!(same_partition(&model.assignments, &truth));
}

#[test]
fn elbow_recovers_four_blobs() {
    let (labeled, truth) = blobs(&axis_centers(4, 4, 10.0), 80, 1.0, 9);
    let points = labeled.corpus().points();
    let (model, report) = select_k(&points, 2, 10, KSelectionMethod::ElbowDistortion, 10).unwrap();
    assert_eq!(report.chosen_k, 4);
    assert!(same_partition(&model.assignments, &truth));
}

#[test]
fn distortion_is_inertia_per_point() {
    let (labeled, _) = blobs(&axis_centers(3, 3, 4.0), 40, 1.5, 11);
    let points = labeled.corpus().points();
    for k in 1..=5 {
        let model = kmeans_fit(&points, k, 12).unwrap();
        let d = distortion(&points, &model).unwrap();
        approx::assert_relative_eq!(d, model.inertia / points.len() as f64, max_relative = 1e-12);
    }
}
