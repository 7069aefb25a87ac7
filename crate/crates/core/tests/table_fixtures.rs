//! Frozen oracles for the shipped coverage tables. Expected cosines and
//! linkage heights were computed independently (numpy, scipy average
//! linkage on 1 - cosine) and are hard-coded here.

use std::path::PathBuf;

use approx::assert_abs_diff_eq;
use genscope::coverage::leaf_labels;
use genscope::{agglomerate, leaf_order, similarity_matrix, CoverageMatrix, SimilarityMatrix};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn table1() -> SimilarityMatrix {
    let cov = CoverageMatrix::load_csv(fixture("table1_coverage.csv"), Some(0.02)).unwrap();
    similarity_matrix(&cov).unwrap()
}

fn table2() -> SimilarityMatrix {
    let cov = CoverageMatrix::load_csv(fixture("table2_coverage.csv"), Some(0.02)).unwrap();
    similarity_matrix(&cov).unwrap()
}

const TABLE1_PAIRS: [(&str, &str, f64); 10] = [
    ("BBOB", "CEC2013", 0.109193),
    ("BBOB", "CEC2014", 0.103301),
    ("BBOB", "CEC2015", 0.118260),
    ("BBOB", "CEC2017", 0.095495),
    ("CEC2013", "CEC2014", 0.835512),
    ("CEC2013", "CEC2015", 0.541132),
    ("CEC2013", "CEC2017", 0.761299),
    ("CEC2014", "CEC2015", 0.817152),
    ("CEC2014", "CEC2017", 0.930211),
    ("CEC2015", "CEC2017", 0.876809),
];

const TABLE2_PAIRS: [(&str, &str, f64); 10] = [
    ("BS1", "BS2", 0.985207),
    ("BS1", "BS3", 0.983313),
    ("BS1", "BS4", 0.988241),
    ("BS1", "BS5", 0.985281),
    ("BS2", "BS3", 0.999624),
    ("BS2", "BS4", 0.992432),
    ("BS2", "BS5", 0.999647),
    ("BS3", "BS4", 0.991233),
    ("BS3", "BS5", 0.998912),
    ("BS4", "BS5", 0.989935),
];

#[test]
fn table1_cosines_match_oracle() {
    let sim = table1();
    for (a, b, want) in TABLE1_PAIRS {
        assert_abs_diff_eq!(sim.get(a, b).unwrap(), want, epsilon = 1e-6);
        assert_eq!(sim.get(a, b), sim.get(b, a));
    }
    assert_abs_diff_eq!(sim.get("BBOB", "CEC2013").unwrap(), 0.109, epsilon = 0.005);
}

#[test]
fn table1_qualitative_claims() {
    let sim = table1();
    for (a, b, _) in TABLE1_PAIRS {
        let v = sim.get(a, b).unwrap();
        if a == "BBOB" {
            assert!(v < 0.2, "{a}-{b} = {v}");
        } else {
            assert!(v > 0.5, "{a}-{b} = {v}");
        }
    }
}

#[test]
fn table1_linkage_matches_oracle() {
    let d = agglomerate(&table1()).unwrap();
    let want = [
        (2, 4, 0.06978913, 2),
        (3, 5, 0.15301951, 3),
        (1, 6, 0.28735247, 4),
        (0, 7, 0.89343771, 5),
    ];
    assert_eq!(d.merges.len(), want.len());
    for (m, (l, r, h, n)) in d.merges.iter().zip(want) {
        assert_eq!((m.left, m.right, m.size), (l, r, n));
        assert_abs_diff_eq!(m.distance, h, epsilon = 1e-7);
    }
    assert_eq!(leaf_labels(&d), ["BBOB", "CEC2013", "CEC2015", "CEC2014", "CEC2017"]);
    let order = leaf_order(&d);
    assert!(order[0] == 0 || order[4] == 0, "BBOB must sit at an extreme");
}

#[test]
fn table2_cosines_match_oracle() {
    let sim = table2();
    for (a, b, want) in TABLE2_PAIRS {
        let v = sim.get(a, b).unwrap();
        assert_abs_diff_eq!(v, want, epsilon = 1e-6);
        assert!(v > 0.98);
    }
}

#[test]
fn rounded_table_needs_explicit_renormalization() {
    assert!(CoverageMatrix::load_csv(fixture("table2_coverage.csv"), None).is_err());
    assert!(CoverageMatrix::load_csv(fixture("table1_coverage.csv"), None).is_ok());
}
