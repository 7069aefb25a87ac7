mod common;

use std::fs;

use common::*;

const PIPELINE_ARTIFACTS: [&str; 9] = [
    "clustering.json",
    "coverage.csv",
    "dendrogram.svg",
    "kselection.csv",
    "manifest.json",
    "mdae.csv",
    "report.json",
    "similarity.csv",
    "similarity.svg",
];

fn pipeline_args<'a>(features: &'a str, performance: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        "pipeline",
        "--features",
        features,
        "--performance",
        performance,
        "--seed",
        "5",
        "--trees",
        "20",
        "--out",
        out,
    ]
}

#[test]
fn pipeline_writes_every_artifact_with_matching_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let (f, p) = synth_data(&small_spec(dir.path(), 60), dir.path());
    let out = dir.path().join("run");
    genscope_ok(pipeline_args(
        f.to_str().unwrap(),
        p.to_str().unwrap(),
        out.to_str().unwrap(),
    ));
    let files = dir_contents(&out);
    assert_eq!(files.keys().map(String::as_str).collect::<Vec<_>>(), PIPELINE_ARTIFACTS);
    let m = manifest(&out);
    assert_eq!(m["command"], "pipeline");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["chosen_k"], 3);
    for (name, bytes) in &files {
        if name != "manifest.json" {
            let digest = hex::encode(<sha2::Sha256 as sha2::Digest>::digest(bytes));
            assert_eq!(m["artifacts"][name], digest, "{name}");
        }
    }
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(m["settings"]["forest"]["tree_count"], 20);

    let (rows, cols, mdae) = read_table(&out.join("mdae.csv"));
    assert_eq!(rows, ["A", "B", "C"]);
    assert_eq!(cols, ["A", "B", "C", "train"]);
    for (i, row) in mdae.iter().enumerate() {
        assert_eq!(row[i], row[3]);
    }
    let report: serde_json::Value = serde_json::from_slice(&files["report.json"]).unwrap();
    assert_eq!(report["suites"].as_array().unwrap().len(), 3);
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (f, p) = synth_data(&small_spec(dir.path(), 40), dir.path());
    let (f, p) = (f.to_str().unwrap(), p.to_str().unwrap());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    genscope_ok(pipeline_args(f, p, a.to_str().unwrap()));
    let mut args = pipeline_args(f, p, b.to_str().unwrap());
    args.extend(["--threads", "1"]);
    genscope_ok(args);
    assert_eq!(dir_contents(&a), dir_contents(&b));
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (f, p) = synth_data(&small_spec(dir.path(), 40), dir.path());
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        r#"{"features": "data/features.csv", "performance": "data/performance.csv", "seed": 5,
            "forest": {"tree_count": 20}, "output_dir": "from-config"}"#,
    )
    .unwrap();
    genscope_ok(["pipeline", "--config", config.to_str().unwrap()]);
    let flags = dir.path().join("from-flags");
    genscope_ok(pipeline_args(
        f.to_str().unwrap(),
        p.to_str().unwrap(),
        flags.to_str().unwrap(),
    ));
    let from_config = dir_contents(&dir.path().join("from-config"));
    let from_flags = dir_contents(&flags);
    for name in [
        "coverage.csv",
        "similarity.csv",
        "mdae.csv",
        "report.json",
        "clustering.json",
    ] {
        assert_eq!(from_config[name], from_flags[name], "{name}");
    }
}

#[test]
fn missing_input_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let missing = dir.path().join("nope.csv");
    let o = genscope(pipeline_args(
        missing.to_str().unwrap(),
        missing.to_str().unwrap(),
        out.to_str().unwrap(),
    ));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.csv"), "{}", stderr(&o));
    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn single_suite_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let features = dir.path().join("features.csv");
    fs::write(&features, "suite,instance_id,f0,f1\nS,a,0,1\nS,b,1,0\nS,c,2,2\n").unwrap();
    let out = dir.path().join("run");
    let o = genscope([
        "similarity",
        "--features",
        features.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("need at least 2 suites"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn k_below_two_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (f, _) = synth_data(&small_spec(dir.path(), 20), dir.path());
    let out = dir.path().join("run");
    let o = genscope([
        "similarity",
        "--features",
        f.to_str().unwrap(),
        "--k",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k must be ≥ 2"), "{}", stderr(&o));
}

#[test]
fn malformed_table_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let features = dir.path().join("features.csv");
    fs::write(&features, "suite,instance_id,f0\nA,a,0\nB,b,zero\n").unwrap();
    let o = genscope([
        "similarity",
        "--features",
        features.to_str().unwrap(),
        "--out",
        "unused",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(genscope(["pipeline", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(
        genscope(["similarity", "--k", "3", "--k-min", "2", "--coverage", "x"])
            .status
            .code(),
        Some(2)
    );
    let o = genscope([
        "pipeline",
        "--features",
        "f.csv",
        "--performance",
        "p.csv",
        "--out",
        "o",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no seed"), "{}", stderr(&o));
}

#[test]
fn coverage_mode_reproduces_table1_cosines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1");
    let cov = fixture("table1_coverage.csv");
    genscope_ok([
        "similarity",
        "--coverage",
        cov.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let (rows, cols, sim) = read_table(&out.join("similarity.csv"));
    assert_eq!(rows, cols);
    let at =
        |a: &str, b: &str| sim[rows.iter().position(|r| r == a).unwrap()][cols.iter().position(|c| c == b).unwrap()];
    assert!((at("CEC2014", "CEC2017") - 0.930211).abs() <= 1e-6);
    assert!((at("BBOB", "CEC2013") - 0.109193).abs() <= 1e-6);
    for name in [
        "coverage.csv",
        "similarity.csv",
        "similarity.svg",
        "dendrogram.svg",
        "manifest.json",
    ] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let svg = fs::read_to_string(out.join("dendrogram.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn report_command_reproduces_pipeline_report() {
    let dir = tempfile::tempdir().unwrap();
    let (f, p) = synth_data(&small_spec(dir.path(), 40), dir.path());
    let run = dir.path().join("run");
    genscope_ok(pipeline_args(
        f.to_str().unwrap(),
        p.to_str().unwrap(),
        run.to_str().unwrap(),
    ));
    let rep = dir.path().join("rep");
    genscope_ok([
        "report",
        "--similarity",
        run.join("similarity.csv").to_str().unwrap(),
        "--mdae",
        run.join("mdae.csv").to_str().unwrap(),
        "--out",
        rep.to_str().unwrap(),
    ]);
    let mut pipeline =
        serde_json::from_slice::<serde_json::Value>(&fs::read(run.join("report.json")).unwrap()).unwrap();
    let standalone = serde_json::from_slice::<serde_json::Value>(&fs::read(rep.join("report.json")).unwrap()).unwrap();
    // The standalone command reads values rounded to six decimals.
    round_numbers(&mut pipeline);
    let mut standalone = standalone;
    round_numbers(&mut standalone);
    assert_eq!(pipeline, standalone);
}

fn round_numbers(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            let x = (n.as_f64().unwrap() * 1e4).round() / 1e4;
            *v = serde_json::json!(x);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_numbers),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_numbers),
        _ => {}
    }
}

#[test]
fn evaluate_matches_pipeline_mdae() {
    let dir = tempfile::tempdir().unwrap();
    let (f, p) = synth_data(&small_spec(dir.path(), 40), dir.path());
    let run = dir.path().join("run");
    genscope_ok(pipeline_args(
        f.to_str().unwrap(),
        p.to_str().unwrap(),
        run.to_str().unwrap(),
    ));
    let ev = dir.path().join("ev");
    genscope_ok([
        "evaluate",
        "--features",
        f.to_str().unwrap(),
        "--performance",
        p.to_str().unwrap(),
        "--seed",
        "5",
        "--trees",
        "20",
        "--out",
        ev.to_str().unwrap(),
    ]);
    assert_eq!(
        fs::read(run.join("mdae.csv")).unwrap(),
        fs::read(ev.join("mdae.csv")).unwrap()
    );
}

#[test]
fn synth_layout() {
    let dir = tempfile::tempdir().unwrap();
    let (f, p) = synth_data(&small_spec(dir.path(), 10), dir.path());
    let features = fs::read_to_string(&f).unwrap();
    let mut lines = features.lines();
    assert_eq!(lines.next(), Some("suite,instance_id,f1,f2,f3"));
    assert_eq!(lines.count(), 30);
    let perf = fs::read_to_string(&p).unwrap();
    assert!(perf.starts_with("suite,instance_id,algorithm,precision\n"));
    assert_eq!(perf.lines().count(), 31);
    assert_eq!(manifest(f.parent().unwrap())["seed"], 17);
}

#[test]
fn mis_select_layout() {
    let dir = tempfile::tempdir().unwrap();
    let (f, p) = synth_data(&small_spec(dir.path(), 60), dir.path());
    let out = dir.path().join("mis");
    genscope_ok([
        "mis-select",
        "--features",
        f.to_str().unwrap(),
        "--performance",
        p.to_str().unwrap(),
        "--threshold",
        "0.8",
        "--runs",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let features = fs::read_to_string(out.join("features.csv")).unwrap();
    let suites: std::collections::BTreeSet<&str> =
        features.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(suites.into_iter().collect::<Vec<_>>(), ["MIS1", "MIS2", "MIS3"]);
    let perf = fs::read_to_string(out.join("performance.csv")).unwrap();
    assert_eq!(perf.lines().count(), features.lines().count());
    for line in features.lines().skip(1) {
        let id = line.split(',').nth(1).unwrap();
        assert!(id.contains('/'), "{id}");
    }
}

#[test]
fn single_cluster_suite_evaluation_layout() {
    let dir = tempfile::tempdir().unwrap();
    let (f, p) = synth_data(&small_spec(dir.path(), 60), dir.path());
    // A second algorithm with a different target scale.
    let perf = fs::read_to_string(&p).unwrap();
    let mut two = perf.clone();
    for line in perf.lines().skip(1) {
        let mut cells: Vec<String> = line.split(',').map(str::to_string).collect();
        cells[2] = "alt".into();
        cells[3] = (cells[3].parse::<f64>().unwrap() * 2.0).to_string();
        two.push_str(&cells.join(","));
        two.push('\n');
    }
    let p2 = dir.path().join("perf2.csv");
    fs::write(&p2, two).unwrap();

    let sim = dir.path().join("sim");
    genscope_ok([
        "similarity",
        "--features",
        f.to_str().unwrap(),
        "--k",
        "3",
        "--out",
        sim.to_str().unwrap(),
    ]);
    let out = dir.path().join("bs6");
    genscope_ok([
        "evaluate",
        "--features",
        f.to_str().unwrap(),
        "--performance",
        p2.to_str().unwrap(),
        "--clustering",
        sim.join("clustering.json").to_str().unwrap(),
        "--cluster-index",
        "0",
        "--trees",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    let (rows, cols, values) = read_table(&out.join("bs6_eval.csv"));
    assert_eq!(rows, ["synthetic", "alt"]);
    assert_eq!(cols, ["A", "B", "C"]);
    assert!(values.iter().flatten().all(|v| v.is_finite() && *v >= 0.0));

    let o = genscope([
        "evaluate",
        "--features",
        f.to_str().unwrap(),
        "--performance",
        p2.to_str().unwrap(),
        "--clustering",
        sim.join("clustering.json").to_str().unwrap(),
        "--cluster-index",
        "7",
        "--out",
        dir.path().join("bad").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
