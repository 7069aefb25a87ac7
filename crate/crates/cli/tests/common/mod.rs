#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::json;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn genscope<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_genscope"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs the binary and panics with its stderr unless it exits 0.
pub fn genscope_ok<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = genscope(args);
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Three suites over three well-separated blobs with suite-specific mixtures.
pub fn small_spec(dir: &Path, count: usize) -> PathBuf {
    let spec = json!({
        "cluster_centers": [[8.0, 0.0, 0.0], [0.0, 8.0, 0.0], [0.0, 0.0, 8.0]],
        "cluster_spread": 1.0,
        "suites": [
            {"label": "A", "weights": [0.6, 0.2, 0.2], "count": count},
            {"label": "B", "weights": [0.2, 0.6, 0.2], "count": count},
            {"label": "C", "weights": [0.0, 0.0, 1.0], "count": count}
        ],
        "target_rule": [
            {"weights": [2.0, -1.0, 0.0], "offset": 10.0},
            {"weights": [0.0, 3.0, 1.0], "offset": 20.0},
            {"weights": [-1.0, 0.0, 4.0], "offset": 40.0}
        ],
        "noise_scale": 0.2,
        "seed": 17
    });
    let path = dir.join("spec.json");
    fs::write(&path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    path
}

/// Writes `features.csv` and `performance.csv` for `spec` into `dir/data`.
pub fn synth_data(spec: &Path, dir: &Path) -> (PathBuf, PathBuf) {
    let data = dir.join("data");
    genscope_ok([
        "synth".as_ref(),
        "--spec".as_ref(),
        spec.as_os_str(),
        "--out".as_ref(),
        data.as_os_str(),
    ]);
    (data.join("features.csv"), data.join("performance.csv"))
}

/// Every regular file in `dir`, name to bytes.
pub fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect()
}

pub fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

/// A square or rectangular numeric CSV keyed by (row label, column label).
pub fn read_table(path: &Path) -> (Vec<String>, Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let cols: Vec<String> = rdr.headers().unwrap().iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        rows.push(rec[0].to_string());
        values.push(rec.iter().skip(1).map(|v| v.parse().unwrap()).collect());
    }
    (rows, cols, values)
}
