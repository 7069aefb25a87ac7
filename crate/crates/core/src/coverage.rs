//! Suite-level meta-representation: the fraction of each suite's instances
//! falling in each cluster, compared across suites by cosine similarity and
//! organized into an average-linkage dendrogram.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{csv_line, fmt6};

const ROW_SUM_TOL: f64 = 1e-9;

/// Suite-by-cluster occupancy fractions. Every row is a probability vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageMatrix {
    suite_ids: Vec<String>,
    k: usize,
    rows: Vec<Vec<f64>>,
}

impl CoverageMatrix {
    pub fn from_rows(suite_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if suite_ids.is_empty() || suite_ids.len() != rows.len() {
            return Err(Error::invalid("coverage matrix needs one row per suite"));
        }
        let k = rows[0].len();
        if k == 0 {
            return Err(Error::invalid("coverage matrix needs at least one cluster"));
        }
        for (id, row) in suite_ids.iter().zip(&rows) {
            if row.len() != k {
                return Err(Error::invalid(format!(
                    "coverage row {id} has {} entries, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::invalid(format!(
                    "coverage row {id} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::invalid(format!("coverage row {id} sums to {sum}, not 1")));
            }
        }
        Ok(CoverageMatrix { suite_ids, k, rows })
    }

    pub fn suite_ids(&self) -> &[String] {
        &self.suite_ids
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, suite: &str) -> Option<&[f64]> {
        self.suite_ids
            .iter()
            .position(|s| s == suite)
            .map(|i| self.rows[i].as_slice())
    }

    /// `coverage.csv`: header `suite,C1..Ck`, six decimals.
    pub fn to_csv_string(&self) -> String {
        let mut out = csv_line(std::iter::once("suite".to_string()).chain((1..=self.k).map(|c| format!("C{c}"))));
        for (id, row) in self.suite_ids.iter().zip(&self.rows) {
            out.push_str(&csv_line(
                std::iter::once(id.clone()).chain(row.iter().map(|&v| fmt6(v))),
            ));
        }
        out
    }

    pub fn load_csv(path: impl AsRef<Path>, renormalize_within: Option<f64>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(file, &path.display().to_string(), renormalize_within)
    }

    /// Parses `coverage.csv`. Published tables are rounded, so rows may miss
    /// 1 by a little; with `renormalize_within = Some(tol)` rows whose sum is
    /// within `tol` of 1 are rescaled to sum to 1. Otherwise rows must sum to
    /// 1 within 1e-9.
    pub fn parse_csv<R: Read>(input: R, source_name: &str, renormalize_within: Option<f64>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let header = rdr.headers().map_err(|e| Error::from_csv(source_name, e))?.clone();
        if header.len() < 2 || &header[0] != "suite" {
            return Err(Error::table(source_name, 1, "header must be suite,C1..Ck"));
        }
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::from_csv(source_name, e))?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            if rec.len() != header.len() {
                return Err(Error::table(source_name, line, "wrong number of fields"));
            }
            let mut row = Vec::with_capacity(header.len() - 1);
            for (j, cell) in rec.iter().enumerate().skip(1) {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    Error::table(
                        source_name,
                        line,
                        format!("column {:?}: non-numeric value {cell:?}", &header[j]),
                    )
                })?;
                row.push(v);
            }
            if let Some(tol) = renormalize_within {
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > tol || sum <= 0.0 {
                    return Err(Error::table(
                        source_name,
                        line,
                        format!("row sums to {sum}, more than {tol} from 1"),
                    ));
                }
                row.iter_mut().for_each(|v| *v /= sum);
            }
            ids.push(rec[0].to_string());
            rows.push(row);
        }
        if ids.is_empty() {
            return Err(Error::table(source_name, 1, "no coverage rows"));
        }
        Self::from_rows(ids, rows).map_err(|e| Error::table(source_name, 0, e.to_string()))
    }
}

/// Builds the coverage matrix from per-instance suite labels and cluster
/// assignments. Suites appear in order of first occurrence.
pub fn coverage_matrix<S: AsRef<str>>(suite_labels: &[S], assignments: &[usize], k: usize) -> Result<CoverageMatrix> {
    if suite_labels.is_empty() || suite_labels.len() != assignments.len() {
        return Err(Error::invalid(format!(
            "{} suite labels for {} assignments",
            suite_labels.len(),
            assignments.len()
        )));
    }
    if let Some(a) = assignments.iter().find(|&&a| a >= k) {
        return Err(Error::invalid(format!("assignment {a} out of range for k = {k}")));
    }
    let mut ids: Vec<String> = Vec::new();
    let mut counts: Vec<Vec<usize>> = Vec::new();
    for (label, &a) in suite_labels.iter().zip(assignments) {
        let label = label.as_ref();
        let i = match ids.iter().position(|s| s == label) {
            Some(i) => i,
            None => {
                ids.push(label.to_string());
                counts.push(vec![0; k]);
                ids.len() - 1
            }
        };
        counts[i][a] += 1;
    }
    let rows = counts
        .iter()
        .map(|c| {
            let total: usize = c.iter().sum();
            c.iter().map(|&n| n as f64 / total as f64).collect()
        })
        .collect();
    CoverageMatrix::from_rows(ids, rows)
}

/// `dot(u, v) / (|u| |v|)`, clamped to [-1, 1].
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "vector lengths differ ({} vs {})",
            u.len(),
            v.len()
        )));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::invalid("cosine similarity undefined for zero vector"));
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Symmetric suite-by-suite cosine similarities with an exact unit diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    suite_ids: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn from_values(suite_ids: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let m = suite_ids.len();
        if values.len() != m || values.iter().any(|r| r.len() != m) {
            return Err(Error::invalid("similarity matrix must be square and match its labels"));
        }
        for i in 0..m {
            if (values[i][i] - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "similarity diagonal for {} is not 1",
                    suite_ids[i]
                )));
            }
            for j in 0..i {
                if (values[i][j] - values[j][i]).abs() > 1e-12 {
                    return Err(Error::invalid("similarity matrix is not symmetric"));
                }
            }
        }
        Ok(SimilarityMatrix { suite_ids, values })
    }

    pub fn suite_ids(&self) -> &[String] {
        &self.suite_ids
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.suite_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.suite_ids.is_empty()
    }

    pub fn index_of(&self, suite: &str) -> Option<usize> {
        self.suite_ids.iter().position(|s| s == suite)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.values[self.index_of(a)?][self.index_of(b)?])
    }

    /// Rows and columns reordered by `order` (indices into the current order).
    pub fn permuted(&self, order: &[usize]) -> SimilarityMatrix {
        SimilarityMatrix {
            suite_ids: order.iter().map(|&i| self.suite_ids[i].clone()).collect(),
            values: order
                .iter()
                .map(|&i| order.iter().map(|&j| self.values[i][j]).collect())
                .collect(),
        }
    }

    /// `similarity.csv`: suite ids as header row and first column.
    pub fn to_csv_string(&self) -> String {
        let mut out = csv_line(std::iter::once("suite".to_string()).chain(self.suite_ids.iter().cloned()));
        for (id, row) in self.suite_ids.iter().zip(&self.values) {
            out.push_str(&csv_line(
                std::iter::once(id.clone()).chain(row.iter().map(|&v| fmt6(v))),
            ));
        }
        out
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(file, &path.display().to_string())
    }

    /// Parses `similarity.csv`. Values were rounded to six decimals on
    /// output, so symmetry is only checked to that precision.
    pub fn parse_csv<R: Read>(input: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let header = rdr.headers().map_err(|e| Error::from_csv(source_name, e))?.clone();
        if header.len() < 2 || &header[0] != "suite" {
            return Err(Error::table(source_name, 1, "header must be suite,<suite ids>"));
        }
        let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::from_csv(source_name, e))?;
            let line = i + 2;
            if rec.len() != header.len() || i >= ids.len() || rec[0] != ids[i] {
                return Err(Error::table(
                    source_name,
                    line,
                    "row labels must match the header order",
                ));
            }
            let row = rec
                .iter()
                .skip(1)
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::table(source_name, line, format!("non-numeric value {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            values.push(row);
        }
        if values.len() != ids.len() {
            return Err(Error::table(source_name, values.len() + 2, "matrix is not square"));
        }
        for i in 0..ids.len() {
            for j in 0..i {
                if (values[i][j] - values[j][i]).abs() > 1e-6 {
                    return Err(Error::table(source_name, i + 2, "matrix is not symmetric"));
                }
                values[i][j] = values[j][i];
            }
        }
        Self::from_values(ids, values)
    }
}

/// Pairwise cosine similarity of coverage rows.
pub fn similarity_matrix(cov: &CoverageMatrix) -> Result<SimilarityMatrix> {
    let m = cov.suite_ids.len();
    if m < 2 {
        return Err(Error::invalid("need at least 2 suites to compare"));
    }
    let mut values = vec![vec![0.0; m]; m];
    for i in 0..m {
        values[i][i] = 1.0;
        for j in i + 1..m {
            let s = cosine_similarity(&cov.rows[i], &cov.rows[j])?;
            values[i][j] = s;
            values[j][i] = s;
        }
    }
    SimilarityMatrix::from_values(cov.suite_ids.clone(), values)
}

/// One agglomeration step. Leaves are nodes `0..m`; the node created by
/// merge `t` is `m + t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaf_ids: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn root(&self) -> usize {
        2 * self.leaf_ids.len() - 2
    }

    /// Height of a node: 0 for leaves, the merge distance otherwise.
    pub fn height(&self, node: usize) -> f64 {
        let m = self.leaf_ids.len();
        if node < m {
            0.0
        } else {
            self.merges[node - m].distance
        }
    }

    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        let m = self.leaf_ids.len();
        (node >= m).then(|| {
            let merge = &self.merges[node - m];
            (merge.left, merge.right)
        })
    }
}

/// Average-linkage agglomeration on distance `1 - similarity`. Among equally
/// close pairs the one with the lowest node indices merges first.
pub fn agglomerate(sim: &SimilarityMatrix) -> Result<Dendrogram> {
    let m = sim.len();
    if m < 2 {
        return Err(Error::invalid("need at least 2 suites to build a dendrogram"));
    }
    let dist = |a: usize, b: usize| 1.0 - sim.values[a][b];
    // active clusters as (node id, member leaves)
    let mut active: Vec<(usize, Vec<usize>)> = (0..m).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::with_capacity(m - 1);
    for step in 0..m - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..active.len() {
            for b in a + 1..active.len() {
                let (ma, mb) = (&active[a].1, &active[b].1);
                let total: f64 = ma.iter().flat_map(|&x| mb.iter().map(move |&y| dist(x, y))).sum();
                let d = total / (ma.len() * mb.len()) as f64;
                let (na, nb) = (active[a].0.min(active[b].0), active[a].0.max(active[b].0));
                let better = match best {
                    None => true,
                    Some((bd, ba, bb)) => {
                        let (ca, cb) = (active[ba].0.min(active[bb].0), active[ba].0.max(active[bb].0));
                        d < bd || (d == bd && (na, nb) < (ca, cb))
                    }
                };
                if better {
                    best = Some((d, a, b));
                }
            }
        }
        let (d, a, b) = best.expect("at least two active clusters");
        let (node_a, members_a) = active[a].clone();
        let (node_b, members_b) = active[b].clone();
        let (left, right) = (node_a.min(node_b), node_a.max(node_b));
        let mut members = members_a;
        members.extend(members_b);
        active.remove(b);
        active.remove(a);
        merges.push(Merge {
            left,
            right,
            distance: d,
            size: members.len(),
        });
        active.push((m + step, members));
    }
    let dendrogram = Dendrogram {
        leaf_ids: sim.suite_ids.clone(),
        merges,
    };
    for w in dendrogram.merges.windows(2) {
        if w[1].distance < w[0].distance - 1e-12 {
            return Err(Error::Invariant(format!(
                "average-linkage merge distances decreased ({} then {})",
                w[0].distance, w[1].distance
            )));
        }
    }
    Ok(dendrogram)
}

/// Leaf indices in left-to-right order, left child first.
pub fn leaf_order(dendrogram: &Dendrogram) -> Vec<usize> {
    let m = dendrogram.leaf_ids.len();
    if m == 1 {
        return vec![0];
    }
    let mut order = Vec::with_capacity(m);
    let mut stack = vec![dendrogram.root()];
    while let Some(node) = stack.pop() {
        match dendrogram.children(node) {
            Some((l, r)) => {
                stack.push(r);
                stack.push(l);
            }
            None => order.push(node),
        }
    }
    order
}

/// Suite labels in leaf order.
pub fn leaf_labels(dendrogram: &Dendrogram) -> Vec<String> {
    leaf_order(dendrogram)
        .into_iter()
        .map(|i| dendrogram.leaf_ids[i].clone())
        .collect()
}
