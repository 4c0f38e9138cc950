//! Dataset files, manifests, train/validation/test splits and the homophily
//! statistic.
//!
//! On-disk layout for one dataset (all plain text, node ids 0-based):
//!
//! - edges: one `u<TAB>v` pair per line (any whitespace accepted on read);
//!   the graph is symmetrized, duplicates collapse and self-loops are dropped.
//! - features: one node per line, values separated by commas; row `i` is
//!   node `i` and fixes the node count.
//! - labels: one integer per line; classes must be exactly `0..L`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::Deserialize;

use crate::graph::Graph;
use crate::rng::stream_rng;
use crate::{Error, FeatureMatrix, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    name: String,
    graph: Graph,
    features: FeatureMatrix,
    labels: Vec<usize>,
    n_classes: usize,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        graph: Graph,
        features: FeatureMatrix,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let n = graph.n_nodes();
        if features.n_rows() != n {
            return Err(Error::DimensionMismatch {
                context: "feature rows vs graph nodes",
                expected: n,
                actual: features.n_rows(),
            });
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                context: "labels vs graph nodes",
                expected: n,
                actual: labels.len(),
            });
        }
        let n_classes = validate_labels(&labels)?;
        Ok(Self {
            name: name.into(),
            graph,
            features,
            labels,
            n_classes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn labels_at(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.labels[i]).collect()
    }
}

/// Returns the class count `L` after checking that labels cover `0..L`.
fn validate_labels(labels: &[usize]) -> Result<usize> {
    let Some(&max) = labels.iter().max() else {
        return Ok(0);
    };
    let mut seen = vec![false; max + 1];
    for &l in labels {
        seen[l] = true;
    }
    match seen.iter().position(|s| !s) {
        Some(missing) => Err(Error::LabelGap {
            n_classes: max + 1,
            missing,
        }),
        None => Ok(max + 1),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = read_text(path)?;
    let mut edges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ids: Vec<&str> = line.split_whitespace().collect();
        let [u, v] = ids[..] else {
            return Err(parse_error(
                path,
                idx + 1,
                format!("expected two node ids, got {line:?}"),
            ));
        };
        let parse = |tok: &str| {
            tok.parse::<usize>()
                .map_err(|e| parse_error(path, idx + 1, format!("node id {tok:?}: {e}")))
        };
        edges.push((parse(u)?, parse(v)?));
    }
    Ok(edges)
}

fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let text = read_text(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                match tok.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    Ok(_) => Err(parse_error(
                        path,
                        idx + 1,
                        format!("non-finite value {tok:?}"),
                    )),
                    Err(e) => Err(parse_error(path, idx + 1, format!("value {tok:?}: {e}"))),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(
                    path,
                    idx + 1,
                    format!("expected {} values, got {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    FeatureMatrix::from_rows(&rows)
}

fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = read_text(path)?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let label = line
            .parse::<usize>()
            .map_err(|e| parse_error(path, idx + 1, format!("label {line:?}: {e}")))?;
        labels.push(label);
    }
    Ok(labels)
}

/// Reads the three dataset files; the node count comes from the feature file.
pub fn load_dataset(
    name: &str,
    edge_path: &Path,
    feature_path: &Path,
    label_path: &Path,
) -> Result<LabeledDataset> {
    let features = read_features(feature_path)?;
    let n = features.n_rows();
    let labels = read_labels(label_path)?;
    if labels.len() != n {
        return Err(Error::Format {
            path: label_path.to_path_buf(),
            message: format!("{} labels for {n} feature rows", labels.len()),
        });
    }
    let edges = read_edges(edge_path)?;
    let graph = Graph::from_edges(n, edges).map_err(|e| match e {
        Error::IndexOutOfRange { context, index, n } => Error::IndexOutOfRange {
            context: format!("{context} in {}", edge_path.display()),
            index,
            n,
        },
        other => other,
    })?;
    LabeledDataset::new(name, graph, features, labels)
}

/// Writes a dataset in the format read by [`load_dataset`]; floats use the
/// shortest representation that parses back to the same value.
pub fn save_dataset(
    dataset: &LabeledDataset,
    edge_path: &Path,
    feature_path: &Path,
    label_path: &Path,
) -> Result<()> {
    write_with(edge_path, |w| {
        for (u, v) in dataset.graph.edges() {
            writeln!(w, "{u}\t{v}")?;
        }
        Ok(())
    })?;
    write_with(feature_path, |w| {
        for row in dataset.features.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    w.write_all(b",")?;
                }
                write!(w, "{v}")?;
                first = false;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    write_with(label_path, |w| {
        for l in &dataset.labels {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })
}

fn write_with<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
{
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    body(&mut writer)
        .and_then(|()| writer.flush())
        .map_err(|e| Error::io(path, e))
}

/// One manifest entry. Paths are relative to the manifest's directory;
/// the optional counts are checked after loading and only produce warnings.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub edges: PathBuf,
    pub features: PathBuf,
    pub labels: PathBuf,
    pub nodes: Option<usize>,
    pub undirected_edges: Option<usize>,
    pub feature_dim: Option<usize>,
    pub classes: Option<usize>,
}

/// Named datasets, read from a TOML file with one table per dataset:
///
/// ```toml
/// [cora]
/// edges = "cora/edges.tsv"
/// features = "cora/features.csv"
/// labels = "cora/labels.txt"
/// nodes = 2702
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    base_dir: PathBuf,
    entries: BTreeMap<String, ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base_dir).map_err(|message| Error::Format {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> std::result::Result<Self, String> {
        let entries: BTreeMap<String, ManifestEntry> =
            toml::from_str(text).map_err(|e| e.to_string())?;
        Ok(Self { base_dir, entries })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entry(&self, name: &str) -> Option<&ManifestEntry> {
        self.entries.get(name)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn load_dataset(&self, name: &str) -> Result<LabeledDataset> {
        let entry = self.entries.get(name).ok_or_else(|| {
            Error::invalid(format!(
                "dataset {name:?} not in manifest (known: {})",
                self.entries.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })?;
        let ds = load_dataset(
            name,
            &self.resolve(&entry.edges),
            &self.resolve(&entry.features),
            &self.resolve(&entry.labels),
        )?;
        let checks = [
            ("nodes", entry.nodes, ds.n_nodes()),
            (
                "undirected_edges",
                entry.undirected_edges,
                ds.graph.n_edges(),
            ),
            ("feature_dim", entry.feature_dim, ds.features.n_cols()),
            ("classes", entry.classes, ds.n_classes()),
        ];
        for (what, expected, actual) in checks {
            if let Some(expected) = expected {
                if expected != actual {
                    log::warn!("{name}: manifest expects {what} = {expected}, files give {actual}");
                }
            }
        }
        Ok(ds)
    }
}

/// Mean over non-isolated nodes of the fraction of neighbors sharing the
/// node's label.
pub fn homophily(dataset: &LabeledDataset) -> Result<f64> {
    let graph = &dataset.graph;
    let mut total = 0.0;
    let mut counted = 0usize;
    for v in 0..graph.n_nodes() {
        let neighbors = graph.neighbors(v);
        if neighbors.is_empty() {
            continue;
        }
        let same = neighbors
            .iter()
            .filter(|&&u| dataset.labels[u] == dataset.labels[v])
            .count();
        total += same as f64 / neighbors.len() as f64;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::AllIsolated);
    }
    Ok(total / counted as f64)
}

/// Disjoint train/validation/test node sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

impl SplitSpec {
    /// The 80% non-test part, sorted.
    pub fn train_and_validation(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.train.iter().chain(&self.validation).copied().collect();
        all.sort_unstable();
        all
    }
}

/// Random 80/20 non-test/test split, with a third of the non-test part held
/// out for validation: `|test| = ⌊n/5⌋`, `|validation| = ⌊(n − |test|)/3⌋`.
pub fn make_splits(n: usize, seed: u64) -> Result<SplitSpec> {
    if n < 10 {
        return Err(Error::invalid(format!(
            "need at least 10 nodes to split, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, 0));
    let n_test = n / 5;
    let n_val = (n - n_test) / 3;
    let sorted = |s: &[usize]| {
        let mut v = s.to_vec();
        v.sort_unstable();
        v
    };
    Ok(SplitSpec {
        test: sorted(&order[..n_test]),
        validation: sorted(&order[n_test..n_test + n_val]),
        train: sorted(&order[n_test + n_val..]),
        seed,
    })
}
