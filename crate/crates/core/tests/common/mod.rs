#![allow(dead_code)]

use asgc_core::data::LabeledDataset;
use asgc_core::graph::Graph;
use asgc_core::rng::stream_rng;
use asgc_core::FeatureMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Erdős–Rényi graph; when `connect_isolated` is set every degree-0 node is
/// attached to a random other node.
pub fn random_graph(n: usize, p: f64, seed: u64, connect_isolated: bool) -> Graph {
    let mut rng = stream_rng(seed, 11);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    if connect_isolated && n > 1 {
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        for i in 0..n {
            if degree[i] == 0 {
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                edges.push((i, j));
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 12);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_matrix(n: usize, f: usize, seed: u64) -> FeatureMatrix {
    let mut rng = stream_rng(seed, 13);
    let data = (0..n * f).map(|_| rng.sample(StandardNormal)).collect();
    FeatureMatrix::new(n, f, data).unwrap()
}

pub fn dense_matmul(a: &[Vec<f64>], x: &FeatureMatrix) -> Vec<f64> {
    let (n, f) = x.shape();
    let mut out = vec![0.0; n * f];
    for i in 0..n {
        for j in 0..n {
            if a[i][j] != 0.0 {
                for c in 0..f {
                    out[i * f + c] += a[i][j] * x.get(j, c);
                }
            }
        }
    }
    out
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Planted-partition classification dataset: `classes` blocks of equal size,
/// edges mostly within blocks (`homophilous`) or mostly across them, and
/// features = class centroid · `signal` + unit noise.
pub fn planted_dataset(
    name: &str,
    n: usize,
    classes: usize,
    n_features: usize,
    homophilous: bool,
    signal: f64,
    seed: u64,
) -> LabeledDataset {
    let mut rng = stream_rng(seed, 21);
    let labels: Vec<usize> = (0..n).map(|i| i * classes / n).collect();
    let (p_same, p_diff) = if homophilous {
        (0.06, 0.006)
    } else {
        (0.004, 0.04)
    };
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] {
                p_same
            } else {
                p_diff
            };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let graph = Graph::from_edges(n, edges).unwrap();
    let centroids: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            (0..n_features)
                .map(|_| rng.sample(StandardNormal))
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(n * n_features);
    for &y in &labels {
        for k in 0..n_features {
            let noise: f64 = rng.sample(StandardNormal);
            data.push(signal * centroids[y][k] + noise);
        }
    }
    let features = FeatureMatrix::new(n, n_features, data).unwrap();
    LabeledDataset::new(name, graph, features, labels).unwrap()
}
