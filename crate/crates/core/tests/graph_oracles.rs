mod common;

use asgc_core::filters::sgc_filter;
use asgc_core::graph::{
    laplacian_quadratic_form, laplacian_quadratic_form_by_edges, normalized_adjacency, Graph,
};
use asgc_core::FeatureMatrix;
use common::{dense_matmul, max_rel_diff, random_graph, random_matrix, random_vector};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn dense_reference(graph: &Graph, self_loops: bool) -> Vec<Vec<f64>> {
    let n = graph.n_nodes();
    let mut a = vec![vec![0.0; n]; n];
    for (u, v) in graph.edges() {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    if self_loops {
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0;
        }
    }
    let d: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let inv_sqrt: Vec<f64> = d
        .iter()
        .map(|&x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 })
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| inv_sqrt[i] * a[i][j] * inv_sqrt[j])
                .collect()
        })
        .collect()
}

#[test]
fn normalized_adjacency_matches_dense_construction() {
    for seed in 0..5 {
        let g = random_graph(40, 0.1, seed, false);
        for loops in [false, true] {
            let sparse = normalized_adjacency(&g, loops).to_dense();
            let dense = dense_reference(&g, loops);
            for (rs, rd) in sparse.iter().zip(&dense) {
                for (a, b) in rs.iter().zip(rd) {
                    assert!((a - b).abs() < 1e-15);
                }
            }
        }
    }
}

#[test]
fn propagate_matches_dense_product_on_50_nodes() {
    let g = random_graph(50, 0.08, 3, false);
    let x = random_matrix(50, 4, 4);
    for loops in [false, true] {
        let op = normalized_adjacency(&g, loops);
        let got = op.propagate(&x).unwrap();
        let want = dense_matmul(&op.to_dense(), &x);
        assert!(max_rel_diff(got.as_slice(), &want) < 1e-12);
    }
}

#[test]
fn spectrum_lies_in_unit_interval() {
    for seed in 0..6 {
        let n = 20 + 30 * seed as usize;
        let g = random_graph(n, 0.05, seed, true);
        for loops in [false, true] {
            let dense = normalized_adjacency(&g, loops).to_dense();
            let m = DMatrix::from_fn(n, n, |i, j| dense[i][j]);
            let eig = SymmetricEigen::new(m);
            let max_abs = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            assert!(max_abs <= 1.0 + 1e-9, "seed {seed}: |λ|max = {max_abs}");
        }
    }
}

#[test]
fn quadratic_form_erdos_renyi_30() {
    let g = random_graph(30, 0.15, 9, true);
    let x = random_vector(30, 10);
    let a = laplacian_quadratic_form(&g, &x).unwrap();
    let b = laplacian_quadratic_form_by_edges(&g, &x).unwrap();
    assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
}

#[test]
fn sgc_matches_dense_cube() {
    let g = random_graph(30, 0.12, 5, false);
    let x = random_matrix(30, 3, 6);
    let st = dense_reference(&g, true);
    let mut want = x.clone();
    for _ in 0..3 {
        want = FeatureMatrix::new(30, 3, dense_matmul(&st, &want)).unwrap();
    }
    let got = sgc_filter(&g, &x, 3).unwrap();
    assert!(max_rel_diff(got.as_slice(), want.as_slice()) < 1e-10);
}

#[test]
fn sgc_with_one_hop_is_one_propagation() {
    let g = random_graph(60, 0.07, 8, false);
    let x = random_matrix(60, 5, 2);
    let once = normalized_adjacency(&g, true).propagate(&x).unwrap();
    assert_eq!(sgc_filter(&g, &x, 1).unwrap(), once);
}

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..40).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..120)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_invariants_hold((n, edges) in graph_strategy()) {
        let g = Graph::from_edges(n, edges.clone()).unwrap();
        for i in 0..n {
            let row = g.neighbors(i);
            prop_assert!(row.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(!row.contains(&i));
            for &j in row {
                prop_assert!(g.has_edge(j, i));
            }
        }
        for (u, v) in edges {
            prop_assert_eq!(g.has_edge(u, v), u != v);
        }
        let rebuilt = Graph::from_csr(n, g.offsets().to_vec(), (0..n).flat_map(|i| g.neighbors(i).to_vec()).collect()).unwrap();
        prop_assert_eq!(rebuilt, g);
    }

    #[test]
    fn operators_are_exactly_symmetric((n, edges) in graph_strategy()) {
        let g = Graph::from_edges(n, edges).unwrap();
        let s = normalized_adjacency(&g, false);
        let st = normalized_adjacency(&g, true);
        for i in 0..n {
            prop_assert_eq!(s.entry(i, i), 0.0);
            prop_assert!(st.entry(i, i) > 0.0);
            for j in 0..n {
                prop_assert_eq!(s.entry(i, j).to_bits(), s.entry(j, i).to_bits());
                prop_assert_eq!(st.entry(i, j).to_bits(), st.entry(j, i).to_bits());
            }
        }
    }

    #[test]
    fn quadratic_forms_agree(seed in 0u64..10_000, n in 3usize..120) {
        let g = random_graph(n, 4.0 / n as f64, seed, true);
        let x = random_vector(n, seed ^ 0xabc);
        let a = laplacian_quadratic_form(&g, &x).unwrap();
        let b = laplacian_quadratic_form_by_edges(&g, &x).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-12));
        prop_assert!(a >= -1e-12);
    }

    #[test]
    fn propagate_agrees_with_dense(seed in 0u64..10_000, n in 1usize..80, f in 1usize..4) {
        let g = random_graph(n, 0.1, seed, false);
        let x = random_matrix(n, f, seed + 1);
        let op = normalized_adjacency(&g, seed % 2 == 0);
        let got = op.propagate(&x).unwrap();
        let want = dense_matmul(&op.to_dense(), &x);
        prop_assert!(max_rel_diff(got.as_slice(), &want) < 1e-12);
    }
}
