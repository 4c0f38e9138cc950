//! Sparse undirected graphs and the normalized propagation operators built
//! from them.
//!
//! A [`Graph`] stores an unweighted, symmetric adjacency in compressed sparse
//! row form with sorted, duplicate-free rows and no self-loops. A
//! [`PropagationOperator`] has the same layout with real entries
//! `A'_ij / sqrt(d'_i d'_j)`, optionally with unit self-loops added first.
//! Nodes of degree zero get an all-zero row and column in the operator
//! without self-loops.

use rayon::prelude::*;

use crate::{Error, FeatureMatrix, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Builds a graph from an edge list.
    ///
    /// Each pair is inserted in both directions, repeated pairs collapse to a
    /// single edge and self-loops are dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, v) in edges {
            for (endpoint, other) in [(u, v), (v, u)] {
                if endpoint >= n {
                    return Err(Error::IndexOutOfRange {
                        context: format!("edge ({u}, {v})"),
                        index: endpoint,
                        n,
                    });
                }
                if endpoint != other {
                    adjacency[endpoint].push(other);
                }
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::new();
        for mut row in adjacency {
            row.sort_unstable();
            row.dedup();
            neighbors.extend_from_slice(&row);
            offsets.push(neighbors.len());
        }
        Ok(Self {
            n,
            offsets,
            neighbors,
        })
    }

    /// Wraps an existing CSR layout after checking every structural invariant.
    pub fn from_csr(n: usize, offsets: Vec<usize>, neighbors: Vec<usize>) -> Result<Self> {
        if offsets.len() != n + 1 || offsets[0] != 0 || offsets[n] != neighbors.len() {
            return Err(Error::InvalidGraph("malformed row offsets".into()));
        }
        let graph = Self {
            n,
            offsets,
            neighbors,
        };
        for i in 0..n {
            if graph.offsets[i] > graph.offsets[i + 1] {
                return Err(Error::InvalidGraph(format!("row {i} has negative length")));
            }
            let row = graph.neighbors(i);
            if let Some(&j) = row.iter().find(|&&j| j >= n) {
                return Err(Error::IndexOutOfRange {
                    context: format!("row {i}"),
                    index: j,
                    n,
                });
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "row {i} is not strictly increasing"
                )));
            }
            if row.binary_search(&i).is_ok() {
                return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
            }
            if let Some(&j) = row.iter().find(|&&j| !graph.has_edge(j, i)) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) has no reverse"
                )));
            }
        }
        Ok(graph)
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges as `(u, v)` with `u < v`, in row order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (u, v))
        })
    }

    pub fn isolated_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&i| self.degree(i) == 0)
    }
}

/// Symmetrically normalized adjacency, `S` or (with self-loops) `S̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOperator {
    n: usize,
    offsets: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<f64>,
    with_self_loops: bool,
}

/// Builds `D'^{-1/2} A' D'^{-1/2}` where `A' = A + I`, `d' = d + 1` when
/// `add_self_loops` is set and `A' = A`, `d' = d` otherwise.
pub fn normalized_adjacency(graph: &Graph, add_self_loops: bool) -> PropagationOperator {
    let n = graph.n_nodes();
    let loop_weight = usize::from(add_self_loops);
    let degrees: Vec<usize> = graph
        .degrees()
        .into_iter()
        .map(|d| d + loop_weight)
        .collect();
    // 1/sqrt(d_i d_j) on the integer product keeps (i,j) and (j,i) bit-identical
    let weight = |i: usize, j: usize| 1.0 / ((degrees[i] * degrees[j]) as f64).sqrt();

    let nnz = graph.n_edges() * 2 + loop_weight * n;
    let mut offsets = Vec::with_capacity(n + 1);
    let mut columns = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    offsets.push(0);
    for i in 0..n {
        let row = graph.neighbors(i);
        let split = row.partition_point(|&j| j < i);
        for &j in &row[..split] {
            columns.push(j);
            values.push(weight(i, j));
        }
        if add_self_loops {
            columns.push(i);
            values.push(weight(i, i));
        }
        for &j in &row[split..] {
            columns.push(j);
            values.push(weight(i, j));
        }
        offsets.push(columns.len());
    }
    PropagationOperator {
        n,
        offsets,
        columns,
        values,
        with_self_loops: add_self_loops,
    }
}

impl PropagationOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn with_self_loops(&self) -> bool {
        self.with_self_loops
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row `i` as parallel slices of column indices and values.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.offsets[i]..self.offsets[i + 1];
        (&self.columns[range.clone()], &self.values[range])
    }

    /// Stored value at `(i, j)`, zero when absent.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    /// Dense row-major copy; only sensible for small graphs.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (i, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        dense
    }

    /// `out = op · x` for a single feature vector.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(x.len())?;
        self.check_len(out.len())?;
        for (i, out_i) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *out_i = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
        Ok(())
    }

    /// Sparse–dense product `op · x`, parallel over output rows.
    pub fn propagate(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        self.check_len(x.n_rows())?;
        let f = x.n_cols();
        let mut out = FeatureMatrix::zeros(self.n, f);
        if f == 0 {
            return Ok(out);
        }
        out.as_mut_slice()
            .par_chunks_mut(f)
            .with_min_len(64)
            .enumerate()
            .for_each(|(i, out_row)| {
                let (cols, vals) = self.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    for (o, &xj) in out_row.iter_mut().zip(x.row(j)) {
                        *o += v * xj;
                    }
                }
            });
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context: "operator size vs feature rows",
                expected: self.n,
                actual: len,
            })
        }
    }
}

fn check_quadratic_form_input(graph: &Graph, x: &[f64]) -> Result<()> {
    if x.len() != graph.n_nodes() {
        return Err(Error::DimensionMismatch {
            context: "feature length vs node count",
            expected: graph.n_nodes(),
            actual: x.len(),
        });
    }
    match graph.isolated_nodes().next() {
        Some(i) => Err(Error::IsolatedNode(i)),
        None => Ok(()),
    }
}

/// `xᵀ(I − S)x` evaluated through the normalized adjacency.
pub fn laplacian_quadratic_form(graph: &Graph, x: &[f64]) -> Result<f64> {
    check_quadratic_form_input(graph, x)?;
    let op = normalized_adjacency(graph, false);
    let mut sx = vec![0.0; x.len()];
    op.apply(x, &mut sx)?;
    Ok(x.iter().zip(&sx).map(|(xi, si)| xi * xi - xi * si).sum())
}

/// `½ Σ_(i,j) A_ij (x_i/√d_i − x_j/√d_j)²`, summed over ordered adjacent pairs.
pub fn laplacian_quadratic_form_by_edges(graph: &Graph, x: &[f64]) -> Result<f64> {
    check_quadratic_form_input(graph, x)?;
    let scaled: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, xi)| xi / (graph.degree(i) as f64).sqrt())
        .collect();
    let mut total = 0.0;
    for i in 0..graph.n_nodes() {
        for &j in graph.neighbors(i) {
            let diff = scaled[i] - scaled[j];
            total += diff * diff;
        }
    }
    Ok(0.5 * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> Graph {
        Graph::from_edges(2, [(0, 1)]).unwrap()
    }

    #[test]
    fn degrees_of_small_graphs() {
        assert_eq!(single_edge().degrees(), vec![1, 1]);
        let triangle = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(triangle.degrees(), vec![2, 2, 2]);
        let with_isolated = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(with_isolated.degrees(), vec![1, 1, 0]);
    }

    #[test]
    fn edge_list_is_symmetrized_and_deduplicated() {
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (1, 2), (2, 2)]).unwrap();
        assert_eq!(g.n_edges(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.has_edge(2, 1));
        assert!(!g.has_edge(2, 2));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn out_of_range_edge_is_rejected() {
        let err = Graph::from_edges(2, [(0, 2)]).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 2, .. }));
    }

    #[test]
    fn csr_validation_catches_asymmetry_and_loops() {
        assert!(Graph::from_csr(2, vec![0, 1, 1], vec![1]).is_err());
        assert!(Graph::from_csr(1, vec![0, 1], vec![0]).is_err());
        assert!(Graph::from_csr(3, vec![0, 2, 3, 4], vec![2, 1, 0, 0]).is_err());
        let ok = Graph::from_csr(2, vec![0, 1, 2], vec![1, 0]).unwrap();
        assert_eq!(ok, single_edge());
    }

    #[test]
    fn single_edge_operators() {
        let g = single_edge();
        let s = normalized_adjacency(&g, false);
        assert_eq!(s.to_dense(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let st = normalized_adjacency(&g, true);
        assert_eq!(st.to_dense(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(st.with_self_loops());
        assert_eq!(st.nnz(), 4);
    }

    #[test]
    fn propagate_single_edge_examples() {
        let g = single_edge();
        let x = FeatureMatrix::from_column(vec![1.0, -1.0]).unwrap();
        let swapped = normalized_adjacency(&g, false).propagate(&x).unwrap();
        assert_eq!(swapped.as_slice(), &[-1.0, 1.0]);
        let smoothed = normalized_adjacency(&g, true).propagate(&x).unwrap();
        assert_eq!(smoothed.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn propagate_rejects_wrong_row_count() {
        let op = normalized_adjacency(&single_edge(), false);
        let x = FeatureMatrix::zeros(3, 1);
        assert!(matches!(
            op.propagate(&x),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn isolated_node_rows_are_zero_without_loops() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let s = normalized_adjacency(&g, false);
        assert_eq!(s.row(2).0.len(), 0);
        let st = normalized_adjacency(&g, true);
        assert_eq!(st.entry(2, 2), 1.0);
    }

    #[test]
    fn path_graph_matches_dense_construction() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let d = [1.0_f64, 2.0, 2.0, 1.0];
        let mut expected = [[0.0; 4]; 4];
        for (i, j) in [(0, 1), (1, 2), (2, 3)] {
            let w = 1.0 / (d[i] * d[j]).sqrt();
            expected[i][j] = w;
            expected[j][i] = w;
        }
        let s = normalized_adjacency(&g, false).to_dense();
        for i in 0..4 {
            for j in 0..4 {
                assert!((s[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn quadratic_form_single_edge() {
        let g = single_edge();
        let x = [1.0, -1.0];
        assert_eq!(laplacian_quadratic_form(&g, &x).unwrap(), 4.0);
        assert_eq!(laplacian_quadratic_form_by_edges(&g, &x).unwrap(), 4.0);
    }

    #[test]
    fn quadratic_form_vanishes_on_sqrt_degree_vector() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let x: Vec<f64> = g.degrees().iter().map(|&d| (d as f64).sqrt()).collect();
        assert!(laplacian_quadratic_form(&g, &x).unwrap().abs() < 1e-12);
        assert!(laplacian_quadratic_form_by_edges(&g, &x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn quadratic_form_rejects_isolated_nodes() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(matches!(
            laplacian_quadratic_form(&g, &[1.0, 2.0, 3.0]),
            Err(Error::IsolatedNode(2))
        ));
        assert!(laplacian_quadratic_form_by_edges(&g, &[1.0, 2.0, 3.0]).is_err());
    }
}
