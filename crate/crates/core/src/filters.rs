//! Feature filters: fixed low-pass SGC, adaptive per-feature ASGC, and convex
//! blending of raw, SGC and ASGC feature matrices.

use std::fmt;

use rayon::prelude::*;

use crate::graph::{normalized_adjacency, Graph, PropagationOperator};
use crate::numeric::least_squares;
use crate::{Error, FeatureMatrix, Result};

fn check_inputs(graph: &Graph, x: &FeatureMatrix, k_hops: usize) -> Result<()> {
    if k_hops == 0 {
        return Err(Error::invalid("k_hops must be at least 1"));
    }
    if graph.n_nodes() != x.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "graph nodes vs feature rows",
            expected: graph.n_nodes(),
            actual: x.n_rows(),
        });
    }
    Ok(())
}

/// `S̃^K X`, applied as `K` successive sparse propagations.
pub fn sgc_filter(graph: &Graph, x: &FeatureMatrix, k_hops: usize) -> Result<FeatureMatrix> {
    check_inputs(graph, x, k_hops)?;
    let op = normalized_adjacency(graph, true);
    let mut current = op.propagate(x)?;
    for _ in 1..k_hops {
        current = op.propagate(&current)?;
    }
    Ok(current)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsgcResult {
    pub filtered: FeatureMatrix,
    /// `f × K` row-major; row `j` holds the coefficients of `S¹x_j … S^K x_j`.
    pub coefficients: Vec<f64>,
    pub residual_norms: Vec<f64>,
    pub k_hops: usize,
}

impl AsgcResult {
    pub fn feature_coefficients(&self, feature: usize) -> &[f64] {
        &self.coefficients[feature * self.k_hops..(feature + 1) * self.k_hops]
    }
}

/// Fit of one feature: coefficients, residual norm and reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct AsgcColumn {
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub filtered: Vec<f64>,
}

/// Projects `x` onto `span{Sx, …, S^K x}` by least squares.
///
/// `op` must be the normalized adjacency without self-loops. An all-zero
/// feature maps to zero coefficients and a zero output.
pub fn asgc_column(
    op: &PropagationOperator,
    x: &[f64],
    k_hops: usize,
    rank_tol: f64,
) -> Result<AsgcColumn> {
    if k_hops == 0 {
        return Err(Error::invalid("k_hops must be at least 1"));
    }
    let n = x.len();
    if x.iter().all(|&v| v == 0.0) {
        return Ok(AsgcColumn {
            coefficients: vec![0.0; k_hops],
            residual_norm: 0.0,
            filtered: vec![0.0; n],
        });
    }
    let mut krylov: Vec<Vec<f64>> = Vec::with_capacity(k_hops);
    for k in 0..k_hops {
        let mut next = vec![0.0; n];
        let source = if k == 0 { x } else { &krylov[k - 1] };
        op.apply(source, &mut next)?;
        krylov.push(next);
    }
    let solution = least_squares(&krylov, x, rank_tol)?;
    let mut filtered = vec![0.0; n];
    for (column, &c) in krylov.iter().zip(&solution.coefficients) {
        for (out, v) in filtered.iter_mut().zip(column) {
            *out += c * v;
        }
    }
    Ok(AsgcColumn {
        coefficients: solution.coefficients,
        residual_norm: solution.residual_norm,
        filtered,
    })
}

/// Applies [`asgc_column`] independently to every feature, in parallel.
pub fn asgc_filter(
    graph: &Graph,
    x: &FeatureMatrix,
    k_hops: usize,
    rank_tol: f64,
) -> Result<AsgcResult> {
    check_inputs(graph, x, k_hops)?;
    let op = normalized_adjacency(graph, false);
    let columns: Vec<AsgcColumn> = (0..x.n_cols())
        .into_par_iter()
        .map(|j| asgc_column(&op, &x.column(j), k_hops, rank_tol))
        .collect::<Result<_>>()?;

    let (n, f) = x.shape();
    let mut filtered = vec![0.0; n * f];
    let mut coefficients = Vec::with_capacity(f * k_hops);
    let mut residual_norms = Vec::with_capacity(f);
    for (j, col) in columns.into_iter().enumerate() {
        for (i, v) in col.filtered.into_iter().enumerate() {
            filtered[i * f + j] = v;
        }
        coefficients.extend(col.coefficients);
        residual_norms.push(col.residual_norm);
    }
    Ok(AsgcResult {
        filtered: FeatureMatrix::new(n, f, filtered)?,
        coefficients,
        residual_norms,
        k_hops,
    })
}

/// Convex weights `(raw, sgc, asgc)` held as integer numerators over a
/// shared resolution, so they sum to exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComboWeights {
    raw: u32,
    sgc: u32,
    asgc: u32,
    resolution: u32,
}

impl ComboWeights {
    pub fn new(raw: u32, sgc: u32, asgc: u32, resolution: u32) -> Result<Self> {
        if resolution == 0 || raw + sgc + asgc != resolution {
            return Err(Error::invalid(format!(
                "weights {raw}/{resolution}, {sgc}/{resolution}, {asgc}/{resolution} do not sum to one"
            )));
        }
        Ok(Self {
            raw,
            sgc,
            asgc,
            resolution,
        })
    }

    pub fn numerators(&self) -> (u32, u32, u32) {
        (self.raw, self.sgc, self.asgc)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn w_raw(&self) -> f64 {
        f64::from(self.raw) / f64::from(self.resolution)
    }

    pub fn w_sgc(&self) -> f64 {
        f64::from(self.sgc) / f64::from(self.resolution)
    }

    pub fn w_asgc(&self) -> f64 {
        f64::from(self.asgc) / f64::from(self.resolution)
    }
}

impl fmt::Display for ComboWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.resolution;
        write!(f, "({}/{r}, {}/{r}, {}/{r})", self.raw, self.sgc, self.asgc)
    }
}

/// Every lattice point of the 2-simplex at resolution `R`, lexicographic in
/// the `(raw, sgc, asgc)` numerators.
pub fn simplex_grid(resolution: u32) -> Result<Vec<ComboWeights>> {
    if resolution == 0 {
        return Err(Error::invalid("combination resolution must be at least 1"));
    }
    let mut grid = Vec::with_capacity(((resolution + 1) * (resolution + 2) / 2) as usize);
    for raw in 0..=resolution {
        for sgc in 0..=resolution - raw {
            grid.push(ComboWeights {
                raw,
                sgc,
                asgc: resolution - raw - sgc,
                resolution,
            });
        }
    }
    Ok(grid)
}

/// `w_raw·X + w_sgc·X_SGC + w_asgc·X_ASGC`; zero-weight inputs are skipped so
/// simplex corners return their input unchanged.
pub fn blend(
    x_raw: &FeatureMatrix,
    x_sgc: &FeatureMatrix,
    x_asgc: &FeatureMatrix,
    weights: &ComboWeights,
) -> Result<FeatureMatrix> {
    for other in [x_sgc, x_asgc] {
        if other.shape() != x_raw.shape() {
            return Err(Error::DimensionMismatch {
                context: "blend input element count",
                expected: x_raw.n_rows() * x_raw.n_cols(),
                actual: other.n_rows() * other.n_cols(),
            });
        }
    }
    let terms: Vec<(f64, &FeatureMatrix)> = [
        (weights.w_raw(), x_raw),
        (weights.w_sgc(), x_sgc),
        (weights.w_asgc(), x_asgc),
    ]
    .into_iter()
    .filter(|(w, _)| *w != 0.0)
    .collect();
    if let [(w, only)] = terms[..] {
        if w == 1.0 {
            return Ok(only.clone());
        }
    }
    let (n, f) = x_raw.shape();
    let mut data = vec![0.0; n * f];
    for (w, m) in terms {
        for (out, v) in data.iter_mut().zip(m.as_slice()) {
            *out += w * v;
        }
    }
    FeatureMatrix::new(n, f, data)
}
