//! Minimum-norm linear least squares for tall, thin dense systems.
//!
//! The basis (n × K, K small) is first reduced with Householder QR, then the
//! K × K triangular factor is diagonalized with one-sided Jacobi rotations.
//! That yields a thin SVD of the basis, so singular values below
//! `rank_tol · σ_max` can be dropped and the pseudoinverse solution returned.

use crate::{Error, Result};

/// Relative singular-value cutoff used when callers have no preference.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresSolution {
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub effective_rank: usize,
}

/// Solves `min ‖B c − t‖₂` for the basis `B` given as columns.
///
/// When `B` is rank-deficient at relative tolerance `rank_tol` the
/// minimum-norm minimizer is returned.
pub fn least_squares(
    columns: &[Vec<f64>],
    target: &[f64],
    rank_tol: f64,
) -> Result<LeastSquaresSolution> {
    let k = columns.len();
    let n = target.len();
    if k == 0 || n == 0 {
        return Err(Error::invalid(
            "least squares needs at least one row and one column",
        ));
    }
    if !(rank_tol >= 0.0 && rank_tol.is_finite()) {
        return Err(Error::invalid(format!("rank tolerance {rank_tol}")));
    }
    for col in columns {
        if col.len() != n {
            return Err(Error::DimensionMismatch {
                context: "least-squares basis column",
                expected: n,
                actual: col.len(),
            });
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("least-squares basis"));
        }
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares target"));
    }

    let m = n.min(k);
    let (r, qt_target) = householder_reduce(columns, target);
    let svd = jacobi_svd(&r, m, k);

    let sigma_max = svd.singular.iter().copied().fold(0.0, f64::max);
    let cutoff = rank_tol * sigma_max;
    let mut coefficients = vec![0.0; k];
    let mut effective_rank = 0;
    for (j, &sigma) in svd.singular.iter().enumerate() {
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        effective_rank += 1;
        // u_j = (R v_j) / σ_j is stored as column j of svd.left
        let uty: f64 = (0..m).map(|i| svd.left[i * k + j] * qt_target[i]).sum();
        let scale = uty / sigma;
        for (c, row) in coefficients.iter_mut().enumerate() {
            *row += svd.right[c * k + j] * scale;
        }
    }

    let residual_norm = (0..n)
        .map(|i| {
            let fit: f64 = columns
                .iter()
                .zip(&coefficients)
                .map(|(col, c)| col[i] * c)
                .sum();
            let r = fit - target[i];
            r * r
        })
        .sum::<f64>()
        .sqrt();

    Ok(LeastSquaresSolution {
        coefficients,
        residual_norm,
        effective_rank,
    })
}

/// Returns the leading `min(n, K)` rows of `R` (row-major, width K) and the
/// matching entries of `Qᵀ t`.
fn householder_reduce(columns: &[Vec<f64>], target: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = target.len();
    let k = columns.len();
    let m = n.min(k);
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut b = target.to_vec();
    let mut v = vec![0.0; n];

    for p in 0..m {
        let norm = a[p][p..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[p][p] > 0.0 { -norm } else { norm };
        v[p..].copy_from_slice(&a[p][p..]);
        v[p] -= alpha;
        let v_norm_sq: f64 = v[p..].iter().map(|x| x * x).sum();
        if v_norm_sq == 0.0 {
            continue;
        }
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v[p..].iter().zip(&col[p..]).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / v_norm_sq;
            for (c, vi) in col[p..].iter_mut().zip(&v[p..]) {
                *c -= s * vi;
            }
        };
        for col in a.iter_mut().skip(p + 1) {
            reflect(col);
        }
        reflect(&mut b);
        a[p][p] = alpha;
        for x in &mut a[p][p + 1..] {
            *x = 0.0;
        }
    }

    let mut r = vec![0.0; m * k];
    for (j, col) in a.iter().enumerate() {
        for i in 0..m.min(j + 1) {
            r[i * k + j] = col[i];
        }
    }
    b.truncate(m);
    (r, b)
}

struct SmallSvd {
    /// `m × K`, column j holds `u_j` (zero where σ_j = 0).
    left: Vec<f64>,
    singular: Vec<f64>,
    /// `K × K`, column j holds `v_j`.
    right: Vec<f64>,
}

/// One-sided (Hestenes) Jacobi SVD of an `m × K` row-major matrix.
fn jacobi_svd(matrix: &[f64], m: usize, k: usize) -> SmallSvd {
    let mut w = matrix.to_vec();
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    let col_dot = |w: &[f64], a: usize, b: usize| -> f64 {
        (0..m).map(|i| w[i * k + a] * w[i * k + b]).sum()
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = col_dot(&w, p, p);
                let beta = col_dot(&w, q, q);
                let gamma = col_dot(&w, p, q);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (wp, wq) = (w[i * k + p], w[i * k + q]);
                    w[i * k + p] = c * wp - s * wq;
                    w[i * k + q] = s * wp + c * wq;
                }
                for i in 0..k {
                    let (vp, vq) = (v[i * k + p], v[i * k + q]);
                    v[i * k + p] = c * vp - s * vq;
                    v[i * k + q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let singular: Vec<f64> = (0..k).map(|j| col_dot(&w, j, j).sqrt()).collect();
    for (j, &sigma) in singular.iter().enumerate() {
        for i in 0..m {
            w[i * k + j] = if sigma > 0.0 {
                w[i * k + j] / sigma
            } else {
                0.0
            };
        }
    }
    SmallSvd {
        left: w,
        singular,
        right: v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_single_column() {
        let sol = least_squares(&[vec![-1.0, 1.0]], &[1.0, -1.0], DEFAULT_RANK_TOL).unwrap();
        assert!((sol.coefficients[0] + 1.0).abs() < 1e-15);
        assert!(sol.residual_norm < 1e-15);
        assert_eq!(sol.effective_rank, 1);
    }

    #[test]
    fn duplicated_columns_split_evenly() {
        let col = vec![1.0, 0.0];
        let sol = least_squares(&[col.clone(), col], &[1.0, 0.0], DEFAULT_RANK_TOL).unwrap();
        assert!((sol.coefficients[0] - 0.5).abs() < 1e-14);
        assert!((sol.coefficients[1] - 0.5).abs() < 1e-14);
        assert!(sol.residual_norm < 1e-14);
        assert_eq!(sol.effective_rank, 1);
    }

    #[test]
    fn zero_basis_gives_zero_coefficients() {
        let sol = least_squares(&[vec![0.0; 3], vec![0.0; 3]], &[1.0, 2.0, 2.0], 1e-10).unwrap();
        assert_eq!(sol.coefficients, vec![0.0, 0.0]);
        assert_eq!(sol.effective_rank, 0);
        assert!((sol.residual_norm - 3.0).abs() < 1e-15);
    }

    #[test]
    fn wide_system_is_solved_with_minimum_norm() {
        // one equation, two unknowns: c1 + 2 c2 = 5 → minimum norm (1, 2)
        let sol = least_squares(&[vec![1.0], vec![2.0]], &[5.0], DEFAULT_RANK_TOL).unwrap();
        assert!((sol.coefficients[0] - 1.0).abs() < 1e-14);
        assert!((sol.coefficients[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_square_system() {
        let cols = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let sol = least_squares(&cols, &[3.0, 5.0], DEFAULT_RANK_TOL).unwrap();
        assert!((sol.coefficients[0] - 0.8).abs() < 1e-14);
        assert!((sol.coefficients[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        assert!(matches!(
            least_squares(&[vec![f64::NAN]], &[1.0], 1e-10),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            least_squares(&[vec![1.0]], &[f64::INFINITY], 1e-10),
            Err(Error::NonFinite(_))
        ));
        assert!(least_squares(&[], &[1.0], 1e-10).is_err());
        assert!(least_squares(&[vec![1.0, 2.0]], &[1.0], 1e-10).is_err());
    }
}
