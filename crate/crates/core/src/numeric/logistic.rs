//! Multinomial (softmax) logistic regression trained with L-BFGS.
//!
//! The objective is the per-sample averaged cross-entropy plus an L2 penalty
//! on the weights (never the bias). With the default
//! [`Regularization::InverseStrength`]`(1.0)` the penalty is `½‖W‖² / n`,
//! which has the same minimizer as summed cross-entropy plus `½‖W‖²`.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::{Error, FeatureMatrix, Result};

/// Rows per parallel work unit; partial sums are combined in chunk order.
const ROW_CHUNK: usize = 256;
const LBFGS_MEMORY: usize = 10;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    /// Inverse strength `C`: penalty `‖W‖² / (2 C n)` for `n` training rows.
    InverseStrength(f64),
    /// Penalty `λ/2 ‖W‖²` regardless of the number of rows.
    Fixed(f64),
}

impl Regularization {
    fn lambda(self, n_samples: usize) -> f64 {
        match self {
            Regularization::InverseStrength(c) => 1.0 / (c * n_samples as f64),
            Regularization::Fixed(lambda) => lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    pub max_iter: usize,
    /// Stop once the largest absolute gradient entry falls below this.
    pub tol: f64,
    pub regularization: Regularization,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            tol: 1e-5,
            regularization: Regularization::InverseStrength(1.0),
        }
    }
}

impl LogisticConfig {
    fn validate(&self) -> Result<()> {
        let reg_ok = match self.regularization {
            Regularization::InverseStrength(c) => c > 0.0 && c.is_finite(),
            Regularization::Fixed(l) => l >= 0.0 && l.is_finite(),
        };
        if !reg_ok {
            return Err(Error::invalid(format!(
                "regularization {:?}",
                self.regularization
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::invalid(format!("tolerance {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    n_features: usize,
    /// `n_features × n_classes`, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
    classes: Vec<usize>,
    iterations: usize,
    converged: bool,
}

impl LogisticModel {
    /// Assembles a model from explicit parameters.
    pub fn from_parts(
        n_features: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        classes: Vec<usize>,
    ) -> Result<Self> {
        let n_classes = classes.len();
        if weights.len() != n_features * n_classes {
            return Err(Error::DimensionMismatch {
                context: "logistic weight matrix",
                expected: n_features * n_classes,
                actual: weights.len(),
            });
        }
        if bias.len() != n_classes {
            return Err(Error::DimensionMismatch {
                context: "logistic bias vector",
                expected: n_classes,
                actual: bias.len(),
            });
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("logistic parameters"));
        }
        Ok(Self {
            n_features,
            weights,
            bias,
            classes,
            iterations: 0,
            converged: true,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    fn check_width(&self, x: &FeatureMatrix) -> Result<()> {
        if x.n_cols() == self.n_features {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context: "feature width vs model",
                expected: self.n_features,
                actual: x.n_cols(),
            })
        }
    }

    fn scores_into(&self, row: &[f64], scores: &mut [f64]) {
        class_scores(row, &self.weights, &self.bias, scores);
    }

    /// Class probabilities, one row per input row.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        self.check_width(x)?;
        let l = self.n_classes();
        let mut out = vec![0.0; x.n_rows() * l];
        for (row, probs) in x.rows().zip(out.chunks_exact_mut(l)) {
            self.scores_into(row, probs);
            let lse = log_sum_exp(probs);
            for p in probs.iter_mut() {
                *p = (*p - lse).exp();
            }
        }
        FeatureMatrix::new(x.n_rows(), l, out)
    }

    /// Predicted labels; ties go to the lowest class index.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        self.check_width(x)?;
        let mut scores = vec![0.0; self.n_classes()];
        Ok(x.rows()
            .map(|row| {
                self.scores_into(row, &mut scores);
                self.classes[argmax(&scores)]
            })
            .collect())
    }
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "prediction vs truth length",
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::invalid("accuracy of an empty label set"));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Trains a softmax classifier from zero initialization.
pub fn fit_logistic(
    x: &FeatureMatrix,
    y: &[usize],
    config: &LogisticConfig,
) -> Result<LogisticModel> {
    config.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "feature rows vs labels",
            expected: x.n_rows(),
            actual: y.len(),
        });
    }
    if x.n_cols() == 0 {
        return Err(Error::invalid(
            "logistic regression needs at least one feature",
        ));
    }
    let mut classes: Vec<usize> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    match classes.len() {
        0 => return Err(Error::invalid("empty training set")),
        1 => return Err(Error::SingleClass(classes[0])),
        _ => {}
    }
    let targets: Vec<usize> = y
        .iter()
        .map(|label| {
            classes
                .binary_search(label)
                .expect("label drawn from classes")
        })
        .collect();

    let f = x.n_cols();
    let l = classes.len();
    let lambda = config.regularization.lambda(y.len());
    let objective = |params: &[f64]| softmax_objective(x, &targets, l, params, lambda);

    let (params, iterations, converged) =
        minimize_lbfgs(objective, vec![0.0; f * l + l], config.max_iter, config.tol);
    if !converged {
        log::debug!(
            "logistic regression stopped after {iterations} iterations without reaching tol"
        );
    }
    let (weights, bias) = params.split_at(f * l);
    Ok(LogisticModel {
        n_features: f,
        weights: weights.to_vec(),
        bias: bias.to_vec(),
        classes,
        iterations,
        converged,
    })
}

/// Averaged cross-entropy plus `λ/2 ‖W‖²` and its gradient.
///
/// `params` holds the `f × L` weight matrix (row-major) followed by the `L`
/// biases; `targets` are class indices in `0..L`.
pub fn softmax_objective(
    x: &FeatureMatrix,
    targets: &[usize],
    n_classes: usize,
    params: &[f64],
    lambda: f64,
) -> (f64, Vec<f64>) {
    let f = x.n_cols();
    let l = n_classes;
    let n = x.n_rows();
    assert_eq!(params.len(), f * l + l, "parameter vector length");
    assert_eq!(targets.len(), n, "one target per row");
    let (weights, bias) = params.split_at(f * l);

    let partials: Vec<(f64, Vec<f64>)> = x
        .as_slice()
        .par_chunks(ROW_CHUNK * f.max(1))
        .zip(targets.par_chunks(ROW_CHUNK))
        .map(|(rows, chunk_targets)| {
            let mut loss = 0.0;
            let mut grad = vec![0.0; f * l + l];
            let mut scores = vec![0.0; l];
            for (row, &t) in rows.chunks_exact(f.max(1)).zip(chunk_targets) {
                class_scores(row, weights, bias, &mut scores);
                let lse = log_sum_exp(&scores);
                loss += lse - scores[t];
                for s in scores.iter_mut() {
                    *s = (*s - lse).exp();
                }
                scores[t] -= 1.0;
                for (k, &xk) in row.iter().enumerate() {
                    if xk != 0.0 {
                        let g = &mut grad[k * l..(k + 1) * l];
                        for (gc, pc) in g.iter_mut().zip(&scores) {
                            *gc += xk * pc;
                        }
                    }
                }
                for (gb, pc) in grad[f * l..].iter_mut().zip(&scores) {
                    *gb += pc;
                }
            }
            (loss, grad)
        })
        .collect();

    let mut loss = 0.0;
    let mut grad = vec![0.0; f * l + l];
    for (chunk_loss, chunk_grad) in partials {
        loss += chunk_loss;
        for (g, c) in grad.iter_mut().zip(&chunk_grad) {
            *g += c;
        }
    }
    let inv_n = 1.0 / n as f64;
    loss *= inv_n;
    for g in grad.iter_mut() {
        *g *= inv_n;
    }
    if lambda > 0.0 {
        let mut penalty = 0.0;
        for (g, w) in grad[..f * l].iter_mut().zip(weights) {
            *g += lambda * w;
            penalty += w * w;
        }
        loss += 0.5 * lambda * penalty;
    }
    (loss, grad)
}

fn class_scores(row: &[f64], weights: &[f64], bias: &[f64], scores: &mut [f64]) {
    let l = bias.len();
    scores.copy_from_slice(bias);
    for (k, &xk) in row.iter().enumerate() {
        if xk != 0.0 {
            for (s, w) in scores.iter_mut().zip(&weights[k * l..(k + 1) * l]) {
                *s += xk * w;
            }
        }
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Index of the first maximum.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Correction {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Limited-memory BFGS with Armijo backtracking. Returns the final point, the
/// number of iterations taken and whether the gradient tolerance was met.
fn minimize_lbfgs<F>(
    objective: F,
    mut x: Vec<f64>,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, usize, bool)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (mut value, mut grad) = objective(&x);
    let mut history: VecDeque<Correction> = VecDeque::with_capacity(LBFGS_MEMORY);
    let mut alpha = vec![0.0; LBFGS_MEMORY];

    for iter in 0..max_iter {
        if max_abs(&grad) <= tol {
            return (x, iter, true);
        }

        // two-loop recursion
        let mut direction: Vec<f64> = grad.iter().map(|g| -g).collect();
        for (i, c) in history.iter().enumerate().rev() {
            alpha[i] = c.rho * dot(&c.s, &direction);
            for (d, y) in direction.iter_mut().zip(&c.y) {
                *d -= alpha[i] * y;
            }
        }
        let gamma = history
            .back()
            .map_or(1.0, |c| dot(&c.s, &c.y) / dot(&c.y, &c.y));
        for d in direction.iter_mut() {
            *d *= gamma;
        }
        for (i, c) in history.iter().enumerate() {
            let beta = c.rho * dot(&c.y, &direction);
            for (d, s) in direction.iter_mut().zip(&c.s) {
                *d += (alpha[i] - beta) * s;
            }
        }

        let mut slope = dot(&direction, &grad);
        if !(slope < 0.0) {
            history.clear();
            direction = grad.iter().map(|g| -g).collect();
            slope = -dot(&grad, &grad);
        }
        let mut step = if history.is_empty() {
            (1.0 / max_abs(&grad)).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate: Vec<f64> = x
                .iter()
                .zip(&direction)
                .map(|(xi, di)| xi + step * di)
                .collect();
            let (cand_value, cand_grad) = objective(&candidate);
            if cand_value.is_finite() && cand_value <= value + ARMIJO_C1 * step * slope {
                accepted = Some((candidate, cand_value, cand_grad));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_value, next_grad)) = accepted else {
            // no decrease possible at working precision
            return (x, iter, max_abs(&grad) <= tol);
        };

        let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&y, &y) {
            if history.len() == LBFGS_MEMORY {
                history.pop_front();
            }
            history.push_back(Correction {
                s,
                y,
                rho: 1.0 / sy,
            });
        }
        x = next;
        value = next_value;
        grad = next_grad;
    }
    let converged = max_abs(&grad) <= tol;
    (x, max_iter, converged)
}
