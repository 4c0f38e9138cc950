//! Two-community stochastic block model denoising experiment.
//!
//! Each graph has `n_per_block` "minus" nodes followed by `n_per_block`
//! "plus" nodes. The single feature is the community sign plus standard
//! normal noise; filtering should pull it back towards ∓1.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::filters::{asgc_column, sgc_filter};
use crate::graph::{normalized_adjacency, Graph};
use crate::numeric::DEFAULT_RANK_TOL;
use crate::rng::{stream_id, stream_rng};
use crate::{Error, FeatureMatrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmConfig {
    pub n_per_block: usize,
    pub expected_degree: f64,
    /// `ln(p/q)`; negative values are heterophilous.
    pub log_ratio: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            n_per_block: 500,
            expected_degree: 10.0,
            log_ratio: 0.0,
            seed: 0,
        }
    }
}

impl SbmConfig {
    /// Intra- and inter-block edge probabilities `(p, q)` with
    /// `p + q = expected_degree / n_per_block` and `p / q = e^log_ratio`.
    pub fn edge_probabilities(&self) -> Result<(f64, f64)> {
        if self.n_per_block == 0 {
            return Err(Error::invalid("n_per_block must be positive"));
        }
        if !(self.expected_degree > 0.0 && self.expected_degree.is_finite()) {
            return Err(Error::invalid(format!(
                "expected degree {}",
                self.expected_degree
            )));
        }
        if self.log_ratio.is_nan() {
            return Err(Error::invalid("log ratio is NaN"));
        }
        let total = self.expected_degree / self.n_per_block as f64;
        let sigmoid = |t: f64| 1.0 / (1.0 + (-t).exp());
        let p = total * sigmoid(self.log_ratio);
        let q = total * sigmoid(-self.log_ratio);
        for (name, prob) in [("p", p), ("q", q)] {
            if !(0.0..=1.0).contains(&prob) {
                return Err(Error::invalid(format!(
                    "edge probability {name} = {prob} outside [0, 1]"
                )));
            }
        }
        Ok((p, q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Community {
    Minus,
    Plus,
}

impl Community {
    pub fn sign(self) -> f64 {
        match self {
            Community::Minus => -1.0,
            Community::Plus => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SbmSample {
    pub graph: Graph,
    pub feature: Vec<f64>,
    pub communities: Vec<Community>,
}

/// Samples a graph and noisy feature from the seed's stream 0.
pub fn generate_sbm(config: &SbmConfig) -> Result<SbmSample> {
    generate_sbm_with_rng(config, &mut stream_rng(config.seed, 0))
}

/// Samples a graph and noisy feature, ignoring `config.seed`.
pub fn generate_sbm_with_rng<R: Rng + ?Sized>(
    config: &SbmConfig,
    rng: &mut R,
) -> Result<SbmSample> {
    let (p, q) = config.edge_probabilities()?;
    let nb = config.n_per_block;
    let n = 2 * nb;
    let communities: Vec<Community> = (0..n)
        .map(|i| {
            if i < nb {
                Community::Minus
            } else {
                Community::Plus
            }
        })
        .collect();

    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let prob = if (i < nb) == (j < nb) { p } else { q };
            if rng.random::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    let graph = Graph::from_edges(n, edges)?;
    let feature = communities
        .iter()
        .map(|c| c.sign() + rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(SbmSample {
        graph,
        feature,
        communities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseMetrics {
    /// Root-mean-square distance from the community mean (∓1).
    pub rms_deviation: f64,
    /// Fraction of nodes whose value does not carry the community sign; zero
    /// counts as wrong.
    pub sign_error: f64,
}

pub fn denoise_metrics(filtered: &[f64], communities: &[Community]) -> Result<DenoiseMetrics> {
    check_lengths(filtered, communities)?;
    let n = filtered.len() as f64;
    let mut squared = 0.0;
    let mut wrong = 0usize;
    for (&v, c) in filtered.iter().zip(communities) {
        let target = c.sign();
        squared += (v - target) * (v - target);
        if v * target <= 0.0 {
            wrong += 1;
        }
    }
    Ok(DenoiseMetrics {
        rms_deviation: (squared / n).sqrt(),
        sign_error: wrong as f64 / n,
    })
}

/// Mean filtered value within each community, `(minus, plus)`.
pub fn community_means(filtered: &[f64], communities: &[Community]) -> Result<(f64, f64)> {
    check_lengths(filtered, communities)?;
    let mut sums = [0.0; 2];
    let mut counts = [0usize; 2];
    for (&v, c) in filtered.iter().zip(communities) {
        let k = usize::from(*c == Community::Plus);
        sums[k] += v;
        counts[k] += 1;
    }
    let mean = |k: usize| {
        if counts[k] == 0 {
            0.0
        } else {
            sums[k] / counts[k] as f64
        }
    };
    Ok((mean(0), mean(1)))
}

fn check_lengths(filtered: &[f64], communities: &[Community]) -> Result<()> {
    if filtered.len() != communities.len() {
        return Err(Error::DimensionMismatch {
            context: "filtered feature vs community labels",
            expected: communities.len(),
            actual: filtered.len(),
        });
    }
    if filtered.is_empty() {
        return Err(Error::invalid("empty feature vector"));
    }
    Ok(())
}

/// Denoising quality of one method, averaged over trials.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MethodSummary {
    pub rms_deviation: f64,
    pub sign_error: f64,
    pub mean_minus: f64,
    pub mean_plus: f64,
}

impl MethodSummary {
    fn measure(filtered: &[f64], communities: &[Community]) -> Result<Self> {
        let metrics = denoise_metrics(filtered, communities)?;
        let (mean_minus, mean_plus) = community_means(filtered, communities)?;
        Ok(Self {
            rms_deviation: metrics.rms_deviation,
            sign_error: metrics.sign_error,
            mean_minus,
            mean_plus,
        })
    }

    fn mean_of(items: &[MethodSummary]) -> Self {
        let n = items.len() as f64;
        let avg = |f: fn(&MethodSummary) -> f64| items.iter().map(f).sum::<f64>() / n;
        Self {
            rms_deviation: avg(|m| m.rms_deviation),
            sign_error: avg(|m| m.sign_error),
            mean_minus: avg(|m| m.mean_minus),
            mean_plus: avg(|m| m.mean_plus),
        }
    }
}

/// Metrics for the raw, SGC-filtered and ASGC-filtered feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseReport {
    pub log_ratio: f64,
    pub raw: MethodSummary,
    pub sgc: MethodSummary,
    pub asgc: MethodSummary,
}

/// Filters one sampled feature with SGC and ASGC.
pub fn filter_sample(
    sample: &SbmSample,
    k_hops: usize,
    rank_tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = FeatureMatrix::from_column(sample.feature.clone())?;
    let sgc = sgc_filter(&sample.graph, &x, k_hops)?.into_vec();
    let op = normalized_adjacency(&sample.graph, false);
    let asgc = asgc_column(&op, &sample.feature, k_hops, rank_tol)?.filtered;
    Ok((sgc, asgc))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub n_per_block: usize,
    pub expected_degree: f64,
    pub trials: usize,
    pub k_hops: usize,
    pub seed: u64,
    pub rank_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_per_block: 500,
            expected_degree: 10.0,
            trials: 10,
            k_hops: 2,
            seed: 0,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// `steps` evenly spaced log-ratios from `min` to `max` inclusive.
pub fn log_ratio_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !min.is_finite() || !max.is_finite() || min > max {
        return Err(Error::invalid(format!(
            "log-ratio grid [{min}, {max}] with {steps} steps"
        )));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let width = (max - min) / (steps - 1) as f64;
    Ok((0..steps).map(|i| min + width * i as f64).collect())
}

/// 21 points over `[-5, 5]`.
pub fn default_grid() -> Vec<f64> {
    log_ratio_grid(-5.0, 5.0, 21).expect("static grid")
}

/// Averages denoising metrics over `trials` graphs at every grid point.
///
/// Trial `t` at grid index `g` draws from stream `(g, t)` of `config.seed`,
/// so results do not depend on scheduling.
pub fn run_sweep(grid: &[f64], config: &SweepConfig) -> Result<Vec<DenoiseReport>> {
    if grid.is_empty() {
        return Err(Error::invalid("empty log-ratio grid"));
    }
    if config.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..config.trials).map(move |t| (g, t)))
        .collect();
    let per_trial: Vec<[MethodSummary; 3]> = jobs
        .par_iter()
        .map(|&(g, t)| {
            let sbm = SbmConfig {
                n_per_block: config.n_per_block,
                expected_degree: config.expected_degree,
                log_ratio: grid[g],
                seed: config.seed,
            };
            let mut rng = stream_rng(config.seed, stream_id(g as u32, t as u32));
            let sample = generate_sbm_with_rng(&sbm, &mut rng)?;
            let (sgc, asgc) = filter_sample(&sample, config.k_hops, config.rank_tol)?;
            Ok([
                MethodSummary::measure(&sample.feature, &sample.communities)?,
                MethodSummary::measure(&sgc, &sample.communities)?,
                MethodSummary::measure(&asgc, &sample.communities)?,
            ])
        })
        .collect::<Result<_>>()?;

    Ok(grid
        .iter()
        .zip(per_trial.chunks(config.trials))
        .map(|(&log_ratio, trials)| {
            let method = |m: usize| {
                let items: Vec<MethodSummary> = trials.iter().map(|t| t[m]).collect();
                MethodSummary::mean_of(&items)
            };
            DenoiseReport {
                log_ratio,
                raw: method(0),
                sgc: method(1),
                asgc: method(2),
            }
        })
        .collect())
}
