//! Node-classification protocol: per-method trials on shared random splits,
//! the validation-driven convex-combination search, K-sweeps and
//! proportional-accuracy aggregation.
//!
//! Baselines without hyperparameters (raw, SGC, SGC-1, ASGC) train on
//! train ∪ validation. The combination method selects its weights on the
//! validation set and then retrains on train ∪ validation with the winner.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::data::{make_splits, LabeledDataset, SplitSpec};
use crate::filters::{asgc_filter, blend, sgc_filter, simplex_grid, ComboWeights};
use crate::numeric::{accuracy, fit_logistic, LogisticConfig, LogisticModel, DEFAULT_RANK_TOL};
use crate::{Error, FeatureMatrix, Result, DEFAULT_RESOLUTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Raw,
    Sgc,
    Sgc1,
    Asgc,
    Combo,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Raw,
        Method::Sgc,
        Method::Sgc1,
        Method::Asgc,
        Method::Combo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Raw => "raw",
            Method::Sgc => "sgc",
            Method::Sgc1 => "sgc1",
            Method::Asgc => "asgc",
            Method::Combo => "combo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method {s:?} (expected raw, sgc, sgc1, asgc or combo)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub logistic: LogisticConfig,
    pub resolution: u32,
    pub rank_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            logistic: LogisticConfig::default(),
            resolution: DEFAULT_RESOLUTION,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// Filtered versions of a dataset's features for one `K`. The filters are
/// unsupervised, so one set serves every split.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredFeatures {
    pub k_hops: usize,
    pub sgc: FeatureMatrix,
    /// `S̃X`, the SGC-1 baseline.
    pub sgc1: FeatureMatrix,
    pub asgc: FeatureMatrix,
}

impl FilteredFeatures {
    pub fn compute(dataset: &LabeledDataset, k_hops: usize, rank_tol: f64) -> Result<Self> {
        let graph = dataset.graph();
        let x = dataset.features();
        let sgc = sgc_filter(graph, x, k_hops)?;
        let sgc1 = if k_hops == 1 {
            sgc.clone()
        } else {
            sgc_filter(graph, x, 1)?
        };
        let asgc = asgc_filter(graph, x, k_hops, rank_tol)?.filtered;
        Ok(Self {
            k_hops,
            sgc,
            sgc1,
            asgc,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub dataset: String,
    pub method: Method,
    pub k_hops: usize,
    pub trial: usize,
    /// Seed of the split this trial used.
    pub seed: u64,
    pub test_accuracy: f64,
    /// Best validation accuracy of the combination search.
    pub validation_accuracy: Option<f64>,
    pub chosen_weights: Option<ComboWeights>,
}

/// Fits on `train` rows and reports accuracy on `eval` rows.
pub fn train_and_score(
    x: &FeatureMatrix,
    labels: &[usize],
    train: &[usize],
    eval: &[usize],
    config: &LogisticConfig,
) -> Result<(LogisticModel, f64)> {
    let y_train: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    let model = fit_logistic(&x.select_rows(train), &y_train, config)?;
    let y_eval: Vec<usize> = eval.iter().map(|&i| labels[i]).collect();
    let predicted = model.predict(&x.select_rows(eval))?;
    let acc = accuracy(&predicted, &y_eval)?;
    Ok((model, acc))
}

#[derive(Debug, Clone)]
pub struct ComboOutcome {
    /// Classifier retrained on train ∪ validation with the winning blend.
    pub model: LogisticModel,
    pub weights: ComboWeights,
    pub validation_accuracy: f64,
    /// Every grid point with its validation accuracy, in grid order.
    pub candidates: Vec<(ComboWeights, f64)>,
    pub test_accuracy: f64,
}

/// Searches the simplex grid for the blend with the best validation accuracy
/// (first maximum in grid order wins), then retrains on train ∪ validation.
pub fn combo_search(
    dataset: &LabeledDataset,
    split: &SplitSpec,
    x_raw: &FeatureMatrix,
    x_sgc: &FeatureMatrix,
    x_asgc: &FeatureMatrix,
    config: &ExperimentConfig,
) -> Result<ComboOutcome> {
    let labels = dataset.labels();
    let grid = simplex_grid(config.resolution)?;
    let candidates: Vec<(ComboWeights, f64)> = grid
        .par_iter()
        .map(|w| {
            let x = blend(x_raw, x_sgc, x_asgc, w)?;
            let (_, acc) = train_and_score(
                &x,
                labels,
                &split.train,
                &split.validation,
                &config.logistic,
            )?;
            Ok((*w, acc))
        })
        .collect::<Result<_>>()?;

    let (mut weights, mut best) = candidates[0];
    for &(w, acc) in &candidates[1..] {
        if acc > best {
            weights = w;
            best = acc;
        }
    }
    let x = blend(x_raw, x_sgc, x_asgc, &weights)?;
    let (model, test_accuracy) = train_and_score(
        &x,
        labels,
        &split.train_and_validation(),
        &split.test,
        &config.logistic,
    )?;
    Ok(ComboOutcome {
        model,
        weights,
        validation_accuracy: best,
        candidates,
        test_accuracy,
    })
}

/// One method on one split. `trial` is left at 0 for the caller to set.
pub fn run_method(
    dataset: &LabeledDataset,
    split: &SplitSpec,
    method: Method,
    features: &FilteredFeatures,
    config: &ExperimentConfig,
) -> Result<TrialResult> {
    let labels = dataset.labels();
    let x_raw = dataset.features();
    let train_val = split.train_and_validation();
    let mut result = TrialResult {
        dataset: dataset.name().to_string(),
        method,
        k_hops: features.k_hops,
        trial: 0,
        seed: split.seed,
        test_accuracy: 0.0,
        validation_accuracy: None,
        chosen_weights: None,
    };
    let single = |x: &FeatureMatrix| -> Result<f64> {
        Ok(train_and_score(x, labels, &train_val, &split.test, &config.logistic)?.1)
    };
    match method {
        Method::Raw => result.test_accuracy = single(x_raw)?,
        Method::Sgc => result.test_accuracy = single(&features.sgc)?,
        Method::Sgc1 => {
            result.k_hops = 1;
            result.test_accuracy = single(&features.sgc1)?;
        }
        Method::Asgc => result.test_accuracy = single(&features.asgc)?,
        Method::Combo => {
            let outcome =
                combo_search(dataset, split, x_raw, &features.sgc, &features.asgc, config)?;
            result.test_accuracy = outcome.test_accuracy;
            result.validation_accuracy = Some(outcome.validation_accuracy);
            result.chosen_weights = Some(outcome.weights);
        }
    }
    Ok(result)
}

/// Split seed of trial `t`; every method and `K` share it.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed.wrapping_add(trial as u64)
}

fn sort_results(results: &mut [TrialResult]) {
    results.sort_by(|a, b| {
        (&a.dataset, a.k_hops, a.method, a.trial).cmp(&(&b.dataset, b.k_hops, b.method, b.trial))
    });
}

/// Runs every method on `trials` random splits with precomputed features.
pub fn run_trials(
    dataset: &LabeledDataset,
    methods: &[Method],
    features: &FilteredFeatures,
    trials: usize,
    base_seed: u64,
    config: &ExperimentConfig,
) -> Result<Vec<TrialResult>> {
    if methods.is_empty() || trials == 0 {
        return Err(Error::invalid("need at least one method and one trial"));
    }
    let splits: Vec<SplitSpec> = (0..trials)
        .map(|t| make_splits(dataset.n_nodes(), trial_seed(base_seed, t)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, Method)> = (0..trials)
        .flat_map(|t| methods.iter().map(move |&m| (t, m)))
        .collect();
    let mut results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(t, method)| {
            let r = run_method(dataset, &splits[t], method, features, config)?;
            Ok(TrialResult { trial: t, ..r })
        })
        .collect::<Result<_>>()?;
    sort_results(&mut results);
    Ok(results)
}

/// Full cross-product of `k_values × methods × trials`.
pub fn k_sweep(
    dataset: &LabeledDataset,
    methods: &[Method],
    k_values: &[usize],
    trials: usize,
    base_seed: u64,
    config: &ExperimentConfig,
) -> Result<Vec<TrialResult>> {
    if k_values.is_empty() {
        return Err(Error::invalid("empty list of K values"));
    }
    let mut results = Vec::new();
    for &k in k_values {
        let features = FilteredFeatures::compute(dataset, k, config.rank_tol)?;
        results.extend(run_trials(
            dataset, methods, &features, trials, base_seed, config,
        )?);
    }
    sort_results(&mut results);
    Ok(results)
}

/// Published accuracies of methods that are not re-run here, keyed by
/// method then dataset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalBaselines {
    entries: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ExternalBaselines {
    pub fn insert(&mut self, method: &str, dataset: &str, accuracy: f64) {
        self.entries
            .entry(method.to_string())
            .or_default()
            .insert(dataset.to_string(), accuracy);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub dataset: String,
    pub method: String,
    pub mean: f64,
    /// Population standard deviation over trials (0 for reported rows).
    pub std: f64,
    pub n_trials: usize,
    /// `mean / best mean on this dataset`.
    pub proportion: f64,
    pub reported: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub mean_proportion: f64,
    pub min_proportion: f64,
    pub reported: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    /// Sorted by dataset, then method.
    pub per_dataset: Vec<DatasetSummary>,
    /// Sorted by method name.
    pub per_method: Vec<MethodSummary>,
}

/// Proportional-accuracy aggregation: per dataset every method's mean
/// accuracy is divided by the best mean, then the mean and minimum of those
/// proportions are taken across datasets.
pub fn aggregate(
    results: &[TrialResult],
    external: Option<&ExternalBaselines>,
) -> Result<AggregateReport> {
    if results.is_empty() {
        return Err(Error::invalid("no results to aggregate"));
    }
    // method -> dataset -> (k, accuracies)
    let mut grouped: BTreeMap<String, BTreeMap<String, (usize, Vec<f64>)>> = BTreeMap::new();
    for r in results {
        let slot = grouped
            .entry(r.method.name().to_string())
            .or_default()
            .entry(r.dataset.clone())
            .or_insert_with(|| (r.k_hops, Vec::new()));
        if slot.0 != r.k_hops {
            return Err(Error::invalid(format!(
                "method {} mixes K = {} and K = {} on {}",
                r.method, slot.0, r.k_hops, r.dataset
            )));
        }
        slot.1.push(r.test_accuracy);
    }

    // method -> dataset -> (mean, std, n, reported)
    let mut table: BTreeMap<String, BTreeMap<String, (f64, f64, usize, bool)>> = BTreeMap::new();
    for (method, per_dataset) in grouped {
        let row = table.entry(method).or_default();
        for (dataset, (_, accs)) in per_dataset {
            let n = accs.len() as f64;
            let mean = accs.iter().sum::<f64>() / n;
            let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
            row.insert(dataset, (mean, var.sqrt(), accs.len(), false));
        }
    }
    if let Some(external) = external {
        for (method, per_dataset) in &external.entries {
            if table.contains_key(method) {
                return Err(Error::invalid(format!(
                    "reported baseline {method:?} collides with a computed method"
                )));
            }
            let row = table.entry(method.clone()).or_default();
            for (dataset, &acc) in per_dataset {
                row.insert(dataset.clone(), (acc, 0.0, 0, true));
            }
        }
    }

    let datasets: Vec<String> = {
        let mut all: Vec<String> = results.iter().map(|r| r.dataset.clone()).collect();
        all.sort();
        all.dedup();
        all
    };
    for (method, row) in &table {
        if let Some(missing) = datasets.iter().find(|d| !row.contains_key(*d)) {
            return Err(Error::MissingCoverage {
                method: method.clone(),
                dataset: missing.clone(),
            });
        }
    }

    let mut per_dataset = Vec::new();
    let mut proportions: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for dataset in &datasets {
        let best = table
            .values()
            .map(|row| row[dataset].0)
            .fold(f64::NEG_INFINITY, f64::max);
        for (method, row) in &table {
            let (mean, std, n_trials, reported) = row[dataset];
            let proportion = if best > 0.0 { mean / best } else { 1.0 };
            proportions.entry(method).or_default().push(proportion);
            per_dataset.push(DatasetSummary {
                dataset: dataset.clone(),
                method: method.clone(),
                mean,
                std,
                n_trials,
                proportion,
                reported,
            });
        }
    }
    let per_method = proportions
        .into_iter()
        .map(|(method, props)| MethodSummary {
            method: method.to_string(),
            mean_proportion: props.iter().sum::<f64>() / props.len() as f64,
            min_proportion: props.iter().copied().fold(f64::INFINITY, f64::min),
            reported: table[method].values().any(|v| v.3),
        })
        .collect();
    Ok(AggregateReport {
        per_dataset,
        per_method,
    })
}
