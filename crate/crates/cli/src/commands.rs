use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use asgc_core::data::{homophily as homophily_of, LabeledDataset, Manifest};
use asgc_core::experiments::{
    aggregate as aggregate_results, k_sweep, run_trials, ExperimentConfig, ExternalBaselines,
    FilteredFeatures, Method, TrialResult,
};
use asgc_core::filters::{asgc_filter, sgc_filter};
use asgc_core::numeric::{LogisticConfig, Regularization};
use asgc_core::synthetic::{log_ratio_grid, run_sweep, DenoiseReport, MethodSummary, SweepConfig};
use asgc_core::FeatureMatrix;

use crate::error::{CliError, CliResult};
use crate::output::{fmt6, Table, Writer};
use crate::svg::{LineChart, Series};
use crate::{AggregateArgs, ClassifyArgs, DatasetArgs, FilterArgs, SweepArgs, SynthArgs};

const TRIAL_HEADER: [&str; 11] = [
    "dataset",
    "method",
    "k_hops",
    "trial",
    "seed",
    "test_accuracy",
    "std",
    "validation_accuracy",
    "w_raw",
    "w_sgc",
    "w_asgc",
];
const SUMMARY_TRIAL: &str = "summary";
const REPORTED: &str = "reported, not reproduced";

fn load(args: &DatasetArgs) -> CliResult<LabeledDataset> {
    if !args.manifest.exists() {
        return Err(CliError::io(
            &args.manifest,
            std::io::Error::new(std::io::ErrorKind::NotFound, "manifest not found"),
        ));
    }
    let manifest = Manifest::load(&args.manifest)?;
    if manifest.entry(&args.dataset).is_none() {
        let known: Vec<&str> = manifest.names().collect();
        return Err(CliError::Config(format!(
            "dataset {:?} not in {} (known: {})",
            args.dataset,
            args.manifest.display(),
            known.join(", ")
        )));
    }
    Ok(manifest.load_dataset(&args.dataset)?)
}

fn parse_methods(raw: &[String]) -> CliResult<Vec<Method>> {
    let mut methods = Vec::new();
    for token in raw {
        let token = token.trim();
        let parsed: Vec<Method> = if token.eq_ignore_ascii_case("all") {
            Method::ALL.to_vec()
        } else {
            vec![token
                .parse::<Method>()
                .map_err(|e| CliError::Config(e.to_string()))?]
        };
        for m in parsed {
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
    }
    if methods.is_empty() {
        return Err(CliError::Config("no methods selected".into()));
    }
    Ok(methods)
}

fn experiment_config(resolution: u32) -> CliResult<ExperimentConfig> {
    if resolution == 0 {
        return Err(CliError::Config("--resolution must be at least 1".into()));
    }
    Ok(ExperimentConfig {
        resolution,
        ..ExperimentConfig::default()
    })
}

fn describe_logistic(cfg: &LogisticConfig) -> String {
    let penalty = match cfg.regularization {
        Regularization::InverseStrength(c) => format!("L2 strength 1/(C*n_train) with C = {c}"),
        Regularization::Fixed(l) => format!("L2 strength {l}"),
    };
    format!(
        "multinomial, L-BFGS, max_iter {}, gradient tol {:e}, {penalty}",
        cfg.max_iter, cfg.tol
    )
}

fn metadata(
    command: &str,
    dataset: &str,
    ks: &str,
    config: &ExperimentConfig,
    trials: usize,
    seed: u64,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "command = \"{command}\"");
    let _ = writeln!(s, "dataset = \"{dataset}\"");
    let _ = writeln!(s, "k_hops = \"{ks}\"");
    let _ = writeln!(s, "resolution = {}", config.resolution);
    let _ = writeln!(s, "trials = {trials}");
    let _ = writeln!(s, "seed = {seed}");
    let _ = writeln!(s, "split = \"test floor(n/5), validation floor((n - test)/3), train the rest; trial t uses seed + t\"");
    let _ = writeln!(s, "baseline_training = \"train+validation\"");
    let _ = writeln!(
        s,
        "combo_selection = \"validation accuracy, first maximum in lattice order, winner retrained on train+validation\""
    );
    let _ = writeln!(
        s,
        "classifier = \"{}\"",
        describe_logistic(&config.logistic)
    );
    s
}

fn push_trials(table: &mut Table, results: &[TrialResult]) {
    for r in results {
        let (w_raw, w_sgc, w_asgc) = match r.chosen_weights {
            Some(w) => (fmt6(w.w_raw()), fmt6(w.w_sgc()), fmt6(w.w_asgc())),
            None => Default::default(),
        };
        table.push(vec![
            r.dataset.clone(),
            r.method.to_string(),
            r.k_hops.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            fmt6(r.test_accuracy),
            String::new(),
            r.validation_accuracy.map(fmt6).unwrap_or_default(),
            w_raw,
            w_sgc,
            w_asgc,
        ]);
    }
}

/// One summary row per (K, method), in first-appearance order.
fn push_summaries(table: &mut Table, results: &[TrialResult]) {
    let mut groups: Vec<((usize, Method), Vec<&TrialResult>)> = Vec::new();
    for r in results {
        let key = (r.k_hops, r.method);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, items)) => items.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    for ((k, method), items) in groups {
        let n = items.len() as f64;
        let mean = items.iter().map(|r| r.test_accuracy).sum::<f64>() / n;
        let std = (items
            .iter()
            .map(|r| (r.test_accuracy - mean).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        table.push(vec![
            items[0].dataset.clone(),
            method.to_string(),
            k.to_string(),
            SUMMARY_TRIAL.to_string(),
            String::new(),
            fmt6(mean),
            fmt6(std),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
}

fn trial_table(results: &[TrialResult]) -> Table {
    let mut table = Table::new(TRIAL_HEADER);
    push_trials(&mut table, results);
    push_summaries(&mut table, results);
    table
}

pub fn synth(args: SynthArgs) -> CliResult<()> {
    let grid = log_ratio_grid(args.log_ratio_min, args.log_ratio_max, args.log_ratio_steps)?;
    let config = SweepConfig {
        n_per_block: args.n_per_block,
        expected_degree: args.degree,
        trials: args.trials,
        k_hops: args.k,
        seed: args.seed,
        ..SweepConfig::default()
    };
    if config.k_hops == 0 {
        return Err(CliError::Config("--k must be at least 1".into()));
    }
    let reports = run_sweep(&grid, &config)?;
    let writer = Writer::new(args.out)?;

    let methods = |r: &DenoiseReport| -> [(&'static str, MethodSummary); 3] {
        [("raw", r.raw), ("sgc", r.sgc), ("asgc", r.asgc)]
    };
    let mut table = Table::new(["log_ratio", "method", "metric", "value"]);
    let mut means = Table::new(["log_ratio", "method", "mean_minus", "mean_plus"]);
    for r in &reports {
        for (name, m) in methods(r) {
            for (metric, value) in [
                ("rms_deviation", m.rms_deviation),
                ("sign_error", m.sign_error),
            ] {
                table.push(vec![
                    fmt6(r.log_ratio),
                    name.into(),
                    metric.into(),
                    fmt6(value),
                ]);
            }
            means.push(vec![
                fmt6(r.log_ratio),
                name.into(),
                fmt6(m.mean_minus),
                fmt6(m.mean_plus),
            ]);
        }
    }
    writer.primary("synth.csv", &table)?;
    writer.secondary_table("synth_community_means.csv", &means)?;

    if args.svg {
        for (metric, label, pick) in [
            (
                "rms_deviation",
                "RMS deviation from community mean",
                (|m: &MethodSummary| m.rms_deviation) as fn(&MethodSummary) -> f64,
            ),
            (
                "sign_error",
                "fraction of nodes with wrong sign",
                |m: &MethodSummary| m.sign_error,
            ),
        ] {
            let series = ["raw", "sgc", "asgc"]
                .iter()
                .enumerate()
                .map(|(i, name)| Series {
                    name: (*name).to_string(),
                    points: reports
                        .iter()
                        .map(|r| (r.log_ratio, pick(&methods(r)[i].1)))
                        .collect(),
                })
                .collect();
            let chart = LineChart {
                title: format!("Denoising, K = {}", args.k),
                x_label: "ln(p/q)".into(),
                y_label: label.into(),
                series,
            };
            writer.secondary(&format!("synth_{metric}.svg"), chart.render().as_bytes())?;
        }
    }
    Ok(())
}

fn matrix_text(x: &FeatureMatrix) -> String {
    let mut s = String::new();
    for row in x.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn filter(args: FilterArgs) -> CliResult<()> {
    let ds = load(&args.data)?;
    let writer = Writer::new(Some(args.out))?;
    let x = ds.features();
    let sgc = sgc_filter(ds.graph(), x, args.k)?;
    let asgc = asgc_filter(ds.graph(), x, args.k, ExperimentConfig::default().rank_tol)?;
    let name = ds.name();
    writer.secondary(
        &format!("{name}_sgc_k{}.csv", args.k),
        matrix_text(&sgc).as_bytes(),
    )?;
    writer.secondary(
        &format!("{name}_asgc_k{}.csv", args.k),
        matrix_text(&asgc.filtered).as_bytes(),
    )?;

    let mut header = vec!["feature".to_string()];
    header.extend((1..=args.k).map(|k| format!("c{k}")));
    header.push("residual_norm".into());
    let mut coefficients = Table::new(header);
    for j in 0..x.n_cols() {
        let mut row = vec![j.to_string()];
        row.extend(asgc.feature_coefficients(j).iter().map(|&c| fmt6(c)));
        row.push(fmt6(asgc.residual_norms[j]));
        coefficients.push(row);
    }
    writer.secondary_table(
        &format!("{name}_asgc_k{}_coefficients.csv", args.k),
        &coefficients,
    )
}

pub fn classify(args: ClassifyArgs) -> CliResult<()> {
    let methods = parse_methods(&args.method)?;
    let config = experiment_config(args.resolution)?;
    if args.k == 0 || args.trials == 0 {
        return Err(CliError::Config(
            "--k and --trials must be at least 1".into(),
        ));
    }
    let ds = load(&args.data)?;
    let features = FilteredFeatures::compute(&ds, args.k, config.rank_tol)?;
    let results = run_trials(&ds, &methods, &features, args.trials, args.seed, &config)?;

    let writer = Writer::new(args.out)?;
    let meta = metadata(
        "classify",
        ds.name(),
        &args.k.to_string(),
        &config,
        args.trials,
        args.seed,
    );
    log::info!("run metadata:\n{meta}");
    writer.primary(
        &format!("{}_classify.csv", ds.name()),
        &trial_table(&results),
    )?;
    writer.secondary(
        &format!("{}_classify_metadata.toml", ds.name()),
        meta.as_bytes(),
    )
}

pub fn sweep(args: SweepArgs) -> CliResult<()> {
    let methods = parse_methods(&args.method)?;
    let config = experiment_config(args.resolution)?;
    if args.k_min == 0 || args.k_min > args.k_max || args.trials == 0 {
        return Err(CliError::Config(format!(
            "need 1 <= --k-min <= --k-max and --trials >= 1 (got {}..{}, {})",
            args.k_min, args.k_max, args.trials
        )));
    }
    let ds = load(&args.data)?;
    let ks: Vec<usize> = (args.k_min..=args.k_max).collect();
    let results = k_sweep(&ds, &methods, &ks, args.trials, args.seed, &config)?;

    let writer = Writer::new(args.out)?;
    let name = ds.name();
    let meta = metadata(
        "sweep",
        name,
        &format!("{}..={}", args.k_min, args.k_max),
        &config,
        args.trials,
        args.seed,
    );
    writer.primary(&format!("{name}_sweep.csv"), &trial_table(&results))?;
    writer.secondary(&format!("{name}_sweep_metadata.toml"), meta.as_bytes())?;

    if args.svg {
        let series = methods
            .iter()
            .map(|&m| {
                let points = ks
                    .iter()
                    .map(|&k| {
                        // sgc1 ignores K, so its rows all carry k_hops = 1
                        let accs: Vec<f64> = results
                            .iter()
                            .filter(|r| r.method == m && (r.k_hops == k || m == Method::Sgc1))
                            .map(|r| r.test_accuracy)
                            .collect();
                        (k as f64, accs.iter().sum::<f64>() / accs.len() as f64)
                    })
                    .collect();
                Series {
                    name: m.to_string(),
                    points,
                }
            })
            .collect();
        let chart = LineChart {
            title: format!("{name}: test accuracy versus hops"),
            x_label: "K".into(),
            y_label: "mean test accuracy".into(),
            series,
        };
        writer.secondary(&format!("{name}_sweep.svg"), chart.render().as_bytes())?;
    }
    Ok(())
}

fn csv_reader(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> CliResult<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::input(path, format!("missing column {name:?}")))
}

fn field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    path: &Path,
    line: u64,
) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    let raw = record.get(idx).unwrap_or("");
    raw.parse::<T>()
        .map_err(|e| CliError::input(path, format!("line {line}: {raw:?}: {e}")))
}

fn read_trials(path: &Path, k_filter: Option<usize>) -> CliResult<Vec<TrialResult>> {
    let mut reader = csv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::input(path, e.to_string()))?
        .clone();
    let idx: BTreeMap<&str, usize> = [
        "dataset",
        "method",
        "k_hops",
        "trial",
        "seed",
        "test_accuracy",
    ]
    .into_iter()
    .map(|name| column(&headers, name, path).map(|i| (name, i)))
    .collect::<CliResult<_>>()?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = record.map_err(|e| CliError::input(path, e.to_string()))?;
        if record.get(idx["trial"]) == Some(SUMMARY_TRIAL) {
            continue;
        }
        let method: Method = record
            .get(idx["method"])
            .unwrap_or("")
            .parse()
            .map_err(|e: asgc_core::Error| CliError::input(path, format!("line {line}: {e}")))?;
        let k_hops: usize = field(&record, idx["k_hops"], path, line)?;
        if k_filter.is_some_and(|k| k != k_hops && method != Method::Sgc1) {
            continue;
        }
        let test_accuracy: f64 = field(&record, idx["test_accuracy"], path, line)?;
        if !(0.0..=1.0).contains(&test_accuracy) {
            return Err(CliError::input(
                path,
                format!("line {line}: accuracy {test_accuracy} outside [0, 1]"),
            ));
        }
        out.push(TrialResult {
            dataset: record.get(idx["dataset"]).unwrap_or("").to_string(),
            method,
            k_hops,
            trial: field(&record, idx["trial"], path, line)?,
            seed: field(&record, idx["seed"], path, line)?,
            test_accuracy,
            validation_accuracy: None,
            chosen_weights: None,
        });
    }
    Ok(out)
}

fn read_reported(path: &Path) -> CliResult<ExternalBaselines> {
    let mut reader = csv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::input(path, e.to_string()))?
        .clone();
    let (m, d, a) = (
        column(&headers, "method", path)?,
        column(&headers, "dataset", path)?,
        column(&headers, "accuracy", path)?,
    );
    let mut baselines = ExternalBaselines::default();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = record.map_err(|e| CliError::input(path, e.to_string()))?;
        let acc: f64 = field(&record, a, path, line)?;
        baselines.insert(
            record.get(m).unwrap_or(""),
            record.get(d).unwrap_or(""),
            acc,
        );
    }
    Ok(baselines)
}

pub fn aggregate(args: AggregateArgs) -> CliResult<()> {
    let mut results = Vec::new();
    for path in &args.inputs {
        results.extend(read_trials(path, args.k)?);
    }
    if results.is_empty() {
        return Err(CliError::Config("no trial rows in the inputs".into()));
    }
    // sweeps repeat the K-independent sgc1 trials once per K
    let mut seen = std::collections::BTreeSet::new();
    results.retain(|r| seen.insert((r.dataset.clone(), r.method, r.k_hops, r.trial)));
    let reported = args.reported.as_deref().map(read_reported).transpose()?;
    let report = aggregate_results(&results, reported.as_ref())?;

    let source = |reported: bool| if reported { REPORTED } else { "computed" }.to_string();
    let mut per_method = Table::new(["method", "mean_proportion", "min_proportion", "source"]);
    for m in &report.per_method {
        per_method.push(vec![
            m.method.clone(),
            fmt6(m.mean_proportion),
            fmt6(m.min_proportion),
            source(m.reported),
        ]);
    }
    let mut per_dataset = Table::new([
        "dataset",
        "method",
        "mean",
        "std",
        "n_trials",
        "proportion",
        "source",
    ]);
    for d in &report.per_dataset {
        per_dataset.push(vec![
            d.dataset.clone(),
            d.method.clone(),
            fmt6(d.mean),
            fmt6(d.std),
            d.n_trials.to_string(),
            fmt6(d.proportion),
            source(d.reported),
        ]);
    }
    let writer = Writer::new(args.out)?;
    writer.primary("aggregate_methods.csv", &per_method)?;
    writer.secondary_table("aggregate_datasets.csv", &per_dataset)
}

pub fn homophily(args: DatasetArgs) -> CliResult<()> {
    let ds = load(&args)?;
    let h = homophily_of(&ds)?;
    println!("{}", fmt6(h));
    Ok(())
}
