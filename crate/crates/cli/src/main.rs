//! `dynex`: run registry experiments, parameter sweeps and estimators on
//! external series.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dynex_core::estimators::{estimate, q_spectrum, Method};
use dynex_core::harness::{
    emit, find, ingest_series, init_workers, registry, require_variation, run_experiment, run_spec, sweep,
    ExperimentKind, ExperimentRef, ExperimentSpec, Format, HarnessConfig, HistogramRecord, IngestTarget, Metric,
    ModelColumn, Overrides, ResultRecord, ResultRow, SweepParam, TrajectorySettings, VisitSettings,
};
use dynex_core::observables::{exceedances_at_quantile, HitTimes};
use dynex_core::visits::{tv_distance, visit_histogram, ModelPmf};

#[derive(Parser)]
#[command(name = "dynex", version, about = "Extremal index and visit statistics for perturbed chaotic maps")]
struct Cli {
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for replica runs.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registry experiments.
    List,
    /// Run a registry experiment by id, or an experiment spec from a JSON file.
    Run {
        /// Registry id or path to a JSON experiment spec.
        experiment: String,
        #[command(flatten)]
        common: Common,
    },
    /// Rerun an experiment over a list of parameter values.
    Sweep {
        /// Registry id or path to a JSON experiment spec.
        #[arg(long)]
        base: String,
        /// One of eps, k, m, p, b, weights.
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the extremal index of an external state-vector series.
    Ei {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::OrderM)]
        method: MethodArg,
        /// Estimator order m.
        #[arg(long, default_value_t = dynex_core::estimators::DEFAULT_ORDER)]
        order: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Visit-count histogram of an external series, or the registry visit experiments.
    Visits {
        /// Registry visit experiment to run; all of them when omitted and no input is given.
        experiment: Option<String>,
        /// State-vector CSV; switches to series mode.
        #[arg(long, requires = "target")]
        input: Option<PathBuf>,
        #[arg(long)]
        target: Option<IngestTarget>,
        #[arg(long, default_value = "euclidean")]
        metric: Metric,
        #[arg(long, default_value_t = 0.99)]
        quantile: f64,
        /// Rescaled time t; windows have length floor(t / mu_hat).
        #[arg(long)]
        t: Option<f64>,
        /// Order of the estimator feeding the Polya-Aeppli model.
        #[arg(long, default_value_t = dynex_core::estimators::DEFAULT_ORDER)]
        order: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct SeriesArgs {
    /// Comma-separated state vectors, one per row, optional header.
    #[arg(long)]
    input: PathBuf,
    /// `row:<i>` (or a bare row index) or a comma-separated vector.
    #[arg(long)]
    target: IngestTarget,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    #[arg(long, default_value_t = 0.99)]
    quantile: f64,
}

#[derive(Args, Default)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of visit windows.
    #[arg(long)]
    windows: Option<usize>,
    /// Use the full-scale trajectory length.
    #[arg(long)]
    full_scale: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Suveges,
    OrderM,
    FromQk,
}

impl MethodArg {
    fn method(self, order: usize) -> Method {
        match self {
            MethodArg::Suveges => Method::Suveges,
            MethodArg::OrderM => Method::OrderM(order),
            MethodArg::FromQk => Method::FromQk(order),
        }
    }
}

/// Settings after merging the config file with command-line flags.
struct Resolved {
    overrides: Overrides,
    format: Format,
    out: Option<PathBuf>,
}

fn resolve(config: &HarnessConfig, common: Option<&Common>, output: &OutputArgs) -> Resolved {
    let mut overrides = config.overrides();
    if let Some(c) = common {
        overrides.points = c.points.or(overrides.points);
        overrides.replicas = c.replicas.or(overrides.replicas);
        overrides.seed = c.seed.or(overrides.seed);
        overrides.windows = c.windows.or(overrides.windows);
        overrides.full_scale |= c.full_scale;
    }
    Resolved {
        overrides,
        format: output.format.or(config.output.format).unwrap_or_default(),
        out: output.out.clone().or_else(|| config.output.out.clone()),
    }
}

fn load_spec(which: &str) -> Result<ExperimentSpec> {
    let path = Path::new(which);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return serde_json::from_str(&text).with_context(|| format!("parsing experiment spec {}", path.display()));
    }
    Ok(find(which)?)
}

fn finish(records: &[ResultRecord], r: &Resolved) -> Result<bool> {
    emit(records, r.format, r.out.as_deref())?;
    for rec in records {
        for row in rec.failures() {
            eprintln!(
                "FAIL {} [{}] {}: {} (reference {:?})",
                rec.experiment, row.parameter, row.method, row.estimate, row.theory
            );
        }
    }
    Ok(records.iter().all(|r| r.pass))
}

fn series_hits(input: &Path, target: &IngestTarget, metric: Metric, quantile: f64) -> Result<HitTimes> {
    let values = ingest_series(input, target, metric)?;
    require_variation(&values)?;
    let series = exceedances_at_quantile(values, quantile)?;
    Ok(HitTimes::from(&series))
}

fn ingest_record(id: &str, title: String, n: usize, rows: Vec<ResultRow>) -> ResultRecord {
    ResultRecord {
        experiment: id.into(),
        title,
        rows,
        diagnostics: Vec::new(),
        histograms: Vec::new(),
        trajectory: TrajectorySettings::new(n, 1, 0),
        wall_time_s: 0.0,
        pass: true,
    }
}

fn info_row(parameter: &str, method: String, estimate: f64) -> ResultRow {
    ResultRow { parameter: parameter.into(), method, estimate, std_dev: 0.0, theory: None, pass: true }
}

fn cmd_ei(series: &SeriesArgs, method: Method, order: usize, r: &Resolved) -> Result<bool> {
    let hits = series_hits(&series.input, &series.target, series.metric, series.quantile)?;
    let param = format!("p={}", series.quantile);
    let mut rows = vec![info_row(&param, method.label(), estimate(&hits, method)?)];
    if !matches!(method, Method::Suveges) {
        let q = q_spectrum(&hits, order)?;
        rows.extend(q.q.iter().enumerate().map(|(j, &v)| info_row(&param, format!("q_hat({j})"), v)));
    }
    let title = format!("extremal index of {}", series.input.display());
    finish(&[ingest_record("ei", title, hits.n, rows)], r)
}

fn cmd_visits_series(series: &SeriesArgs, t: f64, order: usize, windows: Option<usize>, r: &Resolved) -> Result<bool> {
    let input = &series.input;
    let hits = series_hits(input, &series.target, series.metric, series.quantile)?;
    let mu_hat = hits.hits.len() as f64 / hits.n as f64;
    let w = dynex_core::visits::window_length(mu_hat, t)?;
    let available = hits.n / w;
    let n_windows = windows.unwrap_or(available);
    if n_windows == 0 || n_windows > available {
        bail!("series of {} points holds {available} windows of length {w}; requested {n_windows}", hits.n);
    }
    let hist = visit_histogram(&hits, mu_hat, t, n_windows)?;
    let theta = estimate(&hits, Method::OrderM(order))?;
    let k_max = hist.counts.len().saturating_sub(1);
    let param = format!("t={t}");
    let mut rows = vec![info_row(&param, Method::OrderM(order).label(), theta)];
    let mut models = Vec::new();
    for pmf in [ModelPmf::PolyaAeppli { t, theta }, ModelPmf::Poisson { t }] {
        rows.push(info_row(&param, format!("tv[{}]", pmf.label()), tv_distance(&hist, &pmf)?));
        models.push(ModelColumn { label: pmf.label(), pmf: pmf.pmfs(k_max)? });
    }
    let mut rec = ingest_record("visits", format!("visit counts of {}", input.display()), hits.n, rows);
    rec.histograms.push(HistogramRecord {
        parameter: param,
        histogram: hist,
        models,
        threshold: hits.threshold,
        mu_hat,
        n_points: hits.n,
    });
    if r.out.is_none() && r.format == Format::Csv {
        // Histogram alongside the summary when writing to stdout.
        emit(std::slice::from_ref(&rec), r.format, None)?;
        dynex_core::harness::write_histogram_csv(&rec.histograms[0], std::io::stdout().lock())?;
        return Ok(true);
    }
    finish(&[rec], r)
}

fn is_visit_experiment(spec: &ExperimentSpec) -> bool {
    matches!(spec.kind, ExperimentKind::Visits { .. })
}

fn run(cli: Cli) -> Result<bool> {
    let config = match &cli.config {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::default(),
    };
    init_workers(cli.workers.or(config.run.workers))?;
    match cli.command {
        Command::List => {
            for spec in registry() {
                println!("{}\t{}", spec.id, spec.title);
            }
            Ok(true)
        }
        Command::Run { experiment, common } => {
            let r = resolve(&config, Some(&common), &common.output);
            let spec = load_spec(&experiment)?.with(&r.overrides);
            let record = run_experiment(ExperimentRef::Spec(&spec))?;
            finish(&[record], &r)
        }
        Command::Sweep { base, param, values, common } => {
            let r = resolve(&config, Some(&common), &common.output);
            let spec = load_spec(&base)?.with(&r.overrides);
            finish(&sweep(param, &values, &spec)?, &r)
        }
        Command::Ei { series, method, order, output } => {
            let r = resolve(&config, None, &output);
            cmd_ei(&series, method.method(order), order, &r)
        }
        Command::Visits { experiment, input, target, metric, quantile, t, order, common } => {
            let r = resolve(&config, Some(&common), &common.output);
            if let Some(input) = input {
                if experiment.is_some() {
                    bail!("give either an experiment id or --input, not both");
                }
                let target = target.context("--target is required with --input")?;
                let t = t.unwrap_or(VisitSettings::default().t);
                let series = SeriesArgs { input, target, metric, quantile };
                return cmd_visits_series(&series, t, order, common.windows, &r);
            }
            let specs = match experiment {
                Some(id) => vec![load_spec(&id)?],
                None => registry().into_iter().filter(is_visit_experiment).collect(),
            };
            let mut records = Vec::new();
            for spec in specs {
                if !is_visit_experiment(&spec) {
                    bail!("`{}` is not a visit experiment", spec.id);
                }
                let mut spec = spec.with(&r.overrides);
                if let (Some(t), ExperimentKind::Visits { settings, .. }) = (t, &mut spec.kind) {
                    settings.t = t;
                }
                records.push(run_spec(&spec)?);
            }
            finish(&records, &r)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
