use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{MapSpec, PerturbationScheme, TrajectoryConfig};
use crate::error::{Error, Result};
use crate::estimators::{estimate, mean_std, per_replica, q_hat, Method};
use crate::observables::{HitTimes, Scenario, TargetSpec};
use crate::visits::{markov_cluster_law, tv_distance, visit_histogram, window_length, ModelPmf, VisitHistogram};

use super::spec::{
    Check, EstimateCase, ExperimentKind, ExperimentSpec, Quantity, Reference, TrajectorySettings, VisitCase,
    VisitCheck, VisitModel, VisitSettings,
};
use super::theory::reference_value;

/// One line of the result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub parameter: String,
    pub method: String,
    pub estimate: f64,
    pub std_dev: f64,
    pub theory: Option<f64>,
    pub pass: bool,
}

/// A model column of a histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelColumn {
    pub label: String,
    pub pmf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub parameter: String,
    pub histogram: VisitHistogram,
    pub models: Vec<ModelColumn>,
    pub threshold: f64,
    pub mu_hat: f64,
    pub n_points: usize,
}

/// Everything one experiment run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub title: String,
    pub rows: Vec<ResultRow>,
    #[serde(default)]
    pub diagnostics: Vec<ResultRow>,
    #[serde(default)]
    pub histograms: Vec<HistogramRecord>,
    pub trajectory: TrajectorySettings,
    pub wall_time_s: f64,
    pub pass: bool,
}

impl ResultRecord {
    pub fn failures(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().chain(&self.diagnostics).filter(|r| !r.pass)
    }
}

/// Run a registry id or an inline spec.
pub enum ExperimentRef<'a> {
    Id(&'a str),
    Spec(&'a ExperimentSpec),
}

pub fn run_experiment(which: ExperimentRef<'_>) -> Result<ResultRecord> {
    match which {
        ExperimentRef::Id(id) => run_spec(&super::registry::find(id)?),
        ExperimentRef::Spec(spec) => run_spec(spec),
    }
}

/// Execute `spec` and compare against its expectations.
pub fn run_spec(spec: &ExperimentSpec) -> Result<ResultRecord> {
    spec.validate()?;
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    let mut histograms = Vec::new();
    match &spec.kind {
        ExperimentKind::Estimates { cases } => {
            for case in cases {
                let (r, d) = run_estimate_case(case, &spec.trajectory)?;
                rows.extend(r);
                diagnostics.extend(d);
            }
        }
        ExperimentKind::Visits { settings, cases } => {
            for case in cases {
                let (r, d, h) = run_visit_case(case, settings, &spec.trajectory)?;
                rows.extend(r);
                diagnostics.extend(d);
                histograms.push(h);
            }
        }
    }
    let pass = rows.iter().chain(&diagnostics).all(|r| r.pass);
    Ok(ResultRecord {
        experiment: spec.id.clone(),
        title: spec.title.clone(),
        rows,
        diagnostics,
        histograms,
        trajectory: spec.trajectory,
        wall_time_s: start.elapsed().as_secs_f64(),
        pass,
    })
}

fn quantity_value(hits: &HitTimes, q: Quantity) -> Result<f64> {
    match q {
        Quantity::Theta(m) => estimate(hits, m),
        Quantity::Qk(j) => q_hat(hits, j),
    }
}

fn row(parameter: &str, scenario: &Scenario, check: &Check, values: &[f64]) -> ResultRow {
    let (estimate, std_dev) = mean_std(values);
    let theory = reference_value(scenario, check.quantity, check.reference);
    ResultRow {
        parameter: parameter.into(),
        method: check.quantity.label(),
        estimate,
        std_dev,
        theory,
        pass: check.criterion.passes(estimate, theory).unwrap_or(true),
    }
}

fn run_estimate_case(case: &EstimateCase, t: &TrajectorySettings) -> Result<(Vec<ResultRow>, Vec<ResultRow>)> {
    let all: Vec<&Check> = case.checks.iter().chain(&case.diagnostics).collect();
    let table = per_replica(&case.scenario, t.replicas, &t.config(), |hits| {
        all.iter().map(|c| quantity_value(hits, c.quantity)).collect::<Result<Vec<f64>>>()
    })?;
    let mut rows: Vec<ResultRow> = all
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let column: Vec<f64> = table.iter().map(|r| r[j]).collect();
            row(&case.label, &case.scenario, c, &column)
        })
        .collect();
    let diagnostics = rows.split_off(case.checks.len());
    Ok((rows, diagnostics))
}

/// Threshold from a pilot prefix, then one long run whose hits fill the windows.
pub fn visit_run(
    scenario: &Scenario,
    settings: &VisitSettings,
    t: &TrajectorySettings,
) -> Result<(HitTimes, f64, VisitHistogram)> {
    let cfg = |n: usize| TrajectoryConfig::new(n, t.seed).with_burn_in(t.burn_in);
    let u = scenario.pilot_threshold(&cfg(settings.pilot_points))?;
    let mu_pilot = 1.0 - scenario.quantile;
    let mut n = (settings.margin * settings.n_windows as f64 * settings.t / mu_pilot).ceil() as usize;
    for _ in 0..4 {
        let hits = scenario.hit_times(&cfg(n), u)?;
        if hits.hits.is_empty() {
            return Err(Error::NoExceedances);
        }
        let mu_hat = hits.hits.len() as f64 / n as f64;
        let needed = window_length(mu_hat, settings.t)? * settings.n_windows;
        if needed <= n {
            let hist = visit_histogram(&hits, mu_hat, settings.t, settings.n_windows)?;
            return Ok((hits, mu_hat, hist));
        }
        n = (needed as f64 * settings.margin).ceil() as usize;
    }
    Err(Error::InsufficientData { needed: n, available: n })
}

fn model_pmf(model: &VisitModel, t: f64, hits: &HitTimes) -> Result<(ModelPmf, Option<(Method, f64)>)> {
    Ok(match *model {
        VisitModel::Poisson => (ModelPmf::Poisson { t }, None),
        VisitModel::PolyaAeppli { theta } => (ModelPmf::PolyaAeppli { t, theta }, None),
        VisitModel::PolyaAeppliEstimated { method } => {
            let theta = estimate(hits, method)?;
            (ModelPmf::PolyaAeppli { t, theta }, Some((method, theta)))
        }
        VisitModel::MarkovCompoundPoisson => (ModelPmf::CompoundPoisson { t, law: markov_cluster_law(1e-12)? }, None),
    })
}

fn run_visit_case(
    case: &VisitCase,
    settings: &VisitSettings,
    t: &TrajectorySettings,
) -> Result<(Vec<ResultRow>, Vec<ResultRow>, HistogramRecord)> {
    let (hits, mu_hat, hist) = visit_run(&case.scenario, settings, t)?;
    let k_max = hist.counts.len().saturating_sub(1);
    let mut models = Vec::new();
    let mut tvs = Vec::new();
    let mut diagnostics = Vec::new();
    for m in &case.models {
        let (pmf, estimated) = model_pmf(m, settings.t, &hits)?;
        if let Some((method, theta)) = estimated {
            diagnostics.push(ResultRow {
                parameter: case.label.clone(),
                method: method.label(),
                estimate: theta,
                std_dev: 0.0,
                theory: None,
                pass: true,
            });
        }
        tvs.push(tv_distance(&hist, &pmf)?);
        models.push(ModelColumn { label: pmf.label(), pmf: pmf.pmfs(k_max)? });
    }
    let mut rows: Vec<ResultRow> = models
        .iter()
        .zip(&tvs)
        .enumerate()
        .map(|(i, (col, &tv))| {
            let bounds = case.checks.iter().filter_map(|c| match *c {
                VisitCheck::TvAtMost { model, bound } if model == i => Some(bound),
                _ => None,
            });
            let pass = bounds.clone().all(|b| tv <= b);
            ResultRow {
                parameter: case.label.clone(),
                method: format!("tv[{}]", col.label),
                estimate: tv,
                std_dev: 0.0,
                theory: bounds.reduce(f64::min),
                pass,
            }
        })
        .collect();
    for c in &case.checks {
        if let VisitCheck::TvOrdered { worse, better } = *c {
            let gap = tvs[worse] - tvs[better];
            rows.push(ResultRow {
                parameter: case.label.clone(),
                method: format!("tv_gap[{} - {}]", models[worse].label, models[better].label),
                estimate: gap,
                std_dev: 0.0,
                theory: None,
                pass: gap > 0.0,
            });
        }
    }
    let record = HistogramRecord {
        parameter: case.label.clone(),
        histogram: hist,
        models,
        threshold: hits.threshold,
        mu_hat,
        n_points: hits.n,
    };
    Ok((rows, diagnostics, record))
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Noise amplitude of the scheme or the target.
    Epsilon,
    /// Product order.
    K,
    /// Estimator order.
    M,
    /// Threshold quantile.
    P,
    /// Offset of the second map.
    B,
    /// Weight of the first map or target point.
    Weights,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "eps" | "epsilon" | "ε" => SweepParam::Epsilon,
            "k" => SweepParam::K,
            "m" => SweepParam::M,
            "p" | "quantile" => SweepParam::P,
            "b" => SweepParam::B,
            "w" | "weight" | "weights" => SweepParam::Weights,
            other => {
                return Err(Error::invalid("parameter", format!("`{other}` is not one of eps, k, m, p, b, weights")))
            }
        })
    }
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Epsilon => "eps",
            SweepParam::K => "k",
            SweepParam::M => "m",
            SweepParam::P => "p",
            SweepParam::B => "b",
            SweepParam::Weights => "weights",
        }
    }
}

fn as_count(name: &'static str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(Error::invalid(name, format!("{v} is not a nonnegative integer")))
    }
}

fn set_scenario(s: &mut Scenario, param: SweepParam, v: f64) -> Result<()> {
    let unsupported = || Error::Unsupported(format!("scenario has no `{}` parameter", param.name()));
    match param {
        SweepParam::Epsilon => match (&mut s.scheme, &mut s.target) {
            (PerturbationScheme::AdditiveUniform { epsilon } | PerturbationScheme::Observational { epsilon }, _)
            | (_, TargetSpec::MovingUniform { epsilon, .. } | TargetSpec::MovingMapDriven { epsilon, .. }) => {
                *epsilon = v
            }
            (PerturbationScheme::None, TargetSpec::Fixed { .. } | TargetSpec::Diagonal { .. }) => {
                if v != 0.0 {
                    s.scheme = PerturbationScheme::AdditiveUniform { epsilon: v };
                }
            }
            _ => return Err(unsupported()),
        },
        SweepParam::K => match &mut s.target {
            TargetSpec::Diagonal { k } => *k = as_count("k", v)?,
            _ => return Err(unsupported()),
        },
        SweepParam::P => {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid("p", format!("quantile {v} is outside (0, 1)")));
            }
            s.quantile = v;
        }
        SweepParam::B => match &mut s.scheme {
            PerturbationScheme::IidSelection { maps, .. } if maps.len() == 2 => {
                let (slope, _) = maps[1].integer_affine().ok_or_else(unsupported)?;
                maps[1] = MapSpec::affine(slope as f64, v);
            }
            _ => return Err(unsupported()),
        },
        SweepParam::Weights => {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid("weights", format!("{v} is outside [0, 1]")));
            }
            match (&mut s.scheme, &mut s.target) {
                (PerturbationScheme::IidSelection { weights, .. }, _)
                | (_, TargetSpec::MovingDiscrete { weights, .. })
                    if weights.len() == 2 =>
                {
                    *weights = vec![v, 1.0 - v];
                }
                _ => return Err(unsupported()),
            }
        }
        SweepParam::M => unreachable!("order is a property of the checks"),
    }
    s.scheme.validate()?;
    s.target.validate()
}

fn set_order(method: &mut Method, m: usize) -> bool {
    match method {
        Method::OrderM(o) | Method::FromQk(o) => {
            *o = m;
            true
        }
        Method::Suveges => false,
    }
}

/// Copy of `base` with `param` set to `v` everywhere it applies.
pub fn with_parameter(base: &ExperimentSpec, param: SweepParam, v: f64) -> Result<ExperimentSpec> {
    let mut spec = base.clone();
    let suffix = format!("{}={v}", param.name());
    let mut touched = false;
    let relabel = |label: &mut String| *label = format!("{label}; {suffix}");
    match &mut spec.kind {
        ExperimentKind::Estimates { cases } => {
            for case in cases.iter_mut() {
                if param == SweepParam::M {
                    let m = as_count("m", v)?;
                    for c in case.checks.iter_mut().chain(case.diagnostics.iter_mut()) {
                        if let Quantity::Theta(method) = &mut c.quantity {
                            touched |= set_order(method, m);
                        }
                    }
                } else {
                    set_scenario(&mut case.scenario, param, v)?;
                    touched = true;
                    for c in case.checks.iter_mut().chain(case.diagnostics.iter_mut()) {
                        if let Reference::Value(_) = c.reference {
                            c.reference = Reference::Auto;
                        }
                    }
                }
                relabel(&mut case.label);
            }
        }
        ExperimentKind::Visits { cases, .. } => {
            for case in cases.iter_mut() {
                if param == SweepParam::M {
                    let m = as_count("m", v)?;
                    for model in case.models.iter_mut() {
                        if let VisitModel::PolyaAeppliEstimated { method } = model {
                            touched |= set_order(method, m);
                        }
                    }
                } else {
                    set_scenario(&mut case.scenario, param, v)?;
                    touched = true;
                }
                relabel(&mut case.label);
            }
        }
    }
    if !touched {
        return Err(Error::Unsupported(format!("`{}` does not apply to {}", param.name(), base.id)));
    }
    Ok(spec)
}

/// One record per value of `param`, in order.
pub fn sweep(param: SweepParam, values: &[f64], base: &ExperimentSpec) -> Result<Vec<ResultRecord>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("sweep values"));
    }
    let specs = values.iter().map(|&v| with_parameter(base, param, v)).collect::<Result<Vec<_>>>()?;
    specs.iter().map(run_spec).collect()
}
