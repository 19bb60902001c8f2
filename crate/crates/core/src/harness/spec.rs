use serde::{Deserialize, Serialize};

use crate::dynamics::TrajectoryConfig;
use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::observables::Scenario;

/// A runnable experiment: one or more scenarios plus what to check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: String,
    pub title: String,
    pub trajectory: TrajectorySettings,
    pub kind: ExperimentKind,
}

/// Trajectory length, replica count and seed shared by every case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySettings {
    pub n_points: usize,
    /// Length used when running at full scale.
    pub full_scale_points: usize,
    pub replicas: usize,
    pub seed: u64,
    pub burn_in: usize,
}

impl TrajectorySettings {
    pub fn new(n_points: usize, replicas: usize, seed: u64) -> Self {
        TrajectorySettings {
            n_points,
            full_scale_points: n_points,
            replicas,
            seed,
            burn_in: TrajectoryConfig::DEFAULT_BURN_IN,
        }
    }

    pub fn full_scale(mut self, n_points: usize) -> Self {
        self.full_scale_points = n_points;
        self
    }

    pub fn config(&self) -> TrajectoryConfig {
        TrajectoryConfig::new(self.n_points, self.seed).with_burn_in(self.burn_in)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Replica-averaged estimators.
    Estimates { cases: Vec<EstimateCase> },
    /// Visit-count histograms compared with limit laws.
    Visits { settings: VisitSettings, cases: Vec<VisitCase> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateCase {
    pub label: String,
    pub scenario: Scenario,
    /// Rows of the result table.
    pub checks: Vec<Check>,
    /// Extra checks reported only in the full record.
    #[serde(default)]
    pub diagnostics: Vec<Check>,
}

/// Statistic computed on each replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "quantity", content = "arg", rename_all = "snake_case")]
pub enum Quantity {
    Theta(Method),
    Qk(usize),
}

impl Quantity {
    pub fn label(&self) -> String {
        match self {
            Quantity::Theta(m) => m.label(),
            Quantity::Qk(j) => format!("q_hat({j})"),
        }
    }
}

/// Where the reference value of a check comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", content = "value", rename_all = "snake_case")]
pub enum Reference {
    /// Closed form derived from the scenario, when one is known.
    Auto,
    Value(f64),
    None,
}

/// Pass rule for one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Criterion {
    /// `|estimate − reference| ≤ tol`.
    Near {
        tol: f64,
    },
    /// `estimate ≤ reference + slack`.
    NotAbove {
        slack: f64,
    },
    AtLeast {
        bound: f64,
    },
    AtMost {
        bound: f64,
    },
    /// Always passes.
    Report,
}

impl Criterion {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("tolerance {v} must be positive")))
            }
        };
        match *self {
            Criterion::Near { tol } => positive("tol", tol),
            Criterion::NotAbove { slack } => positive("slack", slack),
            Criterion::AtLeast { bound } | Criterion::AtMost { bound } if !bound.is_finite() => {
                Err(Error::invalid("bound", "must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// `None` when the rule needs a reference value that is missing.
    pub fn passes(&self, estimate: f64, reference: Option<f64>) -> Option<bool> {
        match *self {
            Criterion::Near { tol } => reference.map(|r| (estimate - r).abs() <= tol),
            Criterion::NotAbove { slack } => reference.map(|r| estimate <= r + slack),
            Criterion::AtLeast { bound } => Some(estimate >= bound),
            Criterion::AtMost { bound } => Some(estimate <= bound),
            Criterion::Report => Some(true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: Quantity,
    pub reference: Reference,
    pub criterion: Criterion,
}

impl Check {
    pub fn near(quantity: Quantity, reference: Reference, tol: f64) -> Self {
        Check { quantity, reference, criterion: Criterion::Near { tol } }
    }

    pub fn at_least(quantity: Quantity, bound: f64) -> Self {
        Check { quantity, reference: Reference::Auto, criterion: Criterion::AtLeast { bound } }
    }

    pub fn report(quantity: Quantity) -> Self {
        Check { quantity, reference: Reference::Auto, criterion: Criterion::Report }
    }
}

/// Visit-count procedure parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitSettings {
    /// Rescaled time.
    pub t: f64,
    pub n_windows: usize,
    /// Length of the run fixing the threshold at the scenario's quantile.
    pub pilot_points: usize,
    /// Main-run length is `margin · n_windows · t / μ̂_pilot`.
    pub margin: f64,
}

impl Default for VisitSettings {
    fn default() -> Self {
        VisitSettings { t: 50.0, n_windows: 100_000, pilot_points: 10_000, margin: 1.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitCase {
    pub label: String,
    pub scenario: Scenario,
    pub models: Vec<VisitModel>,
    pub checks: Vec<VisitCheck>,
}

/// Candidate limit law for the visit counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum VisitModel {
    Poisson,
    PolyaAeppli {
        theta: f64,
    },
    /// Pólya-Aeppli with θ estimated on the same trajectory.
    PolyaAeppliEstimated {
        method: Method,
    },
    /// Compound Poisson with the cluster law of the three-branch Markov map diagonal.
    MarkovCompoundPoisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum VisitCheck {
    /// Total variation to `models[model]` at most `bound`.
    TvAtMost { model: usize, bound: f64 },
    /// TV to `models[worse]` strictly above TV to `models[better]`.
    TvOrdered { worse: usize, better: usize },
}

/// Command-line or config overrides applied before running.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub points: Option<usize>,
    pub replicas: Option<usize>,
    pub seed: Option<u64>,
    pub windows: Option<usize>,
    #[serde(default)]
    pub full_scale: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::invalid("id", "experiment id must not be empty"));
        }
        let t = &self.trajectory;
        if t.n_points == 0 || t.replicas == 0 {
            return Err(Error::invalid("trajectory", "points and replicas must be positive"));
        }
        match &self.kind {
            ExperimentKind::Estimates { cases } => {
                if cases.is_empty() {
                    return Err(Error::EmptyInput("experiment cases"));
                }
                for case in cases {
                    case.scenario.scheme.validate()?;
                    case.scenario.target.validate()?;
                    for c in case.checks.iter().chain(&case.diagnostics) {
                        c.criterion.validate()?;
                    }
                }
            }
            ExperimentKind::Visits { settings, cases } => {
                if cases.is_empty() {
                    return Err(Error::EmptyInput("experiment cases"));
                }
                if !settings.t.is_finite() || settings.t <= 0.0 || settings.n_windows == 0 || settings.pilot_points == 0
                {
                    return Err(Error::invalid("visits", "t, windows and pilot length must be positive"));
                }
                if settings.margin.is_nan() || settings.margin < 1.0 {
                    return Err(Error::invalid("margin", "run-length margin must be at least 1"));
                }
                for case in cases {
                    case.scenario.scheme.validate()?;
                    case.scenario.target.validate()?;
                    for check in &case.checks {
                        let (indices, bound) = match *check {
                            VisitCheck::TvAtMost { model, bound } => (vec![model], Some(bound)),
                            VisitCheck::TvOrdered { worse, better } => (vec![worse, better], None),
                        };
                        if indices.iter().any(|&i| i >= case.models.len()) {
                            return Err(Error::invalid("checks", "check refers to a missing model"));
                        }
                        if bound.is_some_and(|b| b.is_nan() || b <= 0.0) {
                            return Err(Error::invalid("bound", "TV bound must be positive"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) {
        let t = &mut self.trajectory;
        if o.full_scale {
            t.n_points = t.full_scale_points;
        }
        if let Some(n) = o.points {
            t.n_points = n;
        }
        if let Some(r) = o.replicas {
            t.replicas = r;
        }
        if let Some(s) = o.seed {
            t.seed = s;
        }
        if let (Some(w), ExperimentKind::Visits { settings, .. }) = (o.windows, &mut self.kind) {
            settings.n_windows = w;
        }
    }

    pub fn with(mut self, o: &Overrides) -> Self {
        self.apply(o);
        self
    }
}
