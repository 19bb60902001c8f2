//! Built-in experiments.

use std::f64::consts::{E, PI, SQRT_2};

use crate::dynamics::{MapSpec, PerturbationScheme, PointState};
use crate::error::{Error, Result};
use crate::estimators::{theory_dei, Method, DEFAULT_ORDER};
use crate::observables::{Scenario, TargetSpec};

use super::spec::{
    Check, Criterion, EstimateCase, ExperimentKind, ExperimentSpec, Quantity, Reference, TrajectorySettings, VisitCase,
    VisitCheck, VisitModel, VisitSettings,
};
use super::theory::minimal_period;

pub const DESK_POINTS: usize = 10_000_000;
pub const FULL_POINTS: usize = 50_000_000;
pub const DESK_REPLICAS: usize = 20;
pub const DEFAULT_SEED: u64 = 20_190_801;

/// Tolerance on `θ̂` for the deterministic tables.
pub const THETA_TOL: f64 = 0.01;
/// Tolerance on individual `q̂_k`.
pub const QK_TOL: f64 = 0.005;
/// Tolerance on product-observable indices.
pub const DEI_TOL: f64 = 0.015;
/// Tolerance on the two-map product index.
pub const BERNOULLI_DEI_TOL: f64 = 0.02;
/// Lower bound on `θ̂₅` where clustering is expected to vanish.
pub const NO_CLUSTER_BOUND: f64 = 0.99;
/// Lower bound for "Süveges reads 1".
pub const SUVEGES_ONE_BOUND: f64 = 0.999;
/// Upper bound on TV for stationary visit laws.
pub const VISITS_TV: f64 = 0.03;
/// Upper bound on TV for the sequential system.
pub const SEQUENTIAL_TV: f64 = 0.05;

/// Radius of a Lebesgue ball of measure `1 − p` on the circle.
pub fn ball_radius(p: f64) -> f64 {
    (1.0 - p) / 2.0
}

const THETA5: Quantity = Quantity::Theta(Method::OrderM(DEFAULT_ORDER));
const SUVEGES: Quantity = Quantity::Theta(Method::Suveges);

fn desk() -> TrajectorySettings {
    TrajectorySettings::new(DESK_POINTS, DESK_REPLICAS, DEFAULT_SEED).full_scale(FULL_POINTS)
}

fn estimates(id: &str, title: &str, trajectory: TrajectorySettings, cases: Vec<EstimateCase>) -> ExperimentSpec {
    ExperimentSpec { id: id.into(), title: title.into(), trajectory, kind: ExperimentKind::Estimates { cases } }
}

fn case(label: impl Into<String>, scenario: Scenario, checks: Vec<Check>) -> EstimateCase {
    EstimateCase { label: label.into(), scenario, checks, diagnostics: Vec::new() }
}

fn fixed(map: MapSpec, z: &[f64]) -> Scenario {
    Scenario::new(map, PerturbationScheme::None, TargetSpec::Fixed { z: PointState::wrapped(z) })
}

fn two_maps(first: MapSpec, second: MapSpec, w: f64) -> PerturbationScheme {
    PerturbationScheme::IidSelection { maps: vec![first, second], weights: vec![w, 1.0 - w] }
}

/// Four-point target: `z0`, its two doubling preimages and its image, equally likely.
pub fn four_point_target(z0: f64) -> TargetSpec {
    let pts = [z0, z0 / 2.0, (z0 + 1.0) / 2.0, (2.0 * z0).rem_euclid(1.0)];
    TargetSpec::MovingDiscrete { points: pts.iter().map(|&z| PointState::scalar(z)).collect(), weights: vec![0.25; 4] }
}

/// `1 − q0 − q1` for the four-point target with `q0 = 3/2·(1/4)²`, `q1 = 6·(1/4)³·(1/2)²`.
pub const FOUR_POINT_Q0: f64 = 0.09375;
pub const FOUR_POINT_Q1: f64 = 0.0234375;
pub const FOUR_POINT_THETA: f64 = 1.0 - FOUR_POINT_Q0 - FOUR_POINT_Q1;

fn table1() -> ExperimentSpec {
    let rows: [(&str, MapSpec, Vec<f64>); 8] = [
        ("2x z=4/5", MapSpec::Doubling, vec![0.8]),
        ("2x z=0", MapSpec::Doubling, vec![0.0]),
        ("2x z=1/3", MapSpec::Doubling, vec![1.0 / 3.0]),
        ("2x z=1/pi", MapSpec::Doubling, vec![1.0 / PI]),
        ("cat z=(1/3,2/3)", MapSpec::CatMap, vec![1.0 / 3.0, 2.0 / 3.0]),
        ("cat z=(1/2,1/2)", MapSpec::CatMap, vec![0.5, 0.5]),
        ("cat z=(0,0)", MapSpec::CatMap, vec![0.0, 0.0]),
        ("cat z=(1/sqrt2,pi-3)", MapSpec::CatMap, vec![1.0 / SQRT_2, PI - 3.0]),
    ];
    let cases = rows
        .into_iter()
        .map(|(label, map, z)| {
            let scenario = fixed(map, &z);
            let period = minimal_period(&scenario.map, &scenario.target);
            let reference = if period.is_some() { Reference::Auto } else { Reference::Value(1.0) };
            let suveges = match period {
                Some(1) => Check::near(SUVEGES, Reference::Auto, THETA_TOL),
                Some(_) => Check::at_least(SUVEGES, SUVEGES_ONE_BOUND),
                None => Check { quantity: SUVEGES, reference: Reference::Value(1.0), criterion: Criterion::Report },
            };
            EstimateCase {
                label: label.into(),
                scenario,
                checks: vec![Check::near(THETA5, reference, THETA_TOL)],
                diagnostics: vec![suveges],
            }
        })
        .collect();
    estimates("table1", "Extremal index at periodic and generic points of the doubling and cat maps", desk(), cases)
}

fn theta_m_curves() -> ExperimentSpec {
    let targets: [(&str, MapSpec, Vec<f64>); 4] = [
        ("2x z=4/5", MapSpec::Doubling, vec![0.8]),
        ("2x z=1/3", MapSpec::Doubling, vec![1.0 / 3.0]),
        ("2x z=0", MapSpec::Doubling, vec![0.0]),
        ("cat z=(1/2,1/2)", MapSpec::CatMap, vec![0.5, 0.5]),
    ];
    let cases = targets
        .into_iter()
        .map(|(label, map, z)| {
            let checks =
                (1..=8).map(|m| Check::near(Quantity::Theta(Method::OrderM(m)), Reference::Auto, THETA_TOL)).collect();
            case(label, fixed(map, &z), checks)
        })
        .collect();
    estimates("fig-theta-m", "Order-m estimates as a function of m at periodic points", desk(), cases)
}

/// Target for the rotation experiments, away from short periodic orbits of every fibre map.
pub const ROTATION_TARGET: f64 = 1.0 / E;

fn rotation_scenario(alpha: f64) -> Scenario {
    Scenario::new(
        MapSpec::Tripling,
        PerturbationScheme::QuenchedRotation { alpha, omega0: 0.0 },
        TargetSpec::fixed(ROTATION_TARGET),
    )
}

fn table2() -> ExperimentSpec {
    let cases = [("alpha=1/pi", 1.0 / PI), ("alpha=sqrt2-1", SQRT_2 - 1.0), ("alpha=4/5", 0.8)]
        .into_iter()
        .map(|(label, alpha)| {
            case(label, rotation_scenario(alpha), vec![Check::near(THETA5, Reference::Value(1.0), THETA_TOL)])
        })
        .collect();
    let trajectory = TrajectorySettings::new(DESK_POINTS, 6, DEFAULT_SEED);
    estimates("table2-rotation", "Tripling map driven by a circle rotation", trajectory, cases)
}

/// `{2x, 2x + 1/2}` with equal weights, target 0.
pub fn discrete_noise_scenario() -> Scenario {
    Scenario::new(
        MapSpec::Doubling,
        two_maps(MapSpec::Doubling, MapSpec::affine(2.0, 0.5), 0.5),
        TargetSpec::fixed(0.0),
    )
}

fn qk_b_half() -> ExperimentSpec {
    let mut checks: Vec<Check> = (0..5).map(|k| Check::near(Quantity::Qk(k), Reference::Auto, QK_TOL)).collect();
    checks.push(Check::near(Quantity::Theta(Method::FromQk(10)), Reference::Value(2.0 / 3.0), THETA_TOL));
    let trajectory = TrajectorySettings::new(5_000_000, DESK_REPLICAS, DEFAULT_SEED);
    estimates(
        "qk-b-half",
        "q_k spectrum for two doubling maps with offsets 0 and 1/2",
        trajectory,
        vec![case("b=1/2", discrete_noise_scenario(), checks)],
    )
}

fn remark41() -> ExperimentSpec {
    let mut cases = Vec::new();
    for (name, f0) in [("2x", MapSpec::Doubling), ("3x", MapSpec::Tripling)] {
        for p0 in [0.25, 0.5, 0.75] {
            let scenario = Scenario::new(
                f0.clone(),
                two_maps(f0.clone(), MapSpec::affine(2.0, 1.0 / PI), p0),
                TargetSpec::fixed(0.0),
            );
            let check = Check {
                quantity: THETA5,
                reference: Reference::Auto,
                criterion: Criterion::NotAbove { slack: THETA_TOL },
            };
            cases.push(case(format!("f0={name} p0={p0}"), scenario, vec![check]));
        }
    }
    let trajectory = TrajectorySettings::new(DESK_POINTS, 10, DEFAULT_SEED).full_scale(FULL_POINTS);
    estimates("remark41", "Index bound when the map fixing the target is picked with probability p0", trajectory, cases)
}

fn moving_discrete() -> ExperimentSpec {
    let cases = [("z0=2/11", 2.0 / 11.0), ("z0=10/13", 10.0 / 13.0), ("z0=1/pi", 1.0 / PI)]
        .into_iter()
        .map(|(label, z0)| {
            let scenario = Scenario::new(MapSpec::Doubling, PerturbationScheme::None, four_point_target(z0));
            let mut checks = vec![
                Check::near(THETA5, Reference::Value(FOUR_POINT_THETA), THETA_TOL),
                Check::near(Quantity::Qk(0), Reference::Value(FOUR_POINT_Q0), QK_TOL),
                Check::near(Quantity::Qk(1), Reference::Value(FOUR_POINT_Q1), QK_TOL),
            ];
            checks.extend((2..5).map(|k| Check {
                quantity: Quantity::Qk(k),
                reference: Reference::Value(0.0),
                criterion: Criterion::AtMost { bound: QK_TOL },
            }));
            case(label, scenario, checks)
        })
        .collect();
    estimates("moving-discrete", "Doubling map with a target jumping among four points", desk(), cases)
}

/// Multiples of the target-ball radius used in the noise sweeps.
pub const OBSERVATIONAL_RATIOS: [f64; 4] = [10.0, 30.0, 100.0, 300.0];
pub const ADDITIVE_RATIOS: [f64; 4] = [1.0, 10.0, 100.0, 500.0];

/// Generic centre for the observational-noise sweep.
pub const GENERIC_CENTRE: f64 = 0.2718281828459045;

fn observational_noise() -> ExperimentSpec {
    let r = ball_radius(Scenario::DEFAULT_QUANTILE);
    let mut cases = Vec::new();
    for (name, z0) in [("z0=1/2", 0.5), ("z0=generic", GENERIC_CENTRE)] {
        let unperturbed = if z0 == 0.5 {
            Check::near(THETA5, Reference::Value(2.0 / 3.0), THETA_TOL)
        } else {
            Check::at_least(THETA5, NO_CLUSTER_BOUND)
        };
        let target = TargetSpec::MovingUniform { z0: PointState::scalar(z0), epsilon: 0.0 };
        cases.push(case(
            format!("{name} eps=0"),
            Scenario::new(MapSpec::Tripling, PerturbationScheme::None, target),
            vec![unperturbed],
        ));
        for ratio in OBSERVATIONAL_RATIOS {
            let target = TargetSpec::MovingUniform { z0: PointState::scalar(z0), epsilon: ratio * r };
            cases.push(case(
                format!("{name} eps={ratio}r"),
                Scenario::new(MapSpec::Tripling, PerturbationScheme::None, target),
                vec![Check::at_least(THETA5, NO_CLUSTER_BOUND)],
            ));
        }
    }
    estimates("observational-noise", "Tripling map with a uniformly jittered target centre", desk(), cases)
}

fn additive_noise() -> ExperimentSpec {
    let r = ball_radius(Scenario::DEFAULT_QUANTILE);
    let mut cases =
        vec![case("eps=0", fixed(MapSpec::Tripling, &[0.5]), vec![Check::near(THETA5, Reference::Auto, THETA_TOL)])];
    for ratio in ADDITIVE_RATIOS {
        let scenario = Scenario::new(
            MapSpec::Tripling,
            PerturbationScheme::AdditiveUniform { epsilon: ratio * r },
            TargetSpec::fixed(0.5),
        );
        cases.push(case(format!("eps={ratio}r"), scenario, vec![Check::at_least(THETA5, NO_CLUSTER_BOUND)]));
    }
    estimates("additive-noise", "Tripling map with additive uniform noise at its fixed point 1/2", desk(), cases)
}

/// Quantile used for product-observable indices.
pub const DEI_QUANTILE: f64 = 0.995;

fn diagonal(map: MapSpec, scheme: PerturbationScheme, k: usize) -> Scenario {
    Scenario::new(map, scheme, TargetSpec::Diagonal { k })
}

fn dei_additive() -> ExperimentSpec {
    let mut cases = Vec::new();
    for (name, map) in [("3x", MapSpec::Tripling), ("gauss", MapSpec::Gauss)] {
        for k in [2, 3] {
            for eps in [0.0, 1e-3, 1e-2, 1e-1] {
                let scheme = if eps == 0.0 {
                    PerturbationScheme::None
                } else {
                    PerturbationScheme::AdditiveUniform { epsilon: eps }
                };
                let check =
                    if eps == 0.0 { Check::near(SUVEGES, Reference::Auto, DEI_TOL) } else { Check::report(SUVEGES) };
                cases.push(case(format!("{name} k={k} eps={eps}"), diagonal(map.clone(), scheme, k), vec![check]));
            }
        }
    }
    estimates("dei-additive", "Product-observable index under additive noise", desk(), cases)
}

fn dei_markov() -> ExperimentSpec {
    let scenario = diagonal(MapSpec::MarkovThreeBranch, PerturbationScheme::None, 2).with_quantile(DEI_QUANTILE);
    estimates(
        "dei-markov",
        "Product-observable index of the three-branch Markov map",
        desk(),
        vec![case("k=2", scenario, vec![Check::near(SUVEGES, Reference::Auto, DEI_TOL)])],
    )
}

fn dei_tripling() -> ExperimentSpec {
    let cases = (2..=5)
        .map(|k| {
            let scenario = diagonal(MapSpec::Tripling, PerturbationScheme::None, k).with_quantile(DEI_QUANTILE);
            case(format!("k={k}"), scenario, vec![Check::near(SUVEGES, Reference::Auto, DEI_TOL)])
        })
        .collect();
    estimates("dei-tripling", "Product-observable index spectrum of the tripling map", desk(), cases)
}

fn dei_bernoulli() -> ExperimentSpec {
    let cases = [0.0, 0.1, 0.25]
        .into_iter()
        .map(|b| {
            let scheme = two_maps(MapSpec::Tripling, MapSpec::affine(3.0, b), 0.5);
            let scenario = diagonal(MapSpec::Tripling, scheme, 2).with_quantile(DEI_QUANTILE);
            let tol = if b == 0.0 { DEI_TOL } else { BERNOULLI_DEI_TOL };
            case(format!("b={b}"), scenario, vec![Check::near(SUVEGES, Reference::Auto, tol)])
        })
        .collect();
    estimates(
        "dei-bernoulli",
        "Product-observable index for two tripling maps picked independently per coordinate",
        desk(),
        cases,
    )
}

/// Quantile of the pilot run fixing the visit target.
pub const VISITS_QUANTILE: f64 = 0.99;

fn visits(id: &str, title: &str, settings: VisitSettings, cases: Vec<VisitCase>) -> ExperimentSpec {
    ExperimentSpec {
        id: id.into(),
        title: title.into(),
        trajectory: TrajectorySettings::new(settings.pilot_points, 1, DEFAULT_SEED),
        kind: ExperimentKind::Visits { settings, cases },
    }
}

fn visit_case(label: &str, scenario: Scenario, models: Vec<VisitModel>, checks: Vec<VisitCheck>) -> VisitCase {
    VisitCase { label: label.into(), scenario, models, checks }
}

fn visits_discrete_noise() -> ExperimentSpec {
    visits(
        "visits-discrete-noise",
        "Visit counts for two doubling maps with offsets 0 and 1/2",
        VisitSettings::default(),
        vec![visit_case(
            "b=1/2",
            discrete_noise_scenario().with_quantile(VISITS_QUANTILE),
            vec![VisitModel::PolyaAeppli { theta: 2.0 / 3.0 }, VisitModel::Poisson],
            vec![VisitCheck::TvAtMost { model: 0, bound: VISITS_TV }],
        )],
    )
}

fn visits_moving_target() -> ExperimentSpec {
    let scenario = Scenario::new(MapSpec::Doubling, PerturbationScheme::None, four_point_target(2.0 / 11.0))
        .with_quantile(VISITS_QUANTILE);
    visits(
        "visits-moving-target",
        "Visit counts for the four-point moving target",
        VisitSettings::default(),
        vec![visit_case(
            "z0=2/11",
            scenario,
            vec![VisitModel::PolyaAeppli { theta: FOUR_POINT_THETA }, VisitModel::Poisson],
            vec![VisitCheck::TvAtMost { model: 0, bound: VISITS_TV }],
        )],
    )
}

fn visits_rotation() -> ExperimentSpec {
    visits(
        "visits-rotation",
        "Visit counts for the rotation-driven tripling map",
        VisitSettings::default(),
        vec![visit_case(
            "alpha=1/pi",
            rotation_scenario(1.0 / PI).with_quantile(VISITS_QUANTILE),
            vec![VisitModel::Poisson, VisitModel::PolyaAeppliEstimated { method: Method::OrderM(DEFAULT_ORDER) }],
            vec![VisitCheck::TvAtMost { model: 0, bound: VISITS_TV }],
        )],
    )
}

fn visits_markov_diagonal() -> ExperimentSpec {
    let theta = theory_dei(&MapSpec::MarkovThreeBranch, 2).expect("closed form for the Markov map");
    visits(
        "visits-markov-diagonal",
        "Visits to the diagonal of the three-branch Markov map squared",
        VisitSettings::default(),
        vec![visit_case(
            "k=2",
            diagonal(MapSpec::MarkovThreeBranch, PerturbationScheme::None, 2).with_quantile(VISITS_QUANTILE),
            vec![VisitModel::MarkovCompoundPoisson, VisitModel::PolyaAeppli { theta }],
            vec![VisitCheck::TvAtMost { model: 0, bound: VISITS_TV }, VisitCheck::TvOrdered { worse: 1, better: 0 }],
        )],
    )
}

/// Ten maps `2x + i/18`, `i = 0..9`, with weights redrawn every `period` steps.
pub fn sequential_scheme(period: usize) -> PerturbationScheme {
    let maps = (0..10).map(|i| MapSpec::affine(2.0, i as f64 / 18.0)).collect();
    PerturbationScheme::Sequential { maps, period, weight_seed: None }
}

pub const SEQUENTIAL_QUANTILE: f64 = 0.995;

fn sequential_appendix() -> ExperimentSpec {
    let settings = VisitSettings { pilot_points: DESK_POINTS, ..VisitSettings::default() };
    let scenario = Scenario::new(MapSpec::Doubling, sequential_scheme(10), TargetSpec::fixed(0.0))
        .with_quantile(SEQUENTIAL_QUANTILE);
    visits(
        "sequential-appendix",
        "Sequential ten-map system: index and visit counts from one trajectory",
        settings,
        vec![visit_case(
            "tau=10",
            scenario,
            vec![VisitModel::PolyaAeppliEstimated { method: Method::OrderM(DEFAULT_ORDER) }, VisitModel::Poisson],
            vec![VisitCheck::TvAtMost { model: 0, bound: SEQUENTIAL_TV }],
        )],
    )
}

/// Every built-in experiment, in presentation order.
pub fn registry() -> Vec<ExperimentSpec> {
    vec![
        table1(),
        theta_m_curves(),
        table2(),
        qk_b_half(),
        remark41(),
        moving_discrete(),
        observational_noise(),
        additive_noise(),
        dei_additive(),
        dei_markov(),
        dei_tripling(),
        dei_bernoulli(),
        visits_discrete_noise(),
        visits_moving_target(),
        visits_rotation(),
        visits_markov_diagonal(),
        sequential_appendix(),
    ]
}

pub fn find(id: &str) -> Result<ExperimentSpec> {
    registry().into_iter().find(|s| s.id == id).ok_or_else(|| Error::UnknownExperiment(id.into()))
}
