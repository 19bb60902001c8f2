use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::empirical::{estimate, Method};
use crate::dynamics::TrajectoryConfig;
use crate::error::{Error, Result};
use crate::observables::{HitTimes, Scenario};

/// Replica mean and spread of one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EIEstimate {
    pub value: f64,
    pub method: Method,
    pub std_dev: f64,
    pub n_replicas: usize,
    pub n_points: usize,
    pub quantile: f64,
}

/// Sample mean and standard deviation (n − 1 denominator).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl EIEstimate {
    pub fn from_replicas(values: &[f64], method: Method, n_points: usize, quantile: f64) -> Self {
        let (value, std_dev) = mean_std(values);
        EIEstimate { value, method, std_dev, n_replicas: values.len(), n_points, quantile }
    }
}

/// Run `f` on the exceedances of every replica, in parallel.
pub fn per_replica<T, F>(scenario: &Scenario, n_replicas: usize, cfg: &TrajectoryConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&HitTimes) -> Result<T> + Sync,
{
    if n_replicas == 0 {
        return Err(Error::invalid("n_replicas", "need at least one replica"));
    }
    (0..n_replicas as u64)
        .into_par_iter()
        .map(|r| {
            let cfg = cfg.clone().with_replica(cfg.replica + r);
            f(&scenario.hit_series(&cfg)?)
        })
        .collect()
}

/// Several estimators evaluated on the same replica trajectories.
pub fn ensemble_estimates(
    scenario: &Scenario,
    methods: &[Method],
    n_replicas: usize,
    cfg: &TrajectoryConfig,
) -> Result<Vec<EIEstimate>> {
    if n_replicas < 2 {
        return Err(Error::invalid("n_replicas", "need at least two replicas for a spread"));
    }
    let table = per_replica(scenario, n_replicas, cfg, |hits| {
        methods.iter().map(|&m| estimate(hits, m)).collect::<Result<Vec<f64>>>()
    })?;
    Ok(methods
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let column: Vec<f64> = table.iter().map(|row| row[j]).collect();
            EIEstimate::from_replicas(&column, m, cfg.n_points, scenario.quantile)
        })
        .collect())
}

/// Mean and spread of `method` over `n_replicas` independent trajectories.
pub fn ensemble_estimate(
    scenario: &Scenario,
    method: Method,
    n_replicas: usize,
    cfg: &TrajectoryConfig,
) -> Result<EIEstimate> {
    Ok(ensemble_estimates(scenario, &[method], n_replicas, cfg)?.remove(0))
}
