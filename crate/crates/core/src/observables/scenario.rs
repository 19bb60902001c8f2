use serde::{Deserialize, Serialize};

use crate::dynamics::{self, MapSpec, NoiseCoupling, Orbit, PerturbationScheme, TrajectoryConfig};
use crate::error::{Error, Result};

use super::series::{empirical_quantile, exceedances, ExceedanceSeries, HitTimes, DEFAULT_CAP};
use super::stream::DistanceStream;
use super::target::{TargetProcess, TargetSpec};

/// A map, its perturbation, the target and the threshold level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub map: MapSpec,
    pub scheme: PerturbationScheme,
    pub target: TargetSpec,
    #[serde(default)]
    pub coupling: NoiseCoupling,
    pub quantile: f64,
    #[serde(default = "default_cap")]
    pub cap: f64,
}

fn default_cap() -> f64 {
    DEFAULT_CAP
}

impl Scenario {
    pub const DEFAULT_QUANTILE: f64 = 0.999;

    pub fn new(map: MapSpec, scheme: PerturbationScheme, target: TargetSpec) -> Self {
        Scenario {
            map,
            scheme,
            target,
            coupling: NoiseCoupling::Independent,
            quantile: Self::DEFAULT_QUANTILE,
            cap: DEFAULT_CAP,
        }
    }

    pub fn with_quantile(mut self, p: f64) -> Self {
        self.quantile = p;
        self
    }

    pub fn with_coupling(mut self, coupling: NoiseCoupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn orbit(&self, cfg: &TrajectoryConfig) -> Result<Orbit> {
        match self.target.product_order() {
            1 => dynamics::orbit(&self.map, &self.scheme, cfg),
            k => Ok(dynamics::product_orbit(&self.map, &self.scheme, cfg, k, self.coupling)?.0),
        }
    }

    /// Lazily evaluated distances to the target along one trajectory.
    pub fn distances(&self, cfg: &TrajectoryConfig) -> Result<DistanceStream<Orbit>> {
        let target = TargetProcess::new(&self.target, cfg.seed, cfg.replica, cfg.n_points)?;
        Ok(DistanceStream::new(self.orbit(cfg)?, target))
    }

    /// Observable series `−log d`.
    pub fn values(&self, cfg: &TrajectoryConfig) -> Result<Vec<f64>> {
        self.distances(cfg)?.potentials(self.cap)
    }

    /// Observable series thresholded at its own empirical quantile.
    pub fn series(&self, cfg: &TrajectoryConfig) -> Result<ExceedanceSeries> {
        let values = self.values(cfg)?;
        let u = empirical_quantile(&values, self.quantile)?;
        exceedances(values, u, self.quantile)
    }

    /// Exceedances at the scenario's own quantile, keeping only hit indices.
    pub fn hit_series(&self, cfg: &TrajectoryConfig) -> Result<HitTimes> {
        let values = self.values(cfg)?;
        let u = empirical_quantile(&values, self.quantile)?;
        let hits = values.iter().enumerate().filter_map(|(i, &v)| (v >= u).then_some(i)).collect();
        HitTimes::new(values.len(), u, self.quantile, hits)
    }

    /// Threshold `u` from a pilot run.
    pub fn pilot_threshold(&self, cfg: &TrajectoryConfig) -> Result<f64> {
        empirical_quantile(&self.values(cfg)?, self.quantile)
    }

    /// Streaming record of the steps with `−log d ≥ u`, i.e. `d ≤ e^{−u}`.
    pub fn hit_times(&self, cfg: &TrajectoryConfig, u: f64) -> Result<HitTimes> {
        if !u.is_finite() {
            return Err(Error::invalid("u", "threshold must be finite"));
        }
        let radius = (-u).exp();
        let mut stream = self.distances(cfg)?;
        let mut hits = Vec::new();
        let mut i = 0;
        while let Some(d) = stream.next_distance() {
            if d? <= radius {
                hits.push(i);
            }
            i += 1;
        }
        HitTimes::new(i, u, self.quantile, hits)
    }
}
