use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::dynamics::{
    self, check_weights, wrap_unit, InitialState, MapSpec, Orbit, PerturbationScheme, PointState, TrajectoryConfig,
};
use crate::error::{Error, Result};
use crate::rng::{stream, Channel, StreamRng};

/// Centre of the target ball, possibly moving with time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    Fixed {
        z: PointState,
    },
    /// Centre drawn i.i.d. from `points` with `weights` at every step.
    MovingDiscrete {
        points: Vec<PointState>,
        weights: Vec<f64>,
    },
    /// Centre `z0 − ε + 2ε·w_n` where `w_n` follows `driver` on the circle.
    MovingMapDriven {
        z0: f64,
        epsilon: f64,
        driver: MapSpec,
        #[serde(default)]
        initial: Option<f64>,
    },
    /// Centre drawn uniformly from `[z0 − ε, z0 + ε]` at every step.
    MovingUniform {
        z0: PointState,
        epsilon: f64,
    },
    /// Diagonal of the k-fold product.
    Diagonal {
        k: usize,
    },
}

impl TargetSpec {
    pub fn fixed(x: f64) -> Self {
        TargetSpec::Fixed { z: PointState::scalar(x) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TargetSpec::Fixed { .. } => Ok(()),
            TargetSpec::MovingDiscrete { points, weights } => {
                let first = points.first().ok_or(Error::EmptyInput("target points"))?;
                if let Some(p) = points.iter().find(|p| p.dim() != first.dim()) {
                    return Err(Error::DimensionMismatch { expected: first.dim(), got: p.dim() });
                }
                if points.len() != weights.len() {
                    return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
                }
                check_weights(weights)
            }
            TargetSpec::MovingMapDriven { epsilon, driver, .. } => {
                if driver.dimension() != 1 {
                    return Err(Error::Unsupported("target driver must be one-dimensional".into()));
                }
                check_radius(*epsilon)
            }
            TargetSpec::MovingUniform { epsilon, .. } => {
                if *epsilon == 0.0 {
                    Ok(())
                } else {
                    check_radius(*epsilon)
                }
            }
            TargetSpec::Diagonal { k } => {
                if *k < 2 {
                    return Err(Error::invalid("k", "diagonal target needs k ≥ 2"));
                }
                Ok(())
            }
        }
    }

    /// Product order the target expects from the orbit.
    pub fn product_order(&self) -> usize {
        match self {
            TargetSpec::Diagonal { k } => *k,
            _ => 1,
        }
    }
}

fn check_radius(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::invalid("epsilon", format!("{eps} is outside (0, 0.5)")));
    }
    Ok(())
}

/// Decorrelates the driver orbit's streams from the main orbit's.
const DRIVER_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Per-step realisation of a [`TargetSpec`].
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub(crate) enum TargetProcess {
    Fixed(SmallVec<[f64; 4]>),
    Discrete { points: Vec<SmallVec<[f64; 4]>>, cumulative: Vec<f64>, rng: StreamRng },
    Driven { low: f64, width: f64, driver: Orbit },
    Uniform { z0: SmallVec<[f64; 4]>, epsilon: f64, rng: StreamRng },
    Diagonal { k: usize },
}

impl TargetProcess {
    pub(crate) fn new(target: &TargetSpec, seed: u64, replica: u64, n_points: usize) -> Result<Self> {
        target.validate()?;
        let rng = stream(seed, Channel::Target, replica);
        Ok(match target {
            TargetSpec::Fixed { z } => TargetProcess::Fixed(z.0.clone()),
            TargetSpec::MovingDiscrete { points, weights } => {
                if points.len() == 1 {
                    return Ok(TargetProcess::Fixed(points[0].0.clone()));
                }
                let mut acc = 0.0;
                let mut cumulative: Vec<f64> = weights
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                *cumulative.last_mut().expect("nonempty") = f64::INFINITY;
                TargetProcess::Discrete { points: points.iter().map(|p| p.0.clone()).collect(), cumulative, rng }
            }
            TargetSpec::MovingMapDriven { z0, epsilon, driver, initial } => {
                let low = z0 - epsilon;
                let width = 2.0 * epsilon;
                let mut cfg = TrajectoryConfig::new(n_points.max(1), seed ^ DRIVER_SALT).with_replica(replica);
                if let Some(z) = initial {
                    let w = (z - low) / width;
                    if !(0.0..1.0).contains(&w) {
                        return Err(Error::invalid("initial", "initial centre outside [z0−ε, z0+ε)"));
                    }
                    cfg = cfg.with_burn_in(0);
                    cfg.initial = InitialState::Fixed(PointState::scalar(w));
                }
                TargetProcess::Driven { low, width, driver: dynamics::orbit(driver, &PerturbationScheme::None, &cfg)? }
            }
            TargetSpec::MovingUniform { z0, epsilon } => {
                if *epsilon == 0.0 {
                    TargetProcess::Fixed(z0.0.clone())
                } else {
                    TargetProcess::Uniform { z0: z0.0.clone(), epsilon: *epsilon, rng }
                }
            }
            TargetSpec::Diagonal { k } => TargetProcess::Diagonal { k: *k },
        })
    }

    /// Dimension of a single target point, if fixed by the spec.
    pub(crate) fn dim(&self) -> Option<usize> {
        match self {
            TargetProcess::Fixed(z) | TargetProcess::Uniform { z0: z, .. } => Some(z.len()),
            TargetProcess::Discrete { points, .. } => Some(points[0].len()),
            TargetProcess::Driven { .. } => Some(1),
            TargetProcess::Diagonal { .. } => None,
        }
    }

    /// Distance from `x` to the current target; advances moving targets.
    #[inline]
    pub(crate) fn distance(&mut self, x: &[f64]) -> f64 {
        match self {
            TargetProcess::Fixed(z) => point_distance(x, z),
            TargetProcess::Discrete { points, cumulative, rng } => {
                let u: f64 = rng.random();
                let i = cumulative.partition_point(|&c| c <= u);
                point_distance(x, &points[i])
            }
            TargetProcess::Driven { low, width, driver } => {
                let w = driver.next_coords().map_or(0.0, |c| c[0]);
                circle_distance(x[0], wrap_unit(*low + *width * w))
            }
            TargetProcess::Uniform { z0, epsilon, rng } => {
                let mut acc = 0.0;
                for (a, c) in x.iter().zip(z0.iter()) {
                    let z = wrap_unit(c + (2.0 * rng.random::<f64>() - 1.0) * *epsilon);
                    let d = circle_distance(*a, z);
                    acc += d * d;
                }
                acc.sqrt()
            }
            TargetProcess::Diagonal { k } => {
                let dim = x.len() / *k;
                let first = &x[..dim];
                (1..*k).map(|i| point_distance(first, &x[i * dim..(i + 1) * dim])).fold(0.0, f64::max)
            }
        }
    }
}

#[inline]
pub(crate) fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

#[inline]
pub(crate) fn point_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        return circle_distance(a[0], b[0]);
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = circle_distance(*x, *y);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}
