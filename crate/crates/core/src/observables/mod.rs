//! Observable series, thresholds and exceedance structure.

mod scenario;
mod series;
mod stream;
mod target;

pub use scenario::Scenario;
pub use series::{
    empirical_quantile, exceedances, exceedances_at_quantile, potential, set_measure, set_measure_empirical,
    ExceedanceSeries, Exceedances, HitTimes, DEFAULT_CAP,
};
pub use stream::{points, DistanceStream, PointStream, Points};
pub use target::TargetSpec;

use crate::dynamics::PointState;
use crate::error::{Error, Result};
use target::{point_distance, TargetProcess};

/// Circle metric per coordinate, combined in the Euclidean norm.
pub fn distance(a: &PointState, b: &PointState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(point_distance(a.coords(), b.coords()))
}

/// `−log d(x_i, z)` along a trajectory.
pub fn observe_fixed<S: PointStream>(orbit: S, z: &PointState) -> Result<Vec<f64>> {
    DistanceStream::new(orbit, TargetProcess::Fixed(z.0.clone())).potentials(DEFAULT_CAP)
}

/// `−log d(x_i, z_i)` for a moving target seeded by `seed`.
pub fn observe_moving<S: PointStream>(orbit: S, target: &TargetSpec, seed: u64) -> Result<Vec<f64>> {
    observe_moving_replica(orbit, target, seed, 0)
}

/// [`observe_moving`] with an explicit replica stream.
pub fn observe_moving_replica<S: PointStream>(
    orbit: S,
    target: &TargetSpec,
    seed: u64,
    replica: u64,
) -> Result<Vec<f64>> {
    if matches!(target, TargetSpec::Diagonal { .. }) {
        return Err(Error::invalid("target", "use observe_dei for diagonal targets"));
    }
    let hint = orbit.remaining_hint();
    DistanceStream::new(orbit, TargetProcess::new(target, seed, replica, hint)?).potentials(DEFAULT_CAP)
}

/// `−log max_{i≥2} d(x_1, x_i)` on a k-fold product trajectory.
pub fn observe_dei<S: PointStream>(orbit: S, k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::invalid("k", "product observable needs k ≥ 2"));
    }
    DistanceStream::new(orbit, TargetProcess::Diagonal { k }).potentials(DEFAULT_CAP)
}
