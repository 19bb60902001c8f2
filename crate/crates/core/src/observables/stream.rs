use crate::dynamics::{Orbit, PointState, ProductOrbit};
use crate::error::{Error, Result};

use super::target::TargetProcess;

/// Source of points read one at a time without allocation.
pub trait PointStream {
    fn next_point(&mut self) -> Option<&[f64]>;

    /// Points left, when known.
    fn remaining_hint(&self) -> usize {
        0
    }
}

impl PointStream for Orbit {
    #[inline]
    fn next_point(&mut self) -> Option<&[f64]> {
        self.next_coords()
    }

    fn remaining_hint(&self) -> usize {
        self.remaining()
    }
}

impl PointStream for ProductOrbit {
    #[inline]
    fn next_point(&mut self) -> Option<&[f64]> {
        self.inner().next_coords()
    }

    fn remaining_hint(&self) -> usize {
        self.0.remaining()
    }
}

/// Adapter turning any iterator of [`PointState`] into a [`PointStream`].
#[derive(Debug, Clone)]
pub struct Points<I> {
    iter: I,
    current: Option<PointState>,
}

pub fn points<I: IntoIterator<Item = PointState>>(iter: I) -> Points<I::IntoIter> {
    Points { iter: iter.into_iter(), current: None }
}

impl<I: Iterator<Item = PointState>> PointStream for Points<I> {
    fn next_point(&mut self) -> Option<&[f64]> {
        self.current = self.iter.next();
        self.current.as_ref().map(|p| p.coords())
    }

    fn remaining_hint(&self) -> usize {
        self.iter.size_hint().0
    }
}

/// Distances from a point stream to a (possibly moving) target.
#[derive(Debug, Clone)]
pub struct DistanceStream<S> {
    source: S,
    target: TargetProcess,
    checked: bool,
}

impl<S: PointStream> DistanceStream<S> {
    pub(crate) fn new(source: S, target: TargetProcess) -> Self {
        DistanceStream { source, target, checked: false }
    }

    /// Next distance, or a dimension error on the first point.
    pub fn next_distance(&mut self) -> Option<Result<f64>> {
        let x = self.source.next_point()?;
        if !self.checked {
            self.checked = true;
            let expected = match &self.target {
                TargetProcess::Diagonal { k } => {
                    if x.len() % k != 0 || x.len() < *k {
                        return Some(Err(Error::DimensionMismatch { expected: *k, got: x.len() }));
                    }
                    x.len()
                }
                t => t.dim().unwrap_or(x.len()),
            };
            if x.len() != expected {
                return Some(Err(Error::DimensionMismatch { expected, got: x.len() }));
            }
        }
        Some(Ok(self.target.distance(x)))
    }

    pub fn remaining_hint(&self) -> usize {
        self.source.remaining_hint()
    }

    /// Drain into `−log d` values clipped at `cap`.
    pub fn potentials(mut self, cap: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.remaining_hint() + 1);
        while let Some(d) = self.next_distance() {
            out.push(super::potential(d?, cap));
        }
        Ok(out)
    }
}
