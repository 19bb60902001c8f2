use std::f64::consts::LN_2;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Exact rational coordinate used for periodic-point bookkeeping.
pub type Rational = Ratio<i128>;

/// Reduce a real to the circle `[0, 1)`.
#[inline]
pub fn wrap_unit(v: f64) -> f64 {
    let w = v - v.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

fn wrap_exact(v: Rational) -> Rational {
    v - v.floor()
}

/// A point of the phase space: one circle coordinate per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointState(pub SmallVec<[f64; 4]>);

impl PointState {
    /// Build a state, rejecting coordinates outside `[0, 1)`.
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput("point coordinates"));
        }
        if let Some(bad) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(Error::invalid("coordinates", format!("{bad} is outside [0, 1)")));
        }
        Ok(PointState(SmallVec::from_slice(coords)))
    }

    /// Build a state by reducing each coordinate modulo 1.
    pub fn wrapped(coords: &[f64]) -> Self {
        PointState(coords.iter().map(|&c| wrap_unit(c)).collect())
    }

    pub fn scalar(x: f64) -> Self {
        Self::wrapped(&[x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Nearest small-denominator rational for every coordinate, when the
    /// float is within 1e-15 of it.
    pub fn to_exact(&self) -> Option<Vec<Rational>> {
        self.0.iter().map(|&c| rational_of(c)).collect()
    }
}

impl fmt::Display for PointState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Recover a rational with denominator at most 10^6 that matches `x` to 1e-15.
pub(crate) fn rational_of(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rem = x;
    for _ in 0..40 {
        let a = rem.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > 1_000_000 {
            break;
        }
        if (h2 as f64 / k2 as f64 - x).abs() <= 1e-15 {
            return Some(Ratio::new(h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rem - a;
        if frac < 1e-300 {
            break;
        }
        rem = 1.0 / frac;
    }
    None
}

/// Branch intervals of the three-branch Markov map.
const MARKOV_BREAKS: [f64; 2] = [1.0 / 3.0, 2.0 / 3.0];
/// Invariant density of the three-branch Markov map on each branch.
pub const MARKOV_DENSITY: [f64; 3] = [0.6, 1.2, 1.2];
/// Absolute slopes of the three-branch Markov map.
pub const MARKOV_SLOPES: [f64; 3] = [3.0, 2.0, 3.0];

/// Expanding eigenvalue of the cat map `(x, y) -> (x + y, x + 2y)`.
pub fn cat_lambda() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

/// Base deterministic maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    /// `2x mod 1`
    Doubling,
    /// `3x mod 1`
    Tripling,
    /// `a x + b mod 1`
    AffineExpanding { slope: f64, offset: f64 },
    /// `1/x mod 1`
    Gauss,
    /// `(x, y) -> (x + y, x + 2y) mod 1` on the 2-torus
    CatMap,
    /// `3x` on `[0,1/3)`, `5/3 - 2x` on `[1/3,2/3)`, `3x - 2` on `[2/3,1)`
    MarkovThreeBranch,
}

/// Invariant density descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform,
    /// `values[i]` holds on `[breaks[i], breaks[i+1])`; `breaks` starts at 0 and ends at 1.
    PiecewiseConstant {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    Gauss,
}

impl Density {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Density::Uniform => 1.0,
            Density::PiecewiseConstant { breaks, values } => {
                let i = breaks[1..].partition_point(|&b| b <= x).min(values.len() - 1);
                values[i]
            }
            Density::Gauss => 1.0 / ((1.0 + x) * LN_2),
        }
    }
}

impl MapSpec {
    pub fn affine(slope: f64, offset: f64) -> Self {
        MapSpec::AffineExpanding { slope, offset }
    }

    pub fn dimension(&self) -> usize {
        match self {
            MapSpec::CatMap => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> String {
        match self {
            MapSpec::Doubling => "2x mod 1".into(),
            MapSpec::Tripling => "3x mod 1".into(),
            MapSpec::AffineExpanding { slope, offset } => format!("{slope}x+{offset} mod 1"),
            MapSpec::Gauss => "1/x mod 1".into(),
            MapSpec::CatMap => "cat map".into(),
            MapSpec::MarkovThreeBranch => "markov 3-branch".into(),
        }
    }

    /// Integer slope and offset for maps that are a single affine branch
    /// with integer slope on the circle.
    pub(crate) fn integer_affine(&self) -> Option<(i64, f64)> {
        match *self {
            MapSpec::Doubling => Some((2, 0.0)),
            MapSpec::Tripling => Some((3, 0.0)),
            MapSpec::AffineExpanding { slope, offset } => {
                let r = slope.round();
                ((slope - r).abs() < 1e-12 && r.abs() >= 1.0).then_some((r as i64, offset))
            }
            _ => None,
        }
    }

    fn check_dim(&self, x: &PointState) -> Result<()> {
        if x.dim() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: x.dim() });
        }
        Ok(())
    }

    /// Apply the map once in floating point.
    pub fn step(&self, x: &PointState) -> Result<PointState> {
        self.check_dim(x)?;
        let c = x.coords();
        Ok(match self {
            MapSpec::CatMap => PointState::wrapped(&[c[0] + c[1], c[0] + 2.0 * c[1]]),
            _ => PointState::scalar(self.step_scalar(c[0])),
        })
    }

    #[inline]
    pub(crate) fn step_scalar(&self, x: f64) -> f64 {
        match *self {
            MapSpec::Doubling => wrap_unit(2.0 * x),
            MapSpec::Tripling => wrap_unit(3.0 * x),
            MapSpec::AffineExpanding { slope, offset } => wrap_unit(slope * x + offset),
            MapSpec::Gauss => {
                if x == 0.0 {
                    0.0
                } else {
                    wrap_unit(1.0 / x)
                }
            }
            MapSpec::MarkovThreeBranch => {
                if x < MARKOV_BREAKS[0] {
                    wrap_unit(3.0 * x)
                } else if x < MARKOV_BREAKS[1] {
                    wrap_unit(5.0 / 3.0 - 2.0 * x)
                } else {
                    wrap_unit(3.0 * x - 2.0)
                }
            }
            MapSpec::CatMap => unreachable!("cat map is two-dimensional"),
        }
    }

    /// Apply the map once in exact rational arithmetic.
    pub fn step_exact(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: x.len() });
        }
        let int = |n: i128| Rational::from_integer(n);
        Ok(match self {
            MapSpec::CatMap => vec![wrap_exact(x[0] + x[1]), wrap_exact(x[0] + int(2) * x[1])],
            MapSpec::Doubling => vec![wrap_exact(int(2) * x[0])],
            MapSpec::Tripling => vec![wrap_exact(int(3) * x[0])],
            MapSpec::AffineExpanding { slope, offset } => {
                let a =
                    rational_of(*slope).ok_or_else(|| Error::Unsupported(format!("slope {slope} is not rational")))?;
                let b = rational_of(*offset)
                    .ok_or_else(|| Error::Unsupported(format!("offset {offset} is not rational")))?;
                vec![wrap_exact(a * x[0] + b)]
            }
            MapSpec::Gauss => {
                if x[0].is_zero() {
                    vec![x[0]]
                } else {
                    vec![wrap_exact(x[0].recip())]
                }
            }
            MapSpec::MarkovThreeBranch => {
                let third = Rational::new(1, 3);
                let v = x[0];
                let y = if v < third {
                    int(3) * v
                } else if v < int(2) * third {
                    Rational::new(5, 3) - int(2) * v
                } else {
                    int(3) * v - int(2)
                };
                vec![wrap_exact(y)]
            }
        })
    }

    /// `|T'(x)|` for one-dimensional maps; errors at non-differentiable points.
    pub(crate) fn slope_at(&self, x: f64, iterate: usize) -> Result<f64> {
        match *self {
            MapSpec::Doubling => Ok(2.0),
            MapSpec::Tripling => Ok(3.0),
            MapSpec::AffineExpanding { slope, .. } => Ok(slope.abs()),
            MapSpec::Gauss => {
                if x == 0.0 {
                    Err(Error::BranchBoundary { point: x, iterate })
                } else {
                    Ok(1.0 / (x * x))
                }
            }
            MapSpec::MarkovThreeBranch => {
                if MARKOV_BREAKS.iter().any(|b| (x - b).abs() < 1e-12) {
                    return Err(Error::BranchBoundary { point: x, iterate });
                }
                let i = MARKOV_BREAKS.partition_point(|&b| b <= x);
                Ok(MARKOV_SLOPES[i])
            }
            MapSpec::CatMap => unreachable!("cat map is two-dimensional"),
        }
    }

    /// `|DT^p(x)|` by the chain rule along the orbit of `x`; for the cat map
    /// the product of expanding eigenvalues, `λ^p`.
    pub fn derivative_magnitude(&self, x: &PointState, p: usize) -> Result<f64> {
        self.check_dim(x)?;
        if p == 0 {
            return Err(Error::invalid("p", "iterate count must be at least 1"));
        }
        if let MapSpec::CatMap = self {
            return Ok(cat_lambda().powi(p as i32));
        }
        let mut v = x.coords()[0];
        let mut total = 1.0;
        for j in 0..p {
            total *= self.slope_at(v, j)?;
            v = self.step_scalar(v);
        }
        Ok(total)
    }

    pub fn density(&self) -> Result<Density> {
        match self {
            MapSpec::Doubling | MapSpec::Tripling | MapSpec::CatMap => Ok(Density::Uniform),
            MapSpec::AffineExpanding { .. } => match self.integer_affine() {
                Some(_) => Ok(Density::Uniform),
                None => Err(Error::Unsupported(format!("no invariant density known for {}", self.name()))),
            },
            MapSpec::Gauss => Ok(Density::Gauss),
            MapSpec::MarkovThreeBranch => Ok(Density::PiecewiseConstant {
                breaks: vec![0.0, MARKOV_BREAKS[0], MARKOV_BREAKS[1], 1.0],
                values: MARKOV_DENSITY.to_vec(),
            }),
        }
    }

    pub fn invariant_density(&self, x: &PointState) -> Result<f64> {
        self.check_dim(x)?;
        let density = self.density()?;
        Ok(density.eval(x.coords()[0]))
    }
}

/// Iterate an exact point `p` times.
pub fn iterate_exact(map: &MapSpec, x: &[Rational], p: usize) -> Result<Vec<Rational>> {
    let mut v = x.to_vec();
    for _ in 0..p {
        v = map.step_exact(&v)?;
    }
    Ok(v)
}

#[cfg(test)]
fn exact_to_f64(x: &[Rational]) -> Vec<f64> {
    use num_traits::ToPrimitive;
    x.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> PointState {
        PointState::scalar(x)
    }

    #[test]
    fn step_examples() {
        assert_eq!(MapSpec::Doubling.step(&s(0.4)).unwrap().coords()[0], 0.8);
        let cat = PointState::new(&[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let mut y = MapSpec::CatMap.step(&cat).unwrap();
        assert!(y.coords()[0].abs() < 1e-15);
        assert!((y.coords()[1] - 2.0 / 3.0).abs() < 1e-15);
        for _ in 0..3 {
            y = MapSpec::CatMap.step(&y).unwrap();
        }
        assert!((y.coords()[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((y.coords()[1] - 2.0 / 3.0).abs() < 1e-12);
        let m = MapSpec::MarkovThreeBranch.step(&s(0.5)).unwrap();
        assert!((m.coords()[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn step_rejects_dimension_mismatch() {
        assert!(matches!(MapSpec::CatMap.step(&s(0.2)), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(MapSpec::Doubling.derivative_magnitude(&s(0.123), 4).unwrap(), 16.0);
        assert_eq!(MapSpec::MarkovThreeBranch.derivative_magnitude(&s(0.5), 1).unwrap(), 2.0);
        assert!((MapSpec::Gauss.derivative_magnitude(&s(0.5), 1).unwrap() - 4.0).abs() < 1e-12);
        let cat = PointState::new(&[0.0, 0.0]).unwrap();
        let l = MapSpec::CatMap.derivative_magnitude(&cat, 2).unwrap();
        assert!((l - cat_lambda().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn derivative_flags_branch_points() {
        let err = MapSpec::MarkovThreeBranch.derivative_magnitude(&s(1.0 / 3.0), 1);
        assert!(matches!(err, Err(Error::BranchBoundary { .. })));
        // 0.5 -> 2/3 lands on the second breakpoint at iterate 1
        let err = MapSpec::MarkovThreeBranch.derivative_magnitude(&s(0.5), 2);
        assert!(matches!(err, Err(Error::BranchBoundary { iterate: 1, .. })));
        assert!(MapSpec::Gauss.derivative_magnitude(&s(0.0), 1).is_err());
    }

    #[test]
    fn density_examples() {
        assert_eq!(MapSpec::MarkovThreeBranch.invariant_density(&s(0.1)).unwrap(), 0.6);
        assert_eq!(MapSpec::MarkovThreeBranch.invariant_density(&s(0.5)).unwrap(), 1.2);
        assert_eq!(MapSpec::Doubling.invariant_density(&s(0.77)).unwrap(), 1.0);
        assert!((MapSpec::Gauss.invariant_density(&s(0.0)).unwrap() - 1.0 / LN_2).abs() < 1e-15);
        assert!(matches!(MapSpec::affine(2.5, 0.0).invariant_density(&s(0.3)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn markov_density_integrates_to_one() {
        let total: f64 = MARKOV_DENSITY.iter().map(|h| h / 3.0).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_periodic_points_close() {
        let four_fifths = s(0.8).to_exact().unwrap();
        assert_eq!(four_fifths[0], Rational::new(4, 5));
        let back = iterate_exact(&MapSpec::Doubling, &four_fifths, 4).unwrap();
        assert_eq!(back, four_fifths);
        let half = PointState::new(&[0.5, 0.5]).unwrap().to_exact().unwrap();
        assert_eq!(iterate_exact(&MapSpec::CatMap, &half, 3).unwrap(), half);
        assert_ne!(iterate_exact(&MapSpec::CatMap, &half, 1).unwrap(), half);
        assert!(s(1.0 / std::f64::consts::PI).to_exact().is_none());
    }

    #[test]
    fn float_and_exact_steps_agree() {
        let x = s(0.3);
        for map in [MapSpec::MarkovThreeBranch, MapSpec::Tripling, MapSpec::affine(2.0, 0.5), MapSpec::Gauss] {
            let f = map.step(&x).unwrap().coords()[0];
            let e = exact_to_f64(&map.step_exact(&x.to_exact().unwrap()).unwrap())[0];
            assert!((f - e).abs() < 1e-14, "{map:?}: {f} vs {e}");
        }
    }
}
