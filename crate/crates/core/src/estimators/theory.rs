use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::dynamics::{cat_lambda, iterate_exact, Density, MapSpec, PointState, MARKOV_DENSITY, MARKOV_SLOPES};
use crate::error::{Error, Result};

const CLOSURE_TOL: f64 = 1e-12;

fn torus_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs();
            d.min(1.0 - d)
        })
        .fold(0.0, f64::max)
}

/// Distance between `T^j z` and `z`, exact when `z` has a rational representation.
fn return_gap(map: &MapSpec, z: &PointState, j: usize) -> Result<f64> {
    if let Some(exact) = z.to_exact() {
        if let Ok(back) = iterate_exact(map, &exact, j) {
            return Ok(if back == exact { 0.0 } else { f64::INFINITY });
        }
    }
    let mut x = z.clone();
    for _ in 0..j {
        x = map.step(&x)?;
    }
    Ok(torus_gap(x.coords(), z.coords()))
}

/// Verify that `p` is the minimal period of `z`.
pub fn check_period(map: &MapSpec, z: &PointState, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::invalid("p", "period must be at least 1"));
    }
    let gap = return_gap(map, z, p)?;
    if gap > CLOSURE_TOL {
        return Err(Error::NotPeriodic { period: p, error: gap });
    }
    if let Some(j) = (1..p).find(|&j| p.is_multiple_of(j) && return_gap(map, z, j).is_ok_and(|g| g <= CLOSURE_TOL)) {
        return Err(Error::invalid("p", format!("z already has period {j}")));
    }
    Ok(())
}

/// `∫_0^x √(1−t²) dt`.
fn circle_primitive(x: f64) -> f64 {
    let x = x.clamp(-1.0, 1.0);
    (x * (1.0 - x * x).sqrt() + x.asin()) / 2.0
}

/// Area of the unit disk intersected with the ellipse of semi-axes `a ≤ 1 ≤ b`.
pub fn disk_ellipse_overlap(a: f64, b: f64) -> f64 {
    if a >= 1.0 && b >= 1.0 {
        return PI;
    }
    if b <= 1.0 {
        return PI * a * b;
    }
    let xc = ((b * b - 1.0) / (b * b / (a * a) - 1.0)).sqrt();
    let quarter = circle_primitive(xc) + a * b * (PI / 4.0 - circle_primitive(xc / a));
    4.0 * quarter
}

/// Extremal index of a ball around a periodic point of minimal period `p`.
///
/// One-dimensional maps give `1 − 1/|DT^p(z)|`. For the cat map the ball's
/// `p`-th image is an ellipse with semi-axes `λ^{−p}`, `λ^p`, and the index is
/// one minus the fraction of the ball that returns.
pub fn theory_periodic_ei(map: &MapSpec, z: &PointState, p: usize) -> Result<f64> {
    check_period(map, z, p)?;
    if let MapSpec::CatMap = map {
        let l = cat_lambda().powi(p as i32);
        return Ok(1.0 - disk_ellipse_overlap(1.0 / l, l) / PI);
    }
    Ok(1.0 - 1.0 / map.derivative_magnitude(z, p)?)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = (a + b) / 2.0;
        let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f((a + b) / 2.0));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// `1 − ∫h^k/|DT|^{k−1} / ∫h^k` for the k-fold product observable.
pub fn theory_dei(map: &MapSpec, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("k", "product order must be at least 2"));
    }
    let e = (k - 1) as i32;
    match (map, map.density()?) {
        (MapSpec::MarkovThreeBranch, _) => {
            let num: f64 = MARKOV_DENSITY.iter().zip(MARKOV_SLOPES).map(|(h, s)| h.powi(k as i32) / s.powi(e)).sum();
            let den: f64 = MARKOV_DENSITY.iter().map(|h| h.powi(k as i32)).sum();
            Ok(1.0 - num / den)
        }
        (MapSpec::CatMap, _) => Err(Error::Unsupported("product index is defined for one-dimensional maps".into())),
        (_, Density::Uniform) => {
            let (slope, _) =
                map.integer_affine().ok_or_else(|| Error::Unsupported(format!("no slope data for {}", map.name())))?;
            Ok(1.0 - (slope.unsigned_abs() as f64).powi(e).recip())
        }
        (_, Density::Gauss) => {
            let h = |x: f64| Density::Gauss.eval(x).powi(k as i32);
            let num = simpson(&|x| h(x) * x.powi(2 * e), 0.0, 1.0, 1e-13, 40);
            let den = simpson(&h, 0.0, 1.0, 1e-13, 40);
            Ok(1.0 - num / den)
        }
        (_, Density::PiecewiseConstant { .. }) => Err(Error::Unsupported(format!("no slope table for {}", map.name()))),
    }
}

/// Product index when each coordinate independently picks one of two maps
/// with weights `(p, 1 − p)`: `1 − q0·(p^k + (1−p)^k)`.
pub fn theory_dei_bernoulli(q0_unperturbed: f64, weights: (f64, f64), k: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&q0_unperturbed) {
        return Err(Error::invalid("q0", "must lie in [0, 1]"));
    }
    let (p, r) = weights;
    if !(0.0..=1.0).contains(&p) || (p + r - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("weights", "expected a probability pair"));
    }
    let k = k as i32;
    Ok(1.0 - q0_unperturbed * (p.powi(k) + r.powi(k)))
}

/// Offset `b` of the second map in the pair `{2x, 2x + b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseOffset {
    Rational(Ratio<i64>),
    Irrational(f64),
}

impl NoiseOffset {
    /// Classify a float: rational if it matches a fraction with denominator ≤ 10^6.
    pub fn from_f64(b: f64) -> Self {
        match crate::dynamics::rational_of(b) {
            Some(r) => NoiseOffset::Rational(Ratio::new(*r.numer() as i64, *r.denom() as i64)),
            None => NoiseOffset::Irrational(b),
        }
    }

    fn value(&self) -> f64 {
        match *self {
            NoiseOffset::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            NoiseOffset::Irrational(b) => b,
        }
    }
}

/// `q_k` at the target 0 for `{2x, 2x + b}` chosen with equal weights.
pub fn theory_discrete_noise_qk(b: NoiseOffset, k: usize) -> Result<f64> {
    let v = b.value();
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::invalid("b", "offset must lie in (0, 1)"));
    }
    if k == 0 {
        return Ok(0.25);
    }
    match b {
        NoiseOffset::Irrational(_) => Ok(0.0),
        NoiseOffset::Rational(r) if r == Ratio::new(1, 2) => Ok(0.25f64.powi(k as i32 + 1)),
        NoiseOffset::Rational(r) => {
            Err(Error::Unsupported(format!("q_{k} is not available in closed form for b = {r}")))
        }
    }
}
