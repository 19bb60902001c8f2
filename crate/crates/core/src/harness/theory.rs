//! Closed-form reference values derived from a scenario's structure.

use crate::dynamics::{MapSpec, NoiseCoupling, PerturbationScheme};
use crate::estimators::{
    check_period, theory_dei, theory_dei_bernoulli, theory_discrete_noise_qk, theory_periodic_ei, Method, NoiseOffset,
};
use crate::observables::{Scenario, TargetSpec};

use super::spec::{Quantity, Reference};

/// Longest period searched for when the target is a fixed point.
pub const MAX_PERIOD: usize = 16;

/// Terms kept for spectra with infinitely many nonzero `q_k`.
const SPECTRUM_TERMS: usize = 64;

/// Limiting `q_0, q_1, …` (zero beyond the end).
#[derive(Debug, Clone, PartialEq)]
pub struct QkProfile {
    pub q: Vec<f64>,
}

impl QkProfile {
    fn single(lag: usize, value: f64) -> Self {
        let mut q = vec![0.0; lag + 1];
        q[lag] = value;
        QkProfile { q }
    }

    pub fn q(&self, j: usize) -> f64 {
        self.q.get(j).copied().unwrap_or(0.0)
    }

    pub fn theta(&self) -> f64 {
        1.0 - self.q.iter().sum::<f64>()
    }

    /// Limit of `θ̂_m`: `1 − Σ_{j<m} q_j`.
    pub fn theta_order(&self, m: usize) -> f64 {
        1.0 - self.q.iter().take(m).sum::<f64>()
    }

    /// Only `q_0` may be nonzero, so interexceedance-based estimators apply.
    pub fn first_lag_only(&self) -> bool {
        self.q.iter().skip(1).all(|&v| v == 0.0)
    }

    pub fn value(&self, quantity: Quantity) -> Option<f64> {
        match quantity {
            Quantity::Qk(j) => Some(self.q(j)),
            Quantity::Theta(Method::OrderM(m) | Method::FromQk(m)) => Some(self.theta_order(m)),
            Quantity::Theta(Method::Suveges) => self.first_lag_only().then(|| self.theta()),
        }
    }
}

/// Minimal period of a fixed target under the unperturbed map, if short.
pub fn minimal_period(map: &MapSpec, target: &TargetSpec) -> Option<usize> {
    let TargetSpec::Fixed { z } = target else { return None };
    (1..=MAX_PERIOD).find(|&p| check_period(map, z, p).is_ok())
}

fn zero_target(target: &TargetSpec) -> bool {
    matches!(target, TargetSpec::Fixed { z } if z.dim() == 1 && z.coords()[0] == 0.0)
}

/// The `q_k` profile of `scenario` when a closed form is known.
pub fn profile(scenario: &Scenario) -> Option<QkProfile> {
    let Scenario { map, scheme, target, coupling, .. } = scenario;
    match (scheme, target) {
        (PerturbationScheme::None, TargetSpec::Fixed { z }) => {
            let p = minimal_period(map, target)?;
            let theta = theory_periodic_ei(map, z, p).ok()?;
            Some(QkProfile::single(p - 1, 1.0 - theta))
        }
        (PerturbationScheme::None, TargetSpec::Diagonal { k }) => {
            theory_dei(map, *k).ok().map(|t| QkProfile::single(0, 1.0 - t))
        }
        (PerturbationScheme::IidSelection { maps, weights }, _) if maps.len() == 2 => {
            let (s0, b0) = maps[0].integer_affine()?;
            let (s1, b1) = maps[1].integer_affine()?;
            let w = (weights[0], weights[1]);
            match target {
                TargetSpec::Diagonal { k } if s0 == s1 && *coupling == NoiseCoupling::Independent => {
                    let q0 = 1.0 - theory_dei(&maps[0], *k).ok()?;
                    let theta = if b0 == b1 { 1.0 - q0 } else { theory_dei_bernoulli(q0, w, *k).ok()? };
                    Some(QkProfile::single(0, 1.0 - theta))
                }
                _ if zero_target(target) && b0 == 0.0 && b1 != 0.0 => match NoiseOffset::from_f64(b1.rem_euclid(1.0)) {
                    NoiseOffset::Irrational(_) => Some(QkProfile::single(0, w.0 / s0 as f64)),
                    half @ NoiseOffset::Rational(_) if s0 == 2 && s1 == 2 && w == (0.5, 0.5) => {
                        let q = (0..SPECTRUM_TERMS)
                            .map(|k| theory_discrete_noise_qk(half, k))
                            .collect::<crate::Result<Vec<f64>>>()
                            .ok()?;
                        Some(QkProfile { q })
                    }
                    NoiseOffset::Rational(_) => None,
                },
                _ => None,
            }
        }
        _ => None,
    }
}

/// Resolve a check's reference against `scenario`.
pub fn reference_value(scenario: &Scenario, quantity: Quantity, reference: Reference) -> Option<f64> {
    match reference {
        Reference::Value(v) => Some(v),
        Reference::None => None,
        Reference::Auto => profile(scenario)?.value(quantity),
    }
}
