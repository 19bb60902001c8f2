use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::lift::{cat_step, from_fixed, signed_fixed, to_fixed, BitPool, LiftMap};
use super::map::{wrap_unit, MapSpec, PointState};
use crate::error::{Error, Result};
use crate::rng::{stream, Channel, StreamRng};

/// Randomness applied to the dynamics at every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationScheme {
    None,
    /// `x ↦ T(x) + ξ`, `ξ ~ U[−ε, ε]`.
    AdditiveUniform {
        epsilon: f64,
    },
    /// Each step applies `maps[i]` with probability `weights[i]`.
    IidSelection {
        maps: Vec<MapSpec>,
        weights: Vec<f64>,
    },
    /// `x ↦ T(x) + ω`, then `ω ← ω + α`.
    QuenchedRotation {
        alpha: f64,
        omega0: f64,
    },
    /// Like `IidSelection`, with the weight vector redrawn uniformly on the
    /// simplex every `period` steps.
    Sequential {
        maps: Vec<MapSpec>,
        period: usize,
        #[serde(default)]
        weight_seed: Option<u64>,
    },
    /// Unperturbed dynamics observed with `U[−ε, ε]` error on every emitted point.
    Observational {
        epsilon: f64,
    },
}

impl PerturbationScheme {
    pub fn validate(&self) -> Result<()> {
        match self {
            PerturbationScheme::None => Ok(()),
            PerturbationScheme::AdditiveUniform { epsilon } | PerturbationScheme::Observational { epsilon } => {
                check_epsilon(*epsilon)
            }
            PerturbationScheme::IidSelection { maps, weights } => {
                if maps.is_empty() {
                    return Err(Error::EmptyInput("map list"));
                }
                if maps.len() != weights.len() {
                    return Err(Error::DimensionMismatch { expected: maps.len(), got: weights.len() });
                }
                check_weights(weights)
            }
            PerturbationScheme::QuenchedRotation { alpha, omega0 } => {
                if !alpha.is_finite() || !omega0.is_finite() {
                    return Err(Error::invalid("alpha", "rotation parameters must be finite"));
                }
                Ok(())
            }
            PerturbationScheme::Sequential { maps, period, .. } => {
                if maps.is_empty() {
                    return Err(Error::EmptyInput("map list"));
                }
                if *period == 0 {
                    return Err(Error::invalid("period", "resample period must be at least 1"));
                }
                Ok(())
            }
        }
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::invalid("epsilon", format!("{eps} is outside [0, 0.5)")));
    }
    Ok(())
}

pub(crate) fn check_weights(w: &[f64]) -> Result<()> {
    if w.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
        return Err(Error::invalid("weights", "weights must be nonnegative"));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("weights", format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Starting point policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    Uniform,
    Fixed(PointState),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub n_points: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub initial: InitialState,
    /// Index selecting an independent random stream for the same seed.
    pub replica: u64,
}

impl TrajectoryConfig {
    pub const DEFAULT_BURN_IN: usize = 1000;

    pub fn new(n_points: usize, seed: u64) -> Self {
        TrajectoryConfig { n_points, burn_in: Self::DEFAULT_BURN_IN, seed, initial: InitialState::Uniform, replica: 0 }
    }

    pub fn with_replica(mut self, replica: u64) -> Self {
        self.replica = replica;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn starting_at(mut self, x: PointState) -> Self {
        self.initial = InitialState::Fixed(x);
        self
    }
}

/// How the noise of a product system is shared among its components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseCoupling {
    /// Every component draws its own map index and noise.
    #[default]
    Independent,
    /// All components use one draw per step.
    Shared,
}

/// Uniform sample on the `(m−1)`-simplex by normalized exponentials.
pub fn sample_simplex_weights<R: RngCore>(m: usize, rng: &mut R) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("m", "need at least one component"));
    }
    let mut w: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

fn cumulative(w: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut c: Vec<f64> = w
        .iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = c.last_mut() {
        *last = f64::INFINITY;
    }
    c
}

#[derive(Debug, Clone)]
enum Engine {
    Lift { maps: Vec<LiftMap>, state: SmallVec<[u64; 4]> },
    Torus { state: SmallVec<[[u64; 2]; 2]> },
    Float { maps: Vec<MapSpec>, state: SmallVec<[f64; 4]> },
}

#[derive(Debug, Clone)]
enum Chooser {
    Single,
    Iid { cumulative: Vec<f64> },
    Sequential { cumulative: Vec<f64>, period: usize, elapsed: usize, weight_rng: StreamRng },
}

#[derive(Debug, Clone, Copy)]
enum Noise {
    None,
    Additive(f64),
    Observational(f64),
}

/// Seeded trajectory of a (possibly perturbed, possibly k-fold product) system.
#[derive(Debug, Clone)]
pub struct Orbit {
    engine: Engine,
    chooser: Chooser,
    noise: Noise,
    drive: Option<(u64, u64)>,
    coupling: NoiseCoupling,
    components: usize,
    component_dim: usize,
    rng: StreamRng,
    bits: BitPool,
    remaining: usize,
    started: bool,
    buf: SmallVec<[f64; 8]>,
}

/// Build the orbit of `map` under `scheme`.
pub fn orbit(map: &MapSpec, scheme: &PerturbationScheme, cfg: &TrajectoryConfig) -> Result<Orbit> {
    Orbit::build(map, scheme, cfg, 1, NoiseCoupling::Independent)
}

/// Build the orbit of the k-fold direct product of `map`.
pub fn product_orbit(
    map: &MapSpec,
    scheme: &PerturbationScheme,
    cfg: &TrajectoryConfig,
    k: usize,
    coupling: NoiseCoupling,
) -> Result<ProductOrbit> {
    if k == 0 {
        return Err(Error::invalid("k", "product order must be at least 1"));
    }
    Ok(ProductOrbit(Orbit::build(map, scheme, cfg, k, coupling)?))
}

impl Orbit {
    fn build(
        map: &MapSpec,
        scheme: &PerturbationScheme,
        cfg: &TrajectoryConfig,
        components: usize,
        coupling: NoiseCoupling,
    ) -> Result<Self> {
        if cfg.n_points == 0 {
            return Err(Error::invalid("n_points", "trajectory needs at least one point"));
        }
        scheme.validate()?;
        let dim = map.dimension();
        let maps: Vec<MapSpec> = match scheme {
            PerturbationScheme::IidSelection { maps, .. } | PerturbationScheme::Sequential { maps, .. } => maps.clone(),
            _ => vec![map.clone()],
        };
        if let Some(bad) = maps.iter().find(|m| m.dimension() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.dimension() });
        }

        let mut weight_rng = stream(
            match scheme {
                PerturbationScheme::Sequential { weight_seed: Some(s), .. } => *s,
                _ => cfg.seed,
            },
            Channel::Auxiliary,
            cfg.replica,
        );
        let chooser = match scheme {
            PerturbationScheme::IidSelection { weights, .. } if weights.len() > 1 => {
                Chooser::Iid { cumulative: cumulative(weights) }
            }
            PerturbationScheme::Sequential { maps, period, .. } if maps.len() > 1 => {
                let w = sample_simplex_weights(maps.len(), &mut weight_rng)?;
                Chooser::Sequential { cumulative: cumulative(&w), period: *period, elapsed: 0, weight_rng }
            }
            _ => Chooser::Single,
        };
        let noise = match *scheme {
            PerturbationScheme::AdditiveUniform { epsilon } if epsilon > 0.0 => Noise::Additive(epsilon),
            PerturbationScheme::Observational { epsilon } if epsilon > 0.0 => Noise::Observational(epsilon),
            _ => Noise::None,
        };
        let drive = match *scheme {
            PerturbationScheme::QuenchedRotation { alpha, omega0 } => Some((to_fixed(omega0), to_fixed(alpha))),
            _ => None,
        };

        let mut init_rng = stream(cfg.seed, Channel::Initial, cfg.replica);
        let start: Vec<f64> = match &cfg.initial {
            InitialState::Uniform => Vec::new(),
            InitialState::Fixed(p) => {
                let expected = dim * components;
                if p.dim() == dim {
                    p.coords().repeat(components)
                } else if p.dim() == expected {
                    p.coords().to_vec()
                } else {
                    return Err(Error::DimensionMismatch { expected, got: p.dim() });
                }
            }
        };
        let fixed = |i: usize, rng: &mut StreamRng| -> u64 {
            if start.is_empty() {
                rng.next_u64()
            } else {
                to_fixed(start[i])
            }
        };

        let is_cat = maps.iter().any(|m| matches!(m, MapSpec::CatMap));
        let lifts: Option<Vec<LiftMap>> = maps.iter().map(LiftMap::from_spec).collect();
        let engine = if is_cat {
            if maps.iter().any(|m| !matches!(m, MapSpec::CatMap)) || drive.is_some() {
                return Err(Error::Unsupported(
                    "cat map supports only unperturbed, additive or observational schemes".into(),
                ));
            }
            Engine::Torus {
                state: (0..components)
                    .map(|c| [fixed(2 * c, &mut init_rng), fixed(2 * c + 1, &mut init_rng)])
                    .collect(),
            }
        } else if let Some(lifts) = lifts {
            Engine::Lift { maps: lifts, state: (0..components).map(|c| fixed(c, &mut init_rng)).collect() }
        } else {
            Engine::Float {
                maps,
                state: (0..components)
                    .map(|c| if start.is_empty() { init_rng.random::<f64>() } else { start[c] })
                    .collect(),
            }
        };

        let mut orbit = Orbit {
            engine,
            chooser,
            noise,
            drive,
            coupling,
            components,
            component_dim: dim,
            rng: stream(cfg.seed, Channel::Dynamics, cfg.replica),
            bits: BitPool::default(),
            remaining: cfg.n_points,
            started: false,
            buf: SmallVec::new(),
        };
        for _ in 0..cfg.burn_in {
            orbit.advance(None);
        }
        Ok(orbit)
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn component_dim(&self) -> usize {
        self.component_dim
    }

    /// Points still to be emitted.
    pub fn remaining(&self) -> usize {
        self.remaining
    }

    fn n_maps(&self) -> usize {
        match &self.engine {
            Engine::Lift { maps, .. } => maps.len(),
            Engine::Float { maps, .. } => maps.len(),
            Engine::Torus { .. } => 1,
        }
    }

    #[inline]
    fn choose(&mut self) -> usize {
        let cum = match &self.chooser {
            Chooser::Single => return 0,
            Chooser::Iid { cumulative } | Chooser::Sequential { cumulative, .. } => cumulative,
        };
        if cum.len() == 2 && cum[0] == 0.5 {
            return self.bits.digit(&mut self.rng, 2) as usize;
        }
        let u: f64 = self.rng.random();
        cum.partition_point(|&c| c <= u)
    }

    #[inline]
    fn draw_noise(&mut self) -> f64 {
        match self.noise {
            Noise::Additive(e) => (2.0 * self.rng.random::<f64>() - 1.0) * e,
            _ => 0.0,
        }
    }

    /// One step of every component; `script` forces the map indices.
    fn advance(&mut self, script: Option<&[usize]>) {
        let shift = self.drive.map_or(0, |(omega, _)| omega);
        let shared = self.coupling == NoiseCoupling::Shared;
        let dim = self.component_dim;
        let mut idx = 0;
        let mut xi = [0.0; 2];
        if shared {
            if script.is_none() {
                idx = self.choose();
            }
            for v in xi.iter_mut().take(dim) {
                *v = self.draw_noise();
            }
        }
        let mut pre: SmallVec<[(u64, usize, f64); 4]> = SmallVec::new();
        for c in 0..self.components {
            if let Some(s) = script {
                idx = s[c.min(s.len() - 1)];
            } else if !shared {
                idx = self.choose();
            }
            if !shared {
                for v in xi.iter_mut().take(dim) {
                    *v = self.draw_noise();
                }
            }
            match &mut self.engine {
                Engine::Lift { maps, state } => {
                    // coincident components share their hidden digits
                    let twin = (0..c).find(|&j| pre[j] == (state[c], idx, xi[0]));
                    pre.push((state[c], idx, xi[0]));
                    state[c] = match twin {
                        Some(j) => state[j],
                        None => {
                            let n = maps[idx].apply(state[c], &mut self.rng, &mut self.bits);
                            n.wrapping_add(shift).wrapping_add(signed_fixed(xi[0]) as u64)
                        }
                    };
                }
                Engine::Torus { state } => {
                    let [a, b] = cat_step(state[c]);
                    state[c] = [a.wrapping_add(signed_fixed(xi[0]) as u64), b.wrapping_add(signed_fixed(xi[1]) as u64)];
                }
                Engine::Float { maps, state } => {
                    let y = maps[idx].step_scalar(state[c]);
                    state[c] = wrap_unit(y + from_fixed(shift) + xi[0]);
                }
            }
        }
        if let Some((omega, alpha)) = &mut self.drive {
            *omega = omega.wrapping_add(*alpha);
        }
        if let Chooser::Sequential { cumulative: cum, period, elapsed, weight_rng } = &mut self.chooser {
            *elapsed += 1;
            if *elapsed == *period {
                *elapsed = 0;
                let w = sample_simplex_weights(cum.len(), weight_rng).expect("nonempty map list");
                *cum = cumulative(&w);
            }
        }
    }

    fn fill_buf(&mut self) {
        self.buf.clear();
        match &self.engine {
            Engine::Lift { state, .. } => self.buf.extend(state.iter().map(|&n| from_fixed(n))),
            Engine::Torus { state } => self.buf.extend(state.iter().flat_map(|p| [from_fixed(p[0]), from_fixed(p[1])])),
            Engine::Float { state, .. } => self.buf.extend_from_slice(state),
        }
        if let Noise::Observational(e) = self.noise {
            for i in 0..self.buf.len() {
                let xi = (2.0 * self.rng.random::<f64>() - 1.0) * e;
                self.buf[i] = wrap_unit(self.buf[i] + xi);
            }
        }
    }

    /// Next emitted point as a borrowed coordinate slice.
    #[inline]
    pub fn next_coords(&mut self) -> Option<&[f64]> {
        if self.remaining == 0 {
            return None;
        }
        if self.started {
            self.advance(None);
        }
        self.started = true;
        self.remaining -= 1;
        self.fill_buf();
        Some(&self.buf)
    }

    /// Step with the map indices given by `choices` (one per component, or one
    /// shared by all) instead of drawing them, and return the new point.
    pub fn advance_with(&mut self, choices: &[usize]) -> Result<PointState> {
        if choices.is_empty() || choices.iter().any(|&i| i >= self.n_maps()) {
            return Err(Error::invalid("choices", "map index out of range"));
        }
        if !self.started {
            self.started = true;
            self.remaining = self.remaining.saturating_sub(1);
        }
        self.advance(Some(choices));
        self.fill_buf();
        Ok(PointState(self.buf.iter().copied().collect()))
    }
}

impl Iterator for Orbit {
    type Item = PointState;

    fn next(&mut self) -> Option<PointState> {
        self.next_coords().map(|c| PointState(c.iter().copied().collect()))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for Orbit {}

/// Point of a k-fold product system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    coords: SmallVec<[f64; 8]>,
    dim: usize,
}

impl ProductState {
    pub fn new(components: &[PointState]) -> Result<Self> {
        let dim = components.first().ok_or(Error::EmptyInput("product components"))?.dim();
        if let Some(bad) = components.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
        }
        Ok(ProductState { coords: components.iter().flat_map(|p| p.coords().iter().copied()).collect(), dim })
    }

    pub fn from_flat(coords: &[f64], dim: usize) -> Self {
        ProductState { coords: SmallVec::from_slice(coords), dim }
    }

    pub fn k(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn component_dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn flat(&self) -> &[f64] {
        &self.coords
    }
}

/// Orbit of a product system, yielding [`ProductState`]s.
#[derive(Debug, Clone)]
pub struct ProductOrbit(pub(crate) Orbit);

impl ProductOrbit {
    pub fn k(&self) -> usize {
        self.0.components
    }

    pub fn inner(&mut self) -> &mut Orbit {
        &mut self.0
    }
}

impl Iterator for ProductOrbit {
    type Item = ProductState;

    fn next(&mut self) -> Option<ProductState> {
        let dim = self.0.component_dim;
        self.0.next_coords().map(|c| ProductState::from_flat(c, dim))
    }
}
