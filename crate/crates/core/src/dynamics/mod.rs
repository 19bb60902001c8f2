//! Phase spaces, base maps, perturbation schemes and seeded trajectories.

mod lift;
mod map;
mod orbit;

pub use lift::{from_fixed, to_fixed};
pub(crate) use map::rational_of;
pub use map::{
    cat_lambda, iterate_exact, wrap_unit, Density, MapSpec, PointState, Rational, MARKOV_DENSITY, MARKOV_SLOPES,
};
pub(crate) use orbit::check_weights;
pub use orbit::{
    orbit, product_orbit, sample_simplex_weights, InitialState, NoiseCoupling, Orbit, PerturbationScheme, ProductOrbit,
    ProductState, TrajectoryConfig,
};
