//! Extremal-index estimation and visit statistics for deterministic and
//! randomly perturbed chaotic maps.

pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod observables;
pub mod rng;
pub mod visits;

pub use error::{Error, Result};
