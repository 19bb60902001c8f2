//! Extremal-index estimators and closed-form reference values.

mod empirical;
mod ensemble;
mod theory;

pub use empirical::{
    estimate, q_hat, q_spectrum, suveges, theta_from_qk, theta_order_m, Method, QkSpectrum, DEFAULT_ORDER,
};
#[cfg(test)]
pub(crate) use empirical::{q_hat_raw, theta_order_m_raw};
pub use ensemble::{ensemble_estimate, ensemble_estimates, mean_std, per_replica, EIEstimate};
pub use theory::{
    check_period, disk_ellipse_overlap, theory_dei, theory_dei_bernoulli, theory_discrete_noise_qk, theory_periodic_ei,
    NoiseOffset,
};
