//! Visit counts in rescaled windows and their limit laws.

mod histogram;
mod markov;
mod pmf;

pub use histogram::{tv_distance, visit_histogram, visit_histogram_restarts, window_length, VisitHistogram};
pub use markov::{markov_alpha, markov_cluster_law, pi_from_alpha, MARKOV_ALPHA_MAX_DEPTH};
pub use pmf::{compound_poisson_pmf, compound_poisson_pmfs, poisson_pmf, polya_aeppli_pmf, ClusterLaw, ModelPmf};
