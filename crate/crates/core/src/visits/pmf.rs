use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("{t} must be positive")));
    }
    Ok(())
}

fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// `t^k e^{−t} / k!`.
pub fn poisson_pmf(t: f64, k: u64) -> Result<f64> {
    check_t(t)?;
    Ok((k as f64 * t.ln() - t - ln_factorial(k)).exp())
}

/// Compound Poisson law with geometric cluster sizes of mean `1/θ` and mean `t`.
pub fn polya_aeppli_pmf(t: f64, theta: f64, k: u64) -> Result<f64> {
    check_t(t)?;
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::invalid("theta", format!("{theta} is outside (0, 1]")));
    }
    let rate = theta * t;
    if k == 0 {
        return Ok((-rate).exp());
    }
    let ln_rest = (1.0 - theta).ln();
    let terms: Vec<f64> = (1..=k)
        .filter(|&j| j == k || theta < 1.0)
        .map(|j| {
            let gap = (k - j) as f64;
            let ln_binom = ln_factorial(k - 1) - ln_factorial(j - 1) - ln_factorial(k - j);
            let rest = if gap == 0.0 { 0.0 } else { gap * ln_rest };
            rest + j as f64 * theta.ln() + j as f64 * rate.ln() - ln_factorial(j) + ln_binom
        })
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|v| (v - top).exp()).sum();
    Ok((top + sum.ln() - rate).exp())
}

/// Cluster-size law `π_1, …, π_L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLaw {
    pub pi: Vec<f64>,
}

impl ClusterLaw {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.is_empty() {
            return Err(Error::DegenerateClusterLaw("empty cluster law".into()));
        }
        if pi.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::DegenerateClusterLaw("negative or non-finite cluster probability".into()));
        }
        let total: f64 = pi.iter().sum();
        if total <= 0.0 || total > 1.0 + 1e-9 {
            return Err(Error::DegenerateClusterLaw(format!("cluster probabilities sum to {total}")));
        }
        Ok(ClusterLaw { pi })
    }

    /// `π_l = θ(1−θ)^{l−1}`, truncated once the tail falls below 1e-15.
    pub fn geometric(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::invalid("theta", format!("{theta} is outside (0, 1]")));
        }
        let mut pi = vec![theta];
        while (1.0 - theta).powi(pi.len() as i32) > 1e-15 {
            pi.push(theta * (1.0 - theta).powi(pi.len() as i32));
        }
        ClusterLaw::new(pi)
    }

    pub fn max_size(&self) -> usize {
        self.pi.len()
    }

    /// Missing mass beyond `max_size`.
    pub fn deficit(&self) -> f64 {
        (1.0 - self.pi.iter().sum::<f64>()).max(0.0)
    }

    /// `Σ l·π_l`.
    pub fn mean(&self) -> f64 {
        self.pi.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum()
    }
}

/// Panjer recursion for a compound Poisson law whose mean is `t`.
///
/// Clusters arrive at rate `t / E[L]` with sizes drawn from the normalized `π`.
pub fn compound_poisson_pmfs(t: f64, law: &ClusterLaw, k_max: usize) -> Result<Vec<f64>> {
    check_t(t)?;
    let total: f64 = law.pi.iter().sum();
    let pi: Vec<f64> = law.pi.iter().map(|p| p / total).collect();
    let mean: f64 = pi.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
    let rate = t / mean;
    let mut f = Vec::with_capacity(k_max + 1);
    f.push((-rate).exp());
    for k in 1..=k_max {
        let acc: f64 = (1..=k.min(pi.len())).map(|j| j as f64 * pi[j - 1] * f[k - j]).sum();
        f.push(rate / k as f64 * acc);
    }
    Ok(f)
}

pub fn compound_poisson_pmf(t: f64, law: &ClusterLaw, k: u64) -> Result<f64> {
    Ok(compound_poisson_pmfs(t, law, k as usize)?[k as usize])
}

/// Candidate limit laws for the visit count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelPmf {
    Poisson { t: f64 },
    PolyaAeppli { t: f64, theta: f64 },
    CompoundPoisson { t: f64, law: ClusterLaw },
}

impl ModelPmf {
    pub fn label(&self) -> String {
        match self {
            ModelPmf::Poisson { t } => format!("poisson({t})"),
            ModelPmf::PolyaAeppli { t, theta } => format!("polya_aeppli({t}, {theta:.4})"),
            ModelPmf::CompoundPoisson { t, .. } => format!("compound_poisson({t})"),
        }
    }

    /// `P(N = k)` for `k = 0..=k_max`.
    pub fn pmfs(&self, k_max: usize) -> Result<Vec<f64>> {
        match self {
            ModelPmf::Poisson { t } => (0..=k_max as u64).map(|k| poisson_pmf(*t, k)).collect(),
            ModelPmf::PolyaAeppli { t, theta } => (0..=k_max as u64).map(|k| polya_aeppli_pmf(*t, *theta, k)).collect(),
            ModelPmf::CompoundPoisson { t, law } => compound_poisson_pmfs(*t, law, k_max),
        }
    }

    pub fn pmf(&self, k: u64) -> Result<f64> {
        match self {
            ModelPmf::Poisson { t } => poisson_pmf(*t, k),
            ModelPmf::PolyaAeppli { t, theta } => polya_aeppli_pmf(*t, *theta, k),
            ModelPmf::CompoundPoisson { t, law } => compound_poisson_pmf(*t, law, k),
        }
    }
}
