use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::Exceedances;

/// Default order for `θ̂_m`.
pub const DEFAULT_ORDER: usize = 5;

/// Extremal-index estimator choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "method", content = "m", rename_all = "snake_case")]
pub enum Method {
    Suveges,
    OrderM(usize),
    FromQk(usize),
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Suveges => "suveges".into(),
            Method::OrderM(m) => format!("order_m({m})"),
            Method::FromQk(m) => format!("from_qk({m})"),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

/// `q̂_0, …, q̂_{m−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QkSpectrum {
    pub q: Vec<f64>,
}

impl QkSpectrum {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if let Some(bad) = q.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid("q", format!("{bad} is outside [0, 1]")));
        }
        Ok(QkSpectrum { q })
    }

    pub fn order(&self) -> usize {
        self.q.len()
    }
}

fn clip(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn base<E: Exceedances + ?Sized>(s: &E, lag: usize) -> Result<(usize, &[usize])> {
    let n = s.len();
    let hits = s.hits();
    if hits.is_empty() {
        return Err(Error::NoExceedances);
    }
    if n <= lag + 1 {
        return Err(Error::InsufficientData { needed: lag + 2, available: n });
    }
    Ok((n, hits))
}

/// Unclipped `θ̂_m`.
pub(crate) fn theta_order_m_raw<E: Exceedances + ?Sized>(s: &E, m: usize) -> Result<f64> {
    let (n, hits) = base(s, m)?;
    let last = n - 1 - m;
    let count = hits
        .iter()
        .enumerate()
        .take_while(|(_, &i)| i <= last)
        .filter(|&(k, &i)| hits.get(k + 1).is_none_or(|&next| next > i + m))
        .count();
    Ok((count as f64 / (n - m) as f64) / (hits.len() as f64 / n as f64))
}

/// Unclipped `q̂_j`.
pub(crate) fn q_hat_raw<E: Exceedances + ?Sized>(s: &E, j: usize) -> Result<f64> {
    let (n, hits) = base(s, j)?;
    let last = n - 2 - j;
    let count = hits.windows(2).take_while(|w| w[0] <= last).filter(|w| w[1] == w[0] + j + 1).count();
    Ok((count as f64 / (n - 1 - j) as f64) / (hits.len() as f64 / n as f64))
}

/// Order-m estimator: probability that an exceedance is followed by `m`
/// non-exceedances, relative to the exceedance rate.
pub fn theta_order_m<E: Exceedances + ?Sized>(s: &E, m: usize) -> Result<f64> {
    theta_order_m_raw(s, m).map(clip)
}

/// Probability of a first return to the set exactly `j + 1` steps after an exceedance.
pub fn q_hat<E: Exceedances + ?Sized>(s: &E, j: usize) -> Result<f64> {
    q_hat_raw(s, j).map(clip)
}

pub fn q_spectrum<E: Exceedances + ?Sized>(s: &E, m: usize) -> Result<QkSpectrum> {
    let q = (0..m).map(|j| q_hat(s, j)).collect::<Result<Vec<_>>>()?;
    Ok(QkSpectrum { q })
}

/// `1 − Σ q̂_j`, clipped to `[0, 1]`.
pub fn theta_from_qk(q: &QkSpectrum) -> f64 {
    clip(1.0 - q.q.iter().sum::<f64>())
}

/// Süveges' maximum-likelihood estimator from interexceedance times.
pub fn suveges<E: Exceedances + ?Sized>(s: &E) -> Result<f64> {
    let hits = s.hits();
    if hits.is_empty() {
        return Err(Error::NoExceedances);
    }
    let gaps = hits.windows(2).map(|w| (w[1] - w[0] - 1) as f64);
    let (n_times, n_clusters, total) =
        gaps.fold((0.0, 0.0, 0.0), |(n, c, t), g| (n + 1.0, c + f64::from(u8::from(g > 0.0)), t + g));
    let a = (1.0 - s.quantile()) * total;
    if a <= 0.0 {
        return Ok(1.0);
    }
    let b = a + n_times + n_clusters;
    let disc = (b * b - 8.0 * n_clusters * a).max(0.0);
    Ok(clip((b - disc.sqrt()) / (2.0 * a)))
}

/// Evaluate `method` on one exceedance record.
pub fn estimate<E: Exceedances + ?Sized>(s: &E, method: Method) -> Result<f64> {
    match method {
        Method::Suveges => suveges(s),
        Method::OrderM(m) => theta_order_m(s, m),
        Method::FromQk(m) => q_spectrum(s, m).map(|q| theta_from_qk(&q)),
    }
}
