use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pmf::ModelPmf;
use crate::dynamics::TrajectoryConfig;
use crate::error::{Error, Result};
use crate::observables::{Exceedances, Scenario};

/// Number of windows containing exactly `k` visits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitHistogram {
    pub t: f64,
    pub window_length: usize,
    pub counts: Vec<u64>,
    pub n_windows: u64,
}

impl VisitHistogram {
    pub fn empty(t: f64, window_length: usize) -> Self {
        VisitHistogram { t, window_length, counts: Vec::new(), n_windows: 0 }
    }

    pub fn record(&mut self, visits: usize) {
        if self.counts.len() <= visits {
            self.counts.resize(visits + 1, 0);
        }
        self.counts[visits] += 1;
        self.n_windows += 1;
    }

    /// Combine partial histograms of the same window geometry.
    pub fn merge(&mut self, other: &VisitHistogram) -> Result<()> {
        if other.window_length != self.window_length {
            return Err(Error::DimensionMismatch { expected: self.window_length, got: other.window_length });
        }
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n_windows += other.n_windows;
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n_windows.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn mean(&self) -> f64 {
        self.frequencies().iter().enumerate().map(|(k, f)| k as f64 * f).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.frequencies().iter().enumerate().map(|(k, f)| (k as f64 - m).powi(2) * f).sum()
    }
}

/// `W = ⌊t/μ̂⌋`.
pub fn window_length(mu_hat: f64, t: f64) -> Result<usize> {
    if !(mu_hat > 0.0 && mu_hat <= 1.0) {
        return Err(Error::invalid("mu_hat", format!("{mu_hat} is outside (0, 1]")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "rescaled time must be positive"));
    }
    let w = (t / mu_hat).floor() as usize;
    if w == 0 {
        return Err(Error::invalid("t", "window would be empty"));
    }
    Ok(w)
}

/// Visit counts over `n_windows` consecutive disjoint windows of length `⌊t/μ̂⌋`.
pub fn visit_histogram<E: Exceedances + ?Sized>(
    flags: &E,
    mu_hat: f64,
    t: f64,
    n_windows: usize,
) -> Result<VisitHistogram> {
    let w = window_length(mu_hat, t)?;
    let needed = w * n_windows;
    if flags.len() < needed {
        return Err(Error::InsufficientData { needed, available: flags.len() });
    }
    let mut per_window = vec![0usize; n_windows];
    for &h in flags.hits().iter().take_while(|&&h| h < needed) {
        per_window[h / w] += 1;
    }
    let mut hist = VisitHistogram::empty(t, w);
    per_window.into_iter().for_each(|v| hist.record(v));
    Ok(hist)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Visit counts over `n_windows` independent restarts of `⌊t/μ̂⌋` steps each,
/// counting steps with `−log d ≥ u`.
pub fn visit_histogram_restarts(
    scenario: &Scenario,
    u: f64,
    mu_hat: f64,
    t: f64,
    n_windows: usize,
    cfg: &TrajectoryConfig,
) -> Result<VisitHistogram> {
    let w = window_length(mu_hat, t)?;
    let counts = (0..n_windows as u64)
        .into_par_iter()
        .map(|run| {
            let mut run_cfg = cfg.clone();
            run_cfg.n_points = w;
            run_cfg.seed = splitmix(cfg.seed ^ splitmix(run));
            Ok(scenario.hit_times(&run_cfg, u)?.hits.len())
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut hist = VisitHistogram::empty(t, w);
    counts.into_iter().for_each(|v| hist.record(v));
    Ok(hist)
}

/// Total variation between the empirical law and `model`, with the model's
/// mass beyond the largest observed count lumped into one tail cell.
pub fn tv_distance(hist: &VisitHistogram, model: &ModelPmf) -> Result<f64> {
    if hist.n_windows == 0 {
        return Err(Error::EmptyInput("histogram"));
    }
    let emp = hist.frequencies();
    let pmf = model.pmfs(emp.len().saturating_sub(1))?;
    let body: f64 = emp.iter().zip(&pmf).map(|(e, p)| (e - p).abs()).sum();
    let tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    Ok((0.5 * (body + tail)).min(1.0))
}
