use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value assigned to exact hits, where `−log d` would be infinite.
pub const DEFAULT_CAP: f64 = 745.0;

/// `−log d`, clipped to `cap`.
#[inline]
pub fn potential(d: f64, cap: f64) -> f64 {
    if d > 0.0 {
        (-d.ln()).min(cap)
    } else {
        cap
    }
}

/// Nearest-rank quantile: the order statistic at 0-based index `⌊p·n⌋`.
pub fn empirical_quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("values"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", format!("quantile level {p} is outside (0, 1)")));
    }
    let n = values.len();
    let idx = ((p * n as f64 + 1e-9).floor() as usize).min(n - 1);
    let mut work = values.to_vec();
    let (_, v, _) = work.select_nth_unstable_by(idx, f64::total_cmp);
    Ok(*v)
}

/// Exceedance structure shared by dense and sparse series.
pub trait Exceedances {
    /// Length of the underlying series.
    fn len(&self) -> usize;
    /// Sorted indices `i` with `values[i] ≥ u`.
    fn hits(&self) -> &[usize];
    /// Quantile level used to choose the threshold.
    fn quantile(&self) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn n_exceedances(&self) -> usize {
        self.hits().len()
    }
}

/// Observable values with their threshold and exceedance flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceSeries {
    pub values: Vec<f64>,
    pub threshold: f64,
    pub quantile: f64,
    pub flags: Vec<bool>,
    hits: Vec<usize>,
}

impl ExceedanceSeries {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Series built directly from flags, for synthetic exceedance patterns.
    pub fn from_flags(flags: Vec<bool>, quantile: f64) -> Self {
        let values = flags.iter().map(|&f| f64::from(u8::from(f))).collect();
        let hits = flags.iter().enumerate().filter_map(|(i, &f)| f.then_some(i)).collect();
        ExceedanceSeries { values, threshold: 1.0, quantile, flags, hits }
    }
}

impl Exceedances for ExceedanceSeries {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn hits(&self) -> &[usize] {
        &self.hits
    }

    fn quantile(&self) -> f64 {
        self.quantile
    }
}

/// Flag `values[i] ≥ u`.
pub fn exceedances(values: Vec<f64>, u: f64, p: f64) -> Result<ExceedanceSeries> {
    if !u.is_finite() {
        return Err(Error::invalid("u", "threshold must be finite"));
    }
    let flags: Vec<bool> = values.iter().map(|&v| v >= u).collect();
    let hits = flags.iter().enumerate().filter_map(|(i, &f)| f.then_some(i)).collect();
    Ok(ExceedanceSeries { values, threshold: u, quantile: p, flags, hits })
}

/// Threshold at quantile `p` followed by [`exceedances`].
pub fn exceedances_at_quantile(values: Vec<f64>, p: f64) -> Result<ExceedanceSeries> {
    let u = empirical_quantile(&values, p)?;
    exceedances(values, u, p)
}

/// Sparse exceedance record of a long series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitTimes {
    pub n: usize,
    pub threshold: f64,
    pub quantile: f64,
    pub hits: Vec<usize>,
}

impl HitTimes {
    pub fn new(n: usize, threshold: f64, quantile: f64, hits: Vec<usize>) -> Result<Self> {
        if hits.windows(2).any(|w| w[0] >= w[1]) || hits.last().is_some_and(|&h| h >= n) {
            return Err(Error::invalid("hits", "hit indices must be strictly increasing and below n"));
        }
        Ok(HitTimes { n, threshold, quantile, hits })
    }

    /// Hit indices in `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> &[usize] {
        let a = self.hits.partition_point(|&h| h < start);
        let b = self.hits.partition_point(|&h| h < end);
        &self.hits[a..b]
    }
}

impl From<&ExceedanceSeries> for HitTimes {
    fn from(s: &ExceedanceSeries) -> Self {
        HitTimes { n: s.n(), threshold: s.threshold, quantile: s.quantile, hits: s.hits.clone() }
    }
}

impl Exceedances for HitTimes {
    fn len(&self) -> usize {
        self.n
    }

    fn hits(&self) -> &[usize] {
        &self.hits
    }

    fn quantile(&self) -> f64 {
        self.quantile
    }
}

/// Fraction of set flags: the Monte Carlo estimate of the target set's measure.
pub fn set_measure_empirical(flags: &[bool]) -> Result<f64> {
    if flags.is_empty() {
        return Err(Error::EmptyInput("flags"));
    }
    Ok(flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
}

/// [`set_measure_empirical`] for any exceedance record.
pub fn set_measure<E: Exceedances + ?Sized>(s: &E) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptyInput("flags"));
    }
    Ok(s.n_exceedances() as f64 / s.len() as f64)
}
