use super::pmf::ClusterLaw;
use crate::dynamics::{MARKOV_DENSITY, MARKOV_SLOPES};
use crate::error::{Error, Result};

/// Deepest return order evaluated by [`markov_alpha`].
pub const MARKOV_ALPHA_MAX_DEPTH: usize = 200;

/// Branch `a` of the three-branch map covers branch `b`.
const ADMISSIBLE: [[bool; 3]; 3] = [[true, true, true], [false, true, true], [true, true, true]];

/// `α̂_l = ∫h²/|DT^{l−1}| / ∫h²` for the three-branch Markov map.
///
/// `T^{l−1}` is affine on each cylinder `[w_0 … w_{l−1}]` of admissible words,
/// whose length is `(1/3)/Π s_{w_i}`; summing `h_{w_0}²·|cyl|/Π s_{w_i}`
/// over words is a product of the transfer matrix `M_ab = 1_{a→b}/s_a²`.
pub fn markov_alpha(l: usize) -> Result<f64> {
    if l == 0 {
        return Err(Error::invalid("l", "return order starts at 1"));
    }
    if l > MARKOV_ALPHA_MAX_DEPTH {
        return Err(Error::DepthExceeded { requested: l, max: MARKOV_ALPHA_MAX_DEPTH });
    }
    let mut v = [1.0f64; 3];
    for _ in 1..l {
        let mut next = [0.0; 3];
        for a in 0..3 {
            let s2 = MARKOV_SLOPES[a] * MARKOV_SLOPES[a];
            next[a] = (0..3).filter(|&b| ADMISSIBLE[a][b]).map(|b| v[b]).sum::<f64>() / s2;
        }
        v = next;
    }
    let h2: Vec<f64> = MARKOV_DENSITY.iter().map(|h| h * h).collect();
    Ok(h2.iter().zip(v).map(|(h, x)| h * x).sum::<f64>() / h2.iter().sum::<f64>())
}

/// `π_l = (α̂_l − 2α̂_{l+1} + α̂_{l+2}) / (α̂_1 − α̂_2)` for `l = 1..=alpha.len()−2`.
pub fn pi_from_alpha(alpha: &[f64]) -> Result<ClusterLaw> {
    if alpha.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, available: alpha.len() });
    }
    if (alpha[0] - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("alpha", "the sequence must start at 1"));
    }
    if alpha.windows(2).any(|w| w[1] > w[0] + 1e-15) {
        return Err(Error::invalid("alpha", "the sequence must be nonincreasing"));
    }
    let gap = alpha[0] - alpha[1];
    if gap <= 0.0 {
        return Err(Error::DegenerateClusterLaw("α̂₁ = α̂₂: no clustering".into()));
    }
    let pi: Vec<f64> = alpha.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]) / gap).collect();
    if let Some(p) = pi.iter().find(|&&p| p < -1e-12) {
        return Err(Error::DegenerateClusterLaw(format!("negative cluster probability {p}")));
    }
    ClusterLaw::new(pi.into_iter().map(|p| p.max(0.0)).collect())
}

/// Cluster law of the Markov map's diagonal, truncated where the deficit drops below `tol`.
pub fn markov_cluster_law(tol: f64) -> Result<ClusterLaw> {
    let mut alpha = vec![markov_alpha(1)?, markov_alpha(2)?, markov_alpha(3)?];
    loop {
        let law = pi_from_alpha(&alpha)?;
        if law.deficit() < tol {
            return Ok(law);
        }
        alpha.push(markov_alpha(alpha.len() + 1)?);
    }
}
