//! Spike and independent-block priors, their exact posterior means, and
//! Monte-Carlo Bayes risk, the lower side of the minimax sandwich.
//!
//! Everything here is at unit noise. A block prior puts one spike of size μ
//! in each of k blocks of m = ⌊n/k⌋ coordinates; leftover coordinates carry
//! the point mass at zero and contribute nothing to the risk.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimax::Regime;
use crate::rng::{self, Moments};
use crate::space::SparseSpace;

/// Replicates per Monte-Carlo shard.
pub const REPS_PER_SHARD: u64 = 1024;
pub const DEFAULT_REPS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sided {
    /// Mass 1/(2m) on each of ±μ e_i.
    Symmetric,
    /// Mass 1/m on each of +μ e_i.
    OneSided,
}

impl fmt::Display for Sided {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sided::Symmetric => "symmetric",
            Sided::OneSided => "one-sided",
        })
    }
}

impl FromStr for Sided {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Sided::Symmetric),
            "one-sided" | "onesided" => Ok(Sided::OneSided),
            _ => Err(Error::domain(
                "sided",
                format!("expected symmetric or one-sided, got '{s}'"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikePrior {
    pub mu: f64,
    pub m: usize,
    pub sided: Sided,
}

impl SpikePrior {
    pub fn new(mu: f64, m: usize, sided: Sided) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::domain(
                "mu",
                format!("must be positive and finite, got {mu}"),
            ));
        }
        if m == 0 {
            return Err(Error::domain("m", "block dimension must be at least 1"));
        }
        Ok(SpikePrior { mu, m, sided })
    }

    pub fn posterior_mean(&self, y: &[f64], out: &mut [f64]) {
        match self.sided {
            Sided::Symmetric => posterior_mean_symmetric_into(y, self.mu, out),
            Sided::OneSided => posterior_mean_onesided_into(y, self.mu, out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPrior {
    pub spike: SpikePrior,
    pub blocks: u64,
}

impl BlockPrior {
    pub fn new(spike: SpikePrior, blocks: u64) -> Result<Self> {
        if blocks == 0 {
            return Err(Error::domain("blocks", "need at least one block"));
        }
        Ok(BlockPrior { spike, blocks })
    }

    /// Blocks of ⌊n/k⌋ coordinates with spikes of size μ = τ/σ.
    pub fn from_space(space: &SparseSpace, sided: Sided) -> Result<Self> {
        space.validate()?;
        let m = (space.n / space.k) as usize;
        BlockPrior::new(SpikePrior::new(space.mu(), m, sided)?, space.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesRiskEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub reps: u64,
    pub seed: u64,
}

/// E(θ | y) under the symmetric spike prior:
/// θ̂_j = μ(e^{μy_j} − e^{−μy_j}) / Σᵢ(e^{μyᵢ} + e^{−μyᵢ}).
pub fn posterior_mean_symmetric(y: &[f64], mu: f64) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    posterior_mean_symmetric_into(y, mu, &mut out);
    out
}

fn posterior_mean_symmetric_into(y: &[f64], mu: f64, out: &mut [f64]) {
    // Work with |y| and restore the sign, which makes the map exactly odd.
    let top = y
        .iter()
        .fold(f64::NEG_INFINITY, |a, &v| a.max(mu * v.abs()));
    let mut den = 0.0;
    for &v in y {
        let s = mu * v.abs();
        den += (s - top).exp() * (1.0 + (-2.0 * s).exp());
    }
    for (o, &v) in out.iter_mut().zip(y) {
        let s = mu * v.abs();
        let num = (s - top).exp() * -(-2.0 * s).exp_m1();
        *o = (mu * num / den).copysign(v);
    }
}

/// E(θ | y) under the one-sided spike prior: μ · softmax(μy).
pub fn posterior_mean_onesided(y: &[f64], mu: f64) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    posterior_mean_onesided_into(y, mu, &mut out);
    out
}

fn posterior_mean_onesided_into(y: &[f64], mu: f64, out: &mut [f64]) {
    let top = y.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(mu * v));
    let mut den = 0.0;
    for (o, &v) in out.iter_mut().zip(y) {
        *o = (mu * v - top).exp();
        den += *o;
    }
    for o in out.iter_mut() {
        *o *= mu / den;
    }
}

/// Bayes risk of the block prior, estimated with its exact posterior mean.
pub fn mc_bayes_risk(prior: &BlockPrior, reps: u64, seed: u64) -> Result<BayesRiskEstimate> {
    let spike = prior.spike;
    mc_bayes_risk_with(prior, reps, seed, move |y, out| {
        spike.posterior_mean(y, out)
    })
}

/// Integrated risk k·E‖θ̂(y) − θ‖² of an arbitrary block estimator under the
/// block prior. Draws depend only on (seed, shard), so different estimators
/// see the same samples.
pub fn mc_bayes_risk_with<F>(
    prior: &BlockPrior,
    reps: u64,
    seed: u64,
    estimator: F,
) -> Result<BayesRiskEstimate>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    if reps < 2 {
        return Err(Error::domain(
            "reps",
            format!("need at least 2, got {reps}"),
        ));
    }
    let SpikePrior { mu, m, sided } = prior.spike;
    let shards = reps.div_ceil(REPS_PER_SHARD);
    let parts: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng::stream(seed, &[s]);
            let count = REPS_PER_SHARD.min(reps - s * REPS_PER_SHARD);
            let mut y = vec![0.0; m];
            let mut est = vec![0.0; m];
            let mut acc = Moments::default();
            for _ in 0..count {
                let i = rng.random_range(0..m);
                let sign = match sided {
                    Sided::Symmetric if rng.random::<bool>() => -1.0,
                    _ => 1.0,
                };
                for v in y.iter_mut() {
                    *v = rng.sample::<f64, _>(StandardNormal);
                }
                y[i] += sign * mu;
                estimator(&y, &mut est);
                let mut loss = 0.0;
                for (j, &e) in est.iter().enumerate() {
                    let d = if j == i { e - sign * mu } else { e };
                    loss += d * d;
                }
                acc.push(loss);
            }
            acc
        })
        .collect();
    let mut all = Moments::default();
    for p in &parts {
        all.merge(p);
    }
    let k = prior.blocks as f64;
    Ok(BayesRiskEstimate {
        value: k * all.mean,
        standard_error: k * all.std_error(),
        reps,
        seed,
    })
}

/// Spike size ν_{m−1} − √(2 log ν_{m−1}) used for the high-SNR one-sided
/// prior, with ν_j = √(2 log j).
pub fn one_sided_spike_location(m: usize) -> Result<f64> {
    if m < 3 {
        return Err(Error::domain("m", format!("need m ≥ 3, got {m}")));
    }
    let nu = (2.0 * ((m - 1) as f64).ln()).sqrt();
    Ok(nu - (2.0 * nu.ln()).sqrt())
}

/// Asymptotic Bayes lower bound for the regime, o(1) dropped, in
/// observation units: nσ² times
/// low εμ² − ε²μ⁴; moderate εμ² − ½ε²μ²e^{μ²};
/// high 2ε log ε⁻¹ − 2εν√(2 log ν) with ν = √(2 log(n/k)).
pub fn lower_bound_formula(regime: Regime, space: &SparseSpace) -> Result<f64> {
    space.validate()?;
    if space.n / space.k < 3 {
        return Err(Error::domain(
            "k",
            format!("need n/k ≥ 3, got n={} k={}", space.n, space.k),
        ));
    }
    let (eps, mu, scale) = (space.eps(), space.mu(), space.scale());
    let mu2 = mu * mu;
    let per = match regime {
        Regime::Low => eps * mu2 - eps * eps * mu2 * mu2,
        Regime::Moderate => eps * mu2 - 0.5 * eps * eps * mu2 * mu2.exp(),
        Regime::High => crate::minimax::high_snr_second_order(eps),
        Regime::Unclassified => {
            return Err(Error::Unsupported(
                "no lower-bound formula for an unclassified regime".into(),
            ))
        }
    };
    Ok(scale * per)
}
