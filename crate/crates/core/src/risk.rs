//! One-dimensional risks of the estimators at unit noise, their quadrature
//! and Monte-Carlo oracles, and supremum risk over Θ(k, τ).
//!
//! With σ = 1 the per-coordinate risk of an estimator η at signal μ is
//! r(λ, μ) = E(η(μ + Z) − μ)². Risks over a space are reported in
//! observation units by multiplying by n·σ².

use std::cmp::Ordering;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{apply_scalar, EstimatorKind, Tuning};
use crate::gaussian::{gauss_expect_with_breaks, ln_tail_moment, phi, tail_moment, upper_tail};
use crate::optimize::golden_max;
use crate::rng::{self, Moments, SHARD};
use crate::space::SparseSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// A risk value with where it came from. `error_bound` is an absolute
/// error estimate for quadrature and the standard error for Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub value: f64,
    pub method: RiskMethod,
    pub error_bound: f64,
}

impl RiskReport {
    fn exact(value: f64) -> Self {
        RiskReport {
            value,
            method: RiskMethod::ClosedForm,
            error_bound: 0.0,
        }
    }
}

/// P(a < Z < b) without cancellation in either tail.
pub(crate) fn prob_between(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else if b <= 0.0 {
        upper_tail(-b) - upper_tail(-a)
    } else {
        1.0 - upper_tail(b) - upper_tail(-a)
    }
}

/// (E η_S, E η_S²) for η_S the soft threshold applied to μ + Z.
pub fn soft_moments(lam: f64, mu: f64) -> (f64, f64) {
    let mu = mu.abs();
    let m1 = tail_moment(1, lam - mu) - tail_moment(1, lam + mu);
    let m2 = tail_moment(2, lam - mu) + tail_moment(2, lam + mu);
    (m1, m2)
}

/// (r_S, E η_S − μ) for μ ≥ 0, assembled from nonnegative pieces so that
/// neither suffers cancellation when μ ≫ λ.
fn soft_parts(lam: f64, mu: f64) -> (f64, f64) {
    let j = |a: f64| (tail_moment(0, a), tail_moment(1, a), tail_moment(2, a));
    // Z > λ − μ: η − μ = Z − λ
    let a = lam - mu;
    let (up2, up1) = if a >= 0.0 {
        let (j0, j1, j2) = j(a);
        (j2 - 2.0 * mu * j1 + mu * mu * j0, j1 - mu * j0)
    } else {
        // complement of Z < a, reflected onto Z > −a
        let (j0, j1, j2) = j(-a);
        (
            1.0 + lam * lam - (j2 + 2.0 * mu * j1 + mu * mu * j0),
            -lam + j1 + mu * j0,
        )
    };
    // Z < −λ − μ: η − μ = Z + λ
    let (j0, j1, j2) = j(lam + mu);
    let (lo2, lo1) = (j2 + 2.0 * mu * j1 + mu * mu * j0, -(j1 + mu * j0));
    let mid = prob_between(-lam - mu, lam - mu);
    (
        up2.max(0.0) + lo2 + mu * mu * mid,
        (up1 + lo1 - mu * mid).min(0.0),
    )
}

/// r_S(λ, μ) = μ² − 2μ E η_S + E η_S².
pub fn risk_soft(lam: f64, mu: f64) -> f64 {
    soft_parts(lam, mu.abs()).0
}

/// r_H(λ, μ) = (μ²−1)[Φ(λ−μ) − Φ(−λ−μ)] + 1 + (λ−μ)φ(λ−μ) + (λ+μ)φ(λ+μ).
pub fn risk_hard(lam: f64, mu: f64) -> f64 {
    let mu = mu.abs();
    let inside = prob_between(-lam - mu, lam - mu);
    ((mu * mu - 1.0) * inside + 1.0 + (lam - mu) * phi(lam - mu) + (lam + mu) * phi(lam + mu))
        .max(0.0)
}

/// r_L(λ, μ) = (λ/(1+λ))² μ² + 1/(1+λ)².
pub fn risk_linear(lam: f64, mu: f64) -> f64 {
    let s = 1.0 / (1.0 + lam);
    let b = lam * s;
    b * b * mu * mu + s * s
}

/// r_e(μ; λ, γ) = E η_S²/(1+γ)² − 2μ E η_S/(1+γ) + μ².
pub fn risk_elastic(lam: f64, gamma: f64, mu: f64) -> f64 {
    let mu = mu.abs();
    if gamma.is_infinite() {
        return mu * mu;
    }
    // η/(1+γ) − μ = s(η − μ) − (1 − s)μ; the cross term is nonnegative
    // because soft thresholding biases toward zero.
    let s = 1.0 / (1.0 + gamma);
    let (r, bias) = soft_parts(lam, mu);
    let t = 1.0 - s;
    s * s * r + t * t * mu * mu - 2.0 * s * t * mu * bias
}

/// Unit-noise risk of any estimator at signal μ.
pub fn risk(kind: EstimatorKind, tuning: Tuning, mu: f64) -> f64 {
    match kind {
        EstimatorKind::Soft => risk_soft(tuning.lambda, mu),
        EstimatorKind::Hard => risk_hard(tuning.lambda, mu),
        EstimatorKind::Linear => risk_linear(tuning.lambda, mu),
        EstimatorKind::SoftLinear => risk_elastic(tuning.lambda, tuning.gamma, mu),
        EstimatorKind::Zero => mu * mu,
    }
}

/// Risk by adaptive quadrature of E(η(μ+Z) − μ)², split at the kinks.
pub fn quad_risk(kind: EstimatorKind, tuning: Tuning, mu: f64, tol: f64) -> Result<RiskReport> {
    tuning.validate()?;
    if !mu.is_finite() {
        return Err(Error::domain("mu", "must be finite"));
    }
    let lam = tuning.lambda;
    let breaks = [lam - mu, -lam - mu];
    // polynomial integrands: ±10 leaves a tail mass far below any useful tol
    let q = gauss_expect_with_breaks(
        |z| {
            let d = apply_scalar(kind, tuning, mu + z) - mu;
            d * d
        },
        0.0,
        10.0,
        &breaks,
        tol,
    )?;
    Ok(RiskReport {
        value: q.value,
        method: RiskMethod::Quadrature,
        error_bound: q.error_bound,
    })
}

/// Monte-Carlo risk from `samples` standard normal draws keyed by `seed`.
pub fn mc_risk(
    kind: EstimatorKind,
    tuning: Tuning,
    mu: f64,
    samples: u64,
    seed: u64,
) -> Result<RiskReport> {
    tuning.validate()?;
    if samples == 0 {
        return Err(Error::domain("samples", "must be at least 1"));
    }
    let shards = samples.div_ceil(SHARD as u64);
    let parts: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let len = (samples - s * SHARD as u64).min(SHARD as u64);
            let mut r = rng::stream(seed, &[s]);
            let mut m = Moments::default();
            for _ in 0..len {
                let z: f64 = StandardNormal.sample(&mut r);
                let d = apply_scalar(kind, tuning, mu + z) - mu;
                m.push(d * d);
            }
            m
        })
        .collect();
    let mut total = Moments::default();
    parts.iter().for_each(|p| total.merge(p));
    Ok(RiskReport {
        value: total.mean,
        method: RiskMethod::MonteCarlo,
        error_bound: total.std_error(),
    })
}

/// min{r_S(λ,0) + μ², 1 + λ²}; r_S lies between half of this and this.
pub fn soft_risk_bound(lam: f64, mu: f64) -> f64 {
    (risk_soft(lam, 0.0) + mu * mu).min(1.0 + lam * lam)
}

/// Piecewise bound r̄_H; r_H lies between 5/12 of this and this.
pub fn hard_risk_bound(lam: f64, mu: f64) -> f64 {
    let mu = mu.abs();
    if mu <= lam {
        (risk_hard(lam, 0.0) + 1.2 * mu * mu).min(1.0 + mu * mu)
    } else {
        1.0 + mu * mu * upper_tail(mu - lam)
    }
}

/// Grid resolution of the hard-threshold inner maximization.
pub const HARD_GRID: usize = 1024;

/// max_{m ∈ [0, μ]} r_H(λ, m) and its argmax: a 1024-point grid, then
/// golden-section refinement inside the bracket of the best grid point.
///
/// The peak sits below λ + O(1), so the grid covers [0, min(μ, λ + 40)]
/// and the endpoint μ is checked separately.
pub fn hard_inner_max(lam: f64, mu: f64) -> (f64, f64) {
    let mu = mu.abs();
    if mu == 0.0 {
        return (0.0, risk_hard(lam, 0.0));
    }
    let top = mu.min(lam + 40.0);
    let h = top / (HARD_GRID - 1) as f64;
    let mut best = (0.0, risk_hard(lam, 0.0));
    let mut best_i = 0;
    for i in 1..HARD_GRID {
        let m = i as f64 * h;
        let r = risk_hard(lam, m);
        if r > best.1 {
            best = (m, r);
            best_i = i;
        }
    }
    let lo = best_i.saturating_sub(1) as f64 * h;
    let hi = ((best_i + 1).min(HARD_GRID - 1)) as f64 * h;
    let (m, r, _) = golden_max(|m| risk_hard(lam, m), lo, hi, 1e-12 * (1.0 + top));
    if r >= best.1 {
        best = (m, r);
    }
    let at_end = risk_hard(lam, mu);
    if at_end > best.1 {
        best = (mu, at_end);
    }
    best
}

/// Normalized supremum risk F = sup_θ MSE/(nσ²) at unit-noise threshold
/// `lam` (already divided by σ for the thresholding families).
pub fn sup_risk_unit(kind: EstimatorKind, lam: f64, gamma: f64, eps: f64, mu: f64) -> f64 {
    let t = Tuning { lambda: lam, gamma };
    match kind {
        EstimatorKind::Hard => (1.0 - eps) * risk_hard(lam, 0.0) + eps * hard_inner_max(lam, mu).1,
        // risk is nondecreasing in |μ|: all mass at μ
        _ => (1.0 - eps) * risk(kind, t, 0.0) + eps * risk(kind, t, mu),
    }
}

/// Unit-noise λ for a tuning given in observation units.
pub fn unit_lambda(kind: EstimatorKind, tuning: Tuning, sigma: f64) -> f64 {
    if kind.lambda_has_units() {
        tuning.lambda / sigma
    } else {
        tuning.lambda
    }
}

/// Supremum over Θ(k, τ) of the n-dimensional MSE.
pub fn sup_risk(kind: EstimatorKind, tuning: Tuning, space: &SparseSpace) -> Result<RiskReport> {
    tuning.validate()?;
    space.validate()?;
    let lam = unit_lambda(kind, tuning, space.sigma);
    let f = sup_risk_unit(kind, lam, tuning.gamma, space.eps(), space.mu());
    Ok(RiskReport::exact(space.scale() * f))
}

/// A signed number kept as (sign, ln|x|) so that values far below the
/// smallest double still compare correctly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Excess {
    sign: f64,
    ln_abs: f64,
}

impl Excess {
    pub const ZERO: Excess = Excess {
        sign: 0.0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Excess {
                sign: x.signum(),
                ln_abs: x.abs().ln(),
            }
        }
    }

    /// Σ sᵢ·exp(ℓᵢ) for terms (sᵢ, ℓᵢ), summed relative to the largest.
    pub fn sum(terms: &[(f64, f64)]) -> Self {
        let top = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let acc: f64 = terms.iter().map(|&(s, l)| s * (l - top).exp()).sum();
        if acc == 0.0 {
            Self::ZERO
        } else {
            Excess {
                sign: acc.signum(),
                ln_abs: top + acc.abs().ln(),
            }
        }
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    /// The value as a double (may underflow to ±0).
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

impl PartialOrd for Excess {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.partial_cmp(&other.sign)? {
            Ordering::Equal if self.sign > 0.0 => self.ln_abs.partial_cmp(&other.ln_abs),
            Ordering::Equal if self.sign < 0.0 => other.ln_abs.partial_cmp(&self.ln_abs),
            o => Some(o),
        }
    }
}

/// F − εμ², the normalized supremum risk in excess of the zero estimator's.
///
/// For the soft families every term of the excess carries a Gaussian tail
/// factor, so it is summed in log space; F itself is exactly εμ² in double
/// precision once λ exceeds roughly 38 and cannot be minimized directly.
pub fn sup_excess(kind: EstimatorKind, lam: f64, gamma: f64, eps: f64, mu: f64) -> Excess {
    let mu = mu.abs();
    match kind {
        EstimatorKind::Soft | EstimatorKind::SoftLinear => {
            let g = if kind == EstimatorKind::Soft {
                0.0
            } else {
                gamma
            };
            let ln_s = if g.is_infinite() {
                f64::NEG_INFINITY
            } else {
                -(g.ln_1p())
            };
            let ln_eps = eps.ln();
            let ln_rest = (-eps).ln_1p();
            let ln_mu = mu.ln();
            let ln2 = std::f64::consts::LN_2;
            let terms = [
                (1.0, ln2 + ln_rest + 2.0 * ln_s + ln_tail_moment(2, lam)),
                (1.0, ln_eps + 2.0 * ln_s + ln_tail_moment(2, lam - mu)),
                (1.0, ln_eps + 2.0 * ln_s + ln_tail_moment(2, lam + mu)),
                (
                    -1.0,
                    ln2 + ln_eps + ln_mu + ln_s + ln_tail_moment(1, lam - mu),
                ),
                (
                    1.0,
                    ln2 + ln_eps + ln_mu + ln_s + ln_tail_moment(1, lam + mu),
                ),
            ];
            Excess::sum(&terms)
        }
        // (1 − εμ² − 2λεμ²)/(1+λ)²
        EstimatorKind::Linear => {
            let c = eps * mu * mu;
            let s = 1.0 / (1.0 + lam);
            Excess::from_f64((1.0 - c - 2.0 * lam * c) * s * s)
        }
        EstimatorKind::Hard => {
            Excess::from_f64(sup_risk_unit(kind, lam, gamma, eps, mu) - eps * mu * mu)
        }
        EstimatorKind::Zero => Excess::ZERO,
    }
}
