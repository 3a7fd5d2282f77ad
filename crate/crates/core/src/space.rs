//! The sparse parameter space Θ(k, τ) and its sup-norm bounded variant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter space of k-sparse vectors in ℝⁿ with ‖θ‖₂² ≤ kτ², observed
/// with noise level σ. With `a_bound = Some(A)` coordinates are further
/// limited to |θᵢ| ≤ Aτ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseSpace {
    pub n: u64,
    pub k: u64,
    pub tau: f64,
    pub sigma: f64,
    pub a_bound: Option<f64>,
}

impl SparseSpace {
    pub fn new(n: u64, k: u64, tau: f64, sigma: f64) -> Result<Self> {
        let s = SparseSpace {
            n,
            k,
            tau,
            sigma,
            a_bound: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn bounded(mut self, a: f64) -> Result<Self> {
        self.a_bound = Some(a);
        self.validate()?;
        Ok(self)
    }

    /// Unit-noise space with the given sparsity fraction and SNR; n is
    /// nominal (results are per-coordinate scaled by n anyway).
    pub fn from_eps_mu(n: u64, eps: f64, mu: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::domain(
                "eps",
                format!("must lie in (0, 1], got {eps}"),
            ));
        }
        let k = ((eps * n as f64).round() as u64).max(1);
        let s = SparseSpace {
            n,
            k,
            tau: mu,
            sigma: 1.0,
            a_bound: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("n", "must be positive"));
        }
        if self.k == 0 || self.k > self.n {
            return Err(Error::domain(
                "k",
                format!("must satisfy 1 <= k <= n = {}, got {}", self.n, self.k),
            ));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::domain(
                "tau",
                format!("must be positive, got {}", self.tau),
            ));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::domain(
                "sigma",
                format!("must be positive, got {}", self.sigma),
            ));
        }
        if let Some(a) = self.a_bound {
            if !(a > 1.0) || !a.is_finite() {
                return Err(Error::domain("a_bound", format!("must exceed 1, got {a}")));
            }
        }
        Ok(())
    }

    /// ε = k/n
    pub fn eps(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// μ = τ/σ
    pub fn mu(&self) -> f64 {
        self.tau / self.sigma
    }

    /// ν = √(2 log ε⁻¹)
    pub fn nu(&self) -> f64 {
        nu(self.eps())
    }

    /// n·σ², the scale in which normalized risks are reported.
    pub fn scale(&self) -> f64 {
        self.n as f64 * self.sigma * self.sigma
    }
}

/// ν = √(2 log ε⁻¹)
pub fn nu(eps: f64) -> f64 {
    (-2.0 * eps.ln()).max(0.0).sqrt()
}
