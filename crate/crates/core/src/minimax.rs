//! SNR regimes and the closed-form first/second-order approximations of the
//! minimax risk and of optimally tuned estimators' supremum risks.
//!
//! Every approximation drops its o(1) remainder; [`ASYMPTOTIC_NOTE`] labels
//! the reported values accordingly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::space::SparseSpace;

pub const ASYMPTOTIC_NOTE: &str = "asymptotic, o(1) dropped";
pub const DEFAULT_LOW_CUT: f64 = 0.5;
pub const DEFAULT_HIGH_CUT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// μ → 0
    Low,
    /// μ → ∞ but μ = o(√log ε⁻¹)
    Moderate,
    /// μ = ω(√log ε⁻¹)
    High,
    /// Between the moderate and high cut-offs.
    Unclassified,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Low => "low",
            Regime::Moderate => "moderate",
            Regime::High => "high",
            Regime::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Regime::Low),
            "moderate" => Ok(Regime::Moderate),
            "high" => Ok(Regime::High),
            _ => Err(Error::domain(
                "regime",
                format!("expected low, moderate or high, got '{s}'"),
            )),
        }
    }
}

/// A regime label with the numbers it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub regime: Regime,
    /// μ/√(log ε⁻¹)
    pub ratio: f64,
    pub mu: f64,
}

/// Finite-sample labeling of the asymptotic regimes: low if μ ≤ low_cut,
/// high if μ ≥ high_cut·√(log ε⁻¹), moderate if
/// low_cut < μ ≤ √(log ε⁻¹)/high_cut, otherwise unclassified.
pub fn classify_regime(space: &SparseSpace, low_cut: f64, high_cut: f64) -> Result<Classification> {
    space.validate()?;
    let eps = space.eps();
    if eps >= 1.0 {
        return Err(Error::domain("eps", "regimes need k < n"));
    }
    if !(low_cut > 0.0) || !(high_cut > 0.0) {
        return Err(Error::domain("cut", "cut-offs must be positive"));
    }
    let mu = space.mu();
    let root = (-eps.ln()).sqrt();
    let regime = if mu <= low_cut {
        Regime::Low
    } else if mu >= high_cut * root {
        Regime::High
    } else if mu <= root / high_cut {
        Regime::Moderate
    } else {
        Regime::Unclassified
    };
    Ok(Classification {
        regime,
        ratio: mu / root,
        mu,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxApprox {
    pub regime: Regime,
    /// Leading-order minimax risk, observation units.
    pub first_order: f64,
    /// Second-order approximation; absent for moderate SNR on the unbounded
    /// space, where only the bracket below is known.
    pub second_order: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    /// ν = √(2 log ε⁻¹)
    pub nu: f64,
    pub bounded_space: bool,
    pub note: String,
}

fn require_classified(regime: Regime) -> Result<()> {
    if regime == Regime::Unclassified {
        return Err(Error::Unsupported(
            "regime is unclassified; classify with other cut-offs or force a regime".into(),
        ));
    }
    Ok(())
}

/// The regime's minimax approximation for the space.
///
/// Low: nσ²(εμ² − ε²μ⁴). Moderate: lower nσ²(εμ² − ½ε²μ²e^{μ²}), upper
/// nσ²(εμ² − √(2/π) ε²μ e^{μ²}); on the bounded space the lower display is
/// the second-order value. High: nσ²(2ε log ε⁻¹ − 2εν√(2 log ν)).
///
/// The two moderate displays are asymptotic: the lower one is below the
/// upper one only when μ ≥ √(8/π) ≈ 1.596.
pub fn minimax_approx(space: &SparseSpace, regime: Regime) -> Result<MinimaxApprox> {
    space.validate()?;
    require_classified(regime)?;
    let (eps, mu, nu, scale) = (space.eps(), space.mu(), space.nu(), space.scale());
    let mu2 = mu * mu;
    let mut out = MinimaxApprox {
        regime,
        first_order: 0.0,
        second_order: None,
        lower_bound: None,
        upper_bound: None,
        nu,
        bounded_space: space.a_bound.is_some(),
        note: ASYMPTOTIC_NOTE.into(),
    };
    match regime {
        Regime::Low => {
            out.first_order = scale * eps * mu2;
            out.second_order = Some(scale * (eps * mu2 - eps * eps * mu2 * mu2));
        }
        Regime::Moderate => {
            out.first_order = scale * eps * mu2;
            let lower = scale * (eps * mu2 - 0.5 * eps * eps * mu2 * mu2.exp());
            let upper = scale
                * (eps * mu2 - (2.0 / std::f64::consts::PI).sqrt() * eps * eps * mu * mu2.exp());
            out.lower_bound = Some(lower);
            out.upper_bound = Some(upper);
            if out.bounded_space {
                out.second_order = Some(lower);
            }
        }
        Regime::High => {
            out.first_order = scale * 2.0 * eps * (-eps.ln());
            out.second_order = Some(scale * high_snr_second_order(eps));
        }
        Regime::Unclassified => unreachable!(),
    }
    Ok(out)
}

/// 2ε log ε⁻¹ − 2εν√(2 log ν), per unit n·σ².
pub fn high_snr_second_order(eps: f64) -> f64 {
    let nu = crate::space::nu(eps);
    2.0 * eps * (-eps.ln()) - 2.0 * eps * nu * (2.0 * nu.ln()).sqrt()
}

/// Asymptotic inf_λ sup_θ MSE of an optimally tuned estimator.
pub fn estimator_sup_risk_approx(
    kind: EstimatorKind,
    space: &SparseSpace,
    regime: Regime,
) -> Result<f64> {
    space.validate()?;
    require_classified(regime)?;
    let (eps, mu, nu, scale) = (space.eps(), space.mu(), space.nu(), space.scale());
    let mu2 = mu * mu;
    let le = -eps.ln();
    let per = match (kind, regime) {
        (EstimatorKind::Soft, Regime::Low | Regime::Moderate) => {
            eps * mu2 - (-(le * le) / (2.0 * mu2)).exp()
        }
        (EstimatorKind::Soft, Regime::High) => 2.0 * eps * le - 6.0 * eps * nu.ln(),
        (EstimatorKind::Hard, Regime::Low | Regime::Moderate) => eps * mu2,
        (EstimatorKind::Hard, Regime::High) => high_snr_second_order(eps),
        (EstimatorKind::Linear, _) => eps * mu2 / (1.0 + eps * mu2),
        (EstimatorKind::SoftLinear, Regime::Moderate) => {
            eps * mu2 - (2.0 / std::f64::consts::PI).sqrt() * eps * eps * mu * mu2.exp()
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "no supremum-risk approximation for {kind} in the {regime} regime"
            )))
        }
    };
    Ok(scale * per)
}

/// 2σ²k log(n/k), the classical sparse minimax rate.
pub fn classical_minimax(space: &SparseSpace) -> Result<f64> {
    space.validate()?;
    if space.k >= space.n {
        return Err(Error::domain("k", "classical rate needs k < n"));
    }
    let k = space.k as f64;
    Ok(2.0 * space.sigma * space.sigma * k * (space.n as f64 / k).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuning::{optimize_lambda, DEFAULT_GRID_POINTS, DEFAULT_REFINE_TOL};

    fn sp(n: u64, k: u64, tau: f64) -> SparseSpace {
        SparseSpace::new(n, k, tau, 1.0).unwrap()
    }

    #[test]
    fn classification_examples() {
        let c = |mu| classify_regime(&sp(1_000_000, 1, mu), 0.5, 2.0).unwrap();
        assert_eq!(c(0.1).regime, Regime::Low);
        assert_eq!(c(100.0).regime, Regime::High);
        assert_eq!(c(1.5).regime, Regime::Moderate);
        assert_eq!(c(3.0).regime, Regime::Unclassified);
        assert!((c(1.5).ratio - 1.5 / (1e6f64).ln().sqrt()).abs() < 1e-15);
        assert!(classify_regime(&sp(5, 5, 1.0), 0.5, 2.0).is_err());
    }

    #[test]
    fn approximation_examples() {
        let s = sp(1_000_000, 1000, 0.2);
        let a = minimax_approx(&s, Regime::Low).unwrap();
        assert!((a.second_order.unwrap() - (40.0 - 0.0016)).abs() < 1e-9);
        assert!((a.first_order - 40.0).abs() < 1e-9);

        // ε = e⁻⁸ exactly enough: n/k = 2980.958...
        let s = SparseSpace::new(2_980_958, 1000, 50.0, 1.0).unwrap();
        let a = minimax_approx(&s, Regime::High).unwrap();
        let eps = s.eps();
        let nu = s.nu();
        let want = s.scale() * (2.0 * eps * (-eps.ln()) - 2.0 * eps * nu * (2.0 * nu.ln()).sqrt());
        assert!((a.second_order.unwrap() - want).abs() < 1e-12 * want);
        let e8 = (-8f64).exp();
        let ideal = s.scale() * (16.0 * e8 - 8.0 * e8 * (2.0 * 4f64.ln()).sqrt());
        assert!((a.second_order.unwrap() / ideal - 1.0).abs() < 1e-6);

        assert!(minimax_approx(&s, Regime::Unclassified).is_err());
    }

    #[test]
    fn moderate_bracket() {
        for mu in [1.6, 1.8, 2.0, 2.5] {
            let s = sp(100_000_000, 10, mu);
            let a = minimax_approx(&s, Regime::Moderate).unwrap();
            assert!(a.lower_bound.unwrap() <= a.upper_bound.unwrap(), "μ={mu}");
            assert!(a.second_order.is_none());
        }
        // below √(8/π) the asymptotic displays cross
        let a = minimax_approx(&sp(100_000_000, 10, 1.2), Regime::Moderate).unwrap();
        assert!(a.lower_bound.unwrap() > a.upper_bound.unwrap());
        let b = minimax_approx(
            &sp(100_000_000, 10, 1.8).bounded(2.0).unwrap(),
            Regime::Moderate,
        )
        .unwrap();
        assert!(b.bounded_space);
        assert_eq!(b.second_order, b.lower_bound);
    }

    #[test]
    fn second_order_below_first() {
        for (n, k, mu, r) in [
            (1_000_000, 100, 0.3, Regime::Low),
            (1_000_000, 1, 0.05, Regime::Low),
            (100_000_000, 10, 1.8, Regime::Moderate),
            (1_000_000, 1, 20.0, Regime::High),
            (1u64 << 40, 1, 50.0, Regime::High),
        ] {
            let s = sp(n, k, mu).bounded(3.0).unwrap();
            let a = minimax_approx(&s, r).unwrap();
            assert!(a.second_order.unwrap() <= a.first_order);
        }
    }

    #[test]
    fn estimator_approx_examples() {
        let s = sp(100_000, 10, 1.3);
        let v = estimator_sup_risk_approx(EstimatorKind::Hard, &s, Regime::Moderate).unwrap();
        assert!((v / (s.scale() * s.eps() * 1.69) - 1.0).abs() < 1e-15);
        let s = sp(10_000, 1, 100.0);
        let v = estimator_sup_risk_approx(EstimatorKind::Linear, &s, Regime::High).unwrap();
        assert!((v - s.scale() / 2.0).abs() < 1e-12);
        let s = SparseSpace::new(2_980_958, 1000, 50.0, 1.0).unwrap();
        let v = estimator_sup_risk_approx(EstimatorKind::Soft, &s, Regime::High).unwrap();
        let e8 = (-8f64).exp();
        assert!((v / (s.scale() * (16.0 * e8 - 6.0 * e8 * 4f64.ln())) - 1.0).abs() < 1e-6);
        assert!(estimator_sup_risk_approx(EstimatorKind::SoftLinear, &s, Regime::High).is_err());
        assert!(estimator_sup_risk_approx(EstimatorKind::Zero, &s, Regime::Low).is_err());
    }

    #[test]
    fn linear_approx_is_exact() {
        for (n, k, mu) in [(1000, 10, 1.0), (100_000, 3, 0.4), (50, 20, 2.0)] {
            let s = sp(n, k, mu);
            let a = estimator_sup_risk_approx(EstimatorKind::Linear, &s, Regime::Low).unwrap();
            let o = optimize_lambda(
                EstimatorKind::Linear,
                &s,
                DEFAULT_GRID_POINTS,
                DEFAULT_REFINE_TOL,
            )
            .unwrap();
            assert!((a / o.value - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn moderate_ordering_of_approximations() {
        for (eps, mu) in [(1e-5, 1.8), (1e-6, 2.0)] {
            let s = SparseSpace::from_eps_mu(1_000_000_000, eps, mu).unwrap();
            let m = Regime::Moderate;
            let el = estimator_sup_risk_approx(EstimatorKind::SoftLinear, &s, m).unwrap();
            for k in [
                EstimatorKind::Soft,
                EstimatorKind::Hard,
                EstimatorKind::Linear,
            ] {
                assert!(
                    el < estimator_sup_risk_approx(k, &s, m).unwrap(),
                    "{k} at ε={eps}"
                );
            }
        }
    }

    #[test]
    fn classical_rate() {
        let s = sp(1000, 10, 1.0);
        assert!((classical_minimax(&s).unwrap() - 20.0 * 100f64.ln()).abs() < 1e-12);
        assert!((classical_minimax(&s).unwrap() - 92.103).abs() < 1e-3);
        let s = sp(2718281, 1000000, 1.0);
        assert!((classical_minimax(&s).unwrap() / 2e6 - 1.0).abs() < 1e-6);
        let s = sp(1_000_000, 999_999, 1.0);
        assert!(classical_minimax(&s).unwrap() < 1e-5 * 1e6);
        assert!(classical_minimax(&sp(10, 10, 1.0)).is_err());
    }
}
