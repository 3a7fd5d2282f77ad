//! The coordinate-wise estimators and their tunings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// sign(y)(|y| − λ)₊
    Soft,
    /// y·1{|y| > λ}
    Hard,
    /// y/(1 + λ)
    Linear,
    /// soft(y, λ)/(1 + γ), the elastic-net proximal map
    SoftLinear,
    /// Constant zero.
    Zero,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Soft,
        EstimatorKind::Hard,
        EstimatorKind::Linear,
        EstimatorKind::SoftLinear,
        EstimatorKind::Zero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Soft => "soft",
            EstimatorKind::Hard => "hard",
            EstimatorKind::Linear => "linear",
            EstimatorKind::SoftLinear => "softlinear",
            EstimatorKind::Zero => "zero",
        }
    }

    /// Whether λ is measured in observation units (and hence scales with σ).
    pub fn lambda_has_units(self) -> bool {
        matches!(
            self,
            EstimatorKind::Soft | EstimatorKind::Hard | EstimatorKind::SoftLinear
        )
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain("estimator", format!("unknown estimator '{s}'")))
    }
}

/// Tuning pair (λ, γ). γ only matters for [`EstimatorKind::SoftLinear`] and
/// may be +∞ there, which yields the zero estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub lambda: f64,
    pub gamma: f64,
}

impl Tuning {
    pub fn new(lambda: f64, gamma: f64) -> Result<Self> {
        let t = Tuning { lambda, gamma };
        t.validate()?;
        Ok(t)
    }

    pub fn lambda(lambda: f64) -> Result<Self> {
        Self::new(lambda, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::domain(
                "lambda",
                format!("must be finite and >= 0, got {}", self.lambda),
            ));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::domain(
                "gamma",
                format!("must be >= 0, got {}", self.gamma),
            ));
        }
        Ok(())
    }
}

#[inline]
pub fn soft(y: f64, lam: f64) -> f64 {
    let m = y.abs() - lam;
    if m > 0.0 {
        m.copysign(y)
    } else {
        0.0
    }
}

#[inline]
pub fn hard(y: f64, lam: f64) -> f64 {
    if y.abs() > lam {
        y
    } else {
        0.0
    }
}

/// The estimator applied to one coordinate.
#[inline]
pub fn apply_scalar(kind: EstimatorKind, tuning: Tuning, y: f64) -> f64 {
    match kind {
        EstimatorKind::Soft => soft(y, tuning.lambda),
        EstimatorKind::Hard => hard(y, tuning.lambda),
        EstimatorKind::Linear => y / (1.0 + tuning.lambda),
        EstimatorKind::SoftLinear => {
            if tuning.gamma.is_infinite() {
                0.0
            } else {
                soft(y, tuning.lambda) / (1.0 + tuning.gamma)
            }
        }
        EstimatorKind::Zero => 0.0,
    }
}

pub fn apply(kind: EstimatorKind, tuning: Tuning, y: &[f64]) -> Vec<f64> {
    y.iter().map(|&v| apply_scalar(kind, tuning, v)).collect()
}

/// Tuning that makes the estimator commute with scaling the data by `t`:
/// `t·apply(kind, tuning, y) == apply(kind, scale_tuning(kind, tuning, t), t·y)`.
pub fn scale_tuning(kind: EstimatorKind, tuning: Tuning, t: f64) -> Result<Tuning> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(
            "t",
            format!("scale must be positive, got {t}"),
        ));
    }
    Ok(if kind.lambda_has_units() {
        Tuning {
            lambda: tuning.lambda * t,
            gamma: tuning.gamma,
        }
    } else {
        tuning
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tn(l: f64, g: f64) -> Tuning {
        Tuning::new(l, g).unwrap()
    }

    #[test]
    fn examples() {
        let y = [2.0, -0.5, -3.0];
        assert_eq!(apply(EstimatorKind::Soft, tn(0.0, 0.0), &y), y.to_vec());
        assert_eq!(
            apply(EstimatorKind::Soft, tn(1.0, 0.0), &y),
            vec![1.0, 0.0, -2.0]
        );
        assert_eq!(
            apply(EstimatorKind::SoftLinear, tn(1.0, 1.0), &[2.0]),
            vec![0.5]
        );
        assert_eq!(apply(EstimatorKind::Zero, tn(1.0, 1.0), &y), vec![0.0; 3]);
        assert_eq!(
            apply(EstimatorKind::SoftLinear, tn(0.5, f64::INFINITY), &y),
            vec![0.0; 3]
        );
    }

    #[test]
    fn hard_ties_map_to_zero() {
        assert_eq!(hard(1.0, 1.0), 0.0);
        assert_eq!(hard(-1.0, 1.0), 0.0);
        assert_eq!(hard(1.0 + 1e-15, 1.0), 1.0 + 1e-15);
    }

    #[test]
    fn scaling_examples() {
        let s = scale_tuning(EstimatorKind::Soft, tn(2.0, 0.0), 3.0).unwrap();
        assert_eq!(s.lambda, 6.0);
        let l = scale_tuning(EstimatorKind::Linear, tn(2.0, 0.0), 3.0).unwrap();
        assert_eq!(l.lambda, 2.0);
        let e = scale_tuning(EstimatorKind::SoftLinear, tn(2.0, 5.0), 3.0).unwrap();
        assert_eq!((e.lambda, e.gamma), (6.0, 5.0));
        assert!(scale_tuning(EstimatorKind::Soft, tn(2.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn invalid_tunings() {
        assert!(Tuning::new(-1.0, 0.0).is_err());
        assert!(Tuning::new(1.0, -0.1).is_err());
        assert!(Tuning::new(f64::NAN, 0.0).is_err());
        assert!(Tuning::new(1.0, f64::INFINITY).is_ok());
        assert!("bogus".parse::<EstimatorKind>().is_err());
        assert_eq!(
            "softlinear".parse::<EstimatorKind>().unwrap(),
            EstimatorKind::SoftLinear
        );
    }

    fn kind() -> impl Strategy<Value = EstimatorKind> {
        prop::sample::select(EstimatorKind::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn equivariance(k in kind(), lam in 0.0..10.0f64, gam in 0.0..10.0f64,
                        y in prop::collection::vec(-20.0..20.0f64, 1..20),
                        t in prop::sample::select(vec![0.5, 2.0, 10.0])) {
            let tu = tn(lam, gam);
            let lhs: Vec<f64> = apply(k, tu, &y).iter().map(|v| v * t).collect();
            let ty: Vec<f64> = y.iter().map(|v| v * t).collect();
            let rhs = apply(k, scale_tuning(k, tu, t).unwrap(), &ty);
            for (a, b) in lhs.iter().zip(&rhs) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{} vs {}", a, b);
            }
        }

        #[test]
        fn thresholded_coordinates_are_exact_zero(lam in 0.0..5.0f64, y in -5.0..5.0f64, gam in 0.0..3.0f64) {
            if y.abs() <= lam {
                for k in [EstimatorKind::Soft, EstimatorKind::Hard, EstimatorKind::SoftLinear, EstimatorKind::Zero] {
                    prop_assert_eq!(apply_scalar(k, tn(lam, gam), y), 0.0);
                }
            }
        }

        #[test]
        fn nesting(lam in 0.0..5.0f64, gam in 0.0..5.0f64, y in -10.0..10.0f64) {
            prop_assert_eq!(apply_scalar(EstimatorKind::SoftLinear, tn(lam, 0.0), y), soft(y, lam));
            prop_assert_eq!(apply_scalar(EstimatorKind::Linear, tn(0.0, 0.0), y), y);
            let a = apply_scalar(EstimatorKind::SoftLinear, tn(0.0, gam), y);
            let b = apply_scalar(EstimatorKind::Linear, tn(gam, 0.0), y);
            prop_assert_eq!(a, b);
        }
    }
}
