//! Standard normal density and tail, Mills-ratio bounds, truncated tail
//! moments, and quadrature for Gaussian expectations.
//!
//! All functions here are pure.

mod erf;
pub mod quadrature;

pub use erf::{erfc, upper_tail};
pub use quadrature::{
    gauss_expect, gauss_expect_with_breaks, Quadrature, DEFAULT_HALFWIDTH, DEFAULT_TOL,
};

use crate::error::{Error, Result};

/// 1/√(2π)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// ln √(2π)
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * erf::exp_neg_half_sq(x.abs(), 0.0)
}

/// ln φ(x), finite for every finite x.
pub fn ln_phi(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    upper_tail(-x)
}

/// Truncated Mills-ratio series
/// Φ̃_l(λ) = φ(λ)/λ · Σ_{k=0}^{l} (−1)^k (2k−1)!! / λ^{2k}.
///
/// Odd orders bound 1 − Φ(λ) from below, even orders from above.
pub fn mills_bound(l: u32, lam: f64) -> Result<f64> {
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(Error::domain(
            "lam",
            format!("must be positive and finite, got {lam}"),
        ));
    }
    let inv2 = 1.0 / (lam * lam);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=l {
        term *= -((2 * k - 1) as f64) * inv2;
        sum += term;
    }
    Ok(phi(lam) / lam * sum)
}

/// I_k(a) = ∫_0^∞ t^k exp(−a t − t²/2) dt for a >= 0 and k ∈ {0, 1, 2}.
///
/// This is the tail moment J_k(a) = ∫_a^∞ (z−a)^k φ(z) dz divided by φ(a),
/// and stays representable long after J_k itself underflows.
pub fn scaled_tail_moment(k: u32, a: f64) -> f64 {
    debug_assert!(k <= 2 && a >= 0.0);
    if a < 10.0 {
        let m = upper_tail(a) / phi(a);
        return match k {
            0 => m,
            1 => 1.0 - a * m,
            _ => (1.0 + a * a) * m - a,
        };
    }
    // Σ_j (−1)^j (k+2j)!/(j! 2^j) a^{−(k+2j+1)}; the smallest term is about
    // e^{−a²/2} relative, so for a >= 10 the series is good to full precision.
    let inv2 = 1.0 / (a * a);
    let mut term = match k {
        0 => 1.0 / a,
        1 => inv2,
        _ => 2.0 * inv2 / a,
    };
    let mut sum = term;
    for j in 0..200u32 {
        let r = ((k + 2 * j + 1) * (k + 2 * j + 2)) as f64 / (2.0 * (j + 1) as f64);
        let next = -term * r * inv2;
        if next.abs() >= term.abs() || next.abs() < 1e-17 * sum.abs() {
            break;
        }
        term = next;
        sum += term;
    }
    sum
}

/// J_k(a) = E (Z − a)_+^k for k ∈ {0, 1, 2}.
pub fn tail_moment(k: u32, a: f64) -> f64 {
    debug_assert!(k <= 2);
    if a >= 0.0 {
        return phi(a) * scaled_tail_moment(k, a);
    }
    // no cancellation for negative a
    let q = upper_tail(a);
    match k {
        0 => q,
        1 => phi(a) - a * q,
        _ => (1.0 + a * a) * q - a * phi(a),
    }
}

/// ln J_k(a); −∞ only if a is infinite.
pub fn ln_tail_moment(k: u32, a: f64) -> f64 {
    if a >= 0.0 {
        ln_phi(a) + scaled_tail_moment(k, a).ln()
    } else {
        tail_moment(k, a).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0), 0.3989422804014327);
        assert!(rel(phi(1.0), 0.24197072451914337) < 1e-15);
        assert_eq!(phi(2.5), phi(-2.5));
        // extended-precision reference for φ(30)
        assert!(
            rel(phi(30.0), 1.4736461348785475e-196) < 2e-15,
            "{:e}",
            phi(30.0)
        );
    }

    #[test]
    fn upper_tail_reference_values() {
        // 30-digit references
        let cases = [
            (0.0, 0.5),
            (1.0, 0.158655253931457051414767454368),
            (2.0, 0.0227501319481792072002826371665),
            (5.0, 2.86651571879193911673752333863e-7),
            (10.0, 7.61985302416052606597337228e-24),
            (20.0, 2.75362411860623365495395309e-89),
            (30.0, 4.90671392714818706314985237e-198),
            (37.0, 5.72557122252457682e-300),
            (-1.0, 0.841344746068542948585232545632),
            (-8.0, 0.999999999999999377903942572822),
            (0.5, 0.308537538725986896),
            (1.5, 0.0668072012688580660),
            (3.0, 1.34989803163009452e-3),
        ];
        for (x, want) in cases {
            let got = upper_tail(x);
            assert!(
                rel(got, want) <= 1e-14,
                "x={x} got {got:e} want {want:e} rel {:e}",
                rel(got, want)
            );
        }
        let far = upper_tail(40.0);
        assert!(far < 1e-300 && !far.is_nan());
        assert_eq!(upper_tail(f64::INFINITY), 0.0);
        assert_eq!(upper_tail(f64::NEG_INFINITY), 1.0);
    }

    #[test]
    fn upper_tail_decreasing() {
        let mut prev = upper_tail(-8.0);
        for i in 1..=920 {
            let x = -8.0 + i as f64 * 0.05;
            let q = upper_tail(x);
            assert!(q < prev, "not decreasing at {x}");
            prev = q;
        }
    }

    #[test]
    fn erfc_matches_tail() {
        for &t in &[0.1, 0.9, 1.3, 3.0, 6.0] {
            let q = upper_tail(t * std::f64::consts::SQRT_2);
            assert!(rel(0.5 * erfc(t), q) < 1e-13);
        }
        assert_eq!(erfc(0.0), 1.0);
        assert!((erfc(-1.0) - (2.0 - erfc(1.0))).abs() < 1e-16);
    }

    #[test]
    fn mills_examples() {
        assert!(mills_bound(0, 0.0).is_err());
        assert!(mills_bound(3, -1.0).is_err());
        assert!(rel(mills_bound(0, 2.0).unwrap(), 0.026995483256594031) < 1e-15);
        for lam in [0.3, 1.0, 7.0] {
            assert_eq!(mills_bound(0, lam).unwrap(), phi(lam) / lam);
        }
        let q1 = upper_tail(1.0);
        assert!(mills_bound(1, 1.0).unwrap() <= q1 && q1 <= mills_bound(0, 1.0).unwrap());
    }

    #[test]
    fn mills_sandwich() {
        for lam in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let q = upper_tail(lam);
            for k in 0..3 {
                assert!(
                    mills_bound(2 * k + 1, lam).unwrap() <= q,
                    "lower fails λ={lam} k={k}"
                );
                assert!(
                    q <= mills_bound(2 * k, lam).unwrap(),
                    "upper fails λ={lam} k={k}"
                );
            }
        }
    }

    #[test]
    fn tail_moments_against_quadrature() {
        for &a in &[-6.0f64, -2.0, -0.3, 0.0, 0.7, 3.0, 6.5, 9.99, 10.0, 12.0] {
            for k in 0..3u32 {
                let q = gauss_expect_with_breaks(
                    |z| if z > a { (z - a).powi(k as i32) } else { 0.0 },
                    a.max(0.0),
                    12.0,
                    &[a],
                    1e-12 * tail_moment(k, a).max(1e-300),
                )
                .unwrap();
                let j = tail_moment(k, a);
                assert!(
                    rel(j, q.value) < 1e-11,
                    "a={a} k={k}: {j:e} vs {:e}",
                    q.value
                );
            }
        }
    }

    #[test]
    fn scaled_moments_continuous_at_switch() {
        for k in 0..3 {
            let lo = scaled_tail_moment(k, 10.0 - 1e-12);
            let hi = scaled_tail_moment(k, 10.0);
            assert!(rel(lo, hi) < 1e-11, "k={k}: {lo:e} {hi:e}");
        }
        // ln J stays finite far beyond underflow
        let l = ln_tail_moment(2, 100.0);
        assert!(l.is_finite() && l < -5000.0);
    }
}
