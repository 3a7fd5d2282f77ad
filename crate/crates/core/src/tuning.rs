//! Minimizing supremum risk over tunings, and closed-form recommended tunings.
//!
//! All searches run at unit noise on λ̃ = λ/σ (Linear: λ itself) and
//! minimize the excess F − εμ² (see [`crate::risk::sup_excess`]), which
//! keeps resolution where F has flattened to εμ² in double precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, Tuning};
use crate::minimax::Regime;
use crate::optimize::{golden_min, log_grid};
use crate::risk::{sup_excess, Excess};
use crate::space::SparseSpace;

pub const DEFAULT_GRID_POINTS: usize = 512;
pub const DEFAULT_REFINE_TOL: f64 = 1e-8;
/// Upper clamp for γ.
pub const GAMMA_MAX: f64 = 1e12;
const LAMBDA_MIN: f64 = 1e-4;
const GAMMA_MIN: f64 = 1e-6;
const GRID_2D: usize = 64;

/// Where an optimum sits relative to its search range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Interior,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub kind: EstimatorKind,
    /// λ in observation units (Linear: dimensionless) and γ.
    pub tuning: Tuning,
    /// Minimized supremum risk, in observation units.
    pub value: f64,
    pub evaluations: usize,
    pub lambda_boundary: Boundary,
    pub gamma_boundary: Boundary,
    /// γ reached the [`GAMMA_MAX`] clamp.
    pub gamma_clamped: bool,
}

impl TuningResult {
    pub fn on_boundary(&self) -> bool {
        self.lambda_boundary != Boundary::Interior || self.gamma_boundary != Boundary::Interior
    }
}

/// Upper end of the λ̃ search range.
///
/// The thresholding range max(10, 2(μ + ν)) is extended for the soft
/// families to twice (log(2/ε) + μ²/2)/μ, above which the optimal soft
/// threshold cannot lie; at small μ that bound exceeds 2(μ + ν) by far.
/// Linear searches up to 100/(εμ²), a hundred times its exact optimum.
pub fn lambda_max(kind: EstimatorKind, eps: f64, mu: f64) -> f64 {
    let base = 10f64.max(2.0 * (mu + crate::space::nu(eps)));
    match kind {
        EstimatorKind::Soft | EstimatorKind::SoftLinear if mu > 0.0 => {
            base.max(2.0 * ((2.0 / eps).ln() + 0.5 * mu * mu) / mu)
        }
        EstimatorKind::Linear if mu > 0.0 => base.max(100.0 / (eps * mu * mu)),
        _ => base,
    }
}

fn first_min<T: PartialOrd + Copy>(vals: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v < vals[best] {
            best = i;
        }
    }
    best
}

fn finish(
    kind: EstimatorKind,
    space: &SparseSpace,
    lam: f64,
    gamma: f64,
    key: Excess,
) -> (Tuning, f64) {
    let eps = space.eps();
    let mu = space.mu();
    let value = space.scale() * eps * mu * mu + space.scale() * key.to_f64();
    let lambda = if kind.lambda_has_units() {
        lam * space.sigma
    } else {
        lam
    };
    (Tuning { lambda, gamma }, value)
}

/// Minimizes sup_risk over λ for Soft, Hard or Linear: a log-spaced grid
/// on [1e−4, λ̃_max] plus λ̃ = 0, then golden-section refinement inside the
/// bracket of the best grid point. Ties go to the smaller λ̃.
pub fn optimize_lambda(
    kind: EstimatorKind,
    space: &SparseSpace,
    grid_points: usize,
    refine_tol: f64,
) -> Result<TuningResult> {
    space.validate()?;
    if !matches!(
        kind,
        EstimatorKind::Soft | EstimatorKind::Hard | EstimatorKind::Linear
    ) {
        return Err(Error::Unsupported(format!(
            "optimize_lambda handles soft, hard and linear, not {kind}"
        )));
    }
    if grid_points < 3 {
        return Err(Error::domain(
            "grid_points",
            format!("need at least 3, got {grid_points}"),
        ));
    }
    if !(refine_tol > 0.0) {
        return Err(Error::domain("refine_tol", "must be positive"));
    }
    let (eps, mu) = (space.eps(), space.mu());
    let top = lambda_max(kind, eps, mu);
    let key = |l: f64| sup_excess(kind, l, 0.0, eps, mu);

    let mut grid = vec![0.0];
    grid.extend(log_grid(LAMBDA_MIN, top, grid_points));
    let vals: Vec<Excess> = grid.iter().map(|&l| key(l)).collect();
    let i = first_min(&vals);
    let mut evaluations = grid.len();

    let (mut lam, mut best) = (grid[i], vals[i]);
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    if hi > lo {
        let (l, v, n) = golden_min(key, lo, hi, refine_tol * lam.max(1.0));
        evaluations += n;
        if v < best {
            lam = l;
            best = v;
        }
    }
    let lambda_boundary = if lam == 0.0 {
        Boundary::Lower
    } else if lam == top {
        Boundary::Upper
    } else {
        Boundary::Interior
    };
    let (tuning, value) = finish(kind, space, lam, 0.0, best);
    Ok(TuningResult {
        kind,
        tuning,
        value,
        evaluations,
        lambda_boundary,
        gamma_boundary: Boundary::Interior,
        gamma_clamped: false,
    })
}

/// Relative improvement of `new` over `old` (0 if not better).
fn gain(old: Excess, new: Excess) -> f64 {
    if !(new < old) {
        return 0.0;
    }
    if old.sign() > 0.0 && new.sign() > 0.0 {
        1.0 - (new.ln_abs() - old.ln_abs()).exp()
    } else if old.sign() < 0.0 && new.sign() < 0.0 {
        (new.ln_abs() - old.ln_abs()).exp() - 1.0
    } else {
        f64::INFINITY
    }
}

/// Two-dimensional minimization of sup_risk for SoftLinear over (λ̃, γ).
///
/// A 65×65 log grid (each axis with its zero endpoint) plus the recommended
/// moderate-SNR tuning seeds coordinate descent: alternating golden-section
/// passes on λ̃ and on log(1 + γ), stopping once a full pass improves the
/// excess by less than `refine_tol` relative.
pub fn optimize_lambda_gamma(space: &SparseSpace, refine_tol: f64) -> Result<TuningResult> {
    space.validate()?;
    if !(refine_tol > 0.0) {
        return Err(Error::domain("refine_tol", "must be positive"));
    }
    let kind = EstimatorKind::SoftLinear;
    let (eps, mu) = (space.eps(), space.mu());
    let top = lambda_max(kind, eps, mu);
    let u_top = GAMMA_MAX.ln_1p();
    let key = |l: f64, g: f64| sup_excess(kind, l, g, eps, mu);

    let mut lams = vec![0.0];
    lams.extend(log_grid(LAMBDA_MIN, top, GRID_2D));
    let mut gams = vec![0.0];
    gams.extend(log_grid(GAMMA_MIN, GAMMA_MAX, GRID_2D));

    let seed = closed_form_tuning(eps, mu);
    let mut cur = (seed.0.min(top), seed.1.clamp(0.0, GAMMA_MAX));
    let mut best = key(cur.0, cur.1);
    let mut evaluations = 1;
    for &l in &lams {
        for &g in &gams {
            let v = key(l, g);
            if v < best {
                best = v;
                cur = (l, g);
            }
        }
    }
    evaluations += lams.len() * gams.len();

    let lam_ratio = (top / LAMBDA_MIN).powf(1.0 / (GRID_2D - 1) as f64);
    let u_step = (GAMMA_MAX / GAMMA_MIN).ln() / (GRID_2D - 1) as f64;
    for _ in 0..500 {
        let start = best;
        // λ̃ pass
        let (lo, hi) = if cur.0 == 0.0 {
            (0.0, lams[1])
        } else {
            (cur.0 / lam_ratio, (cur.0 * lam_ratio).min(top))
        };
        let g = cur.1;
        let (l, v, n) = golden_min(|l| key(l, g), lo, hi, refine_tol * cur.0.max(1.0));
        evaluations += n;
        if v < best {
            best = v;
            cur.0 = l;
        }
        // γ pass in u = log(1 + γ)
        let u = cur.1.ln_1p();
        let (lo, hi) = ((u - u_step).max(0.0), (u + u_step).min(u_top));
        let l = cur.0;
        let (u, v, n) = golden_min(|u| key(l, u.exp_m1()), lo, hi, refine_tol * u.max(1.0));
        evaluations += n;
        if v < best {
            best = v;
            cur.1 = u.exp_m1();
        }
        // endpoints are not visited by golden section
        for (l, g) in [(0.0, cur.1), (top, cur.1), (cur.0, 0.0), (cur.0, GAMMA_MAX)] {
            let v = key(l, g);
            evaluations += 1;
            if v < best {
                best = v;
                cur = (l, g);
            }
        }
        if gain(start, best) < refine_tol {
            break;
        }
    }
    let bound = |x: f64, hi: f64| {
        if x <= 0.0 {
            Boundary::Lower
        } else if x >= hi {
            Boundary::Upper
        } else {
            Boundary::Interior
        }
    };
    let (tuning, value) = finish(kind, space, cur.0, cur.1, best);
    Ok(TuningResult {
        kind,
        tuning,
        value,
        evaluations,
        lambda_boundary: bound(cur.0, top),
        gamma_boundary: bound(cur.1, GAMMA_MAX),
        gamma_clamped: cur.1 >= GAMMA_MAX,
    })
}

/// Either optimizer, dispatched on the estimator.
pub fn optimize(
    kind: EstimatorKind,
    space: &SparseSpace,
    grid_points: usize,
    refine_tol: f64,
) -> Result<TuningResult> {
    match kind {
        EstimatorKind::SoftLinear => optimize_lambda_gamma(space, refine_tol),
        EstimatorKind::Zero => {
            let (tuning, value) = finish(kind, space, 0.0, 0.0, Excess::ZERO);
            Ok(TuningResult {
                kind,
                tuning,
                value,
                evaluations: 0,
                lambda_boundary: Boundary::Interior,
                gamma_boundary: Boundary::Interior,
                gamma_clamped: false,
            })
        }
        _ => optimize_lambda(kind, space, grid_points, refine_tol),
    }
}

/// (λ̃, γ) = (2μ, (2εμ² e^{3μ²/2})⁻¹ − 1), unclamped.
fn closed_form_tuning(eps: f64, mu: f64) -> (f64, f64) {
    let ln_denom = (2.0 * eps * mu * mu).ln() + 1.5 * mu * mu;
    (2.0 * mu, (-ln_denom).exp() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub tuning: Tuning,
    /// The closed-form γ was negative and has been set to 0.
    pub gamma_clamped: bool,
}

/// The closed-form tuning suggested for an estimator in a regime.
///
/// Soft and Hard: λ = σ√(2 log ε⁻¹) in every regime. Linear, low SNR:
/// λ = (εμ²)⁻¹. SoftLinear, moderate SNR: λ = 2σμ and
/// γ = (2εμ² e^{3μ²/2})⁻¹ − 1, clamped at 0.
pub fn recommended_tuning(
    kind: EstimatorKind,
    space: &SparseSpace,
    regime: Regime,
) -> Result<Recommendation> {
    space.validate()?;
    let (eps, mu, sigma) = (space.eps(), space.mu(), space.sigma);
    let plain = |lambda: f64| Recommendation {
        tuning: Tuning { lambda, gamma: 0.0 },
        gamma_clamped: false,
    };
    match (kind, regime) {
        (EstimatorKind::Soft | EstimatorKind::Hard, _) => Ok(plain(sigma * space.nu())),
        (EstimatorKind::Linear, Regime::Low) => Ok(plain(1.0 / (eps * mu * mu))),
        (EstimatorKind::SoftLinear, Regime::Moderate) => {
            let (l, g) = closed_form_tuning(eps, mu);
            Ok(Recommendation {
                tuning: Tuning {
                    lambda: sigma * l,
                    gamma: g.max(0.0),
                },
                gamma_clamped: g < 0.0,
            })
        }
        _ => Err(Error::Unsupported(format!(
            "no recommended tuning for {kind} in the {regime} regime"
        ))),
    }
}

/// Window [ν² − c₁ log log ν, ν² + c₂ ν √(2 log ν)] for λ²/σ² within which
/// hard thresholding stays second-order optimal at high SNR.
pub fn hard_tuning_window(space: &SparseSpace, c1: f64, c2: f64) -> Result<(f64, f64)> {
    space.validate()?;
    if !(0.0..1.0).contains(&c1) {
        return Err(Error::domain("c1", format!("must lie in [0, 1), got {c1}")));
    }
    if !(c2 > 0.0) || !c2.is_finite() {
        return Err(Error::domain("c2", format!("must be positive, got {c2}")));
    }
    let nu = space.nu();
    if !(nu > std::f64::consts::E) {
        return Err(Error::domain(
            "eps",
            format!("need ν = √(2 log ε⁻¹) > e, got ν = {nu}"),
        ));
    }
    let nn = nu * nu;
    Ok((
        nn - c1 * nu.ln().ln(),
        nn + c2 * nu * (2.0 * nu.ln()).sqrt(),
    ))
}

/// Bounds of the open interval that contains λ*μ for the optimal soft
/// threshold at small ε and μ.
pub fn soft_optimum_window(eps: f64, mu: f64) -> (f64, f64) {
    let l = (2.0 / eps).ln();
    (l + 0.5 * mu * mu - 2.0 * l.ln(), l + 0.5 * mu * mu)
}
