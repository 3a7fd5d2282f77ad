//! Deterministic simulation sweeps: constant-magnitude sparse signals,
//! grid-search tuning on the reported replicates, scaled MSE with t
//! confidence intervals, and CSV output.
//!
//! Tuning is picked on the same replicates that are reported, so the MSEs
//! are oracle (optimistic) values by construction.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::estimators::{hard, soft, EstimatorKind, Tuning};
use crate::minimax::{classify_regime, DEFAULT_HIGH_CUT, DEFAULT_LOW_CUT};
use crate::optimize::log_grid;
use crate::rng::{self, Moments};
use crate::space::SparseSpace;
use crate::tuning::recommended_tuning;

pub const CSV_HEADER: &str = "estimator,n,k,tau,sigma,mu,sweep_value,mse_scaled,ci_low,ci_high,lambda_opt,gamma_opt,reps,seed";
pub const DEFAULT_TUNING_GRID: usize = 200;
/// Per-axis size of the SoftLinear (λ, γ) product grid, zero included.
pub const ELASTIC_AXIS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SparsityRule {
    /// k = ⌊n^{2/3}⌋
    #[serde(rename = "pow2_3")]
    Pow2_3,
    /// k = ⌊n^{3/4}⌋
    #[serde(rename = "pow3_4")]
    Pow3_4,
    /// k = ⌊n^{1/2}⌋
    #[serde(rename = "pow1_2")]
    Pow1_2,
    #[serde(rename = "explicit")]
    Explicit(u64),
}

/// Largest k with k^q ≤ n^p, in exact integer arithmetic.
fn floor_root_power(n: u64, p: u32, q: u32) -> u64 {
    let target = (n as u128).pow(p);
    let mut k = ((n as f64).powf(p as f64 / q as f64)).floor() as u128;
    while k > 0 && k.pow(q) > target {
        k -= 1;
    }
    while (k + 1).pow(q) <= target {
        k += 1;
    }
    k as u64
}

impl SparsityRule {
    pub fn k(self, n: u64) -> u64 {
        match self {
            SparsityRule::Pow2_3 => floor_root_power(n, 2, 3),
            SparsityRule::Pow3_4 => floor_root_power(n, 3, 4),
            SparsityRule::Pow1_2 => floor_root_power(n, 1, 2),
            SparsityRule::Explicit(k) => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// Grid values are noise levels σ.
    Sigma,
    /// Grid values are SNRs μ; σ = τ/μ.
    Mu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: u64,
    pub sparsity_rule: SparsityRule,
    pub tau: f64,
    pub sweep: SweepKind,
    pub sweep_grid: Vec<f64>,
    pub reps: usize,
    pub master_seed: u64,
    pub estimators: Vec<EstimatorKind>,
    #[serde(default = "default_grid_size")]
    pub tuning_grid_size: usize,
    /// Magnitude of each nonzero coordinate; defaults to `tau`.
    #[serde(default)]
    pub signal_value: Option<f64>,
}

fn default_grid_size() -> usize {
    DEFAULT_TUNING_GRID
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        SimConfig::from_json(&text)
    }

    pub fn k(&self) -> u64 {
        self.sparsity_rule.k(self.n)
    }

    pub fn signal(&self) -> f64 {
        self.signal_value.unwrap_or(self.tau)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        let k = self.k();
        if k == 0 || k > self.n {
            return bad(format!(
                "sparsity rule gives k = {k}, need 1 ≤ k ≤ n = {}",
                self.n
            ));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return bad(format!("tau must be positive and finite, got {}", self.tau));
        }
        if let Some(v) = self.signal_value {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("signal_value must be positive and finite, got {v}"));
            }
        }
        if self.sweep_grid.is_empty() {
            return bad("sweep_grid is empty".into());
        }
        if self
            .sweep_grid
            .iter()
            .any(|&v| !(v > 0.0) || !v.is_finite())
        {
            return bad("sweep_grid values must be positive and finite".into());
        }
        if self.sweep_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sweep_grid must be strictly increasing".into());
        }
        if self.reps == 0 {
            return bad("reps must be positive".into());
        }
        if self.estimators.is_empty() {
            return bad("estimators is empty".into());
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(e) {
                return bad(format!("estimator {e} listed twice"));
            }
        }
        if self.tuning_grid_size < 2 {
            return bad(format!(
                "tuning_grid_size must be at least 2, got {}",
                self.tuning_grid_size
            ));
        }
        Ok(())
    }

    /// Noise level of sweep cell `i`.
    pub fn sigma(&self, i: usize) -> f64 {
        match self.sweep {
            SweepKind::Sigma => self.sweep_grid[i],
            SweepKind::Mu => self.tau / self.sweep_grid[i],
        }
    }

    /// The space the cell's signals live on: k spikes of the signal value at
    /// the cell's noise level.
    pub fn cell_space(&self, i: usize) -> Result<SparseSpace> {
        SparseSpace::new(self.n, self.k(), self.signal(), self.sigma(i))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub estimator: EstimatorKind,
    pub n: u64,
    pub k: u64,
    pub tau: f64,
    pub sigma: f64,
    /// Per-coordinate SNR signal_value/σ.
    pub mu: f64,
    pub sweep_value: f64,
    pub mse_scaled: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub lambda_opt: f64,
    pub gamma_opt: f64,
    pub reps: usize,
    pub seed: u64,
    /// Set when this cell failed numerically; the numeric fields are NaN.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A length-n vector with exactly k coordinates equal to `value`, chosen
/// uniformly from the stream keyed by `seed`.
pub fn gen_signal(n: u64, k: u64, value: f64, seed: u64) -> Result<Vec<f64>> {
    if k > n {
        return Err(Error::domain("k", format!("k = {k} exceeds n = {n}")));
    }
    let mut theta = vec![0.0; n as usize];
    let mut rng = rng::stream(seed, &[]);
    for i in index::sample(&mut rng, n as usize, k as usize) {
        theta[i] = value;
    }
    Ok(theta)
}

/// (θ, y) for replicate `rep` of sweep cell `cell`.
fn replicate(cfg: &SimConfig, cell: usize, rep: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let theta = gen_signal(
        cfg.n,
        cfg.k(),
        cfg.signal(),
        rng::derive(cfg.master_seed, &[cell as u64, rep as u64, 0]),
    )?;
    let sigma = cfg.sigma(cell);
    let mut noise = rng::stream(cfg.master_seed, &[cell as u64, rep as u64, 1]);
    let y = theta
        .iter()
        .map(|&t| {
            let z: f64 = StandardNormal.sample(&mut noise);
            t + sigma * z
        })
        .collect();
    Ok((theta, y))
}

fn insert_sorted(grid: &mut Vec<f64>, v: f64) {
    if v.is_finite() && v >= 0.0 && !grid.contains(&v) {
        let at = grid.partition_point(|&g| g < v);
        grid.insert(at, v);
    }
}

/// Candidate tunings for one cell, ascending in λ then γ.
fn candidates(cfg: &SimConfig, cell: usize, kind: EstimatorKind) -> Result<Vec<Tuning>> {
    let space = cfg.cell_space(cell)?;
    let sigma = space.sigma;
    let top = (3.0 * (space.mu() + space.nu())).max(2e-3);
    let rec = classify_regime(&space, DEFAULT_LOW_CUT, DEFAULT_HIGH_CUT)
        .ok()
        .and_then(|c| recommended_tuning(kind, &space, c.regime).ok())
        .map(|r| r.tuning);
    let g = cfg.tuning_grid_size;
    let plain = |grid: Vec<f64>| {
        grid.into_iter()
            .map(|lambda| Tuning { lambda, gamma: 0.0 })
            .collect()
    };
    Ok(match kind {
        EstimatorKind::Soft | EstimatorKind::Hard => {
            let mut lams: Vec<f64> = log_grid(1e-3, top, g)
                .into_iter()
                .map(|l| l * sigma)
                .collect();
            if let Some(r) = rec {
                insert_sorted(&mut lams, r.lambda);
            }
            plain(lams)
        }
        EstimatorKind::Linear => {
            let mut lams = log_grid(1e-4, 1e6, g);
            if let Some(r) = rec {
                insert_sorted(&mut lams, r.lambda);
            }
            plain(lams)
        }
        EstimatorKind::SoftLinear => {
            let mut lams: Vec<f64> = std::iter::once(0.0)
                .chain(
                    log_grid(1e-3, top, ELASTIC_AXIS - 1)
                        .into_iter()
                        .map(|l| l * sigma),
                )
                .collect();
            let mut gams: Vec<f64> = std::iter::once(0.0)
                .chain(log_grid(1e-4, 1e6, ELASTIC_AXIS - 1))
                .collect();
            if let Some(r) = rec {
                insert_sorted(&mut lams, r.lambda);
                insert_sorted(&mut gams, r.gamma);
            }
            lams.iter()
                .flat_map(|&lambda| gams.iter().map(move |&gamma| Tuning { lambda, gamma }))
                .collect()
        }
        EstimatorKind::Zero => vec![Tuning {
            lambda: 0.0,
            gamma: 0.0,
        }],
    })
}

/// Squared error ‖η(y) − θ‖² for every candidate, in candidate order.
fn losses(kind: EstimatorKind, tunings: &[Tuning], theta: &[f64], y: &[f64]) -> Vec<f64> {
    let c: f64 = theta.iter().map(|t| t * t).sum();
    // ‖s·x − θ‖² = s²Σx² − 2sΣxθ + Σθ²
    let shrunk = |xx: f64, xt: f64, gamma: f64| {
        let s = 1.0 / (1.0 + gamma);
        (s * s * xx - 2.0 * s * xt + c).max(0.0)
    };
    match kind {
        EstimatorKind::Zero => vec![c; tunings.len()],
        EstimatorKind::Soft | EstimatorKind::Hard => tunings
            .iter()
            .map(|t| {
                let f = if kind == EstimatorKind::Soft {
                    soft
                } else {
                    hard
                };
                theta
                    .iter()
                    .zip(y)
                    .map(|(&th, &v)| (f(v, t.lambda) - th).powi(2))
                    .sum()
            })
            .collect(),
        EstimatorKind::Linear => {
            let yy: f64 = y.iter().map(|v| v * v).sum();
            let yt: f64 = y.iter().zip(theta).map(|(v, t)| v * t).sum();
            tunings.iter().map(|t| shrunk(yy, yt, t.lambda)).collect()
        }
        EstimatorKind::SoftLinear => {
            let mut out = Vec::with_capacity(tunings.len());
            let mut i = 0;
            while i < tunings.len() {
                let lam = tunings[i].lambda;
                let (mut ss, mut st) = (0.0, 0.0);
                for (&th, &v) in theta.iter().zip(y) {
                    let s = soft(v, lam);
                    ss += s * s;
                    st += s * th;
                }
                while i < tunings.len() && tunings[i].lambda == lam {
                    let g = tunings[i].gamma;
                    out.push(if g.is_infinite() {
                        c
                    } else {
                        shrunk(ss, st, g)
                    });
                    i += 1;
                }
            }
            out
        }
    }
}

/// Per-replicate scaled MSE of each candidate: `[candidate][rep]`.
fn scaled_losses(
    cfg: &SimConfig,
    cell: usize,
    kind: EstimatorKind,
    tunings: &[Tuning],
) -> Result<Vec<Vec<f64>>> {
    let mut table = vec![Vec::with_capacity(cfg.reps); tunings.len()];
    for rep in 0..cfg.reps {
        let (theta, y) = replicate(cfg, cell, rep)?;
        let norm: f64 = theta.iter().map(|t| t * t).sum();
        let l = if kind == EstimatorKind::Zero {
            vec![1.0]
        } else {
            losses(kind, tunings, &theta, &y)
        };
        for (row, v) in table.iter_mut().zip(l) {
            row.push(if kind == EstimatorKind::Zero {
                v
            } else {
                v / norm
            });
        }
    }
    Ok(table)
}

fn t_quantile(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .map(|t| t.inverse_cdf(0.975))
        .unwrap_or(f64::NAN)
}

fn summarize(values: &[f64]) -> Moments {
    let mut m = Moments::default();
    values.iter().for_each(|&v| m.push(v));
    m
}

/// Mean and standard error of the scaled MSE of a fixed tuning, on the
/// same replicates a sweep cell uses.
pub fn evaluate_tuning(
    cfg: &SimConfig,
    cell: usize,
    kind: EstimatorKind,
    tuning: Tuning,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    tuning.validate()?;
    let m = summarize(&scaled_losses(cfg, cell, kind, &[tuning])?[0]);
    Ok((m.mean, m.std_error()))
}

fn run_cell(cfg: &SimConfig, cell: usize, kind: EstimatorKind) -> SimResult {
    let sigma = cfg.sigma(cell);
    let mut row = SimResult {
        estimator: kind,
        n: cfg.n,
        k: cfg.k(),
        tau: cfg.tau,
        sigma,
        mu: cfg.signal() / sigma,
        sweep_value: cfg.sweep_grid[cell],
        mse_scaled: f64::NAN,
        ci_low: f64::NAN,
        ci_high: f64::NAN,
        lambda_opt: f64::NAN,
        gamma_opt: f64::NAN,
        reps: cfg.reps,
        seed: cfg.master_seed,
        error: None,
    };
    let outcome = candidates(cfg, cell, kind).and_then(|tunings| {
        let table = scaled_losses(cfg, cell, kind, &tunings)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, vals) in table.iter().enumerate() {
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            // strict: ties stay with the smaller tuning
            if mean.is_finite() && best.is_none_or(|(_, b)| mean < b) {
                best = Some((i, mean));
            }
        }
        let (i, _) =
            best.ok_or_else(|| Error::Unsupported("no finite MSE on the tuning grid".into()))?;
        Ok((tunings[i], summarize(&table[i])))
    });
    match outcome {
        Ok((t, m)) => {
            let half = if cfg.reps >= 2 {
                t_quantile(cfg.reps - 1) * m.std_error()
            } else {
                0.0
            };
            row.mse_scaled = m.mean;
            row.ci_low = m.mean - half;
            row.ci_high = m.mean + half;
            row.lambda_opt = t.lambda;
            row.gamma_opt = t.gamma;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every (estimator, sweep value) cell. Rows come back ordered by
/// estimator, then sweep value.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<SimResult>> {
    cfg.validate()?;
    let mut kinds = cfg.estimators.clone();
    kinds.sort_by_key(|k| EstimatorKind::ALL.iter().position(|a| a == k));
    let jobs: Vec<(EstimatorKind, usize)> = kinds
        .iter()
        .flat_map(|&k| (0..cfg.sweep_grid.len()).map(move |c| (k, c)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(kind, cell)| run_cell(cfg, cell, kind))
        .collect())
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV line, without the newline.
pub fn csv_row(r: &SimResult) -> String {
    [
        r.estimator.name().to_string(),
        r.n.to_string(),
        r.k.to_string(),
        real(r.tau),
        real(r.sigma),
        real(r.mu),
        real(r.sweep_value),
        real(r.mse_scaled),
        real(r.ci_low),
        real(r.ci_high),
        real(r.lambda_opt),
        real(r.gamma_opt),
        r.reps.to_string(),
        r.seed.to_string(),
    ]
    .join(",")
}

/// Writes the header and one line per result.
pub fn write_csv(results: &[SimResult], path: &Path) -> Result<()> {
    if results.is_empty() {
        return Err(Error::Config("no results to write".into()));
    }
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for r in results {
        text.push_str(&csv_row(r));
        text.push('\n');
    }
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::upper_tail;
    use crate::risk::{risk, unit_lambda};

    fn cfg(sweep: SweepKind, grid: Vec<f64>, estimators: Vec<EstimatorKind>) -> SimConfig {
        SimConfig {
            n: 500,
            sparsity_rule: SparsityRule::Pow2_3,
            tau: 1.5,
            sweep,
            sweep_grid: grid,
            reps: 20,
            master_seed: 2024,
            estimators,
            tuning_grid_size: 200,
            signal_value: None,
        }
    }

    #[test]
    fn sparsity_rules_are_exact_floors() {
        assert_eq!(SparsityRule::Pow2_3.k(500), 62);
        assert_eq!(SparsityRule::Pow2_3.k(1000), 100);
        assert_eq!(SparsityRule::Pow2_3.k(999), 99);
        assert_eq!(SparsityRule::Pow3_4.k(10_000), 1000);
        assert_eq!(SparsityRule::Pow3_4.k(9_999), 999);
        assert_eq!(SparsityRule::Pow1_2.k(10_000), 100);
        assert_eq!(SparsityRule::Pow1_2.k(9_999), 99);
        assert_eq!(SparsityRule::Explicit(7).k(10), 7);
        for n in 1..3000u64 {
            let k = SparsityRule::Pow2_3.k(n) as u128;
            assert!(k.pow(3) <= (n as u128).pow(2) && (k + 1).pow(3) > (n as u128).pow(2));
        }
    }

    #[test]
    fn config_json() {
        let text = r#"{"n": 500, "sparsity_rule": "pow2_3", "tau": 1.5, "sweep": "sigma",
            "sweep_grid": [0.1, 1.0], "reps": 20, "master_seed": 1,
            "estimators": ["soft", "hard", "linear", "softlinear"]}"#;
        let c = SimConfig::from_json(text).unwrap();
        assert_eq!(c.tuning_grid_size, 200);
        assert_eq!(c.signal(), 1.5);
        assert_eq!(c.k(), 62);
        let c = SimConfig::from_json(&text.replace("\"pow2_3\"", "{\"explicit\": 9}")).unwrap();
        assert_eq!(c.k(), 9);
        assert!(matches!(
            SimConfig::from_json(&text.replace("\"reps\"", "\"rep\"")),
            Err(Error::Config(_))
        ));
        let extra = text.replace("\"tau\"", "\"colour\": 1, \"tau\"");
        assert!(SimConfig::from_json(&extra).is_err());
        assert!(SimConfig::from_json(&text.replace("[0.1, 1.0]", "[1.0, 0.1]")).is_err());
        assert!(SimConfig::from_json(&text.replace("[0.1, 1.0]", "[]")).is_err());
        assert!(SimConfig::from_json(&text.replace("\"pow2_3\"", "{\"explicit\": 501}")).is_err());
    }

    #[test]
    fn signal_examples() {
        assert_eq!(gen_signal(5, 5, 2.0, 1).unwrap(), vec![2.0; 5]);
        let t = gen_signal(10_000, 100, 10.0, 3).unwrap();
        assert_eq!(t.iter().filter(|&&v| v != 0.0).count(), 100);
        assert_eq!(t.iter().map(|v| v * v).sum::<f64>(), 10_000.0);
        assert_eq!(t, gen_signal(10_000, 100, 10.0, 3).unwrap());
        assert_ne!(t, gen_signal(10_000, 100, 10.0, 4).unwrap());
        assert!(gen_signal(3, 4, 1.0, 0).is_err());
    }

    #[test]
    fn zero_estimator_is_calibration_row() {
        let c = cfg(
            SweepKind::Sigma,
            vec![0.01, 1.0, 100.0],
            vec![EstimatorKind::Zero],
        );
        for r in run_sweep(&c).unwrap() {
            assert_eq!(r.mse_scaled, 1.0);
            assert_eq!((r.ci_low, r.ci_high), (1.0, 1.0));
        }
    }

    #[test]
    fn noiseless_hard_recovers_signal() {
        let c = cfg(SweepKind::Sigma, vec![1e-6], vec![EstimatorKind::Hard]);
        let r = &run_sweep(&c).unwrap()[0];
        assert!(r.mse_scaled < 1e-9, "{r:?}");
        assert!(r.ci_low <= r.mse_scaled && r.mse_scaled <= r.ci_high);
    }

    #[test]
    fn rows_ordered_and_consistent() {
        let c = cfg(
            SweepKind::Mu,
            vec![0.5, 2.0, 6.0],
            vec![
                EstimatorKind::Linear,
                EstimatorKind::Soft,
                EstimatorKind::SoftLinear,
            ],
        );
        let rows = run_sweep(&c).unwrap();
        let order: Vec<_> = rows.iter().map(|r| (r.estimator, r.sweep_value)).collect();
        let mut want = vec![];
        for e in [
            EstimatorKind::Soft,
            EstimatorKind::Linear,
            EstimatorKind::SoftLinear,
        ] {
            for v in [0.5, 2.0, 6.0] {
                want.push((e, v));
            }
        }
        assert_eq!(order, want);
        for r in &rows {
            assert!(r.error.is_none());
            assert!(r.mse_scaled >= 0.0 && r.ci_low <= r.mse_scaled && r.mse_scaled <= r.ci_high);
            assert!((r.mu - r.sweep_value).abs() < 1e-12 * r.mu);
            assert!((r.sigma - 1.5 / r.sweep_value).abs() < 1e-15);
        }
        // the elastic grid contains every soft (λ, 0) and linear (0, γ) pair
        // only approximately, so compare loosely
        for v in 0..3 {
            let el = rows[6 + v].mse_scaled;
            assert!(el <= rows[v].mse_scaled * 1.02 && el <= rows[3 + v].mse_scaled * 1.02);
        }
    }

    #[test]
    fn oracle_cross_check() {
        let mut c = cfg(
            SweepKind::Sigma,
            vec![0.3, 0.5, 1.0, 3.0],
            vec![
                EstimatorKind::Soft,
                EstimatorKind::Hard,
                EstimatorKind::Linear,
            ],
        );
        c.n = 2000;
        c.reps = 40;
        for r in run_sweep(&c).unwrap() {
            let cell = c
                .sweep_grid
                .iter()
                .position(|&v| v == r.sweep_value)
                .unwrap();
            let space = c.cell_space(cell).unwrap();
            let t = Tuning {
                lambda: r.lambda_opt,
                gamma: r.gamma_opt,
            };
            let (mean, se) = evaluate_tuning(&c, cell, r.estimator, t).unwrap();
            assert_eq!(mean, r.mse_scaled);
            let norm = space.k as f64 * space.tau * space.tau;
            let lam = unit_lambda(r.estimator, t, space.sigma);
            // every nonzero coordinate equals the signal value, so no inner sup
            let ut = Tuning {
                lambda: lam,
                gamma: t.gamma,
            };
            let eps = space.eps();
            let want = space.scale()
                * ((1.0 - eps) * risk(r.estimator, ut, 0.0)
                    + eps * risk(r.estimator, ut, space.mu()));
            if se == 0.0 {
                // every replicate identical (threshold above all data): the
                // 4-SE band is empty, so check the kill-all value instead
                // band is empty; instead, seeing no coordinate survive in any
                // replicate must be plausible (rule of three)
                assert_eq!(mean, 1.0, "{r:?}");
                let (nk, kk, mu) = ((space.n - space.k) as f64, space.k as f64, space.mu());
                let survivors =
                    nk * 2.0 * upper_tail(lam) + kk * (upper_tail(lam - mu) + upper_tail(lam + mu));
                assert!(
                    c.reps as f64 * survivors <= 3.0,
                    "{r:?}: {survivors} expected survivors per rep"
                );
            } else {
                assert!(
                    (mean * norm - want).abs() <= 4.0 * se * norm,
                    "{r:?}: {} vs {want}",
                    mean * norm
                );
            }
        }
    }

    #[test]
    fn grid_search_dominates_recommendation() {
        let c = cfg(
            SweepKind::Sigma,
            vec![0.05, 0.4, 2.0],
            vec![EstimatorKind::Soft, EstimatorKind::Hard],
        );
        for r in run_sweep(&c).unwrap() {
            let cell = c
                .sweep_grid
                .iter()
                .position(|&v| v == r.sweep_value)
                .unwrap();
            let space = c.cell_space(cell).unwrap();
            let regime = classify_regime(&space, DEFAULT_LOW_CUT, DEFAULT_HIGH_CUT)
                .unwrap()
                .regime;
            let rec = recommended_tuning(r.estimator, &space, regime)
                .unwrap()
                .tuning;
            let (fixed, _) = evaluate_tuning(&c, cell, r.estimator, rec).unwrap();
            assert!(r.mse_scaled <= fixed, "{r:?} vs {fixed}");
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let c = cfg(
            SweepKind::Sigma,
            vec![0.2, 1.0],
            vec![EstimatorKind::Soft, EstimatorKind::SoftLinear],
        );
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| run_sweep(&c).unwrap())
        };
        let (a, b) = (run(1), run(4));
        let text = |rows: &[SimResult]| rows.iter().map(csv_row).collect::<Vec<_>>();
        assert_eq!(text(&a), text(&b));
    }

    #[test]
    fn csv_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let c = cfg(SweepKind::Sigma, vec![0.7], vec![EstimatorKind::Linear]);
        let rows = run_sweep(&c).unwrap();
        write_csv(&rows, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        let f: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(f.len(), 14);
        assert_eq!(f[0], "linear");
        assert_eq!(f[2], "62");
        let r = &rows[0];
        for (s, v) in f[3..12].iter().zip([
            r.tau,
            r.sigma,
            r.mu,
            r.sweep_value,
            r.mse_scaled,
            r.ci_low,
            r.ci_high,
            r.lambda_opt,
            r.gamma_opt,
        ]) {
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        let empty = dir.path().join("empty.csv");
        assert!(write_csv(&[], &empty).is_err());
        assert!(!empty.exists());
        assert!(matches!(
            write_csv(&rows, &dir.path().join("no/such/dir.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn poisoned_rows_are_nan() {
        let mut r = run_sweep(&cfg(SweepKind::Sigma, vec![1.0], vec![EstimatorKind::Soft]))
            .unwrap()
            .remove(0);
        r.mse_scaled = f64::NAN;
        r.error = Some("boom".into());
        let line = csv_row(&r);
        assert_eq!(line.split(',').nth(7), Some("NaN"));
    }
}
