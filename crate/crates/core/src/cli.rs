//! Command-line front end. Every subcommand prints one JSON document on
//! stdout; `simulate` also writes its CSV to `--out`.
//!
//! Exit codes: 0 success, 2 bad input (one line on stderr naming the
//! problem), 1 runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bayes::{mc_bayes_risk, BlockPrior, Sided, SpikePrior};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, Tuning};
use crate::experiments::{run_sweep, write_csv, SimConfig};
use crate::minimax::{classify_regime, minimax_approx, Regime, DEFAULT_HIGH_CUT, DEFAULT_LOW_CUT};
use crate::risk::{mc_risk, quad_risk, risk, sup_risk, RiskReport};
use crate::rng::threads_from_env;
use crate::space::SparseSpace;
use crate::tuning::{optimize, DEFAULT_GRID_POINTS, DEFAULT_REFINE_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "snrmm",
    version,
    about = "Minimax risk of sparse normal-means estimators under SNR constraints",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-coordinate MSE E(η(μ+Z) − μ)² at unit noise.
    Risk(RiskArgs),
    /// Worst-case MSE over the sparse space Θ(k, τ).
    Suprisk(SupRiskArgs),
    /// Tuning that minimizes the worst-case MSE.
    Tune(TuneArgs),
    /// Asymptotic minimax-risk approximation for the space's SNR regime.
    Minimax(MinimaxArgs),
    /// Monte-Carlo Bayes risk of a spike block prior (unit noise).
    Bayes(BayesArgs),
    /// Run a simulation sweep and write its CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    Quadrature,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Low,
    Moderate,
    High,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Low => Regime::Low,
            RegimeArg::Moderate => Regime::Moderate,
            RegimeArg::High => Regime::High,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SidedArg {
    Symmetric,
    OneSided,
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    /// Estimator: soft, hard, linear, softlinear or zero.
    #[arg(long)]
    pub estimator: EstimatorKind,
    /// Threshold λ (soft/hard/softlinear: same units as y) or linear shrinkage λ (dimensionless).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub lambda: f64,
    /// Ridge weight γ for softlinear (dimensionless, ≥ 0; "inf" allowed).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub gamma: f64,
}

impl TuningArgs {
    fn tuning(&self) -> Result<Tuning> {
        let t = Tuning {
            lambda: self.lambda,
            gamma: self.gamma,
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    /// Dimension n (count).
    #[arg(long, allow_negative_numbers = true)]
    pub n: i64,
    /// Sparsity k: maximum number of nonzero means (count, 1 ≤ k ≤ n).
    #[arg(long, allow_negative_numbers = true)]
    pub k: i64,
    /// Signal strength τ: RMS size of the nonzero means (same units as y).
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
    /// Noise standard deviation σ (same units as y).
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub sigma: f64,
}

impl SpaceArgs {
    fn space(&self) -> Result<SparseSpace> {
        let n = u64::try_from(self.n)
            .map_err(|_| Error::domain("n", format!("must be positive, got {}", self.n)))?;
        let k = u64::try_from(self.k)
            .map_err(|_| Error::domain("k", format!("must be positive, got {}", self.k)))?;
        SparseSpace::new(n, k, self.tau, self.sigma)
    }
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Mean μ of the coordinate (units of σ = 1).
    #[arg(long, allow_negative_numbers = true)]
    pub mu: f64,
    /// Cross-check with an oracle instead of the closed form.
    #[arg(long)]
    pub oracle: Option<Oracle>,
    /// Monte-Carlo sample count (draws) for --oracle mc.
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: u64,
    /// Monte-Carlo seed (64-bit integer).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SupRiskArgs {
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Estimator: soft, hard, linear, softlinear or zero.
    #[arg(long)]
    pub estimator: EstimatorKind,
    #[command(flatten)]
    pub space: SpaceArgs,
    /// λ grid size for the initial search (count).
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Refinement tolerance on λ/σ and log(1+γ) (dimensionless).
    #[arg(long, allow_negative_numbers = true, default_value_t = DEFAULT_REFINE_TOL)]
    pub refine_tol: f64,
}

#[derive(Debug, Args)]
pub struct MinimaxArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Force a regime instead of classifying μ/√(log ε⁻¹).
    #[arg(long)]
    pub regime: Option<RegimeArg>,
    /// Restrict to ‖θ‖∞ ≤ A·τ (A dimensionless, ≥ 1).
    #[arg(long, allow_negative_numbers = true)]
    pub bounded: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    /// Block dimension m (count).
    #[arg(long, allow_negative_numbers = true)]
    pub m: i64,
    /// Spike size μ (units of σ = 1).
    #[arg(long, allow_negative_numbers = true)]
    pub mu: f64,
    /// Number of independent blocks k (count).
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    pub blocks: i64,
    /// Monte-Carlo replicates (count, ≥ 2).
    #[arg(long, allow_negative_numbers = true, default_value_t = 100_000)]
    pub reps: i64,
    /// Seed (64-bit integer).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Spike prior: ±μ (symmetric) or +μ only (one-sided).
    #[arg(long, value_enum, default_value_t = SidedArg::Symmetric)]
    pub sided: SidedArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Sweep configuration (JSON file).
    #[arg(long)]
    pub config: PathBuf,
    /// Destination of the results CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    out: PathBuf,
    rows: usize,
    failed_rows: usize,
    n: u64,
    k: u64,
    reps: usize,
    seed: u64,
}

fn positive(name: &'static str, v: i64) -> Result<u64> {
    if v > 0 {
        Ok(v as u64)
    } else {
        Err(Error::domain(
            name,
            format!("must be a positive integer, got {v}"),
        ))
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map_err(|e| Error::Unsupported(format!("cannot encode output: {e}")))
}

/// Executes one parsed command and returns its stdout document.
pub fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Risk(a) => {
            let t = a.tuning.tuning()?;
            if !a.mu.is_finite() {
                return Err(Error::domain("mu", "must be finite"));
            }
            let report = match a.oracle {
                None => RiskReport {
                    value: risk(a.tuning.estimator, t, a.mu),
                    method: crate::risk::RiskMethod::ClosedForm,
                    error_bound: 0.0,
                },
                Some(Oracle::Quadrature) => quad_risk(a.tuning.estimator, t, a.mu, 1e-12)?,
                Some(Oracle::Mc) => mc_risk(a.tuning.estimator, t, a.mu, a.samples, a.seed)?,
            };
            json(&report)
        }
        Command::Suprisk(a) => json(&sup_risk(
            a.tuning.estimator,
            a.tuning.tuning()?,
            &a.space.space()?,
        )?),
        Command::Tune(a) => json(&optimize(
            a.estimator,
            &a.space.space()?,
            a.grid_points,
            a.refine_tol,
        )?),
        Command::Minimax(a) => {
            let mut space = a.space.space()?;
            if let Some(bound) = a.bounded {
                space = space.bounded(bound)?;
            }
            let regime = match a.regime {
                Some(r) => r.into(),
                None => classify_regime(&space, DEFAULT_LOW_CUT, DEFAULT_HIGH_CUT)?.regime,
            };
            json(&minimax_approx(&space, regime)?)
        }
        Command::Bayes(a) => {
            let sided = match a.sided {
                SidedArg::Symmetric => Sided::Symmetric,
                SidedArg::OneSided => Sided::OneSided,
            };
            let spike = SpikePrior::new(a.mu, positive("m", a.m)? as usize, sided)?;
            let prior = BlockPrior::new(spike, positive("blocks", a.blocks)?)?;
            json(&mc_bayes_risk(&prior, positive("reps", a.reps)?, a.seed)?)
        }
        Command::Simulate(a) => {
            let cfg = SimConfig::from_path(&a.config)?;
            let rows = run_sweep(&cfg)?;
            write_csv(&rows, &a.out)?;
            json(&SimulateSummary {
                out: a.out.clone(),
                rows: rows.len(),
                failed_rows: rows.iter().filter(|r| r.error.is_some()).count(),
                n: cfg.n,
                k: cfg.k(),
                reps: cfg.reps,
                seed: cfg.master_seed,
            })
        }
    }
}

fn diagnostic(e: &Error) -> String {
    match e {
        Error::Domain { name, reason } => format!("error: --{}: {reason}", name.replace('_', "-")),
        other => format!("error: {other}"),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return EXIT_OK;
            }
            let text = e.render().to_string();
            let _ = writeln!(
                stderr,
                "{}",
                text.lines().next().unwrap_or("error: bad arguments")
            );
            return EXIT_USAGE;
        }
    };
    match threads_from_env() {
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        Ok(Some(n)) => {
            // fails only if a pool already exists, e.g. when run() is called twice
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        Ok(None) => {}
    }
    match execute(&cli.command) {
        Ok(doc) => {
            let _ = writeln!(stdout, "{doc}");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", diagnostic(&e));
            if e.is_validation() {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}
