//! Command-line front end: every subcommand renders one deterministic
//! figure-data artifact (CSV/JSON, optionally SVG) with full parameter
//! provenance in its metadata block.

mod commands;
mod output;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seed used when none is given; recorded in output metadata either way.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Parser)]
#[command(
    name = "fockmix",
    version,
    about = "Truncated-Fock-space simulator: entangled coherent states from mixing coherent and squeezed vacuum light",
    after_help = "Beam-splitter convention: a† → (c†+d†)/√2, b† → (c†−d†)/√2.\n\
                  All outputs embed their full parameter provenance; reruns of the same\n\
                  invocation are byte-identical apart from the timestamp metadata field."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Per-mode Fock cutoff
    #[arg(long, global = true, default_value_t = 30)]
    cutoff: usize,

    /// Grow the cutoff (doubling) until the truncation tail drops below --tail-tol
    #[arg(long, global = true)]
    adaptive_cutoff: bool,

    /// Truncation tail tolerance
    #[arg(long, global = true, default_value_t = 1e-10)]
    tail_tol: f64,

    /// Output path (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format (state always writes the plain-text dump; click-sim always JSON)
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Seed for every stochastic component
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Dump a constructed state's Fock amplitudes in the plain-text format
    State(StateArgs),
    /// Joint photon-number table of the mixed state, raw and per-N normalized
    Pnd(PndArgs),
    /// Optimal-squeezing fidelity and the vacuum baseline over a mean-photon grid
    FidelityCurve(FidelityCurveArgs),
    /// Extremized J3 nonlocality functional over a mean-photon grid
    J3Curve(J3CurveArgs),
    /// Detected similarity to the ECS reference over the squeezed-vacuum fraction
    SimilaritySweep(SimilaritySweepArgs),
    /// Multiplexed click model against a seeded Monte Carlo oracle (JSON)
    ClickSim(ClickSimArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Coherent,
    Squeezed,
    Css,
    Ecs,
    Noon,
}

#[derive(Args)]
pub struct StateArgs {
    /// Which constructor to run
    #[arg(long, value_enum)]
    pub kind: StateKind,
    /// Amplitude magnitude |β| (coherent, css) or |α| (ecs)
    #[arg(long, default_value_t = 0.0, value_parser = nonneg_f64)]
    pub mag: f64,
    /// Amplitude phase φ in radians
    #[arg(long, default_value_t = 0.0)]
    pub phase: f64,
    /// Squeezing parameter r (squeezed)
    #[arg(long, default_value_t = 0.0, value_parser = nonneg_f64)]
    pub r: f64,
    /// Squeezing phase θ in radians (squeezed)
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Photon number N (noon)
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Relative phase between the two NOON components
    #[arg(long, default_value_t = 0.0)]
    pub rel_phase: f64,
}

/// A flag that accepts either an explicit number or the literal `optimal`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum OptimalOr {
    Optimal,
    Value(f64),
}

fn parse_optimal_or(s: &str) -> Result<OptimalOr, String> {
    if s.eq_ignore_ascii_case("optimal") {
        return Ok(OptimalOr::Optimal);
    }
    s.parse::<f64>()
        .map(OptimalOr::Value)
        .map_err(|_| format!("expected a number or `optimal`, got `{s}`"))
}

#[derive(Args)]
pub struct PndArgs {
    /// Coherent amplitude |β| entering the splitter
    #[arg(long, value_parser = nonneg_f64)]
    pub beta: Option<f64>,
    /// Coherent phase φ
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    /// Squeezing r, or `optimal` for arcsinh(|α|²)/2
    #[arg(long, default_value = "optimal", value_parser = parse_optimal_or)]
    pub r: OptimalOr,
    /// Squeezing phase θ, or `optimal` for 2φ+π
    #[arg(long, default_value = "optimal", value_parser = parse_optimal_or)]
    pub theta: OptimalOr,
    /// Target ECS mean photon number; overrides --beta when present
    #[arg(long, value_parser = nonneg_f64)]
    pub nbar: Option<f64>,
}

#[derive(Args)]
pub struct FidelityCurveArgs {
    #[arg(long, default_value_t = 3.0, value_parser = positive_f64)]
    pub nbar_max: f64,
    #[arg(long, default_value_t = 0.02, value_parser = positive_f64)]
    pub step: f64,
    /// Coherent phase φ carried by α
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Ecs,
    Mixed,
}

#[derive(Args)]
pub struct J3CurveArgs {
    #[arg(long, value_enum, default_value_t = SourceArg::Mixed)]
    pub source: SourceArg,
    #[arg(long, default_value_t = 2.0, value_parser = positive_f64)]
    pub nbar_max: f64,
    #[arg(long, default_value_t = 0.05, value_parser = positive_f64)]
    pub step: f64,
    /// Seeded optimizer restarts per direction
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    /// Optimizer convergence tolerance
    #[arg(long, default_value_t = 1e-9, value_parser = positive_f64)]
    pub tol: f64,
    /// Iteration cap per restart
    #[arg(long, default_value_t = 1500, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: u64,
}

#[derive(Args)]
pub struct SimilaritySweepArgs {
    /// Per-mode transmission η (applied to both modes unless --eta-d is set)
    #[arg(long, default_value_t = 0.1, value_parser = unit_f64)]
    pub eta: f64,
    /// Transmission for mode d when different from --eta
    #[arg(long, value_parser = unit_f64)]
    pub eta_d: Option<f64>,
    /// Detectors per mode
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub detectors: u64,
    #[arg(long, default_value_t = 2.0, value_parser = positive_f64)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.05, value_parser = positive_f64)]
    pub step: f64,
    /// Hold the target ECS mean photon number fixed instead of the linear β schedule
    #[arg(long, value_parser = nonneg_f64)]
    pub fixed_nbar: Option<f64>,
    /// Comma-separated splitter weights for mode c (default uniform)
    #[arg(long)]
    pub weights_c: Option<String>,
    /// Comma-separated splitter weights for mode d (default uniform)
    #[arg(long)]
    pub weights_d: Option<String>,
}

#[derive(Args)]
pub struct ClickSimArgs {
    /// Photons incident on mode c
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Photons incident on mode d
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub detectors: u64,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Comma-separated splitter weights for mode c (default uniform)
    #[arg(long)]
    pub weights_c: Option<String>,
    /// Comma-separated splitter weights for mode d (default uniform)
    #[arg(long)]
    pub weights_d: Option<String>,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be a finite number > 0, got `{s}`"))
    }
}

fn nonneg_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be a finite number ≥ 0, got `{s}`"))
    }
}

fn unit_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("must lie in [0, 1], got `{s}`"))
    }
}

/// Everything the command implementations need besides their own flags.
pub struct Ctx {
    pub cutoff: usize,
    pub adaptive_cutoff: bool,
    pub tail_tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub invocation: String,
}

impl Ctx {
    pub fn cutoff_spec(&self) -> fockmix::optics::CutoffSpec {
        if self.adaptive_cutoff {
            fockmix::optics::CutoffSpec::Adaptive { tail_tol: self.tail_tol }
        } else {
            fockmix::optics::CutoffSpec::Fixed(self.cutoff)
        }
    }
}

fn main() -> Result<()> {
    let invocation: String = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let cli = Cli::parse();
    let ctx = Ctx {
        cutoff: cli.cutoff,
        adaptive_cutoff: cli.adaptive_cutoff,
        tail_tol: cli.tail_tol,
        out: cli.out,
        format: cli.format,
        seed: cli.seed,
        invocation,
    };
    match cli.command {
        Command::State(args) => commands::state(&ctx, &args),
        Command::Pnd(args) => commands::pnd(&ctx, &args),
        Command::FidelityCurve(args) => commands::fidelity_curve(&ctx, &args),
        Command::J3Curve(args) => commands::j3_curve(&ctx, &args),
        Command::SimilaritySweep(args) => commands::similarity_sweep(&ctx, &args),
        Command::ClickSim(args) => commands::click_sim(&ctx, &args),
    }
}
