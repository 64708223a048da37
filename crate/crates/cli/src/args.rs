use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "Radiation and propelling force of a modulated 1D cavity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Emission spectrum n(ω) on a grid from 0 to --omega-max.
    Spectrum(SpectrumArgs),
    /// Radiated N, P and E against the drive frequency (monochromatic limit).
    Sweep(SweepArgs),
    /// Force on both mirrors at order 1, 2 or both, with impulse and F(t).
    Force(ForceArgs),
    /// Propelling efficiency, two-sided or massive-field.
    Efficiency(EfficiencyArgs),
    /// Repeat a run recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectrum(_) => "spectrum",
            Self::Sweep(_) => "sweep",
            Self::Force(_) => "force",
            Self::Efficiency(_) => "efficiency",
            Self::Replay(_) => "replay",
        }
    }

    pub fn common(&self) -> Option<&Common> {
        match self {
            Self::Spectrum(a) => Some(&a.common),
            Self::Sweep(a) => Some(&a.common),
            Self::Force(a) => Some(&a.common),
            Self::Efficiency(a) => Some(&a.common),
            Self::Replay(_) => None,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Common {
    /// Run configuration (JSON, or TOML with a .toml extension).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Override quadrature.rel_tol.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Override the cutoff Λ.
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Cross-check against brute-force oracles and write verify.csv.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub omega_max: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub omega_min: f64,
    #[arg(long)]
    pub omega_max: f64,
    /// Number of drive frequencies, endpoints included.
    #[arg(long)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderArg {
    #[value(name = "1")]
    First,
    #[value(name = "2")]
    Second,
    Both,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ForceArgs {
    #[command(flatten)]
    pub common: Common,
    /// The grid covers [-omega_max, omega_max].
    #[arg(long)]
    pub omega_max: f64,
    #[arg(long, value_enum, default_value = "1")]
    pub order: OrderArg,
    /// Also write F(t) on [-t_max, t_max].
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub t_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyMode {
    TwoSided,
    Massive,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EfficiencyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub mode: EfficiencyMode,
    /// Fraction of the invested work that ends up radiated.
    #[arg(long)]
    pub k: f64,
    /// Left-side spectrum CSV (omega,n), two-sided mode.
    #[arg(long)]
    pub left: Option<PathBuf>,
    /// Right-side spectrum CSV (omega,n), two-sided mode.
    #[arg(long)]
    pub right: Option<PathBuf>,
    /// Field mass, massive mode.
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub band_lo: Option<f64>,
    #[arg(long)]
    pub band_hi: Option<f64>,
    /// Optional spectrum CSV weighting both band integrals, massive mode.
    #[arg(long)]
    pub weight: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Output directory; defaults to the manifest's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}
