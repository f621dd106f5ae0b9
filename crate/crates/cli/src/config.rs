//! Run configuration: command-line flags layered over an optional flat TOML
//! file. Every field is optional at parse time; each command checks for the
//! fields it needs.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Threshold,
    RateLoss,
    Speed,
    Contours,
    Windowed,
    OptimizeAlpha,
    OptimizeNu3,
    OptimizeTwoType,
    ProtoSearch,
    ReproduceTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,

    /// Variable-node degree.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dv: Option<u32>,
    /// Check-node degree [default: 2 dv].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dc: Option<u32>,
    /// Smoothing distribution, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<f64>>,
    /// Coupling chain length.
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Protograph segment: edges from the first variable node to the same position.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b1: Option<u32>,
    /// Protograph segment: edges from the second variable node to the same position.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b2: Option<u32>,
    /// Two-type ensemble: smoothing parameter of the upper type.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_upper: Option<f64>,
    /// Two-type ensemble: smoothing parameter of the lower type.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_lower: Option<f64>,

    /// Channel erasure probability.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Erasure probabilities of a contour grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    /// Values of alpha in nu = [alpha, 1 - alpha], comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,

    /// Bisection tolerance of reported thresholds.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Bisection tolerance of sweep grid points.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_tol: Option<f64>,
    /// Finest tolerance used to separate tied sweep points.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tie_floor: Option<f64>,
    /// Convergence floor of DE messages.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_conv: Option<f64>,
    /// Iteration cap of one DE run.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    /// Displacement of the wave-speed measurement.
    #[arg(long = "D")]
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub displacement: Option<usize>,
    /// Iterations added after the wave-speed burn-in.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra_burn_in: Option<usize>,
    /// Grid step of optimizer sweeps.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    /// Skip the local refinement of optimizer sweeps.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_refine: Option<bool>,
    /// Windowed decoding: window size W_D.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    /// Windowed decoding: iterations I per window position.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Protograph search: smallest dv.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dv_min: Option<u32>,
    /// Protograph search: largest dv.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dv_max: Option<u32>,
    /// Published table to reproduce: I, II, III or IV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,

    /// Output file; standard output when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            format!("invalid config: {msg}")
        })
    }

    /// Fields set in `top` win over the ones in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, top;
            command, dv, dc, nu, length, b1, b2, alpha_upper, alpha_lower,
            epsilon, epsilons, alphas, tol, sweep_tol, tie_floor, delta_conv,
            max_iters, displacement, extra_burn_in, grid_step, no_refine,
            window, iterations, dv_min, dv_max, table, out, format,
        )
    }

    /// Flat `key = value` rendering; floats keep full round-trip precision.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }
}
