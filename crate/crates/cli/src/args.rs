use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "squeeze",
    version,
    about = "Steady states, heat flows and operating phases of a squeeze-rotate-squeeze heat machine"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady state and occupancy estimates at a single operating point.
    Steady(MachineArgs),
    /// Ledger and phase along one or two swept parameters, as CSV.
    Sweep(MachineArgs),
    /// Phase labels and the optimal squeezing track over a two-parameter grid, as CSV.
    PhaseDiagram(MachineArgs),
    /// Run the built-in numerical verification suite.
    Verify(VerifyArgs),
}

/// Operating point, sweep and output settings. Unset flags fall back to the
/// `--config` file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct MachineArgs {
    /// Key=value file with the same settings as the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Mechanical frequency (rad/s).
    #[arg(long)]
    pub omega_m: Option<f64>,
    /// Quality factor omega_m/gamma.
    #[arg(long, conflicts_with = "gamma")]
    pub q: Option<f64>,
    /// Hot-bath damping rate (1/s).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n_h: Option<f64>,
    #[arg(long)]
    pub n_c: Option<f64>,
    /// Cold-bath coupling per squeezer, in [0, 1].
    #[arg(long)]
    pub eps: Option<f64>,
    /// Squeezing strength.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Cycle period (s).
    #[arg(long, conflicts_with = "omega_ap_ratio")]
    pub tau: Option<f64>,
    /// Squeezing repetition rate relative to omega_m.
    #[arg(long)]
    pub omega_ap_ratio: Option<f64>,
    /// io, rwa or both.
    #[arg(long)]
    pub model: Option<String>,
    /// var=scale:min:max:count with var in mu, omega_ap, epsilon, n_c, n_h,
    /// tau, gamma and scale lin or log. At most two.
    #[arg(long)]
    pub sweep: Vec<String>,
    /// Constraint applied after sweep expansion: q_eff=<value> or
    /// gamma_eff=<value>, solved for epsilon.
    #[arg(long)]
    pub hold: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Significant digits for floats; shortest round-trip when omitted.
    #[arg(long)]
    pub precision: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random draws per statistical check.
    #[arg(long, default_value_t = 500)]
    pub draws: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
