use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "medgate", version, about = "Mediated exchange gates: derive, characterize, synthesize")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for multistart batches; 1 is the reproducible baseline.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Output directory (default: $MEDGATE_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format (default depends on the command).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Also write angles in units of pi.
    #[arg(long, global = true)]
    pub angles_in_pi: bool,
    /// Factorization tolerance for gate-period scans.
    #[arg(long, global = true, default_value_t = medgate_core::dynamics::FACTORIZATION_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Scan a spin geometry for mediated-gate periods.
    Derive(DeriveArgs),
    /// Weyl point, Makhlin invariants, perfect-entangler flag and maximal concurrence of a gate.
    Weyl(WeylArgs),
    /// Search for a circuit preparing a state or implementing a gate.
    Synth(SynthArgs),
    /// Re-evaluate recorded figure circuits.
    Replay(ReplayArgs),
    /// Mediated vs pairwise circuit depths for the registry targets.
    Table1(Table1Args),
    /// Gate infidelity under coupling detuning.
    Robustness(RobustnessArgs),
    /// Depth and time factors for spin buses of odd length.
    Scaling(ScalingArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeriveArgs {
    /// linear-3, star-3, star-5 or star-7.
    #[arg(long)]
    pub geometry: String,
    /// Coupling strength.
    #[arg(long = "J", alias = "j", default_value_t = 1.0)]
    pub j: f64,
    /// Second coupling of linear-3 relative to the first.
    #[arg(long = "J-ratio", alias = "j-ratio")]
    pub j_ratio: Option<f64>,
    /// Scan end time (default 4 pi / J for linear-3, 8 pi / J for stars).
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = medgate_core::dynamics::DEFAULT_SCAN_GRID)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WeylArgs {
    /// Gate name (cnot, swap, sqrtswap, bgate, u2, identity, ...) or a 4x4 matrix JSON file.
    pub gate: String,
    /// Restarts for the maximal-concurrence search.
    #[arg(long, default_value_t = medgate_core::entanglement::DEFAULT_CONCURRENCE_RESTARTS)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Registry name (bell, w3, w5, w7, ghz3, c4, cnot, sqrtswap, swap, bgate, toffoli) or target JSON file.
    #[arg(long)]
    pub target: String,
    /// Comma-separated gate tags allowed on every matching qubit subset, e.g. U2,U3.
    #[arg(long)]
    pub menu: Option<String>,
    /// Fixed gate sequence, e.g. "U3(2,3,4);U3(1,2,3)"; overrides --menu.
    #[arg(long)]
    pub sequence: Option<String>,
    /// Fixed depth; without it depths 1..=max-depth are tried in order.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
    /// Uniform samples per multistart round.
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 4)]
    pub rounds: usize,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub cluster_radius: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub x_tol: f64,
    #[arg(long, default_value_t = 1e-16)]
    pub f_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iterations: usize,
    /// Cap on gate sequences tried per depth.
    #[arg(long, default_value_t = 4096)]
    pub max_sequences: usize,
    /// Exit with code 4 unless the search converged.
    #[arg(long)]
    pub require_converged: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    /// fig3a, fig4a, fig4c, fig4e, fig4g, fig5b, fig5c, fig5d, fig6 or all.
    #[arg(long, default_value = "all")]
    pub figure: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Table1Args {
    /// Also run the Toffoli row (long).
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 4)]
    pub rounds: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RobustnessArgs {
    #[arg(long, default_value_t = 0.4)]
    pub delta_max: f64,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScalingArgs {
    /// Odd bus lengths, comma separated.
    #[arg(long = "n", alias = "N", value_delimiter = ',', default_values_t = vec![1u32, 9, 25])]
    pub n: Vec<u32>,
}
