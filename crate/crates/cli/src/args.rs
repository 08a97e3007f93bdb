use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "thermocav", version, about = "Heat-equation cavity simulator and linear-sampling reconstruction")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Solve the forward problem and write boundary traces.
    Forward(ForwardArgs),
    /// Build Λ_D, Λ_∅ and the (noisy) gap matrix F.
    Synthesize(SynthesizeArgs),
    /// Sweep the gap equation over a sampling grid and extract the cavity boundary.
    Reconstruct(ReconstructArgs),
    /// Short-time asymptotics of the half-space reflected solution.
    Halfspace(HalfspaceArgs),
    /// Run the property checks on a scenario and write a JSON report.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ForwardArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Flux on the outer boundary: `zero`, `constant:C`, `cosine:C,M` (C cos Mθ),
    /// `pulse:C,T0,T1` (C on T0 < t < T1), or a sum of terms joined by `+`.
    #[arg(long, default_value = "constant:1")]
    pub flux: String,
    /// Also solve the three-trace system and report its agreement with the default path.
    #[arg(long)]
    pub paper_system: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthesizeArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Relative noise level added to Λ_D.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Threshold {
    Log,
    Linear,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    /// Outer-boundary description (`outer`, `T`, `N_s_outer`, `N_t` only).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Gap matrix written by `synthesize` (binary file with a JSON sidecar).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// `N` for an N×N lattice covering the outer curve, or `xmin,xmax,ymin,N`.
    #[arg(long, default_value = "41", allow_hyphen_values = true)]
    pub grid: String,
    /// Source time of Γ⁰ (default T/4).
    #[arg(long)]
    pub s: Option<f64>,
    /// Offset of the pointwise indicator (default (2·spacing)²).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Fixed Tikhonov parameter; without it α is chosen by quasi-optimality.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// `min,max,count` of the quasi-optimality grid.
    #[arg(long, default_value = "1e-10,1e-2,17", allow_hyphen_values = true)]
    pub alpha_grid: String,
    /// Noise level of the data, recorded in the manifest.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Seed used when the data was synthesized, recorded in the manifest.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Threshold::Log)]
    pub threshold: Threshold,
}

#[derive(Debug, Clone, Args)]
pub struct HalfspaceArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda0: f64,
    /// Comma-separated ε values.
    #[arg(long, default_value = "1e-1,1e-2,1e-3")]
    pub eps: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}
