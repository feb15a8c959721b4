use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use giant_atom::phase::parse_phase;

#[derive(Debug, Parser)]
#[command(
    name = "giant-atom",
    version,
    about = "Chiral giant-atom waveguide QED: decay, BIC, collision and chirality runs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Atomic decay curves over a (d, phi_c) grid, compared with exp(-Gamma t).
    Decay(RunArgs),
    /// Coupling phases that make an L-leg atom decay exponentially.
    MarkovSolve(MarkovArgs),
    /// Bound state in the continuum: analytic profile and numerical check.
    Bic(RunArgs),
    /// Collision-model run with optional time-bin dump.
    Collision(CollisionArgs),
    /// Forward/backward emission fractions and coupling-point field components.
    Chirality(RunArgs),
    /// Lattice, delay-equation and collision solvers on the same configurations.
    Crossvalidate(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum SolverName {
    Lattice,
    Dde,
    Collision,
}

impl SolverName {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::Lattice => "lattice",
            SolverName::Dde => "dde",
            SolverName::Collision => "collision",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML system configuration; without it the reference ring is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated solvers: lattice, dde, collision.
    #[arg(long, value_delimiter = ',', value_enum)]
    pub solver: Vec<SolverName>,
    /// Comma-separated leg spacings in sites.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
    /// Comma-separated coupling phase differences (radians or p*pi/q).
    #[arg(long = "phi-c", value_delimiter = ',', allow_hyphen_values = true, value_parser = phase_arg)]
    pub phi_c: Vec<f64>,
    /// Final time in units of 1/J.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Output sample spacing (lattice) and collision duration.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write a gnuplot script for the CSV outputs.
    #[arg(long)]
    pub plot_script: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CollisionArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Include the final time-bin amplitudes in JSON output.
    #[arg(long)]
    pub bins: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MarkovArgs {
    /// Number of legs, 2 to 8.
    #[arg(value_name = "L")]
    pub legs: usize,
    /// List every solution instead of the canonical one.
    #[arg(long)]
    pub all: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write the result as JSON into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn phase_arg(s: &str) -> Result<f64, String> {
    parse_phase(s).map_err(|e| e.to_string())
}
