use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "vectorial",
    version,
    about = "Dengue human-mosquito model: simulate, analyze, optimize"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Integrate the model and write the trajectory as CSV.
    Simulate(RunArgs),
    /// Print reproduction number, sensitivity indices and equilibria.
    Analyze(RunArgs),
    /// Solve the insecticide optimal-control problem.
    Optimize(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantKind {
    Constant,
    Seasonal,
    Controlled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegratorKind {
    Dp45,
    Rk4,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Parameter preset.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub scenario: Option<u8>,
    /// `key = value` file overriding preset values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantKind>,
    /// Seasonal amplitude, in (0, 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Final time in days.
    #[arg(long)]
    pub tf: Option<f64>,
    #[arg(long = "gamma-d")]
    pub gamma_d: Option<f64>,
    #[arg(long = "gamma-s")]
    pub gamma_s: Option<f64>,
    /// Step of the fixed RK4 grid in days.
    #[arg(long = "grid-step")]
    pub grid_step: Option<f64>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub integrator: Option<IntegratorKind>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    /// Constant insecticide level for `simulate --variant controlled`.
    #[arg(long)]
    pub control: Option<f64>,
    /// Relaxation weight of the sweep's control update.
    #[arg(long)]
    pub relaxation: Option<f64>,
    /// Convergence tolerance of the sweep.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long = "max-iterations")]
    pub max_iterations: Option<usize>,
    /// Also write a gnuplot script that plots the CSV.
    #[arg(long = "plot-script")]
    pub plot_script: Option<PathBuf>,
    /// Fan independent runs across threads: all three scenarios for
    /// `simulate`/`analyze`, the three cost weightings for `optimize`.
    #[arg(long)]
    pub sweep: bool,
}
