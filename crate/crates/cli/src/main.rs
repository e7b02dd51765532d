mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

/// Fast-reaction limit laboratory.
#[derive(Debug, Parser)]
#[command(name = "fastlimit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the reaction-diffusion system at one rate k.
    RunRd(RunArgs),
    /// Integrate the limit nonlinear diffusion problem.
    RunLimit(RunArgs),
    /// Sweep k, compare against the limit and write the convergence report.
    Sweep(SweepArgs),
    /// Tabulate the resolvent, beta and the limit split of a graph.
    GraphInfo(GraphInfoArgs),
    /// Check the initial data family at rate k.
    ValidateInit(RunArgs),
    /// Weak-form residual of the limit solution.
    Residual(RunArgs),
}

/// Scalar overrides applied on top of the config file.
#[derive(Debug, Clone, Args, Default)]
pub struct Overrides {
    #[arg(long)]
    pub n_cells: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub d1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub d2: Option<f64>,
    /// Reaction rate for run-rd and validate-init.
    #[arg(long)]
    pub k: Option<f64>,
    /// Output directory; takes precedence over FASTLIMIT_OUTPUT_DIR.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Number of k values run concurrently.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct GraphInfoArgs {
    /// identity, zero, heaviside or linear:r.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// Read the graph and diffusivities from a config file instead.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Values of s to tabulate.
    #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
    sample: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    d1: f64,
    #[arg(long, default_value_t = 1.0)]
    d2: f64,
    /// Resolvent parameter.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RunRd(a) => commands::run_rd(&a.config, &a.overrides),
        Command::RunLimit(a) => commands::run_limit(&a.config, &a.overrides),
        Command::Sweep(a) => commands::sweep(&a.config, a.jobs, &a.overrides),
        Command::GraphInfo(a) => commands::graph_info(
            a.preset.as_deref(),
            a.config.as_deref(),
            &a.sample,
            a.d1,
            a.d2,
            a.lambda,
        ),
        Command::ValidateInit(a) => commands::validate_init(&a.config, &a.overrides),
        Command::Residual(a) => commands::residual(&a.config, &a.overrides),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
