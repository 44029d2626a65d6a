use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod verify;

use commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "hansen", version, about = "Mean-variance frontiers, kernel bounds and monotone Hansen ratios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Special portfolios X, Y, Z and both frontier parabolas of a market.
    Frontier {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        grid: Grid,
    },
    /// Frontier of the IID market held over several periods.
    Multiperiod {
        #[command(flatten)]
        io: Io,
        #[arg(long, short = 'n')]
        periods: usize,
        #[command(flatten)]
        grid: Grid,
    },
    /// Monotone Hansen and Sharpe ratios of a scenario payoff given as CSV.
    Mhr {
        #[command(flatten)]
        io: Io,
        /// Accept payoffs without a negative state.
        #[arg(long)]
        allow_no_downside: bool,
        /// Rescale probabilities that do not sum to one.
        #[arg(long)]
        renormalize: bool,
    },
    /// Kernel bounds of a market, with diagnostics for candidate kernels.
    Hj {
        #[command(flatten)]
        io: Io,
        /// Candidate kernel as a scenario CSV on the market's states (repeatable).
        #[arg(long)]
        kernel: Vec<PathBuf>,
        /// Also bound the monotone Hansen ratios of zero-cost portfolios.
        #[arg(long)]
        monotone: bool,
        #[arg(long)]
        renormalize: bool,
        #[arg(long, default_value_t = hansen_core::kernel::PRICING_TOL)]
        pricing_tol: f64,
        #[arg(long, default_value_t = hansen_core::frontier::BOUND_TOL)]
        bound_tol: f64,
    },
    /// Rerun the built-in three-asset example and compare with the published values.
    Verify {
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Io {
    #[arg(long, short)]
    input: PathBuf,
    /// Report destination; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Grid {
    /// Write frontier points `mu,omega,sigma` to this CSV.
    #[arg(long)]
    points_csv: Option<PathBuf>,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long, default_value_t = 101)]
    grid_count: usize,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Frontier { io, grid } => commands::frontier(&io.input, io.output.as_deref(), &grid.into()),
        Command::Multiperiod { io, periods, grid } => {
            commands::multiperiod(&io.input, io.output.as_deref(), periods, &grid.into())
        }
        Command::Mhr { io, allow_no_downside, renormalize } => {
            commands::mhr(&io.input, io.output.as_deref(), allow_no_downside, renormalize)
        }
        Command::Hj { io, kernel, monotone, renormalize, pricing_tol, bound_tol } => {
            let opts = commands::HjOptions { kernels: kernel, monotone, renormalize, pricing_tol, bound_tol };
            commands::hj(&io.input, io.output.as_deref(), &opts)
        }
        Command::Verify { output } => verify::run(output.as_deref()),
    }
}

impl From<Grid> for commands::GridSpec {
    fn from(g: Grid) -> Self {
        commands::GridSpec { points_csv: g.points_csv, min: g.grid_min, max: g.grid_max, count: g.grid_count }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::usage(e.to_string().trim_end());
            return err.emit();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.emit(),
    }
}
