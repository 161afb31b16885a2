use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use ensemble_cli::commands::{self, OracleCheckArgs, Options, Outcome};
use ensemble_cli::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Eigen-ensembles of two-projector density matrices, Schmidt forms and
/// measurement-chain decoherence.
#[derive(Debug, Parser)]
#[command(name = "ensemble", version)]
struct Cli {
    /// Random seed; for `simulate` it overrides the seed in the input file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Numerical tolerance for checks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form eigen-ensemble of a mixture, cross-checked against Jacobi.
    Decompose { path: PathBuf },
    /// Tabulate the degeneracy radicand over a grid of weight ratios.
    ScanDegeneracy {
        #[arg(long)]
        prat_min: f64,
        #[arg(long)]
        prat_max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Schmidt coefficients and reduced entropies of a pure bipartite state.
    Schmidt {
        path: PathBuf,
        /// Rescale a non-normalized grid instead of rejecting it.
        #[arg(long)]
        renormalize: bool,
    },
    /// Decoherence of a measurement record under environmental scattering.
    Simulate { path: PathBuf },
    /// Batch comparison of the closed form against the Jacobi oracle.
    OracleCheck {
        #[arg(long, default_value_t = 1000)]
        count: u64,
        /// Dimension range `lo-hi`, or a single dimension.
        #[arg(long, default_value = "2-8", value_parser = commands::parse_dims)]
        dims: (usize, usize),
        /// Use orthogonal basis-vector mixtures.
        #[arg(long)]
        orthogonal: bool,
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_eigenvalues: f64,
    },
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let opts = Options { seed: cli.seed, tol: cli.tol };
    match &cli.command {
        Command::Decompose { path } => commands::decompose(path, &opts),
        Command::ScanDegeneracy { prat_min, prat_max, steps } => {
            commands::scan_degeneracy(*prat_min, *prat_max, *steps, &opts)
        }
        Command::Schmidt { path, renormalize } => commands::schmidt_command(path, *renormalize, &opts),
        Command::Simulate { path } => commands::simulate(path, &opts),
        Command::OracleCheck { count, dims, orthogonal, perturb_eigenvalues } => commands::oracle_check(
            &OracleCheckArgs { count: *count, dims: *dims, orthogonal: *orthogonal, perturb_eigenvalues: *perturb_eigenvalues },
            &opts,
        ),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = run(&cli).and_then(|outcome| {
        for w in &outcome.warnings {
            eprintln!("warning: {w}");
        }
        let text = match cli.format {
            Format::Json => outcome.document.to_json(),
            Format::Csv => outcome.csv.clone(),
        };
        emit(&cli, &text)?;
        match outcome.failure {
            Some(msg) => Err(CliError::Check(msg)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
