use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use duality_cli::{
    bell_scan, run_experiment, validate_experiment, verify_channel, verify_duality, Backend, CliError, DualityPair,
    Format, Mode, RunOptions, RunReport,
};

#[derive(Parser)]
#[command(
    name = "duality",
    version,
    about = "Path sums, action duality checks and Bell scans for small optical networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock time in meta.timing_ms.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Joint and conditional probability tables for a preset or experiment file.
    Run {
        experiment: String,
        /// Phase of E in radians.
        #[arg(long, value_parser = finite)]
        alpha: Option<f64>,
        /// Phase of F in radians.
        #[arg(long, value_parser = finite)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value_t = Backend::Both)]
        backend: Backend,
        #[arg(long, value_enum, default_value_t = Mode::Relative)]
        mode: Mode,
    },
    /// Term-by-term comparison of two dual experiments: a1a2, b1b2 or two files.
    Verify {
        pair: String,
        second: Option<String>,
        /// Pivot-reverse about this source instead of a full time reversal.
        #[arg(long)]
        pivot: Option<String>,
        #[arg(long, value_parser = finite)]
        alpha: Option<f64>,
        #[arg(long, value_parser = finite)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Relative)]
        mode: Mode,
    },
    /// Randomized entangled/single-system equivalence trials.
    VerifyChannel {
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Correlator grid and CHSH maximum for b1 or b2.
    Bell {
        preset: String,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// Check an experiment file against every network invariant.
    Validate { experiment: String },
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not a finite angle"))
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let start = Instant::now();
    let mut report: RunReport = match &cli.command {
        Command::Run { experiment, alpha, beta, backend, mode } => {
            run_experiment(&RunOptions { experiment, alpha: *alpha, beta: *beta, backend: *backend, mode: *mode })?
        }
        Command::Verify { pair, second, pivot, alpha, beta, mode } => {
            let pair = DualityPair::parse(pair, second.as_deref(), pivot.as_deref())?;
            verify_duality(&pair, *alpha, *beta, *mode)?
        }
        Command::VerifyChannel { dims, trials, seed } => verify_channel(dims, *trials, *seed)?,
        Command::Bell { preset, resolution } => bell_scan(preset, *resolution)?,
        Command::Validate { experiment } => {
            let v = validate_experiment(experiment)?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&v).expect("validation output serializes") + "\n",
                _ if v.valid => format!("{}: valid\n", v.experiment),
                _ => format!("{}: invalid\n{}\n", v.experiment, v.messages.join("\n")),
            };
            emit(&text, cli.out.as_ref())?;
            return Ok(if v.valid { 0 } else { 3 });
        }
    };
    if cli.timing {
        report.meta.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    emit(&report.render(cli.format), cli.out.as_ref())?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
