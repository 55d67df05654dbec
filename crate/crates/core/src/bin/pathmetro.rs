use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use pathmetro::experiment::{self, Format, Invocation, RunError, WORKERS_ENV};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Condition,
    Channel,
    FisherSweep,
    Scaling,
    Continuous,
    OracleCheck,
    Estimate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

/// Run a superposed-path metrology experiment described by a JSON config.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    command: Cmd,
    #[arg(long)]
    config: PathBuf,
    /// Output table path; the manifest goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Fmt>,
    /// Master seed, overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config leaf, e.g. `--set estimation.nu=1000`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
    /// Default worker count when the config has no `workers` field.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(args) {
        Ok(passed) => ExitCode::from(if passed { 0 } else { 1 }),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: Args) -> Result<bool, RunError> {
    let command = args
        .command
        .to_possible_value()
        .map(|v| v.get_name().to_string());
    let inv = Invocation {
        command,
        config_text: experiment::read_config(&args.config)?,
        out: args.out,
        format: args.format.map(|f| match f {
            Fmt::Csv => Format::Csv,
            Fmt::Json => Format::Json,
        }),
        seed: args.seed,
        overrides: args.overrides,
        default_workers: args.workers,
    };
    let prepared = experiment::prepare(&inv)?;
    let report = experiment::execute(&prepared)?;
    for note in &report.output.notes {
        eprintln!("note: {note}");
    }
    if let Some(v) = report
        .output
        .summary
        .get("verdict")
        .and_then(|v| v.as_str())
    {
        println!("{v}");
    }
    println!("wrote {}", report.out.display());
    println!("wrote {}", report.manifest_path.display());
    if !report.output.passed {
        eprintln!("check failed, see {}", report.out.display());
    }
    Ok(report.output.passed)
}
