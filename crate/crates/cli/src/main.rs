use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qdepth_cli::{run, BackendArg, Experiment, ExperimentConfig, Format, SeedArg};

#[derive(Parser)]
#[command(
    name = "qdepth",
    version,
    about = "Runs quantum-depth lab experiments and writes JSON reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment. Exit code 0 when every check passes, 2 when one
    /// fails, 1 on usage errors.
    Run {
        #[arg(value_enum)]
        experiment: Experiment,
        #[arg(long)]
        lambda: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// A u64 or 32 hex digits.
        #[arg(long, default_value = "0")]
        seed: SeedArg,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("QDEPTH_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or(format!("QDEPTH_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(e) = threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let Command::Run {
        experiment,
        lambda,
        d,
        trials,
        seed,
        backend,
        out,
        format,
    } = cli.command;
    let mut cfg = ExperimentConfig::new(experiment, seed.0);
    cfg.lambda = lambda.unwrap_or(cfg.lambda);
    cfg.d = d.unwrap_or(cfg.d);
    cfg.trials = trials.unwrap_or(cfg.trials);
    cfg.backend = backend;
    cfg.out = out.as_ref().map(|p| p.display().to_string());

    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check {} failed: {}", c.name, c.detail);
    }
    ExitCode::from(if report.passed { 0 } else { 2 })
}
