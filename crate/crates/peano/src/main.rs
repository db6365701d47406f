use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use peano::config::WORKERS_ENV;
use peano::output::{summary_table, write_output, write_records};
use peano::{run, CliOverrides, Experiment, ExperimentConfig, Format, HarnessError, RunOutput};

/// Zero-noise selection experiments for SDEs with stable noise.
#[derive(Parser)]
#[command(name = "peano", version)]
struct Cli {
    /// Experiment to run; must match the config's `experiment` if it has one.
    #[arg(value_enum)]
    experiment: Experiment,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn emit(run: &RunOutput) -> Result<(), HarnessError> {
    let cfg = &run.config;
    let io_err = |field: &str, e: io::Error| HarnessError::Config {
        field: field.into(),
        message: e.to_string(),
    };
    match &cfg.output.path {
        Some(path) => {
            let f = File::create(path).map_err(|e| io_err("output.path", e))?;
            let mut w = BufWriter::new(f);
            write_output(run, cfg.output.format, &mut w).map_err(|e| io_err("output.path", e))?;
            w.flush().map_err(|e| io_err("output.path", e))?;
            print!("{}", summary_table(&run.rows));
        }
        None => {
            let stdout = io::stdout();
            write_output(run, cfg.output.format, stdout.lock())
                .map_err(|e| io_err("output.path", e))?;
            eprint!("{}", summary_table(&run.rows));
        }
    }
    if let Some(path) = &cfg.extras.records {
        let f = File::create(path).map_err(|e| io_err("extras.records", e))?;
        write_records(&run.records, BufWriter::new(f))
            .map_err(|e| io_err("extras.records", io::Error::other(e)))?;
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<(), HarnessError> {
    let overrides = CliOverrides {
        experiment: Some(cli.experiment),
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
    };
    let env_workers = std::env::var(WORKERS_ENV).ok();
    let cfg = ExperimentConfig::from_file(&cli.config)?.resolve(&overrides, env_workers.as_deref())?;
    let out = run(&cfg)?;
    emit(&out)?;
    out.status()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("peano: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
