//! `banditlab` — run seeded bandit experiments, adaptive stopping, and
//! result summaries from the command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use banditlab::harness::{self, ExperimentConfig, HarnessError};
use banditlab::stop::{ebgstop, StopError, StoppingConfig};
use clap::{Parser, Subcommand};
use std::io::{BufRead, Write};
use std::fmt::Arguments;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "banditlab", version, about = "Bandit and stopping experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config and write a CSV table.
    Run {
        /// JSON experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker pool width.
        #[arg(long)]
        jobs: Option<usize>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Stop sampling a stream of newline-delimited numbers once the mean is
    /// known to relative error delta; prints the estimate and the CI trace.
    Stop {
        /// Input file of samples (stdin when omitted).
        file: Option<PathBuf>,
        /// Relative error target.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Failure probability.
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Geometric grid exponent.
        #[arg(long, default_value_t = 0.1)]
        q: f64,
        /// First grid point.
        #[arg(long, default_value_t = 20)]
        t1: u64,
        /// Grid ratio.
        #[arg(long, default_value_t = 1.1)]
        alpha: f64,
        /// Left end of the width-one support the samples live in.
        #[arg(long, default_value_t = 0.0)]
        shift: f64,
        /// Give up after this many samples.
        #[arg(long)]
        max_samples: Option<u64>,
    },
    /// Summarize a results CSV: mean, stderr, CI, quantiles per metric.
    Summarize {
        /// Results CSV produced by `run`.
        csv: PathBuf,
        /// Confidence level.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
    },
}

fn main() -> ExitCode {
    env_logger_init();
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("banditlab: {e}");
            match e {
                AppError::Config(_) => ExitCode::from(2),
                AppError::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}

enum AppError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(m) | AppError::Numerical(m) => write!(f, "{m}"),
        }
    }
}

impl From<HarnessError> for AppError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Numerical(m) => AppError::Numerical(m),
            other => AppError::Config(other.to_string()),
        }
    }
}

impl From<StopError> for AppError {
    fn from(e: StopError) -> Self {
        match e {
            StopError::BadConfig(m) => AppError::Config(m.to_string()),
            other => AppError::Numerical(other.to_string()),
        }
    }
}

fn dispatch() -> Result<(), AppError> {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            jobs,
            seed,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| AppError::Config(format!("{}: {e}", config.display())))?;
            let mut config = ExperimentConfig::from_json(&text)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if jobs.is_some() {
                config.jobs = jobs;
            }
            let table = harness::run(&config)?;
            let csv = table.to_csv();
            match out {
                Some(path) => std::fs::File::create(&path)
                    .and_then(|mut f| f.write_all(csv.as_bytes()))
                    .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?,
                None => emit(format_args!("{csv}")),
            }
            Ok(())
        }
        Command::Stop {
            file,
            delta,
            eps,
            q,
            t1,
            alpha,
            shift,
            max_samples,
        } => {
            let samples = read_samples(file)?;
            let cfg = StoppingConfig {
                delta,
                eps,
                q,
                t1,
                alpha,
                support_shift: shift,
                max_samples,
            };
            let mut iter = samples.into_iter();
            let outcome = ebgstop(|| iter.next(), &cfg, true)?;
            emit(format_args!("estimate,{}\n", outcome.estimate));
            emit(format_args!("stopping_time,{}\n", outcome.stopping_time));
            emit(format_args!("t,mean,radius,lower,upper\n"));
            for row in &outcome.trace {
                emit(format_args!(
                    "{},{},{},{},{}\n",
                    row.t, row.mean, row.radius, row.lower, row.upper
                ));
            }
            Ok(())
        }
        Command::Summarize { csv, level } => {
            let text = std::fs::read_to_string(&csv)
                .map_err(|e| AppError::Config(format!("{}: {e}", csv.display())))?;
            let table = harness::ResultsTable::from_csv(&text)?;
            let summaries = harness::summarize(&table, level)?;
            emit(format_args!(
                "metric,count,mean,std_error,ci_low,ci_high,q05,median,q95\n"
            ));
            for s in summaries {
                emit(format_args!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    s.metric,
                    s.count,
                    s.mean,
                    s.std_error,
                    s.ci_low,
                    s.ci_high,
                    s.q05,
                    s.median,
                    s.q95
                ));
            }
            Ok(())
        }
    }
}

/// Writes to stdout, treating a closed pipe as a normal early exit.
fn emit(args: Arguments<'_>) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_fmt(args) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("banditlab: {e}");
        std::process::exit(2);
    }
}

fn read_samples(file: Option<PathBuf>) -> Result<Vec<f64>, AppError> {
    let reader: Box<dyn BufRead> = match file {
        Some(path) => Box::new(std::io::BufReader::new(
            std::fs::File::open(&path)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(std::io::stdin().lock()),
    };
    let mut samples = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| AppError::Config(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        samples.push(
            line.parse::<f64>()
                .map_err(|e| AppError::Config(format!("bad sample {line:?}: {e}")))?,
        );
    }
    Ok(samples)
}

fn env_logger_init() {
    // keep warnings (zeta <= 1, EXP3 constraint) visible on stderr
    let env = std::env::var("RUST_LOG").unwrap_or_else(|_| "warn".to_string());
    let _ = simple_logger(&env);
}

fn simple_logger(level: &str) -> Result<(), log::SetLoggerError> {
    struct StderrLogger(log::LevelFilter);
    impl log::Log for StderrLogger {
        fn enabled(&self, metadata: &log::Metadata) -> bool {
            metadata.level() <= self.0
        }
        fn log(&self, record: &log::Record) {
            if self.enabled(record.metadata()) {
                eprintln!("[{}] {}", record.level(), record.args());
            }
        }
        fn flush(&self) {}
    }
    let filter = level.parse().unwrap_or(log::LevelFilter::Warn);
    log::set_boxed_logger(Box::new(StderrLogger(filter)))?;
    log::set_max_level(filter);
    Ok(())
}
