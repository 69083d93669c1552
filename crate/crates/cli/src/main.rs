mod config;
mod report;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, RunConfig};
use report::{Format, Report};

/// Exact computations for multi-point Krichever–Novikov algebras on the sphere.
#[derive(Parser, Debug)]
#[command(name = "knlab", version)]
struct Cli {
    /// TOML run configuration; without it the classical surface with sl(2) is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Degree window W (overrides the configuration).
    #[arg(long, global = true)]
    window: Option<i64>,
    /// Write report files into this directory instead of printing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Worker threads.
    #[arg(long, global = true, env = "KNLAB_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// List the basis elements in the window, with their orders at the marked points.
    Basis,
    /// Structure constants of multiplication, bracket and the actions, plus grading analysis.
    Structure,
    /// Matrices of the configured cocycles on the window.
    Cocycle,
    /// Run the configured verification tasks.
    Verify,
    /// Certified lower bounds for the local second cohomology of the configured targets.
    H2loc,
}

const DEFAULT_CONFIG: &str = "[surface]\nin = [\"0\"]\n";

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => config::parse(DEFAULT_CONFIG)?,
    };
    if let Some(w) = cli.window {
        if !(1..=12).contains(&w) {
            return Err(ConfigError::Invalid { key: "--window".into(), message: format!("{w} is outside 1..=12") });
        }
        cfg.window = w;
        cfg.h2loc_window = w;
    }
    Ok(cfg)
}

fn emit(cli: &Cli, report: &Report) -> std::io::Result<()> {
    if let Some(dir) = &cli.out {
        return report.write_to(dir, cli.format);
    }
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
        Format::Csv => report.to_csv().map_err(|e| std::io::Error::other(e.to_string()))?,
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: {e}");
        }
    }
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match cli.command {
        Command::Basis => tasks::cmd_basis(&cfg),
        Command::Structure => tasks::cmd_structure(&cfg),
        Command::Cocycle => tasks::cmd_cocycle(&cfg),
        Command::Verify => tasks::cmd_verify(&cfg),
        Command::H2loc => tasks::cmd_h2loc(&cfg, cfg.h2loc_window),
    };
    if let Err(e) = emit(&cli, &report) {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(2);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
