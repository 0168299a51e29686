use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mdheston_cli::commands::{self, Outcome};
use mdheston_cli::config::RunConfig;
use mdheston_cli::table::Format;
use mdheston_cli::CliError;

#[derive(Parser)]
#[command(
    name = "mdheston",
    version,
    about = "Small-time asymptotics of the randomised Heston model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (standard output by default).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Overrides both the Monte Carlo and the verification seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (all cores by default).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Randomised moment generating function over the (t, u) grid.
    Mgf,
    /// Regime metadata and rate function over the x grid.
    Rate,
    /// Convergence experiments with pass/fail verdicts.
    Verify {
        /// Criterion number or name; repeatable. Overrides the config list.
        #[arg(long = "criterion", short = 'c')]
        criteria: Vec<String>,
    },
    /// Fourier call prices over (t, k), optionally against Monte Carlo.
    Price,
    /// Implied variance at rescaled strikes against its asymptote.
    Impvol,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(p) = cli.out {
        cfg.output.path = Some(p);
    }
    if let Some(s) = cli.seed {
        cfg.mc.seed = s;
        cfg.verify.seed = s;
    }
    if let Command::Verify { criteria } = &cli.command {
        if !criteria.is_empty() {
            cfg.verify.criteria = criteria.clone();
        }
    }
    cfg.validate()?;
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let (name, f): (_, fn(&RunConfig, _) -> _) = match cli.command {
        Command::Mgf => ("mgf", commands::mgf),
        Command::Rate => ("rate", commands::rate),
        Command::Verify { .. } => ("verify", commands::verify),
        Command::Price => ("price", commands::price),
        Command::Impvol => ("impvol", commands::impvol),
    };
    let doc = commands::header(name, &cfg, rayon::current_num_threads());
    let outcome = f(&cfg, doc)?;
    let text = outcome.document.render(cfg.output.format)?;
    match &cfg.output.path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(o) if o.failures.is_empty() => ExitCode::SUCCESS,
        Ok(o) => {
            eprintln!("{}", serde_json::json!({ "failures": o.failures }));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
