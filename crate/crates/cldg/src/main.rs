use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use cldg::config::{Experiment, RunConfig};
use cldg::{checks, run};

#[derive(Parser)]
#[command(name = "cldg", version, about = "Conservative local DG solver for the cubic NLS equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a config file.
    Run(RunArgs),
    /// Soliton convergence study (forces `experiment = converge`).
    Converge(RunArgs),
    /// Projection error study (forces `experiment = project_study`).
    ProjectStudy(RunArgs),
    /// Check the discrete invariants; exits 0 iff every check passes.
    Selftest,
}

#[derive(clap::Args)]
struct RunArgs {
    config: PathBuf,
    /// Use the long reference parameters instead of the desk-scale ones.
    #[arg(long)]
    paper_scale: bool,
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs, forced: Option<Experiment>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("stage config: reading {}", args.config.display()))?;
    let mut cfg = RunConfig::parse(&text, forced)
        .with_context(|| format!("stage config: {}", args.config.display()))?;
    if args.paper_scale {
        cfg.apply_paper_scale();
    }
    run::resolve_output(&mut cfg, args.out.as_deref().map(Path::new));
    Ok(cfg)
}

fn execute(args: &RunArgs, forced: Option<Experiment>) -> Result<bool> {
    let cfg = load(args, forced)?;
    let summary = run::run(&cfg).with_context(|| format!("experiment {}", cfg.experiment.name()))?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(summary.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => execute(args, None),
        Command::Converge(args) => execute(args, Some(Experiment::Converge)),
        Command::ProjectStudy(args) => execute(args, Some(Experiment::ProjectStudy)),
        Command::Selftest => {
            let results = checks::selftest();
            for c in &results {
                println!("{c}");
            }
            Ok(results.iter().all(|c| c.passed))
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
