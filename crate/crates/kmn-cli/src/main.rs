use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use kmn_cli::config::{parse_config, Workflow};
use kmn_cli::run::run;

/// Numerical laboratory for the K(m, n) family of dispersive equations.
#[derive(Parser)]
#[command(name = "kmn-lab", version)]
struct Args {
    /// Workflow to execute: simulate, exact-residual, symmetry-check,
    /// reduce, travel, or constraint. Must match the scenario section.
    workflow: String,

    /// Scenario file (one `[workflow]` section of `key = value` lines).
    #[arg(long)]
    config: PathBuf,

    /// Output directory for the CSV files (created if absent).
    #[arg(long)]
    out: PathBuf,
}

fn execute(args: &Args) -> Result<(), String> {
    let workflow = Workflow::from_name(&args.workflow)
        .ok_or_else(|| format!("unknown workflow `{}`", args.workflow))?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read config {}: {e}", args.config.display()))?;
    let scenario = parse_config(&text).map_err(|e| e.to_string())?;
    if scenario.workflow != workflow {
        return Err(format!(
            "config section [{}] does not match requested workflow `{}`",
            scenario.workflow.name(),
            workflow.name()
        ));
    }
    let written = run(&scenario, &args.out).map_err(|e| e.to_string())?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
