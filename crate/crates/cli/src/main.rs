use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cornerpmt::config::select;
use cornerpmt::format::Format;
use cornerpmt::run::{configure_threads, execute, Outcome, Stage};

/// Mollified corner metrics: curvature concentration, conformal solves and
/// mass checks over δ sweeps.
#[derive(Parser)]
#[command(name = "cornerpmt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mollify the collar for every δ and verify the smoothing lemmas.
    Mollify(Common),
    /// Collar curvature and curvature concentration of the mollified paths.
    Curvature(Common),
    /// Conformal solves and the mass table.
    Pipeline(Common),
    /// Everything, with the full check list.
    Sweep(Common),
    /// Compare the slice identities against the finite-difference oracle.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML or JSON config with scenario blocks; the shipped set otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run only this scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "cornerpmt-out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn print(outcomes: &[Outcome]) {
    for o in outcomes {
        let failed: Vec<_> = o.checks.iter().filter(|c| !c.passed).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!("{verdict} {} ({} checks)", o.scenario, o.checks.len());
        if let Some(a) = &o.annotation {
            println!("  note: {a}");
        }
        for c in failed {
            println!("  failed {} (criterion {}): {}", c.name, c.criterion, c.detail);
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, args) = match cli.command {
        Command::Mollify(a) => (Stage::Mollify, a),
        Command::Curvature(a) => (Stage::Curvature, a),
        Command::Pipeline(a) => (Stage::Pipeline, a),
        Command::Sweep(a) => (Stage::Sweep, a),
        Command::OracleCheck(a) => (Stage::Oracle, a),
    };
    let run = || -> cornerpmt::Result<Vec<Outcome>> {
        configure_threads()?;
        let scenarios = select(args.config.as_deref(), args.scenario.as_deref())?;
        execute(stage, &scenarios, &args.out, args.format)
    };
    match run() {
        Ok(outcomes) => {
            print(&outcomes);
            if outcomes.iter().all(Outcome::passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
