use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quasitriple::experiment::{run_file, Experiment, Overrides};

#[derive(Parser)]
#[command(name = "quasitriple", version, about = "Quasi boundary triple experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    config: PathBuf,
    /// Output directory (overrides the config's `out`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides the config's `jobs`)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Green identity, gamma field and Weyl function checks
    #[command(alias = "green-check")]
    TripleCheck(Common),
    /// Krein resolvent formula against the direct solve
    KreinCheck(Common),
    /// Self-adjointness hypotheses for the boundary parameter
    Hypotheses(Common),
    /// Sample and fit the Weyl function decay envelope
    DecayFit(Common),
    /// Lower bounds for the bottom of the spectrum
    BoundCertify(Common),
    /// Coupling sweep of the ground state
    Sweep(Common),
    /// Run whatever experiment the config names
    Run(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::TripleCheck(c) => (Some(Experiment::TripleCheck), c),
        Command::KreinCheck(c) => (Some(Experiment::KreinCheck), c),
        Command::Hypotheses(c) => (Some(Experiment::Hypotheses), c),
        Command::DecayFit(c) => (Some(Experiment::DecayFit), c),
        Command::BoundCertify(c) => (Some(Experiment::BoundCertify), c),
        Command::Sweep(c) => (Some(Experiment::Sweep), c),
        Command::Run(c) => (None, c),
    };
    let overrides = Overrides { experiment, out: common.out, jobs: common.jobs };
    let outcome = run_file(&common.config, &overrides);
    match &outcome.error {
        None => println!("wrote {}", outcome.out_dir.display()),
        Some(e) => eprintln!("error [{}]: {e}", e.kind()),
    }
    ExitCode::from(outcome.exit_code as u8)
}
