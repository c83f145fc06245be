use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sop_core::runner::{run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "sop", version, about = "Sum-of-Parts attribution experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve attribution lower-bound programs and fit their growth
    Certify(Args),
    /// Train an SOP wrapper on a CSV dataset
    Train(Args),
    /// Faithfulness metrics of a checkpoint on a dataset
    Eval(Args),
    /// Label groups on intensity maps as voids or clusters
    Label(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SOP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SOP_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (command, args) = match cli.command {
        Cmd::Certify(a) => (Command::Certify, a),
        Cmd::Train(a) => (Command::Train, a),
        Cmd::Eval(a) => (Command::Eval, a),
        Cmd::Label(a) => (Command::Label, a),
    };
    let result = RunConfig::load(&args.config).and_then(|mut cfg| {
        if args.seed.is_some() {
            cfg.seed = args.seed;
        }
        run(command, &cfg, &args.out)
    });
    match result {
        Ok(outcome) => {
            for note in &outcome.notes {
                eprintln!("{note}");
            }
            for path in &outcome.artifacts {
                println!("{}", path.display());
            }
            if outcome.passed {
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
