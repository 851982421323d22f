use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use gamehedge_cli::{run, Command, Exit, Failure, Flags};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Price,
    Hedge,
    Robust,
    Verify,
    Oracle,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Price => Command::Price,
            Cmd::Hedge => Command::Hedge,
            Cmd::Robust => Command::Robust,
            Cmd::Verify => Command::Verify,
            Cmd::Oracle => Command::Oracle,
        }
    }
}

/// Price and hedge game options with default risk on a lattice.
#[derive(Debug, Parser)]
#[command(name = "gamehedge", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// Initial wealth for the hedge instead of the seller's price.
    #[arg(long, allow_hyphen_values = true)]
    x0_override: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_oracle_steps: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure {
                exit: Exit::Input,
                kind: "usage",
                message: e.to_string(),
            };
            eprintln!("{}", f.to_json());
            return ExitCode::from(Exit::Input as u8);
        }
    };
    if let Some(n) = std::env::var("GAMEHEDGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    let flags = Flags {
        out: args.out,
        epsilon: args.epsilon,
        x0_override: args.x0_override,
        seed: args.seed,
        max_oracle_steps: args.max_oracle_steps,
    };
    let code = match run(args.command.into(), &args.scenario, &flags) {
        Ok(exit) => exit,
        Err(f) => {
            eprintln!("{}", f.to_json());
            f.exit
        }
    };
    if code == Exit::Verification {
        let message = "invariant violated; see report.json".to_string();
        eprintln!(
            "{}",
            Failure {
                exit: code,
                kind: "verification",
                message
            }
            .to_json()
        );
    }
    ExitCode::from(code as u8)
}
