use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use exact_dfs::runner::{self, Job, Overrides, RunError};

#[derive(Parser)]
#[command(name = "exact-dfs", version, about = "Decoherence-free states of two emitters in a coupled-cavity array")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the exact dynamics for every separation and write CSV/JSON.
    Run(Common),
    /// Print the analytic steady values next to any measured ones.
    Constants(Common),
    /// Compare against exact diagonalization of the full Hamiltonian.
    OracleCheck(Common),
    /// Print Markovian and exact decoherence-free verdicts.
    Criterion(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

impl Common {
    fn job(&self) -> Result<Job, RunError> {
        let o = Overrides { out: self.out.clone(), workers: self.workers, horizon: self.horizon, step: self.step };
        Job::load(&self.scenario, &o)
    }
}

fn print<S: Serialize>(value: &S) -> Result<(), RunError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| RunError::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn dispatch(cmd: &Command) -> Result<(), RunError> {
    match cmd {
        Command::Run(c) => {
            let s = runner::run(&c.job()?)?;
            print(&s)
        }
        Command::Constants(c) => print(&runner::constants(&c.job()?)?),
        Command::OracleCheck(c) => print(&runner::oracle_check(&c.job()?)?),
        Command::Criterion(c) => print(&runner::criterion(&c.job()?)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let reason = e.kind().to_string();
            eprintln!("{}", RunError::Parse(format!("command line: {reason}")).reason_line());
            return ExitCode::from(2);
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.reason_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
