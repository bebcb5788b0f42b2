use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use situref::harness::{compare, parse_scenario, repl, run_scenario, score_trace, Scenario, StrategyKind};
use situref::Config;

#[derive(Parser)]
#[command(
    name = "situref",
    version,
    about = "Resolve referring expressions against simulated perceptual memory"
)]
struct Cli {
    /// Config override, KEY=VALUE (repeatable).
    #[arg(long = "config", value_name = "K=V", global = true)]
    config: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy over a scenario and emit its trace.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        strategy: StrategyKind,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run every strategy and print metrics plus per-utterance outcomes.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Interactive session over the scenario's world.
    Repl {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        strategy: StrategyKind,
    },
}

fn load(path: &Path, overrides: &[String]) -> Result<(Scenario, Config), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let scenario = parse_scenario(&text).map_err(|e| format!("{}:{e}", path.display()))?;
    let config = scenario.config(overrides).map_err(|e| e.to_string())?;
    Ok((scenario, config))
}

fn main_inner(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run {
            scenario,
            strategy,
            trace,
        } => {
            let (scenario, config) = load(&scenario, &cli.config)?;
            let t = run_scenario(&scenario, strategy, &config).map_err(|e| e.to_string())?;
            let metrics = score_trace(&t, &scenario).map_err(|e| e.to_string())?;
            match trace {
                Some(path) => {
                    fs::write(&path, t.to_tsv()).map_err(|e| format!("{}: {e}", path.display()))?;
                    println!("{metrics}");
                }
                None => {
                    print!("{}", t.to_tsv());
                    eprintln!("{metrics}");
                }
            }
        }
        Command::Compare { scenario } => {
            let (scenario, config) = load(&scenario, &cli.config)?;
            let cmp = compare(&scenario, &config).map_err(|e| e.to_string())?;
            print!("{cmp}");
        }
        Command::Repl { scenario, strategy } => {
            let (scenario, config) = load(&scenario, &cli.config)?;
            let stdin = io::stdin();
            let stdout = io::stdout();
            repl(&scenario, strategy, &config, stdin.lock(), stdout.lock()).map_err(|e| e.to_string())?;
        }
    }
    io::stdout().flush().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
