use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use symlab::verify::CHECKS;
use symlab_cli::demos::{demo, DEMOS};
use symlab_cli::{run_scenario, RunError, RunOptions, Scenario};

/// Checks rearrangement inequalities on discretized functions.
#[derive(Parser)]
#[command(name = "symlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Replace the scenario grid spacing.
    #[arg(long, global = true)]
    h_override: Option<f64>,
    /// Directory for reports.json, summary.csv and plots/.
    #[arg(long, global = true, default_value = "symlab-out")]
    out_dir: PathBuf,
    /// Replace the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { file: PathBuf },
    /// Run a bundled scenario.
    Demo { name: String },
    /// List the available checks.
    ListChecks,
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn run(text: &str, cli: &Cli) -> ExitCode {
    let scenario = match Scenario::parse(text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: malformed scenario {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let opts = RunOptions { h_override: cli.h_override, seed: cli.seed };
    match run_scenario(&scenario, &opts, &cli.out_dir) {
        Ok(outcome) => {
            for e in &outcome.entries {
                let status = if e.matches { "ok  " } else { "FAIL" };
                let r = &e.report;
                match &e.error {
                    Some(err) => println!("{status} {} [{}] error: {err}", r.name, r.check),
                    None => println!(
                        "{status} {} [{}] {} (expected {}), lhs {:.6} rhs {:.6} tol {:.3e}",
                        r.name,
                        r.check,
                        r.verdict.as_str(),
                        e.expected.as_str(),
                        r.lhs,
                        r.rhs,
                        r.tolerance
                    ),
                }
            }
            let bad = outcome.entries.iter().filter(|e| !e.matches).count();
            println!("{} checks, {bad} unexpected; reports in {}", outcome.entries.len(), cli.out_dir.display());
            if bad == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_MISMATCH)
            }
        }
        Err(RunError::Scenario(e)) => {
            eprintln!("error: invalid scenario {e}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(RunError::Io(e)) => {
            eprintln!("error: writing outputs: {e}");
            ExitCode::from(EXIT_MISMATCH)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match &cli.command {
        Command::ListChecks => {
            for (name, what) in CHECKS {
                println!("{name:<24} {what}");
            }
            ExitCode::SUCCESS
        }
        Command::Demo { name } => match demo(name) {
            Some(text) => run(text, &cli),
            None => {
                let known: Vec<&str> = DEMOS.iter().map(|(n, _)| *n).collect();
                eprintln!("error: unknown demo {name:?}; available: {}", known.join(", "));
                ExitCode::from(EXIT_INVALID)
            }
        },
        Command::Run { file } => match std::fs::read_to_string(file) {
            Ok(text) => run(&text, &cli),
            Err(e) => {
                eprintln!("error: reading {}: {e}", file.display());
                ExitCode::from(EXIT_INVALID)
            }
        },
    }
}
