use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use critlab::harness::{exit_code, run, CliOptions, Command};

#[derive(Parser)]
#[command(
    name = "critlab",
    version,
    about = "Criterion collapse checks, surrogate demos and training runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Compare criterion argmin sets with the error argmin on Bernoulli classes
    CollapseCheck(Flags),
    /// Three-point surrogate example and loss-restraining witnesses
    SurrogateDemo(Flags),
    /// Train one model and write its per-epoch trajectory
    Train(Flags),
    /// Grid search every method and report the selected values
    Sweep(Flags),
}

#[derive(clap::Args)]
struct Flags {
    /// Config file, or the name of a bundled config
    #[arg(long)]
    config: Option<String>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for independent classes, trials and grid cells
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    parallel: u64,
    /// Also write an SVG plot (train only)
    #[arg(long)]
    plot: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (command, flags) = match cli.command {
        Sub::CollapseCheck(f) => (Command::CollapseCheck, f),
        Sub::SurrogateDemo(f) => (Command::SurrogateDemo, f),
        Sub::Train(f) => (Command::Train, f),
        Sub::Sweep(f) => (Command::Sweep, f),
    };
    let opts = CliOptions {
        config: flags.config,
        out: flags.out,
        seed: flags.seed,
        parallel: flags.parallel as usize,
        plot: flags.plot,
    };
    let result = run(command, &opts);
    match &result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for failure in &outcome.failures {
                eprintln!("assertion failed: {failure}");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
