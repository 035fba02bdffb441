//! `qarl`: train, predict and inspect parameter-transferable circuit agents.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "qarl", version, about = "Hybrid soft actor-critic circuit construction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one or more seeded runs and predict their energy curves.
    Train(TrainArgs),
    /// Predict circuits and energies from a saved checkpoint.
    Predict(PredictArgs),
    /// Summarize prediction errors across run directories.
    Stats(StatsArgs),
    /// Write job-shop scheduling Hamiltonians and, for several last-job
    /// lengths, a family manifest.
    JspBuild(JspArgs),
    /// Print exact ground energies of a Hamiltonian or family.
    Diagonalize(DiagonalizeArgs),
    /// Remove redundant gates from a circuit file.
    Preprocess(PreprocessArgs),
    /// Gate counts and depth of every circuit in a prediction table.
    Census(CensusArgs),
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Base seed; run `i` uses `seed + i`. Defaults to the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of runs; defaults to the config's run count.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Overrides the configured episode count.
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Execute runs on separate threads.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Checkpoint directory written by `train`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Grid spacing; defaults to the config's prediction step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Family used to evaluate energies; defaults to the config's.
    #[arg(long)]
    pub eval_family: Option<PathBuf>,
}

#[derive(Args)]
pub struct StatsArgs {
    /// Run directories, each holding a `pec.csv`.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// CSV with `r,energy` reference rows, needed when a table lacks exact energies.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Also write pointwise spreads to this CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Window of the moving-average return reported per run.
    #[arg(long, default_value_t = 500)]
    pub window: usize,
}

#[derive(Args)]
pub struct JspArgs {
    /// Job lengths; the last entry may list alternatives as `{1,2,3}` or `1/2/3`.
    #[arg(long, allow_hyphen_values = true)]
    pub jobs: String,
    #[arg(long)]
    pub machines: usize,
    #[arg(long)]
    pub max_diff: u32,
    #[arg(long = "A")]
    pub a: f64,
    #[arg(long = "B")]
    pub b: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct DiagonalizeArgs {
    /// Hamiltonian file, or a `.toml` family manifest.
    pub hamiltonian: PathBuf,
}

#[derive(Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    /// Bitstring of the state the circuit acts on; all zeros when omitted.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CensusArgs {
    /// A `pec.csv` written by `train` or `predict`.
    pub pec: PathBuf,
    /// Output CSV; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // Keep clap's message on one line: the text before its usage block.
            let msg = e.to_string();
            let summary: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty() && !l.starts_with("tip:") && !l.starts_with("For more information"))
                .collect();
            let summary = summary.join(" ");
            let summary = summary.trim_start_matches("error: ");
            eprintln!("error[usage]: {}", if summary.is_empty() { "bad arguments" } else { summary });
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::JspBuild(a) => commands::jsp_build(&a),
        Command::Diagonalize(a) => commands::diagonalize(&a),
        Command::Preprocess(a) => commands::preprocess(&a),
        Command::Census(a) => commands::census(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let one_line = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {one_line}", e.category());
            ExitCode::FAILURE
        }
    }
}
