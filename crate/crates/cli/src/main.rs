use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use privnids::config::{PipelineConfig, SampleConfig, SurrogateConfig};
use privnids::pipeline::{self, Command, PipelineError};
use privnids::unsw;

/// Correlation-based feature selection, least-squares distortion and
/// classifier evaluation for network intrusion data.
#[derive(Parser)]
#[command(name = "privnids", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Correlation matrix, feature ranking and threshold selection.
    Select(RunArgs),
    /// Fit and apply the distortion for every configured variant.
    Distort(RunArgs),
    /// Privacy measures and classifier results for every variant.
    Evaluate(RunArgs),
    /// All stages in order.
    Pipeline(RunArgs),
    /// Write a synthetic table with the UNSW-NB15 training-set layout.
    Synth {
        #[arg(long)]
        rows: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the effective config as TOML.
    ShowConfig(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; built-in defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Input CSV.
    #[arg(long, conflicts_with = "surrogate")]
    data: Option<PathBuf>,
    /// Use a generated table of this many rows instead of a CSV.
    #[arg(long)]
    surrogate: Option<usize>,
    /// Stratified sample of this many rows.
    #[arg(long)]
    sample: Option<usize>,
    /// Seed for sampling, splitting and the seeded classifiers.
    #[arg(long)]
    seed: Option<u64>,
    /// Correlation threshold.
    #[arg(long)]
    threshold: Option<f64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<PipelineConfig, PipelineError> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(dir) = &self.output {
            config.output_dir = dir.clone();
        }
        if let Some(path) = &self.data {
            config.dataset.path = Some(path.clone());
            config.dataset.surrogate = None;
        }
        if let Some(rows) = self.surrogate {
            let seed = self.seed.unwrap_or(42);
            config.dataset.surrogate = Some(SurrogateConfig { rows, seed });
        }
        if let Some(rows) = self.sample {
            config.sample = Some(SampleConfig { rows, seed: 42 });
        }
        if let Some(seed) = self.seed {
            config.override_seed(seed);
        }
        if let Some(t) = self.threshold {
            config.selection.threshold = t;
        }
        config.validate()?;
        Ok(config)
    }
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    let (command, args) = match cli.command {
        Cmd::Select(a) => (Command::Select, a),
        Cmd::Distort(a) => (Command::Distort, a),
        Cmd::Evaluate(a) => (Command::Evaluate, a),
        Cmd::Pipeline(a) => (Command::Pipeline, a),
        Cmd::ShowConfig(a) => {
            print!("{}", a.resolve()?.to_toml());
            return Ok(());
        }
        Cmd::Synth { rows, seed, out } => {
            let table = unsw::surrogate(rows, seed);
            return unsw::write_csv(&table, &out).map_err(|e| PipelineError::Output {
                path: out,
                source: std::io::Error::other(e),
            });
        }
    };
    let config = args.resolve()?;
    let outcome = pipeline::run(command, &config)?;
    for path in &outcome.outputs {
        println!("{}", path.display());
    }
    eprintln!(
        "{} finished in {:.2}s, {} files in {}",
        command_name(command),
        outcome.manifest.total_time_s,
        outcome.outputs.len(),
        config.output_dir.display()
    );
    Ok(())
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Select => "select",
        Command::Distort => "distort",
        Command::Evaluate => "evaluate",
        Command::Pipeline => "pipeline",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
