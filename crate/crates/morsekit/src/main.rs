use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use morsekit::experiment::{run_experiment, write_report, ExperimentSpec};
use morsekit::generator::{generate_dataset, GenerationConfig};
use morsekit::io::{export_csv, load_dataset, save_dataset};
use morsekit::metrics::metrics_report;
use morsekit::mlp::{init_network, train, MlpConfig};

#[derive(Parser)]
#[command(name = "morsekit", version, about = "Morse-code dataset toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset variant and write it as a binary dataset file.
    Gen {
        /// Variant family 1-4.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
        family: u32,
        /// Noise sigma 0-4.
        #[arg(long, value_parser = clap::value_parser!(u32).range(0..=4))]
        sigma: u32,
        /// Examples per class (overrides the 7000 default).
        #[arg(long, default_value_t = 7000)]
        per_class: usize,
        /// Master seed; mandatory, there is no silent entropy.
        #[arg(long)]
        seed: u64,
        /// Optional TOML config file; CLI flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the difficulty metrics of a dataset file.
    Metrics {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Include the full per-class tables in the report.
        #[arg(long)]
        tables: bool,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the MLP on a dataset file and write the training report.
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1024)]
        hidden: usize,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 0.0)]
        l2: f64,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 128)]
        batch: usize,
        #[arg(long)]
        seed: u64,
        /// Report path; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run an experiment suite described by a TOML spec.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export a dataset file as CSV.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn emit(text: &str, path: Option<&PathBuf>) -> morsekit::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => println!("{}", text),
    }
    Ok(())
}

fn run() -> morsekit::Result<()> {
    match Cli::parse().command {
        Command::Gen { family, sigma, per_class, seed, config, out } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    toml::from_str::<GenerationConfig>(&text)?
                }
                None => GenerationConfig::variant(family, sigma, 1.0)?,
            };
            cfg.per_class = per_class;
            cfg.master_seed = seed;
            cfg.validate()?;
            let dataset = generate_dataset(&cfg)?;
            save_dataset(&dataset, &out)?;
            eprintln!("wrote {} samples to {}", dataset.len(), out.display());
        }
        Command::Metrics { input, threshold, tables, out } => {
            let dataset = load_dataset(&input)?;
            let report = metrics_report(&dataset, threshold, tables)?;
            emit(&serde_json::to_string_pretty(&report)?, out.as_ref())?;
        }
        Command::Train { input, hidden, density, l2, epochs, batch, seed, report } => {
            let dataset = load_dataset(&input)?;
            let cfg = MlpConfig {
                n_hidden: hidden,
                density,
                l2_lambda: l2,
                epochs,
                batch_size: batch,
                init_seed: seed,
                shuffle_seed: seed,
                ..MlpConfig::standard(dataset.n_features)
            };
            let mut net = init_network(&cfg);
            let train_report = train(&mut net, &dataset, &cfg)?;
            emit(&serde_json::to_string_pretty(&train_report)?, report.as_ref())?;
        }
        Command::Experiment { spec, out } => {
            let text = std::fs::read_to_string(spec)?;
            let spec = ExperimentSpec::from_toml(&text)?;
            let report = run_experiment(&spec)?;
            write_report(&report, &out)?;
            eprintln!("wrote {} rows to {}", report.rows.len(), out.display());
        }
        Command::Export { input, out } => {
            let dataset = load_dataset(&input)?;
            export_csv(&dataset, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {}", s);
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
