use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use note2vec::cli::{self, ExperimentConfig};
use note2vec::controls::ControlVariant;
use note2vec::encode::EncoderKind;
use note2vec::model::Hyperparams;
use note2vec::seed::DEFAULT_SEED;

#[derive(Parser)]
#[command(name = "note2vec", about = "Train CBOW note embeddings and relate them to pitch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print vocabulary size, pair counts and the note histogram of a corpus
    Stats {
        corpus: PathBuf,
        #[arg(long, default_value_t = 2)]
        context: usize,
        #[arg(long, default_value_t = 0.9)]
        train_fraction: f64,
    },
    /// Run a multi-run experiment grid and write a CSV report
    Experiment {
        /// `key = value` configuration file; flags below override it
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Comma-separated: original, baseline, random_song, fake_melodies
        #[arg(long)]
        variants: Option<String>,
        /// Comma-separated context sizes
        #[arg(long)]
        contexts: Option<String>,
        /// Comma-separated embedding dimensions
        #[arg(long)]
        dims: Option<String>,
        /// Comma-separated: multi_hot, concat_one_hot
        #[arg(long)]
        encoders: Option<String>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        train_fraction: Option<f64>,
        /// CSV output path (default report.csv)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train once and draw the note embeddings as an SVG scatter plot
    EmbedPlot {
        corpus: PathBuf,
        #[arg(long, default_value_t = 2)]
        context: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = EncoderKind::MultiHot.name().to_string())]
        encoder: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        learning_rate: f64,
        #[arg(long, default_value_t = 40)]
        epochs: usize,
        #[arg(long, default_value_t = 0.9)]
        train_fraction: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write token,pitch,coordinates,fitted per note to this CSV
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Write a shuffle-control corpus
    Shuffle {
        corpus: PathBuf,
        /// baseline, random_song or fake_melodies
        #[arg(long)]
        variant: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Context size the baseline melody is sized for
        #[arg(long, default_value_t = 2)]
        context: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Stats {
            corpus,
            context,
            train_fraction,
        } => print!("{}", cli::cmd_stats(&corpus, context, train_fraction)?),
        Command::Experiment {
            config,
            corpus,
            variants,
            contexts,
            dims,
            encoders,
            runs,
            seed,
            learning_rate,
            epochs,
            train_fraction,
            out,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            let overrides: [(&str, Option<String>); 11] = [
                ("corpus", corpus.map(|p| p.display().to_string())),
                ("variants", variants),
                ("context_sizes", contexts),
                ("embedding_dims", dims),
                ("encoders", encoders),
                ("n_runs", runs.map(|v| v.to_string())),
                ("seed", seed.map(|v| v.to_string())),
                ("learning_rate", learning_rate.map(|v| v.to_string())),
                ("epochs", epochs.map(|v| v.to_string())),
                ("train_fraction", train_fraction.map(|v| v.to_string())),
                ("output", out.map(|p| p.display().to_string())),
            ];
            for (key, value) in overrides {
                if let Some(value) = value {
                    cfg.set(key, &value).map_err(|e| anyhow::anyhow!("--{key}: {e}"))?;
                }
            }
            let (_, table) = cli::cmd_experiment(&cfg)?;
            print!("{table}");
        }
        Command::EmbedPlot {
            corpus,
            context,
            dim,
            encoder,
            seed,
            learning_rate,
            epochs,
            train_fraction,
            out,
            points,
        } => {
            let hp = Hyperparams {
                context_size: context,
                embedding_dim: dim,
                learning_rate,
                epochs,
                train_fraction,
                encoder: encoder.parse()?,
                base_seed: seed,
            };
            print!("{}", cli::cmd_embed_plot(&corpus, &hp, seed, &out, points.as_deref())?);
        }
        Command::Shuffle {
            corpus,
            variant,
            seed,
            context,
            out,
        } => {
            let variant: ControlVariant = variant.parse()?;
            print!("{}", cli::cmd_shuffle(&corpus, variant, seed, context, &out)?);
        }
    }
    Ok(())
}
