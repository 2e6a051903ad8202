//! Command implementations behind the `note2vec` binary.
//!
//! Each command takes already-parsed arguments, does its work and returns
//! the text it wants printed; file outputs are written once, at the end.

pub mod config;
pub mod plot;
pub mod report;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::analysis::{run_detailed, run_experiment, ExperimentReport};
use crate::controls::ControlVariant;
use crate::corpus::{corpus_stats, parse_corpus, Corpus};
use crate::encode::build_vocabulary;
use crate::model::Hyperparams;
use crate::seed::rng_from_seed;

pub use config::ExperimentConfig;

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read corpus {}", path.display()))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    parse_corpus(&label, &text).with_context(|| format!("cannot parse corpus {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Corpus summary line followed by a `pitch,token,count` histogram.
pub fn cmd_stats(corpus_path: &Path, context_size: usize, train_fraction: f64) -> Result<String> {
    let corpus = load_corpus(corpus_path)?;
    let stats = corpus_stats(&corpus, context_size, train_fraction)?;
    let vocab = build_vocabulary(&corpus);
    let mut out = format!(
        "V={}, notes={}, pairs={}, train={}, val={}, melodies={} (context {}, train fraction {})\n",
        stats.vocab_size,
        stats.total_notes,
        stats.total_pairs,
        stats.train_pairs,
        stats.val_pairs,
        corpus.melodies.len(),
        context_size,
        train_fraction
    );
    out.push_str("pitch,token,count\n");
    for entry in vocab.entries() {
        writeln!(out, "{},{},{}", entry.pitch, entry.token, stats.note_histogram[&entry.pitch])?;
    }
    Ok(out)
}

/// Runs the configured experiment, writes the CSV report and returns the
/// report with its text table.
pub fn cmd_experiment(config: &ExperimentConfig) -> Result<(ExperimentReport, String)> {
    let Some(corpus_path) = &config.corpus_path else {
        bail!("no corpus given (set `corpus` in the config or pass --corpus)");
    };
    let corpus = load_corpus(corpus_path)?;
    let report = run_experiment(&corpus, &config.plan)?;
    let output = config.output.clone().unwrap_or_else(|| PathBuf::from("report.csv"));
    write_file(&output, &report::report_csv(&report))?;
    let table = report::report_table(&report);
    Ok((report, table))
}

/// Trains once and writes the embedding scatter plot, plus the per-note
/// regression table when `points_out` is given.
pub fn cmd_embed_plot(
    corpus_path: &Path,
    hp: &Hyperparams,
    run_seed: u64,
    out: &Path,
    points_out: Option<&Path>,
) -> Result<String> {
    let corpus = load_corpus(corpus_path)?;
    let run = run_detailed(&corpus, hp, run_seed)?;
    let tokens = run.vocabulary.tokens();
    let points: Vec<plot::LabeledPoint> = tokens
        .iter()
        .zip(&run.embeddings.rows)
        .map(|(token, row)| plot::LabeledPoint {
            label: token.to_string(),
            x: row[0],
            y: row.get(1).copied().unwrap_or(0.0),
        })
        .collect();
    let title = format!(
        "{}: note embeddings (c={}, d={}, {}, seed {})",
        corpus.label, hp.context_size, hp.embedding_dim, hp.encoder, run_seed
    );
    write_file(out, &plot::render_svg(&title, &points))?;
    if let Some(path) = points_out {
        let pitches = run.vocabulary.pitches();
        write_file(
            path,
            &plot::points_csv(&tokens, &pitches, &run.embeddings.rows, &run.regression.fitted),
        )?;
    }
    let accuracy = run
        .result
        .val_accuracy
        .map_or_else(|| "n/a".to_string(), |a| format!("{a:.4}"));
    Ok(format!(
        "V={}, R={:.4}, validation accuracy={}, final loss={:.4}\n",
        run.vocabulary.len(),
        run.result.r,
        accuracy,
        run.result.final_loss
    ))
}

/// Writes a control corpus built from `corpus_path`.
pub fn cmd_shuffle(corpus_path: &Path, variant: ControlVariant, seed: u64, context_size: usize, out: &Path) -> Result<String> {
    if context_size == 0 {
        bail!("context size must be at least 1");
    }
    let corpus = load_corpus(corpus_path)?;
    let control = variant.generate(&corpus, context_size, &mut rng_from_seed(seed))?;
    write_file(out, &control.to_text())?;
    Ok(format!(
        "{}: {} melodies, {} notes -> {}\n",
        variant,
        control.melodies.len(),
        control.total_notes(),
        out.display()
    ))
}
