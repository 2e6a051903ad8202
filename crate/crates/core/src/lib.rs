//! Note embeddings for melodies.
//!
//! A CBOW-style network learns to predict the next note of a melody from the
//! notes preceding it. The rows of its input weight matrix are low-dimensional
//! note embeddings; an OLS fit of pitch on those embeddings measures how much
//! pitch information the embeddings carry. Shuffle controls separate the
//! effect of note order from that of the note distribution.

pub mod analysis;
pub mod cli;
pub mod controls;
pub mod corpus;
pub mod encode;
pub mod model;
pub mod ols;
pub mod seed;

pub use analysis::{
    aggregate, run_detailed, run_experiment, run_single, train_run, AnalysisError, ExperimentPlan, ExperimentReport, ReportRow,
    RunResult, Variant,
};
pub use controls::{gen_baseline, shuffle_concat, shuffle_within, ControlVariant};
pub use corpus::{corpus_stats, parse_corpus, pitch_of, Corpus, CorpusStats, Melody, Note};
pub use encode::{build_vocabulary, encode_context, extract_pairs, split_pairs, ContextTargetPair, EncoderKind, Vocabulary};
pub use model::{cross_entropy, EmbeddingTable, Hyperparams, Model, TrainLog};
pub use ols::{fit_ols, multiple_correlation, RegressionResult};
