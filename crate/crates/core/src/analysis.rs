//! Single runs (train, extract embeddings, regress pitch on them) and
//! multi-run experiments aggregated into report rows.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::controls::{ControlError, ControlVariant};
use crate::corpus::Corpus;
use crate::encode::{extract_corpus_pairs, split_pairs, EncodeError, EncoderKind, Vocabulary};
use crate::model::{EmbeddingTable, Hyperparams, Model, ModelError, TrainLog};
use crate::ols::{fit_ols, OlsError, RegressionResult};
use crate::seed::{derive_run_seed, rng_from_seed, substream, DEFAULT_SEED};

/// Minimum number of pairs a run needs.
pub const MIN_PAIRS: usize = 10;

/// A cell fails when more than this fraction of its runs fail.
pub const MAX_FAILED_FRACTION: f64 = 0.1;

const CONTROL_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Regression(#[from] OlsError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("corpus yields {pairs} pairs at context size {context_size}; at least {MIN_PAIRS} are needed")]
    TooFewPairs { pairs: usize, context_size: usize },
    #[error("vocabulary of {vocab_size} notes is too small for embedding dimension {dim} (need at least {})", dim + 2)]
    VocabularyTooSmall { vocab_size: usize, dim: usize },
    #[error("cannot aggregate an empty sequence")]
    EmptyAggregate,
    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),
    #[error("cell {variant}/c={context_size}/d={embedding_dim}/{encoder}: {failed} of {n_runs} runs failed (last error: {last_error})")]
    CellFailed {
        variant: Variant,
        context_size: usize,
        embedding_dim: usize,
        encoder: EncoderKind,
        failed: usize,
        n_runs: usize,
        last_error: String,
    },
}

impl AnalysisError {
    /// Errors that invalidate one run but not the experiment.
    pub fn is_run_failure(&self) -> bool {
        matches!(
            self,
            AnalysisError::Regression(OlsError::Degenerate { .. })
                | AnalysisError::Regression(OlsError::NonFinite)
                | AnalysisError::Model(ModelError::NonFinite { .. })
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunResult {
    pub r: f64,
    /// `None` when the train fraction leaves no validation pairs.
    pub val_accuracy: Option<f64>,
    pub final_loss: f64,
    pub run_seed: u64,
}

/// Everything a single run produces.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub vocabulary: Vocabulary,
    pub model: Model,
    pub log: TrainLog,
    pub embeddings: EmbeddingTable,
    pub regression: RegressionResult,
    pub result: RunResult,
}

/// A trained model with the data it was trained on.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub vocabulary: Vocabulary,
    pub model: Model,
    pub log: TrainLog,
    pub val_accuracy: Option<f64>,
}

/// Builds the vocabulary and pooled pairs of `corpus`, splits them and trains
/// one model. The split, the initial weights and the epoch orderings all come
/// from one generator seeded with `run_seed`, drawn in that order.
pub fn train_run(corpus: &Corpus, hp: &Hyperparams, run_seed: u64) -> Result<TrainedRun, AnalysisError> {
    let vocabulary = Vocabulary::build(corpus);
    let pairs = extract_corpus_pairs(corpus, &vocabulary, hp.context_size)?;
    if pairs.len() < MIN_PAIRS {
        return Err(AnalysisError::TooFewPairs {
            pairs: pairs.len(),
            context_size: hp.context_size,
        });
    }

    let mut rng = rng_from_seed(run_seed);
    let (train, val) = split_pairs(&pairs, hp.train_fraction, &mut rng)?;
    let v = vocabulary.len();
    let input_dim = hp.encoder.input_dim(v, hp.context_size);
    let mut model = Model::init(input_dim, hp.embedding_dim, v, &mut rng)?;
    let log = model.train(&train, hp, &mut rng)?;
    let val_accuracy = if val.is_empty() {
        None
    } else {
        Some(model.validate(&val, hp.encoder)?)
    };
    Ok(TrainedRun {
        vocabulary,
        model,
        log,
        val_accuracy,
    })
}

/// Trains one model on `corpus` and regresses the vocabulary pitches on its embeddings.
pub fn run_detailed(corpus: &Corpus, hp: &Hyperparams, run_seed: u64) -> Result<RunArtifacts, AnalysisError> {
    let vocab_size = Vocabulary::build(corpus).len();
    if vocab_size < hp.embedding_dim + 2 {
        return Err(AnalysisError::VocabularyTooSmall {
            vocab_size,
            dim: hp.embedding_dim,
        });
    }
    let TrainedRun {
        vocabulary,
        model,
        log,
        val_accuracy,
    } = train_run(corpus, hp, run_seed)?;

    let embeddings = model.embeddings();
    let pitches: Vec<f64> = vocabulary.pitches().into_iter().map(f64::from).collect();
    let regression = fit_ols(&embeddings.rows, &pitches)?;
    let result = RunResult {
        r: regression.r,
        val_accuracy,
        final_loss: log.final_loss().unwrap_or(f64::NAN),
        run_seed,
    };
    Ok(RunArtifacts {
        vocabulary,
        model,
        log,
        embeddings,
        regression,
        result,
    })
}

pub fn run_single(corpus: &Corpus, hp: &Hyperparams, run_seed: u64) -> Result<RunResult, AnalysisError> {
    run_detailed(corpus, hp, run_seed).map(|a| a.result)
}

/// Mean and sample standard deviation (divisor `n - 1`, absent for `n < 2`).
pub fn aggregate(values: &[f64]) -> Result<(f64, Option<f64>), AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::EmptyAggregate);
    }
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let n = values.len();
    let sd = (n >= 2).then(|| (m2 / (n - 1) as f64).sqrt());
    Ok((mean, sd))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Original,
    Baseline,
    RandomSong,
    FakeMelodies,
}

impl Variant {
    pub fn control(self) -> Option<ControlVariant> {
        match self {
            Variant::Original => None,
            Variant::Baseline => Some(ControlVariant::Baseline),
            Variant::RandomSong => Some(ControlVariant::RandomSong),
            Variant::FakeMelodies => Some(ControlVariant::FakeMelodies),
        }
    }

    pub fn name(self) -> &'static str {
        match self.control() {
            None => "original",
            Some(control) => control.name(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = ControlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("original") {
            return Ok(Variant::Original);
        }
        Ok(match s.parse::<ControlVariant>()? {
            ControlVariant::Baseline => Variant::Baseline,
            ControlVariant::RandomSong => Variant::RandomSong,
            ControlVariant::FakeMelodies => Variant::FakeMelodies,
        })
    }
}

/// The grid of cells an experiment runs and the shared training settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub variants: Vec<Variant>,
    pub context_sizes: Vec<usize>,
    pub embedding_dims: Vec<usize>,
    pub encoders: Vec<EncoderKind>,
    pub n_runs: usize,
    pub base_seed: u64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub train_fraction: f64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        let hp = Hyperparams::default();
        ExperimentPlan {
            variants: vec![Variant::Original],
            context_sizes: vec![1, 2, 3, 4],
            embedding_dims: vec![hp.embedding_dim],
            encoders: vec![hp.encoder],
            n_runs: 100,
            base_seed: DEFAULT_SEED,
            learning_rate: hp.learning_rate,
            epochs: hp.epochs,
            train_fraction: hp.train_fraction,
        }
    }
}

/// One experiment cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub index: usize,
    pub variant: Variant,
    pub context_size: usize,
    pub embedding_dim: usize,
    pub encoder: EncoderKind,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let fail = |msg: &str| Err(AnalysisError::InvalidPlan(msg.to_string()));
        if self.variants.is_empty() || self.context_sizes.is_empty() || self.embedding_dims.is_empty() || self.encoders.is_empty() {
            return fail("variants, context sizes, embedding dims and encoders must be non-empty");
        }
        if self.context_sizes.contains(&0) {
            return fail("context sizes must be at least 1");
        }
        if self.embedding_dims.contains(&0) {
            return fail("embedding dims must be at least 1");
        }
        if self.n_runs == 0 {
            return fail("n_runs must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning rate must be positive");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return fail("train fraction must lie in (0, 1]");
        }
        Ok(())
    }

    /// Cells in report order: variant, then context size, dimension, encoder.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &variant in &self.variants {
            for &context_size in &self.context_sizes {
                for &embedding_dim in &self.embedding_dims {
                    for &encoder in &self.encoders {
                        cells.push(Cell {
                            index: cells.len(),
                            variant,
                            context_size,
                            embedding_dim,
                            encoder,
                        });
                    }
                }
            }
        }
        cells
    }

    pub fn hyperparams(&self, cell: &Cell) -> Hyperparams {
        Hyperparams {
            context_size: cell.context_size,
            embedding_dim: cell.embedding_dim,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            train_fraction: self.train_fraction,
            encoder: cell.encoder,
            base_seed: self.base_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub variant: Variant,
    pub context_size: usize,
    pub embedding_dim: usize,
    pub encoder: EncoderKind,
    pub n_runs: usize,
    pub mean_r: f64,
    pub sd_r: Option<f64>,
    pub mean_accuracy: Option<f64>,
    pub failed_runs: usize,
    /// Successful runs in run-index order.
    pub runs: Vec<RunResult>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

/// One run of a cell: build the (possibly shuffled) corpus and train on it.
pub fn run_cell(corpus: &Corpus, plan: &ExperimentPlan, cell: &Cell, run_index: usize) -> Result<RunResult, AnalysisError> {
    let run_seed = derive_run_seed(plan.base_seed, cell.index as u64, run_index as u64);
    let hp = plan.hyperparams(cell);
    match cell.variant.control() {
        None => run_single(corpus, &hp, run_seed),
        Some(control) => {
            let mut rng = rng_from_seed(substream(run_seed, CONTROL_STREAM));
            let shuffled = control.generate(corpus, cell.context_size, &mut rng)?;
            run_single(&shuffled, &hp, run_seed)
        }
    }
}

/// Runs every cell of `plan` `n_runs` times. Runs execute in parallel; results
/// are collected and aggregated in run-index order.
pub fn run_experiment(corpus: &Corpus, plan: &ExperimentPlan) -> Result<ExperimentReport, AnalysisError> {
    plan.validate()?;
    let mut report = ExperimentReport::default();
    for cell in plan.cells() {
        let outcomes: Vec<Result<RunResult, AnalysisError>> = (0..plan.n_runs)
            .into_par_iter()
            .map(|run| run_cell(corpus, plan, &cell, run))
            .collect();

        let mut runs = Vec::with_capacity(plan.n_runs);
        let mut failed = 0;
        let mut last_error = None;
        for outcome in outcomes {
            match outcome {
                Ok(run) => runs.push(run),
                Err(err) if err.is_run_failure() => {
                    failed += 1;
                    last_error = Some(err);
                }
                Err(err) => return Err(err),
            }
        }
        if failed as f64 > MAX_FAILED_FRACTION * plan.n_runs as f64 || runs.is_empty() {
            return Err(AnalysisError::CellFailed {
                variant: cell.variant,
                context_size: cell.context_size,
                embedding_dim: cell.embedding_dim,
                encoder: cell.encoder,
                failed,
                n_runs: plan.n_runs,
                last_error: last_error.map(|e| e.to_string()).unwrap_or_default(),
            });
        }

        let rs: Vec<f64> = runs.iter().map(|r| r.r).collect();
        let (mean_r, sd_r) = aggregate(&rs)?;
        let accuracies: Vec<f64> = runs.iter().filter_map(|r| r.val_accuracy).collect();
        let mean_accuracy = aggregate(&accuracies).ok().map(|(m, _)| m);
        report.rows.push(ReportRow {
            variant: cell.variant,
            context_size: cell.context_size,
            embedding_dim: cell.embedding_dim,
            encoder: cell.encoder,
            n_runs: plan.n_runs,
            mean_r,
            sd_r,
            mean_accuracy,
            failed_runs: failed,
            runs,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;

    fn walk_corpus() -> Corpus {
        // stepwise melodies over a C major range
        let scale = ["C4", "D4", "E4", "F4", "G4", "A4", "B4", "C5"];
        let mut text = String::new();
        for (m, start) in [0usize, 3, 5].iter().enumerate() {
            text.push_str(&format!("@m{m}\n"));
            let mut pos = *start as i32;
            let mut dir = 1;
            for step in 0..40 {
                text.push_str(scale[pos as usize]);
                text.push(' ');
                if pos == 7 || pos == 0 || step % 7 == 6 {
                    dir = -dir;
                }
                pos = (pos + dir).clamp(0, 7);
            }
            text.push('\n');
        }
        parse_corpus("walk", &text).unwrap()
    }

    #[test]
    fn aggregate_small_cases() {
        assert_eq!(aggregate(&[1.0, 1.0, 1.0]).unwrap(), (1.0, Some(0.0)));
        let (mean, sd) = aggregate(&[0.0, 1.0]).unwrap();
        assert_eq!(mean, 0.5);
        assert!((sd.unwrap() - 0.707_106_781_186_547_5).abs() < 1e-12);
        assert_eq!(aggregate(&[0.3]).unwrap(), (0.3, None));
        assert_eq!(aggregate(&[]), Err(AnalysisError::EmptyAggregate));
    }

    #[test]
    fn run_is_deterministic() {
        let corpus = walk_corpus();
        let hp = Hyperparams { epochs: 5, ..Hyperparams::default() };
        let a = run_single(&corpus, &hp, 17).unwrap();
        let b = run_single(&corpus, &hp, 17).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a.r));
        let c = run_single(&corpus, &hp, 18).unwrap();
        assert_ne!(a.r, c.r);
    }

    #[test]
    fn two_note_vocabulary_is_too_small() {
        let corpus = parse_corpus("ab", &format!("@ab\n{}\n", "A4 B4 ".repeat(20))).unwrap();
        let err = run_single(&corpus, &Hyperparams::default(), 1).unwrap_err();
        assert!(matches!(err, AnalysisError::VocabularyTooSmall { vocab_size: 2, dim: 2 }));
    }

    #[test]
    fn too_few_pairs() {
        let corpus = parse_corpus("s", "@s\nC4 D4 E4 F4 G4 A4\n").unwrap();
        let err = run_single(&corpus, &Hyperparams::default(), 1).unwrap_err();
        assert!(matches!(err, AnalysisError::TooFewPairs { pairs: 4, .. }));
    }

    #[test]
    fn report_shape() {
        let corpus = walk_corpus();
        let plan = ExperimentPlan {
            variants: vec![Variant::Original, Variant::FakeMelodies],
            context_sizes: vec![1, 2],
            embedding_dims: vec![1, 2],
            encoders: vec![EncoderKind::MultiHot, EncoderKind::ConcatOneHot],
            n_runs: 2,
            epochs: 2,
            ..ExperimentPlan::default()
        };
        let report = run_experiment(&corpus, &plan).unwrap();
        assert_eq!(report.rows.len(), 2 * 2 * 2 * 2);
        assert_eq!(report.rows[0].variant, Variant::Original);
        assert_eq!(report.rows[15].variant, Variant::FakeMelodies);
        assert!(report.rows.iter().all(|r| r.sd_r.is_some() && r.failed_runs == 0));
    }

    #[test]
    fn single_run_has_no_sd() {
        let plan = ExperimentPlan {
            context_sizes: vec![2],
            n_runs: 1,
            epochs: 1,
            ..ExperimentPlan::default()
        };
        let report = run_experiment(&walk_corpus(), &plan).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].sd_r, None);
    }

    #[test]
    fn plan_validation() {
        let bad = ExperimentPlan { n_runs: 0, ..ExperimentPlan::default() };
        assert!(matches!(run_experiment(&walk_corpus(), &bad), Err(AnalysisError::InvalidPlan(_))));
        let bad = ExperimentPlan { context_sizes: vec![0], ..ExperimentPlan::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("original".parse::<Variant>().unwrap(), Variant::Original);
        assert_eq!("fake_melodies".parse::<Variant>().unwrap(), Variant::FakeMelodies);
        assert!("shuffled".parse::<Variant>().is_err());
    }
}
