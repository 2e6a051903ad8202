//! CBOW note predictor: linear hidden layer, softmax output, cross-entropy
//! loss and plain per-sample SGD.
//!
//! Weights are stored row-major: `w_in` is `input_dim x dim` and its rows are
//! the note embeddings, `w_out` is `dim x vocab_size`. There are no bias terms.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::encode::{encode_context, ContextTargetPair, EncoderKind};
use crate::seed::DEFAULT_SEED;

/// Floor applied to the target probability before taking the log.
pub const LOSS_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model dimensions must be positive (input {input_dim}, hidden {dim}, vocabulary {vocab_size})")]
    ZeroDimension {
        input_dim: usize,
        dim: usize,
        vocab_size: usize,
    },
    #[error("input has {got} entries, model expects {expected}")]
    InputMismatch { expected: usize, got: usize },
    #[error("target index {target} outside vocabulary of {vocab_size}")]
    TargetOutOfRange { target: usize, vocab_size: usize },
    #[error("non-finite value after update (epoch {epoch}, step {step}, loss {loss})")]
    NonFinite { epoch: usize, step: usize, loss: f64 },
    #[error("no training pairs")]
    NoTrainingPairs,
    #[error("validation set is empty; use a train fraction below 1")]
    EmptyValidation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub context_size: usize,
    pub embedding_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub train_fraction: f64,
    pub encoder: EncoderKind,
    pub base_seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            context_size: 2,
            embedding_dim: 2,
            learning_rate: 0.01,
            epochs: 40,
            train_fraction: 0.9,
            encoder: EncoderKind::MultiHot,
            base_seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    input_dim: usize,
    dim: usize,
    vocab_size: usize,
    w_in: Vec<f64>,
    w_out: Vec<f64>,
}

/// Hidden activations and output probabilities of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub hidden: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Loss gradients, laid out like the weights they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w_in: Vec<f64>,
    pub w_out: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    /// Mean training loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

impl TrainLog {
    pub fn final_loss(&self) -> Option<f64> {
        self.epoch_losses.last().copied()
    }
}

/// One row per vocabulary note, in vocabulary index order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub rows: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

/// An encoded training example.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Vec<f64>,
    pub target: usize,
}

impl Example {
    pub fn encode(pair: &ContextTargetPair, kind: EncoderKind, vocab_size: usize) -> Self {
        Example {
            input: encode_context(pair, kind, vocab_size),
            target: pair.target,
        }
    }
}

pub fn encode_all(pairs: &[ContextTargetPair], kind: EncoderKind, vocab_size: usize) -> Vec<Example> {
    pairs.iter().map(|p| Example::encode(p, kind, vocab_size)).collect()
}

/// Numerically stable softmax. Entries are floored at the smallest positive
/// normal so every probability stays strictly positive.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&u| (u - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p = (*p / sum).max(f64::MIN_POSITIVE);
    }
    out
}

pub fn cross_entropy(probs: &[f64], target: usize) -> f64 {
    -probs[target].max(LOSS_EPSILON).ln()
}

/// Index of the largest probability; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl Model {
    /// Every weight drawn independently from `U[-0.5/dim, 0.5/dim]`.
    pub fn init<R: Rng + ?Sized>(
        input_dim: usize,
        dim: usize,
        vocab_size: usize,
        rng: &mut R,
    ) -> Result<Self, ModelError> {
        if input_dim == 0 || dim == 0 || vocab_size == 0 {
            return Err(ModelError::ZeroDimension {
                input_dim,
                dim,
                vocab_size,
            });
        }
        let bound = 0.5 / dim as f64;
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-bound..=bound)).collect() };
        let w_in = draw(input_dim * dim);
        let w_out = draw(dim * vocab_size);
        Ok(Model {
            input_dim,
            dim,
            vocab_size,
            w_in,
            w_out,
        })
    }

    /// Builds a model from explicit row-major weights.
    pub fn from_weights(
        input_dim: usize,
        dim: usize,
        vocab_size: usize,
        w_in: Vec<f64>,
        w_out: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if input_dim == 0 || dim == 0 || vocab_size == 0 {
            return Err(ModelError::ZeroDimension {
                input_dim,
                dim,
                vocab_size,
            });
        }
        assert_eq!(w_in.len(), input_dim * dim, "w_in must be input_dim x dim");
        assert_eq!(w_out.len(), dim * vocab_size, "w_out must be dim x vocab_size");
        Ok(Model {
            input_dim,
            dim,
            vocab_size,
            w_in,
            w_out,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn w_in(&self) -> &[f64] {
        &self.w_in
    }

    pub fn w_out(&self) -> &[f64] {
        &self.w_out
    }

    pub fn w_in_mut(&mut self) -> &mut [f64] {
        &mut self.w_in
    }

    pub fn w_out_mut(&mut self) -> &mut [f64] {
        &mut self.w_out
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.input_dim {
            return Err(ModelError::InputMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn check_target(&self, target: usize) -> Result<(), ModelError> {
        if target >= self.vocab_size {
            return Err(ModelError::TargetOutOfRange {
                target,
                vocab_size: self.vocab_size,
            });
        }
        Ok(())
    }

    /// `h = W_in^T x`, `p = softmax(W_out^T h)`.
    pub fn forward(&self, x: &[f64]) -> Result<Forward, ModelError> {
        self.check_input(x)?;
        let d = self.dim;
        let mut hidden = vec![0.0; d];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.w_in[i * d..(i + 1) * d];
            for (h, &w) in hidden.iter_mut().zip(row) {
                *h += xi * w;
            }
        }
        let v = self.vocab_size;
        let mut logits = vec![0.0; v];
        for (k, &hk) in hidden.iter().enumerate() {
            let row = &self.w_out[k * v..(k + 1) * v];
            for (u, &w) in logits.iter_mut().zip(row) {
                *u += hk * w;
            }
        }
        Ok(Forward {
            hidden,
            probs: softmax(&logits),
        })
    }

    pub fn loss(&self, x: &[f64], target: usize) -> Result<f64, ModelError> {
        self.check_target(target)?;
        Ok(cross_entropy(&self.forward(x)?.probs, target))
    }

    /// Loss and its analytic gradient with respect to both weight matrices.
    pub fn gradients(&self, x: &[f64], target: usize) -> Result<(f64, Gradients), ModelError> {
        self.check_target(target)?;
        let fwd = self.forward(x)?;
        let loss = cross_entropy(&fwd.probs, target);
        let delta = self.output_delta(&fwd.probs, target);
        let back = self.back_hidden(&delta);
        let (d, v) = (self.dim, self.vocab_size);

        let mut w_out = vec![0.0; d * v];
        for k in 0..d {
            for j in 0..v {
                w_out[k * v + j] = fwd.hidden[k] * delta[j];
            }
        }
        let mut w_in = vec![0.0; self.input_dim * d];
        for (i, &xi) in x.iter().enumerate() {
            for k in 0..d {
                w_in[i * d + k] = xi * back[k];
            }
        }
        Ok((loss, Gradients { w_in, w_out }))
    }

    fn output_delta(&self, probs: &[f64], target: usize) -> Vec<f64> {
        let mut delta = probs.to_vec();
        delta[target] -= 1.0;
        delta
    }

    /// `W_out * delta`, the loss gradient with respect to the hidden layer.
    fn back_hidden(&self, delta: &[f64]) -> Vec<f64> {
        let v = self.vocab_size;
        (0..self.dim)
            .map(|k| {
                self.w_out[k * v..(k + 1) * v]
                    .iter()
                    .zip(delta)
                    .map(|(w, dl)| w * dl)
                    .sum()
            })
            .collect()
    }

    /// One SGD update on a single example; returns the loss before the update.
    pub fn train_step(&mut self, example: &Example, learning_rate: f64) -> Result<f64, ModelError> {
        self.check_target(example.target)?;
        let x = &example.input;
        let fwd = self.forward(x)?;
        let loss = cross_entropy(&fwd.probs, example.target);
        let delta = self.output_delta(&fwd.probs, example.target);
        // computed from the pre-update output weights
        let back = self.back_hidden(&delta);
        let (d, v) = (self.dim, self.vocab_size);

        let mut finite = loss.is_finite();
        for k in 0..d {
            let hk = learning_rate * fwd.hidden[k];
            for (w, &dl) in self.w_out[k * v..(k + 1) * v].iter_mut().zip(&delta) {
                *w -= hk * dl;
                finite &= w.is_finite();
            }
        }
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (w, &bk) in self.w_in[i * d..(i + 1) * d].iter_mut().zip(&back) {
                *w -= learning_rate * xi * bk;
                finite &= w.is_finite();
            }
        }
        if !finite {
            return Err(ModelError::NonFinite {
                epoch: 0,
                step: 0,
                loss,
            });
        }
        Ok(loss)
    }

    /// Online SGD over `examples` for `epochs` passes, reshuffling the visiting
    /// order from `rng` before every epoch.
    pub fn train_examples<R: Rng + ?Sized>(
        &mut self,
        examples: &[Example],
        epochs: usize,
        learning_rate: f64,
        rng: &mut R,
    ) -> Result<TrainLog, ModelError> {
        if examples.is_empty() {
            return Err(ModelError::NoTrainingPairs);
        }
        let mut order: Vec<usize> = (0..examples.len()).collect();
        let mut log = TrainLog {
            epoch_losses: Vec::with_capacity(epochs),
        };
        for epoch in 0..epochs {
            order.shuffle(rng);
            let mut total = 0.0;
            for (step, &i) in order.iter().enumerate() {
                total += self
                    .train_step(&examples[i], learning_rate)
                    .map_err(|err| match err {
                        ModelError::NonFinite { loss, .. } => ModelError::NonFinite { epoch, step, loss },
                        other => other,
                    })?;
            }
            log.epoch_losses.push(total / examples.len() as f64);
        }
        Ok(log)
    }

    /// Encodes `pairs` with the configured encoder and trains on them.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        pairs: &[ContextTargetPair],
        hp: &Hyperparams,
        rng: &mut R,
    ) -> Result<TrainLog, ModelError> {
        let examples = encode_all(pairs, hp.encoder, self.vocab_size);
        self.train_examples(&examples, hp.epochs, hp.learning_rate, rng)
    }

    /// Fraction of examples whose most probable note is the target.
    pub fn accuracy(&self, examples: &[Example]) -> Result<f64, ModelError> {
        if examples.is_empty() {
            return Err(ModelError::EmptyValidation);
        }
        let mut hits = 0usize;
        for ex in examples {
            if argmax(&self.forward(&ex.input)?.probs) == ex.target {
                hits += 1;
            }
        }
        Ok(hits as f64 / examples.len() as f64)
    }

    pub fn validate(&self, pairs: &[ContextTargetPair], kind: EncoderKind) -> Result<f64, ModelError> {
        self.accuracy(&encode_all(pairs, kind, self.vocab_size))
    }

    /// Note embeddings: the input-weight row of each note, averaged over
    /// position blocks for the concatenated encoding.
    pub fn embeddings(&self) -> EmbeddingTable {
        let (d, v) = (self.dim, self.vocab_size);
        let blocks = self.input_dim / v;
        let rows = (0..v)
            .map(|note| {
                let mut row = vec![0.0; d];
                for block in 0..blocks {
                    let i = block * v + note;
                    for (r, &w) in row.iter_mut().zip(&self.w_in[i * d..(i + 1) * d]) {
                        *r += w;
                    }
                }
                row.iter_mut().for_each(|r| *r /= blocks as f64);
                row
            })
            .collect();
        EmbeddingTable { rows }
    }
}
