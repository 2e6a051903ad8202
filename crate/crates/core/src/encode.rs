//! Vocabulary construction, (context → target) pair extraction, input
//! encodings and the train/validation split.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::corpus::{train_count, Corpus, Melody};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("melody {title:?}: note {token} (pitch {pitch}) is not in the vocabulary")]
    UnknownPitch {
        title: String,
        token: String,
        pitch: i32,
    },
    #[error("context size must be at least 1")]
    ZeroContext,
    #[error("cannot split an empty pair list")]
    NoPairs,
    #[error("train fraction {0} outside (0, 1]")]
    BadFraction(f64),
    #[error("unknown encoder {0:?} (expected multi_hot or concat_one_hot)")]
    UnknownEncoder(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabEntry {
    pub index: usize,
    pub pitch: i32,
    pub token: String,
}

/// Distinct pitches of a corpus, indexed in ascending pitch order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    by_pitch: BTreeMap<i32, usize>,
}

impl Vocabulary {
    /// One entry per distinct pitch; the display token is the first spelling
    /// seen in corpus order.
    pub fn build(corpus: &Corpus) -> Self {
        let mut first_seen: BTreeMap<i32, &str> = BTreeMap::new();
        for note in corpus.notes() {
            first_seen.entry(note.pitch()).or_insert(note.token());
        }
        let entries: Vec<VocabEntry> = first_seen
            .into_iter()
            .enumerate()
            .map(|(index, (pitch, token))| VocabEntry {
                index,
                pitch,
                token: token.to_string(),
            })
            .collect();
        let by_pitch = entries.iter().map(|e| (e.pitch, e.index)).collect();
        Vocabulary { entries, by_pitch }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn index_of(&self, pitch: i32) -> Option<usize> {
        self.by_pitch.get(&pitch).copied()
    }

    pub fn pitches(&self) -> Vec<i32> {
        self.entries.iter().map(|e| e.pitch).collect()
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.token.as_str()).collect()
    }
}

pub fn build_vocabulary(corpus: &Corpus) -> Vocabulary {
    Vocabulary::build(corpus)
}

/// Preceding notes (in melody order) and the note to predict, as vocabulary indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextTargetPair {
    pub context: Vec<usize>,
    pub target: usize,
}

pub fn extract_pairs(
    melody: &Melody,
    vocab: &Vocabulary,
    context_size: usize,
) -> Result<Vec<ContextTargetPair>, EncodeError> {
    if context_size == 0 {
        return Err(EncodeError::ZeroContext);
    }
    let indices = melody
        .notes
        .iter()
        .map(|note| {
            vocab
                .index_of(note.pitch())
                .ok_or_else(|| EncodeError::UnknownPitch {
                    title: melody.title.clone(),
                    token: note.token().to_string(),
                    pitch: note.pitch(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(indices
        .windows(context_size + 1)
        .map(|w| ContextTargetPair {
            context: w[..context_size].to_vec(),
            target: w[context_size],
        })
        .collect())
}

/// Pairs of every melody, concatenated in melody order.
pub fn extract_corpus_pairs(
    corpus: &Corpus,
    vocab: &Vocabulary,
    context_size: usize,
) -> Result<Vec<ContextTargetPair>, EncodeError> {
    let mut pairs = Vec::with_capacity(corpus.total_pairs(context_size));
    for melody in &corpus.melodies {
        pairs.extend(extract_pairs(melody, vocab, context_size)?);
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EncoderKind {
    /// One `V`-wide vector with a 1 at each distinct context note.
    MultiHot,
    /// `c` one-hot blocks of width `V`, one per context position.
    ConcatOneHot,
}

impl EncoderKind {
    pub fn input_dim(self, vocab_size: usize, context_size: usize) -> usize {
        match self {
            EncoderKind::MultiHot => vocab_size,
            EncoderKind::ConcatOneHot => context_size * vocab_size,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::MultiHot => "multi_hot",
            EncoderKind::ConcatOneHot => "concat_one_hot",
        }
    }

    /// Positions of the 1 entries of the encoded context, ascending and without duplicates.
    pub fn active_indices(self, context: &[usize], vocab_size: usize) -> Vec<usize> {
        match self {
            EncoderKind::MultiHot => {
                let mut idx = context.to_vec();
                idx.sort_unstable();
                idx.dedup();
                idx
            }
            EncoderKind::ConcatOneHot => context
                .iter()
                .enumerate()
                .map(|(pos, &note)| pos * vocab_size + note)
                .collect(),
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncoderKind {
    type Err = EncodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "multi_hot" | "multihot" => Ok(EncoderKind::MultiHot),
            "concat_one_hot" | "one_hot" | "onehot" => Ok(EncoderKind::ConcatOneHot),
            _ => Err(EncodeError::UnknownEncoder(s.to_string())),
        }
    }
}

/// Dense 0/1 input vector for a pair.
pub fn encode_context(pair: &ContextTargetPair, kind: EncoderKind, vocab_size: usize) -> Vec<f64> {
    let mut x = vec![0.0; kind.input_dim(vocab_size, pair.context.len())];
    for i in kind.active_indices(&pair.context, vocab_size) {
        x[i] = 1.0;
    }
    x
}

/// Shuffles the pairs with `rng` and cuts off the first `floor(f * N)` as training data.
pub fn split_pairs<R: Rng + ?Sized>(
    pairs: &[ContextTargetPair],
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Vec<ContextTargetPair>, Vec<ContextTargetPair>), EncodeError> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(EncodeError::BadFraction(train_fraction));
    }
    if pairs.is_empty() {
        return Err(EncodeError::NoPairs);
    }
    let mut shuffled = pairs.to_vec();
    shuffled.shuffle(rng);
    let val = shuffled.split_off(train_count(pairs.len(), train_fraction));
    Ok((shuffled, val))
}
