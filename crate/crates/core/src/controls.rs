//! Shuffle controls: corpora that keep the note distribution of a reference
//! corpus but destroy (part of) its note order.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::corpus::{Corpus, Melody, Note};
use crate::encode::Vocabulary;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlError {
    #[error("unknown control variant {0:?} (expected baseline, random_song or fake_melodies)")]
    UnknownVariant(String),
    #[error("baseline needs a non-empty vocabulary and at least one pair")]
    EmptyBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlVariant {
    /// i.i.d. uniform notes over the reference vocabulary.
    Baseline,
    /// All melodies concatenated and permuted as one. Applied to a
    /// single-melody corpus this is a plain permutation of that melody.
    RandomSong,
    /// Each melody permuted on its own.
    FakeMelodies,
}

impl ControlVariant {
    pub fn name(self) -> &'static str {
        match self {
            ControlVariant::Baseline => "baseline",
            ControlVariant::RandomSong => "random_song",
            ControlVariant::FakeMelodies => "fake_melodies",
        }
    }

    /// Builds the control corpus for `reference`. The baseline melody is sized
    /// to yield as many pairs at `context_size` as the reference does.
    pub fn generate<R: Rng + ?Sized>(
        self,
        reference: &Corpus,
        context_size: usize,
        rng: &mut R,
    ) -> Result<Corpus, ControlError> {
        match self {
            ControlVariant::Baseline => {
                let vocab = Vocabulary::build(reference);
                gen_baseline(&vocab, reference.total_pairs(context_size), context_size, rng)
            }
            ControlVariant::RandomSong => Ok(shuffle_concat(reference, rng)),
            ControlVariant::FakeMelodies => Ok(shuffle_within(reference, rng)),
        }
    }
}

impl fmt::Display for ControlVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlVariant {
    type Err = ControlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "baseline" => Ok(ControlVariant::Baseline),
            "random_song" | "random_sonata" => Ok(ControlVariant::RandomSong),
            "fake_melodies" => Ok(ControlVariant::FakeMelodies),
            _ => Err(ControlError::UnknownVariant(s.to_string())),
        }
    }
}

/// A single random melody of `target_pairs + context_size` notes drawn
/// uniformly from `vocab`.
pub fn gen_baseline<R: Rng + ?Sized>(
    vocab: &Vocabulary,
    target_pairs: usize,
    context_size: usize,
    rng: &mut R,
) -> Result<Corpus, ControlError> {
    if vocab.is_empty() || target_pairs == 0 {
        return Err(ControlError::EmptyBaseline);
    }
    let entries = vocab.entries();
    let notes = (0..target_pairs + context_size)
        .map(|_| {
            let entry = &entries[rng.gen_range(0..entries.len())];
            Note::parse(&entry.token).expect("vocabulary tokens are valid")
        })
        .collect();
    Ok(Corpus {
        label: "baseline".to_string(),
        melodies: vec![Melody::new("baseline", notes)],
    })
}

/// Concatenates every melody and applies one uniform permutation.
pub fn shuffle_concat<R: Rng + ?Sized>(corpus: &Corpus, rng: &mut R) -> Corpus {
    let mut notes: Vec<Note> = corpus.notes().cloned().collect();
    notes.shuffle(rng);
    Corpus {
        label: format!("{} (random song)", corpus.label),
        melodies: vec![Melody::new(corpus.label.clone(), notes)],
    }
}

/// Permutes each melody independently, keeping titles and order of melodies.
pub fn shuffle_within<R: Rng + ?Sized>(corpus: &Corpus, rng: &mut R) -> Corpus {
    let melodies = corpus
        .melodies
        .iter()
        .map(|m| {
            let mut notes = m.notes.clone();
            notes.shuffle(rng);
            Melody::new(m.title.clone(), notes)
        })
        .collect();
    Corpus {
        label: format!("{} (fake melodies)", corpus.label),
        melodies,
    }
}
