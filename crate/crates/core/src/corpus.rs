//! Melody corpora: pitch-notation tokens, the plain-text corpus format and
//! basic corpus statistics.
//!
//! The corpus format is line oriented:
//!
//! ```text
//! # comment
//! @Title of the first melody
//! E4 E4 C4 E4 G4 C4
//! C4 D4 F4 D4 D4 E4 C4
//! @Second melody
//! G3 A3 B3
//! ```
//!
//! A line starting with `@` opens a melody whose title is the rest of the
//! line. Other non-blank lines hold whitespace-separated note tokens appended
//! to the current melody. A `#` at the start of a line or at the start of a
//! whitespace-separated word begins a comment running to the end of the line;
//! a `#` inside a token is a sharp (`C#4`).

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Lowest and highest octave numbers accepted in a token.
pub const MIN_OCTAVE: i32 = -1;
pub const MAX_OCTAVE: i32 = 9;

const TOKENS_PER_LINE: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PitchError {
    #[error("malformed note token {token:?}: {reason} at position {position}")]
    Malformed {
        token: String,
        position: usize,
        reason: &'static str,
    },
    #[error("note token {token:?}: octave {octave} outside [{MIN_OCTAVE}, {MAX_OCTAVE}]")]
    OctaveOutOfRange { token: String, octave: i32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("line {line}: {source}")]
    Token {
        line: usize,
        #[source]
        source: PitchError,
    },
    #[error("line {line}: notes appear before any '@' melody header")]
    NotesBeforeHeader { line: usize },
    #[error("line {line}: empty melody {title:?}")]
    EmptyMelody { line: usize, title: String },
    #[error("line {line}: duplicate melody title {title:?}")]
    DuplicateTitle { line: usize, title: String },
    #[error("corpus contains no melodies")]
    NoMelodies,
    #[error("invalid corpus statistics request: {0}")]
    InvalidArgument(&'static str),
}

/// Semitone value of a scientific-pitch token, with C4 = 60.
///
/// Accepts a letter `A`-`G`, an optional single `#` or `b`, and an integer
/// octave in `[-1, 9]`.
pub fn pitch_of(token: &str) -> Result<i32, PitchError> {
    let malformed = |position: usize, reason: &'static str| PitchError::Malformed {
        token: token.to_string(),
        position,
        reason,
    };

    let mut chars = token.char_indices().peekable();
    let degree = match chars.next() {
        Some((_, 'C')) => 0,
        Some((_, 'D')) => 2,
        Some((_, 'E')) => 4,
        Some((_, 'F')) => 5,
        Some((_, 'G')) => 7,
        Some((_, 'A')) => 9,
        Some((_, 'B')) => 11,
        Some((pos, _)) => return Err(malformed(pos, "expected note letter A-G")),
        None => return Err(malformed(0, "empty token")),
    };
    let accidental = match chars.peek() {
        Some((_, '#')) => {
            chars.next();
            1
        }
        Some((_, 'b')) => {
            chars.next();
            -1
        }
        _ => 0,
    };
    let octave_start = match chars.peek() {
        Some(&(pos, _)) => pos,
        None => return Err(malformed(token.len(), "missing octave")),
    };
    let octave_text = &token[octave_start..];
    let digits = octave_text.strip_prefix('-').unwrap_or(octave_text);
    if let Some(bad) = digits.char_indices().find(|(_, ch)| !ch.is_ascii_digit()) {
        let offset = octave_start + (octave_text.len() - digits.len()) + bad.0;
        let reason = if bad.1 == '#' || bad.1 == 'b' {
            "double accidentals are not supported"
        } else {
            "expected octave digits"
        };
        return Err(malformed(offset, reason));
    }
    if digits.is_empty() {
        return Err(malformed(token.len(), "missing octave"));
    }
    let octave: i32 = match octave_text.parse() {
        Ok(value) => value,
        Err(_) => {
            return Err(PitchError::OctaveOutOfRange {
                token: token.to_string(),
                octave: i32::MAX,
            })
        }
    };
    if !(MIN_OCTAVE..=MAX_OCTAVE).contains(&octave) {
        return Err(PitchError::OctaveOutOfRange {
            token: token.to_string(),
            octave,
        });
    }
    Ok(12 * (octave + 1) + degree + accidental)
}

/// A pitched note together with the spelling it was written with.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Note {
    token: String,
    pitch: i32,
}

impl Note {
    pub fn parse(token: &str) -> Result<Self, PitchError> {
        Ok(Note {
            pitch: pitch_of(token)?,
            token: token.to_string(),
        })
    }

    pub fn token(&self) -> &str {
        &self.token
    }

    pub fn pitch(&self) -> i32 {
        self.pitch
    }
}

impl fmt::Display for Note {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Melody {
    pub title: String,
    pub notes: Vec<Note>,
}

impl Melody {
    pub fn new(title: impl Into<String>, notes: Vec<Note>) -> Self {
        Melody {
            title: title.into(),
            notes,
        }
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    /// Number of (context, target) pairs the melody yields at `context_size`.
    pub fn pair_count(&self, context_size: usize) -> usize {
        self.notes.len().saturating_sub(context_size)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub label: String,
    pub melodies: Vec<Melody>,
}

impl Corpus {
    /// Builds a corpus, enforcing that it has at least one melody, that every
    /// melody has notes and that titles are unique.
    pub fn new(label: impl Into<String>, melodies: Vec<Melody>) -> Result<Self, CorpusError> {
        if melodies.is_empty() {
            return Err(CorpusError::NoMelodies);
        }
        let mut seen = HashSet::new();
        for melody in &melodies {
            if melody.is_empty() {
                return Err(CorpusError::EmptyMelody {
                    line: 0,
                    title: melody.title.clone(),
                });
            }
            if !seen.insert(melody.title.as_str()) {
                return Err(CorpusError::DuplicateTitle {
                    line: 0,
                    title: melody.title.clone(),
                });
            }
        }
        Ok(Corpus {
            label: label.into(),
            melodies,
        })
    }

    pub fn notes(&self) -> impl Iterator<Item = &Note> {
        self.melodies.iter().flat_map(|m| m.notes.iter())
    }

    pub fn total_notes(&self) -> usize {
        self.melodies.iter().map(Melody::len).sum()
    }

    /// Pairs available at `context_size`; never counts across melody boundaries.
    pub fn total_pairs(&self, context_size: usize) -> usize {
        self.melodies.iter().map(|m| m.pair_count(context_size)).sum()
    }

    /// Serializes the corpus in the text format accepted by [`parse_corpus`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for melody in &self.melodies {
            out.push('@');
            out.push_str(&melody.title);
            out.push('\n');
            for chunk in melody.notes.chunks(TOKENS_PER_LINE) {
                let line: Vec<&str> = chunk.iter().map(Note::token).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

/// Strips a trailing comment: a `#` that opens a line or a whitespace-separated word.
fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return &line[..i];
        }
    }
    line
}

/// Parses the corpus text format. Melodies keep file order, notes keep line order.
pub fn parse_corpus(label: &str, text: &str) -> Result<Corpus, CorpusError> {
    struct Open {
        title: String,
        line: usize,
        notes: Vec<Note>,
    }

    let mut melodies: Vec<Melody> = Vec::new();
    let mut titles: HashSet<String> = HashSet::new();
    let mut current: Option<Open> = None;

    let close = |open: Open, melodies: &mut Vec<Melody>| -> Result<(), CorpusError> {
        if open.notes.is_empty() {
            return Err(CorpusError::EmptyMelody {
                line: open.line,
                title: open.title,
            });
        }
        melodies.push(Melody::new(open.title, open.notes));
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim_start();
        if let Some(rest) = trimmed.strip_prefix('@') {
            let title = strip_comment(rest).trim().to_string();
            if let Some(open) = current.take() {
                close(open, &mut melodies)?;
            }
            if !titles.insert(title.clone()) {
                return Err(CorpusError::DuplicateTitle {
                    line: line_no,
                    title,
                });
            }
            current = Some(Open {
                title,
                line: line_no,
                notes: Vec::new(),
            });
            continue;
        }
        let content = strip_comment(trimmed);
        let mut words = content.split_whitespace().peekable();
        if words.peek().is_none() {
            continue;
        }
        let open = current
            .as_mut()
            .ok_or(CorpusError::NotesBeforeHeader { line: line_no })?;
        for word in words {
            let note = Note::parse(word).map_err(|source| CorpusError::Token {
                line: line_no,
                source,
            })?;
            open.notes.push(note);
        }
    }
    if let Some(open) = current.take() {
        close(open, &mut melodies)?;
    }
    if melodies.is_empty() {
        return Err(CorpusError::NoMelodies);
    }
    Ok(Corpus {
        label: label.to_string(),
        melodies,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub vocab_size: usize,
    pub total_notes: usize,
    /// Pitch → occurrence count, ascending pitch.
    pub note_histogram: BTreeMap<i32, usize>,
    pub total_pairs: usize,
    pub train_pairs: usize,
    pub val_pairs: usize,
}

/// Training-set size for `total` pairs: `floor(train_fraction * total)`.
pub fn train_count(total: usize, train_fraction: f64) -> usize {
    // the epsilon absorbs representation error such as 0.9 * 10 = 8.999...
    let raw = train_fraction * total as f64;
    ((raw + 1e-9).floor() as usize).min(total)
}

pub fn corpus_stats(
    corpus: &Corpus,
    context_size: usize,
    train_fraction: f64,
) -> Result<CorpusStats, CorpusError> {
    if context_size == 0 {
        return Err(CorpusError::InvalidArgument("context size must be at least 1"));
    }
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(CorpusError::InvalidArgument(
            "train fraction must lie in (0, 1]",
        ));
    }
    let mut note_histogram = BTreeMap::new();
    for note in corpus.notes() {
        *note_histogram.entry(note.pitch()).or_insert(0) += 1;
    }
    let total_pairs = corpus.total_pairs(context_size);
    let train_pairs = train_count(total_pairs, train_fraction);
    Ok(CorpusStats {
        vocab_size: note_histogram.len(),
        total_notes: corpus.total_notes(),
        note_histogram,
        total_pairs,
        train_pairs,
        val_pairs: total_pairs - train_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = "E4 E4 C4 E4 G4 C4 C4 D4 F4 D4 D4 E4 C4";

    #[test]
    fn anchors() {
        assert_eq!(pitch_of("C4"), Ok(60));
        assert_eq!(pitch_of("A4"), Ok(69));
        assert_eq!(pitch_of("C-1"), Ok(0));
        assert_eq!(pitch_of("B9"), Ok(131));
        assert_eq!(pitch_of("F#3"), Ok(54));
        assert_eq!(pitch_of("Bb5"), Ok(82));
    }

    #[test]
    fn enharmonics_share_pitch() {
        assert_eq!(pitch_of("Db4"), Ok(61));
        assert_eq!(pitch_of("C#4"), Ok(61));
        assert_eq!(pitch_of("E#4"), pitch_of("F4"));
        assert_eq!(pitch_of("Cb5"), pitch_of("B4"));
    }

    #[test]
    fn malformed_tokens() {
        for bad in ["", "H4", "c4", "C", "C#", "C##4", "Cbb4", "C4x", "C+4", "4C", "C-"] {
            assert!(pitch_of(bad).is_err(), "{bad} should be rejected");
        }
        match pitch_of("C##4") {
            Err(PitchError::Malformed { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            pitch_of("C10"),
            Err(PitchError::OctaveOutOfRange { octave: 10, .. })
        ));
        assert!(matches!(
            pitch_of("C-2"),
            Err(PitchError::OctaveOutOfRange { octave: -2, .. })
        ));
    }

    #[test]
    fn parses_sample_block() {
        let corpus = parse_corpus("s", &format!("@Sample\n{SAMPLE}\n")).unwrap();
        assert_eq!(corpus.melodies.len(), 1);
        assert_eq!(corpus.melodies[0].title, "Sample");
        assert_eq!(corpus.melodies[0].len(), 13);
        assert_eq!(corpus.melodies[0].notes[4].token(), "G4");
    }

    #[test]
    fn file_order_and_comments() {
        let text = "# header comment\n\n@First # trailing\nC4 D4 # rest of line\nE4\n\n  @Second\nF#4 G4 A4 B4\n";
        let corpus = parse_corpus("x", text).unwrap();
        let lens: Vec<usize> = corpus.melodies.iter().map(Melody::len).collect();
        assert_eq!(lens, vec![3, 4]);
        assert_eq!(corpus.melodies[0].title, "First");
        assert_eq!(corpus.melodies[1].title, "Second");
        assert_eq!(corpus.melodies[1].notes[0].pitch(), 66);
    }

    #[test]
    fn empty_melody_rejected() {
        let err = parse_corpus("x", "@One\n@Two\nC4\n").unwrap_err();
        assert!(matches!(err, CorpusError::EmptyMelody { line: 1, .. }));
        assert!(err.to_string().contains("empty melody"));
        let err = parse_corpus("x", "@One\nC4\n@Two\n# nothing\n").unwrap_err();
        assert!(matches!(err, CorpusError::EmptyMelody { line: 3, .. }));
    }

    #[test]
    fn duplicate_title_rejected() {
        let err = parse_corpus("x", "@A\nC4\n@A\nD4\n").unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateTitle { line: 3, .. }));
    }

    #[test]
    fn token_errors_carry_line() {
        let err = parse_corpus("x", "@A\nC4 D4\nE4 Q4\n").unwrap_err();
        match err {
            CorpusError::Token { line, source } => {
                assert_eq!(line, 3);
                assert!(source.to_string().contains("Q4"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_corpus("x", "C4\n@A\nD4\n"),
            Err(CorpusError::NotesBeforeHeader { line: 1 })
        ));
        assert!(matches!(parse_corpus("x", "# only\n"), Err(CorpusError::NoMelodies)));
    }

    #[test]
    fn sample_stats() {
        let corpus = parse_corpus("s", &format!("@Sample\n{SAMPLE}")).unwrap();
        let stats = corpus_stats(&corpus, 2, 0.9).unwrap();
        assert_eq!(stats.vocab_size, 5);
        assert_eq!(stats.total_notes, 13);
        assert_eq!(stats.total_pairs, 11);
        assert_eq!(stats.train_pairs, 9);
        assert_eq!(stats.val_pairs, 2);
        assert_eq!(stats.note_histogram.values().sum::<usize>(), 13);
        assert_eq!(stats.note_histogram[&60], 4);
    }

    #[test]
    fn train_count_floor() {
        assert_eq!(train_count(937, 0.9), 843);
        assert_eq!(train_count(486, 0.9), 437);
        assert_eq!(train_count(10, 0.9), 9);
        assert_eq!(train_count(11, 0.9), 9);
        assert_eq!(train_count(7, 1.0), 7);
    }

    #[test]
    fn pairs_do_not_cross_melodies() {
        let corpus = parse_corpus("x", "@A\nC4 D4 E4\n@B\nF4\n@C\nG4 A4 B4 C5\n").unwrap();
        assert_eq!(corpus.total_pairs(1), 2 + 0 + 3);
        assert_eq!(corpus.total_pairs(2), 1 + 0 + 2);
        assert_eq!(corpus.total_pairs(4), 0);
        let stats = corpus_stats(&corpus, 2, 0.5).unwrap();
        assert_eq!((stats.train_pairs, stats.val_pairs), (1, 2));
    }

    #[test]
    fn stats_argument_checks() {
        let corpus = parse_corpus("x", "@A\nC4 D4 E4\n").unwrap();
        assert!(corpus_stats(&corpus, 0, 0.9).is_err());
        assert!(corpus_stats(&corpus, 1, 0.0).is_err());
        assert!(corpus_stats(&corpus, 1, 1.5).is_err());
    }

    #[test]
    fn corpus_new_validates() {
        let note = Note::parse("C4").unwrap();
        assert!(Corpus::new("x", vec![]).is_err());
        assert!(Corpus::new("x", vec![Melody::new("a", vec![])]).is_err());
        assert!(Corpus::new(
            "x",
            vec![
                Melody::new("a", vec![note.clone()]),
                Melody::new("a", vec![note.clone()])
            ]
        )
        .is_err());
    }
}
