mod common;

use proptest::prelude::*;

use note2vec::corpus::{parse_corpus, Corpus, Melody, Note};
use note2vec::encode::{encode_context, extract_pairs, ContextTargetPair, EncoderKind, Vocabulary};
use note2vec::model::{cross_entropy, softmax, Example, Model};
use note2vec::seed::rng_from_seed;

const NAMES: [&str; 7] = ["C", "D", "E", "F", "G", "A", "B"];
const ACCIDENTALS: [&str; 3] = ["", "#", "b"];

fn token() -> impl Strategy<Value = String> {
    (0..7usize, 0..3usize, 1..8i32).prop_map(|(n, a, o)| format!("{}{}{}", NAMES[n], ACCIDENTALS[a], o))
}

fn corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(prop::collection::vec(token(), 1..40), 1..6).prop_map(|melodies| {
        let melodies = melodies
            .into_iter()
            .enumerate()
            .map(|(i, toks)| Melody::new(format!("tune {i}"), toks.iter().map(|t| Note::parse(t).unwrap()).collect()))
            .collect();
        Corpus::new("generated", melodies).unwrap()
    })
}

proptest! {
    #[test]
    fn corpus_text_round_trips(corpus in corpus()) {
        let reparsed = parse_corpus(&corpus.label, &corpus.to_text()).unwrap();
        prop_assert_eq!(reparsed, corpus);
    }

    #[test]
    fn pair_count_is_length_minus_context(corpus in corpus(), c in 1..6usize) {
        let vocab = Vocabulary::build(&corpus);
        for melody in &corpus.melodies {
            let pairs = extract_pairs(melody, &vocab, c).unwrap();
            prop_assert_eq!(pairs.len(), melody.len().saturating_sub(c));
            prop_assert_eq!(pairs.len(), melody.pair_count(c));
            for (k, pair) in pairs.iter().enumerate() {
                prop_assert_eq!(vocab.entries()[pair.target].pitch, melody.notes[k + c].pitch());
            }
        }
    }

    #[test]
    fn encodings_are_binary_with_expected_counts(context in prop::collection::vec(0..12usize, 1..6), target in 0..12usize) {
        let v = 12;
        let pair = ContextTargetPair { context: context.clone(), target };
        let multi = encode_context(&pair, EncoderKind::MultiHot, v);
        let concat = encode_context(&pair, EncoderKind::ConcatOneHot, v);
        prop_assert!(multi.iter().chain(&concat).all(|&x| x == 0.0 || x == 1.0));
        let mut distinct = context.clone();
        distinct.sort_unstable();
        distinct.dedup();
        prop_assert_eq!(multi.iter().sum::<f64>() as usize, distinct.len());
        prop_assert_eq!(concat.len(), context.len() * v);
        for (pos, &note) in context.iter().enumerate() {
            let block = &concat[pos * v..(pos + 1) * v];
            prop_assert_eq!(block.iter().sum::<f64>(), 1.0);
            prop_assert_eq!(block[note], 1.0);
        }
    }

    #[test]
    fn multi_hot_ignores_context_order(context in prop::collection::vec(0..10usize, 1..6), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut permuted = context.clone();
        permuted.shuffle(&mut rng_from_seed(seed));
        let a = encode_context(&ContextTargetPair { context, target: 0 }, EncoderKind::MultiHot, 10);
        let b = encode_context(&ContextTargetPair { context: permuted, target: 0 }, EncoderKind::MultiHot, 10);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn softmax_is_a_finite_distribution(logits in prop::collection::vec(-1e6..1e6f64, 1..30)) {
        let p = softmax(&logits);
        prop_assert!(p.iter().all(|x| x.is_finite() && *x > 0.0 && *x <= 1.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for t in 0..p.len() {
            prop_assert!(cross_entropy(&p, t).is_finite());
        }
    }

    #[test]
    fn loss_is_invariant_under_vocabulary_permutation(seed in any::<u64>(), c in 1..4usize) {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let (v, d) = (8, 2);
        let mut rng = rng_from_seed(seed);
        let mut model = Model::init(v, d, v, &mut rng).unwrap();
        for w in model.w_in_mut() { *w = rng.gen_range(-1.0..1.0); }
        for w in model.w_out_mut() { *w = rng.gen_range(-1.0..1.0); }
        let pair = ContextTargetPair { context: (0..c).map(|_| rng.gen_range(0..v)).collect(), target: rng.gen_range(0..v) };

        let mut perm: Vec<usize> = (0..v).collect();
        perm.shuffle(&mut rng);
        // rows of W_in and columns of W_out move with their vocabulary entry
        let mut w_in = vec![0.0; v * d];
        let mut w_out = vec![0.0; d * v];
        for old in 0..v {
            let new = perm[old];
            w_in[new * d..(new + 1) * d].copy_from_slice(&model.w_in()[old * d..(old + 1) * d]);
            for k in 0..d {
                w_out[k * v + new] = model.w_out()[k * v + old];
            }
        }
        let permuted_model = Model::from_weights(v, d, v, w_in, w_out).unwrap();
        let permuted_pair = ContextTargetPair { context: pair.context.iter().map(|&i| perm[i]).collect(), target: perm[pair.target] };

        let a = Example::encode(&pair, EncoderKind::MultiHot, v);
        let b = Example::encode(&permuted_pair, EncoderKind::MultiHot, v);
        let la = model.loss(&a.input, a.target).unwrap();
        let lb = permuted_model.loss(&b.input, b.target).unwrap();
        prop_assert!((la - lb).abs() < 1e-12, "{} vs {}", la, lb);
    }
}
