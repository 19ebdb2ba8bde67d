//! Deterministic synthetic fixtures in the two corpus layouts.
//!
//! The benchmark corpora are user-provided; these generators produce
//! stand-ins with the same shape and a strong lexical label signal so
//! loaders, featurizers and the training stack can be exercised without
//! external data. Everything is seeded and reproducible.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::datasets::LabeledExample;
use crate::encodings::DenseVectorTable;

const POSITIVE: [&str; 8] =
    ["재밌다", "좋아요", "최고", "감동이다", "훌륭하다", "사랑해", "명작", "추천한다"];
const NEGATIVE: [&str; 8] =
    ["지루하다", "별로다", "최악", "실망했다", "끔찍하다", "망했다", "졸작", "비추다"];
const FILLER: [&str; 12] = [
    "영화", "배우", "스토리", "연출", "음악", "오늘", "정말", "그냥", "많이", "조금", "보고",
    "생각보다",
];
const NOISE: [&str; 6] = ["ㅋㅋ", "ㅠㅠ", "!!", "...", "ㅎㅎ", "7점"];

/// Balanced binary sentiment reviews (labels alternate 0/1). Each review
/// carries one or two cue words of its class among neutral filler, with
/// occasional chat noise so every code-point class appears.
pub fn sentiment_corpus(n: usize, seed: u64) -> Vec<LabeledExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = i % 2;
            let cues: &[&str] = if label == 1 { &POSITIVE } else { &NEGATIVE };
            let mut words: Vec<&str> = Vec::new();
            for _ in 0..rng.gen_range(2..=5) {
                words.push(FILLER[rng.gen_range(0..FILLER.len())]);
            }
            for _ in 0..rng.gen_range(1..=2) {
                words.push(cues[rng.gen_range(0..cues.len())]);
            }
            if rng.gen_bool(0.3) {
                words.push(NOISE[rng.gen_range(0..NOISE.len())]);
            }
            words.shuffle(&mut rng);
            LabeledExample::new(words.join(" "), label)
        })
        .collect()
}

const INTENT_ENDERS: [&str; 7] = [
    "음",       // fragment
    "그렇다",   // statement
    "그럴까",   // question
    "해라",     // command
    "겠냐",     // rhetorical question
    "좀 하자",  // rhetorical command
    "간다",     // intonation-dependent
];

/// Seven-class intention utterances with class-typical enders; class sizes
/// are mildly imbalanced like the real corpus.
pub fn intent_corpus(n: usize, seed: u64) -> Vec<LabeledExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // rough volume ratios: small fragment/rhetorical classes
    let ratios = [1.0, 4.0, 3.0, 2.0, 0.5, 0.4, 1.0];
    let total: f64 = ratios.iter().sum();
    let mut out = Vec::with_capacity(n);
    for (label, r) in ratios.iter().enumerate() {
        let count = ((n as f64 * r / total).round() as usize).max(1);
        for _ in 0..count {
            let mut words: Vec<&str> = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                words.push(FILLER[rng.gen_range(0..FILLER.len())]);
            }
            words.push(INTENT_ENDERS[label]);
            out.push(LabeledExample::new(words.join(" "), label));
        }
    }
    out.shuffle(&mut rng);
    out.truncate(n);
    out
}

/// Seeded Gaussian vector table covering every syllable of the corpus, in
/// the loader's text-file layout semantics.
pub fn vector_table(corpus: &[LabeledExample], width: usize, seed: u64) -> DenseVectorTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.4).unwrap();
    let vocab = crate::encodings::build_char_vocab(corpus.iter().map(|e| e.text.as_str()));
    let entries = vocab.chars().iter().map(|&c| {
        let vec: Vec<f64> = (0..width).map(|_| normal.sample(&mut rng)).collect();
        (c.to_string(), vec)
    });
    DenseVectorTable::from_entries(entries).expect("uniform width by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentiment_is_balanced_and_deterministic() {
        let a = sentiment_corpus(100, 3);
        let b = sentiment_corpus(100, 3);
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|e| e.label == 1).count(), 50);
        assert_ne!(a, sentiment_corpus(100, 4));
    }

    #[test]
    fn intent_covers_all_classes() {
        let c = intent_corpus(500, 9);
        assert_eq!(c.len(), 500);
        for class in 0..7 {
            assert!(c.iter().any(|e| e.label == class), "class {class} missing");
        }
    }

    #[test]
    fn table_covers_corpus() {
        let corpus = sentiment_corpus(50, 1);
        let table = vector_table(&corpus, 16, 2);
        assert_eq!(table.width(), 16);
        let vocab = crate::encodings::build_char_vocab(corpus.iter().map(|e| e.text.as_str()));
        for &c in vocab.chars() {
            assert!(table.get_char(c).is_some(), "missing vector for {c}");
        }
    }
}
