//! Deterministic synthetic text: a tiny weighted phrase grammar over
//! generated pseudo-words with Zipf-like frequencies. Supplies the desk-scale
//! monolingual corpus that the cipher generator turns into a language pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct WordClass {
    words: Vec<String>,
    cumulative: Vec<f64>,
}

impl WordClass {
    fn new(words: Vec<String>, zipf_exponent: f64) -> Self {
        let mut cumulative = Vec::with_capacity(words.len());
        let mut total = 0.0;
        for rank in 0..words.len() {
            total += 1.0 / ((rank + 1) as f64).powf(zipf_exponent);
            cumulative.push(total);
        }
        WordClass { words, cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> &str {
        let total = *self.cumulative.last().unwrap();
        let x = rng.gen::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c < x);
        &self.words[idx.min(self.words.len() - 1)]
    }
}

const ONSETS: [&str; 18] = [
    "b", "bl", "d", "dr", "f", "g", "k", "kr", "l", "m", "n", "p", "pl", "r", "s", "t", "tr", "v",
];
const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "ia"];
const CODAS: [&str; 5] = ["", "", "n", "m", "l"];

fn make_words(rng: &mut ChaCha8Rng, count: usize, used: &mut std::collections::BTreeSet<String>) -> Vec<String> {
    let mut words = Vec::with_capacity(count);
    while words.len() < count {
        let syllables = rng.gen_range(1..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
            w.push_str(VOWELS[rng.gen_range(0..VOWELS.len())]);
        }
        w.push_str(CODAS[rng.gen_range(0..CODAS.len())]);
        if used.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

struct Grammar {
    nouns: WordClass,
    verbs: WordClass,
    adjectives: WordClass,
    names: WordClass,
    adverbs: WordClass,
    determiners: WordClass,
    prepositions: WordClass,
    auxiliaries: WordClass,
    conjunctions: WordClass,
}

impl Grammar {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut used = std::collections::BTreeSet::new();
        Grammar {
            nouns: WordClass::new(make_words(rng, 140, &mut used), 1.0),
            verbs: WordClass::new(make_words(rng, 70, &mut used), 1.0),
            adjectives: WordClass::new(make_words(rng, 50, &mut used), 0.9),
            names: WordClass::new(make_words(rng, 30, &mut used), 0.9),
            adverbs: WordClass::new(make_words(rng, 25, &mut used), 0.9),
            determiners: WordClass::new(make_words(rng, 6, &mut used), 0.8),
            prepositions: WordClass::new(make_words(rng, 8, &mut used), 0.8),
            auxiliaries: WordClass::new(make_words(rng, 5, &mut used), 0.8),
            conjunctions: WordClass::new(make_words(rng, 4, &mut used), 0.8),
        }
    }

    fn noun_phrase(&self, rng: &mut ChaCha8Rng, out: &mut Vec<String>) {
        let roll = rng.gen::<f64>();
        if roll < 0.5 {
            out.push(self.determiners.sample(rng).into());
            out.push(self.nouns.sample(rng).into());
        } else if roll < 0.8 {
            out.push(self.determiners.sample(rng).into());
            out.push(self.adjectives.sample(rng).into());
            out.push(self.nouns.sample(rng).into());
        } else {
            out.push(self.names.sample(rng).into());
        }
    }

    fn end(&self, rng: &mut ChaCha8Rng, out: &mut Vec<String>) {
        let roll = rng.gen::<f64>();
        if roll < 0.85 {
            out.push(".".into());
        } else if roll < 0.95 {
            out.push("!".into());
        } else {
            out.push("?".into());
        }
    }

    fn sentence(&self, rng: &mut ChaCha8Rng) -> Vec<String> {
        let mut out = Vec::new();
        let roll = rng.gen::<f64>();
        if roll < 0.28 {
            self.noun_phrase(rng, &mut out);
            out.push(self.verbs.sample(rng).into());
            self.noun_phrase(rng, &mut out);
        } else if roll < 0.48 {
            self.noun_phrase(rng, &mut out);
            out.push(self.verbs.sample(rng).into());
            out.push(self.prepositions.sample(rng).into());
            self.noun_phrase(rng, &mut out);
        } else if roll < 0.60 {
            self.noun_phrase(rng, &mut out);
            out.push(self.auxiliaries.sample(rng).into());
            out.push(self.adjectives.sample(rng).into());
        } else if roll < 0.70 {
            self.noun_phrase(rng, &mut out);
            out.push(self.verbs.sample(rng).into());
            out.push(self.adverbs.sample(rng).into());
        } else if roll < 0.78 {
            self.noun_phrase(rng, &mut out);
            out.push(self.verbs.sample(rng).into());
            self.noun_phrase(rng, &mut out);
            out.push(",".into());
            out.push(self.conjunctions.sample(rng).into());
            self.noun_phrase(rng, &mut out);
        } else if roll < 0.86 {
            out.push(rng.gen_range(0..10).to_string());
            out.push(self.nouns.sample(rng).into());
            out.push(self.verbs.sample(rng).into());
            self.noun_phrase(rng, &mut out);
        } else if roll < 0.94 {
            self.noun_phrase(rng, &mut out);
            out.push(self.verbs.sample(rng).into());
            self.noun_phrase(rng, &mut out);
            out.push(self.prepositions.sample(rng).into());
            self.noun_phrase(rng, &mut out);
        } else {
            self.noun_phrase(rng, &mut out);
            out.push(self.verbs.sample(rng).into());
        }
        self.end(rng, &mut out);
        out
    }
}

/// Generate `n_sentences` tokenized sentences, deterministically from `seed`.
pub fn synthesize_corpus(seed: u64, n_sentences: usize) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grammar = Grammar::new(&mut rng);
    (0..n_sentences).map(|_| grammar.sentence(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_a_seed() {
        assert_eq!(synthesize_corpus(9, 50), synthesize_corpus(9, 50));
        assert_ne!(synthesize_corpus(9, 50), synthesize_corpus(10, 50));
    }

    #[test]
    fn sentences_are_short_and_nonempty() {
        for sent in synthesize_corpus(1, 500) {
            assert!(!sent.is_empty());
            assert!(sent.len() <= 16, "unexpectedly long: {sent:?}");
        }
    }

    #[test]
    fn vocabulary_is_desk_sized() {
        let corpus = synthesize_corpus(2, 5000);
        let vocab: std::collections::BTreeSet<&String> = corpus.iter().flatten().collect();
        assert!(vocab.len() > 150 && vocab.len() < 600, "vocab {}", vocab.len());
    }

    #[test]
    fn output_survives_tokenize_round_trip() {
        for sent in synthesize_corpus(3, 100) {
            let line = sent.join(" ");
            assert_eq!(crate::corpus::tokenize(&line), sent);
        }
    }
}
