//! Synthetic cipher language pairs: a token-substitution bijection plus
//! bounded local reordering and optional token drops. The generator yields a
//! gold dictionary and aligned dev/test sets, while the train halves stay
//! non-parallel (disjoint sentence subsets).

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone)]
pub struct CipherSpec {
    pub seed: u64,
    /// Max displacement of any token from its original index.
    pub reorder_window: usize,
    /// Bijection from plain (target-language) tokens to cipher tokens.
    pub substitution: BTreeMap<String, String>,
    pub drop_rate: f64,
}

#[derive(Debug, Clone)]
pub struct CipherPair {
    /// Enciphered train half (language X); disjoint sentences from `train_tgt`.
    pub train_src: Vec<Vec<String>>,
    /// Plain train half (language Y).
    pub train_tgt: Vec<Vec<String>>,
    /// Aligned (src, tgt) held-out pairs.
    pub dev: Vec<(Vec<String>, Vec<String>)>,
    pub test: Vec<(Vec<String>, Vec<String>)>,
    /// Gold dictionary rows (cipher token, plain token), sorted by cipher token.
    pub gold: Vec<(String, String)>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn derive_rng(seed: u64, tag: u64, idx: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag ^ idx)))
}

const ONSETS: [&str; 16] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "ch", "st",
];
const VOWELS: [&str; 8] = ["a", "e", "i", "o", "u", "ai", "ou", "ei"];
const CODAS: [&str; 6] = ["", "", "n", "s", "k", "r"];

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.gen_range(1..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
        w.push_str(VOWELS[rng.gen_range(0..VOWELS.len())]);
    }
    w.push_str(CODAS[rng.gen_range(0..CODAS.len())]);
    w
}

impl CipherSpec {
    /// Build a bijective substitution over the given plain tokens. Cipher
    /// tokens are fresh pseudo-words sharing no string with the plain side,
    /// so the pair really behaves like two languages.
    pub fn build(
        plain_tokens: &BTreeSet<String>,
        seed: u64,
        reorder_window: usize,
        drop_rate: f64,
    ) -> Result<Self> {
        if plain_tokens.is_empty() {
            return Err(Error::Cipher(
                "vocabulary too small to build a bijection".into(),
            ));
        }
        if !(0.0..=0.2).contains(&drop_rate) {
            return Err(Error::Cipher(format!(
                "drop_rate {drop_rate} outside [0, 0.2]"
            )));
        }
        let mut rng = derive_rng(seed, 0x5375_6273, 0);
        let mut used: BTreeSet<String> = plain_tokens.clone();
        let mut substitution = BTreeMap::new();
        for tok in plain_tokens {
            let mut cipher = pseudo_word(&mut rng);
            while used.contains(&cipher) {
                cipher.push_str(VOWELS[rng.gen_range(0..VOWELS.len())]);
                cipher.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
            }
            used.insert(cipher.clone());
            substitution.insert(tok.clone(), cipher);
        }
        Ok(CipherSpec {
            seed,
            reorder_window,
            substitution,
            drop_rate,
        })
    }

    /// Substitute, locally reorder within the window, then drop tokens.
    /// `idx` keys the per-sentence randomness so the transform is stable
    /// under re-runs and independent of processing order.
    pub fn encipher(&self, sentence: &[String], idx: u64) -> Result<Vec<String>> {
        let mut out = Vec::with_capacity(sentence.len());
        for tok in sentence {
            match self.substitution.get(tok) {
                Some(c) => out.push(c.clone()),
                None => {
                    return Err(Error::Cipher(format!(
                        "token '{tok}' missing from the substitution"
                    )))
                }
            }
        }
        if self.reorder_window > 0 {
            let mut rng = derive_rng(self.seed, 0x5265_6F72, idx);
            let w = self.reorder_window as f64;
            // Sort-key jitter in [0, w) moves no token more than w positions.
            let mut keyed: Vec<(f64, usize, String)> = out
                .into_iter()
                .enumerate()
                .map(|(i, t)| (i as f64 + rng.gen::<f64>() * w, i, t))
                .collect();
            keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            out = keyed.into_iter().map(|(_, _, t)| t).collect();
        }
        if self.drop_rate > 0.0 {
            let mut rng = derive_rng(self.seed, 0x4472_6F70, idx);
            let kept: Vec<String> = out
                .iter()
                .filter(|_| !rng.gen_bool(self.drop_rate))
                .cloned()
                .collect();
            if !kept.is_empty() {
                out = kept;
            } else {
                out.truncate(1);
            }
        }
        Ok(out)
    }
}

/// Split the plain corpus into disjoint train halves plus aligned dev/test,
/// and encipher the source side of each.
pub fn generate_cipher_pair(
    corpus_tgt: &[Vec<String>],
    spec: &CipherSpec,
    dev_size: usize,
    test_size: usize,
) -> Result<CipherPair> {
    let n = corpus_tgt.len();
    if n == 0 {
        return Err(Error::Cipher("empty corpus".into()));
    }
    if dev_size + test_size + 2 > n {
        return Err(Error::Cipher(format!(
            "corpus of {n} sentences cannot supply dev={dev_size} test={test_size} plus train halves"
        )));
    }
    let train_total = n - dev_size - test_size;
    let tgt_half = train_total / 2;

    let train_tgt: Vec<Vec<String>> = corpus_tgt[..tgt_half].to_vec();
    let mut train_src = Vec::with_capacity(train_total - tgt_half);
    for (i, sent) in corpus_tgt[tgt_half..train_total].iter().enumerate() {
        train_src.push(spec.encipher(sent, (tgt_half + i) as u64)?);
    }
    let mut dev = Vec::with_capacity(dev_size);
    for (i, sent) in corpus_tgt[train_total..train_total + dev_size].iter().enumerate() {
        dev.push((spec.encipher(sent, (train_total + i) as u64)?, sent.clone()));
    }
    let mut test = Vec::with_capacity(test_size);
    for (i, sent) in corpus_tgt[train_total + dev_size..].iter().enumerate() {
        test.push((
            spec.encipher(sent, (train_total + dev_size + i) as u64)?,
            sent.clone(),
        ));
    }
    let mut gold: Vec<(String, String)> = spec
        .substitution
        .iter()
        .map(|(plain, cipher)| (cipher.clone(), plain.clone()))
        .collect();
    gold.sort();
    Ok(CipherPair {
        train_src,
        train_tgt,
        dev,
        test,
        gold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(|t| t.to_string()).collect()
    }

    fn tiny_corpus() -> Vec<Vec<String>> {
        (0..40)
            .map(|i| toks(&format!("w{} w{} w{}", i % 7, (i + 1) % 7, (i + 2) % 7)))
            .collect()
    }

    fn token_set(corpus: &[Vec<String>]) -> BTreeSet<String> {
        corpus.iter().flatten().cloned().collect()
    }

    #[test]
    fn pure_substitution_is_invertible() {
        let corpus = tiny_corpus();
        let spec = CipherSpec::build(&token_set(&corpus), 11, 0, 0.0).unwrap();
        let pair = generate_cipher_pair(&corpus, &spec, 4, 4).unwrap();
        let inverse: BTreeMap<&String, &String> =
            pair.gold.iter().map(|(c, p)| (c, p)).collect();
        for (src, tgt) in pair.dev.iter().chain(pair.test.iter()) {
            let decoded: Vec<String> = src.iter().map(|t| (*inverse[t]).clone()).collect();
            assert_eq!(&decoded, tgt);
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let corpus = tiny_corpus();
        let spec = CipherSpec::build(&token_set(&corpus), 3, 2, 0.1).unwrap();
        let a = generate_cipher_pair(&corpus, &spec, 4, 4).unwrap();
        let b = generate_cipher_pair(&corpus, &spec, 4, 4).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn displacement_never_exceeds_window() {
        let corpus: Vec<Vec<String>> = (0..50)
            .map(|i| (0..12).map(|j| format!("t{}", (i * 12 + j) % 30)).collect())
            .collect();
        let window = 2usize;
        let spec = CipherSpec::build(&token_set(&corpus), 5, window, 0.0).unwrap();
        for (idx, sent) in corpus.iter().enumerate() {
            let out = spec.encipher(sent, idx as u64).unwrap();
            assert_eq!(out.len(), sent.len());
            // Recover each token's original index through the substitution;
            // duplicates are matched greedily in order, which is exact here
            // because equal tokens are interchangeable.
            let plain: Vec<&String> = sent.iter().collect();
            let mut used = vec![false; plain.len()];
            for (new_pos, cipher_tok) in out.iter().enumerate() {
                let orig = spec
                    .substitution
                    .iter()
                    .find(|(_, c)| *c == cipher_tok)
                    .map(|(p, _)| p)
                    .unwrap();
                let mut candidates: Vec<usize> = (0..plain.len())
                    .filter(|&i| !used[i] && plain[i] == orig)
                    .collect();
                candidates.sort_by_key(|&i| (i as i64 - new_pos as i64).unsigned_abs());
                let best = candidates[0];
                used[best] = true;
                assert!(
                    (best as i64 - new_pos as i64).unsigned_abs() as usize <= window,
                    "token displaced more than {window}"
                );
            }
        }
    }

    #[test]
    fn train_halves_are_disjoint_sentence_sets() {
        // Unique sentences, so decoded-source collisions would be real leaks.
        let corpus: Vec<Vec<String>> = (0..40)
            .map(|i| toks(&format!("u{i} w{} w{}", i % 7, (i + 1) % 7)))
            .collect();
        let spec = CipherSpec::build(&token_set(&corpus), 11, 0, 0.0).unwrap();
        let pair = generate_cipher_pair(&corpus, &spec, 4, 4).unwrap();
        let inverse: BTreeMap<&String, &String> =
            pair.gold.iter().map(|(c, p)| (c, p)).collect();
        let tgt_set: BTreeSet<&Vec<String>> = pair.train_tgt.iter().collect();
        for src in &pair.train_src {
            let decoded: Vec<String> = src.iter().map(|t| (*inverse[t]).clone()).collect();
            assert!(!tgt_set.contains(&decoded));
        }
    }

    #[test]
    fn drop_rate_out_of_range_rejected() {
        let corpus = tiny_corpus();
        assert!(CipherSpec::build(&token_set(&corpus), 1, 0, 0.5).is_err());
    }

    #[test]
    fn empty_vocabulary_rejected() {
        assert!(CipherSpec::build(&BTreeSet::new(), 1, 0, 0.0).is_err());
    }
}
