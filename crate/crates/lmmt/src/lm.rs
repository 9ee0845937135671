//! Smoothed n-gram language models: interpolated Kneser-Ney with a single
//! fixed discount. Natural log throughout. `<unk>` is a first-class token, so
//! every conditional probability is strictly positive and sentence scores of
//! noisy pseudo-text stay finite.
//!
//! Counting convention: each sentence is padded with order-1 `<bos>` tokens
//! and terminated with `<eos>`; every k-gram window of the padded sequence is
//! counted for every k up to the order. Lower orders are smoothed with
//! continuation counts, the base distribution is uniform over the full
//! vocabulary.

use crate::corpus::{Sentence, TokenId};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 4] = b"LMKN";
const VERSION: u32 = 1;
const MAX_PACKED_VOCAB: usize = u16::MAX as usize - 1;

fn pack(ids: &[TokenId]) -> u128 {
    let mut key = 0u128;
    for &id in ids {
        key = (key << 16) | (id as u128 + 1);
    }
    key
}

/// Drop the first (highest-bits) token of a packed k-gram.
fn suffix(key: u128, k: usize) -> u128 {
    let bits = 16 * (k - 1);
    key & ((1u128 << bits) - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    discount: f64,
    vocab_size: usize,
    /// Raw counts of k-grams, index k-1.
    counts: Vec<HashMap<u128, u64>>,
    /// Effective (raw or continuation) counts used by the smoother, index k-1.
    effective: Vec<HashMap<u128, u64>>,
    /// Per context of each order: (total effective count, distinct continuations).
    context_stats: Vec<HashMap<u128, (u64, u32)>>,
}

/// Train an interpolated Kneser-Ney model of the given order.
pub fn train_ngram(
    corpus: &[Sentence],
    vocab_size: usize,
    order: usize,
    discount: f64,
) -> Result<NGramModel> {
    if !(1..=5).contains(&order) {
        return Err(Error::Lm(format!("order {order} outside [1, 5]")));
    }
    if !(discount > 0.0 && discount < 1.0) {
        return Err(Error::Lm(format!("discount {discount} outside (0, 1)")));
    }
    if corpus.is_empty() || corpus.iter().all(|s| s.is_empty()) {
        return Err(Error::Lm("empty corpus".into()));
    }
    if vocab_size == 0 || vocab_size > MAX_PACKED_VOCAB {
        return Err(Error::Lm(format!(
            "vocab size {vocab_size} outside [1, {MAX_PACKED_VOCAB}]"
        )));
    }

    let mut counts: Vec<HashMap<u128, u64>> = vec![HashMap::new(); order];
    let bos = 1usize; // fixed special ids, see corpus::SPECIALS
    let eos = 2usize;
    for sent in corpus {
        let mut seq = vec![bos; order - 1];
        for &id in &sent.ids {
            if id >= vocab_size {
                return Err(Error::Lm(format!("token id {id} outside vocabulary")));
            }
            seq.push(id);
        }
        seq.push(eos);
        for k in 1..=order {
            for window in seq.windows(k) {
                *counts[k - 1].entry(pack(window)).or_insert(0) += 1;
            }
        }
    }

    Ok(NGramModel::from_counts(order, discount, vocab_size, counts))
}

impl NGramModel {
    fn from_counts(
        order: usize,
        discount: f64,
        vocab_size: usize,
        counts: Vec<HashMap<u128, u64>>,
    ) -> Self {
        // Highest order keeps raw counts; each lower order counts distinct
        // left extensions observed one order up.
        let mut effective: Vec<HashMap<u128, u64>> = vec![HashMap::new(); order];
        effective[order - 1] = counts[order - 1].clone();
        for k in (1..order).rev() {
            let mut table: HashMap<u128, u64> = HashMap::new();
            for key in counts[k].keys() {
                *table.entry(suffix(*key, k + 1)).or_insert(0) += 1;
            }
            effective[k - 1] = table;
        }
        let mut context_stats: Vec<HashMap<u128, (u64, u32)>> = vec![HashMap::new(); order];
        for k in 1..=order {
            for (key, c) in &effective[k - 1] {
                let ctx = key >> 16;
                let entry = context_stats[k - 1].entry(ctx).or_insert((0, 0));
                entry.0 += c;
                entry.1 += 1;
            }
        }
        NGramModel {
            order,
            discount,
            vocab_size,
            counts,
            effective,
            context_stats,
        }
    }

    /// A model with no counts: every conditional is the uniform base 1/|V|.
    pub fn uniform(order: usize, vocab_size: usize) -> Self {
        NGramModel::from_counts(order, 0.5, vocab_size, vec![HashMap::new(); order])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// P(token | context), interpolating down to the uniform base. `context`
    /// may be any length; only its last order-1 tokens matter.
    pub fn cond_prob(&self, context: &[TokenId], token: TokenId) -> f64 {
        self.prob_at(self.order, context, token)
    }

    fn prob_at(&self, k: usize, context: &[TokenId], token: TokenId) -> f64 {
        if k == 0 {
            return 1.0 / self.vocab_size as f64;
        }
        let tail = &context[context.len().saturating_sub(k - 1)..];
        if tail.len() < k - 1 {
            return self.prob_at(k - 1, context, token);
        }
        let ctx_key = pack(tail);
        match self.context_stats[k - 1].get(&ctx_key) {
            None => self.prob_at(k - 1, context, token),
            Some(&(total, distinct)) => {
                let mut gram = tail.to_vec();
                gram.push(token);
                let c = self.effective[k - 1].get(&pack(&gram)).copied().unwrap_or(0);
                let tot = total as f64;
                let discounted = (c as f64 - self.discount).max(0.0) / tot;
                let backoff = self.discount * distinct as f64 / tot;
                discounted + backoff * self.prob_at(k - 1, context, token)
            }
        }
    }

    /// Natural-log conditional.
    pub fn cond_log_prob(&self, context: &[TokenId], token: TokenId) -> f64 {
        self.cond_prob(context, token).ln()
    }

    /// Full next-token distribution for a context.
    pub fn next_token_dist(&self, context: &[TokenId]) -> Vec<f64> {
        (0..self.vocab_size)
            .map(|w| self.cond_prob(context, w))
            .collect()
    }

    /// Sum of per-token natural-log conditionals including `<eos>`, with
    /// `<bos>` padding. An empty sentence scores `<eos>` alone.
    pub fn sentence_log_prob(&self, sentence: &Sentence) -> f64 {
        let bos = 1usize;
        let eos = 2usize;
        let mut ctx = vec![bos; self.order.saturating_sub(1)];
        let mut total = 0.0;
        for &id in sentence.ids.iter().chain(std::iter::once(&eos)) {
            total += self.cond_log_prob(&ctx, id);
            ctx.push(id);
        }
        total
    }

    pub fn log_prob_tokens(&self, ids: &[TokenId]) -> f64 {
        self.sentence_log_prob(&Sentence::new(ids.to_vec()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out: Vec<u8> = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.order as u32).to_le_bytes());
        out.extend_from_slice(&(self.vocab_size as u64).to_le_bytes());
        out.extend_from_slice(&self.discount.to_le_bytes());
        for table in &self.counts {
            let mut entries: Vec<(&u128, &u64)> = table.iter().collect();
            entries.sort();
            out.extend_from_slice(&(entries.len() as u64).to_le_bytes());
            for (key, count) in entries {
                out.extend_from_slice(&key.to_le_bytes());
                out.extend_from_slice(&count.to_le_bytes());
            }
        }
        fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let bytes = fs::read(path).map_err(|e| Error::io(display.clone(), e))?;
        let mut cur = 0usize;
        let take = |cur: &mut usize, n: usize| -> Result<&[u8]> {
            if *cur + n > bytes.len() {
                return Err(Error::format(display.clone(), "truncated model file"));
            }
            let s = &bytes[*cur..*cur + n];
            *cur += n;
            Ok(s)
        };
        if take(&mut cur, 4)? != MAGIC {
            return Err(Error::format(display.clone(), "bad magic"));
        }
        let version = u32::from_le_bytes(take(&mut cur, 4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::format(display.clone(), format!("unsupported version {version}")));
        }
        let order = u32::from_le_bytes(take(&mut cur, 4)?.try_into().unwrap()) as usize;
        let vocab_size = u64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap()) as usize;
        let discount = f64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap());
        if !(1..=5).contains(&order) {
            return Err(Error::format(display.clone(), "bad order"));
        }
        let mut counts = Vec::with_capacity(order);
        for _ in 0..order {
            let n = u64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap()) as usize;
            let mut table = HashMap::with_capacity(n);
            for _ in 0..n {
                let key = u128::from_le_bytes(take(&mut cur, 16)?.try_into().unwrap());
                let count = u64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap());
                table.insert(key, count);
            }
            counts.push(table);
        }
        if cur != bytes.len() {
            return Err(Error::format(display, "trailing bytes"));
        }
        Ok(NGramModel::from_counts(order, discount, vocab_size, counts))
    }
}

/// exp(- total log-prob / total token count including `<eos>`).
pub fn perplexity(model: &NGramModel, corpus: &[Sentence]) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::Lm("empty corpus".into()));
    }
    let mut log_total = 0.0;
    let mut tokens = 0usize;
    for sent in corpus {
        log_total += model.sentence_log_prob(sent);
        tokens += sent.len() + 1;
    }
    Ok((-log_total / tokens as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, tokenize, Vocabulary};
    use rand::{Rng, SeedableRng};

    fn setup(lines: &[&str], order: usize) -> (Vocabulary, Vec<Sentence>, NGramModel) {
        let corpus: Vec<Vec<String>> = lines.iter().map(|l| tokenize(l)).collect();
        let vocab = build_vocab(&corpus, 1000, 1).unwrap();
        let sents: Vec<Sentence> = corpus.iter().map(|s| vocab.encode(s)).collect();
        let model = train_ngram(&sents, vocab.len(), order, 0.75).unwrap();
        (vocab, sents, model)
    }

    /// Independent interpolated-KN calculator working from raw token
    /// sequences with naive scans; no sharing with the model's tables.
    struct BruteForceKn {
        seqs: Vec<Vec<usize>>,
        order: usize,
        discount: f64,
        vocab_size: usize,
    }

    impl BruteForceKn {
        fn new(corpus: &[Sentence], order: usize, discount: f64, vocab_size: usize) -> Self {
            let seqs = corpus
                .iter()
                .map(|s| {
                    let mut v = vec![1usize; order - 1];
                    v.extend(&s.ids);
                    v.push(2);
                    v
                })
                .collect();
            BruteForceKn { seqs, order, discount, vocab_size }
        }

        fn raw_count(&self, gram: &[usize]) -> u64 {
            self.seqs
                .iter()
                .map(|s| s.windows(gram.len()).filter(|w| *w == gram).count() as u64)
                .sum()
        }

        fn continuation_count(&self, gram: &[usize]) -> u64 {
            let mut lefts = std::collections::BTreeSet::new();
            for s in &self.seqs {
                for w in s.windows(gram.len() + 1) {
                    if &w[1..] == gram {
                        lefts.insert(w[0]);
                    }
                }
            }
            lefts.len() as u64
        }

        fn effective(&self, k: usize, gram: &[usize]) -> u64 {
            if k == self.order {
                self.raw_count(gram)
            } else {
                self.continuation_count(gram)
            }
        }

        fn prob(&self, k: usize, ctx: &[usize], w: usize) -> f64 {
            if k == 0 {
                return 1.0 / self.vocab_size as f64;
            }
            let tail: Vec<usize> = ctx[ctx.len().saturating_sub(k - 1)..].to_vec();
            let mut total = 0.0f64;
            let mut distinct = 0.0f64;
            for t in 0..self.vocab_size {
                let mut g = tail.clone();
                g.push(t);
                let c = self.effective(k, &g);
                if c > 0 {
                    total += c as f64;
                    distinct += 1.0;
                }
            }
            if total == 0.0 {
                return self.prob(k - 1, ctx, w);
            }
            let mut g = tail;
            g.push(w);
            let c = self.effective(k, &g) as f64;
            (c - self.discount).max(0.0) / total
                + self.discount * distinct / total * self.prob(k - 1, ctx, w)
        }
    }

    #[test]
    fn unigram_counts_match_mle_up_to_smoothing() {
        // Corpus "a a b": events a,a,b,<eos>; hand-applied interpolated KN:
        // P(w) = max(c-D,0)/4 + D*3/4 * 1/|V|.
        let (vocab, _, model) = setup(&["a a b"], 1);
        let v = vocab.len() as f64;
        let d = 0.75;
        let expect = |c: f64| (c - d).max(0.0) / 4.0 + d * 3.0 / 4.0 / v;
        let a = vocab.id("a");
        let b = vocab.id("b");
        assert!((model.cond_prob(&[], a) - expect(2.0)).abs() < 1e-12);
        assert!((model.cond_prob(&[], b) - expect(1.0)).abs() < 1e-12);
        // MLE ratio is preserved in the discounted part: P(a) > P(b).
        assert!(model.cond_prob(&[], a) > model.cond_prob(&[], b));
    }

    #[test]
    fn next_token_dist_sums_to_one_for_random_contexts() {
        let (vocab, _, model) = setup(
            &["a b c a b", "c c b a", "b a a c", "a b b c c a"],
            3,
        );
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let ctx: Vec<usize> = (0..rng.gen_range(0..4))
                .map(|_| rng.gen_range(0..vocab.len()))
                .collect();
            let dist = model.next_token_dist(&ctx);
            let sum: f64 = dist.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "context {ctx:?} sums to {sum}");
            assert!(dist.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn bigram_model_matches_brute_force_oracle() {
        let (vocab, sents, model) = setup(&["a b a c", "b a a", "c a b a"], 2);
        let oracle = BruteForceKn::new(&sents, 2, 0.75, vocab.len());
        for c in 0..vocab.len() {
            for w in 0..vocab.len() {
                let got = model.cond_prob(&[c], w);
                let want = oracle.prob(2, &[c], w);
                assert!(
                    (got - want).abs() < 1e-12,
                    "P({w}|{c}) = {got}, oracle {want}"
                );
            }
        }
    }

    #[test]
    fn trigram_model_matches_brute_force_oracle_incl_unseen_contexts() {
        let (vocab, sents, model) = setup(&["a b c a", "c b a b c"], 3);
        let oracle = BruteForceKn::new(&sents, 3, 0.75, vocab.len());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let c1 = rng.gen_range(0..vocab.len());
            let c2 = rng.gen_range(0..vocab.len());
            let w = rng.gen_range(0..vocab.len());
            let got = model.cond_prob(&[c1, c2], w);
            let want = oracle.prob(3, &[c1, c2], w);
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sentence_log_prob_matches_hand_computation() {
        // Whole training corpus as the scored sentence, order 1.
        let (vocab, sents, model) = setup(&["a a b"], 1);
        let v = vocab.len() as f64;
        let d = 0.75;
        let p = |c: f64| (c - d).max(0.0) / 4.0 + d * 3.0 / 4.0 / v;
        let want = p(2.0).ln() * 2.0 + p(1.0).ln() * 2.0; // a a b <eos>
        let got = model.sentence_log_prob(&sents[0]);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn log_probs_are_negative_and_monotone_in_length() {
        let (vocab, _, model) = setup(&["a b c", "b c a"], 2);
        let s = vocab.encode(&tokenize("a b c"));
        let lp = model.sentence_log_prob(&s);
        assert!(lp < 0.0);
        let doubled = Sentence::new([s.ids.clone(), s.ids.clone()].concat());
        assert!(model.sentence_log_prob(&doubled) <= lp);
    }

    #[test]
    fn empty_sentence_scores_eos_only() {
        let (_, _, model) = setup(&["a b"], 2);
        let got = model.sentence_log_prob(&Sentence::new(vec![]));
        let want = model.cond_log_prob(&[1], 2); // <eos> given <bos>
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn uniform_model_perplexity_is_vocab_size() {
        let model = NGramModel::uniform(3, 12);
        let corpus = vec![Sentence::new(vec![5, 6, 7]), Sentence::new(vec![8])];
        let ppl = perplexity(&model, &corpus).unwrap();
        assert!((ppl - 12.0).abs() < 1e-9);
    }

    #[test]
    fn save_load_round_trip_and_deterministic_bytes() {
        let (_, _, model) = setup(&["a b c a b", "c a"], 3);
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("m1.lm");
        let p2 = dir.path().join("m2.lm");
        model.save(&p1).unwrap();
        let loaded = NGramModel::load(&p1).unwrap();
        assert_eq!(loaded, model);
        loaded.save(&p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(train_ngram(&[], 10, 3, 0.75).is_err());
    }

    #[test]
    fn bad_parameters_rejected() {
        let corpus = vec![Sentence::new(vec![5])];
        assert!(train_ngram(&corpus, 10, 0, 0.75).is_err());
        assert!(train_ngram(&corpus, 10, 6, 0.75).is_err());
        assert!(train_ngram(&corpus, 10, 2, 0.0).is_err());
        assert!(train_ngram(&corpus, 10, 2, 1.0).is_err());
    }
}
