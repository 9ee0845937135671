//! Corpus ingestion, tokenization, vocabulary and subword handling, and
//! synthetic cipher language pairs for desk-scale experiments.

mod bpe;
mod cipher;
mod textgen;
mod vocab;

pub use bpe::{apply_bpe, learn_bpe, undo_bpe, BpeMergeTable, BPE_CONT};
pub use cipher::{generate_cipher_pair, CipherPair, CipherSpec};
pub use textgen::synthesize_corpus;
pub use vocab::{Sentence, TokenId, Vocabulary, BOS, DUMMY, EOS, PAD, SPECIALS, UNK};

use crate::error::{Error, Result};
use std::fs;
use std::path::Path;

/// Lowercase, split punctuation into standalone tokens, then whitespace-split.
/// Deterministic and idempotent on its own output.
pub fn tokenize(line: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in line.to_lowercase().chars() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if ch.is_alphanumeric() {
            current.push(ch);
        } else {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(ch.to_string());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Read a plain-text corpus: one sentence per line, tokenized. Empty lines
/// are skipped.
pub fn read_corpus(path: &Path) -> Result<Vec<Vec<String>>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Decode {
        path: path.display().to_string(),
    })?;
    Ok(text
        .lines()
        .map(tokenize)
        .filter(|toks| !toks.is_empty())
        .collect())
}

/// Write a corpus as one space-joined sentence per line, LF endings.
pub fn write_corpus(path: &Path, corpus: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    for sent in corpus {
        out.push_str(&sent.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Build a vocabulary from tokenized sentences: most frequent tokens kept,
/// ties broken lexicographically, specials always included.
pub fn build_vocab(corpus: &[Vec<String>], max_size: usize, min_count: usize) -> Result<Vocabulary> {
    if max_size <= SPECIALS.len() {
        return Err(Error::Vocab(format!(
            "max_size {} must exceed the {} reserved specials",
            max_size,
            SPECIALS.len()
        )));
    }
    let mut counts: std::collections::HashMap<&str, u64> = std::collections::HashMap::new();
    let mut total = 0u64;
    for sent in corpus {
        for tok in sent {
            *counts.entry(tok.as_str()).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::Vocab("empty corpus".into()));
    }
    let mut ranked: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|(_, c)| *c as usize >= min_count)
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_size - SPECIALS.len());
    Vocabulary::new(ranked.into_iter().map(|(t, _)| t.to_string()))
}
