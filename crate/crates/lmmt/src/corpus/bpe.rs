//! Byte-pair encoding over whitespace tokens: learn greedy most-frequent-pair
//! merges, apply them, and undo via the continuation marker.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fs;
use std::path::Path;

/// Continuation marker: every subword except the last of a token carries it.
pub const BPE_CONT: &str = "@@";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BpeMergeTable {
    /// Ordered merge rules over marked symbols, e.g. ("a@@", "b@@").
    pub merges: Vec<(String, String)>,
}

fn char_symbols(token: &str) -> Vec<String> {
    let chars: Vec<char> = token.chars().collect();
    let n = chars.len();
    chars
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            if i + 1 < n {
                format!("{c}{BPE_CONT}")
            } else {
                c.to_string()
            }
        })
        .collect()
}

fn merge_symbol(left: &str, right: &str) -> String {
    let stem = left.strip_suffix(BPE_CONT).unwrap_or(left);
    format!("{stem}{right}")
}

fn merge_in_place(symbols: &mut Vec<String>, left: &str, right: &str) {
    let mut i = 0;
    while i + 1 < symbols.len() {
        if symbols[i] == left && symbols[i + 1] == right {
            let merged = merge_symbol(left, right);
            symbols[i] = merged;
            symbols.remove(i + 1);
        } else {
            i += 1;
        }
    }
}

/// Learn `num_merges` greedy merges; pair frequency ties break
/// lexicographically on (left, right).
pub fn learn_bpe(corpus: &[Vec<String>], num_merges: usize) -> BpeMergeTable {
    let mut word_freq: HashMap<&str, u64> = HashMap::new();
    for sent in corpus {
        for tok in sent {
            *word_freq.entry(tok.as_str()).or_insert(0) += 1;
        }
    }
    let mut words: Vec<(Vec<String>, u64)> = {
        let mut v: Vec<(&str, u64)> = word_freq.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v.into_iter().map(|(w, f)| (char_symbols(w), f)).collect()
    };

    let mut merges = Vec::with_capacity(num_merges);
    for _ in 0..num_merges {
        let mut pair_counts: HashMap<(&str, &str), u64> = HashMap::new();
        for (syms, freq) in &words {
            for pair in syms.windows(2) {
                *pair_counts.entry((pair[0].as_str(), pair[1].as_str())).or_insert(0) += freq;
            }
        }
        let best = pair_counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        let Some(((left, right), _)) = best else {
            break;
        };
        let (left, right) = (left.to_string(), right.to_string());
        for (syms, _) in &mut words {
            merge_in_place(syms, &left, &right);
        }
        merges.push((left, right));
    }
    BpeMergeTable { merges }
}

/// Split each token into subwords by replaying the merge table in order.
pub fn apply_bpe(tokens: &[String], table: &BpeMergeTable) -> Vec<String> {
    let mut out = Vec::new();
    for tok in tokens {
        let mut syms = char_symbols(tok);
        for (l, r) in &table.merges {
            merge_in_place(&mut syms, l, r);
        }
        out.extend(syms);
    }
    out
}

/// Join subwords back into whole tokens on the continuation marker.
pub fn undo_bpe(subwords: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for sym in subwords {
        match sym.strip_suffix(BPE_CONT) {
            Some(stem) => current.push_str(stem),
            None => {
                current.push_str(sym);
                out.push(std::mem::take(&mut current));
            }
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

impl BpeMergeTable {
    /// One merge per line: "left right".
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (l, r) in &self.merges {
            out.push_str(l);
            out.push(' ');
            out.push_str(r);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Decode {
            path: path.display().to_string(),
        })?;
        let mut merges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let mut it = line.split(' ');
            match (it.next(), it.next(), it.next()) {
                (Some(l), Some(r), None) => merges.push((l.to_string(), r.to_string())),
                _ => {
                    return Err(Error::format(
                        path.display().to_string(),
                        format!("bad merge on line {}", i + 1),
                    ))
                }
            }
        }
        Ok(BpeMergeTable { merges })
    }
}
