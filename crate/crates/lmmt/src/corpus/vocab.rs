//! Token/id vocabulary with reserved specials.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fs;
use std::path::Path;

pub type TokenId = usize;

pub const PAD: &str = "<pad>";
pub const BOS: &str = "<bos>";
pub const EOS: &str = "<eos>";
pub const UNK: &str = "<unk>";
/// Dummy source token for decoder-as-LM scoring; never appears in data.
pub const DUMMY: &str = "<dummy>";

/// Reserved specials, in id order starting at 0.
pub const SPECIALS: [&str; 5] = [PAD, BOS, EOS, UNK, DUMMY];

/// Bidirectional token<->id map. Ids are dense from 0; specials occupy the
/// lowest ids; unknown strings resolve to `<unk>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    pub fn new(words: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut tokens: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        tokens.extend(words);
        let mut index = HashMap::with_capacity(tokens.len());
        for (id, tok) in tokens.iter().enumerate() {
            if index.insert(tok.clone(), id).is_some() {
                return Err(Error::Vocab(format!("duplicate token '{tok}'")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // specials are always present
    }

    pub fn pad_id(&self) -> TokenId {
        0
    }
    pub fn bos_id(&self) -> TokenId {
        1
    }
    pub fn eos_id(&self) -> TokenId {
        2
    }
    pub fn unk_id(&self) -> TokenId {
        3
    }
    pub fn dummy_id(&self) -> TokenId {
        4
    }

    pub fn is_special(&self, id: TokenId) -> bool {
        id < SPECIALS.len()
    }

    /// Exact lookup; `None` when absent.
    pub fn lookup(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    /// Lookup with `<unk>` fallback.
    pub fn id(&self, token: &str) -> TokenId {
        self.lookup(token).unwrap_or_else(|| self.unk_id())
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id]
    }

    /// All tokens in id order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Non-special tokens with their ids.
    pub fn words(&self) -> impl Iterator<Item = (TokenId, &str)> {
        self.tokens
            .iter()
            .enumerate()
            .skip(SPECIALS.len())
            .map(|(i, t)| (i, t.as_str()))
    }

    pub fn encode(&self, tokens: &[String]) -> Sentence {
        Sentence {
            ids: tokens.iter().map(|t| self.id(t)).collect(),
        }
    }

    pub fn decode(&self, sentence: &Sentence) -> Vec<String> {
        sentence.ids.iter().map(|&i| self.tokens[i].clone()).collect()
    }

    /// One token per line, line number = id.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for tok in &self.tokens {
            out.push_str(tok);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Decode {
            path: path.display().to_string(),
        })?;
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() < SPECIALS.len() {
            return Err(Error::format(path.display().to_string(), "missing specials"));
        }
        for (i, s) in SPECIALS.iter().enumerate() {
            if lines[i] != *s {
                return Err(Error::format(
                    path.display().to_string(),
                    format!("line {i} must be '{s}', found '{}'", lines[i]),
                ));
            }
        }
        Self::new(lines[SPECIALS.len()..].iter().map(|s| s.to_string()))
    }
}

/// A sentence as token ids; `<bos>`/`<eos>` are never stored, consumers add
/// them where needed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub ids: Vec<TokenId>,
}

impl Sentence {
    pub fn new(ids: Vec<TokenId>) -> Self {
        Sentence { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}
