//! Monolingual word embeddings (positive PMI co-occurrence + truncated SVD),
//! orthogonal cross-lingual mapping via Procrustes with mutual-nearest-neighbor
//! self-learning, and softmax word-translation probabilities over cosines.

use crate::corpus::{Sentence, Vocabulary, SPECIALS};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

/// Per-language word vectors, one unit-norm row per vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    words: Vec<String>,
    index: HashMap<String, usize>,
    matrix: DMatrix<f64>,
    dim: usize,
}

impl EmbeddingSpace {
    /// Wrap a row matrix; rows are length-normalized, rows with no signal get
    /// a deterministic unit basis vector so every row stays finite.
    pub fn from_rows(words: Vec<String>, mut matrix: DMatrix<f64>) -> Result<Self> {
        if words.len() != matrix.nrows() {
            return Err(Error::Embed(format!(
                "{} words but {} rows",
                words.len(),
                matrix.nrows()
            )));
        }
        let dim = matrix.ncols();
        if dim == 0 {
            return Err(Error::Embed("zero-dimensional embedding".into()));
        }
        for i in 0..matrix.nrows() {
            let norm = matrix.row(i).norm();
            if !norm.is_finite() {
                return Err(Error::Embed(format!("non-finite row for '{}'", words[i])));
            }
            if norm < 1e-12 {
                let mut row = matrix.row_mut(i);
                row.fill(0.0);
                row[i % dim] = 1.0;
            } else if (norm - 1.0).abs() > 1e-12 {
                matrix.row_mut(i).scale_mut(1.0 / norm);
            }
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Embed(format!("duplicate word '{w}'")));
            }
        }
        Ok(EmbeddingSpace { words, index, matrix, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn word_row(&self, word: &str) -> Result<usize> {
        self.index
            .get(word)
            .copied()
            .ok_or_else(|| Error::Embed(format!("unknown word '{word}'")))
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.matrix.row(i).transpose()
    }

    /// Cosine between two rows; rows are unit so this is the dot product.
    pub fn cosine(&self, i: usize, j: usize) -> f64 {
        self.matrix.row(i).dot(&self.matrix.row(j))
    }

    /// Header "vocab dim", then one "word v1 .. vd" line per row. Values use
    /// the shortest round-trip decimal form, so load reproduces exact bits.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.words.len(), self.dim));
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for c in 0..self.dim {
                out.push(' ');
                out.push_str(&format!("{}", self.matrix[(i, c)]));
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let bytes = fs::read(path).map_err(|e| Error::io(display.clone(), e))?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Decode { path: display.clone() })?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(display.clone(), "missing header"))?;
        let mut it = header.split(' ');
        let n: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(display.clone(), "bad header"))?;
        let dim: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(display.clone(), "bad header"))?;
        let mut words = Vec::with_capacity(n);
        let mut matrix = DMatrix::zeros(n, dim);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::format(display.clone(), format!("missing row {i}")))?;
            let mut parts = line.split(' ');
            let w = parts
                .next()
                .ok_or_else(|| Error::format(display.clone(), format!("bad row {i}")))?;
            words.push(w.to_string());
            for c in 0..dim {
                let v: f64 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::format(display.clone(), format!("bad value at row {i}")))?;
                matrix[(i, c)] = v;
            }
        }
        Self::from_rows(words, matrix)
    }
}

/// Orthogonal map sending source rows into the target space (row convention:
/// mapped = row * M), plus the dictionary induced by mutual nearest neighbors.
#[derive(Debug, Clone)]
pub struct CrossLingualMap {
    pub matrix: DMatrix<f64>,
    pub induced: Vec<(String, String, f64)>,
}

impl CrossLingualMap {
    /// The opposite-direction map; the inverse of an orthogonal matrix is its
    /// transpose.
    pub fn reversed(&self) -> CrossLingualMap {
        CrossLingualMap {
            matrix: self.matrix.transpose(),
            induced: self
                .induced
                .iter()
                .map(|(x, y, c)| (y.clone(), x.clone(), *c))
                .collect(),
        }
    }

    pub fn mapped_rows(&self, space: &EmbeddingSpace) -> DMatrix<f64> {
        space.matrix() * &self.matrix
    }

    /// Frobenius distance of M^T M from the identity.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.matrix.ncols();
        (self.matrix.transpose() * &self.matrix - DMatrix::identity(d, d)).norm()
    }

    /// One matrix row per line, space-separated.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|j| format!("{}", self.matrix[(i, j)]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let bytes = fs::read(path).map_err(|e| Error::io(display.clone(), e))?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Decode { path: display.clone() })?;
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(|l| l.split(' ').filter_map(|s| s.parse().ok()).collect())
            .collect();
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::format(display, "mapping file is not a square matrix"));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Ok(CrossLingualMap { matrix, induced: Vec::new() })
    }
}

fn is_special_word(w: &str) -> bool {
    SPECIALS.contains(&w)
}

/// Sparse symmetric PPMI rows of the co-occurrence matrix.
fn ppmi_rows(corpus: &[Sentence], n: usize, window: usize) -> Vec<Vec<(usize, f64)>> {
    let mut pair_counts: HashMap<(usize, usize), f64> = HashMap::new();
    let mut word_totals = vec![0.0f64; n];
    let mut grand_total = 0.0f64;
    for sent in corpus {
        let ids = &sent.ids;
        for i in 0..ids.len() {
            let hi = (i + window + 1).min(ids.len());
            for j in (i + 1)..hi {
                let (a, b) = (ids[i], ids[j]);
                *pair_counts.entry((a, b)).or_insert(0.0) += 1.0;
                if a != b {
                    *pair_counts.entry((b, a)).or_insert(0.0) += 1.0;
                } else {
                    *pair_counts.get_mut(&(a, b)).unwrap() += 1.0;
                }
                word_totals[a] += 1.0;
                word_totals[b] += 1.0;
                grand_total += 2.0;
            }
        }
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for ((a, b), c) in pair_counts {
        let pmi = (c * grand_total / (word_totals[a] * word_totals[b])).ln();
        if pmi > 0.0 {
            rows[a].push((b, pmi));
        }
    }
    for row in &mut rows {
        row.sort_by_key(|&(j, _)| j);
    }
    rows
}

fn sparse_times_dense(rows: &[Vec<(usize, f64)>], m: &DMatrix<f64>) -> DMatrix<f64> {
    let l = m.ncols();
    let mut out = DMatrix::zeros(rows.len(), l);
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            for c in 0..l {
                out[(i, c)] += v * m[(j, c)];
            }
        }
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u1 in (0,1] avoids ln(0).
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Deterministic truncated factorization of the PPMI matrix by randomized
/// subspace iteration; embeddings are the top eigenvector coordinates scaled
/// by sqrt of the eigenvalue magnitudes, then row-normalized.
pub fn train_embeddings(
    corpus: &[Sentence],
    vocab: &Vocabulary,
    dim: usize,
    window: usize,
) -> Result<EmbeddingSpace> {
    let n = vocab.len();
    if dim == 0 || dim > n {
        return Err(Error::Embed(format!("dim {dim} outside [1, {n}]")));
    }
    if window == 0 {
        return Err(Error::Embed("window must be >= 1".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for sent in corpus {
        for &id in &sent.ids {
            seen.insert(id);
        }
    }
    if seen.len() < 2 {
        return Err(Error::Embed(
            "degenerate corpus: fewer than two distinct tokens".into(),
        ));
    }

    let rows = ppmi_rows(corpus, n, window);
    let l = (dim + 8).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5050_4D49);
    let omega = DMatrix::from_fn(n, l, |_, _| gaussian(&mut rng));

    let mut q = nalgebra::linalg::QR::new(sparse_times_dense(&rows, &omega)).q();
    for _ in 0..3 {
        q = nalgebra::linalg::QR::new(sparse_times_dense(&rows, &q)).q();
    }
    let aq = sparse_times_dense(&rows, &q);
    let mut small = q.transpose() * &aq;
    small = (&small + small.transpose()) * 0.5;
    let eig = nalgebra::linalg::SymmetricEigen::new(small);

    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .partial_cmp(&eig.eigenvalues[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut embedding = DMatrix::zeros(n, dim);
    for (col, &e) in order.iter().take(dim).enumerate() {
        let mut v = &q * eig.eigenvectors.column(e);
        // Sign convention: the largest-magnitude entry is made positive.
        let mut lead = 0usize;
        for i in 1..n {
            if v[i].abs() > v[lead].abs() {
                lead = i;
            }
        }
        if v[lead] < 0.0 {
            v.neg_mut();
        }
        let scale = eig.eigenvalues[e].abs().sqrt();
        for i in 0..n {
            embedding[(i, col)] = v[i] * scale;
        }
    }
    EmbeddingSpace::from_rows(vocab.tokens().to_vec(), embedding)
}

/// Orthogonal Procrustes fit: M = argmin over orthogonal matrices of the
/// squared error sending seed source rows onto their target rows.
pub fn procrustes_map(
    src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
    seed_dict: &[(String, String)],
) -> Result<CrossLingualMap> {
    if seed_dict.is_empty() {
        return Err(Error::Mapping("empty seed dictionary".into()));
    }
    let d = src.dim();
    if tgt.dim() != d {
        return Err(Error::Mapping("dimension mismatch".into()));
    }
    let mut a = DMatrix::zeros(seed_dict.len(), d);
    let mut b = DMatrix::zeros(seed_dict.len(), d);
    for (k, (x, y)) in seed_dict.iter().enumerate() {
        let i = src.word_row(x)?;
        let j = tgt.word_row(y)?;
        a.row_mut(k).copy_from(&src.matrix().row(i));
        b.row_mut(k).copy_from(&tgt.matrix().row(j));
    }
    let c = a.transpose() * b;
    let svd = c.svd(true, true);
    let u = svd.u.as_ref().ok_or_else(|| Error::Mapping("svd failed".into()))?;
    let vt = svd.v_t.as_ref().ok_or_else(|| Error::Mapping("svd failed".into()))?;
    let matrix = u * vt;
    Ok(CrossLingualMap { matrix, induced: Vec::new() })
}

/// Mutual nearest neighbors by cosine between mapped source rows and target
/// rows; reserved special tokens never participate.
pub fn induce_dictionary(
    map: &CrossLingualMap,
    src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
) -> Vec<(String, String, f64)> {
    let mapped = map.mapped_rows(src);
    let sims = &mapped * tgt.matrix().transpose();
    let src_ok: Vec<bool> = src.words().iter().map(|w| !is_special_word(w)).collect();
    let tgt_ok: Vec<bool> = tgt.words().iter().map(|w| !is_special_word(w)).collect();

    let nx = src.len();
    let ny = tgt.len();
    let mut best_for_src = vec![usize::MAX; nx];
    let mut best_for_tgt = vec![usize::MAX; ny];
    for i in 0..nx {
        if !src_ok[i] {
            continue;
        }
        let mut best = usize::MAX;
        for j in 0..ny {
            if tgt_ok[j] && (best == usize::MAX || sims[(i, j)] > sims[(i, best)]) {
                best = j;
            }
        }
        best_for_src[i] = best;
    }
    for j in 0..ny {
        if !tgt_ok[j] {
            continue;
        }
        let mut best = usize::MAX;
        for i in 0..nx {
            if src_ok[i] && (best == usize::MAX || sims[(i, j)] > sims[(best, j)]) {
                best = i;
            }
        }
        best_for_tgt[j] = best;
    }
    let mut out = Vec::new();
    for i in 0..nx {
        let j = best_for_src[i];
        if j != usize::MAX && best_for_tgt[j] == i {
            out.push((src.words()[i].clone(), tgt.words()[j].clone(), sims[(i, j)]));
        }
    }
    out
}

/// Alternate Procrustes fitting and mutual-nearest-neighbor induction. Stops
/// early and returns the previous mapping if a round lowers the induced
/// dictionary's mean cosine.
pub fn self_learning(
    src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
    init_dict: &[(String, String)],
    rounds: usize,
) -> Result<CrossLingualMap> {
    if rounds == 0 {
        return Err(Error::Mapping("rounds must be >= 1".into()));
    }
    let mut dict: Vec<(String, String)> = init_dict.to_vec();
    let mut best: Option<(CrossLingualMap, f64)> = None;
    for round in 0..rounds {
        let mut map = procrustes_map(src, tgt, &dict)?;
        let induced = induce_dictionary(&map, src, tgt);
        if induced.is_empty() {
            return Err(Error::Mapping(format!(
                "round {round}: induced dictionary is empty (seed of {} pairs)",
                dict.len()
            )));
        }
        let mean = induced.iter().map(|(_, _, c)| *c).sum::<f64>() / induced.len() as f64;
        if let Some((prev, prev_mean)) = &best {
            if mean < *prev_mean {
                return Ok(prev.clone());
            }
        }
        dict = induced.iter().map(|(x, y, _)| (x.clone(), y.clone())).collect();
        map.induced = induced;
        best = Some((map, mean));
    }
    Ok(best.unwrap().0)
}

/// Identical strings shared by both frequency-ranked word lists when there
/// are at least 25 of them; otherwise frequency-rank pairing of the top 500.
pub fn anchor_or_frequency_seed(
    src_ranked: &[String],
    tgt_ranked: &[String],
) -> Vec<(String, String)> {
    let tgt_set: std::collections::HashSet<&String> = tgt_ranked.iter().collect();
    let anchors: Vec<(String, String)> = src_ranked
        .iter()
        .filter(|w| tgt_set.contains(*w) && !is_special_word(w))
        .map(|w| (w.clone(), w.clone()))
        .collect();
    if anchors.len() >= 25 {
        return anchors;
    }
    src_ranked
        .iter()
        .zip(tgt_ranked.iter())
        .filter(|(x, y)| !is_special_word(x) && !is_special_word(y))
        .take(500)
        .map(|(x, y)| (x.clone(), y.clone()))
        .collect()
}

/// Softmax over scaled cosines between the mapped source word and every
/// non-special target word. Returned in target id order; probabilities sum
/// to one.
pub fn word_translation_prob(
    map: &CrossLingualMap,
    src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
    word: &str,
    lambda: f64,
) -> Result<Vec<(String, f64)>> {
    if lambda < 0.0 {
        return Err(Error::Mapping(format!("lambda {lambda} must be >= 0")));
    }
    let i = src.word_row(word)?;
    let mapped = src.matrix().row(i) * &map.matrix;
    let candidates: Vec<usize> = (0..tgt.len())
        .filter(|&j| !is_special_word(&tgt.words()[j]))
        .collect();
    if candidates.is_empty() {
        return Err(Error::Mapping("target space has no candidate words".into()));
    }
    let scores: Vec<f64> = candidates
        .iter()
        .map(|&j| lambda * tgt.matrix().row(j).dot(&mapped))
        .collect();
    let probs = softmax(&scores);
    Ok(candidates
        .into_iter()
        .zip(probs)
        .map(|(j, p)| (tgt.words()[j].clone(), p))
        .collect())
}

/// Log-space softmax with max subtraction.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
