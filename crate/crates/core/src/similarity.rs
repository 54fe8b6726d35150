//! Embedding-based language similarity.
//!
//! The similarity between two languages is the *cosine gap* over a parallel
//! corpus: the mean cosine of aligned sentence pairs (same index) minus the
//! mean cosine of all misaligned pairs (different indices). Rows are
//! unit-normalized on construction so cosines are dot products, and the
//! misaligned mean is computed exactly from summed vectors:
//!
//! ```text
//! all_pairs  = (Σ s_i) · (Σ t_j)
//! misaligned = (all_pairs − Σ s_i·t_i) / (n² − n)
//! ```

use std::collections::HashSet;

use log::warn;

use crate::error::{Error, Result};

const UNIT_NORM_TOL: f64 = 1e-6;
const PAIRWISE_BLOCK: usize = 8;

/// Sums with pairwise (tree) reduction.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Column sums of a row-major `rows × dim` block with pairwise reduction over rows.
fn pairwise_column_sum(data: &[f64], dim: usize) -> Vec<f64> {
    let rows = data.len() / dim;
    if rows <= PAIRWISE_BLOCK {
        let mut acc = vec![0.0; dim];
        for row in data.chunks_exact(dim) {
            for (a, x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        }
        return acc;
    }
    let mid = rows / 2;
    let (lo, hi) = data.split_at(mid * dim);
    let mut left = pairwise_column_sum(lo, dim);
    let right = pairwise_column_sum(hi, dim);
    for (l, r) in left.iter_mut().zip(right) {
        *l += r;
    }
    left
}

/// Dot product with pairwise reduction.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_sum(&prods)
}

/// Sentence embeddings for one language, aligned by row index with every
/// other set drawn from the same parallel corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    language: String,
    n: usize,
    d: usize,
    data: Vec<f64>,
    renormalized_rows: usize,
}

impl EmbeddingSet {
    pub fn from_rows(language: impl Into<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let language = language.into();
        let d = rows.first().map(Vec::len).unwrap_or(0);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::input(format!(
                "{language}: row {i} has {} values, expected {d}",
                r.len()
            )));
        }
        let n = rows.len();
        Self::from_flat(language, n, d, rows.into_iter().flatten().collect())
    }

    /// Builds a set from row-major data, L2-normalizing every row.
    pub fn from_flat(
        language: impl Into<String>,
        n: usize,
        d: usize,
        mut data: Vec<f64>,
    ) -> Result<Self> {
        let language = language.into();
        if language.is_empty() || language.chars().any(char::is_whitespace) {
            return Err(Error::input(format!("invalid language code `{language}`")));
        }
        if d == 0 {
            return Err(Error::input(format!(
                "{language}: embedding dimension must be ≥ 1"
            )));
        }
        if n < 2 {
            return Err(Error::InsufficientData(format!(
                "{language}: need at least 2 sentences, got {n}"
            )));
        }
        if data.len() != n * d {
            return Err(Error::input(format!(
                "{language}: expected {} values for {n}×{d}, got {}",
                n * d,
                data.len()
            )));
        }
        let mut renormalized_rows = 0;
        for (i, row) in data.chunks_exact_mut(d).enumerate() {
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::input(format!(
                    "{language}: row {i} has a non-finite value"
                )));
            }
            let norm = dot(row, row).sqrt();
            if norm == 0.0 {
                return Err(Error::input(format!(
                    "{language}: row {i} is the zero vector"
                )));
            }
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                renormalized_rows += 1;
            }
            for x in row.iter_mut() {
                *x /= norm;
            }
        }
        if renormalized_rows > 0 {
            warn!("{language}: normalized {renormalized_rows} of {n} rows to unit length");
        }
        Ok(EmbeddingSet {
            language,
            n,
            d,
            data,
            renormalized_rows,
        })
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    /// Number of sentences.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    /// Rows whose input norm was off unit length by more than 1e-6.
    pub fn renormalized_rows(&self) -> usize {
        self.renormalized_rows
    }

    fn column_sum(&self) -> Vec<f64> {
        pairwise_column_sum(&self.data, self.d)
    }
}

/// Mean aligned cosine minus mean misaligned cosine.
pub fn cosine_gap(source: &EmbeddingSet, target: &EmbeddingSet) -> Result<f64> {
    check_aligned(source, target)?;
    let n = source.n;
    if n < 2 {
        return Err(Error::InsufficientData(
            "misaligned mean needs at least 2 sentences".into(),
        ));
    }
    let aligned: Vec<f64> = source
        .rows()
        .zip(target.rows())
        .map(|(s, t)| dot(s, t))
        .collect();
    Ok(gap_from_parts(
        &aligned,
        &source.column_sum(),
        &target.column_sum(),
        n,
    ))
}

fn gap_from_parts(aligned: &[f64], source_sum: &[f64], target_sum: &[f64], n: usize) -> f64 {
    let aligned_sum = pairwise_sum(aligned);
    let all_pairs = dot(source_sum, target_sum);
    let nf = n as f64;
    let aligned_mean = aligned_sum / nf;
    let misaligned_mean = (all_pairs - aligned_sum) / (nf * nf - nf);
    aligned_mean - misaligned_mean
}

fn check_aligned(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<()> {
    if a.n != b.n {
        return Err(Error::Alignment(format!(
            "`{}` has {} sentences but `{}` has {}",
            a.language, a.n, b.language, b.n
        )));
    }
    if a.d != b.d {
        return Err(Error::Alignment(format!(
            "`{}` has dimension {} but `{}` has {}",
            a.language, a.d, b.language, b.d
        )));
    }
    Ok(())
}

/// Symmetric table of cosine-gap scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    languages: Vec<String>,
    scores: Vec<f64>,
    provenance: String,
}

impl SimilarityMatrix {
    /// Wraps a square score table. Asymmetric input is symmetrized by
    /// averaging `(s,t)` and `(t,s)`.
    pub fn new(
        languages: Vec<String>,
        mut scores: Vec<f64>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let k = languages.len();
        if scores.len() != k * k {
            return Err(Error::input(format!(
                "similarity matrix over {k} languages needs {} scores, got {}",
                k * k,
                scores.len()
            )));
        }
        check_unique(&languages)?;
        if let Some(pos) = scores.iter().position(|x| !x.is_finite()) {
            return Err(Error::input(format!(
                "non-finite similarity for ({}, {})",
                languages[pos / k],
                languages[pos % k]
            )));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let m = (scores[i * k + j] + scores[j * k + i]) / 2.0;
                scores[i * k + j] = m;
                scores[j * k + i] = m;
            }
        }
        Ok(SimilarityMatrix {
            languages,
            scores,
            provenance: provenance.into(),
        })
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn index_of(&self, language: &str) -> Option<usize> {
        self.languages.iter().position(|l| l == language)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.index_of(a)?;
        let j = self.index_of(b)?;
        Some(self.scores[i * self.languages.len() + j])
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.languages.len() + j]
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    /// Sub-matrix over the listed languages that are present, in the given order.
    pub fn restrict<S: AsRef<str>>(&self, languages: &[S]) -> SimilarityMatrix {
        let idx: Vec<usize> = languages
            .iter()
            .filter_map(|l| self.index_of(l.as_ref()))
            .collect();
        let scores = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.at(i, j))
            .collect();
        SimilarityMatrix {
            languages: idx.iter().map(|&i| self.languages[i].clone()).collect(),
            scores,
            provenance: self.provenance.clone(),
        }
    }

    /// Scores multiplied by a constant.
    pub fn scaled(&self, factor: f64) -> SimilarityMatrix {
        SimilarityMatrix {
            languages: self.languages.clone(),
            scores: self.scores.iter().map(|x| x * factor).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

fn check_unique(languages: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in languages {
        if !seen.insert(l.as_str()) {
            return Err(Error::input(format!("duplicate language code `{l}`")));
        }
    }
    Ok(())
}

/// Cosine-gap matrix over every language in `sets`. Off-diagonal entries are
/// the mean of the two directed gaps; the diagonal is each set's self-gap.
pub fn build_similarity_matrix(
    sets: &[EmbeddingSet],
    provenance: impl Into<String>,
) -> Result<SimilarityMatrix> {
    if sets.len() < 2 {
        return Err(Error::input(
            "similarity matrix needs at least 2 embedding sets",
        ));
    }
    let languages: Vec<String> = sets.iter().map(|s| s.language.clone()).collect();
    check_unique(&languages)?;
    for s in &sets[1..] {
        check_aligned(&sets[0], s)?;
    }
    let n = sets[0].n;
    let sums: Vec<Vec<f64>> = sets.iter().map(EmbeddingSet::column_sum).collect();
    let k = sets.len();
    let mut scores = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let aligned: Vec<f64> = sets[i]
                .rows()
                .zip(sets[j].rows())
                .map(|(a, b)| dot(a, b))
                .collect();
            // The aligned dot products are symmetric, so both directed gaps
            // come from the same parts; averaging keeps the definition explicit.
            let forward = gap_from_parts(&aligned, &sums[i], &sums[j], n);
            let backward = gap_from_parts(&aligned, &sums[j], &sums[i], n);
            let v = if i == j {
                forward
            } else {
                (forward + backward) / 2.0
            };
            scores[i * k + j] = v;
            scores[j * k + i] = v;
        }
    }
    SimilarityMatrix::new(languages, scores, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(lang: &str, rows: &[&[f64]]) -> EmbeddingSet {
        EmbeddingSet::from_rows(lang, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identical_vectors_give_zero_gap() {
        let rows: Vec<&[f64]> = vec![&[0.6, 0.8]; 5];
        let a = set("aaa", &rows);
        let b = set("bbb", &rows);
        assert!(cosine_gap(&a, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn orthonormal_pair_gives_unit_gap() {
        let a = set("aaa", &[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = set("bbb", &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!((cosine_gap(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rows_are_normalized_on_load() {
        let a = set("aaa", &[&[3.0, 4.0], &[0.0, 2.0]]);
        for row in a.rows() {
            assert!((dot(row, row) - 1.0).abs() < 1e-12);
        }
        assert_eq!(a.renormalized_rows(), 2);
    }

    #[test]
    fn mismatched_sizes_are_alignment_errors() {
        let a = set("aaa", &[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = set("bbb", &[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(cosine_gap(&a, &b), Err(Error::Alignment(_))));
        let c = set("ccc", &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!(matches!(cosine_gap(&a, &c), Err(Error::Alignment(_))));
    }

    #[test]
    fn single_sentence_is_insufficient() {
        let r = EmbeddingSet::from_rows("aaa", vec![vec![1.0, 0.0]]);
        assert!(matches!(r, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn zero_row_rejected() {
        let r = EmbeddingSet::from_rows("aaa", vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn duplicate_language_rejected() {
        let a = set("aaa", &[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = build_similarity_matrix(&[a.clone(), a], "");
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn identical_sets_score_like_self() {
        let rows: &[&[f64]] = &[&[1.0, 0.2], &[0.1, 1.0], &[0.5, -0.5]];
        let m = build_similarity_matrix(&[set("aaa", rows), set("bbb", rows)], "test").unwrap();
        assert_eq!(m.get("aaa", "bbb"), m.get("aaa", "aaa"));
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-10);
    }

    #[test]
    fn restrict_keeps_order_and_drops_unknown() {
        let m = SimilarityMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![1.0, 0.2, 0.3, 0.2, 1.0, 0.4, 0.3, 0.4, 1.0],
            "",
        )
        .unwrap();
        let r = m.restrict(&["c", "zzz", "a"]);
        assert_eq!(r.languages(), &["c".to_string(), "a".to_string()]);
        assert_eq!(r.get("c", "a"), Some(0.3));
    }
}
