//! Source selection rules.

use std::cmp::Ordering;

use super::{AllocationVector, Candidate, Entry, SourcePool, StrategyConfig};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Orders by descending similarity, then ascending language code.
fn by_similarity(a: &Candidate, b: &Candidate) -> Ordering {
    b.similarity
        .partial_cmp(&a.similarity)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.language.cmp(&b.language))
}

fn check_k(pool: &SourcePool, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::input("--k must be a positive integer"));
    }
    if k > pool.len() {
        return Err(Error::input(format!(
            "--k = {k} exceeds the {} candidates in the pool for `{}`",
            pool.len(),
            pool.target()
        )));
    }
    Ok(())
}

/// The most similar candidate. Errors when no candidate has positive similarity.
pub fn best_source(pool: &SourcePool) -> Result<&Candidate> {
    let best = pool
        .candidates()
        .iter()
        .min_by(|a, b| by_similarity(a, b))
        .ok_or_else(|| Error::input("source pool is empty"))?;
    if best.similarity <= 0.0 {
        return Err(Error::DegenerateWeights(format!(
            "no candidate for `{}` has positive similarity",
            pool.target()
        )));
    }
    Ok(best)
}

/// Entire budget to the most similar source, capped at its availability.
/// Nothing is redistributed, so utilization drops below 1 when the best
/// source is short of data.
pub fn all_from_best(pool: &SourcePool, cfg: &StrategyConfig) -> Result<AllocationVector> {
    let best = best_source(pool)?;
    let entries = vec![Entry::new(
        best.language.clone(),
        cfg.budget.min(best.availability),
    )];
    Ok(AllocationVector::new(pool.target(), entries, cfg.clone()))
}

/// The `k` most similar candidates, most similar first.
pub fn top_k_select(pool: &SourcePool, k: usize) -> Result<Vec<String>> {
    check_k(pool, k)?;
    let mut ranked: Vec<&Candidate> = pool.candidates().iter().collect();
    ranked.sort_by(|a, b| by_similarity(a, b));
    Ok(ranked
        .into_iter()
        .take(k)
        .map(|c| c.language.clone())
        .collect())
}

/// `k` distinct candidates drawn uniformly, in draw order. Similarity plays
/// no part, so zero-similarity candidates are as likely as any other.
pub fn random_k_select(pool: &SourcePool, k: usize, seed: u64) -> Result<Vec<String>> {
    check_k(pool, k)?;
    let mut langs: Vec<&str> = pool
        .candidates()
        .iter()
        .map(|c| c.language.as_str())
        .collect();
    let mut rng = Rng::new(seed);
    rng.partial_shuffle(&mut langs, k);
    Ok(langs[..k].iter().map(|l| l.to_string()).collect())
}

/// Greedy redundancy-penalized selection.
///
/// The first pick is the most similar candidate. Each later pick maximizes
/// `sim(s, t) − alpha · max_{c ∈ chosen} sim(s, c)`. Candidates with zero
/// similarity to the target are only considered once every positive one has
/// been taken. Ties go to the smaller language code.
pub fn diversity_aware_select(pool: &SourcePool, k: usize, alpha: f64) -> Result<Vec<String>> {
    if pool.inter_source().is_none() {
        return Err(Error::input(format!(
            "diversity-aware selection for `{}` needs an inter-source similarity matrix",
            pool.target()
        )));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::input(format!("--alpha must be ≥ 0, got {alpha}")));
    }
    check_k(pool, k)?;

    let cands = pool.candidates();
    let first = cands
        .iter()
        .min_by(|a, b| by_similarity(a, b))
        .expect("non-empty pool");
    let mut chosen: Vec<&Candidate> = vec![first];
    // Largest similarity to any chosen source, per candidate.
    let mut redundancy: Vec<f64> = cands
        .iter()
        .map(|c| pool.inter(&c.language, &first.language))
        .collect();
    let mut taken: Vec<bool> = cands.iter().map(|c| c.language == first.language).collect();

    while chosen.len() < k {
        let positive_left = cands
            .iter()
            .zip(&taken)
            .any(|(c, t)| !t && c.similarity > 0.0);
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in cands.iter().enumerate() {
            if taken[i] || (positive_left && c.similarity <= 0.0) {
                continue;
            }
            let score = c.similarity - alpha * redundancy[i];
            // Candidates are sorted by language code, so strict `>` keeps
            // the lexicographically smallest on ties.
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let (pick, _) = best.expect("k ≤ pool size");
        taken[pick] = true;
        let picked = &cands[pick];
        for (i, c) in cands.iter().enumerate() {
            redundancy[i] = redundancy[i].max(pool.inter(&c.language, &picked.language));
        }
        chosen.push(picked);
    }
    Ok(chosen.into_iter().map(|c| c.language.clone()).collect())
}
