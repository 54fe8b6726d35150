//! Integer apportionment and the cap-and-redistribute fixed point.

use std::cmp::Ordering;

use super::{Candidate, Entry};
use crate::error::{Error, Result};

/// Largest-remainder (Hamilton) apportionment of `total` by `weights`.
///
/// `priority[i]` is the tie-break rank of slot `i` (lower wins) when two
/// fractional remainders are equal. Weights must be non-negative with a
/// positive sum. The result sums to `total` exactly.
pub fn apportion(total: u64, weights: &[f64], priority: &[usize]) -> Vec<u64> {
    debug_assert_eq!(weights.len(), priority.len());
    let sum: f64 = weights.iter().sum();
    assert!(sum > 0.0, "apportion needs a positive weight sum");
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut amounts: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let rem: Vec<f64> = quotas
        .iter()
        .zip(&amounts)
        .map(|(q, a)| q - *a as f64)
        .collect();

    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        rem[b]
            .partial_cmp(&rem[a])
            .unwrap_or(Ordering::Equal)
            .then(priority[a].cmp(&priority[b]))
    });

    let assigned: u64 = amounts.iter().sum();
    match assigned.cmp(&total) {
        Ordering::Less => {
            let short = (total - assigned) as usize;
            for &i in order.iter().cycle().take(short) {
                amounts[i] += 1;
            }
        }
        // Floating-point quotas can land a hair above an integer; take the
        // excess back from the smallest remainders.
        Ordering::Greater => {
            let mut excess = assigned - total;
            for &i in order.iter().rev() {
                if excess == 0 {
                    break;
                }
                if amounts[i] > 0 {
                    amounts[i] -= 1;
                    excess -= 1;
                }
            }
        }
        Ordering::Equal => {}
    }
    amounts
}

/// How surplus is shared among uncapped sources during redistribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightBasis {
    /// Proportional to similarity; ties by higher similarity, then language code.
    Similarity,
    /// Equal shares; ties by the order the sources were given in.
    Uniform,
}

fn similarity_priority(sources: &[&Candidate]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sources.len()).collect();
    order.sort_by(|&a, &b| {
        sources[b]
            .similarity
            .partial_cmp(&sources[a].similarity)
            .unwrap_or(Ordering::Equal)
            .then_with(|| sources[a].language.cmp(&sources[b].language))
    });
    let mut rank = vec![0; sources.len()];
    for (r, i) in order.into_iter().enumerate() {
        rank[i] = r;
    }
    rank
}

fn basis_weights(sources: &[&Candidate], basis: WeightBasis) -> (Vec<f64>, Vec<usize>) {
    match basis {
        WeightBasis::Similarity => (
            sources.iter().map(|c| c.similarity).collect(),
            similarity_priority(sources),
        ),
        WeightBasis::Uniform => (vec![1.0; sources.len()], (0..sources.len()).collect()),
    }
}

/// Caps each amount at its source's availability and hands the surplus to
/// the sources still below their cap.
///
/// Each round fixes every source whose amount exceeds its availability at
/// that availability, then re-apportions the remaining budget over the
/// unfixed sources by `basis`. When every unfixed source has zero weight the
/// remaining budget is split evenly among them instead. The loop stops when
/// no amount exceeds its cap or every source is fixed, so it runs at most
/// once per source. Input with no amount over its cap is returned unchanged.
pub fn cap_and_redistribute(
    raw: &[Entry],
    sources: &[&Candidate],
    basis: WeightBasis,
) -> Vec<Entry> {
    debug_assert_eq!(raw.len(), sources.len());
    let total: u64 = raw.iter().map(|e| e.amount).sum();
    let caps: Vec<u64> = sources.iter().map(|c| c.availability).collect();
    let (weights, priority) = basis_weights(sources, basis);
    let mut amounts: Vec<u64> = raw.iter().map(|e| e.amount).collect();
    let mut fixed = vec![false; raw.len()];

    loop {
        let mut newly_capped = false;
        for i in 0..amounts.len() {
            if !fixed[i] && amounts[i] > caps[i] {
                amounts[i] = caps[i];
                fixed[i] = true;
                newly_capped = true;
            }
        }
        if !newly_capped {
            break;
        }
        let free: Vec<usize> = (0..amounts.len()).filter(|&i| !fixed[i]).collect();
        if free.is_empty() {
            break;
        }
        let residual = total
            - fixed
                .iter()
                .zip(&amounts)
                .filter(|(f, _)| **f)
                .map(|(_, a)| a)
                .sum::<u64>();
        let mut free_weights: Vec<f64> = free.iter().map(|&i| weights[i]).collect();
        if free_weights.iter().all(|&w| w <= 0.0) {
            free_weights.iter_mut().for_each(|w| *w = 1.0);
        }
        let free_priority: Vec<usize> = free.iter().map(|&i| priority[i]).collect();
        let shares = apportion(residual, &free_weights, &free_priority);
        for (&i, s) in free.iter().zip(shares) {
            amounts[i] = s;
        }
    }

    sources
        .iter()
        .zip(amounts)
        .map(|(c, a)| Entry::new(c.language.clone(), a))
        .collect()
}

/// Splits `budget` proportionally to similarity, rounds by largest
/// remainder, then caps and redistributes.
pub fn proportional_allocate(selected: &[&Candidate], budget: u64) -> Result<Vec<Entry>> {
    if selected.is_empty() {
        return Err(Error::input(
            "proportional allocation needs at least one source",
        ));
    }
    if let Some(c) = selected
        .iter()
        .find(|c| !c.similarity.is_finite() || c.similarity < 0.0)
    {
        return Err(Error::input(format!(
            "similarity of `{}` must be non-negative, got {}",
            c.language, c.similarity
        )));
    }
    if selected.iter().all(|c| c.similarity == 0.0) {
        let names: Vec<&str> = selected.iter().map(|c| c.language.as_str()).collect();
        return Err(Error::DegenerateWeights(format!(
            "all selected sources have zero similarity ({}); use uniform allocation instead",
            names.join(", ")
        )));
    }
    let (weights, priority) = basis_weights(selected, WeightBasis::Similarity);
    let raw: Vec<Entry> = selected
        .iter()
        .zip(apportion(budget, &weights, &priority))
        .map(|(c, a)| Entry::new(c.language.clone(), a))
        .collect();
    Ok(cap_and_redistribute(
        &raw,
        selected,
        WeightBasis::Similarity,
    ))
}

/// Equal split in the given order: `⌊budget/k⌋` each with the remainder
/// going one sentence at a time to the first sources, then cap and
/// redistribute.
pub fn uniform_allocate(selected: &[&Candidate], budget: u64) -> Result<Vec<Entry>> {
    if selected.is_empty() {
        return Err(Error::input("uniform allocation needs at least one source"));
    }
    let k = selected.len() as u64;
    let base = budget / k;
    let extra = (budget % k) as usize;
    let raw: Vec<Entry> = selected
        .iter()
        .enumerate()
        .map(|(i, c)| Entry::new(c.language.clone(), base + u64::from(i < extra)))
        .collect();
    Ok(cap_and_redistribute(&raw, selected, WeightBasis::Uniform))
}
