//! Joint selection and allocation by repeated best-marginal batches.

use super::{AllocationVector, Entry, ReturnsCurve, SourcePool, StrategyConfig};
use crate::error::{Error, Result};

/// Marginal value of the next sentence for a source that already holds `held`.
fn marginal(similarity: f64, held: u64, curve: ReturnsCurve, scale: f64) -> f64 {
    match curve {
        ReturnsCurve::Hyperbolic => similarity / (1.0 + held as f64 / scale),
        ReturnsCurve::Exponential => similarity * libm::exp(-(held as f64) / scale),
    }
}

/// Assigns the budget one batch at a time to the source with the highest
/// marginal value among those with unused availability.
///
/// Batches are truncated to the remaining budget and the source's spare
/// availability. There is no limit on the number of sources. Entries are
/// listed in the order sources first received data.
pub fn greedy_marginal_allocate(
    pool: &SourcePool,
    cfg: &StrategyConfig,
) -> Result<AllocationVector> {
    cfg.validate()?;
    if cfg.budget < cfg.batch_size {
        return Err(Error::input(format!(
            "--budget ({}) must be at least --batch-size ({})",
            cfg.budget, cfg.batch_size
        )));
    }
    if pool.total_availability() == 0 {
        return Err(Error::input(format!(
            "no source for `{}` has any available data",
            pool.target()
        )));
    }

    let cands = pool.candidates();
    let mut held = vec![0u64; cands.len()];
    let mut first_seen: Vec<usize> = Vec::new();
    let mut remaining = cfg.budget;

    while remaining > 0 {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in cands.iter().enumerate() {
            if held[i] >= c.availability {
                continue;
            }
            let m = marginal(c.similarity, held[i], cfg.returns, cfg.saturation_c);
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((i, m));
            }
        }
        let Some((i, _)) = best else { break };
        let step = cfg
            .batch_size
            .min(remaining)
            .min(cands[i].availability - held[i]);
        if held[i] == 0 {
            first_seen.push(i);
        }
        held[i] += step;
        remaining -= step;
    }

    let entries = first_seen
        .into_iter()
        .map(|i| Entry::new(cands[i].language.clone(), held[i]))
        .collect();
    Ok(AllocationVector::new(pool.target(), entries, cfg.clone()))
}
