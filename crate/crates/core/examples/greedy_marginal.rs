//! Greedy allocation with diminishing returns over a twenty-source pool.

use srcalloc::allocation::{
    allocate, Candidate, ReturnsCurve, SourcePool, Strategy, StrategyConfig,
};

fn main() -> srcalloc::Result<()> {
    let sims = [
        0.31, 0.28, 0.26, 0.24, 0.22, 0.215, 0.21, 0.205, 0.2, 0.19, 0.18, 0.17, 0.16, 0.15, 0.145,
        0.14, 0.13, 0.125, 0.12, 0.11,
    ];
    let candidates = sims
        .iter()
        .enumerate()
        .map(|(i, &s)| Candidate::new(format!("s{i:02}"), 3000 + 250 * (i as u64 % 7), s))
        .collect();
    let pool = SourcePool::new("t", candidates, None)?;

    for returns in [ReturnsCurve::Hyperbolic, ReturnsCurve::Exponential] {
        for budget in [10_000, 15_000] {
            let cfg = StrategyConfig::new(Strategy::GreedyMarginal, budget)
                .with_saturation(1000.0, returns);
            let a = allocate(&pool, &cfg)?;
            println!(
                "{returns:?} B={budget}: {} active sources, largest share {}",
                a.active_sources(),
                a.entries.iter().map(|e| e.amount).max().unwrap_or(0)
            );
        }
    }
    Ok(())
}
