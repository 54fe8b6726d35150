//! Runs every strategy on one pool and compares how much of the budget each
//! one manages to spend.

use srcalloc::allocation::{allocate, Candidate, SourcePool, Strategy, StrategyConfig};
use srcalloc::similarity::SimilarityMatrix;

fn main() -> srcalloc::Result<()> {
    let langs = ["ibo", "kin", "orm", "pcm", "swa", "yor"];
    #[rustfmt::skip]
    let inter = vec![
        1.0, 0.3, 0.1, 0.2, 0.2, 0.5,
        0.3, 1.0, 0.1, 0.1, 0.6, 0.2,
        0.1, 0.1, 1.0, 0.0, 0.1, 0.1,
        0.2, 0.1, 0.0, 1.0, 0.1, 0.2,
        0.2, 0.6, 0.1, 0.1, 1.0, 0.2,
        0.5, 0.2, 0.1, 0.2, 0.2, 1.0,
    ];
    let matrix = SimilarityMatrix::new(
        langs.iter().map(|s| s.to_string()).collect(),
        inter,
        "example",
    )?;
    let pool = SourcePool::new(
        "hau",
        vec![
            Candidate::new("ibo", 10193, 0.19),
            Candidate::new("kin", 3303, 0.21),
            Candidate::new("orm", 1683, 0.11),
            Candidate::new("pcm", 5122, 0.0),
            Candidate::new("swa", 1810, 0.24),
            Candidate::new("yor", 8523, 0.18),
        ],
        Some(matrix),
    )?;

    for budget in [5_000, 10_000] {
        println!("budget {budget}");
        for strategy in Strategy::ALL {
            let cfg = StrategyConfig::new(strategy, budget)
                .with_k(3)
                .with_seed(42);
            let a = allocate(&pool, &cfg)?;
            let parts: Vec<String> = a
                .entries
                .iter()
                .map(|e| format!("{}={}", e.language, e.amount))
                .collect();
            println!(
                "  {:<20} used {:>5} ({:>5.1}%)  {}",
                strategy.name(),
                a.used,
                100.0 * a.utilization,
                parts.join(" ")
            );
        }
    }
    Ok(())
}
