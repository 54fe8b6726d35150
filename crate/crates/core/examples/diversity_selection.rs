//! How the redundancy penalty changes which sources are picked.

use srcalloc::allocation::{diversity_aware_select, top_k_select, Candidate, SourcePool};
use srcalloc::similarity::SimilarityMatrix;

fn main() -> srcalloc::Result<()> {
    let langs: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    // a and b are near-duplicates of each other; c is unlike both.
    let inter = SimilarityMatrix::new(
        langs,
        vec![1.0, 0.95, 0.1, 0.95, 1.0, 0.2, 0.1, 0.2, 1.0],
        "example",
    )?;
    let pool = SourcePool::new(
        "t",
        vec![
            Candidate::new("a", 1000, 0.9),
            Candidate::new("b", 1000, 0.85),
            Candidate::new("c", 1000, 0.5),
        ],
        Some(inter),
    )?;

    println!("top-2: {:?}", top_k_select(&pool, 2)?);
    for alpha in [0.0, 0.25, 0.5, 1.0] {
        println!(
            "alpha {alpha:<4}: {:?}",
            diversity_aware_select(&pool, 2, alpha)?
        );
    }
    Ok(())
}
