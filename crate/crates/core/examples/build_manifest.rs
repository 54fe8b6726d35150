//! Turns an allocation into a shuffled train/validation manifest.

use srcalloc::allocation::{allocate, Candidate, SourcePool, Strategy, StrategyConfig};
use srcalloc::io::manifest_to_jsonl;
use srcalloc::manifest::{build_manifest, DatasetIndex, Split, Task};

fn main() -> srcalloc::Result<()> {
    let sizes = [("ibo", 400), ("kin", 250), ("swa", 120), ("yor", 300)];
    let pool = SourcePool::new(
        "hau",
        sizes
            .iter()
            .zip([0.19, 0.21, 0.24, 0.18])
            .map(|(&(l, n), s)| Candidate::new(l, n, s))
            .collect(),
        None,
    )?;
    let cfg = StrategyConfig::new(Strategy::TopKProportional, 600).with_k(3);
    let allocation = allocate(&pool, &cfg)?;

    let indexes: Vec<DatasetIndex> = sizes
        .iter()
        .map(|&(l, n)| {
            DatasetIndex::new(
                l,
                (0..n).map(|i| format!("{l}-train-{i}")).collect(),
                Task::Ner,
            )
        })
        .collect::<srcalloc::Result<_>>()?;
    let manifest = build_manifest(&allocation, &indexes, 42, 0.1)?;

    for e in &allocation.entries {
        println!(
            "{}: {} records",
            e.language,
            manifest.count_for(&e.language)
        );
    }
    println!(
        "train {}, validation {}",
        manifest.count(Split::Train),
        manifest.count(Split::Validation)
    );
    for line in manifest_to_jsonl(&manifest).lines().take(3) {
        println!("{line}");
    }
    Ok(())
}
