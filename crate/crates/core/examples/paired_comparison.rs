//! Paired comparison of two strategies over seeds, with a printed table.

use srcalloc::stats::{compare, render_table, win_rates, RunResult, TieMode};

fn main() -> srcalloc::Result<()> {
    let single = [0.52, 0.55, 0.49, 0.58, 0.51, 0.54, 0.50, 0.57, 0.53];
    let multi = [0.56, 0.60, 0.52, 0.60, 0.57, 0.58, 0.53, 0.62, 0.57];
    let mut results = Vec::new();
    for (seed, (&a, &b)) in single.iter().zip(&multi).enumerate() {
        for (strategy, metric, utilization) in
            [("all-from-best", a, 0.362), ("top-k-proportional", b, 1.0)]
        {
            results.push(RunResult {
                task: "NER".into(),
                target: "hau".into(),
                budget_level: "L".into(),
                model_tag: "encoder".into(),
                strategy: strategy.into(),
                seed: seed as u64,
                metric,
                utilization,
            });
        }
    }

    let rows = compare(&results, "all-from-best", "top-k-proportional", 4, None)?;
    print!("{}", render_table(&rows));
    for (s, w) in win_rates(&results, TieMode::Split)? {
        println!("{s} wins {:.0}%", 100.0 * w);
    }
    Ok(())
}
