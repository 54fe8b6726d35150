//! Runs all strategies against a synthetic utility model where the most
//! similar source is scarce, then ranks them.

use std::collections::BTreeMap;

use srcalloc::allocation::{Strategy, StrategyConfig};
use srcalloc::similarity::SimilarityMatrix;
use srcalloc::simulator::{config_grid, tournament, ModelCase, PoolCase, UtilityModel};
use srcalloc::stats::{mean_metric, utilization_summary};

fn main() -> srcalloc::Result<()> {
    let sims: BTreeMap<String, f64> = [
        ("swa", 0.30),
        ("kin", 0.27),
        ("ibo", 0.25),
        ("zul", 0.24),
        ("yor", 0.17),
        ("fon", 0.07),
    ]
    .into_iter()
    .map(|(l, s)| (l.to_string(), s))
    .collect();
    let availability: BTreeMap<String, u64> = sims
        .keys()
        .map(|l| (l.clone(), if l == "swa" { 1810 } else { 6000 }))
        .collect();

    // Bantu sources overlap with each other more than with the rest.
    let langs: Vec<String> = sims.keys().cloned().collect();
    let bantu = ["kin", "swa", "zul"];
    let mut scores = Vec::new();
    for a in &langs {
        for b in &langs {
            scores.push(
                match (
                    a == b,
                    bantu.contains(&a.as_str()) && bantu.contains(&b.as_str()),
                ) {
                    (true, _) => 1.0,
                    (false, true) => 0.6,
                    (false, false) => 0.15,
                },
            );
        }
    }
    let inter = SimilarityMatrix::new(langs, scores, "example")?;

    let models = vec![ModelCase {
        tag: "surrogate".into(),
        model: UtilityModel::new("hau", sims)
            .with_inter_source(inter)
            .with_noise(0.01, 7),
    }];
    let pools = vec![PoolCase {
        label: "sentiment".into(),
        availability,
    }];
    let strategies: Vec<Strategy> = Strategy::ALL.to_vec();
    let cfgs = config_grid(
        &StrategyConfig::new(Strategy::AllFromBest, 1).with_k(3),
        &strategies,
        &[5000],
        &[1, 2, 3, 4, 5],
    );
    let results = tournament(&models, &pools, &cfgs)?;

    let util = utilization_summary(&results);
    let mut ranked: Vec<(String, f64)> = mean_metric(&results).into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (s, m) in ranked {
        println!("{s:<20} score {m:.3}  utilization {:.2}", util[&s].mean);
    }
    Ok(())
}
