mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use srcalloc::allocation::{allocate, Entry, Strategy, StrategyConfig};
use srcalloc::io::results_to_csv;
use srcalloc::simulator::{
    brute_force_best, config_grid, evaluate, evaluate_entries, tournament, ModelCase, PoolCase,
    UtilityModel,
};
use srcalloc::Error;

use common::{lang, random_matrix};

fn random_model(rng: &mut impl Rng, n: usize) -> UtilityModel {
    let langs: Vec<String> = (0..n).map(lang).collect();
    let sims: BTreeMap<String, f64> = langs
        .iter()
        .map(|l| (l.clone(), rng.random_range(0.01..0.4)))
        .collect();
    UtilityModel::new("tgt", sims)
        .with_inter_source(random_matrix(rng, &langs))
        .with_tau(rng.random_range(1.0..15.0))
        .with_beta(rng.random_range(0.0..0.5))
}

fn random_availability(
    rng: &mut impl Rng,
    model: &UtilityModel,
    max: u64,
) -> BTreeMap<String, u64> {
    model
        .sim_to_target
        .keys()
        .map(|l| (l.clone(), rng.random_range(0..=max)))
        .collect()
}

#[test]
fn score_rises_with_data_when_redundancy_is_off() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(21);
    for _ in 0..200 {
        let m = random_model(&mut rng, 3).with_beta(0.0);
        let mut amounts: Vec<u64> = (0..3).map(|_| rng.random_range(0..50)).collect();
        let entries = |xs: &[u64]| -> Vec<Entry> {
            xs.iter()
                .enumerate()
                .map(|(i, &x)| Entry::new(lang(i), x))
                .collect()
        };
        let base = evaluate_entries(&m, &entries(&amounts), 200).unwrap();
        let i = rng.random_range(0..3);
        amounts[i] += 1;
        let up1 = evaluate_entries(&m, &entries(&amounts), 200).unwrap();
        amounts[i] += 1;
        let up2 = evaluate_entries(&m, &entries(&amounts), 200).unwrap();
        assert!(up1 >= base);
        if up2 < 1.0 {
            // Diminishing returns: second step gains no more than the first.
            assert!(up2 - up1 <= up1 - base + 1e-15);
        }
    }
}

#[test]
fn single_source_score_matches_closed_form() {
    let m = UtilityModel::new("t", [("a".to_string(), 0.6)].into()).with_tau(2000.0);
    let s = evaluate_entries(&m, &[Entry::new("a", 1810)], 5000).unwrap();
    assert!((s - 0.6 * (1.0 - (-1810.0f64 / 2000.0).exp())).abs() < 1e-15);
}

#[test]
fn noise_is_reproducible_and_seed_dependent() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(22);
    let m = random_model(&mut rng, 5).with_noise(0.02, 9);
    let pool = m.pool(&random_availability(&mut rng, &m, 500)).unwrap();
    let cfg = StrategyConfig::new(Strategy::RandomK, 800).with_k(3);
    let a1 = allocate(&pool, &cfg.clone().with_seed(1)).unwrap();
    let a2 = allocate(&pool, &cfg.with_seed(2)).unwrap();
    assert_eq!(evaluate(&m, &a1).unwrap(), evaluate(&m, &a1).unwrap());
    assert_ne!(evaluate(&m, &a1).unwrap(), evaluate(&m, &a2).unwrap());
}

#[test]
fn greedy_matches_brute_force_on_toy_models() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(23);
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let m = random_model(&mut rng, n).with_beta(0.0);
        let pool = m.pool(&random_availability(&mut rng, &m, 12)).unwrap();
        if pool.total_availability() == 0 {
            continue;
        }
        let budget = rng.random_range(1..=20);
        let greedy = allocate(&pool, &m.matching_greedy(budget)).unwrap();
        let oracle = brute_force_best(&m, &pool, budget, 1).unwrap();
        let g = evaluate_entries(&m, &greedy.entries, budget).unwrap();
        assert!(
            (g - oracle.score).abs() < 1e-9,
            "greedy {g} oracle {}",
            oracle.score
        );
        assert_eq!(greedy.used, oracle.used);
    }
}

#[test]
fn oracle_dominates_every_strategy() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(24);
    for trial in 0..100 {
        let m = random_model(&mut rng, 3);
        let pool = m.pool(&random_availability(&mut rng, &m, 40)).unwrap();
        if pool.total_availability() == 0 {
            continue;
        }
        let budget = rng.random_range(1..=60);
        let oracle = brute_force_best(&m, &pool, budget, 1).unwrap();
        for strategy in Strategy::ALL {
            let cfg = StrategyConfig::new(strategy, budget)
                .with_k(2)
                .with_seed(trial)
                .with_batch_size(1);
            let a = allocate(&pool, &cfg).unwrap();
            if a.used != oracle.used {
                continue;
            }
            let s = evaluate_entries(&m, &a.entries, budget).unwrap();
            assert!(
                s <= oracle.score + 1e-12,
                "{strategy}: {s} > {}",
                oracle.score
            );
        }
    }
}

#[test]
fn oracle_breaks_ties_toward_smallest_vector() {
    let m = UtilityModel::new("t", [("a".into(), 0.3), ("b".into(), 0.3)].into()).with_beta(0.0);
    let pool = m.pool(&[("a".into(), 5), ("b".into(), 5)].into()).unwrap();
    let best = brute_force_best(&m, &pool, 5, 1).unwrap();
    assert_eq!(best.entries, [Entry::new("a", 2), Entry::new("b", 3)]);
}

#[test]
fn oversized_grid_is_refused() {
    let sims: BTreeMap<String, f64> = (0..8).map(|i| (lang(i), 0.2)).collect();
    let avail: BTreeMap<String, u64> = sims.keys().map(|l| (l.clone(), 10_000)).collect();
    let m = UtilityModel::new("t", sims);
    let pool = m.pool(&avail).unwrap();
    assert!(matches!(
        brute_force_best(&m, &pool, 10_000, 1),
        Err(Error::Scale(_))
    ));
}

fn tournament_fixture() -> (Vec<ModelCase>, Vec<PoolCase>, Vec<StrategyConfig>) {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(25);
    let models: Vec<ModelCase> = ["serengeti", "afroxlmr"]
        .iter()
        .enumerate()
        .map(|(i, tag)| ModelCase {
            tag: tag.to_string(),
            model: random_model(&mut rng, 8).with_noise(0.01, i as u64),
        })
        .collect();
    let pools: Vec<PoolCase> = ["ner", "pos", "sentiment"]
        .iter()
        .map(|label| PoolCase {
            label: label.to_string(),
            availability: random_availability(&mut rng, &models[0].model, 3000),
        })
        .collect();
    let strategies = [
        Strategy::AllFromBest,
        Strategy::TopKProportional,
        Strategy::RandomK,
        Strategy::DiversityAware,
    ];
    let cfgs = config_grid(
        &StrategyConfig::new(Strategy::AllFromBest, 1),
        &strategies,
        &[5000],
        &[1, 2, 3],
    );
    (models, pools, cfgs)
}

#[test]
fn tournament_covers_the_full_grid() {
    let (models, pools, cfgs) = tournament_fixture();
    assert_eq!(cfgs.len(), 12);
    let results = tournament(&models, &pools, &cfgs).unwrap();
    assert_eq!(results.len(), 72);
    let again = tournament(&models, &pools, &cfgs).unwrap();
    assert_eq!(results_to_csv(&results), results_to_csv(&again));
    for w in results.windows(2) {
        let key = |r: &srcalloc::stats::RunResult| {
            (
                r.task.clone(),
                r.target.clone(),
                r.budget_level.clone(),
                r.model_tag.clone(),
                r.strategy.clone(),
                r.seed,
            )
        };
        assert!(key(&w[0]) < key(&w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn entry_order_is_irrelevant(seed in any::<u64>(), amounts in prop::collection::vec(0u64..5000, 5)) {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let m = random_model(&mut rng, 5).with_tau(1500.0);
        let entries: Vec<Entry> = amounts.iter().enumerate().map(|(i, &a)| Entry::new(lang(i), a)).collect();
        let mut reversed = entries.clone();
        reversed.reverse();
        prop_assert_eq!(
            evaluate_entries(&m, &entries, 10_000).unwrap(),
            evaluate_entries(&m, &reversed, 10_000).unwrap()
        );
    }

    #[test]
    fn scores_stay_in_unit_interval(seed in any::<u64>(), amounts in prop::collection::vec(0u64..20_000, 4)) {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let m = random_model(&mut rng, 4).with_beta(3.0).with_noise(0.5, seed);
        let entries: Vec<Entry> = amounts.iter().enumerate().map(|(i, &a)| Entry::new(lang(i), a)).collect();
        let s = evaluate_entries(&m, &entries, 20_000).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
    }
}
