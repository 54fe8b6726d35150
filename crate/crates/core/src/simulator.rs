//! Synthetic transfer-performance surrogate for desk-scale strategy comparison.
//!
//! A [`UtilityModel`] scores an allocation as
//!
//! ```text
//! Σ_i sim_i · (1 − exp(−u_i / tau))  −  beta · Σ_{i<j} sim(s_i, s_j) · min(u_i, u_j) / B  +  ε
//! ```
//!
//! clamped to `[0, 1]`, where `u_i` is the number of sentences from source
//! `i`, `B` the budget and `ε ~ N(0, noise_sd)`. The first term gives each
//! source diminishing returns; the second discounts overlapping data from
//! mutually similar sources. The form is a modelling choice for exercising
//! strategies, not a predictor of real scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::allocation::{
    allocate, AllocationVector, Candidate, Entry, ReturnsCurve, SourcePool, Strategy,
    StrategyConfig,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Rng};
use crate::similarity::SimilarityMatrix;
use crate::stats::RunResult;

pub const DEFAULT_TAU: f64 = 2000.0;
pub const DEFAULT_BETA: f64 = 0.1;
/// Upper bound on allocations enumerated by [`brute_force_best`].
pub const MAX_GRID_POINTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityModel {
    pub target: String,
    pub sim_to_target: BTreeMap<String, f64>,
    pub inter_source: Option<SimilarityMatrix>,
    pub tau: f64,
    pub beta: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl UtilityModel {
    pub fn new(target: impl Into<String>, sim_to_target: BTreeMap<String, f64>) -> Self {
        UtilityModel {
            target: target.into(),
            sim_to_target,
            inter_source: None,
            tau: DEFAULT_TAU,
            beta: DEFAULT_BETA,
            noise_sd: 0.0,
            seed: 0,
        }
    }

    pub fn with_inter_source(mut self, m: SimilarityMatrix) -> Self {
        self.inter_source = Some(m);
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_noise(mut self, noise_sd: f64, seed: u64) -> Self {
        self.noise_sd = noise_sd;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::input(format!("tau must be > 0, got {}", self.tau)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::input(format!("beta must be ≥ 0, got {}", self.beta)));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::input(format!(
                "noise_sd must be ≥ 0, got {}",
                self.noise_sd
            )));
        }
        if let Some((l, s)) = self.sim_to_target.iter().find(|(_, s)| !s.is_finite()) {
            return Err(Error::input(format!(
                "similarity of `{l}` is not finite ({s})"
            )));
        }
        Ok(())
    }

    fn inter(&self, a: &str, b: &str) -> f64 {
        self.inter_source
            .as_ref()
            .and_then(|m| m.get(a, b))
            .unwrap_or(0.0)
    }

    /// Source pool with this model's similarities and the given availability.
    /// Every source the model knows must have an availability entry.
    pub fn pool(&self, availability: &BTreeMap<String, u64>) -> Result<SourcePool> {
        let candidates = self
            .sim_to_target
            .iter()
            .filter(|(l, _)| **l != self.target)
            .map(|(l, &s)| {
                let a = availability.get(l).ok_or_else(|| {
                    Error::input(format!("no availability given for source `{l}`"))
                })?;
                Ok(Candidate::new(l.clone(), *a, s.max(0.0)))
            })
            .collect::<Result<Vec<_>>>()?;
        SourcePool::new(self.target.clone(), candidates, self.inter_source.clone())
    }

    /// Greedy-marginal configuration whose per-sentence gain matches this
    /// model's saturation term, with batches of one sentence.
    pub fn matching_greedy(&self, budget: u64) -> StrategyConfig {
        StrategyConfig::new(Strategy::GreedyMarginal, budget)
            .with_batch_size(1)
            .with_saturation(self.tau, ReturnsCurve::Exponential)
    }
}

/// Noise-free score of `entries` under `model` for budget `budget`.
fn score_entries(
    model: &UtilityModel,
    entries: &[Entry],
    budget: u64,
    noise_seed: Option<u64>,
) -> Result<f64> {
    let mut items: Vec<(&str, f64, f64)> = Vec::with_capacity(entries.len());
    for e in entries {
        let sim = model.sim_to_target.get(&e.language).ok_or_else(|| {
            Error::input(format!(
                "`{}` is not a source in the utility model",
                e.language
            ))
        })?;
        items.push((&e.language, *sim, e.amount as f64));
    }
    // Entry order must not affect the result.
    items.sort_by(|a, b| a.0.cmp(b.0));

    let mut gain = 0.0;
    for &(_, sim, u) in &items {
        gain += sim * -libm::expm1(-u / model.tau);
    }
    let mut redundancy = 0.0;
    if model.beta > 0.0 && budget > 0 {
        for i in 0..items.len() {
            for j in (i + 1)..items.len() {
                let overlap = items[i].2.min(items[j].2);
                if overlap > 0.0 {
                    redundancy += model.inter(items[i].0, items[j].0) * overlap / budget as f64;
                }
            }
        }
    }
    let mut score = gain - model.beta * redundancy;
    if let Some(seed) = noise_seed {
        if model.noise_sd > 0.0 {
            score += model.noise_sd * Rng::new(seed).standard_normal();
        }
    }
    Ok(score.clamp(0.0, 1.0))
}

/// Surrogate score of an allocation, in `[0, 1]`.
///
/// Noise is seeded from the model seed, the strategy and the allocation's
/// seed, so the same run always gets the same draw.
pub fn evaluate(model: &UtilityModel, allocation: &AllocationVector) -> Result<f64> {
    model.validate()?;
    let cfg = &allocation.config;
    let noise_seed = derive_seed(
        derive_seed(model.seed, cfg.strategy.name().as_bytes()),
        &cfg.seed.to_le_bytes(),
    );
    score_entries(
        model,
        &allocation.entries,
        allocation.budget,
        Some(noise_seed),
    )
}

/// Noise-free score of arbitrary entries.
pub fn evaluate_entries(model: &UtilityModel, entries: &[Entry], budget: u64) -> Result<f64> {
    model.validate()?;
    score_entries(model, entries, budget, None)
}

/// Best allocation found by exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleAllocation {
    /// One entry per pool candidate, in pool order.
    pub entries: Vec<Entry>,
    pub budget: u64,
    pub used: u64,
    pub score: f64,
}

/// Counts vectors with `0 ≤ x_i ≤ caps_i` summing to `total`, saturating at `limit + 1`.
fn count_compositions(caps: &[u64], total: u64, limit: u64) -> u64 {
    let t = total as usize;
    let mut ways = vec![0u64; t + 1];
    ways[0] = 1;
    for &cap in caps {
        // next[s] = Σ_{x=0}^{min(cap, s)} ways[s − x], via prefix sums.
        let mut prefix = vec![0u64; t + 2];
        for s in 0..=t {
            prefix[s + 1] = prefix[s].saturating_add(ways[s]);
        }
        let cap = cap.min(total) as usize;
        ways = (0..=t)
            .map(|s| {
                let lo = s.saturating_sub(cap);
                (prefix[s + 1] - prefix[lo]).min(limit + 1)
            })
            .collect();
    }
    ways[t]
}

/// Exhaustive maximizer of the noise-free score on a grid of `step` sentences.
///
/// Every candidate in `pool` receives a multiple of `step` no larger than its
/// availability, and the amounts sum to the largest grid total not exceeding
/// `budget`. Ties go to the lexicographically smallest vector in pool order.
pub fn brute_force_best(
    model: &UtilityModel,
    pool: &SourcePool,
    budget: u64,
    step: u64,
) -> Result<OracleAllocation> {
    model.validate()?;
    if step == 0 || budget == 0 {
        return Err(Error::input("budget and step must be positive"));
    }
    let cands = pool.candidates();
    for c in cands {
        if !model.sim_to_target.contains_key(&c.language) {
            return Err(Error::input(format!(
                "`{}` is not a source in the utility model",
                c.language
            )));
        }
    }
    let caps: Vec<u64> = cands.iter().map(|c| c.availability / step).collect();
    let total = (budget / step).min(caps.iter().sum());
    let points = count_compositions(&caps, total, MAX_GRID_POINTS);
    if points > MAX_GRID_POINTS {
        return Err(Error::Scale(format!(
            "{} sources over {} grid steps exceed {MAX_GRID_POINTS} allocations",
            cands.len(),
            total
        )));
    }

    // Units still placeable by candidates i.. so that the recursion never
    // enters a dead branch.
    let mut tail_cap = vec![0u64; caps.len() + 1];
    for i in (0..caps.len()).rev() {
        tail_cap[i] = tail_cap[i + 1] + caps[i];
    }

    struct Search<'a> {
        model: &'a UtilityModel,
        langs: Vec<&'a str>,
        caps: &'a [u64],
        tail_cap: &'a [u64],
        step: u64,
        budget: u64,
        current: Vec<u64>,
        best: Option<(Vec<u64>, f64)>,
    }

    impl Search<'_> {
        fn walk(&mut self, i: usize, left: u64) -> Result<()> {
            if i == self.caps.len() {
                let entries: Vec<Entry> = self
                    .langs
                    .iter()
                    .zip(&self.current)
                    .map(|(l, &x)| Entry::new(*l, x * self.step))
                    .collect();
                let s = score_entries(self.model, &entries, self.budget, None)?;
                if self.best.as_ref().is_none_or(|(_, b)| s > *b) {
                    self.best = Some((self.current.clone(), s));
                }
                return Ok(());
            }
            let lo = left.saturating_sub(self.tail_cap[i + 1]);
            let hi = self.caps[i].min(left);
            for x in lo..=hi {
                self.current[i] = x;
                self.walk(i + 1, left - x)?;
            }
            self.current[i] = 0;
            Ok(())
        }
    }

    let mut search = Search {
        model,
        langs: cands.iter().map(|c| c.language.as_str()).collect(),
        caps: &caps,
        tail_cap: &tail_cap,
        step,
        budget,
        current: vec![0; caps.len()],
        best: None,
    };
    search.walk(0, total)?;
    let (units, score) = search.best.expect("at least one grid point");
    let entries: Vec<Entry> = cands
        .iter()
        .zip(units)
        .map(|(c, x)| Entry::new(c.language.clone(), x * step))
        .collect();
    let used = entries.iter().map(|e| e.amount).sum();
    Ok(OracleAllocation {
        entries,
        budget,
        used,
        score,
    })
}

/// A utility model under a model tag (e.g. the encoder it stands in for).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCase {
    pub tag: String,
    pub model: UtilityModel,
}

/// Per-source availability under a label (usually the task).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolCase {
    pub label: String,
    pub availability: BTreeMap<String, u64>,
}

/// Evaluates every `(model, pool, config)` combination.
///
/// Results come back sorted by task, target, budget, model, strategy and
/// seed.
pub fn tournament(
    models: &[ModelCase],
    pools: &[PoolCase],
    cfgs: &[StrategyConfig],
) -> Result<Vec<RunResult>> {
    if models.is_empty() || pools.is_empty() || cfgs.is_empty() {
        return Err(Error::input(
            "tournament needs at least one model, pool and configuration",
        ));
    }
    let mut results = Vec::with_capacity(models.len() * pools.len() * cfgs.len());
    for mc in models {
        for pc in pools {
            let pool = mc.model.pool(&pc.availability)?;
            for cfg in cfgs {
                let allocation = allocate(&pool, cfg)?;
                results.push(RunResult {
                    task: pc.label.clone(),
                    target: mc.model.target.clone(),
                    budget_level: cfg.budget.to_string(),
                    model_tag: mc.tag.clone(),
                    strategy: cfg.strategy.name().to_string(),
                    seed: cfg.seed,
                    metric: evaluate(&mc.model, &allocation)?,
                    utilization: allocation.utilization,
                });
            }
        }
    }
    results.sort_by(|a, b| {
        (
            &a.task,
            &a.target,
            &a.budget_level,
            &a.model_tag,
            &a.strategy,
            a.seed,
        )
            .cmp(&(
                &b.task,
                &b.target,
                &b.budget_level,
                &b.model_tag,
                &b.strategy,
                b.seed,
            ))
    });
    Ok(results)
}

/// Cross product of strategies, budgets and seeds over a base configuration.
pub fn config_grid(
    base: &StrategyConfig,
    strategies: &[Strategy],
    budgets: &[u64],
    seeds: &[u64],
) -> Vec<StrategyConfig> {
    let mut out = Vec::with_capacity(strategies.len() * budgets.len() * seeds.len());
    for &strategy in strategies {
        for &budget in budgets {
            for &seed in seeds {
                let mut cfg = base.clone();
                cfg.strategy = strategy;
                cfg.budget = budget;
                cfg.seed = seed;
                out.push(cfg);
            }
        }
    }
    out
}

fn default_k() -> usize {
    StrategyConfig::DEFAULT_K
}
fn default_alpha() -> f64 {
    StrategyConfig::DEFAULT_ALPHA
}
fn default_batch() -> u64 {
    StrategyConfig::DEFAULT_BATCH_SIZE
}
fn default_saturation() -> f64 {
    StrategyConfig::DEFAULT_SATURATION_C
}
fn default_tau() -> f64 {
    DEFAULT_TAU
}
fn default_beta() -> f64 {
    DEFAULT_BETA
}

/// Utility model as written in a tournament spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub tag: Option<String>,
    pub target: String,
    pub sims: BTreeMap<String, f64>,
    /// Path of an inter-source similarity CSV, relative to the spec file.
    #[serde(default)]
    pub inter_source_ref: Option<String>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Tournament description read by `srcalloc simulate tournament`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TournamentSpec {
    pub models: Vec<ModelSpec>,
    pub pools: Vec<PoolCase>,
    pub strategies: Vec<Strategy>,
    pub budgets: Vec<u64>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_batch")]
    pub batch_size: u64,
    #[serde(default = "default_saturation")]
    pub saturation_c: f64,
    #[serde(default)]
    pub returns: ReturnsCurve,
}

impl TournamentSpec {
    pub fn base_config(&self) -> StrategyConfig {
        StrategyConfig::new(Strategy::AllFromBest, 1)
            .with_k(self.k)
            .with_alpha(self.alpha)
            .with_batch_size(self.batch_size)
            .with_saturation(self.saturation_c, self.returns)
    }

    pub fn configs(&self) -> Vec<StrategyConfig> {
        config_grid(
            &self.base_config(),
            &self.strategies,
            &self.budgets,
            &self.seeds,
        )
    }
}
