//! Budget-constrained allocation of training sentences across source languages.
//!
//! A [`SourcePool`] lists the candidate sources for one target language with
//! their available sentence counts and similarity to the target. Each
//! [`Strategy`] turns a pool and a budget into an [`AllocationVector`] of
//! whole sentences per source. Every strategy except
//! [`Strategy::AllFromBest`] caps amounts at availability and redistributes
//! the surplus, so the budget is used in full whenever the selected sources
//! hold enough data.

mod apportion;
mod greedy;
mod select;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

pub use apportion::{
    apportion, cap_and_redistribute, proportional_allocate, uniform_allocate, WeightBasis,
};
pub use greedy::greedy_marginal_allocate;
pub use select::{
    all_from_best, best_source, diversity_aware_select, random_k_select, top_k_select,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub language: String,
    pub availability: u64,
    pub similarity: f64,
}

impl Candidate {
    pub fn new(language: impl Into<String>, availability: u64, similarity: f64) -> Self {
        Candidate {
            language: language.into(),
            availability,
            similarity,
        }
    }
}

/// Candidate sources for one target language.
///
/// Candidates are kept sorted by language code so that every strategy sees
/// the same order regardless of how the pool was assembled.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePool {
    target: String,
    candidates: Vec<Candidate>,
    inter_source: Option<SimilarityMatrix>,
}

impl SourcePool {
    pub fn new(
        target: impl Into<String>,
        mut candidates: Vec<Candidate>,
        inter_source: Option<SimilarityMatrix>,
    ) -> Result<Self> {
        let target = target.into();
        if candidates.is_empty() {
            return Err(Error::input(format!("source pool for `{target}` is empty")));
        }
        let mut seen = HashSet::new();
        for c in &candidates {
            if c.language == target {
                return Err(Error::input(format!(
                    "target `{target}` cannot also be a source candidate"
                )));
            }
            if !seen.insert(c.language.as_str()) {
                return Err(Error::input(format!(
                    "duplicate candidate `{}`",
                    c.language
                )));
            }
            if !c.similarity.is_finite() || c.similarity < 0.0 {
                return Err(Error::input(format!(
                    "similarity of `{}` must be finite and non-negative, got {}",
                    c.language, c.similarity
                )));
            }
        }
        candidates.sort_by(|a, b| a.language.cmp(&b.language));
        let inter_source = inter_source.map(|m| {
            let langs: Vec<&str> = candidates.iter().map(|c| c.language.as_str()).collect();
            m.restrict(&langs)
        });
        Ok(SourcePool {
            target,
            candidates,
            inter_source,
        })
    }

    /// Builds a pool from a similarity matrix that includes the target.
    ///
    /// Every language in `availability` other than the target becomes a
    /// candidate. Languages absent from the matrix get similarity 0, and
    /// negative cosine gaps are clamped to 0 since they carry no transfer
    /// signal. The inter-source matrix is the matrix restricted to the
    /// candidates.
    pub fn from_matrix(
        target: impl Into<String>,
        matrix: &SimilarityMatrix,
        availability: &BTreeMap<String, u64>,
    ) -> Result<Self> {
        let target = target.into();
        if matrix.index_of(&target).is_none() {
            return Err(Error::input(format!(
                "target `{target}` is missing from the similarity matrix"
            )));
        }
        let candidates = availability
            .iter()
            .filter(|(lang, _)| **lang != target)
            .map(|(lang, &count)| {
                let sim = matrix.get(lang, &target).unwrap_or(0.0).max(0.0);
                Candidate::new(lang.clone(), count, sim)
            })
            .collect();
        SourcePool::new(target, candidates, Some(matrix.clone()))
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidate(&self, language: &str) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.language == language)
    }

    pub fn inter_source(&self) -> Option<&SimilarityMatrix> {
        self.inter_source.as_ref()
    }

    /// Similarity between two candidates; 0 when the pair is not in the matrix.
    pub fn inter(&self, a: &str, b: &str) -> f64 {
        self.inter_source
            .as_ref()
            .and_then(|m| m.get(a, b))
            .unwrap_or(0.0)
    }

    pub fn total_availability(&self) -> u64 {
        self.candidates.iter().map(|c| c.availability).sum()
    }

    /// Same pool with every similarity (to the target and between sources)
    /// multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> SourcePool {
        SourcePool {
            target: self.target.clone(),
            candidates: self
                .candidates
                .iter()
                .map(|c| Candidate::new(c.language.clone(), c.availability, c.similarity * factor))
                .collect(),
            inter_source: self.inter_source.as_ref().map(|m| m.scaled(factor)),
        }
    }

    pub(crate) fn lookup<'a>(&'a self, languages: &[String]) -> Result<Vec<&'a Candidate>> {
        languages
            .iter()
            .map(|l| {
                self.candidate(l)
                    .ok_or_else(|| Error::input(format!("`{l}` is not in the source pool")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    AllFromBest,
    TopKProportional,
    TopKUniform,
    RandomK,
    DiversityAware,
    GreedyMarginal,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::AllFromBest,
        Strategy::TopKProportional,
        Strategy::TopKUniform,
        Strategy::RandomK,
        Strategy::DiversityAware,
        Strategy::GreedyMarginal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::AllFromBest => "all-from-best",
            Strategy::TopKProportional => "top-k-proportional",
            Strategy::TopKUniform => "top-k-uniform",
            Strategy::RandomK => "random-k",
            Strategy::DiversityAware => "diversity-aware",
            Strategy::GreedyMarginal => "greedy-marginal",
        }
    }

    pub fn is_multi_source(self) -> bool {
        self != Strategy::AllFromBest
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Strategy::ALL.iter().map(|s| s.name()).collect();
                Error::input(format!(
                    "unknown strategy `{s}` (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// Diminishing-returns curve used by greedy-marginal allocation. Both take
/// the saturation scale `c` from [`StrategyConfig::saturation_c`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReturnsCurve {
    /// `sim / (1 + a / c)`
    #[default]
    Hyperbolic,
    /// `sim · exp(−a / c)`, the per-sentence gain of a `1 − exp(−a/c)` utility.
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub budget: u64,
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
    pub batch_size: u64,
    pub saturation_c: f64,
    #[serde(default)]
    pub returns: ReturnsCurve,
}

impl StrategyConfig {
    pub const DEFAULT_K: usize = 5;
    pub const DEFAULT_ALPHA: f64 = 0.5;
    pub const DEFAULT_BATCH_SIZE: u64 = 500;
    pub const DEFAULT_SATURATION_C: f64 = 1000.0;

    pub fn new(strategy: Strategy, budget: u64) -> Self {
        StrategyConfig {
            strategy,
            budget,
            k: Self::DEFAULT_K,
            alpha: Self::DEFAULT_ALPHA,
            seed: 0,
            batch_size: Self::DEFAULT_BATCH_SIZE,
            saturation_c: Self::DEFAULT_SATURATION_C,
            returns: ReturnsCurve::default(),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_batch_size(mut self, batch_size: u64) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn with_saturation(mut self, saturation_c: f64, returns: ReturnsCurve) -> Self {
        self.saturation_c = saturation_c;
        self.returns = returns;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::input("--budget must be a positive integer"));
        }
        if self.k == 0 {
            return Err(Error::input("--k must be a positive integer"));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::input(format!(
                "--alpha must be ≥ 0, got {}",
                self.alpha
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::input("--batch-size must be a positive integer"));
        }
        if !self.saturation_c.is_finite() || self.saturation_c <= 0.0 {
            return Err(Error::input(format!(
                "--saturation-c must be > 0, got {}",
                self.saturation_c
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub language: String,
    pub amount: u64,
}

impl Entry {
    pub fn new(language: impl Into<String>, amount: u64) -> Self {
        Entry {
            language: language.into(),
            amount,
        }
    }
}

/// Sentences per selected source. Sources not listed receive nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationVector {
    pub target: String,
    pub entries: Vec<Entry>,
    pub budget: u64,
    pub used: u64,
    pub utilization: f64,
    pub config: StrategyConfig,
}

impl AllocationVector {
    pub fn new(target: impl Into<String>, entries: Vec<Entry>, config: StrategyConfig) -> Self {
        let used = entries.iter().map(|e| e.amount).sum();
        let budget = config.budget;
        AllocationVector {
            target: target.into(),
            entries,
            budget,
            used,
            utilization: used as f64 / budget as f64,
            config,
        }
    }

    pub fn amount_of(&self, language: &str) -> u64 {
        self.entries
            .iter()
            .find(|e| e.language == language)
            .map_or(0, |e| e.amount)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.language.as_str())
    }

    /// Number of sources that receive at least one sentence.
    pub fn active_sources(&self) -> usize {
        self.entries.iter().filter(|e| e.amount > 0).count()
    }
}

/// Runs the configured strategy on `pool`.
pub fn allocate(pool: &SourcePool, cfg: &StrategyConfig) -> Result<AllocationVector> {
    cfg.validate()?;
    let entries = match cfg.strategy {
        Strategy::AllFromBest => return all_from_best(pool, cfg),
        Strategy::GreedyMarginal => return greedy_marginal_allocate(pool, cfg),
        Strategy::TopKProportional => {
            let chosen = top_k_select(pool, cfg.k)?;
            proportional_allocate(&pool.lookup(&chosen)?, cfg.budget)?
        }
        Strategy::TopKUniform => {
            let chosen = top_k_select(pool, cfg.k)?;
            uniform_allocate(&pool.lookup(&chosen)?, cfg.budget)?
        }
        Strategy::RandomK => {
            let chosen = random_k_select(pool, cfg.k, cfg.seed)?;
            uniform_allocate(&pool.lookup(&chosen)?, cfg.budget)?
        }
        Strategy::DiversityAware => {
            let chosen = diversity_aware_select(pool, cfg.k, cfg.alpha)?;
            proportional_allocate(&pool.lookup(&chosen)?, cfg.budget)?
        }
    };
    Ok(AllocationVector::new(pool.target(), entries, cfg.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
            assert_eq!(
                serde_json::to_string(&s).unwrap(),
                format!("\"{}\"", s.name())
            );
        }
        assert!("top5".parse::<Strategy>().is_err());
    }

    #[test]
    fn pool_rejects_target_as_candidate() {
        let r = SourcePool::new("hau", vec![Candidate::new("hau", 10, 0.5)], None);
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn pool_rejects_empty_and_negative() {
        assert!(SourcePool::new("hau", vec![], None).is_err());
        assert!(SourcePool::new("hau", vec![Candidate::new("yor", 10, -0.1)], None).is_err());
    }

    #[test]
    fn from_matrix_fills_missing_similarity_with_zero() {
        let m = SimilarityMatrix::new(
            vec!["hau".into(), "swa".into()],
            vec![1.0, 0.4, 0.4, 1.0],
            "",
        )
        .unwrap();
        let avail: BTreeMap<String, u64> = [("swa".to_string(), 100), ("pcm".to_string(), 50)]
            .into_iter()
            .collect();
        let pool = SourcePool::from_matrix("hau", &m, &avail).unwrap();
        assert_eq!(pool.candidate("pcm").unwrap().similarity, 0.0);
        assert_eq!(pool.candidate("swa").unwrap().similarity, 0.4);
    }

    #[test]
    fn config_validation() {
        let base = StrategyConfig::new(Strategy::TopKProportional, 100);
        assert!(base.validate().is_ok());
        assert!(base.clone().with_alpha(-0.1).validate().is_err());
        assert!(base.clone().with_k(0).validate().is_err());
        assert!(StrategyConfig::new(Strategy::RandomK, 0)
            .validate()
            .is_err());
    }
}
