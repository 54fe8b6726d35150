//! Deterministic training/validation manifests.
//!
//! For each allocated language, `amount` example ids are drawn without
//! replacement using a generator seeded from `(seed, language)`. The samples
//! are concatenated in allocation order, shuffled with a generator seeded
//! from `seed` alone, and the last `round(val_fraction × total)` records
//! (ties to even) are marked for validation. Records carry only the source
//! language and example id.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocation::AllocationVector;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Rng};

pub const DEFAULT_VAL_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Task {
    Ner,
    Sentiment,
    #[default]
    Other,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Ner => "NER",
            Task::Sentiment => "SENTIMENT",
            Task::Other => "OTHER",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NER" => Ok(Task::Ner),
            "SENTIMENT" => Ok(Task::Sentiment),
            "OTHER" => Ok(Task::Other),
            _ => Err(Error::input(format!("unknown task `{s}`"))),
        }
    }
}

/// Example ids available for one source language.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetIndex {
    language: String,
    example_ids: Vec<String>,
    task: Task,
}

impl DatasetIndex {
    pub fn new(language: impl Into<String>, example_ids: Vec<String>, task: Task) -> Result<Self> {
        let language = language.into();
        let mut seen = HashSet::with_capacity(example_ids.len());
        for id in &example_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Index(format!(
                    "duplicate example id `{id}` in index for `{language}`"
                )));
            }
        }
        Ok(DatasetIndex {
            language,
            example_ids,
            task,
        })
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn example_ids(&self) -> &[String] {
        &self.example_ids
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn len(&self) -> usize {
        self.example_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.example_ids.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
}

/// Field order is the serialized key order (sorted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub example_id: String,
    pub source_language: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
    pub allocation: AllocationVector,
    pub seed: u64,
    pub val_fraction: f64,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, split: Split) -> usize {
        self.records.iter().filter(|r| r.split == split).count()
    }

    pub fn count_for(&self, language: &str) -> usize {
        self.records
            .iter()
            .filter(|r| r.source_language == language)
            .count()
    }
}

/// Validation set size: `val_fraction × total` rounded half to even.
pub fn validation_count(total: usize, val_fraction: f64) -> usize {
    (val_fraction * total as f64).round_ties_even() as usize
}

pub fn build_manifest(
    allocation: &AllocationVector,
    indexes: &[DatasetIndex],
    seed: u64,
    val_fraction: f64,
) -> Result<Manifest> {
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(Error::input(format!(
            "--val-fraction must lie in [0, 1), got {val_fraction}"
        )));
    }
    let by_lang: HashMap<&str, &DatasetIndex> =
        indexes.iter().map(|ix| (ix.language(), ix)).collect();

    let mut pooled: Vec<(&str, &str)> = Vec::with_capacity(allocation.used as usize);
    for entry in &allocation.entries {
        if entry.amount == 0 {
            continue;
        }
        let index =
            by_lang
                .get(entry.language.as_str())
                .ok_or_else(|| Error::AvailabilityMismatch {
                    language: entry.language.clone(),
                    needed: entry.amount,
                    available: 0,
                })?;
        if (index.len() as u64) < entry.amount {
            return Err(Error::AvailabilityMismatch {
                language: entry.language.clone(),
                needed: entry.amount,
                available: index.len() as u64,
            });
        }
        let mut ids: Vec<&str> = index.example_ids().iter().map(String::as_str).collect();
        let take = entry.amount as usize;
        Rng::new(derive_seed(seed, entry.language.as_bytes())).partial_shuffle(&mut ids, take);
        pooled.extend(ids[..take].iter().map(|id| (entry.language.as_str(), *id)));
    }

    Rng::new(seed).shuffle(&mut pooled);
    let total = pooled.len();
    let train = total - validation_count(total, val_fraction);
    let records = pooled
        .into_iter()
        .enumerate()
        .map(|(i, (lang, id))| ManifestRecord {
            example_id: id.to_string(),
            source_language: lang.to_string(),
            split: if i < train {
                Split::Train
            } else {
                Split::Validation
            },
        })
        .collect();

    Ok(Manifest {
        records,
        allocation: allocation.clone(),
        seed,
        val_fraction,
    })
}

/// One manifest per seed.
pub fn seed_sweep(
    allocation: &AllocationVector,
    indexes: &[DatasetIndex],
    seeds: &[u64],
    val_fraction: f64,
) -> Result<Vec<Manifest>> {
    if seeds.is_empty() {
        return Err(Error::input("seed sweep needs at least one seed"));
    }
    seeds
        .iter()
        .map(|&s| build_manifest(allocation, indexes, s, val_fraction))
        .collect()
}
