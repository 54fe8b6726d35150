#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use srcalloc::allocation::{Candidate, SourcePool};
use srcalloc::similarity::SimilarityMatrix;

pub fn lang(i: usize) -> String {
    format!("l{i:02}")
}

/// Random symmetric inter-source matrix with unit diagonal.
pub fn random_matrix(rng: &mut impl Rng, langs: &[String]) -> SimilarityMatrix {
    let k = langs.len();
    let mut scores = vec![0.0; k * k];
    for i in 0..k {
        scores[i * k + i] = 1.0;
        for j in (i + 1)..k {
            let v = rng.random_range(-0.2..1.0);
            scores[i * k + j] = v;
            scores[j * k + i] = v;
        }
    }
    SimilarityMatrix::new(langs.to_vec(), scores, "random").unwrap()
}

/// Pool with `n` sources, availabilities up to `max_avail` and at least one
/// positive similarity. About one source in eight has similarity exactly 0.
pub fn random_pool(rng: &mut impl Rng, n: usize, max_avail: u64) -> SourcePool {
    let langs: Vec<String> = (0..n).map(lang).collect();
    let mut candidates: Vec<Candidate> = langs
        .iter()
        .map(|l| {
            let sim = if rng.random_bool(0.125) {
                0.0
            } else {
                rng.random_range(0.001..1.0)
            };
            Candidate::new(l.clone(), rng.random_range(0..=max_avail), sim)
        })
        .collect();
    if candidates.iter().all(|c| c.similarity == 0.0) {
        candidates[0].similarity = 0.5;
    }
    let m = random_matrix(rng, &langs);
    SourcePool::new("tgt", candidates, Some(m)).unwrap()
}

pub fn availability_map(pool: &SourcePool) -> BTreeMap<String, u64> {
    pool.candidates()
        .iter()
        .map(|c| (c.language.clone(), c.availability))
        .collect()
}
