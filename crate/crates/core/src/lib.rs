//! Budget-constrained source-language selection for cross-lingual transfer.
//!
//! Given a target language, a pool of candidate source languages and a fixed
//! budget of training sentences, this crate decides which sources to draw
//! from and how many sentences to take from each, holding the total fixed so
//! that strategies can be compared without confounding language choice with
//! data quantity.
//!
//! - [`similarity`]: cosine-gap language similarity over parallel-sentence embeddings.
//! - [`allocation`]: six allocation strategies, largest-remainder rounding and cap-and-redistribute.
//! - [`manifest`]: deterministic sampling of training/validation manifests.
//! - [`stats`]: paired t-tests, Cohen's d, Bonferroni correction, win rates, utilization.
//! - [`simulator`]: a synthetic transfer surrogate, a brute-force oracle and tournaments.
//! - [`io`]: file formats shared by the library and the `srcalloc` binary.
//!
//! ```
//! use srcalloc::allocation::{allocate, Candidate, SourcePool, Strategy, StrategyConfig};
//!
//! let pool = SourcePool::new(
//!     "hau",
//!     vec![
//!         Candidate::new("swa", 1_810, 0.42),
//!         Candidate::new("yor", 8_000, 0.30),
//!         Candidate::new("ibo", 9_000, 0.35),
//!     ],
//!     None,
//! )?;
//! let cfg = StrategyConfig::new(Strategy::TopKProportional, 5_000).with_k(3);
//! let a = allocate(&pool, &cfg)?;
//! assert_eq!(a.used, 5_000);
//! assert_eq!(a.amount_of("swa"), 1_810);
//! # Ok::<(), srcalloc::Error>(())
//! ```

pub mod allocation;
pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod rng;
pub mod similarity;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
