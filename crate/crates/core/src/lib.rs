//! Top-k selection from noisy pairwise comparisons.
//!
//! Items are compared through a [`ComparisonOracle`]; the selection routines
//! return either an (ε, k)-optimal subset ([`epsilon_quick_select`],
//! [`tournament_k_select`]) or the exact best-k set ([`seebs`], [`seeks`])
//! with a caller-chosen failure probability. The [`verify`] module checks
//! answers and stochastic-transitivity properties exactly, [`bounds`]
//! evaluates sample-complexity expressions, and [`harness`] runs seeded
//! multi-trial experiments.
//!
//! ```
//! use pairwise_topk::{oracle::make_equal_gap, seed, tournament_k_select};
//!
//! let mut oracle = make_equal_gap(100, 0.6, 42)?;
//! let items: Vec<usize> = (0..100).collect();
//! let mut rng = seed::rng_from(7);
//! let result = tournament_k_select(&mut oracle, &items, 5, 0.1, 0.05, &mut rng)?;
//! assert_eq!(result.selected.len(), 5);
//! # Ok::<(), pairwise_topk::Error>(())
//! ```

pub mod bounds;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod seed;
pub mod selection;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    gap_vector, ranking_of, true_best_k, GapVector, ItemId, PreferenceInstance, Ranking, RoundRecord, SelectionParams,
    SelectionResult,
};
pub use oracle::{ComparisonOracle, Flipped, InstanceSpec, MatrixOracle, Model};
pub use selection::{
    distribute_item, epsilon_quick_select, seebs, seeks, tournament_k_select, tournament_worst_select, Algorithm,
    PacSelector,
};
