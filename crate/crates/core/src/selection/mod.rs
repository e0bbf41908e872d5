//! Adaptive selection algorithms over a [`ComparisonOracle`].
//!
//! * [`distribute_item`] places one item above, near, or below a pivot.
//! * [`epsilon_quick_select`] (EQS) and [`tournament_k_select`] (TKS) return
//!   an (ε, k)-optimal subset with probability at least 1 − δ;
//!   [`tournament_worst_select`] (TKS2) is the worst-items mirror of TKS.
//! * [`seebs`] and [`seeks`] return the exact best item / best-k items with
//!   probability at least 1 − δ.
//!
//! All algorithms take their own RNG for pivot choice and shuffling, separate
//! from the oracle's sampling stream.
//!
//! [`ComparisonOracle`]: crate::oracle::ComparisonOracle

mod di;
mod eqs;
mod exact;
mod tks;

pub use di::{confidence_radius, distribute_item, Bucket, Buckets, DiParams, T_MAX_CAP};
pub use eqs::epsilon_quick_select;
pub use exact::{seebs, seeks, PacSelector};
pub use tks::{tournament_k_select, tournament_worst_select};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ItemId;

/// δ_t = 6δ / (π² t²); sums to δ over t ≥ 1.
pub fn round_confidence(delta: f64, t: usize) -> f64 {
    6.0 * delta / (PI * PI * (t * t) as f64)
}

/// TKS tolerance schedule ε_t = (ε/4)(4/5)^t; sums to ε over t ≥ 1.
pub fn tks_tolerance(epsilon: f64, t: usize) -> f64 {
    epsilon / 4.0 * 0.8f64.powi(t as i32)
}

/// Elimination threshold α_t = 2^{−t}.
pub fn halving_tolerance(t: usize) -> f64 {
    0.5f64.powi(t as i32)
}

/// Algorithm identifiers used by the harness and bindings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Eqs,
    Tks,
    Seebs,
    Seeks,
    SeeksV2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Eqs, Algorithm::Tks, Algorithm::Seebs, Algorithm::Seeks, Algorithm::SeeksV2];

    pub fn is_pac(self) -> bool {
        matches!(self, Algorithm::Eqs | Algorithm::Tks)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Eqs => "eqs",
            Algorithm::Tks => "tks",
            Algorithm::Seebs => "seebs",
            Algorithm::Seeks => "seeks",
            Algorithm::SeeksV2 => "seeks_v2",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

/// Checks that `items` is a non-empty set of distinct items of the oracle
/// and that `1 ≤ k ≤ |items|`.
pub(crate) fn check_subset(items: &[ItemId], k: usize, n: usize) -> Result<()> {
    if items.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut seen = vec![false; n];
    for &item in items {
        if item >= n {
            return Err(Error::ItemOutOfRange { item, n });
        }
        if std::mem::replace(&mut seen[item], true) {
            return Err(Error::param("items", format!("item {item} repeated")));
        }
    }
    if k == 0 || k > items.len() {
        return Err(Error::KOutOfRange { k, n: items.len() });
    }
    Ok(())
}

pub(crate) fn check_tolerance(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::param("epsilon", format!("{epsilon} is not positive")))
    }
}

pub(crate) fn check_confidence(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::param("delta", format!("{delta} not in (0, 1)")))
    }
}
