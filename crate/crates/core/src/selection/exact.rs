use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_confidence, check_subset, epsilon_quick_select, halving_tolerance, round_confidence, tournament_k_select,
    tournament_worst_select, Buckets, DiParams,
};
use crate::error::{Error, Result};
use crate::model::{ItemId, RoundRecord, SelectionResult};
use crate::oracle::ComparisonOracle;

/// PAC routine SEEKS uses to pick the candidate set each round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PacSelector {
    #[default]
    Tks,
    /// Quickselect instead of the tournament (the "v2" variant).
    Eqs,
}

/// Sequential elimination for the single best item.
///
/// Round `t` uses `α_t = 2^{−t}` and `δ_t = 6δ/(π²t²)`: TKS picks a PAC-best
/// pivot with tolerance `α_t/3` and confidence `2δ_t/3`, then every other
/// survivor is distributed against it with lower shift `α_t/3` and the ones
/// landing below are discarded.
pub fn seebs<O, R>(oracle: &mut O, items: &[ItemId], delta: f64, rng: &mut R) -> Result<SelectionResult>
where
    O: ComparisonOracle + ?Sized,
    R: Rng + ?Sized,
{
    check_subset(items, 1, oracle.n())?;
    check_confidence(delta)?;

    let start = oracle.comparisons();
    let mut remaining = items.to_vec();
    let mut trace = Vec::new();
    let mut t = 0;
    while remaining.len() > 1 {
        t += 1;
        let round_start = oracle.comparisons();
        let alpha = halving_tolerance(t);
        let delta_t = round_confidence(delta, t);
        let pivot = tournament_k_select(oracle, &remaining, 1, alpha / 3.0, 2.0 * delta_t / 3.0, rng)?.selected[0];
        let params = DiParams::new(alpha / 3.0, 0.0, alpha / 3.0, delta_t / 3.0);
        let mut piles = Buckets::around(pivot);
        for &i in remaining.iter().filter(|&&i| i != pivot) {
            piles.distribute(oracle, i, pivot, &params)?;
        }
        debug_assert!(piles.partitions(&remaining));
        trace.push(RoundRecord {
            round: t,
            survivors: remaining.len(),
            accepted: 0,
            pivot: Some(pivot),
            tolerance: alpha,
            confidence: delta_t,
            comparisons: oracle.comparisons() - round_start,
        });
        remaining.retain(|i| !piles.down.contains(i));
    }

    Ok(SelectionResult {
        selected: remaining,
        comparisons: oracle.comparisons() - start,
        rounds: t,
        trace,
        flagged: false,
    })
}

/// Sequential elimination for the exact best-`k` set.
///
/// Round `t` picks a PAC best-`k_t` candidate set `A_t` with the configured
/// selector, takes a PAC-worst pivot of `A_t` with TKS2, then distributes
/// every other survivor against the pivot with both shifts equal to `α_t/3`.
/// Items landing above are accepted, items landing below are discarded.
/// Stops when `k` items are accepted or only `k` candidates remain in total.
///
/// If more than `k` items were accepted, the output keeps the `k` smallest
/// indices; missing slots are filled from the survivors by ascending index.
/// Either case sets [`SelectionResult::flagged`] when truncation happens.
pub fn seeks<O, R>(
    oracle: &mut O,
    items: &[ItemId],
    k: usize,
    delta: f64,
    rng: &mut R,
    selector: PacSelector,
) -> Result<SelectionResult>
where
    O: ComparisonOracle + ?Sized,
    R: Rng + ?Sized,
{
    check_subset(items, k, oracle.n())?;
    check_confidence(delta)?;
    if 2 * k > items.len() {
        return Err(Error::KOutOfRange { k, n: items.len() });
    }

    let start = oracle.comparisons();
    let mut remaining = items.to_vec();
    let mut accepted: Vec<ItemId> = Vec::new();
    let mut k_t = k;
    let mut trace = Vec::new();
    let mut t = 0;
    while accepted.len() < k && accepted.len() + remaining.len() > k {
        t += 1;
        let round_start = oracle.comparisons();
        let alpha = halving_tolerance(t);
        let delta_t = round_confidence(delta, t);
        let tol = alpha / 3.0;
        let candidates = match selector {
            PacSelector::Tks => tournament_k_select(oracle, &remaining, k_t, tol, delta_t / 3.0, rng)?,
            PacSelector::Eqs => epsilon_quick_select(oracle, &remaining, k_t, tol, delta_t / 3.0, rng)?,
        }
        .selected;
        let pivot = tournament_worst_select(oracle, &candidates, 1, tol, delta_t / 3.0, rng)?.selected[0];

        let params = DiParams::new(tol, tol, tol, delta_t / (3.0 * (remaining.len() - 1) as f64));
        let mut piles = Buckets::around(pivot);
        for &i in remaining.iter().filter(|&&i| i != pivot) {
            piles.distribute(oracle, i, pivot, &params)?;
        }
        debug_assert!(piles.partitions(&remaining));
        trace.push(RoundRecord {
            round: t,
            survivors: remaining.len(),
            accepted: accepted.len(),
            pivot: Some(pivot),
            tolerance: alpha,
            confidence: delta_t,
            comparisons: oracle.comparisons() - round_start,
        });

        remaining.retain(|i| !piles.up.contains(i) && !piles.down.contains(i));
        k_t = k_t.saturating_sub(piles.up.len());
        accepted.extend_from_slice(&piles.up);
    }

    let mut flagged = false;
    accepted.sort_unstable();
    if accepted.len() > k {
        accepted.truncate(k);
        flagged = true;
    } else if accepted.len() < k {
        remaining.sort_unstable();
        let fill = k - accepted.len();
        accepted.extend_from_slice(&remaining[..fill.min(remaining.len())]);
        accepted.sort_unstable();
    }

    Ok(SelectionResult { selected: accepted, comparisons: oracle.comparisons() - start, rounds: t, trace, flagged })
}
