use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_confidence, check_subset, check_tolerance, epsilon_quick_select, round_confidence, tks_tolerance};
use crate::error::Result;
use crate::model::{ItemId, RoundRecord, SelectionResult};
use crate::oracle::{ComparisonOracle, Flipped};

/// Tournament over chunks of at most `2k` items.
///
/// Round `t` shuffles the survivors, cuts them into contiguous chunks of size
/// `2k` (the last one may be smaller) and keeps EQS's answer for each chunk,
/// run with tolerance `ε_t = (ε/4)(4/5)^t` and confidence `δ_t / k`. Stops
/// once exactly `k` items survive.
pub fn tournament_k_select<O, R>(
    oracle: &mut O,
    items: &[ItemId],
    k: usize,
    epsilon: f64,
    delta: f64,
    rng: &mut R,
) -> Result<SelectionResult>
where
    O: ComparisonOracle + ?Sized,
    R: Rng + ?Sized,
{
    check_subset(items, k, oracle.n())?;
    check_tolerance(epsilon)?;
    check_confidence(delta)?;

    let start = oracle.comparisons();
    let mut survivors = items.to_vec();
    let mut trace = Vec::new();
    let mut t = 0;
    while survivors.len() > k {
        t += 1;
        let round_start = oracle.comparisons();
        let eps_t = tks_tolerance(epsilon, t);
        let delta_t = round_confidence(delta, t);
        let before = survivors.len();
        survivors.shuffle(rng);
        let mut next = Vec::with_capacity(before);
        for chunk in survivors.chunks(2 * k) {
            let r = epsilon_quick_select(oracle, chunk, k.min(chunk.len()), eps_t, delta_t / k as f64, rng)?;
            next.extend(r.selected);
        }
        survivors = next;
        trace.push(RoundRecord {
            round: t,
            survivors: before,
            accepted: 0,
            pivot: None,
            tolerance: eps_t,
            confidence: delta_t,
            comparisons: oracle.comparisons() - round_start,
        });
    }

    survivors.sort_unstable();
    Ok(SelectionResult {
        selected: survivors,
        comparisons: oracle.comparisons() - start,
        rounds: t,
        trace,
        flagged: false,
    })
}

/// TKS against the flipped oracle: returns a set `U` with
/// `p[j][i] ≥ 1/2 − ε` for all `i ∈ U`, `j ∉ U`.
pub fn tournament_worst_select<O, R>(
    oracle: &mut O,
    items: &[ItemId],
    k: usize,
    epsilon: f64,
    delta: f64,
    rng: &mut R,
) -> Result<SelectionResult>
where
    O: ComparisonOracle + ?Sized,
    R: Rng + ?Sized,
{
    let mut inverted = Flipped(oracle);
    tournament_k_select(&mut inverted, items, k, epsilon, delta, rng)
}
