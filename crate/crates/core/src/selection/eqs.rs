use rand::seq::index;
use rand::Rng;

use super::{check_confidence, check_subset, check_tolerance, Buckets, DiParams};
use crate::error::Result;
use crate::model::{ItemId, RoundRecord, SelectionResult};
use crate::oracle::ComparisonOracle;

/// Quickselect with a noisy three-way partition.
///
/// Each round picks a uniformly random pivot, distributes every other item
/// with tolerance ε/2 and per-item confidence `δ / (|S|(|S|−1))`, then keeps
/// the pile that must contain the remaining answer. The recursive step runs
/// with confidence `(|S|−1)δ/|S|`. Returns an (ε, k)-optimal subset of
/// `items` with probability at least 1 − δ under SST and STI.
pub fn epsilon_quick_select<O, R>(
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
    let mut selected = Vec::with_capacity(k);
    let mut trace = Vec::new();
    let mut set = items.to_vec();
    let mut k = k;
    let mut delta = delta;

    loop {
        // every item is needed; nothing left to decide
        if k == set.len() {
            selected.extend_from_slice(&set);
            break;
        }
        let round_start = oracle.comparisons();
        let n = set.len();
        let pivot = set[rng.random_range(0..n)];
        let per_item = delta / (n * (n - 1)) as f64;
        let params = DiParams::new(epsilon / 2.0, 0.0, 0.0, per_item);
        let mut piles = Buckets::around(pivot);
        for &i in set.iter().filter(|&&i| i != pivot) {
            piles.distribute(oracle, i, pivot, &params)?;
        }
        debug_assert!(piles.partitions(&set));
        trace.push(RoundRecord {
            round: trace.len() + 1,
            survivors: n,
            accepted: selected.len(),
            pivot: Some(pivot),
            tolerance: epsilon,
            confidence: delta,
            comparisons: oracle.comparisons() - round_start,
        });

        let next_delta = (n - 1) as f64 * delta / n as f64;
        let Buckets { up, mut mid, down } = piles;
        if up.len() > k {
            set = up;
        } else if up.len() + mid.len() >= k {
            let need = k - up.len();
            selected.extend_from_slice(&up);
            let picks = index::sample(rng, mid.len(), need);
            selected.extend(picks.iter().map(|p| mid[p]));
            break;
        } else {
            k -= up.len() + mid.len();
            selected.extend_from_slice(&up);
            selected.append(&mut mid);
            set = down;
        }
        delta = next_delta;
    }

    selected.sort_unstable();
    Ok(SelectionResult {
        selected,
        comparisons: oracle.comparisons() - start,
        rounds: trace.len(),
        trace,
        flagged: false,
    })
}
