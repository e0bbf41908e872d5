//! Domain types shared by the oracles, selection algorithms and verifiers.
//!
//! Items are dense zero-based indices. A [`PreferenceInstance`] holds the full
//! matrix of win probabilities `p[i][j]` and is immutable once built.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero-based item index, stable within one instance.
pub type ItemId = usize;

/// Off-diagonal pairs must satisfy `p[i][j] + p[j][i] = 1` within this tolerance.
pub const ANTISYMMETRY_TOL: f64 = 1e-9;

/// Dense matrix of pairwise win probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct PreferenceInstance {
    n: usize,
    p: Vec<f64>,
    strict: bool,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    p: Vec<Vec<f64>>,
}

impl TryFrom<MatrixRepr> for PreferenceInstance {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        if repr.p.len() != repr.n {
            return Err(Error::InvalidMatrix(format!("n = {} but matrix has {} rows", repr.n, repr.p.len())));
        }
        PreferenceInstance::from_rows(repr.p)
    }
}

impl From<PreferenceInstance> for MatrixRepr {
    fn from(inst: PreferenceInstance) -> Self {
        MatrixRepr { n: inst.n, p: inst.rows() }
    }
}

impl PreferenceInstance {
    /// Builds an instance from a square row-major matrix, checking the
    /// probability range, the `1/2` diagonal and antisymmetry.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut p = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            p.extend_from_slice(row);
        }
        Self::from_flat(n, p)
    }

    pub(crate) fn from_flat(n: usize, p: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(p.len(), n * n);
        let mut strict = true;
        for i in 0..n {
            if p[i * n + i] != 0.5 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry ({i},{i}) is {}, expected 0.5",
                    p[i * n + i]
                )));
            }
            for j in 0..n {
                let v = p[i * n + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidMatrix(format!("entry ({i},{j}) = {v} is not a probability")));
                }
                if i < j {
                    let w = p[j * n + i];
                    if (v + w - 1.0).abs() > ANTISYMMETRY_TOL {
                        return Err(Error::InvalidMatrix(format!("p[{i}][{j}] + p[{j}][{i}] = {} != 1", v + w)));
                    }
                    if v == 0.5 {
                        strict = false;
                    }
                }
            }
        }
        Ok(PreferenceInstance { n, p, strict })
    }

    /// Builds an instance from the upper triangle: `upper(i, j)` for `i < j`
    /// gives `p[i][j]`, and `p[j][i]` is set to its complement.
    pub fn from_upper<F>(n: usize, mut upper: F) -> Result<Self>
    where
        F: FnMut(ItemId, ItemId) -> f64,
    {
        let mut p = vec![0.5; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = upper(i, j);
                p[i * n + j] = v;
                p[j * n + i] = 1.0 - v;
            }
        }
        Self::from_flat(n, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability that `i` beats `j`.
    #[inline]
    pub fn prob(&self, i: ItemId, j: ItemId) -> f64 {
        self.p[i * self.n + j]
    }

    /// `|p[i][j] - 1/2|`.
    #[inline]
    pub fn gap(&self, i: ItemId, j: ItemId) -> f64 {
        (self.prob(i, j) - 0.5).abs()
    }

    /// True when no off-diagonal entry equals exactly 1/2.
    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.p.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }

    /// The instance with every comparison outcome inverted (the transpose).
    pub fn flipped(&self) -> PreferenceInstance {
        let n = self.n;
        let mut p = vec![0.5; n * n];
        for i in 0..n {
            for j in 0..n {
                p[i * n + j] = self.p[j * n + i];
            }
        }
        PreferenceInstance { n, p, strict: self.strict }
    }

    /// Relabels items so that old item `i` becomes `sigma[i]`.
    pub fn permuted(&self, sigma: &[ItemId]) -> Result<PreferenceInstance> {
        let n = self.n;
        check_permutation(sigma, n)?;
        let mut p = vec![0.5; n * n];
        for i in 0..n {
            for j in 0..n {
                p[sigma[i] * n + sigma[j]] = self.p[i * n + j];
            }
        }
        Ok(PreferenceInstance { n, p, strict: self.strict })
    }

    pub(crate) fn check_item(&self, item: ItemId) -> Result<()> {
        if item < self.n {
            Ok(())
        } else {
            Err(Error::ItemOutOfRange { item, n: self.n })
        }
    }

    fn first_tie(&self) -> Option<(ItemId, ItemId)> {
        let n = self.n;
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).find(|&(i, j)| self.prob(i, j) == 0.5)
    }
}

fn check_permutation(order: &[ItemId], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::param("permutation", format!("length {} != {n}", order.len())));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::param("permutation", format!("{i} repeated or out of range")));
        }
    }
    Ok(())
}

/// A total order over the items, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    order: Vec<ItemId>,
}

impl Ranking {
    pub fn new(order: Vec<ItemId>) -> Result<Self> {
        check_permutation(&order, order.len())?;
        Ok(Ranking { order })
    }

    pub fn order(&self) -> &[ItemId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `positions()[i]` is the rank (0 = best) of item `i`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (rank, &item) in self.order.iter().enumerate() {
            pos[item] = rank;
        }
        pos
    }

    /// The first `k` items, sorted by index.
    pub fn top(&self, k: usize) -> Vec<ItemId> {
        let mut top = self.order[..k.min(self.order.len())].to_vec();
        top.sort_unstable();
        top
    }
}

/// Orders items by the tournament relation `i ≻ j ⇔ p[i][j] > 1/2`.
///
/// The relation is a strict total order exactly when the win counts are a
/// permutation of `0..n`; otherwise it contains a cycle.
pub fn ranking_of(instance: &PreferenceInstance) -> Result<Ranking> {
    if let Some((i, j)) = instance.first_tie() {
        return Err(Error::NotStrictOrder(i, j));
    }
    let n = instance.n();
    let wins: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| j != i && instance.prob(i, j) > 0.5).count()).collect();
    let mut order = vec![usize::MAX; n];
    for (item, &w) in wins.iter().enumerate() {
        let slot = n - 1 - w;
        if order[slot] != usize::MAX {
            return Err(Error::CyclicPreference);
        }
        order[slot] = item;
    }
    Ok(Ranking { order })
}

/// The set `{r_1, ..., r_k}`, sorted by index.
pub fn true_best_k(instance: &PreferenceInstance, k: usize) -> Result<Vec<ItemId>> {
    if k == 0 || k > instance.n() {
        return Err(Error::KOutOfRange { k, n: instance.n() });
    }
    Ok(ranking_of(instance)?.top(k))
}

/// Per-item gaps relative to the boundary between `r_k` and `r_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapVector {
    pub k: usize,
    pub ranking: Ranking,
    /// `item[i]` is the gap of item `i`.
    pub item: Vec<f64>,
}

impl GapVector {
    /// Gap of the k-th best item (equal to that of the (k+1)-th).
    pub fn boundary(&self) -> f64 {
        self.item[self.ranking.order()[self.k - 1]]
    }

    /// All items share the same gap `g`; item `i` is ranked `i`-th.
    pub fn uniform(n: usize, k: usize, g: f64) -> Self {
        GapVector { k, ranking: Ranking { order: (0..n).collect() }, item: vec![g; n] }
    }
}

pub fn gap_vector(instance: &PreferenceInstance, k: usize) -> Result<GapVector> {
    let n = instance.n();
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, n });
    }
    let ranking = ranking_of(instance)?;
    let order = ranking.order();
    let (kth, next) = (order[k - 1], order[k]);
    let mut item = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        item[i] = if rank < k { instance.gap(i, next) } else { instance.gap(kth, i) };
    }
    Ok(GapVector { k, ranking, item })
}

/// Target size and accuracy parameters for one selection call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub k: usize,
    /// Error tolerance, used by the PAC algorithms only.
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub delta: f64,
}

impl SelectionParams {
    /// Checks the top-level contract `1 ≤ k ≤ n/2` and `ε, δ ∈ (0, 1/2)`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || 2 * self.k > n {
            return Err(Error::KOutOfRange { k: self.k, n });
        }
        check_open_half("delta", self.delta)?;
        if let Some(eps) = self.epsilon {
            check_open_half("epsilon", eps)?;
        }
        Ok(())
    }
}

pub(crate) fn check_open_half(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 0.5 {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} not in (0, 1/2)")))
    }
}

/// One outer-loop round of a selection algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Size of the candidate set at the start of the round.
    pub survivors: usize,
    /// Items already accepted (SEEKS only, otherwise 0).
    pub accepted: usize,
    pub pivot: Option<ItemId>,
    /// Tolerance used this round (ε_t or α_t).
    pub tolerance: f64,
    /// Confidence parameter used this round (δ_t).
    pub confidence: f64,
    pub comparisons: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Selected items, sorted by index.
    pub selected: Vec<ItemId>,
    pub comparisons: u64,
    pub rounds: usize,
    pub trace: Vec<RoundRecord>,
    /// Set when the output had to be truncated or padded by a fallback rule.
    pub flagged: bool,
}
