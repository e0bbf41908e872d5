//! Ground-truth checks against a known preference matrix.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::borda_ranking;
use crate::model::{ranking_of, true_best_k, ItemId, PreferenceInstance, Ranking};

/// Largest instance validated exhaustively; beyond this use the sampled variants.
pub const EXACT_VALIDATION_CAP: usize = 2000;
/// Largest instance accepted by [`best_k_bruteforce`].
pub const BRUTE_FORCE_CAP: usize = 12;
/// Slack for floating-point noise in the triangle and γ checks.
const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A pair and its win probability `p[i][j]`.
    Pair {
        i: ItemId,
        j: ItemId,
        p: f64,
    },
    /// A triple `i, j, l` where `lhs` should not exceed `rhs`, or for SST
    /// where `lhs` should not fall below `rhs`.
    Triple {
        i: ItemId,
        j: ItemId,
        l: ItemId,
        lhs: f64,
        rhs: f64,
    },
    /// Items `i ≻ j ≻ l ≻ i` under the tournament relation.
    Cycle {
        i: ItemId,
        j: ItemId,
        l: ItemId,
    },
    Tie {
        i: ItemId,
        j: ItemId,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    fn pass() -> Self {
        Verdict { pass: true, witness: None }
    }

    fn fail(w: Witness) -> Self {
        Verdict { pass: false, witness: Some(w) }
    }
}

/// Returns a membership mask, rejecting repeated or out-of-range items.
fn membership(instance: &PreferenceInstance, u: &[ItemId]) -> Result<Vec<bool>> {
    let mut mask = vec![false; instance.n()];
    for &i in u {
        instance.check_item(i)?;
        if std::mem::replace(&mut mask[i], true) {
            return Err(Error::param("subset", format!("item {i} repeated")));
        }
    }
    Ok(mask)
}

/// `U` is (ε, |U|)-optimal when `p[i][j] ≥ 1/2 − ε` for every `i ∈ U`, `j ∉ U`.
/// The witness is the minimizing cross pair.
pub fn is_eps_k_optimal(instance: &PreferenceInstance, u: &[ItemId], epsilon: f64) -> Result<Verdict> {
    let n = instance.n();
    if u.is_empty() || u.len() > n {
        return Err(Error::WrongSize { expected: n.max(1), actual: u.len() });
    }
    let inside = membership(instance, u)?;
    let mut worst: Option<(ItemId, ItemId, f64)> = None;
    for &i in u {
        for j in (0..n).filter(|&j| !inside[j]) {
            let p = instance.prob(i, j);
            if worst.is_none_or(|(_, _, w)| p < w) {
                worst = Some((i, j, p));
            }
        }
    }
    Ok(match worst {
        Some((i, j, p)) if p < 0.5 - epsilon => Verdict::fail(Witness::Pair { i, j, p }),
        _ => Verdict::pass(),
    })
}

/// Passes iff `u` is exactly the best-`k` set of the tournament ranking.
pub fn is_exact_best_k(instance: &PreferenceInstance, u: &[ItemId], k: usize) -> Result<Verdict> {
    if u.len() != k {
        return Err(Error::WrongSize { expected: k, actual: u.len() });
    }
    let truth = true_best_k(instance, k)?;
    exact_against(instance, u, &truth)
}

/// Like [`is_exact_best_k`] but against an explicit ground-truth ranking
/// (e.g. Borda order for data without a strict order).
pub fn is_exact_best_k_in(instance: &PreferenceInstance, u: &[ItemId], truth: &Ranking) -> Result<Verdict> {
    exact_against(instance, u, &truth.top(u.len()))
}

fn exact_against(instance: &PreferenceInstance, u: &[ItemId], truth: &[ItemId]) -> Result<Verdict> {
    let inside = membership(instance, u)?;
    let intruder = u.iter().copied().find(|i| !truth.contains(i));
    let missing = truth.iter().copied().find(|&j| !inside[j]);
    Ok(match (intruder, missing) {
        (Some(i), Some(j)) => Verdict::fail(Witness::Pair { i, j, p: instance.prob(i, j) }),
        _ => Verdict::pass(),
    })
}

/// Some 3-cycle of the tournament relation; exists whenever the relation is
/// a strict tournament but not transitive.
fn find_cycle(instance: &PreferenceInstance) -> Option<Witness> {
    let n = instance.n();
    let beats = |a: ItemId, b: ItemId| instance.prob(a, b) > 0.5;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i && beats(i, j)) {
            if let Some(l) = (0..n).find(|&l| l != i && l != j && beats(j, l) && beats(l, i)) {
                return Some(Witness::Cycle { i, j, l });
            }
        }
    }
    None
}

fn tournament_order(instance: &PreferenceInstance) -> std::result::Result<Ranking, Verdict> {
    match ranking_of(instance) {
        Ok(r) => Ok(r),
        Err(Error::NotStrictOrder(i, j)) => Err(Verdict::fail(Witness::Tie { i, j })),
        Err(_) => Err(Verdict { pass: false, witness: find_cycle(instance) }),
    }
}

fn sst_triple(instance: &PreferenceInstance, i: ItemId, j: ItemId, l: ItemId) -> Option<Witness> {
    let lhs = instance.prob(i, l);
    let rhs = instance.prob(i, j).max(instance.prob(j, l));
    (lhs < rhs).then_some(Witness::Triple { i, j, l, lhs, rhs })
}

/// Strong stochastic transitivity: a strict order exists (so every `i ≻ j`
/// has `p[i][j] > 1/2`) and `p[i][l] ≥ max(p[i][j], p[j][l])` for
/// `i ≻ j ≻ l`. Reports the first violating triple in rank order.
pub fn validate_sst(instance: &PreferenceInstance) -> Verdict {
    if instance.n() <= 1 {
        return Verdict::pass();
    }
    let ranking = match tournament_order(instance) {
        Ok(r) => r,
        Err(v) => return v,
    };
    let r = ranking.order();
    let n = r.len();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                if let Some(w) = sst_triple(instance, r[a], r[b], r[c]) {
                    return Verdict::fail(w);
                }
            }
        }
    }
    Verdict::pass()
}

fn sti_excess(instance: &PreferenceInstance, i: ItemId, j: ItemId, l: ItemId) -> (f64, f64, f64) {
    let lhs = instance.gap(i, l);
    let rhs = instance.gap(i, j) + instance.gap(j, l);
    (lhs - rhs, lhs, rhs)
}

/// Stochastic triangle inequality `Δ_il ≤ Δ_ij + Δ_jl` over all triples.
/// Reports the triple with the largest violation.
pub fn validate_sti(instance: &PreferenceInstance) -> Verdict {
    let n = instance.n();
    let mut worst: Option<(f64, Witness)> = None;
    for i in 0..n {
        for l in (i + 1)..n {
            for j in (0..n).filter(|&j| j != i && j != l) {
                let (excess, lhs, rhs) = sti_excess(instance, i, j, l);
                if excess > TOL && worst.as_ref().is_none_or(|(e, _)| excess > *e) {
                    worst = Some((excess, Witness::Triple { i, j, l, lhs, rhs }));
                }
            }
        }
    }
    match worst {
        Some((_, w)) => Verdict::fail(w),
        None => Verdict::pass(),
    }
}

/// Checks `samples` uniformly drawn triples for SST instead of all of them;
/// the order itself is still verified exactly.
pub fn validate_sst_sampled<R: rand::Rng + ?Sized>(
    instance: &PreferenceInstance,
    samples: usize,
    rng: &mut R,
) -> Verdict {
    if instance.n() < 3 {
        return validate_sst(instance);
    }
    let ranking = match tournament_order(instance) {
        Ok(r) => r,
        Err(v) => return v,
    };
    let pos = ranking.positions();
    for _ in 0..samples {
        let mut t = index::sample(rng, instance.n(), 3).into_vec();
        t.sort_by_key(|&x| pos[x]);
        if let Some(w) = sst_triple(instance, t[0], t[1], t[2]) {
            return Verdict::fail(w);
        }
    }
    Verdict::pass()
}

pub fn validate_sti_sampled<R: rand::Rng + ?Sized>(
    instance: &PreferenceInstance,
    samples: usize,
    rng: &mut R,
) -> Verdict {
    if instance.n() < 3 {
        return validate_sti(instance);
    }
    for _ in 0..samples {
        let t = index::sample(rng, instance.n(), 3).into_vec();
        let (excess, lhs, rhs) = sti_excess(instance, t[0], t[1], t[2]);
        if excess > TOL {
            return Verdict::fail(Witness::Triple { i: t[0], j: t[1], l: t[2], lhs, rhs });
        }
    }
    Verdict::pass()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub pass: bool,
    pub gamma: f64,
    /// Smallest γ ≥ 1 for which both relaxed conditions hold, to 6
    /// significant digits.
    pub min_gamma: f64,
    /// Triple attaining `min_gamma`, if it exceeds 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// `tournament` or `borda`, whichever order the triples follow.
    pub order: String,
}

fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// γ-relaxed SST and STI: for `i ≻ j ≻ l`,
/// `p[i][l] ≥ max(p[i][j], p[j][l]) / γ` and `Δ_il ≤ γ (Δ_ij + Δ_jl)`.
///
/// The order is the tournament ranking when it exists and the Borda ranking
/// otherwise.
pub fn validate_gamma(instance: &PreferenceInstance, gamma: f64) -> Result<GammaReport> {
    if !(gamma >= 1.0) {
        return Err(Error::param("gamma", format!("{gamma} < 1")));
    }
    if !instance.is_strict() {
        return Err(ranking_of(instance).expect_err("non-strict instance has a tie"));
    }
    let (ranking, order) = match ranking_of(instance) {
        Ok(r) => (r, "tournament"),
        Err(_) => (borda_ranking(instance)?.0, "borda"),
    };
    let r = ranking.order();
    let n = r.len();
    let mut need = 1.0_f64;
    let mut witness = None;
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                let (i, j, l) = (r[a], r[b], r[c]);
                let top = instance.prob(i, j).max(instance.prob(j, l));
                let p_il = instance.prob(i, l);
                let ratio_p = if p_il > 0.0 { top / p_il } else { f64::INFINITY };
                let d_il = instance.gap(i, l);
                let d_sum = instance.gap(i, j) + instance.gap(j, l);
                let ratio_d = if d_sum > 0.0 {
                    d_il / d_sum
                } else if d_il > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                if ratio_p > need {
                    need = ratio_p;
                    witness = Some(Witness::Triple { i, j, l, lhs: top, rhs: p_il });
                }
                if ratio_d > need {
                    need = ratio_d;
                    witness = Some(Witness::Triple { i, j, l, lhs: d_il, rhs: d_sum });
                }
            }
        }
    }
    if need <= 1.0 + TOL {
        need = 1.0;
        witness = None;
    }
    Ok(GammaReport {
        pass: need <= gamma * (1.0 + TOL),
        gamma,
        min_gamma: round_sig(need, 6),
        witness,
        order: order.to_string(),
    })
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<ItemId>> {
    let mut next = (k <= n).then(|| (0..k).collect::<Vec<_>>());
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut c = current.clone();
        // advance to the next combination
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if c[pos] < n - k + pos {
                c[pos] += 1;
                for q in (pos + 1)..k {
                    c[q] = c[q - 1] + 1;
                }
                next = Some(c);
                break;
            }
        }
        Some(current)
    })
}

/// Exhaustive search for the `k`-set maximizing the smallest cross-pair
/// probability `min_{i∈U, j∉U} p[i][j]`. Ties keep the lexicographically
/// first set.
pub fn best_k_bruteforce(instance: &PreferenceInstance, k: usize) -> Result<Vec<ItemId>> {
    let n = instance.n();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge { n, max: BRUTE_FORCE_CAP });
    }
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut best: Option<(f64, Vec<ItemId>)> = None;
    for u in subsets(n, k) {
        let score = u
            .iter()
            .flat_map(|&i| (0..n).filter(|j| !u.contains(j)).map(move |j| instance.prob(i, j)))
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, u));
        }
    }
    Ok(best.map(|(_, u)| u).unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{equal_gap_instance, thurstone_instance};
    use crate::seed;
    use rand::Rng;

    fn three(p01: f64, p02: f64, p12: f64) -> PreferenceInstance {
        PreferenceInstance::from_rows(vec![
            vec![0.5, p01, p02],
            vec![1.0 - p01, 0.5, p12],
            vec![1.0 - p02, 1.0 - p12, 0.5],
        ])
        .unwrap()
    }

    #[test]
    fn eps_k_optimality() {
        let inst = equal_gap_instance(5, 0.6).unwrap();
        for eps in [0.0, 0.05, 0.3] {
            assert!(is_eps_k_optimal(&inst, &[0, 1], eps).unwrap().pass);
        }
        let v = is_eps_k_optimal(&inst, &[0, 4], 0.05).unwrap();
        assert!(!v.pass);
        match v.witness {
            Some(Witness::Pair { i: 4, p, .. }) => assert!((p - 0.4).abs() < 1e-12),
            other => panic!("unexpected witness {other:?}"),
        }
        assert!(is_eps_k_optimal(&inst, &[0, 4], 0.1).unwrap().pass);
        assert!(is_eps_k_optimal(&inst, &[], 0.1).is_err());
        assert!(is_eps_k_optimal(&inst, &[1, 1], 0.1).is_err());
        assert!(is_eps_k_optimal(&inst, &[7], 0.1).is_err());
    }

    #[test]
    fn exact_best_k() {
        let inst = equal_gap_instance(5, 0.6).unwrap();
        assert!(is_exact_best_k(&inst, &[1, 0], 2).unwrap().pass);
        assert!(!is_exact_best_k(&inst, &[0, 2], 2).unwrap().pass);
        assert!(is_exact_best_k(&inst, &[0], 2).is_err());
        let tie = PreferenceInstance::from_upper(3, |_, _| 0.5).unwrap();
        assert!(matches!(is_exact_best_k(&tie, &[0], 1), Err(Error::NotStrictOrder(..))));
    }

    #[test]
    fn sst_examples() {
        assert!(validate_sst(&equal_gap_instance(6, 0.6).unwrap()).pass);
        assert!(validate_sst(&equal_gap_instance(1, 0.6).unwrap()).pass);
        let v = validate_sst(&three(0.6, 0.55, 0.6));
        assert_eq!(v.witness, Some(Witness::Triple { i: 0, j: 1, l: 2, lhs: 0.55, rhs: 0.6 }));
        let cyc = three(0.7, 0.3, 0.7);
        assert!(matches!(validate_sst(&cyc).witness, Some(Witness::Cycle { .. })));
        let tie = three(0.5, 0.6, 0.6);
        assert_eq!(validate_sst(&tie).witness, Some(Witness::Tie { i: 0, j: 1 }));
    }

    #[test]
    fn sti_examples() {
        assert!(validate_sti(&equal_gap_instance(5, 0.6).unwrap()).pass);
        let v = validate_sti(&three(0.6, 0.95, 0.6));
        assert!(!v.pass);
        let Some(Witness::Triple { i, j, l, lhs, rhs }) = v.witness else { panic!() };
        assert_eq!((i, j, l), (0, 1, 2));
        assert!((lhs - 0.45).abs() < 1e-12 && (rhs - 0.2).abs() < 1e-12);
    }

    #[test]
    fn thurstone_passes_both() {
        let mut rng = seed::rng_from(4);
        for _ in 0..20 {
            let theta: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let inst = thurstone_instance(&theta, 1.0).unwrap();
            assert!(validate_sst(&inst).pass);
            assert!(validate_sti(&inst).pass);
            assert!(validate_gamma(&inst, 1.0).unwrap().pass);
        }
    }

    #[test]
    fn gamma_relaxation() {
        let inst = three(0.6, 0.95, 0.6);
        let rep = validate_gamma(&inst, 1.0).unwrap();
        assert!(!rep.pass);
        assert!((rep.min_gamma - 2.25).abs() < 1e-9, "{}", rep.min_gamma);
        assert!(validate_gamma(&inst, 2.25).unwrap().pass);
        assert!(validate_gamma(&inst, 1000.0).unwrap().pass);
        assert!(validate_gamma(&inst, 0.5).is_err());

        // cyclic data falls back to Borda order
        let cyc = three(0.7, 0.3, 0.7);
        let rep = validate_gamma(&cyc, 1000.0).unwrap();
        assert_eq!(rep.order, "borda");
    }

    #[test]
    fn sampled_validators_agree_on_clean_instances() {
        let inst = equal_gap_instance(30, 0.6).unwrap();
        let mut rng = seed::rng_from(1);
        assert!(validate_sst_sampled(&inst, 500, &mut rng).pass);
        assert!(validate_sti_sampled(&inst, 500, &mut rng).pass);
        let bad = three(0.6, 0.95, 0.6);
        assert!(!validate_sti_sampled(&bad, 50, &mut rng).pass);
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(4, 2).count(), 6);
        assert_eq!(subsets(5, 0).count(), 1);
        assert_eq!(subsets(3, 4).count(), 0);
        assert_eq!(subsets(12, 6).count(), 924);
        assert_eq!(subsets(3, 2).collect::<Vec<_>>(), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn brute_force_best_k() {
        assert_eq!(best_k_bruteforce(&equal_gap_instance(6, 0.6).unwrap(), 2).unwrap(), vec![0, 1]);
        assert!(best_k_bruteforce(&equal_gap_instance(13, 0.6).unwrap(), 2).is_err());
    }
}
