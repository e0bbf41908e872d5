use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ItemId;
use crate::oracle::ComparisonOracle;

/// Upper limit on the per-call comparison budget `t_max`.
pub const T_MAX_CAP: u64 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiParams {
    pub epsilon: f64,
    /// Upper shift `s_u ≥ 0`.
    pub s_up: f64,
    /// Lower shift `s_d ≥ 0`.
    pub s_down: f64,
    pub delta: f64,
}

impl DiParams {
    pub fn new(epsilon: f64, s_up: f64, s_down: f64, delta: f64) -> Self {
        DiParams { epsilon, s_up, s_down, delta }
    }

    fn validate(&self) -> Result<()> {
        super::check_tolerance(self.epsilon)?;
        super::check_confidence(self.delta)?;
        if !(self.s_up >= 0.0 && self.s_down >= 0.0) {
            return Err(Error::param("shift", "shifts must be non-negative"));
        }
        Ok(())
    }

    /// `⌈(2/ε²) ln(4/δ)⌉`.
    pub fn t_max(&self) -> Result<u64> {
        self.validate()?;
        let t = (2.0 / (self.epsilon * self.epsilon) * (4.0 / self.delta).ln()).ceil();
        if t > T_MAX_CAP as f64 {
            return Err(Error::BudgetTooLarge(t));
        }
        Ok(t as u64)
    }
}

/// Anytime confidence radius `b_t = sqrt(ln(π² t² / (3δ)) / (2t))`.
pub fn confidence_radius(t: u64, delta: f64) -> f64 {
    let t = t as f64;
    ((PI * PI * t * t / (3.0 * delta)).ln() / (2.0 * t)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bucket {
    Up,
    Mid,
    Down,
}

/// Three disjoint piles filled by [`distribute_item`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Buckets {
    pub up: Vec<ItemId>,
    pub mid: Vec<ItemId>,
    pub down: Vec<ItemId>,
}

impl Buckets {
    /// Empty piles with `pivot` in the middle one.
    pub fn around(pivot: ItemId) -> Self {
        Buckets { mid: vec![pivot], ..Default::default() }
    }

    pub fn insert(&mut self, bucket: Bucket, item: ItemId) {
        match bucket {
            Bucket::Up => self.up.push(item),
            Bucket::Mid => self.mid.push(item),
            Bucket::Down => self.down.push(item),
        }
    }

    pub fn distribute<O: ComparisonOracle + ?Sized>(
        &mut self,
        oracle: &mut O,
        item: ItemId,
        pivot: ItemId,
        params: &DiParams,
    ) -> Result<Bucket> {
        let b = distribute_item(oracle, item, pivot, params)?;
        self.insert(b, item);
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.up.len() + self.mid.len() + self.down.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when the piles are pairwise disjoint and together hold exactly `items`.
    pub fn partitions(&self, items: &[ItemId]) -> bool {
        let mut all: Vec<ItemId> = self.up.iter().chain(&self.mid).chain(&self.down).copied().collect();
        let mut expected = items.to_vec();
        all.sort_unstable();
        expected.sort_unstable();
        all == expected
    }
}

/// Compares `item` against `pivot` until a confidence interval on the win
/// rate clears `1/2 + s_u` (up) or `1/2 − s_d` (down), or the budget `t_max`
/// runs out, in which case the empirical rate is tested against
/// `1/2 ± (ε/2 + shift)` and anything in between goes to the middle pile.
pub fn distribute_item<O: ComparisonOracle + ?Sized>(
    oracle: &mut O,
    item: ItemId,
    pivot: ItemId,
    params: &DiParams,
) -> Result<Bucket> {
    if item == pivot {
        return Err(Error::IdenticalItems(item));
    }
    let t_max = params.t_max()?;
    let upper = 0.5 + params.s_up;
    let lower = 0.5 - params.s_down;
    let mut wins = 0u64;
    for t in 1..=t_max {
        if oracle.compare(item, pivot)? == item {
            wins += 1;
        }
        let rate = wins as f64 / t as f64;
        let b = confidence_radius(t, params.delta);
        if rate - b > upper {
            return Ok(Bucket::Up);
        }
        if rate + b < lower {
            return Ok(Bucket::Down);
        }
    }
    let rate = wins as f64 / t_max as f64;
    let half_eps = params.epsilon / 2.0;
    Ok(if rate > upper + half_eps {
        Bucket::Up
    } else if rate < lower - half_eps {
        Bucket::Down
    } else {
        Bucket::Mid
    })
}
