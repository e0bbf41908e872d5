//! Sample-complexity expressions with all constants set to one.
//!
//! These are the Θ-expressions of the lower and upper bounds, evaluated with
//! natural logarithms. They describe growth rates, not comparison counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GapVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub epsilon: f64,
    pub delta: f64,
    /// Required by the exact-selection bounds only.
    #[serde(default)]
    pub gaps: Option<GapVector>,
}

impl BoundQuery {
    /// Query where every item has gap `gap`.
    pub fn uniform(n: usize, k: usize, gap: f64, delta: f64) -> Self {
        BoundQuery { n, k, epsilon: 0.0, delta, gaps: Some(GapVector::uniform(n, k, gap)) }
    }

    /// True when `ε, δ` lie where the PAC lower bound is stated.
    pub fn in_pac_range(&self) -> bool {
        self.epsilon > 0.0 && self.epsilon < 0.5 && self.delta > 0.0 && self.delta < 0.5
    }

    fn gaps(&self) -> Result<&GapVector> {
        let g = self.gaps.as_ref().ok_or_else(|| Error::param("gaps", "exact-selection bounds need a gap vector"))?;
        if let Some(i) = g.item.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::ZeroGap(i));
        }
        Ok(g)
    }
}

/// `ln ln (1/Δ)`, clamped to 0 once `Δ ≥ 1/e`.
pub fn log_log_inv(gap: f64) -> f64 {
    let inner = (1.0 / gap).ln();
    if inner <= 1.0 {
        0.0
    } else {
        inner.ln()
    }
}

/// `n ε^{-2} ln(k/δ)`.
pub fn pac_lower_bound(q: &BoundQuery) -> f64 {
    if !q.in_pac_range() {
        log::warn!("pac_lower_bound: epsilon={} delta={} outside (0, 1/2)", q.epsilon, q.delta);
    }
    q.n as f64 / (q.epsilon * q.epsilon) * (q.k as f64 / q.delta).ln()
}

/// `Σ_i Δ_i^{-2} ln(1/δ) + ln ln(1/Δ_{r_k})`.
pub fn exact_lower_bound(q: &BoundQuery) -> Result<f64> {
    let g = q.gaps()?;
    let log_inv_delta = (1.0 / q.delta).ln();
    let sum: f64 = g.item.iter().map(|d| log_inv_delta / (d * d)).sum();
    Ok(sum + log_log_inv(g.boundary()))
}

/// `Σ_{i≠r_1} Δ_i^{-2} (ln(1/δ) + ln ln(1/Δ_i))`.
pub fn seebs_upper_bound(q: &BoundQuery) -> Result<f64> {
    let g = q.gaps()?;
    let best = g.ranking.order()[0];
    let log_inv_delta = (1.0 / q.delta).ln();
    Ok(g.item
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &d)| (log_inv_delta + log_log_inv(d)) / (d * d))
        .sum())
}

/// `Σ_i Δ_i^{-2} (ln(n/δ) + ln ln(1/Δ_i))`.
pub fn seeks_upper_bound(q: &BoundQuery) -> Result<f64> {
    let g = q.gaps()?;
    let log_n_delta = (q.n as f64 / q.delta).ln();
    Ok(g.item.iter().map(|&d| (log_n_delta + log_log_inv(d)) / (d * d)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    pub lower: f64,
    pub upper_k1: f64,
    pub upper_kgt1: f64,
}

/// Bounds with every gap equal to `gap`, one row per grid point.
pub fn growth_table(gap: f64, delta: f64, k: usize, n_grid: &[usize]) -> Result<Vec<GrowthRow>> {
    if n_grid.is_empty() {
        return Err(Error::param("n_grid", "grid is empty"));
    }
    n_grid
        .iter()
        .map(|&n| {
            if n <= k {
                return Err(Error::KOutOfRange { k, n });
            }
            let q = BoundQuery::uniform(n, k, gap, delta);
            Ok(GrowthRow {
                n,
                lower: exact_lower_bound(&q)?,
                upper_k1: seebs_upper_bound(&q)?,
                upper_kgt1: seeks_upper_bound(&q)?,
            })
        })
        .collect()
}

pub const GROWTH_CSV_HEADER: &str =
    "n,lower (Θ-expression; constants omitted),upper_k1 (Θ-expression; constants omitted),upper_kgt1 (Θ-expression; constants omitted)";

pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let mut out = String::from(GROWTH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.n, r.lower, r.upper_k1, r.upper_kgt1));
    }
    out
}

/// Parses `a,b,c` lists or `start:stop:step` ranges, where `step` may be
/// `log` for four points per decade.
pub fn parse_grid(spec: &str) -> Result<Vec<usize>> {
    let bad = |why: &str| Error::param("n_grid", format!("{spec:?}: {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [list] => list
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad("not an integer")))
            .collect::<Result<Vec<_>>>()?,
        [start, stop, step] => {
            let start: usize = start.trim().parse().map_err(|_| bad("bad start"))?;
            let stop: usize = stop.trim().parse().map_err(|_| bad("bad stop"))?;
            if start == 0 || stop < start {
                return Err(bad("need 0 < start <= stop"));
            }
            if step.trim() == "log" {
                let mut v = Vec::new();
                let mut i = 0;
                loop {
                    let x = (start as f64 * 10f64.powf(i as f64 / 4.0)).round() as usize;
                    if x > stop {
                        break;
                    }
                    if v.last() != Some(&x) {
                        v.push(x);
                    }
                    i += 1;
                }
                if v.last() != Some(&stop) {
                    v.push(stop);
                }
                v
            } else {
                let step: usize = step.trim().parse().map_err(|_| bad("bad step"))?;
                if step == 0 {
                    return Err(bad("step must be positive"));
                }
                (start..=stop).step_by(step).collect()
            }
        }
        _ => return Err(bad("expected a list or start:stop:step")),
    };
    if grid.is_empty() {
        return Err(bad("grid is empty"));
    }
    Ok(grid)
}
