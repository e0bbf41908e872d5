//! Seeded multi-trial experiment runner.
//!
//! Trial `i` at sweep point `p` draws all of its randomness from
//! `seed::trial_seed(master_seed, p, i)`: the oracle stream from
//! `derive(seed, STREAM_ORACLE)` and the algorithm's pivot/shuffle stream from
//! `derive(seed, STREAM_ALGORITHM)`. Results are therefore independent of how
//! trials are scheduled across threads.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::ingest::borda_ranking;
use crate::model::{ranking_of, ItemId, PreferenceInstance, Ranking, SelectionParams};
use crate::oracle::{ComparisonOracle, InstanceSpec, MatrixOracle, Model};
use crate::seed;
use crate::selection::{self, Algorithm, PacSelector};
use crate::verify;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "RANK_THREADS";

pub const CSV_HEADER: &str = "x,trial,seed,comparisons,pac_correct,exact_correct,elapsed,sd_comparisons";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("trial {trial} at sweep point {point}: {source}")]
    Trial { point: usize, trial: usize, source: Error },
    #[error("thread pool: {0}")]
    Pool(String),
}

fn config_err(path: impl Into<String>, message: impl ToString) -> HarnessError {
    HarnessError::Config { path: path.into(), message: message.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    N,
    K,
    Epsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub algorithm: Algorithm,
    pub params: SelectionParams,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    /// Write measured wall time into the `elapsed` column. Off by default so
    /// output files are reproducible byte for byte.
    #[serde(default)]
    pub record_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub point: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub comparisons: u64,
    pub elapsed: Option<f64>,
    pub pac_correct: bool,
    pub exact_correct: bool,
    pub returned: Vec<ItemId>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub point: usize,
    pub x: Option<f64>,
    pub trials: usize,
    pub mean_comparisons: Option<f64>,
    pub sd_comparisons: Option<f64>,
    pub pac_rate: Option<f64>,
    pub exact_rate: Option<f64>,
    pub mean_elapsed: Option<f64>,
}

impl Aggregate {
    pub fn is_empty(&self) -> bool {
        self.trials == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub trials: Vec<TrialReport>,
    pub aggregates: Vec<Aggregate>,
}

/// One fully resolved sweep point.
struct Point {
    x: Option<f64>,
    instance: Arc<PreferenceInstance>,
    params: SelectionParams,
    truth: Ranking,
}

fn as_count(axis: &str, v: f64) -> Result<usize, HarnessError> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(config_err(axis, format!("{v} is not a positive integer")))
    }
}

impl ExperimentConfig {
    fn points(&self) -> Result<Vec<Point>, HarnessError> {
        let xs: Vec<Option<f64>> = match &self.sweep {
            None => vec![None],
            Some(s) if s.values.is_empty() => return Err(config_err("sweep.values", "empty grid")),
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
        };
        xs.into_iter()
            .enumerate()
            .map(|(idx, x)| {
                let mut spec = self.instance.clone();
                let mut params = self.params;
                if let (Some(sweep), Some(v)) = (&self.sweep, x) {
                    let path = format!("sweep.values[{idx}]");
                    match sweep.axis {
                        SweepAxis::N => {
                            if !matches!(spec.model, Model::EqualGap { .. } | Model::UniformGap { .. }) {
                                return Err(config_err(
                                    "sweep.axis",
                                    "n can only be swept for equal_gap and uniform_gap",
                                ));
                            }
                            spec.n = as_count(&path, v)?;
                        }
                        SweepAxis::K => params.k = as_count(&path, v)?,
                        SweepAxis::Epsilon => params.epsilon = Some(v),
                    }
                }
                self.resolve(spec, params, x)
            })
            .collect()
    }

    fn resolve(&self, spec: InstanceSpec, params: SelectionParams, x: Option<f64>) -> Result<Point, HarnessError> {
        let instance = spec.build().map_err(|e| config_err("instance", e))?;
        let n = instance.n();
        if params.k == 0 || 2 * params.k > n {
            return Err(config_err("params.k", format!("k = {} must satisfy 1 <= k <= n/2 (n = {n})", params.k)));
        }
        if !(params.delta > 0.0 && params.delta < 0.5) {
            return Err(config_err("params.delta", format!("{} not in (0, 1/2)", params.delta)));
        }
        match params.epsilon {
            Some(e) if !(e > 0.0 && e < 0.5) => {
                return Err(config_err("params.epsilon", format!("{e} not in (0, 1/2)")))
            }
            None if self.algorithm.is_pac() => {
                return Err(config_err("params.epsilon", format!("required by {}", self.algorithm.name())))
            }
            _ => {}
        }
        if self.algorithm == Algorithm::Seebs && params.k != 1 {
            return Err(config_err("params.k", "seebs selects a single item (k = 1)"));
        }
        let truth = match ranking_of(&instance) {
            Ok(r) => r,
            Err(_) => borda_ranking(&instance).map_err(|e| config_err("instance", e))?.0,
        };
        Ok(Point { x, instance: Arc::new(instance), params, truth })
    }

    /// Checks every sweep point without running anything.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.points().map(|_| ())
    }
}

/// Runs `algorithm` once on all items of `oracle`.
pub fn run_algorithm<O, R>(
    algorithm: Algorithm,
    oracle: &mut O,
    params: &SelectionParams,
    rng: &mut R,
) -> Result<crate::model::SelectionResult, Error>
where
    O: ComparisonOracle + ?Sized,
    R: rand::Rng + ?Sized,
{
    let items: Vec<ItemId> = (0..oracle.n()).collect();
    let (k, delta) = (params.k, params.delta);
    let eps = || params.epsilon.ok_or_else(|| Error::param("epsilon", "required for PAC selection"));
    match algorithm {
        Algorithm::Eqs => selection::epsilon_quick_select(oracle, &items, k, eps()?, delta, rng),
        Algorithm::Tks => selection::tournament_k_select(oracle, &items, k, eps()?, delta, rng),
        Algorithm::Seebs => selection::seebs(oracle, &items, delta, rng),
        Algorithm::Seeks => selection::seeks(oracle, &items, k, delta, rng, PacSelector::Tks),
        Algorithm::SeeksV2 => selection::seeks(oracle, &items, k, delta, rng, PacSelector::Eqs),
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    point_idx: usize,
    point: &Point,
    trial: usize,
) -> Result<TrialReport, HarnessError> {
    let trial_seed = seed::trial_seed(cfg.master_seed, point_idx, trial);
    let mut oracle = MatrixOracle::new(point.instance.clone(), seed::derive(trial_seed, seed::STREAM_ORACLE));
    let mut rng = seed::rng_from(seed::derive(trial_seed, seed::STREAM_ALGORITHM));
    let wrap = |source| HarnessError::Trial { point: point_idx, trial, source };

    let started = Instant::now();
    let result = run_algorithm(cfg.algorithm, &mut oracle, &point.params, &mut rng).map_err(wrap)?;
    let elapsed = started.elapsed().as_secs_f64();
    debug_assert_eq!(result.comparisons, oracle.comparisons());

    let inst = &point.instance;
    let eps = point.params.epsilon.unwrap_or(0.0);
    let pac = verify::is_eps_k_optimal(inst, &result.selected, eps).map_err(wrap)?;
    let exact = verify::is_exact_best_k_in(inst, &result.selected, &point.truth).map_err(wrap)?;
    Ok(TrialReport {
        point: point_idx,
        trial_index: trial,
        seed: trial_seed,
        comparisons: result.comparisons,
        elapsed: cfg.record_timing.then_some(elapsed),
        pac_correct: pac.pass,
        exact_correct: exact.pass,
        returned: result.selected,
        flagged: result.flagged,
    })
}

fn aggregate(point: usize, x: Option<f64>, trials: &[TrialReport]) -> Aggregate {
    let count = trials.len();
    if count == 0 {
        return Aggregate {
            point,
            x,
            trials: 0,
            mean_comparisons: None,
            sd_comparisons: None,
            pac_rate: None,
            exact_rate: None,
            mean_elapsed: None,
        };
    }
    let total: u128 = trials.iter().map(|t| t.comparisons as u128).sum();
    let mean = total as f64 / count as f64;
    let sd = if count > 1 {
        let ss: f64 = trials.iter().map(|t| (t.comparisons as f64 - mean).powi(2)).sum();
        (ss / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    let rate = |f: fn(&TrialReport) -> bool| trials.iter().filter(|t| f(t)).count() as f64 / count as f64;
    let mean_elapsed = trials.iter().map(|t| t.elapsed).sum::<Option<f64>>().map(|s| s / count as f64);
    Aggregate {
        point,
        x,
        trials: count,
        mean_comparisons: Some(mean),
        sd_comparisons: Some(sd),
        pac_rate: Some(rate(|t| t.pac_correct)),
        exact_rate: Some(rate(|t| t.exact_correct)),
        mean_elapsed,
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every trial of every sweep point on `threads` workers (rayon's
/// default when `None`). Output is sorted by `(point, trial)`.
pub fn run_experiment_with_threads(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentReport, HarnessError> {
    let points = cfg.points()?;
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let run = || -> Result<Vec<TrialReport>, HarnessError> {
        jobs.par_iter().map(|&(p, t)| run_trial(cfg, p, &points[p], t)).collect()
    };
    let mut trials = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    trials.sort_by_key(|t| (t.point, t.trial_index));
    let aggregates = points
        .iter()
        .enumerate()
        .map(|(p, point)| {
            let lo = trials.partition_point(|t| t.point < p);
            let hi = trials.partition_point(|t| t.point <= p);
            aggregate(p, point.x, &trials[lo..hi])
        })
        .collect();
    Ok(ExperimentReport { trials, aggregates })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    run_experiment_with_threads(cfg, threads_from_env())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl ExperimentReport {
    /// Trial rows followed by one `AGG` row per sweep point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for agg in &self.aggregates {
            let x = agg.x.map(|v| v.to_string()).unwrap_or_default();
            for t in self.trials.iter().filter(|t| t.point == agg.point) {
                let _ = writeln!(
                    out,
                    "{x},{},{},{},{},{},{},",
                    t.trial_index,
                    t.seed,
                    t.comparisons,
                    u8::from(t.pac_correct),
                    u8::from(t.exact_correct),
                    opt(t.elapsed),
                );
            }
            let _ = writeln!(
                out,
                "{x},AGG,,{},{},{},{},{}",
                opt(agg.mean_comparisons),
                opt(agg.pac_rate),
                opt(agg.exact_rate),
                opt(agg.mean_elapsed),
                opt(agg.sd_comparisons),
            );
        }
        out
    }
}
