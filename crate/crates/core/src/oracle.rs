//! Noisy comparison oracles.
//!
//! Every selection algorithm talks to a [`ComparisonOracle`]. The matrix
//! oracle samples outcomes from a [`PreferenceInstance`]; the arm oracles
//! answer comparisons by pulling bandit arms through the Bernoulli and
//! Gaussian reduction procedures.

use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{self, MissingPolicy};
use crate::model::{ItemId, PreferenceInstance};
use crate::seed::{self, Rng};
use crate::verify;

/// Maximum number of redraws when a uniform-gap instance must pass SST/STI.
pub const ENFORCE_ATTEMPTS: usize = 1000;

pub trait ComparisonOracle {
    fn n(&self) -> usize;

    /// Compares `i` and `j` once and returns the winner.
    fn compare(&mut self, i: ItemId, j: ItemId) -> Result<ItemId>;

    /// Total comparisons served so far.
    fn comparisons(&self) -> u64;

    fn check_pair(&self, i: ItemId, j: ItemId) -> Result<()> {
        let n = self.n();
        for item in [i, j] {
            if item >= n {
                return Err(Error::ItemOutOfRange { item, n });
            }
        }
        if i == j {
            return Err(Error::IdenticalItems(i));
        }
        Ok(())
    }
}

impl<O: ComparisonOracle + ?Sized> ComparisonOracle for &mut O {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn compare(&mut self, i: ItemId, j: ItemId) -> Result<ItemId> {
        (**self).compare(i, j)
    }

    fn comparisons(&self) -> u64 {
        (**self).comparisons()
    }
}

/// Samples outcomes from a fixed matrix: `i` wins with probability `p[i][j]`.
#[derive(Debug, Clone)]
pub struct MatrixOracle {
    instance: Arc<PreferenceInstance>,
    rng: Rng,
    count: u64,
}

impl MatrixOracle {
    pub fn new(instance: Arc<PreferenceInstance>, seed: u64) -> Self {
        MatrixOracle { instance, rng: seed::rng_from(seed), count: 0 }
    }

    pub fn instance(&self) -> &PreferenceInstance {
        &self.instance
    }
}

impl ComparisonOracle for MatrixOracle {
    fn n(&self) -> usize {
        self.instance.n()
    }

    fn compare(&mut self, i: ItemId, j: ItemId) -> Result<ItemId> {
        self.check_pair(i, j)?;
        self.count += 1;
        let u: f64 = self.rng.random();
        Ok(if u < self.instance.prob(i, j) { i } else { j })
    }

    fn comparisons(&self) -> u64 {
        self.count
    }
}

/// Inverts every outcome of the wrapped oracle; the counter is shared.
#[derive(Debug, Clone)]
pub struct Flipped<O>(pub O);

pub fn flipped<O: ComparisonOracle>(oracle: O) -> Flipped<O> {
    Flipped(oracle)
}

impl<O: ComparisonOracle> ComparisonOracle for Flipped<O> {
    fn n(&self) -> usize {
        self.0.n()
    }

    fn compare(&mut self, i: ItemId, j: ItemId) -> Result<ItemId> {
        let winner = self.0.compare(i, j)?;
        Ok(if winner == i { j } else { i })
    }

    fn comparisons(&self) -> u64 {
        self.0.comparisons()
    }
}

// ---------------------------------------------------------------------------
// Instance generators

pub fn equal_gap_instance(n: usize, p_win: f64) -> Result<PreferenceInstance> {
    if !(p_win > 0.5 && p_win <= 1.0) {
        return Err(Error::param("p_win", format!("{p_win} not in (1/2, 1]")));
    }
    PreferenceInstance::from_upper(n, |_, _| p_win)
}

/// Draws `p[i][j] = 1/2 + U`, `U ~ Uniform[lo, hi]`, for every `i < j`.
///
/// With `enforce`, whole instances are redrawn until they pass both SST and
/// STI, giving up after [`ENFORCE_ATTEMPTS`].
pub fn uniform_gap_instance(n: usize, lo: f64, hi: f64, enforce: bool, rng: &mut Rng) -> Result<PreferenceInstance> {
    if !(lo > 0.0 && lo <= hi && hi <= 0.5) {
        return Err(Error::param("lo/hi", format!("need 0 < lo <= hi <= 1/2, got ({lo}, {hi})")));
    }
    for _ in 0..ENFORCE_ATTEMPTS {
        let inst = PreferenceInstance::from_upper(n, |_, _| 0.5 + rng.random_range(lo..=hi))?;
        if !enforce || (verify::validate_sst(&inst).pass && verify::validate_sti(&inst).pass) {
            return Ok(inst);
        }
    }
    Err(Error::EnforceFailed(ENFORCE_ATTEMPTS))
}

/// Multinomial-logit (Bradley–Terry–Luce) matrix `θ_i / (θ_i + θ_j)`.
pub fn mnl_instance(scores: &[f64]) -> Result<PreferenceInstance> {
    if let Some(bad) = scores.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::param("scores", format!("score {bad} is not positive")));
    }
    PreferenceInstance::from_upper(scores.len(), |i, j| scores[i] / (scores[i] + scores[j]))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Thurstone matrix `Φ((θ_i − θ_j) / (σ√2))`.
pub fn thurstone_instance(scores: &[f64], sigma: f64) -> Result<PreferenceInstance> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("{sigma} is not positive")));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::param("scores", "scores must be finite"));
    }
    PreferenceInstance::from_upper(scores.len(), |i, j| {
        normal_cdf((scores[i] - scores[j]) / (sigma * std::f64::consts::SQRT_2))
    })
}

pub fn make_equal_gap(n: usize, p_win: f64, seed: u64) -> Result<MatrixOracle> {
    Ok(MatrixOracle::new(Arc::new(equal_gap_instance(n, p_win)?), seed))
}

/// The instance is drawn from a stream derived from `seed`; comparisons use
/// `seed` itself, so `lo == hi == g` reproduces `make_equal_gap(n, 1/2 + g, seed)`.
pub fn make_uniform_gap(n: usize, lo: f64, hi: f64, seed: u64) -> Result<MatrixOracle> {
    let mut rng = seed::rng_from(seed::derive(seed, seed::STREAM_INSTANCE));
    let inst = uniform_gap_instance(n, lo, hi, false, &mut rng)?;
    Ok(MatrixOracle::new(Arc::new(inst), seed))
}

pub fn make_mnl(scores: &[f64], seed: u64) -> Result<MatrixOracle> {
    Ok(MatrixOracle::new(Arc::new(mnl_instance(scores)?), seed))
}

pub fn make_thurstone(scores: &[f64], sigma: f64, seed: u64) -> Result<MatrixOracle> {
    Ok(MatrixOracle::new(Arc::new(thurstone_instance(scores, sigma)?), seed))
}

pub fn make_empirical(instance: PreferenceInstance, seed: u64) -> MatrixOracle {
    MatrixOracle::new(Arc::new(instance), seed)
}

// ---------------------------------------------------------------------------
// Serializable instance description

/// Generating model of an instance. Serialized with a `model` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    EqualGap {
        p_win: f64,
    },
    UniformGap {
        lo: f64,
        hi: f64,
        #[serde(default)]
        enforce: bool,
    },
    Mnl {
        scores: Vec<f64>,
    },
    Thurstone {
        scores: Vec<f64>,
        sigma: f64,
    },
    Empirical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pwg: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<PreferenceInstance>,
        #[serde(default)]
        missing: MissingPolicy,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub model: Model,
    pub n: usize,
    /// Seed for randomly drawn instances (uniform gap).
    #[serde(default)]
    pub seed: u64,
}

impl InstanceSpec {
    /// The uniform-gap preset with gaps in `(0.5Δ, 1.5Δ)`, Δ = 0.1.
    pub fn uniform_gap_preset(n: usize, seed: u64) -> Self {
        InstanceSpec { model: Model::UniformGap { lo: 0.05, hi: 0.15, enforce: false }, n, seed }
    }

    /// The alternative preset with `p[i][j] ~ Uniform(0.55, 0.7)`.
    pub fn uniform_gap_wide_preset(n: usize, seed: u64) -> Self {
        InstanceSpec { model: Model::UniformGap { lo: 0.05, hi: 0.2, enforce: false }, n, seed }
    }

    pub fn build(&self) -> Result<PreferenceInstance> {
        let inst = match &self.model {
            Model::EqualGap { p_win } => equal_gap_instance(self.n, *p_win)?,
            Model::UniformGap { lo, hi, enforce } => {
                let mut rng = seed::rng_from(seed::derive(self.seed, seed::STREAM_INSTANCE));
                uniform_gap_instance(self.n, *lo, *hi, *enforce, &mut rng)?
            }
            Model::Mnl { scores } => mnl_instance(scores)?,
            Model::Thurstone { scores, sigma } => thurstone_instance(scores, *sigma)?,
            Model::Empirical { pwg, matrix, missing } => match (pwg, matrix) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::param("instance.pwg", format!("{}: {e}", path.display())))?;
                    let doc = ingest::parse_pwg(&text).map_err(|e| Error::param("instance.pwg", e.to_string()))?;
                    ingest::to_preference_instance(&doc, *missing)?
                }
                (None, Some(m)) => m.clone(),
                _ => return Err(Error::param("instance", "empirical model needs exactly one of `pwg` or `matrix`")),
            },
        };
        if inst.n() != self.n {
            return Err(Error::param(
                "instance.n",
                format!("declared {} but the model defines {} items", self.n, inst.n()),
            ));
        }
        Ok(inst)
    }
}

// ---------------------------------------------------------------------------
// Bandit reductions

/// Result of one reduction duel between two arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuelOutcome {
    pub first_wins: bool,
    pub pulls: u64,
}

fn check_bernoulli_mean(name: &'static str, mu: f64) -> Result<()> {
    if (0.0..=1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{mu} is not a Bernoulli mean")))
    }
}

/// Bernoulli reduction: pull a uniformly chosen arm until some pull returns
/// 1, and report that arm. The first arm wins with probability
/// `μ_i / (μ_i + μ_j)`.
pub fn duel_bernoulli_p1<R: rand::Rng + ?Sized>(mu_i: f64, mu_j: f64, rng: &mut R) -> Result<DuelOutcome> {
    check_bernoulli_mean("mu_i", mu_i)?;
    check_bernoulli_mean("mu_j", mu_j)?;
    if mu_i == 0.0 && mu_j == 0.0 {
        return Err(Error::param("mu", "both arms have mean zero"));
    }
    let mut pulls = 0;
    loop {
        let first = rng.random::<bool>();
        let mu = if first { mu_i } else { mu_j };
        pulls += 1;
        if rng.random::<f64>() < mu {
            return Ok(DuelOutcome { first_wins: first, pulls });
        }
    }
}

/// Gaussian reduction: one unit-variance pull of each arm, the larger reward
/// wins. Ties go to the second arm.
pub fn duel_gaussian_p2<R: rand::Rng + ?Sized>(mu_i: f64, mu_j: f64, rng: &mut R) -> Result<DuelOutcome> {
    if !(mu_i.is_finite() && mu_j.is_finite()) {
        return Err(Error::param("mu", "means must be finite"));
    }
    let r_i = mu_i + rng.sample::<f64, _>(StandardNormal);
    let r_j = mu_j + rng.sample::<f64, _>(StandardNormal);
    Ok(DuelOutcome { first_wins: r_i > r_j, pulls: 2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmKind {
    Bernoulli,
    Gaussian,
}

/// Items backed by bandit arms; each comparison runs one reduction duel.
#[derive(Debug, Clone)]
pub struct ArmOracle {
    kind: ArmKind,
    means: Vec<f64>,
    rng: Rng,
    count: u64,
    pulls: u64,
}

impl ArmOracle {
    pub fn new(kind: ArmKind, means: Vec<f64>, seed: u64) -> Result<Self> {
        for &mu in &means {
            match kind {
                ArmKind::Bernoulli if !(mu > 0.0 && mu <= 1.0) => {
                    return Err(Error::param("means", format!("{mu} not in (0, 1]")))
                }
                ArmKind::Gaussian if !mu.is_finite() => return Err(Error::param("means", "means must be finite")),
                _ => {}
            }
        }
        Ok(ArmOracle { kind, means, rng: seed::rng_from(seed), count: 0, pulls: 0 })
    }

    /// Total arm pulls across all comparisons.
    pub fn pulls(&self) -> u64 {
        self.pulls
    }
}

impl ComparisonOracle for ArmOracle {
    fn n(&self) -> usize {
        self.means.len()
    }

    fn compare(&mut self, i: ItemId, j: ItemId) -> Result<ItemId> {
        self.check_pair(i, j)?;
        let (mu_i, mu_j) = (self.means[i], self.means[j]);
        let duel = match self.kind {
            ArmKind::Bernoulli => duel_bernoulli_p1(mu_i, mu_j, &mut self.rng)?,
            ArmKind::Gaussian => duel_gaussian_p2(mu_i, mu_j, &mut self.rng)?,
        };
        self.count += 1;
        self.pulls += duel.pulls;
        Ok(if duel.first_wins { i } else { j })
    }

    fn comparisons(&self) -> u64 {
        self.count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win_rate<O: ComparisonOracle>(o: &mut O, i: ItemId, j: ItemId, runs: usize) -> f64 {
        (0..runs).filter(|_| o.compare(i, j).unwrap() == i).count() as f64 / runs as f64
    }

    #[test]
    fn deterministic_winner() {
        let mut o = make_equal_gap(2, 1.0, 3).unwrap();
        for _ in 0..100 {
            assert_eq!(o.compare(0, 1).unwrap(), 0);
            assert_eq!(o.compare(1, 0).unwrap(), 0);
        }
        assert_eq!(o.comparisons(), 200);
    }

    #[test]
    fn compare_rejects_bad_pairs() {
        let mut o = make_equal_gap(3, 0.6, 0).unwrap();
        assert_eq!(o.compare(1, 1), Err(Error::IdenticalItems(1)));
        assert!(matches!(o.compare(0, 3), Err(Error::ItemOutOfRange { .. })));
        assert_eq!(o.comparisons(), 0);
    }

    #[test]
    fn fair_and_biased_coins() {
        // 3σ of Binomial(10^4, 1/2) is 0.015
        let inst = PreferenceInstance::from_upper(2, |_, _| 0.5).unwrap();
        let mut fair = make_empirical(inst, 11);
        assert!((win_rate(&mut fair, 0, 1, 10_000) - 0.5).abs() <= 0.015);
        let mut o = make_equal_gap(4, 0.6, 12).unwrap();
        assert!((win_rate(&mut o, 0, 3, 10_000) - 0.6).abs() <= 0.015);
    }

    #[test]
    fn flipped_inverts_and_shares_counter() {
        let mut o = make_equal_gap(4, 0.6, 5).unwrap();
        let rate = win_rate(&mut flipped(&mut o), 0, 1, 10_000);
        assert!((rate - 0.4).abs() <= 0.015, "{rate}");
        assert_eq!(o.comparisons(), 10_000);

        let mut a = make_equal_gap(4, 0.6, 9).unwrap();
        let mut b = make_equal_gap(4, 0.6, 9).unwrap();
        let mut ff = flipped(flipped(&mut b));
        for _ in 0..500 {
            assert_eq!(a.compare(2, 3).unwrap(), ff.compare(2, 3).unwrap());
        }
    }

    #[test]
    fn generator_parameter_checks() {
        assert!(make_equal_gap(3, 0.5, 0).is_err());
        assert!(make_equal_gap(3, 1.01, 0).is_err());
        assert!(make_uniform_gap(3, 0.2, 0.1, 0).is_err());
        assert!(make_uniform_gap(3, 0.0, 0.1, 0).is_err());
        assert!(make_uniform_gap(3, 0.1, 0.6, 0).is_err());
        assert!(make_mnl(&[1.0, 0.0], 0).is_err());
        assert!(make_thurstone(&[1.0, 0.0], 0.0, 0).is_err());
    }

    #[test]
    fn mnl_and_thurstone_values() {
        let m = mnl_instance(&[3.0, 1.0]).unwrap();
        assert_eq!(m.prob(0, 1), 0.75);
        assert_eq!(mnl_instance(&[2.0, 2.0]).unwrap().prob(0, 1), 0.5);
        let t = thurstone_instance(&[1.0, 0.0, 0.0], 1.0).unwrap();
        assert!((t.prob(0, 1) - 0.760_249_938_906_523_2).abs() < 1e-12);
        assert_eq!(t.prob(1, 2), 0.5);
    }

    #[test]
    fn uniform_gap_ranges_and_determinism() {
        let a = make_uniform_gap(6, 0.05, 0.15, 42).unwrap();
        let b = make_uniform_gap(6, 0.05, 0.15, 42).unwrap();
        assert_eq!(a.instance(), b.instance());
        for i in 0..6 {
            for j in (i + 1)..6 {
                let p = a.instance().prob(i, j);
                assert!((0.55..=0.65).contains(&p));
            }
        }
        let g = 0.1;
        let mut u = make_uniform_gap(5, g, g, 8).unwrap();
        let mut e = make_equal_gap(5, 0.5 + g, 8).unwrap();
        assert_eq!(u.instance(), e.instance());
        for _ in 0..100 {
            assert_eq!(u.compare(0, 4).unwrap(), e.compare(0, 4).unwrap());
        }
    }

    #[test]
    fn enforced_uniform_gap_passes_validators() {
        let mut rng = seed::rng_from(1);
        let inst = uniform_gap_instance(4, 0.05, 0.15, true, &mut rng).unwrap();
        assert!(verify::validate_sst(&inst).pass);
        assert!(verify::validate_sti(&inst).pass);
    }

    #[test]
    fn bernoulli_reduction() {
        let mut rng = seed::rng_from(77);
        assert!(duel_bernoulli_p1(0.0, 0.0, &mut rng).is_err());
        assert!(duel_bernoulli_p1(1.5, 0.5, &mut rng).is_err());
        let runs = 20_000;
        let mut wins = 0;
        let mut pulls = 0;
        for _ in 0..runs {
            let d = duel_bernoulli_p1(0.25, 0.25, &mut rng).unwrap();
            wins += d.first_wins as u64;
            pulls += d.pulls;
        }
        assert!((wins as f64 / runs as f64 - 0.5).abs() < 0.015);
        assert!((pulls as f64 / runs as f64 - 4.0).abs() < 0.1);
    }

    #[test]
    fn gaussian_reduction() {
        let mut rng = seed::rng_from(78);
        let runs = 20_000;
        let mut wins = 0;
        for _ in 0..runs {
            let d = duel_gaussian_p2(1.0, 0.0, &mut rng).unwrap();
            assert_eq!(d.pulls, 2);
            wins += d.first_wins as u64;
        }
        assert!((wins as f64 / runs as f64 - normal_cdf(std::f64::consts::FRAC_1_SQRT_2)).abs() < 0.01);
    }

    #[test]
    fn arm_oracle_counts_pulls() {
        let mut o = ArmOracle::new(ArmKind::Gaussian, vec![0.0, 1.0], 1).unwrap();
        for _ in 0..10 {
            o.compare(0, 1).unwrap();
        }
        assert_eq!((o.comparisons(), o.pulls()), (10, 20));
        assert!(ArmOracle::new(ArmKind::Bernoulli, vec![0.0, 0.5], 1).is_err());
    }

    #[test]
    fn instance_spec_json() {
        let spec: InstanceSpec = serde_json::from_str(r#"{"model":"equal_gap","p_win":0.6,"n":5,"seed":3}"#).unwrap();
        assert_eq!(spec.model, Model::EqualGap { p_win: 0.6 });
        assert_eq!(spec.build().unwrap().n(), 5);
        let back: InstanceSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);

        let bad: InstanceSpec = serde_json::from_str(r#"{"model":"mnl","scores":[1,2,3],"n":4}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
