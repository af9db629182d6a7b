//! Monte Carlo harnesses for the probabilistic guarantees.
//!
//! Every trial gets its own ChaCha stream (master seed, stream = trial index),
//! trials run on the rayon pool, and per-trial outcomes are collected in index
//! order before a fixed-order reduction. Estimates are therefore bit-identical
//! for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{hammer_classifier_budget, kl_bernoulli_plus};
use crate::error::{Error, Result};
use crate::multitest::{bh_baseline, by_baseline, realized_fdp, step_up, HypothesisPool};
use crate::normal;
use crate::priors::{level_function, ComplexityPrior, InverseDensityPrior, SizePrior};

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_070_611;

/// Slack kept above the positive-definiteness limit `−1/(m−1)`.
pub const NEGATIVE_RHO_MARGIN: f64 = 1e-6;

/// Tolerance on the total mass of an algorithm's output density.
pub const DENSITY_TOL: f64 = 1e-9;

/// Independent generator for one trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Correlation structure of the test statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Dependence {
    Independent,
    Equicorrelated { rho: f64 },
}

/// One-sided Gaussian testing scenario: `m` statistics, the first `m0` of
/// which are true nulls, the rest shifted by `effect`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub m: usize,
    pub m0: usize,
    #[serde(default)]
    pub effect: f64,
    #[serde(default = "independent")]
    pub dependence: Dependence,
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn independent() -> Dependence {
    Dependence::Independent
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl ScenarioSpec {
    pub fn new(m: usize, m0: usize, effect: f64, dependence: Dependence, trials: u64, seed: u64) -> Self {
        Self {
            m,
            m0,
            effect,
            dependence,
            trials,
            seed,
        }
    }

    /// All-null independent scenario.
    pub fn all_null(m: usize, trials: u64, seed: u64) -> Self {
        Self::new(m, m, 0.0, Dependence::Independent, trials, seed)
    }

    /// Smallest admissible equicorrelation for this pool size.
    pub fn min_rho(&self) -> f64 {
        if self.m <= 1 {
            -1.0 + NEGATIVE_RHO_MARGIN
        } else {
            -1.0 / (self.m as f64 - 1.0) + NEGATIVE_RHO_MARGIN
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidPoolSize(0));
        }
        if self.m0 > self.m {
            return Err(Error::param(format!(
                "number of nulls m0 = {} exceeds m = {}",
                self.m0, self.m
            )));
        }
        if !self.effect.is_finite() {
            return Err(Error::param("effect must be finite"));
        }
        if let Dependence::Equicorrelated { rho } = self.dependence {
            let min = self.min_rho();
            if !(rho >= min && rho < 1.0) {
                return Err(Error::InvalidCorrelation { rho, min });
            }
        }
        Ok(())
    }
}

/// Draws one pool of p-values from an already-seeded generator.
fn draw_pool(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> HypothesisPool<f64> {
    let m = spec.m;
    let rho = match spec.dependence {
        Dependence::Independent => 0.0,
        Dependence::Equicorrelated { rho } => rho,
    };
    let mut z: Vec<f64> = if rho > 0.0 {
        // one-factor model
        let w: f64 = rng.sample(StandardNormal);
        let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
        (0..m)
            .map(|_| a * w + b * rng.sample::<f64, _>(StandardNormal))
            .collect()
    } else {
        let eps: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        if rho < 0.0 {
            // Z = s·ε + t·ε̄ with s² = 1 − ρ and t = √(1 + (m−1)ρ) − s
            let s = (1.0 - rho).sqrt();
            let t = (1.0 + (m as f64 - 1.0) * rho).max(0.0).sqrt() - s;
            let mean = eps.iter().sum::<f64>() / m as f64;
            eps.iter().map(|e| s * e + t * mean).collect()
        } else {
            eps
        }
    };
    for zi in z.iter_mut().skip(spec.m0) {
        *zi += spec.effect;
    }
    let p = z.iter().map(|&zi| normal::upper_tail(zi)).collect();
    let mask = (0..m).map(|i| i < spec.m0).collect();
    let ids = (1..=m).map(|i| format!("h{i}")).collect();
    HypothesisPool::with_nulls(ids, p, mask).expect("generated pool is valid")
}

/// p-values for trial `trial` of a scenario.
pub fn generate_pvalues(spec: &ScenarioSpec, trial: u64) -> Result<HypothesisPool<f64>> {
    spec.validate()?;
    Ok(draw_pool(spec, &mut trial_rng(spec.seed, trial)))
}

/// Monte Carlo estimate of a probability or expectation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub trials: u64,
    pub value: f64,
    pub std_error: f64,
    pub seed: u64,
    /// Exact event count, for estimates of a probability.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<u64>,
}

impl McEstimate {
    fn from_events(events: u64, trials: u64, seed: u64) -> Self {
        let value = events as f64 / trials as f64;
        Self {
            trials,
            value,
            std_error: (value * (1.0 - value) / trials as f64).sqrt(),
            seed,
            events: Some(events),
        }
    }

    fn from_values(values: &[f64], seed: u64) -> Self {
        let n = values.len() as f64;
        let mean = kahan_sum(values.iter().copied()) / n;
        let ss = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)));
        let var = if values.len() > 1 { ss / (n - 1.0) } else { 0.0 };
        Self {
            trials: values.len() as u64,
            value: mean,
            std_error: (var / n).sqrt(),
            seed,
            events: None,
        }
    }

    /// Whether the estimate is at most `bound` plus `sigmas` standard errors.
    pub fn within(&self, bound: f64, sigmas: f64) -> bool {
        self.value <= bound + sigmas * self.std_error
    }
}

/// Compensated summation in iteration order.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::param("at least one trial is required"))
    } else {
        Ok(())
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::param(format!("delta must lie in [0, 1], got {delta}")))
    }
}

/// Runs `trial` for every index on the rayon pool, preserving index order.
fn run_trials<R, F>(trials: u64, trial: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(u64) -> Result<R> + Sync + Send,
{
    (0..trials).into_par_iter().map(trial).collect()
}

/// Multiple-testing procedure whose FDR is being estimated.
#[derive(Debug, Clone)]
pub enum FdrProcedure {
    Hammer {
        pi: ComplexityPrior<f64>,
        gamma: SizePrior<f64>,
    },
    BenjaminiHochberg,
    BenjaminiYekutieli,
}

/// Mean realized false discovery proportion over the scenario's trials.
pub fn estimate_fdr(procedure: &FdrProcedure, spec: &ScenarioSpec, alpha: f64) -> Result<McEstimate> {
    spec.validate()?;
    check_trials(spec.trials)?;
    let fdps = run_trials(spec.trials, |t| {
        let pool = draw_pool(spec, &mut trial_rng(spec.seed, t));
        let result = match procedure {
            FdrProcedure::Hammer { pi, gamma } => step_up(&pool, pi, gamma, alpha)?,
            FdrProcedure::BenjaminiHochberg => bh_baseline(&pool, alpha)?,
            FdrProcedure::BenjaminiYekutieli => by_baseline(&pool, alpha)?,
        };
        realized_fdp(&result, &pool)
    })?;
    Ok(McEstimate::from_values(&fdps, spec.seed))
}

/// Indices of the `a` smallest p-values (ties broken by index).
fn smallest(pool: &HypothesisPool<f64>, a: usize) -> Vec<usize> {
    let p = pool.p_values();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&x, &y| p[x].total_cmp(&p[y]).then(x.cmp(&y)));
    order.truncate(a);
    order
}

#[inline]
fn bad_event(pool: &HypothesisPool<f64>, h: usize, level: f64) -> bool {
    let null = pool.null_mask().is_none_or(|m| m[h]);
    null && level > 0.0 && pool.p_values()[h] <= level
}

/// Expected false prediction rate of the algorithm returning the `a` smallest
/// p-values, with level `min(δ·a·π(h), 1)` for each member.
pub fn validate_constant_volume(
    spec: &ScenarioSpec,
    a: usize,
    pi: &ComplexityPrior<f64>,
    delta: f64,
) -> Result<McEstimate> {
    spec.validate()?;
    check_trials(spec.trials)?;
    check_delta(delta)?;
    if a == 0 || a > spec.m {
        return Err(Error::InvalidSize { size: a, max: spec.m });
    }
    if pi.len() != spec.m {
        return Err(Error::Dimension {
            what: "complexity prior",
            expected: spec.m,
            got: pi.len(),
        });
    }
    let rates = run_trials(spec.trials, |t| {
        let pool = draw_pool(spec, &mut trial_rng(spec.seed, t));
        let bad = smallest(&pool, a)
            .into_iter()
            .filter(|&h| bad_event(&pool, h, level_function(delta, a as f64 * pi.weight(h), 1.0)))
            .count();
        Ok(bad as f64 / a as f64)
    })?;
    Ok(McEstimate::from_values(&rates, spec.seed))
}

/// An algorithm mapping observed p-values to a probability density over the
/// pool (with respect to counting measure).
pub trait DensityRule: Sync {
    fn density(&self, pool: &HypothesisPool<f64>, rng: &mut ChaCha8Rng) -> Vec<f64>;
}

/// Built-in density-returning algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinRule {
    /// Uniform on the `k` smallest p-values, `k` uniform on `1..=m`.
    TopKUniform,
    /// Uniform on the `a` smallest p-values.
    TopKFixed(usize),
    /// Uniform on the p-values below `threshold` (at least one).
    TopKBelow(f64),
    /// `θ(h) ∝ exp(−p_h / temperature)`.
    Softmax(f64),
}

fn uniform_on(m: usize, support: &[usize]) -> Vec<f64> {
    let mut theta = vec![0.0; m];
    let w = 1.0 / support.len() as f64;
    for &h in support {
        theta[h] = w;
    }
    theta
}

impl DensityRule for BuiltinRule {
    fn density(&self, pool: &HypothesisPool<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let m = pool.len();
        match *self {
            BuiltinRule::TopKUniform => {
                let k = rng.random_range(1..=m);
                uniform_on(m, &smallest(pool, k))
            }
            BuiltinRule::TopKFixed(a) => uniform_on(m, &smallest(pool, a.clamp(1, m))),
            BuiltinRule::TopKBelow(threshold) => {
                let k = pool.p_values().iter().filter(|&&p| p <= threshold).count();
                uniform_on(m, &smallest(pool, k.max(1)))
            }
            BuiltinRule::Softmax(temperature) => {
                let p = pool.p_values();
                let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
                let w: Vec<f64> = p.iter().map(|&x| (-(x - lo) / temperature).exp()).collect();
                let total = kahan_sum(w.iter().copied());
                w.into_iter().map(|x| x / total).collect()
            }
        }
    }
}

/// Index drawn from a probability vector.
fn draw_index(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

fn check_density(theta: &[f64]) -> Result<()> {
    let sum = kahan_sum(theta.iter().copied());
    if theta.iter().any(|&t| !(t >= 0.0)) || (sum - 1.0).abs() > DENSITY_TOL {
        return Err(Error::InvalidDensity { sum });
    }
    Ok(())
}

/// Joint probability over the data and a hypothesis drawn from the
/// algorithm's output density that the drawn hypothesis lands in its bad
/// event at level `min(δ·π(h)·β(1/θ(h)), 1)`.
pub fn validate_hammer_joint<P>(
    spec: &ScenarioSpec,
    rule: &dyn DensityRule,
    pi: &ComplexityPrior<f64>,
    prior: &P,
    delta: f64,
) -> Result<McEstimate>
where
    P: InverseDensityPrior<f64> + Sync + ?Sized,
{
    spec.validate()?;
    check_trials(spec.trials)?;
    check_delta(delta)?;
    if pi.len() != spec.m {
        return Err(Error::Dimension {
            what: "complexity prior",
            expected: spec.m,
            got: pi.len(),
        });
    }
    let hits = run_trials(spec.trials, |t| {
        let mut rng = trial_rng(spec.seed, t);
        let pool = draw_pool(spec, &mut rng);
        let theta = rule.density(&pool, &mut rng);
        if theta.len() != pool.len() {
            return Err(Error::Dimension {
                what: "output density",
                expected: pool.len(),
                got: theta.len(),
            });
        }
        check_density(&theta)?;
        let h = draw_index(&theta, &mut rng);
        let level = level_function(delta, pi.weight(h), prior.beta_at(1.0 / theta[h]));
        Ok(bad_event(&pool, h, level))
    })?;
    let events = hits.iter().filter(|&&b| b).count() as u64;
    Ok(McEstimate::from_events(events, spec.trials, spec.seed))
}

/// How the randomized classifier picks its density from empirical errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassifierRule {
    /// Weights `∝ exp(−scale · Ê(h))`.
    Softmax { scale: f64 },
    /// Every classifier equally likely (`θ ≡ 1`).
    Uniform,
}

/// Frequency with which a randomly drawn classifier violates the
/// randomized-classifier bound.
///
/// `true_errors` lists the generalization error of each classifier; the
/// reference measure is uniform over them, so `θ(h) = M · w(h)`.
pub fn validate_classifier_coverage(
    n: u64,
    delta: f64,
    true_errors: &[f64],
    rule: ClassifierRule,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_trials(trials)?;
    if true_errors.is_empty() {
        return Err(Error::param("no classifiers given"));
    }
    if let Some(e) = true_errors.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::Domain(format!("true error {e} outside [0, 1]")));
    }
    // validates n and delta
    hammer_classifier_budget(n, delta, 1.0)?;
    let count = true_errors.len() as f64;
    let samplers: Vec<Binomial> = true_errors
        .iter()
        .map(|&e| Binomial::new(n, e).map_err(|err| Error::Internal(err.to_string())))
        .collect::<Result<_>>()?;

    let hits = run_trials(trials, |t| {
        let mut rng = trial_rng(seed, t);
        let empirical: Vec<f64> = samplers
            .iter()
            .map(|b| b.sample(&mut rng) as f64 / n as f64)
            .collect();
        let weights: Vec<f64> = match rule {
            ClassifierRule::Uniform => vec![1.0 / count; empirical.len()],
            ClassifierRule::Softmax { scale } => {
                let lo = empirical.iter().copied().fold(f64::INFINITY, f64::min);
                let w: Vec<f64> = empirical.iter().map(|&e| (-scale * (e - lo)).exp()).collect();
                let total = kahan_sum(w.iter().copied());
                w.into_iter().map(|x| x / total).collect()
            }
        };
        check_density(&weights)?;
        let h = draw_index(&weights, &mut rng);
        let theta = count * weights[h];
        let budget = hammer_classifier_budget(n, delta, theta)?;
        Ok(kl_bernoulli_plus(empirical[h], true_errors[h])? > budget)
    })?;
    let events = hits.iter().filter(|&&b| b).count() as u64;
    Ok(McEstimate::from_events(events, trials, seed))
}

/// `count` true error rates equispaced on `[lo, hi]`.
pub fn equispaced_errors(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
