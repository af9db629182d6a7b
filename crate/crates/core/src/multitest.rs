//! Step-up multiple testing driven by a complexity prior and a size prior.
//!
//! For a pool of p-values, a complexity prior `π` and a size prior `γ` with
//! partial sums `β`, the procedure rejects the largest set `G` such that every
//! `h ∈ G` passes its test at level `α·π(h)·β(|G|)`. Valid sets are closed
//! under union, so the supremum is `S_{k*}` where
//!
//! ```text
//! S_k = { h : p_h ≤ α·π(h)·β(k) },   k* = max{ k : |S_k| ≥ k }.
//! ```
//!
//! A test at level zero never rejects, whatever the p-value.
//!
//! With uniform `π` and `γ(i) ∝ 1/i` this is exactly Benjamini–Yekutieli;
//! [`by_baseline`] and [`bh_baseline`] are written independently on sorted
//! p-values so they can serve as oracles.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::priors::{harmonic, ComplexityPrior, SizePrior};
use crate::scalar::Scalar;

/// Finite pool of hypotheses with observed p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisPool<T: Scalar = f64> {
    ids: Vec<String>,
    p_values: Vec<T>,
    null_mask: Option<Vec<bool>>,
}

impl<T: Scalar> HypothesisPool<T> {
    pub fn new(ids: Vec<String>, p_values: Vec<T>) -> Result<Self> {
        Self::build(ids, p_values, None)
    }

    /// Pool with ground truth; `null_mask[i]` is true when hypothesis `i` is a
    /// true null.
    pub fn with_nulls(ids: Vec<String>, p_values: Vec<T>, null_mask: Vec<bool>) -> Result<Self> {
        Self::build(ids, p_values, Some(null_mask))
    }

    /// Pool with ids `h1, h2, …`.
    pub fn from_p_values(p_values: Vec<T>) -> Result<Self> {
        let ids = (1..=p_values.len()).map(|i| format!("h{i}")).collect();
        Self::new(ids, p_values)
    }

    fn build(ids: Vec<String>, p_values: Vec<T>, null_mask: Option<Vec<bool>>) -> Result<Self> {
        if ids.len() != p_values.len() {
            return Err(Error::Dimension {
                what: "p-value list",
                expected: ids.len(),
                got: p_values.len(),
            });
        }
        if let Some(mask) = &null_mask {
            if mask.len() != ids.len() {
                return Err(Error::Dimension {
                    what: "null mask",
                    expected: ids.len(),
                    got: mask.len(),
                });
            }
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for (id, &p) in ids.iter().zip(&p_values) {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
            if !(p >= T::zero() && p <= T::one()) {
                return Err(Error::Validation {
                    id: id.clone(),
                    msg: format!("p-value {p} outside [0, 1]"),
                });
            }
        }
        Ok(Self {
            ids,
            p_values,
            null_mask,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn p_values(&self) -> &[T] {
        &self.p_values
    }

    pub fn null_mask(&self) -> Option<&[bool]> {
        self.null_mask.as_deref()
    }

    /// Same pool with one p-value replaced.
    pub fn with_p_value(&self, index: usize, p: T) -> Result<Self> {
        let mut p_values = self.p_values.clone();
        p_values[index] = p;
        Self::build(self.ids.clone(), p_values, self.null_mask.clone())
    }
}

/// Which rule produced a [`StepUpResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Procedure {
    /// Prior-weighted step-up.
    Hammer,
    BenjaminiYekutieli,
    BenjaminiHochberg,
    /// Weighted union bound `p_h ≤ α·π(h)`.
    Bonferroni,
}

/// Outcome of a step-up run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepUpResult<T: Scalar = f64> {
    pub procedure: Procedure,
    /// Indices into the pool, ascending.
    pub rejected: Vec<usize>,
    pub k_star: usize,
    /// Per-hypothesis level at `k_star`, in pool order.
    pub thresholds: Vec<T>,
    pub alpha: T,
}

impl<T: Scalar> StepUpResult<T> {
    pub fn rejected_ids<'a>(&self, pool: &'a HypothesisPool<T>) -> Vec<&'a str> {
        self.rejected.iter().map(|&i| pool.ids[i].as_str()).collect()
    }

    pub fn is_rejected(&self, index: usize) -> bool {
        self.rejected.binary_search(&index).is_ok()
    }
}

/// A test at level `level` rejects iff the level is positive and `p ≤ level`.
#[inline]
fn passes<T: Scalar>(p: T, level: T) -> bool {
    level > T::zero() && p <= level
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if alpha >= T::zero() && alpha <= T::one() {
        Ok(())
    } else {
        Err(Error::param(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

fn check_dims<T: Scalar>(
    pool: &HypothesisPool<T>,
    pi: &ComplexityPrior<T>,
    gamma: &SizePrior<T>,
) -> Result<()> {
    let m = pool.len();
    if pi.len() != m {
        return Err(Error::Dimension {
            what: "complexity prior",
            expected: m,
            got: pi.len(),
        });
    }
    if m > 0 && gamma.max_size() != m {
        return Err(Error::Dimension {
            what: "size prior",
            expected: m,
            got: gamma.max_size(),
        });
    }
    Ok(())
}

#[inline]
fn level<T: Scalar>(alpha: T, pi_h: T, beta_k: T) -> T {
    alpha * pi_h * beta_k
}

/// Prior-weighted step-up procedure.
///
/// Each hypothesis enters `S_k` from some size onwards (levels grow with `k`),
/// so the entry size is found by binary search over `β` and `|S_k|` follows
/// from a counting pass. Runs in `O(m log m)` for any `π`.
pub fn step_up<T: Scalar>(
    pool: &HypothesisPool<T>,
    pi: &ComplexityPrior<T>,
    gamma: &SizePrior<T>,
    alpha: T,
) -> Result<StepUpResult<T>> {
    check_alpha(alpha)?;
    check_dims(pool, pi, gamma)?;
    let m = pool.len();

    // entry[h] = smallest k in 1..=m with h ∈ S_k, or m + 1 if none.
    let entry: Vec<usize> = pool
        .p_values
        .iter()
        .zip(pi.weights())
        .map(|(&p, &w)| {
            let first = gamma
                .beta_partial()
                .partition_point(|&b| !passes(p, level(alpha, w, b)));
            first + 1
        })
        .collect();

    let mut entering = vec![0usize; m + 2];
    for &k in &entry {
        entering[k] += 1;
    }
    let mut k_star = 0;
    let mut size = 0;
    for (k, &count) in entering.iter().enumerate().take(m + 1).skip(1) {
        size += count;
        if size >= k {
            k_star = k;
        }
    }

    let rejected: Vec<usize> = (0..m).filter(|&h| entry[h] <= k_star).collect();
    debug_assert!(rejected.len() == k_star);
    let beta_star = gamma.beta(k_star);
    let thresholds = pi
        .weights()
        .iter()
        .map(|&w| level(alpha, w, beta_star))
        .collect();
    Ok(StepUpResult {
        procedure: Procedure::Hammer,
        rejected,
        k_star,
        thresholds,
        alpha,
    })
}

/// Weighted Bonferroni: reject `{h : p_h ≤ α·π(h)}`.
pub fn weighted_bonferroni<T: Scalar>(
    pool: &HypothesisPool<T>,
    pi: &ComplexityPrior<T>,
    alpha: T,
) -> Result<StepUpResult<T>> {
    check_alpha(alpha)?;
    if pi.len() != pool.len() {
        return Err(Error::Dimension {
            what: "complexity prior",
            expected: pool.len(),
            got: pi.len(),
        });
    }
    let thresholds: Vec<T> = pi.weights().iter().map(|&w| alpha * w).collect();
    let rejected: Vec<usize> = (0..pool.len())
        .filter(|&h| passes(pool.p_values[h], thresholds[h]))
        .collect();
    Ok(StepUpResult {
        procedure: Procedure::Bonferroni,
        k_star: rejected.len(),
        rejected,
        thresholds,
        alpha,
    })
}

/// Classic sorted step-up: largest `k` with `p_(k) ≤ k·α/(m·κ)`.
fn sorted_step_up<T: Scalar>(
    pool: &HypothesisPool<T>,
    alpha: T,
    kappa: T,
    procedure: Procedure,
) -> Result<StepUpResult<T>> {
    check_alpha(alpha)?;
    let m = pool.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        pool.p_values[a]
            .partial_cmp(&pool.p_values[b])
            .expect("p-values are validated")
            .then(a.cmp(&b))
    });
    let denom = T::from_count(m.max(1)) * kappa;
    let mut k_star = 0;
    for (pos, &h) in order.iter().enumerate() {
        let k = pos + 1;
        let t = T::from_count(k) * alpha / denom;
        if passes(pool.p_values[h], t) {
            k_star = k;
        }
    }
    let mut rejected: Vec<usize> = order[..k_star].to_vec();
    rejected.sort_unstable();
    let t_star = T::from_count(k_star) * alpha / denom;
    Ok(StepUpResult {
        procedure,
        rejected,
        k_star,
        thresholds: vec![t_star; m],
        alpha,
    })
}

/// Benjamini–Yekutieli on sorted p-values.
pub fn by_baseline<T: Scalar>(pool: &HypothesisPool<T>, alpha: T) -> Result<StepUpResult<T>> {
    let kappa = harmonic::<T>(pool.len().max(1));
    sorted_step_up(pool, alpha, kappa, Procedure::BenjaminiYekutieli)
}

/// Benjamini–Hochberg on sorted p-values (no distribution-free guarantee).
pub fn bh_baseline<T: Scalar>(pool: &HypothesisPool<T>, alpha: T) -> Result<StepUpResult<T>> {
    sorted_step_up(pool, alpha, T::one(), Procedure::BenjaminiHochberg)
}

/// Largest pool [`brute_force_sup`] will enumerate.
pub const BRUTE_FORCE_MAX: usize = 20;

/// Literal evaluation of the supremum: union of every subset `G` whose
/// members all pass at level `α·π(h)·β(|G|)`.
pub fn brute_force_sup<T: Scalar>(
    pool: &HypothesisPool<T>,
    pi: &ComplexityPrior<T>,
    gamma: &SizePrior<T>,
    alpha: T,
) -> Result<StepUpResult<T>> {
    let m = pool.len();
    if m > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            m,
            max: BRUTE_FORCE_MAX,
        });
    }
    check_alpha(alpha)?;
    check_dims(pool, pi, gamma)?;

    // passing[k] = bitmask of hypotheses passing at size k
    let passing: Vec<u32> = (0..=m)
        .map(|k| {
            (0..m).fold(0u32, |mask, h| {
                let t = level(alpha, pi.weight(h), gamma.beta(k));
                if passes(pool.p_values[h], t) {
                    mask | (1 << h)
                } else {
                    mask
                }
            })
        })
        .collect();

    let total: u64 = 1 << m;
    let union = (0..total)
        .into_par_iter()
        .map(|g| g as u32)
        .filter(|&g| g & !passing[g.count_ones() as usize] == 0)
        .reduce(|| 0u32, |a, b| a | b);

    let rejected: Vec<usize> = (0..m).filter(|&h| union & (1 << h) != 0).collect();
    let k_star = rejected.len();
    let beta_star = gamma.beta(k_star);
    Ok(StepUpResult {
        procedure: Procedure::Hammer,
        rejected,
        k_star,
        thresholds: pi
            .weights()
            .iter()
            .map(|&w| level(alpha, w, beta_star))
            .collect(),
        alpha,
    })
}

/// Realized false discovery proportion `|A ∩ H₀| / |A|`, zero when nothing is
/// rejected.
pub fn realized_fdp<T: Scalar>(result: &StepUpResult<T>, pool: &HypothesisPool<T>) -> Result<T> {
    let mask = pool.null_mask().ok_or(Error::MissingGroundTruth)?;
    if result.rejected.is_empty() {
        return Ok(T::zero());
    }
    let false_discoveries = result.rejected.iter().filter(|&&h| mask[h]).count();
    Ok(T::from_count(false_discoveries) / T::from_count(result.rejected.len()))
}

/// Markov conversion of an expected-rate bound into a confidence bound:
/// with probability `1 − δ` the rate is at most `bound/δ` (capped at 1).
pub fn markov_confidence<T: Scalar>(expected_bound: T, delta: T) -> Result<T> {
    if !(delta > T::zero() && delta <= T::one()) {
        return Err(Error::param(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(expected_bound >= T::zero() && expected_bound <= T::one()) {
        return Err(Error::param(format!(
            "expected rate bound must lie in [0, 1], got {expected_bound}"
        )));
    }
    Ok((expected_bound / delta).min(T::one()))
}
