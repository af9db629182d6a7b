//! Bernoulli-KL machinery and the randomized-classifier bound.
//!
//! For a classifier `h_S` drawn from a data-dependent density `θ_S` (with
//! respect to a reference probability measure), with probability `1 − δ`
//!
//! ```text
//! D₊(Ê ‖ E) ≤ log(n/δ)/n + log₊ θ_S(h_S)/(n − 1)
//! ```
//!
//! where `D₊` is the Bernoulli KL divergence truncated to the case `q < p`.
//! All logarithms are natural.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::root::bisect_last_true;
use crate::scalar::Scalar;

fn check_unit<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} is outside [0, 1]")))
    }
}

/// `x log(x / y)` with `0 log 0 = 0`.
fn xlogxy<T: Scalar>(x: T, y: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x * (x / y).ln()
    }
}

/// One-sided Bernoulli KL divergence `D₊(q ‖ p)`.
///
/// Zero when `q ≥ p`. For `q < p = 1` the divergence is infinite and is
/// returned as `T::infinity()`.
pub fn kl_bernoulli_plus<T: Scalar>(q: T, p: T) -> Result<T> {
    check_unit("q", q)?;
    check_unit("p", p)?;
    Ok(kl_plus_unchecked(q, p))
}

fn kl_plus_unchecked<T: Scalar>(q: T, p: T) -> T {
    if q >= p {
        return T::zero();
    }
    if p == T::one() {
        return T::infinity();
    }
    let d = xlogxy(q, p) + xlogxy(T::one() - q, T::one() - p);
    d.max(T::zero())
}

/// Largest `p ∈ [q, 1]` with `D₊(q ‖ p) ≤ budget`.
pub fn kl_upper_inverse<T: Scalar>(q: T, budget: T) -> Result<T> {
    check_unit("q", q)?;
    if !(budget >= T::zero()) {
        return Err(Error::Domain(format!("budget = {budget} must be non-negative")));
    }
    if q == T::one() {
        return Ok(T::one());
    }
    if budget == T::infinity() {
        return Ok(T::one());
    }
    if budget == T::zero() {
        return Ok(q);
    }
    Ok(bisect_last_true(q, T::one(), T::zero(), |p| {
        kl_plus_unchecked(q, p) <= budget
    }))
}

/// Right-hand side of the randomized-classifier bound:
/// `log(n/δ)/n + log₊(θ)/(n − 1)`.
pub fn hammer_classifier_budget<T: Scalar>(n: u64, delta: T, theta: T) -> Result<T> {
    if n < 2 {
        return Err(Error::param(format!("sample size must be at least 2, got {n}")));
    }
    if !(delta > T::zero() && delta <= T::one()) {
        return Err(Error::param(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(theta >= T::zero()) {
        return Err(Error::param(format!("density value must be >= 0, got {theta}")));
    }
    let nf = T::from_u64(n).unwrap();
    let log_plus = theta.ln().max(T::zero());
    Ok((nf / delta).ln() / nf + log_plus / (nf - T::one()))
}

/// Whether a sample fell in the bad event `D₊(Ê ‖ E) > log(1/δ)/n`.
///
/// `δ = 0` is the empty bad event.
pub fn chernoff_violation<T: Scalar>(empirical: T, truth: T, n: u64, delta: T) -> Result<bool> {
    check_unit("empirical error", empirical)?;
    check_unit("true error", truth)?;
    check_unit("delta", delta)?;
    if n == 0 {
        return Err(Error::param("sample size must be positive"));
    }
    if delta == T::zero() {
        return Ok(false);
    }
    let radius = delta.recip().ln() / T::from_u64(n).unwrap();
    Ok(kl_plus_unchecked(empirical, truth) > radius)
}

/// `P(Binomial(n, p) ≤ k)`, accumulated in log space from the `i = 0` term
/// with the ratio recurrence `pmf(i+1)/pmf(i) = (n−i)/(i+1) · p/(1−p)`.
pub fn binomial_cdf<T: Scalar>(k: u64, n: u64, p: T) -> T {
    if k >= n || p <= T::zero() {
        return T::one();
    }
    if p >= T::one() {
        return T::zero();
    }
    let log_ratio = p.ln() - (-p).ln_1p();
    let mut log_pmf = T::from_u64(n).unwrap() * (-p).ln_1p();
    let mut max_log = log_pmf;
    let mut terms = Vec::with_capacity(k as usize + 1);
    terms.push(log_pmf);
    for i in 0..k {
        let fi = T::from_u64(i).unwrap();
        log_pmf = log_pmf + (T::from_u64(n).unwrap() - fi).ln() - (fi + T::one()).ln() + log_ratio;
        max_log = max_log.max(log_pmf);
        terms.push(log_pmf);
    }
    if max_log == T::neg_infinity() {
        return T::zero();
    }
    let sum = terms
        .iter()
        .fold(T::zero(), |acc, &l| acc + (l - max_log).exp());
    (max_log + sum.ln()).exp().min(T::one())
}

/// Binomial tail inversion: `sup{p : P(Binomial(n, p) ≤ k) ≥ δ}`.
pub fn binomial_tail_inverse<T: Scalar>(k: u64, n: u64, delta: T) -> Result<T> {
    if k > n {
        return Err(Error::Domain(format!("error count {k} exceeds sample size {n}")));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
    }
    if k == n {
        return Ok(T::one());
    }
    Ok(bisect_last_true(T::zero(), T::one(), T::lit(1e-14), |p| {
        binomial_cdf(k, n, p) >= delta
    }))
}

/// Everything that goes into one evaluation of the classifier bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierBoundReport {
    pub n: u64,
    pub delta: f64,
    pub theta_value: f64,
    pub kl_budget: f64,
    pub empirical_error: f64,
    pub upper_error_bound: f64,
}

/// Evaluates the budget and inverts it into an upper bound on the true error.
pub fn classifier_bound_report(
    n: u64,
    delta: f64,
    theta_value: f64,
    empirical_error: f64,
) -> Result<ClassifierBoundReport> {
    let kl_budget = hammer_classifier_budget(n, delta, theta_value)?;
    let upper_error_bound = kl_upper_inverse(empirical_error, kl_budget)?;
    Ok(ClassifierBoundReport {
        n,
        delta,
        theta_value,
        kl_budget,
        empirical_error,
        upper_error_bound,
    })
}
