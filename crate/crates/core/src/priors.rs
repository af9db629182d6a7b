//! Complexity priors, size priors and the level function.
//!
//! A complexity prior `π` spreads the confidence budget over the hypotheses
//! of a finite pool. A size prior `γ` is a distribution over output sizes (or
//! inverse output densities); everything downstream only ever needs its
//! first-moment partial integral
//!
//! ```text
//! β(x) = ∫₀ˣ u dγ(u)          (continuous)
//! β(k) = Σ_{i ≤ k} i · γ(i)   (sizes 1..m)
//! ```
//!
//! which reweights the level handed to each member of a returned set.

use crate::error::{Error, Result};
use crate::root::bisect_increasing;
use crate::scalar::Scalar;

/// Normalise a non-negative weight vector, rejecting empty, negative,
/// non-finite or all-zero input.
fn normalize<T: Scalar>(weights: &[T], what: &str) -> Result<Vec<T>> {
    if weights.is_empty() {
        return Err(Error::InvalidPrior(format!("{what}: no weights given")));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < T::zero())
    {
        return Err(Error::InvalidPrior(format!(
            "{what}: weight #{} is {w} (weights must be finite and non-negative)",
            i + 1
        )));
    }
    let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    if total <= T::zero() {
        return Err(Error::InvalidPrior(format!("{what}: all weights are zero")));
    }
    if (total - T::one()).abs() <= T::NORMALIZATION_TOL {
        return Ok(weights.to_vec());
    }
    Ok(weights.iter().map(|&w| w / total).collect())
}

/// Probability weights `π` over the hypotheses of a pool (density with
/// respect to counting measure).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityPrior<T: Scalar = f64> {
    pub(crate) weights: Vec<T>,
}

impl<T: Scalar> ComplexityPrior<T> {
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPrior("uniform prior over an empty pool".into()));
        }
        let w = T::one() / T::from_count(m);
        Ok(Self {
            weights: vec![w; m],
        })
    }

    /// Normalises arbitrary non-negative weights into a prior.
    pub fn from_weights(weights: &[T]) -> Result<Self> {
        Ok(Self {
            weights: normalize(weights, "complexity prior")?,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> T {
        self.weights[index]
    }

    /// Total weight carried by a subset of the pool.
    pub fn mass<I: IntoIterator<Item = usize>>(&self, indices: I) -> T {
        indices
            .into_iter()
            .fold(T::zero(), |acc, i| acc + self.weights[i])
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] == w[1])
    }
}

/// Which family a [`SizePrior`] was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizePriorKind {
    /// `γ(i) ∝ 1/i`, the Benjamini–Yekutieli choice.
    BenjaminiYekutieli,
    Uniform,
    /// Point mass at the given size.
    Dirac(usize),
    Custom,
}

/// Distribution `γ` over output sizes `1..=m`, stored with its `β` prefix sums
/// so that `β(k)` is a table lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct SizePrior<T: Scalar = f64> {
    kind: SizePriorKind,
    // gamma[i - 1] = γ(i)
    gamma: Vec<T>,
    // beta_partial[k - 1] = β(k)
    beta_partial: Vec<T>,
}

impl<T: Scalar> SizePrior<T> {
    /// `γ(i) = 1/(iκ)` with `κ = Σ_{i≤m} 1/i`, so that `β(k) = k/κ`.
    pub fn benjamini_yekutieli(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPoolSize(m));
        }
        let kappa = harmonic::<T>(m);
        let gamma = (1..=m)
            .map(|i| T::one() / (T::from_count(i) * kappa))
            .collect();
        let beta_partial = (1..=m).map(|k| T::from_count(k) / kappa).collect();
        Ok(Self {
            kind: SizePriorKind::BenjaminiYekutieli,
            gamma,
            beta_partial,
        })
    }

    /// `γ(i) = 1/m`, giving `β(k) = k(k+1)/(2m)`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPoolSize(m));
        }
        let mm = T::from_count(m);
        let two = T::lit(2.0);
        let beta_partial = (1..=m)
            .map(|k| {
                let k = T::from_count(k);
                k * (k + T::one()) / (two * mm)
            })
            .collect();
        Ok(Self {
            kind: SizePriorKind::Uniform,
            gamma: vec![T::one() / mm; m],
            beta_partial,
        })
    }

    /// Point mass at size `a`: `β(k) = a · 1{k ≥ a}`.
    pub fn dirac(a: usize, m: usize) -> Result<Self> {
        if a == 0 || a > m {
            return Err(Error::InvalidSize { size: a, max: m });
        }
        let mut gamma = vec![T::zero(); m];
        gamma[a - 1] = T::one();
        let beta_partial = (1..=m)
            .map(|k| if k >= a { T::from_count(a) } else { T::zero() })
            .collect();
        Ok(Self {
            kind: SizePriorKind::Dirac(a),
            gamma,
            beta_partial,
        })
    }

    /// Normalises `weights[i - 1] ∝ γ(i)` and accumulates `β`.
    pub fn custom(weights: &[T]) -> Result<Self> {
        let gamma = normalize(weights, "size prior")?;
        let mut acc = T::zero();
        let beta_partial = gamma
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let k = T::from_count(i + 1);
                acc = acc + k * g;
                acc.min(k)
            })
            .collect();
        Ok(Self {
            kind: SizePriorKind::Custom,
            gamma,
            beta_partial,
        })
    }

    pub fn kind(&self) -> &SizePriorKind {
        &self.kind
    }

    /// Largest size carried by the prior.
    pub fn max_size(&self) -> usize {
        self.gamma.len()
    }

    /// `γ(i)` for `i` in `1..=m`; zero elsewhere.
    pub fn gamma(&self, i: usize) -> T {
        if i == 0 || i > self.gamma.len() {
            T::zero()
        } else {
            self.gamma[i - 1]
        }
    }

    pub fn gammas(&self) -> &[T] {
        &self.gamma
    }

    /// `β(k)`; `β(0) = 0` and `β` is flat beyond `m`.
    pub fn beta(&self, k: usize) -> T {
        match k {
            0 => T::zero(),
            k if k > self.beta_partial.len() => self.beta_partial[self.beta_partial.len() - 1],
            k => self.beta_partial[k - 1],
        }
    }

    /// `β(1), …, β(m)`.
    pub fn beta_partial(&self) -> &[T] {
        &self.beta_partial
    }

    /// The γ-mean size, `β(m)`.
    pub fn mean_size(&self) -> T {
        self.beta_partial[self.beta_partial.len() - 1]
    }

    /// Harmonic constant `κ` for the BY prior.
    pub fn kappa(&self) -> Option<T> {
        match self.kind {
            SizePriorKind::BenjaminiYekutieli => Some(harmonic(self.gamma.len())),
            _ => None,
        }
    }

    /// Short human-readable description used in reports.
    pub fn describe(&self) -> String {
        match self.kind {
            SizePriorKind::BenjaminiYekutieli => {
                format!("by(kappa={})", crate::io::format_sig(harmonic::<T>(self.gamma.len()).as_f64()))
            }
            SizePriorKind::Uniform => format!("uniform(m={})", self.gamma.len()),
            SizePriorKind::Dirac(a) => format!("dirac({a})"),
            SizePriorKind::Custom => format!("custom(m={})", self.gamma.len()),
        }
    }
}

/// `Σ_{i ≤ m} 1/i`, summed from the small terms up.
pub fn harmonic<T: Scalar>(m: usize) -> T {
    (1..=m)
        .rev()
        .fold(T::zero(), |acc, i| acc + T::one() / T::from_count(i))
}

/// Parametric family behind a [`ContinuousPrior`].
#[derive(Debug, Clone, PartialEq)]
pub enum ContinuousKind<T: Scalar> {
    /// Density `x^{-1+1/(n-1)}/(n-1)` on `[0,1]`; `β(x) = min(x^{n/(n-1)},1)/n`.
    Power { n: u32 },
    /// Lebesgue measure on `[0,1]`; `β(x) = min(x,1)²/2`.
    Uniform01,
    /// `β` given directly at knots and interpolated linearly.
    BetaTable { x: Vec<T>, beta: Vec<T> },
    /// Distribution given by a piecewise-linear CDF (piecewise-constant
    /// density); `β` is then piecewise quadratic and exact.
    DensityTable { x: Vec<T>, cdf: Vec<T>, beta: Vec<T> },
}

/// Inverse-density prior on `(0, ∞)` represented through `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousPrior<T: Scalar = f64> {
    kind: ContinuousKind<T>,
}

impl<T: Scalar> ContinuousPrior<T> {
    pub fn power(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::param(format!(
                "power prior needs sample size n >= 2, got {n}"
            )));
        }
        Ok(Self {
            kind: ContinuousKind::Power { n },
        })
    }

    pub fn uniform01() -> Self {
        Self {
            kind: ContinuousKind::Uniform01,
        }
    }

    /// Knots `(x, β(x))` with strictly increasing `x > 0`; `(0, 0)` is
    /// prepended. `β` must be nondecreasing and satisfy `β(x) ≤ x`.
    pub fn beta_table(knots: &[(T, T)]) -> Result<Self> {
        let (x, beta) = knot_columns(knots, "beta table")?;
        for i in 1..x.len() {
            if beta[i] < beta[i - 1] {
                return Err(Error::InvalidPrior(format!(
                    "beta table: beta decreases at knot x={}",
                    x[i]
                )));
            }
            if beta[i] > x[i] * (T::one() + T::NORMALIZATION_TOL) {
                return Err(Error::InvalidPrior(format!(
                    "beta table: beta({}) = {} exceeds its argument",
                    x[i], beta[i]
                )));
            }
        }
        Ok(Self {
            kind: ContinuousKind::BetaTable { x, beta },
        })
    }

    /// Knots `(x, F(x))` of a continuous CDF supported in `[0, 1]`; `(0, 0)`
    /// is prepended and the final value must be 1.
    pub fn density_table(knots: &[(T, T)]) -> Result<Self> {
        let (x, cdf) = knot_columns(knots, "density table")?;
        let last = *x.last().unwrap();
        if last > T::one() {
            return Err(Error::InvalidPrior(format!(
                "density table: support must lie in [0,1], last knot is {last}"
            )));
        }
        for i in 1..cdf.len() {
            if cdf[i] < cdf[i - 1] {
                return Err(Error::InvalidPrior(format!(
                    "density table: CDF decreases at knot x={}",
                    x[i]
                )));
            }
        }
        let top = *cdf.last().unwrap();
        if (top - T::one()).abs() > T::lit(1e-9).max(T::NORMALIZATION_TOL) {
            return Err(Error::InvalidPrior(format!(
                "density table: CDF ends at {top}, expected 1"
            )));
        }
        let cdf: Vec<T> = cdf.iter().map(|&c| c / top).collect();
        let half = T::lit(0.5);
        let mut beta = vec![T::zero(); x.len()];
        for i in 1..x.len() {
            let d = (cdf[i] - cdf[i - 1]) / (x[i] - x[i - 1]);
            beta[i] = beta[i - 1] + d * half * (x[i] * x[i] - x[i - 1] * x[i - 1]);
        }
        Ok(Self {
            kind: ContinuousKind::DensityTable { x, cdf, beta },
        })
    }

    pub fn kind(&self) -> &ContinuousKind<T> {
        &self.kind
    }

    /// Right end of the support; `β` is constant beyond it.
    pub fn support_max(&self) -> T {
        match &self.kind {
            ContinuousKind::Power { .. } | ContinuousKind::Uniform01 => T::one(),
            ContinuousKind::BetaTable { x, .. } | ContinuousKind::DensityTable { x, .. } => {
                *x.last().unwrap()
            }
        }
    }

    /// `β(x) = ∫₀ˣ u dγ(u)`, with `β(x) = 0` for `x ≤ 0`.
    pub fn beta(&self, x: T) -> T {
        if !(x > T::zero()) {
            return T::zero();
        }
        match &self.kind {
            ContinuousKind::Power { n } => {
                let n = T::from_u32(*n).unwrap();
                let xe = if x >= T::one() {
                    T::one()
                } else {
                    x.powf(n / (n - T::one()))
                };
                xe / n
            }
            ContinuousKind::Uniform01 => {
                let c = x.min(T::one());
                c * c / T::lit(2.0)
            }
            ContinuousKind::BetaTable { x: xs, beta } => {
                let i = segment(xs, x);
                if i + 1 >= xs.len() {
                    return *beta.last().unwrap();
                }
                let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
                beta[i] + w * (beta[i + 1] - beta[i])
            }
            ContinuousKind::DensityTable { x: xs, cdf, beta } => {
                let i = segment(xs, x);
                if i + 1 >= xs.len() {
                    return *beta.last().unwrap();
                }
                let d = (cdf[i + 1] - cdf[i]) / (xs[i + 1] - xs[i]);
                beta[i] + d * T::lit(0.5) * (x * x - xs[i] * xs[i])
            }
        }
    }

    /// `β` at the right end of the support (the mean of the prior).
    pub fn beta_max(&self) -> T {
        self.beta(self.support_max())
    }

    /// Whether `β` is strictly increasing on its support.
    pub fn is_strictly_increasing(&self) -> bool {
        match &self.kind {
            ContinuousKind::Power { .. } | ContinuousKind::Uniform01 => true,
            ContinuousKind::BetaTable { beta, .. } => beta.windows(2).all(|w| w[1] > w[0]),
            ContinuousKind::DensityTable { cdf, .. } => cdf.windows(2).all(|w| w[1] > w[0]),
        }
    }

    /// Smallest `x` with `β(x) = y`, found by bisection on `[0, support_max]`.
    pub fn beta_inverse(&self, y: T) -> Result<T> {
        let top = self.beta_max();
        if !(y >= T::zero() && y <= top) {
            return Err(Error::OutOfRange {
                value: y.as_f64(),
                low: 0.0,
                high: top.as_f64(),
            });
        }
        if !self.is_strictly_increasing() {
            return Err(Error::NonInvertible("beta has flat segments".into()));
        }
        if y == T::zero() {
            return Ok(T::zero());
        }
        if y == top {
            return Ok(self.support_max());
        }
        Ok(bisect_increasing(
            T::zero(),
            self.support_max(),
            y,
            T::zero(),
            |x| self.beta(x),
        ))
    }

    /// CDF of the underlying distribution on `[0, 1]`, where it is known.
    pub fn cdf(&self, x: T) -> Result<T> {
        if !(x > T::zero()) {
            return Ok(T::zero());
        }
        match &self.kind {
            ContinuousKind::Power { n } => {
                let n = T::from_u32(*n).unwrap();
                Ok(x.min(T::one()).powf(T::one() / (n - T::one())))
            }
            ContinuousKind::Uniform01 => Ok(x.min(T::one())),
            ContinuousKind::DensityTable { x: xs, cdf, .. } => {
                let i = segment(xs, x);
                if i + 1 >= xs.len() {
                    return Ok(T::one());
                }
                let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
                Ok(cdf[i] + w * (cdf[i + 1] - cdf[i]))
            }
            ContinuousKind::BetaTable { .. } => Err(not_a_distribution()),
        }
    }

    /// Quantile function of the underlying distribution; `p ∈ [0, 1]`.
    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::OutOfRange {
                value: p.as_f64(),
                low: 0.0,
                high: 1.0,
            });
        }
        match &self.kind {
            ContinuousKind::Power { n } => Ok(p.powi(*n as i32 - 1)),
            ContinuousKind::Uniform01 => Ok(p),
            ContinuousKind::DensityTable { x: xs, cdf, .. } => {
                // first knot whose CDF reaches p
                let j = cdf.partition_point(|&c| c < p);
                if j == 0 {
                    return Ok(xs[0]);
                }
                if j >= xs.len() {
                    return Ok(*xs.last().unwrap());
                }
                let w = (p - cdf[j - 1]) / (cdf[j] - cdf[j - 1]);
                Ok(xs[j - 1] + w * (xs[j] - xs[j - 1]))
            }
            ContinuousKind::BetaTable { .. } => Err(not_a_distribution()),
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            ContinuousKind::Power { n } => format!("power({n})"),
            ContinuousKind::Uniform01 => "uniform01".into(),
            ContinuousKind::BetaTable { x, .. } => format!("beta-table({} knots)", x.len()),
            ContinuousKind::DensityTable { x, .. } => format!("density-table({} knots)", x.len()),
        }
    }
}

fn not_a_distribution() -> Error {
    Error::InvalidPrior("a beta table does not determine a sampleable distribution".into())
}

/// Index `i` with `xs[i] <= x < xs[i+1]` (or the last index).
fn segment<T: Scalar>(xs: &[T], x: T) -> usize {
    xs.partition_point(|&k| k <= x).saturating_sub(1)
}

fn knot_columns<T: Scalar>(knots: &[(T, T)], what: &str) -> Result<(Vec<T>, Vec<T>)> {
    if knots.is_empty() {
        return Err(Error::InvalidPrior(format!("{what}: no knots")));
    }
    let mut x = Vec::with_capacity(knots.len() + 1);
    let mut y = Vec::with_capacity(knots.len() + 1);
    if knots[0].0 > T::zero() {
        x.push(T::zero());
        y.push(T::zero());
    } else if knots[0].0 < T::zero() || knots[0].1 != T::zero() {
        return Err(Error::InvalidPrior(format!(
            "{what}: the first knot must be (0, 0) or have x > 0"
        )));
    }
    for &(kx, ky) in knots {
        if !kx.is_finite() || !ky.is_finite() || ky < T::zero() {
            return Err(Error::InvalidPrior(format!("{what}: bad knot ({kx}, {ky})")));
        }
        if let Some(&prev) = x.last() {
            if kx <= prev {
                return Err(Error::InvalidPrior(format!(
                    "{what}: knot abscissae must be strictly increasing (at {kx})"
                )));
            }
        }
        x.push(kx);
        y.push(ky);
    }
    if x.len() < 2 {
        return Err(Error::InvalidPrior(format!("{what}: need a knot with x > 0")));
    }
    Ok((x, y))
}

/// Anything that can evaluate `β` at an inverse density `1/θ`.
pub trait InverseDensityPrior<T: Scalar> {
    fn beta_at(&self, inverse_density: T) -> T;
}

impl<T: Scalar> InverseDensityPrior<T> for SizePrior<T> {
    /// `γ` lives on the integers, so `β` is a step function of `x`. Inverse
    /// densities within a relative `SIZE_SNAP_TOL` of an integer count as that
    /// integer (`1/(1/k)` need not round-trip exactly).
    fn beta_at(&self, inverse_density: T) -> T {
        if !(inverse_density > T::zero()) {
            return T::zero();
        }
        let snapped = (inverse_density * (T::one() + T::SIZE_SNAP_TOL)).floor();
        let k = snapped
            .to_usize()
            .unwrap_or(usize::MAX)
            .min(self.max_size());
        self.beta(k)
    }
}

impl<T: Scalar> InverseDensityPrior<T> for ContinuousPrior<T> {
    fn beta_at(&self, inverse_density: T) -> T {
        self.beta(inverse_density)
    }
}

/// `Δ(h, θ) = min(δ · π(h) · β(1/θ), 1)`, the level granted to one member of
/// the output.
pub fn level_function<T: Scalar>(delta: T, pi_h: T, beta_value: T) -> T {
    (delta * pi_h * beta_value).min(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn by_single_size_is_point_mass() {
        let p = SizePrior::<f64>::benjamini_yekutieli(1).unwrap();
        assert_eq!(p.gammas(), &[1.0]);
        assert_eq!(p.beta_partial(), &[1.0]);
    }

    #[test]
    fn by_four_matches_hand_values() {
        let p = SizePrior::<f64>::benjamini_yekutieli(4).unwrap();
        assert!(close(p.kappa().unwrap(), 25.0 / 12.0, 1e-15));
        for (got, want) in p.beta_partial().iter().zip([0.48, 0.96, 1.44, 1.92]) {
            assert!(close(*got, want, 1e-14), "{got} vs {want}");
        }
        for (k, b) in p.beta_partial().iter().enumerate() {
            assert!(*b <= (k + 1) as f64);
        }
        assert!(p.beta_partial().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn by_times_kappa_recovers_k() {
        for m in [1usize, 2, 7, 100, 1000, 10_000] {
            let p = SizePrior::<f64>::benjamini_yekutieli(m).unwrap();
            let kappa = p.kappa().unwrap();
            for k in 1..=m {
                assert!(close(p.beta(k) * kappa, k as f64, 1e-12 * k.max(1) as f64));
            }
        }
    }

    #[test]
    fn zero_pool_is_rejected() {
        assert!(matches!(
            SizePrior::<f64>::benjamini_yekutieli(0),
            Err(Error::InvalidPoolSize(0))
        ));
        assert!(matches!(SizePrior::<f64>::uniform(0), Err(Error::InvalidPoolSize(0))));
    }

    #[test]
    fn uniform_size_prior_values() {
        let p = SizePrior::<f64>::uniform(4).unwrap();
        assert!(close(p.beta(2), 0.75, 1e-15));
        assert!(close(p.beta(4), 2.5, 1e-15));
        assert_eq!(SizePrior::<f64>::uniform(1).unwrap().beta_partial(), &[1.0]);
    }

    #[test]
    fn dirac_values() {
        let p = SizePrior::<f64>::dirac(3, 5).unwrap();
        assert_eq!(p.beta_partial(), &[0.0, 0.0, 3.0, 3.0, 3.0]);
        let one = SizePrior::<f64>::dirac(1, 6).unwrap();
        assert!(one.beta_partial().iter().all(|&b| b == 1.0));
        assert_eq!(SizePrior::<f64>::dirac(1, 1).unwrap().beta_partial(), &[1.0]);
        assert!(matches!(
            SizePrior::<f64>::dirac(0, 3),
            Err(Error::InvalidSize { size: 0, max: 3 })
        ));
        assert!(SizePrior::<f64>::dirac(4, 3).is_err());
    }

    #[test]
    fn custom_size_prior() {
        let p = SizePrior::<f64>::custom(&[1.0, 1.0]).unwrap();
        assert_eq!(p.gammas(), &[0.5, 0.5]);
        assert_eq!(p.beta_partial(), &[0.5, 1.5]);
        let q = SizePrior::<f64>::custom(&[2.0, 0.0]).unwrap();
        assert_eq!(q.gammas(), &[1.0, 0.0]);
        assert_eq!(q.beta_partial(), &[1.0, 1.0]);
        assert!(SizePrior::<f64>::custom(&[0.0, 0.0]).is_err());
        assert!(SizePrior::<f64>::custom(&[1.0, -0.5]).is_err());
    }

    #[test]
    fn complexity_priors() {
        let u = ComplexityPrior::<f64>::uniform(4).unwrap();
        assert_eq!(u.weights(), &[0.25; 4]);
        let c = ComplexityPrior::<f64>::from_weights(&[3.0, 1.0]).unwrap();
        assert_eq!(c.weights(), &[0.75, 0.25]);
        assert!(ComplexityPrior::<f64>::from_weights(&[]).is_err());
        assert!(ComplexityPrior::<f64>::from_weights(&[0.0]).is_err());
        assert!(ComplexityPrior::<f64>::from_weights(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn power_prior_values() {
        let p = ContinuousPrior::<f64>::power(2).unwrap();
        assert!(close(p.beta(0.5), 0.125, 1e-15));
        assert_eq!(p.beta(0.0), 0.0);
        for n in [2u32, 3, 10, 100] {
            let p = ContinuousPrior::<f64>::power(n).unwrap();
            assert!(close(p.beta(1.0), 1.0 / n as f64, 1e-15));
            assert!(close(p.beta(7.5), 1.0 / n as f64, 1e-15));
        }
        assert!(ContinuousPrior::<f64>::power(1).is_err());
        assert!(ContinuousPrior::<f64>::power(0).is_err());
    }

    #[test]
    fn power_two_is_uniform() {
        let p = ContinuousPrior::<f64>::power(2).unwrap();
        let u = ContinuousPrior::<f64>::uniform01();
        for i in 0..=40 {
            let x = i as f64 * 0.05;
            assert!(close(p.beta(x), u.beta(x), 1e-15));
        }
    }

    #[test]
    fn beta_inverse_uniform() {
        let u = ContinuousPrior::<f64>::uniform01();
        assert!(close(u.beta_inverse(0.125).unwrap(), 0.5, 1e-12));
        assert_eq!(u.beta_inverse(0.0).unwrap(), 0.0);
        assert!(close(u.beta_inverse(0.5).unwrap(), 1.0, 1e-12));
        assert!(matches!(u.beta_inverse(0.6), Err(Error::OutOfRange { .. })));
        assert!(u.beta_inverse(-0.1).is_err());
    }

    #[test]
    fn beta_inverse_meets_stated_tolerance() {
        let priors = [
            ContinuousPrior::<f64>::uniform01(),
            ContinuousPrior::power(5).unwrap(),
            ContinuousPrior::density_table(&[(0.3, 0.1), (0.7, 0.8), (1.0, 1.0)]).unwrap(),
        ];
        for p in &priors {
            for i in 1..100 {
                let y = p.beta_max() * i as f64 / 100.0;
                let x = p.beta_inverse(y).unwrap();
                assert!((p.beta(x) - y).abs() <= 1e-12 * y.max(1.0));
            }
        }
    }

    #[test]
    fn flat_table_is_not_invertible() {
        let t = ContinuousPrior::<f64>::beta_table(&[(0.5, 0.1), (1.0, 0.1)]).unwrap();
        assert!(matches!(t.beta_inverse(0.05), Err(Error::NonInvertible(_))));
    }

    #[test]
    fn beta_table_interpolates() {
        let t = ContinuousPrior::<f64>::beta_table(&[(0.5, 0.1), (1.0, 0.4)]).unwrap();
        assert!(close(t.beta(0.25), 0.05, 1e-15));
        assert!(close(t.beta(0.75), 0.25, 1e-15));
        assert!(close(t.beta(3.0), 0.4, 1e-15));
        assert!(t.quantile(0.5).is_err());
        assert!(ContinuousPrior::<f64>::beta_table(&[(0.5, 0.6)]).is_err());
        assert!(ContinuousPrior::<f64>::beta_table(&[(0.5, 0.2), (0.6, 0.1)]).is_err());
    }

    #[test]
    fn density_table_uniform_matches_closed_form() {
        let t = ContinuousPrior::<f64>::density_table(&[(1.0, 1.0)]).unwrap();
        let u = ContinuousPrior::<f64>::uniform01();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert!(close(t.beta(x), u.beta(x), 1e-15));
            assert!(close(t.quantile(x).unwrap(), x, 1e-15));
        }
        assert!(ContinuousPrior::<f64>::density_table(&[(1.0, 0.5)]).is_err());
        assert!(ContinuousPrior::<f64>::density_table(&[(2.0, 1.0)]).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let p = ContinuousPrior::<f64>::power(4).unwrap();
        for i in 0..=10 {
            let q = i as f64 / 10.0;
            assert!(close(p.cdf(p.quantile(q).unwrap()).unwrap(), q, 1e-12));
        }
    }

    #[test]
    fn level_function_examples() {
        assert_eq!(level_function(0.0, 0.3, 2.0), 0.0);
        assert!(close(level_function(0.05, 0.25, 0.48), 0.006, 1e-15));
        assert_eq!(level_function(1.0, 1.0, 5.0), 1.0);
    }

    #[test]
    fn inverse_density_snaps_to_integer_sizes() {
        let p = SizePrior::<f64>::benjamini_yekutieli(100).unwrap();
        for k in 1..=100usize {
            let theta = 1.0 / k as f64;
            assert_eq!(p.beta_at(1.0 / theta), p.beta(k));
        }
        assert_eq!(p.beta_at(0.5), 0.0);
        assert_eq!(p.beta_at(1e9), p.beta(100));
    }

    #[test]
    fn single_precision_priors() {
        let p = SizePrior::<f32>::benjamini_yekutieli(4).unwrap();
        assert!((p.beta(4) - 1.92).abs() < 1e-6);
        let u = ContinuousPrior::<f32>::uniform01();
        assert!((u.beta_inverse(0.125).unwrap() - 0.5).abs() < 1e-6);
    }
}
