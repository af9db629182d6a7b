//! Tightness construction on a discretized circle.
//!
//! Hypotheses are the points of `[0,1)` with the ends identified, discretized
//! into `grid_n` equispaced points. Given a prior `ν` on set sizes and a
//! level `α₀`, each trial draws a start `x` and `u = α₀·V` with `V ~ ν`, sets
//!
//! ```text
//! X_h = G(u)   on [x, x + u)        G(u) = t(α₀·β(u/α₀))
//! X_h = Y      elsewhere            Y ~ P conditioned below t(α₀·β(1))
//! ```
//!
//! with `t(α)` the upper `α`-quantile of the marginal `P`, and returns
//! `A = [x, x + u/α₀)`. Every covered point of `A` reaches the threshold
//! `t(α₀·β(|A|))` and no other point does, so the false prediction rate is
//! `|[x, x+u)| / |A| = α₀` up to grid rounding, and `|A| ~ ν`.
//!
//! On the grid both intervals are half-open and start at a grid point, so the
//! grid measure of `A` never undershoots `u/α₀`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal;
use crate::priors::ContinuousPrior;
use crate::simulate::{kahan_sum, trial_rng};

/// Smallest admissible circle discretization.
pub const MIN_GRID: usize = 100;

/// Atomless marginal distribution of each `X_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Marginal {
    Gaussian { mean: f64, sd: f64 },
}

impl Default for Marginal {
    fn default() -> Self {
        Marginal::Gaussian { mean: 0.0, sd: 1.0 }
    }
}

impl Marginal {
    pub fn upper_tail(&self, x: f64) -> f64 {
        match *self {
            Marginal::Gaussian { mean, sd } => normal::upper_tail((x - mean) / sd),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Gaussian { mean, sd } => normal::cdf((x - mean) / sd),
        }
    }

    /// `t(α)` with `P(X > t) = α`; `+∞` at `α = 0` and `−∞` at `α = 1`.
    pub fn upper_quantile(&self, level: f64) -> f64 {
        if level <= 0.0 {
            return f64::INFINITY;
        }
        if level >= 1.0 {
            return f64::NEG_INFINITY;
        }
        match *self {
            Marginal::Gaussian { mean, sd } => mean + sd * normal::upper_quantile(level),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Marginal::Gaussian { mean, sd } => mean + sd * rng.sample::<f64, _>(StandardNormal),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Marginal::Gaussian { mean, sd } if mean.is_finite() && sd.is_finite() && sd > 0.0 => {
                Ok(())
            }
            Marginal::Gaussian { .. } => Err(Error::param("gaussian marginal needs finite mean and sd > 0")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SharpnessConfig {
    pub alpha0: f64,
    pub nu: ContinuousPrior<f64>,
    pub grid_n: usize,
    pub marginal: Marginal,
    pub trials: u64,
    pub seed: u64,
}

/// The constructed family: threshold map `G`, cut-off `T` and the
/// below-cut-off sampler.
#[derive(Debug, Clone)]
pub struct SharpnessModel {
    alpha0: f64,
    nu: ContinuousPrior<f64>,
    marginal: Marginal,
    cutoff: f64,
}

impl SharpnessModel {
    pub fn build(alpha0: f64, nu: ContinuousPrior<f64>, marginal: Marginal) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0 < 1.0) {
            return Err(Error::param(format!("alpha0 must lie in (0, 1), got {alpha0}")));
        }
        marginal.validate()?;
        if !nu.is_strictly_increasing() {
            return Err(Error::NonInvertible(format!(
                "beta of {} has flat segments",
                nu.describe()
            )));
        }
        // the construction draws sizes from ν, so ν must be a distribution
        nu.quantile(0.5)?;
        if nu.support_max() > 1.0 {
            return Err(Error::InvalidPrior("size prior must live on [0, 1]".into()));
        }
        let cutoff = marginal.upper_quantile(alpha0 * nu.beta_max());
        Ok(Self {
            alpha0,
            nu,
            marginal,
            cutoff,
        })
    }

    pub fn from_config(config: &SharpnessConfig) -> Result<Self> {
        Self::build(config.alpha0, config.nu.clone(), config.marginal)
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn nu(&self) -> &ContinuousPrior<f64> {
        &self.nu
    }

    pub fn marginal(&self) -> Marginal {
        self.marginal
    }

    /// Upper `α`-quantile `t(α)` of the marginal.
    pub fn threshold(&self, level: f64) -> f64 {
        self.marginal.upper_quantile(level)
    }

    /// Cut-off `T = t(α₀·β(1))` separating covered values from `Y`.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// `G(u) = t(α₀·β(u/α₀))`, decreasing in `u ∈ (0, α₀]`.
    pub fn g(&self, u: f64) -> f64 {
        self.threshold(self.alpha0 * self.nu.beta(u / self.alpha0))
    }

    /// `α₀·β⁻¹(α/α₀)`: the `u` at which `G(u) = t(α)`, for
    /// `α ≤ α₀·β(1)`.
    pub fn u_for_level(&self, level: f64) -> Result<f64> {
        Ok(self.alpha0 * self.nu.beta_inverse(level / self.alpha0)?)
    }

    /// Draws `u ~ Q`, the image of `ν` under `x ↦ α₀x`.
    pub fn sample_u(&self, rng: &mut ChaCha8Rng) -> f64 {
        let p: f64 = rng.random();
        self.alpha0 * self.nu.quantile(p).expect("checked at build time")
    }

    /// `Y ~ P` conditioned below the cut-off, by rejection.
    pub fn sample_below(&self, rng: &mut ChaCha8Rng) -> f64 {
        loop {
            let y = self.marginal.sample(rng);
            if y < self.cutoff {
                return y;
            }
        }
    }
}

/// One realization of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpnessTrial {
    pub x: f64,
    pub u: f64,
    pub fpr: f64,
    /// Grid measure of `A`.
    pub set_size: f64,
    /// `A` contains no grid point; the rate is 0 by convention.
    pub degenerate: bool,
}

/// Number of grid offsets `j` with `j/grid_n < length`.
fn grid_count(length: f64, grid_n: usize) -> usize {
    ((length * grid_n as f64).ceil().max(0.0) as usize).min(grid_n)
}

fn check_grid(grid_n: usize) -> Result<()> {
    if grid_n < MIN_GRID {
        Err(Error::param(format!("grid_n must be at least {MIN_GRID}, got {grid_n}")))
    } else {
        Ok(())
    }
}

/// Evaluates one trial with a given start index and `u`.
pub fn run_trial_at(
    model: &SharpnessModel,
    grid_n: usize,
    start: usize,
    u: f64,
    rng: &mut ChaCha8Rng,
) -> SharpnessTrial {
    let x = start as f64 / grid_n as f64;
    let covered = grid_count(u, grid_n);
    let in_set = grid_count(u / model.alpha0, grid_n);
    if in_set == 0 {
        return SharpnessTrial {
            x,
            u,
            fpr: 0.0,
            set_size: 0.0,
            degenerate: true,
        };
    }
    let set_size = in_set as f64 / grid_n as f64;
    let cut = model.threshold(model.alpha0 * model.nu.beta(set_size));
    let g = model.g(u);
    let mut exceed = 0usize;
    for offset in 0..in_set {
        // grid point (start + offset) mod grid_n
        let value = if offset < covered {
            g
        } else {
            model.sample_below(rng)
        };
        // p-value ≤ level  <=>  value ≥ t(level)
        if value >= cut {
            exceed += 1;
        }
    }
    SharpnessTrial {
        x,
        u,
        fpr: exceed as f64 / in_set as f64,
        set_size,
        degenerate: false,
    }
}

/// Draws the start point and `u`, then evaluates the trial.
pub fn run_trial(model: &SharpnessModel, grid_n: usize, rng: &mut ChaCha8Rng) -> Result<SharpnessTrial> {
    check_grid(grid_n)?;
    let start = rng.random_range(0..grid_n);
    let u = model.sample_u(rng);
    Ok(run_trial_at(model, grid_n, start, u, rng))
}

/// Value of `X_h` at grid point `h` for one fresh draw of the construction.
pub fn sample_value_at(model: &SharpnessModel, grid_n: usize, h: usize, rng: &mut ChaCha8Rng) -> f64 {
    let start = rng.random_range(0..grid_n);
    let u = model.sample_u(rng);
    let offset = (h % grid_n + grid_n - start) % grid_n;
    if offset < grid_count(u, grid_n) {
        model.g(u)
    } else {
        model.sample_below(rng)
    }
}

/// Aggregate of a sharpness run.
#[derive(Debug, Clone, Serialize)]
pub struct SharpnessSummary {
    pub trials: u64,
    pub alpha0: f64,
    pub grid_n: usize,
    pub nu: String,
    pub seed: u64,
    /// Mean rate over non-degenerate trials.
    pub mean_fpr: f64,
    pub std_error: f64,
    pub degenerate: u64,
    /// Kolmogorov–Smirnov distance between the `|A|` sample and `ν`.
    pub ks_set_size: f64,
    #[serde(skip)]
    pub rows: Vec<SharpnessTrial>,
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs())
    })
}

/// Runs `config.trials` independent trials and summarizes them.
pub fn estimate(config: &SharpnessConfig) -> Result<SharpnessSummary> {
    if config.trials == 0 {
        return Err(Error::param("at least one trial is required"));
    }
    check_grid(config.grid_n)?;
    let model = SharpnessModel::from_config(config)?;
    let rows: Vec<SharpnessTrial> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(&model, config.grid_n, &mut trial_rng(config.seed, t)))
        .collect::<Result<_>>()?;

    let kept: Vec<f64> = rows.iter().filter(|r| !r.degenerate).map(|r| r.fpr).collect();
    let degenerate = rows.len() as u64 - kept.len() as u64;
    let (mean_fpr, std_error) = if kept.is_empty() {
        (0.0, 0.0)
    } else {
        let n = kept.len() as f64;
        let mean = kahan_sum(kept.iter().copied()) / n;
        let ss = kahan_sum(kept.iter().map(|v| (v - mean) * (v - mean)));
        let var = if kept.len() > 1 { ss / (n - 1.0) } else { 0.0 };
        (mean, (var / n).sqrt())
    };
    let sizes: Vec<f64> = rows.iter().map(|r| r.set_size).collect();
    let nu = model.nu();
    let ks_set_size = ks_distance(&sizes, |x| nu.cdf(x).unwrap_or(f64::NAN));
    Ok(SharpnessSummary {
        trials: config.trials,
        alpha0: config.alpha0,
        grid_n: config.grid_n,
        nu: nu.describe(),
        seed: config.seed,
        mean_fpr,
        std_error,
        degenerate,
        ks_set_size,
        rows,
    })
}
