//! Occam's hammer toolkit.
//!
//! Prior-weighted level functions for algorithms that output a set (or a
//! density) of hypotheses, and what they give in practice:
//!
//! - [`priors`]: complexity priors `π`, size priors `γ` and their `β` maps,
//!   and the level function `min(δ·π(h)·β(1/θ), 1)`.
//! - [`multitest`]: the prior-weighted step-up procedure with
//!   distribution-free FDR control, Benjamini–Yekutieli/Hochberg baselines and
//!   an exhaustive oracle.
//! - [`bounds`]: one-sided Bernoulli KL, its inversion, the
//!   randomized-classifier bound and binomial tail inversion.
//! - [`simulate`] and [`sharpness`]: seeded, order-independent Monte Carlo
//!   checks of every guarantee, and the construction showing the bound is
//!   attained.
//! - [`io`]: CSV inputs and deterministic JSON/CSV reports.
//!
//! The numeric core (`priors`, `multitest`, `bounds`) is generic over
//! [`Scalar`] (`f32` or `f64`); the aliases below fix the precision.

// NaN-rejecting checks are written as `!(x >= lo)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod io;
pub mod multitest;
pub mod normal;
pub mod priors;
pub mod root;
pub mod scalar;
pub mod sharpness;
pub mod simulate;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type HypothesisPoolF64 = multitest::HypothesisPool<f64>;
pub type HypothesisPoolF32 = multitest::HypothesisPool<f32>;
pub type StepUpResultF64 = multitest::StepUpResult<f64>;
pub type StepUpResultF32 = multitest::StepUpResult<f32>;
pub type ComplexityPriorF64 = priors::ComplexityPrior<f64>;
pub type ComplexityPriorF32 = priors::ComplexityPrior<f32>;
pub type SizePriorF64 = priors::SizePrior<f64>;
pub type SizePriorF32 = priors::SizePrior<f32>;
pub type ContinuousPriorF64 = priors::ContinuousPrior<f64>;
pub type ContinuousPriorF32 = priors::ContinuousPrior<f32>;
