//! Scalar abstraction shared by the priors, bounds and step-up code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the numeric core is written against.
///
/// Implemented for `f32` and `f64`. The associated tolerances scale with the
/// precision of the type; the `f64` values are the ones the test-suite pins.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance on the total mass of a probability vector.
    const NORMALIZATION_TOL: Self;
    /// Relative slack used when snapping an inverse density onto an integer size.
    const SIZE_SNAP_TOL: Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const NORMALIZATION_TOL: f64 = 1e-12;
    const SIZE_SNAP_TOL: f64 = 1e-9;
}

impl Scalar for f32 {
    const NORMALIZATION_TOL: f32 = 1e-5;
    const SIZE_SNAP_TOL: f32 = 1e-5;
}
