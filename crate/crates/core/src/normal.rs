//! Standard Gaussian tail and quantile helpers.

use libm::erfc;

use crate::root::bisect_increasing;

/// `P(Z > z)` for a standard Gaussian, via the complementary error function.
pub fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `t` with `P(Z > t) = level`, by bisection on the tail.
///
/// `level` must lie in `(0, 1)`; the bracket `[-40, 40]` covers every level
/// representable as a normal `f64`.
pub fn upper_quantile(level: f64) -> f64 {
    debug_assert!(level > 0.0 && level < 1.0, "level {level}");
    // -tail is increasing in t
    bisect_increasing(-40.0, 40.0, -level, 0.0, |t| -upper_tail(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((upper_tail(0.0) - 0.5).abs() < 1e-16);
        assert!((upper_tail(1.959963984540054) - 0.025).abs() < 1e-15);
        assert!((cdf(-1.0) - 0.15865525393145707).abs() < 1e-15);
        assert!((upper_quantile(0.05) - 1.6448536269514729).abs() < 1e-12);
        assert!((upper_quantile(0.5)).abs() < 1e-14);
    }

    #[test]
    fn quantile_inverts_tail_deep() {
        for level in [1e-300, 1e-100, 1e-12, 1e-3, 0.2, 0.7, 0.999] {
            let t = upper_quantile(level);
            assert!(((upper_tail(t) - level) / level).abs() < 1e-10, "{level}");
        }
    }
}
