//! Bracketed bisection for monotone maps.

use crate::scalar::Scalar;

/// Iteration cap shared by every bisection in the crate.
pub const MAX_BISECTION_STEPS: usize = 200;

/// Largest `x` in `[lo, hi]` with `pred(x)` true, for a predicate that is true
/// on an initial segment of the bracket.
///
/// `pred(lo)` is assumed true. Stops once the bracket is no wider than `tol`
/// or the midpoint can no longer be separated from an endpoint. The returned
/// point always satisfies `pred`.
pub fn bisect_last_true<T, F>(mut lo: T, mut hi: T, tol: T, mut pred: F) -> T
where
    T: Scalar,
    F: FnMut(T) -> bool,
{
    if pred(hi) {
        return hi;
    }
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Root of a nondecreasing `f` on `[lo, hi]` with `f(lo) <= target <= f(hi)`.
///
/// Returns the left end of the final bracket, i.e. the smallest resolved
/// point with `f(x) >= target` pulled back by at most `tol`.
pub fn bisect_increasing<T, F>(mut lo: T, mut hi: T, target: T, tol: T, mut f: F) -> T
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick whichever endpoint lands closer to the target.
    if (f(hi) - target).abs() < (f(lo) - target).abs() {
        hi
    } else {
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_square_root() {
        let r = bisect_increasing(0.0_f64, 2.0, 2.0, 0.0, |x| x * x);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn last_true_stays_feasible() {
        let x = bisect_last_true(0.0_f64, 1.0, 1e-12, |x| x <= 0.3);
        assert!(x <= 0.3 && 0.3 - x < 1e-12);
        assert_eq!(bisect_last_true(0.0_f64, 1.0, 1e-12, |_| true), 1.0);
    }

    #[test]
    fn works_in_single_precision() {
        let r = bisect_increasing(0.0_f32, 4.0, 9.0, 0.0, |x| x * x);
        assert!((r - 3.0).abs() < 1e-6);
    }
}
