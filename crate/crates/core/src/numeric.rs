//! Numerically stable logistic helpers.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Logistic sigmoid `1 / (1 + exp(-x))` without overflow for large `|x|`.
#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    let e = (-x.abs()).exp();
    let recip = T::one() / (T::one() + e);
    if x >= T::zero() {
        recip
    } else {
        e * recip
    }
}

/// `log(1 + exp(x))`.
#[inline]
pub fn softplus<T: Real>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

/// `log(sigmoid(x)) = -softplus(-x)`.
#[inline]
pub fn log_sigmoid<T: Real>(x: T) -> T {
    -softplus(-x)
}

/// Log odds `log(p) - log(1 - p)`; rejects `p` outside the open unit interval.
pub fn logit<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::LogitDomain { value: p.as_f64() });
    }
    Ok(p.ln() - (-p).ln_1p())
}

/// Odds-ratio of two probabilities, `odds(p1) / odds(p0)`.
pub fn odds_ratio<T: Real>(p1: T, p0: T) -> T {
    (p1 / (T::one() - p1)) / (p0 / (T::one() - p0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sigmoid_matches_naive_in_safe_range() {
        for &x in &[-20.0f64, -3.0, -0.5, 0.0, 0.5, 3.0, 20.0] {
            assert_relative_eq!(sigmoid(x), 1.0 / (1.0 + (-x).exp()), max_relative = 1e-15);
        }
        assert_eq!(sigmoid(0.0f64), 0.5);
    }

    #[test]
    fn log_sigmoid_is_finite_at_extremes() {
        assert!(log_sigmoid(-800.0f64).is_finite());
        assert_relative_eq!(log_sigmoid(-800.0f64), -800.0, max_relative = 1e-15);
        assert_eq!(log_sigmoid(800.0f64), -0.0);
        assert_relative_eq!(
            log_sigmoid(50.0f64),
            -(-50.0f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn logit_inverts_sigmoid() {
        for &x in &[-10.0f64, -1.0, 0.0, 0.3, 7.5] {
            assert_relative_eq!(logit(sigmoid(x)).unwrap(), x, epsilon = 1e-12);
        }
    }

    #[test]
    fn logit_rejects_boundary() {
        assert!(logit(0.0f64).is_err());
        assert!(logit(1.0f64).is_err());
        assert!(logit(f64::NAN).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        assert!((sigmoid(1.0f32) - 0.731_058_6).abs() < 1e-6);
        assert!(log_sigmoid(-200.0f32).is_finite());
    }
}
