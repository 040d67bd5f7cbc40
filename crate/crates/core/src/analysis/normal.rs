//! Standard normal helpers.

use libm::erfc;
use std::f64::consts::FRAC_1_SQRT_2;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Gaussian tail probability `Q(x) = 1 - Phi(x)`.
pub fn q_function(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Inverse Mills ratio `phi(t) / Q(t)`, accurate far into the tail where
/// both factors underflow.
pub fn mills(t: f64) -> f64 {
    if t < 5.0 {
        return pdf(t) / q_function(t);
    }
    // Q(t)/phi(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...)))), evaluated bottom-up.
    let mut tail = t;
    for k in (1..=60).rev() {
        tail = t + k as f64 / tail;
    }
    tail
}

/// `phi(t) / Phi(t)`.
pub fn mills_lower(t: f64) -> f64 {
    mills(-t)
}


#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn q_reference_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(1.6449) - 0.05).abs() < 1e-4);
        assert!((q_function(1.959_963_984_540_054) - 0.025).abs() < 1e-12);
        assert_eq!(q_function(f64::INFINITY), 0.0);
        assert_eq!(q_function(f64::NEG_INFINITY), 1.0);
        for x in [0.1, 0.7, 2.5, 6.0] {
            assert!((q_function(-x) - (1.0 - q_function(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn q_is_monotone() {
        let mut prev = 1.0;
        for i in -80..80 {
            let q = q_function(i as f64 * 0.1);
            assert!(q <= prev);
            prev = q;
        }
    }

    #[test]
    fn mills_continuity_and_asymptote() {
        let direct = pdf(5.0) / q_function(5.0);
        let cf = {
            let mut tail = 5.0;
            for k in (1..=60).rev() {
                tail = 5.0 + k as f64 / tail;
            }
            tail
        };
        assert!((direct / cf - 1.0).abs() < 1e-9);
        // lambda(t) = t + 1/t - 2/t^3 + O(t^-5)
        let t = 50.0;
        assert!((mills(t) - (t + 1.0 / t - 2.0 / t.powi(3))).abs() < 1e-7);
        assert!(mills(-40.0) >= 0.0 && mills(-40.0) < 1e-300);
        assert!((mills(0.0) - 2.0 * pdf(0.0)).abs() < 1e-15);
    }

    #[test]
    fn pdf_integrates_to_cdf_difference() {
        let h = 1e-4;
        let acc: f64 = (0..20_000)
            .map(|i| pdf(-1.0 + (i as f64 + 0.5) * h) * h)
            .sum();
        assert!((acc - (cdf(1.0) - cdf(-1.0))).abs() < 1e-8);
        assert!(((2.0 * PI).sqrt() * pdf(0.0) - 1.0).abs() < 1e-15);
    }
}
