//! Standard normal distribution helpers.

use statrs::distribution::{ContinuousCDF, Normal};

/// `Phi(x)`, accurate in both tails.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Phi^{-1}(p)` for `p` in `(0, 1)`.
pub fn quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn known_values() {
        assert_abs_diff_eq!(cdf(0.0), 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(cdf(1.0), 0.841344746068543, epsilon = 1e-14);
        assert_abs_diff_eq!(cdf(-1.0) + cdf(1.0), 1.0, epsilon = 1e-15);
        assert!(cdf(-40.0) > 0.0 || cdf(-40.0) == 0.0);
        assert_abs_diff_eq!(quantile(0.975), 1.959963984540054, epsilon = 1e-9);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for x in [-3.0, -1.2, 0.0, 0.4, 2.5] {
            assert_abs_diff_eq!(quantile(cdf(x)), x, epsilon = 1e-8);
        }
    }

    #[test]
    fn pdf_integrates_to_cdf_increment() {
        let n = 10_000;
        let h = 2.0 / n as f64;
        let s: f64 = (0..n).map(|i| pdf(-1.0 + (i as f64 + 0.5) * h) * h).sum();
        assert_abs_diff_eq!(s, cdf(1.0) - cdf(-1.0), epsilon = 1e-8);
    }
}
