//! Standard normal CDF, density, and quantile.

use statrs::distribution::{ContinuousCDF, Normal};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal parameters are valid")
}

/// Φ(t), the standard normal CDF.
pub fn phi_cdf(t: f64) -> f64 {
    std_normal().cdf(t)
}

/// φ(t), the standard normal density.
pub fn phi_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Φ⁻¹(s) for s in (0,1).
pub fn phi_inv(s: f64) -> f64 {
    std_normal().inverse_cdf(s)
}
