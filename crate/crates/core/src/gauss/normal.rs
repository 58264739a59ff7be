use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail 1 − Φ(x), accurate for large x.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile; ±∞ at the endpoints.
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = Normal::standard().inverse_cdf(p);
    // polish against the accurate CDF
    for _ in 0..2 {
        let dens = norm_pdf(x);
        if dens <= 0.0 {
            break;
        }
        let err = if x > 0.0 { (1.0 - p) - norm_sf(x) } else { norm_cdf(x) - p };
        x -= err / dens;
    }
    x
}

/// Probability that both coordinates of a ρ-correlated standard pair are ≤ 0.
pub fn orthant_probability(rho: f64) -> f64 {
    0.25 + rho.clamp(-1.0, 1.0).asin() / (2.0 * std::f64::consts::PI)
}
