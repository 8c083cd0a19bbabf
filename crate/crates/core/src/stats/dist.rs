//! Thin wrappers over `statrs` for the distributions the battery needs.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn t_cdf(t: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").cdf(t)
}

/// Two-sided tail probability `P(|T| >= |t|)`.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    ChiSquared::new(df).expect("df > 0").cdf(x)
}

pub fn chi2_sf(x: f64, df: f64) -> f64 {
    ChiSquared::new(df).expect("df > 0").sf(x)
}
