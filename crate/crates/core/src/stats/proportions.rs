use super::dist::chi2_sf;
use super::{Result, StatsError};

/// Pearson χ² for the 2×2 table (k1, n1-k1; k2, n2-k2), no continuity
/// correction, with its 1-df upper-tail p-value.
pub fn chi2_two_proportions(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<(f64, f64)> {
    if n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2 {
        return Err(StatsError::Invalid(format!("counts ({k1}/{n1}, {k2}/{n2})")));
    }
    let successes = k1 + k2;
    let failures = (n1 - k1) + (n2 - k2);
    if successes == 0 || failures == 0 {
        return Err(StatsError::Invalid("a margin of the table is zero".into()));
    }
    let n = (n1 + n2) as f64;
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let (sf, ff) = (successes as f64, failures as f64);
    let observed = [
        (k1 as f64, n1f * sf / n),
        ((n1 - k1) as f64, n1f * ff / n),
        (k2 as f64, n2f * sf / n),
        ((n2 - k2) as f64, n2f * ff / n),
    ];
    let chi2: f64 = observed.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    Ok((chi2, chi2_sf(chi2, 1.0)))
}

/// Relative difference `100 (with - without) / without`.
pub fn percent_difference(p_with: f64, p_without: f64) -> Result<f64> {
    if p_without == 0.0 || !p_without.is_finite() || !p_with.is_finite() {
        return Err(StatsError::Invalid(format!("baseline proportion {p_without}")));
    }
    Ok(100.0 * (p_with - p_without) / p_without)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_proportions() {
        let (c, p) = chi2_two_proportions(10, 20, 10, 20).unwrap();
        assert_eq!(c, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
    }

    // Table [[0, 10], [10, 0]]: every expected count is 5, so
    // χ² = 4 · 5² / 5 = 20.
    #[test]
    fn fully_separated_table() {
        let (c, p) = chi2_two_proportions(0, 10, 10, 10).unwrap();
        assert!((c - 20.0).abs() < 1e-12);
        assert!(p < 1e-4);
    }

    #[test]
    fn large_sample_difference() {
        let (_, p) = chi2_two_proportions(293_000, 1_000_000, 167_000, 1_000_000).unwrap();
        assert!(p < 1e-4);
    }

    #[test]
    fn invalid_tables() {
        assert!(chi2_two_proportions(0, 0, 1, 2).is_err());
        assert!(chi2_two_proportions(3, 2, 1, 2).is_err());
        assert!(chi2_two_proportions(0, 5, 0, 5).is_err());
        assert!(chi2_two_proportions(5, 5, 5, 5).is_err());
    }

    #[test]
    fn percent_differences() {
        assert!((percent_difference(29.3, 16.7).unwrap() - 75.449).abs() < 1e-3);
        assert!((percent_difference(27.0, 16.66).unwrap() - 62.065).abs() < 1e-3);
        assert_eq!(percent_difference(0.2, 0.2).unwrap(), 0.0);
        assert!(percent_difference(0.2, 0.0).is_err());
    }
}
