use macroscope::stats::dist::{chi2_cdf, normal_cdf, normal_quantile, t_cdf};
use macroscope::stats::regression::{lagged_regression_hac_with, HacOptions};
use macroscope::stats::{
    dcca, fisher_ci, kpss_with_lag, lagged_regression_hac, pearson, permutation_test, roc_auc, PermutationConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Quadrature oracle

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rule = gauss_legendre(20);
    let panels = 200;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            rule.iter().map(|(x, w)| w * f(lo + h * (x + 1.0) / 2.0)).sum::<f64>() * h / 2.0
        })
        .sum()
}

/// Γ(k/2) for positive integer k by the half-step recurrence.
fn gamma_half(k: u32) -> f64 {
    let (mut g, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while x < k as f64 / 2.0 - 1e-9 {
        g *= x;
        x += 1.0;
    }
    g
}

fn normal_oracle(x: f64) -> f64 {
    let pdf = |u: f64| (-u * u / 2.0).exp() / (2.0 * PI).sqrt();
    0.5 + integrate(pdf, 0.0, x)
}

fn t_oracle(t: f64, df: u32) -> f64 {
    let v = df as f64;
    let c = gamma_half(df + 1) / ((v * PI).sqrt() * gamma_half(df));
    let pdf = |u: f64| c * (1.0 + u * u / v).powf(-(v + 1.0) / 2.0);
    0.5 + integrate(pdf, 0.0, t)
}

/// Substituting x = u² keeps the integrand smooth at zero for every df.
fn chi2_oracle(x: f64, df: u32) -> f64 {
    let k = df as f64;
    let c = 2.0 / (2f64.powf(k / 2.0) * gamma_half(df));
    integrate(|u| c * u.powf(k - 1.0) * (-u * u / 2.0).exp(), 0.0, x.sqrt())
}

#[test]
fn gamma_half_values() {
    assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
    assert_eq!(gamma_half(2), 1.0);
    assert_eq!(gamma_half(8), 6.0);
    assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-14);
}

#[test]
fn normal_cdf_against_quadrature() {
    for i in 0..100 {
        let x = -6.0 + 12.0 * i as f64 / 99.0;
        let (got, want) = (normal_cdf(x), normal_oracle(x));
        assert!((got - want).abs() < 1e-8, "x={x}: {got} vs {want}");
    }
}

#[test]
fn normal_quantile_inverts_oracle() {
    for i in 1..100 {
        let p = i as f64 / 100.0;
        assert!((normal_oracle(normal_quantile(p)) - p).abs() < 1e-8, "p={p}");
    }
    assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-9);
}

#[test]
fn t_cdf_against_quadrature() {
    let dfs = [1, 2, 3, 5, 8, 13, 33, 68, 102, 7];
    for i in 0..100 {
        let t = -8.0 + 16.0 * i as f64 / 99.0;
        let df = dfs[i % dfs.len()];
        let (got, want) = (t_cdf(t, df as f64), t_oracle(t, df));
        assert!((got - want).abs() < 1e-8, "t={t} df={df}: {got} vs {want}");
    }
}

#[test]
fn chi2_cdf_against_quadrature() {
    let dfs = [1, 2, 3, 4, 5, 9];
    for i in 0..100 {
        let x = 0.01 + 30.0 * i as f64 / 99.0;
        let df = dfs[i % dfs.len()];
        let (got, want) = (chi2_cdf(x, df as f64), chi2_oracle(x, df));
        assert!((got - want).abs() < 1e-8, "x={x} df={df}: {got} vs {want}");
    }
}

// ---------------------------------------------------------------------------
// DCCA

fn ar1_pair(rng: &mut ChaCha8Rng, n: usize, phi: f64, coupling: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut x, mut y) = (vec![0.0], vec![0.0]);
    for t in 1..n {
        let common: f64 = rng.sample(StandardNormal);
        let ex: f64 = rng.sample(StandardNormal);
        let ey: f64 = rng.sample(StandardNormal);
        x.push(phi * x[t - 1] + coupling * common + ex);
        y.push(phi * y[t - 1] + coupling * common + ey);
    }
    (x, y)
}

fn profile(v: &[f64]) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter()
        .scan(0.0, |s, a| {
            *s += a - m;
            Some(*s)
        })
        .collect()
}

fn line_residuals(seg: &[f64]) -> Vec<f64> {
    let n = seg.len() as f64;
    let tm = (n - 1.0) / 2.0;
    let ym = seg.iter().sum::<f64>() / n;
    let sxy: f64 = seg.iter().enumerate().map(|(t, y)| (t as f64 - tm) * (y - ym)).sum();
    let sxx: f64 = (0..seg.len()).map(|t| (t as f64 - tm).powi(2)).sum();
    let b = sxy / sxx;
    seg.iter().enumerate().map(|(t, y)| y - ym - b * (t as f64 - tm)).collect()
}

/// Box-by-box detrending with explicit residual vectors.
fn naive_dcca(x: &[f64], y: &[f64], w: usize) -> f64 {
    let (px, py) = (profile(x), profile(y));
    let (mut fxy, mut fxx, mut fyy) = (0.0, 0.0, 0.0);
    for s in 0..=px.len() - w {
        let rx = line_residuals(&px[s..s + w]);
        let ry = line_residuals(&py[s..s + w]);
        for (a, b) in rx.iter().zip(&ry) {
            fxy += a * b;
            fxx += a * a;
            fyy += b * b;
        }
    }
    fxy / (fxx * fyy).sqrt()
}

#[test]
fn dcca_matches_naive_boxes() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (n, w) in [(30, 4), (50, 7), (120, 12), (121, 30), (64, 64)] {
        let (x, y) = ar1_pair(&mut rng, n, 0.7, 0.8);
        let got = dcca(&x, &y, w).unwrap().rho;
        let want = naive_dcca(&x, &y, w);
        assert!((got - want).abs() < 1e-9, "n={n} w={w}: {got} vs {want}");
    }
}

#[test]
fn single_box_dcca_is_pearson_of_detrended_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let (x, y) = ar1_pair(&mut rng, 80, 0.5, 1.0);
    let rx = line_residuals(&profile(&x));
    let ry = line_residuals(&profile(&y));
    let r = pearson(&rx, &ry).unwrap();
    assert!((dcca(&x, &y, 80).unwrap().rho - r).abs() < 1e-10);
}

// ---------------------------------------------------------------------------
// HAC

fn hac_oracle_se_beta(y: &[f64], x: &[f64], lag: usize) -> f64 {
    let m = y.len() - 1;
    let rows: Vec<[f64; 3]> = (0..m).map(|t| [1.0, x[t + 1], y[t]]).collect();
    let target: Vec<f64> = y[1..].to_vec();
    let mut xtx = nalgebra::Matrix3::<f64>::zeros();
    let mut xty = nalgebra::Vector3::<f64>::zeros();
    for (r, v) in rows.iter().zip(&target) {
        for i in 0..3 {
            xty[i] += r[i] * v;
            for j in 0..3 {
                xtx[(i, j)] += r[i] * r[j];
            }
        }
    }
    let inv = xtx.try_inverse().unwrap();
    let b = inv * xty;
    let e: Vec<f64> = rows
        .iter()
        .zip(&target)
        .map(|(r, v)| v - (b[0] * r[0] + b[1] * r[1] + b[2] * r[2]))
        .collect();
    let mut meat = nalgebra::Matrix3::<f64>::zeros();
    for l in 0..=lag {
        let w = if l == 0 { 1.0 } else { 1.0 - l as f64 / (lag as f64 + 1.0) };
        for t in l..m {
            for i in 0..3 {
                for j in 0..3 {
                    let g = rows[t][i] * e[t] * rows[t - l][j] * e[t - l];
                    meat[(i, j)] += w * g;
                    if l > 0 {
                        meat[(j, i)] += w * g;
                    }
                }
            }
        }
    }
    (inv * meat * inv)[(1, 1)].sqrt()
}

/// Persistent regressor, lagged dependent variable and errors whose scale
/// depends on the regressor. `error_ar` > 0 makes the errors serially
/// correlated, which biases OLS once `y_{t-1}` is a regressor.
fn regression_data_with(rng: &mut ChaCha8Rng, n: usize, beta: f64, error_ar: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0];
    for t in 1..n {
        x.push(0.6 * x[t - 1] + rng.sample::<f64, _>(StandardNormal));
    }
    let mut y = vec![0.0];
    let mut u = 0.0;
    for t in 1..n {
        u = error_ar * u + (0.5 + 0.5 * x[t].abs()) * rng.sample::<f64, _>(StandardNormal);
        y.push(0.5 + beta * x[t] + 0.3 * y[t - 1] + u);
    }
    (y, x)
}

fn regression_data(rng: &mut ChaCha8Rng, n: usize, beta: f64) -> (Vec<f64>, Vec<f64>) {
    regression_data_with(rng, n, beta, 0.4)
}

#[test]
fn hac_se_matches_loop_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (y, x) = regression_data(&mut rng, 150, 0.4);
    for lag in [0, 1, 4, 9] {
        let fit = lagged_regression_hac_with(&y, &x, HacOptions { lag: Some(lag), standardize: false }).unwrap();
        let want = hac_oracle_se_beta(&y, &x, lag);
        assert!((fit.hac_se[1] - want).abs() < 1e-10 * want, "lag {lag}");
    }
}

#[test]
fn hac_beta_monte_carlo_coverage() {
    let mut inside = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let (y, x) = regression_data_with(&mut rng, 500, 0.4, 0.0);
        let fit = lagged_regression_hac_with(&y, &x, HacOptions { lag: None, standardize: false }).unwrap();
        if (fit.raw[1] - 0.4).abs() < 3.0 * fit.hac_se[1] {
            inside += 1;
        }
    }
    // Nominal coverage is 99.7%.
    assert!(inside >= 47, "{inside}/50");
}

// ---------------------------------------------------------------------------
// KPSS

#[test]
fn kpss_statistic_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let v: Vec<f64> = (0..60).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let lag = 3usize;
    let auto = |l: usize| (l..v.len()).map(|t| (v[t] - m) * (v[t - l] - m)).sum::<f64>() / n;
    let s2 = auto(0) + 2.0 * (1..=lag).map(|l| (1.0 - l as f64 / 4.0) * auto(l)).sum::<f64>();
    let partial: f64 = (1..=v.len()).map(|k| v[..k].iter().map(|a| a - m).sum::<f64>().powi(2)).sum();
    let want = partial / (n * n * s2);
    assert!((kpss_with_lag(&v, lag).unwrap().statistic - want).abs() < 1e-12);
}

// ---------------------------------------------------------------------------
// Permutation

fn for_each_permutation(v: &mut Vec<f64>, k: usize, f: &mut impl FnMut(&[f64])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        for_each_permutation(v, k + 1, f);
        v.swap(k, i);
    }
}

#[test]
fn monte_carlo_p_approaches_exact_enumeration() {
    let x = vec![0.3, 1.2, -0.4, 2.2, 0.9, -1.1, 0.5];
    let y = vec![0.1, 0.8, 0.2, 1.5, 0.2, -0.3, -0.2];
    let observed = pearson(&x, &y).unwrap().abs();
    let (mut hits, mut total) = (0usize, 0usize);
    for_each_permutation(&mut x.clone(), 0, &mut |p| {
        total += 1;
        hits += (pearson(p, &y).unwrap().abs() >= observed * (1.0 - 1e-12)) as usize;
    });
    let exact = hits as f64 / total as f64;
    let mc = permutation_test(&x, &y, pearson, &PermutationConfig::new(40_000, 3)).unwrap();
    // Binomial sd at 40k draws is below 0.0025.
    assert!((mc.p - exact).abs() < 0.01, "{} vs {exact}", mc.p);
    let again = permutation_test(&x, &y, pearson, &PermutationConfig::new(40_000, 3)).unwrap();
    assert_eq!(mc, again);
}

// ---------------------------------------------------------------------------
// Invariants

fn series(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, n)
}

fn pairwise_auc(labels: &[bool], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, li) in labels.iter().enumerate() {
        for (j, lj) in labels.iter().enumerate() {
            if *li && !*lj {
                pairs += 1.0;
                wins += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
            }
        }
    }
    wins / pairs
}

proptest! {
    #[test]
    fn pearson_and_dcca_invariant_under_positive_affine(
        x in series(40), y in series(40), a in 0.1f64..50.0, b in -1e3f64..1e3, c in 0.1f64..50.0, d in -1e3f64..1e3,
    ) {
        let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let yc: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        let (r0, r1) = (pearson(&x, &y).unwrap(), pearson(&xa, &yc).unwrap());
        prop_assert!((r0 - r1).abs() < 1e-9);
        let (d0, d1) = (dcca(&x, &y, 8).unwrap().rho, dcca(&xa, &yc, 8).unwrap().rho);
        prop_assert!((d0 - d1).abs() < 1e-8);
        let (c0, c1) = (fisher_ci(r0, 40, 0.95).unwrap(), fisher_ci(r1, 40, 0.95).unwrap());
        prop_assert!((c0.0 - c1.0).abs() < 1e-8 && (c0.1 - c1.1).abs() < 1e-8);
    }

    #[test]
    fn hac_beta_invariant_under_positive_affine(
        seed in any::<u64>(), a in 0.1f64..50.0, b in -100.0f64..100.0, c in 0.1f64..50.0, d in -100.0f64..100.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (y, x) = regression_data(&mut rng, 60, 0.4);
        let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let yc: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        let f0 = lagged_regression_hac(&y, &x).unwrap();
        let f1 = lagged_regression_hac(&yc, &xa).unwrap();
        prop_assert!((f0.beta - f1.beta).abs() < 1e-8);
        prop_assert!((f0.p_beta - f1.p_beta).abs() < 1e-8);
        prop_assert_eq!(f0.beta.signum(), f1.beta.signum());
    }

    #[test]
    fn fisher_ci_contains_r_and_shrinks_with_n(r in -0.99f64..0.99, n in 4usize..500) {
        let (lo, hi) = fisher_ci(r, n, 0.95).unwrap();
        prop_assert!(lo <= r && r <= hi);
        prop_assert!(-1.0 < lo && hi < 1.0);
        let (lo2, hi2) = fisher_ci(r, n + 1, 0.95).unwrap();
        prop_assert!(hi2 - lo2 < hi - lo);
    }

    #[test]
    fn auc_matches_pairs_and_flips_under_negation(
        data in prop::collection::vec((any::<bool>(), -50i32..50), 2..60)
    ) {
        let labels: Vec<bool> = data.iter().map(|d| d.0).collect();
        prop_assume!(labels.iter().any(|l| *l) && labels.iter().any(|l| !*l));
        let scores: Vec<f64> = data.iter().map(|d| d.1 as f64).collect();
        let auc = roc_auc(&labels, &scores).unwrap();
        prop_assert_eq!(auc, pairwise_auc(&labels, &scores));
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        // With ties the identity still holds because ties count one half.
        prop_assert!((roc_auc(&labels, &neg).unwrap() - (1.0 - auc)).abs() < 1e-12);
    }
}
