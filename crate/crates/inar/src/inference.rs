//! Descriptive statistics and hypothesis tests for observed count series.
//!
//! The dispersion test compares the sample Fisher index against its null
//! sampling error in an equidispersed Poisson INAR(1); the likelihood-ratio
//! test compares nested fitted models through the chi-square survival
//! function. Both produce a [`TestReport`] that records the decision together
//! with the quantities it was based on.

use crate::error::{Error, Result};
use crate::process::CountSeries;
use crate::special::{chi_square_sf, normal_quantile, normal_sf};
use serde::Serialize;

/// Moments and autocorrelations of an observed series.
///
/// The variance uses divisor `T` so that `fisher_index = variance / mean`
/// matches the ratio-of-sums definition `Σ(X_t - X̄)² / ΣX_t`. Autocorrelation
/// at lag `h` is the standard ratio `Σ_{t≤T-h} d_t d_{t+h} / Σ_t d_t²` of raw
/// deviation products (so `acf[0]` coincides exactly with the Yule-Walker
/// estimate of alpha); for a constant series the ratio is undefined and
/// reported as NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub mean: f64,
    pub variance: f64,
    pub fisher_index: f64,
    /// Autocorrelations at lags `1..=max_lag`.
    pub acf: Vec<f64>,
}

/// Computes [`SampleStats`] up to `max_lag`.
///
/// Errors on an all-zero series (the Fisher index divides by the mean) and
/// when `max_lag` leaves no pairs to correlate.
pub fn sample_stats(series: &CountSeries, max_lag: usize) -> Result<SampleStats> {
    let x = series.values();
    let t = x.len();
    if max_lag == 0 || max_lag >= t {
        return Err(Error::invalid(format!(
            "max_lag must lie in 1..{} for a series of length {t}, got {max_lag}",
            t - 1
        )));
    }
    let mean = x.iter().map(|&v| v as f64).sum::<f64>() / t as f64;
    if mean == 0.0 {
        return Err(Error::undefined(
            "Fisher index is undefined for an all-zero series",
        ));
    }
    let dev: Vec<f64> = x.iter().map(|&v| v as f64 - mean).collect();
    let sum_sq = dev.iter().map(|d| d * d).sum::<f64>();
    let variance = sum_sq / t as f64;
    // Standard (divisor-T) autocorrelation: the raw cross-product sum over the
    // full squared-deviation sum, so acf[0] on any series is exactly the
    // Yule-Walker ratio for alpha.
    let acf = (1..=max_lag)
        .map(|h| {
            dev[..t - h]
                .iter()
                .zip(&dev[h..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / sum_sq
        })
        .collect();
    Ok(SampleStats {
        mean,
        variance,
        fisher_index: variance / mean,
        acf,
    })
}

/// Alternative hypothesis of a test: the side of the reference distribution
/// where rejection occurs. Likelihood-ratio tests always reject in the upper
/// tail and report `Over`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Over,
    Under,
    TwoSided,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Over => "over",
            Direction::Under => "under",
            Direction::TwoSided => "two-sided",
        })
    }
}

/// Outcome of a hypothesis test.
///
/// `threshold` is the signed critical value the statistic was compared
/// against (absent for pure p-value tests); `p_value` is reported whenever a
/// reference distribution is available. `reject` is always consistent with
/// the comparison that defines the test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistic: f64,
    pub threshold: Option<f64>,
    pub p_value: Option<f64>,
    pub direction: Direction,
    pub level: f64,
    pub reject: bool,
}

/// Null standard error of the sample Fisher index in an equidispersed
/// Poisson INAR(1) with thinning parameter `alpha_hat` and length `t`.
fn fisher_index_se(alpha_hat: f64, t: usize) -> f64 {
    let a2 = alpha_hat * alpha_hat;
    (2.0 * (1.0 + a2) / (t as f64 * (1.0 - a2))).sqrt()
}

/// Dispersion test from a pre-computed Fisher index.
///
/// The centered statistic is `FÎ - 1`, compared against `±z_{1-β}·se` where
/// `se = sqrt(2(1+α̂²)/(T(1-α̂²)))`; with `centered = false` the raw index
/// `FÎ` is compared against the same cutoffs instead (a deliberately literal
/// variant kept for sensitivity experiments — with an uncentered statistic
/// the `Under` direction can never reject since the index is nonnegative).
/// The p-value always refers to the centered statistic and is two-sided.
pub fn equidispersion_test_from_stats(
    fi_hat: f64,
    alpha_hat: f64,
    t: usize,
    beta: f64,
    direction: Direction,
    centered: bool,
) -> Result<TestReport> {
    if !(0.0..1.0).contains(&alpha_hat) {
        return Err(Error::invalid(format!(
            "alpha_hat must lie in [0, 1), got {alpha_hat}"
        )));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    if t < 2 {
        return Err(Error::invalid("dispersion test requires T >= 2"));
    }
    if direction == Direction::TwoSided {
        return Err(Error::invalid(
            "the dispersion test is one-sided; choose over or under",
        ));
    }
    let se = fisher_index_se(alpha_hat, t);
    let z = normal_quantile(1.0 - beta);
    let statistic = if centered { fi_hat - 1.0 } else { fi_hat };
    let (threshold, reject) = match direction {
        Direction::Over => (z * se, statistic > z * se),
        Direction::Under => (-z * se, statistic < -z * se),
        Direction::TwoSided => unreachable!(),
    };
    let p_value = 2.0 * normal_sf((fi_hat - 1.0).abs() / se);
    Ok(TestReport {
        test_name: if centered {
            "equidispersion".to_string()
        } else {
            "equidispersion (uncentered)".to_string()
        },
        statistic,
        threshold: Some(threshold),
        p_value: Some(p_value),
        direction,
        level: beta,
        reject,
    })
}

/// Tests the equidispersion hypothesis `FI_X = 1` on a series.
///
/// `alpha_hat` is a plug-in estimate of the thinning parameter (callers
/// typically use the Yule-Walker estimate). The alternative is one-sided:
/// [`Direction::Over`] for overdispersion, [`Direction::Under`] for
/// underdispersion.
pub fn equidispersion_test(
    series: &CountSeries,
    alpha_hat: f64,
    beta: f64,
    direction: Direction,
) -> Result<TestReport> {
    let stats = sample_stats(series, 1)?;
    equidispersion_test_from_stats(
        stats.fisher_index,
        alpha_hat,
        series.len(),
        beta,
        direction,
        true,
    )
}

/// Likelihood-ratio test of a nested null model against an alternative with
/// `df` extra parameters.
///
/// The statistic is `2(ℓ₁ - ℓ₀)`; tiny negative values (within `1e-8`) are
/// treated as optimizer noise and clamped to zero, anything more negative is
/// an error because it contradicts nesting. The decision uses the fixed
/// conventional level 0.05; callers that want another level can compare the
/// reported p-value themselves.
pub fn lr_test(loglik_null: f64, loglik_alt: f64, df: u32) -> Result<TestReport> {
    if df == 0 {
        return Err(Error::invalid("degrees of freedom must be positive"));
    }
    if !loglik_null.is_finite() || !loglik_alt.is_finite() {
        return Err(Error::invalid(
            "likelihood-ratio test requires finite log-likelihoods",
        ));
    }
    let mut statistic = 2.0 * (loglik_alt - loglik_null);
    if statistic < -1e-8 {
        return Err(Error::undefined(format!(
            "alternative log-likelihood is below the null ({statistic:.3e} < 0): \
             models are not nested or the optimization failed"
        )));
    }
    statistic = statistic.max(0.0);
    let p_value = chi_square_sf(statistic, df);
    let level = 0.05;
    Ok(TestReport {
        test_name: "likelihood-ratio".to_string(),
        statistic,
        threshold: None,
        p_value: Some(p_value),
        direction: Direction::Over,
        level,
        reject: p_value < level,
    })
}

/// Akaike and Bayesian information criteria from a log-likelihood, parameter
/// count `k`, and effective sample size `n_transitions` (the number of
/// one-step transitions, `T - 1`, for conditional likelihoods).
pub fn information_criteria(loglik: f64, k: usize, n_transitions: usize) -> (f64, f64) {
    let k = k as f64;
    let aic = -2.0 * loglik + 2.0 * k;
    let bic = -2.0 * loglik + k * (n_transitions as f64).ln();
    (aic, bic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stats_on_constant_series() {
        let s = CountSeries::new(vec![1, 1, 1, 1]).unwrap();
        let st = sample_stats(&s, 1).unwrap();
        assert_eq!(st.mean, 1.0);
        assert_eq!(st.variance, 0.0);
        assert_eq!(st.fisher_index, 0.0);
        assert!(st.acf[0].is_nan());
    }

    #[test]
    fn stats_hand_arithmetic() {
        let s = CountSeries::new(vec![0, 2, 0, 2]).unwrap();
        let st = sample_stats(&s, 2).unwrap();
        assert_relative_eq!(st.mean, 1.0);
        assert_relative_eq!(st.variance, 1.0);
        assert_relative_eq!(st.fisher_index, 1.0);

        // Alternating [0,1,0,1,0]: the four lag-1 deviation products are each
        // -0.24 (sum -0.96) and the squared deviations sum to 1.2, so the
        // standard lag-1 autocorrelation is -0.8.
        let s = CountSeries::new(vec![0, 1, 0, 1, 0]).unwrap();
        let st = sample_stats(&s, 1).unwrap();
        assert_relative_eq!(st.acf[0], -0.8, max_relative = 1e-12);
        // ... which is by construction the Yule-Walker ratio for alpha.
        let yw = crate::estimation::yw_alpha(&s).unwrap();
        assert_relative_eq!(st.acf[0], yw, max_relative = 1e-12);
    }

    #[test]
    fn stats_rejects_bad_inputs() {
        let zeros = CountSeries::new(vec![0, 0, 0]).unwrap();
        assert!(sample_stats(&zeros, 1).is_err());
        let s = CountSeries::new(vec![1, 2, 3]).unwrap();
        assert!(sample_stats(&s, 0).is_err());
        assert!(sample_stats(&s, 3).is_err());
    }

    #[test]
    fn unit_fisher_index_never_rejects() {
        for &beta in &[0.01, 0.05, 0.1, 0.3, 0.49] {
            for &dir in &[Direction::Over, Direction::Under] {
                let rep = equidispersion_test_from_stats(1.0, 0.4, 200, beta, dir, true).unwrap();
                assert!(!rep.reject, "rejected at beta={beta} dir={dir}");
                assert_eq!(rep.statistic, 0.0);
            }
        }
    }

    #[test]
    fn overdispersed_reference_series_rejects_strongly() {
        // Sample statistics of a strongly overdispersed monthly count
        // series: FÎ = 4.29, α̂ = 0.2322, T = 209. The standard error is
        // sqrt(2(1 + α̂²)/(T(1 - α̂²))) ≈ 0.103247.
        let rep =
            equidispersion_test_from_stats(4.29, 0.2322, 209, 0.05, Direction::Over, true)
                .unwrap();
        assert!(rep.reject);
        assert!(rep.p_value.unwrap() < 0.01);
        assert_relative_eq!(
            rep.threshold.unwrap(),
            1.6448536269514722 * 0.103247,
            max_relative = 1e-4
        );
        // The same evidence should not look like underdispersion.
        let under =
            equidispersion_test_from_stats(4.29, 0.2322, 209, 0.05, Direction::Under, true)
                .unwrap();
        assert!(!under.reject);
    }

    #[test]
    fn rejections_are_monotone_in_beta() {
        // Rejecting at level beta implies rejecting at every larger level,
        // i.e. thresholds shrink as beta grows.
        let betas = [0.01, 0.05, 0.1, 0.2, 0.4];
        let mut prev = f64::INFINITY;
        let mut rejected = false;
        for &beta in &betas {
            let rep =
                equidispersion_test_from_stats(1.25, 0.3, 150, beta, Direction::Over, true)
                    .unwrap();
            let thr = rep.threshold.unwrap();
            assert!(thr < prev, "threshold not decreasing at beta={beta}");
            prev = thr;
            assert!(
                rep.reject || !rejected,
                "rejection lost when moving to the larger level beta={beta}"
            );
            rejected = rep.reject;
        }
        assert!(rejected, "largest level should reject for FI=1.25 at T=150");
    }

    #[test]
    fn uncentered_variant_compares_raw_index() {
        // The literal rule compares FÎ itself with the cutoff, so even an
        // exactly equidispersed sample "rejects" overdispersion…
        let rep = equidispersion_test_from_stats(1.0, 0.3, 200, 0.05, Direction::Over, false)
            .unwrap();
        assert!(rep.reject);
        assert_eq!(rep.statistic, 1.0);
        // …and no sample can ever look underdispersed.
        let under =
            equidispersion_test_from_stats(0.2, 0.3, 200, 0.05, Direction::Under, false).unwrap();
        assert!(!under.reject);
    }

    #[test]
    fn dispersion_test_input_validation() {
        assert!(equidispersion_test_from_stats(1.5, 1.0, 100, 0.05, Direction::Over, true)
            .is_err());
        assert!(equidispersion_test_from_stats(1.5, 0.3, 100, 0.0, Direction::Over, true)
            .is_err());
        assert!(
            equidispersion_test_from_stats(1.5, 0.3, 100, 0.05, Direction::TwoSided, true)
                .is_err()
        );
        assert!(equidispersion_test_from_stats(1.5, 0.3, 1, 0.05, Direction::Over, true)
            .is_err());
    }

    #[test]
    fn series_level_test_matches_stats_level() {
        let s = CountSeries::new(vec![0, 3, 1, 7, 0, 2, 9, 1, 0, 5, 2, 8]).unwrap();
        let st = sample_stats(&s, 1).unwrap();
        let via_series = equidispersion_test(&s, 0.1, 0.05, Direction::Over).unwrap();
        let via_stats = equidispersion_test_from_stats(
            st.fisher_index,
            0.1,
            s.len(),
            0.05,
            Direction::Over,
            true,
        )
        .unwrap();
        assert_eq!(via_series, via_stats);
    }

    #[test]
    fn lr_test_reference_points() {
        // Equal likelihoods: statistic 0, p-value 1.
        let rep = lr_test(-100.0, -100.0, 1).unwrap();
        assert_eq!(rep.statistic, 0.0);
        assert_relative_eq!(rep.p_value.unwrap(), 1.0);
        assert!(!rep.reject);

        // Frozen chi-square(1) survival values at the two statistics used in
        // the worked applications.
        let p1 = lr_test(-100.0, -100.0 + 3.123 / 2.0, 1).unwrap().p_value.unwrap();
        assert!((p1 - 0.0772).abs() < 5e-5, "p = {p1}");
        let p2 = lr_test(-100.0, -100.0 + 3.342 / 2.0, 1).unwrap().p_value.unwrap();
        assert!((p2 - 0.0675).abs() < 5e-5, "p = {p2}");
    }

    #[test]
    fn lr_test_rejects_non_nested_fits() {
        assert!(lr_test(-99.0, -100.0, 1).is_err());
        // Within tolerance: clamped to zero.
        let rep = lr_test(-100.0, -100.0 - 1e-10, 1).unwrap();
        assert_eq!(rep.statistic, 0.0);
        assert!(lr_test(-100.0, -99.0, 0).is_err());
        assert!(lr_test(f64::NEG_INFINITY, -99.0, 1).is_err());
    }

    #[test]
    fn lr_p_values_decrease_in_statistic() {
        let mut prev = 1.0;
        for i in 1..=100 {
            let stat = 0.5 * i as f64;
            let p = lr_test(-100.0, -100.0 + stat / 2.0, 2).unwrap().p_value.unwrap();
            assert!(p > 0.0 && p < prev, "p not strictly decreasing at {stat}");
            prev = p;
        }
    }

    #[test]
    fn information_criteria_definitions() {
        let (aic, bic) = information_criteria(-100.0, 3, 20);
        assert_relative_eq!(aic, 206.0);
        assert_relative_eq!(bic, 200.0 + 3.0 * (20.0_f64).ln());
        // Equal likelihood, one extra parameter: AIC difference exactly 2.
        let (aic2, _) = information_criteria(-100.0, 2, 20);
        assert_relative_eq!(aic - aic2, 2.0);
    }

    /// Simpson-rule integration of the chi-square density, used as an
    /// independent oracle for the survival function.
    fn chi_square_sf_oracle(x: f64, df: u32) -> f64 {
        let half = df as f64 / 2.0;
        // Normalizing constant 1 / (2^{df/2} Γ(df/2)) for df = 1, 2, 3, with
        // Γ(1/2) = √π, Γ(1) = 1, Γ(3/2) = √π/2 hard-coded.
        let gamma_half = match df {
            1 => std::f64::consts::PI.sqrt(),
            2 => 1.0,
            3 => std::f64::consts::PI.sqrt() / 2.0,
            _ => unreachable!(),
        };
        let norm = 1.0 / (2.0_f64.powf(half) * gamma_half);
        let density = |t: f64| norm * t.powf(half - 1.0) * (-t / 2.0).exp();
        // Integrate [x, x+80]; the remaining tail is below 1e-17 for x <= 50.
        let (a, b) = (x, x + 80.0);
        let n = 200_000;
        let h = (b - a) / n as f64;
        let mut sum = density(a) + density(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * density(a + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn chi_square_sf_matches_integration_oracle() {
        for df in 1..=3u32 {
            for &x in &[0.25, 0.5, 1.0, 3.123, 5.0, 10.0, 25.0, 50.0] {
                let oracle = chi_square_sf_oracle(x, df);
                let ours = chi_square_sf(x, df);
                assert!(
                    (ours - oracle).abs() < 1e-8,
                    "df={df} x={x}: {ours} vs oracle {oracle}"
                );
            }
            assert_eq!(chi_square_sf(0.0, df), 1.0);
        }
    }
}
