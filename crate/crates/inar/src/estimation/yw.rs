//! Yule-Walker estimation: match the lag-1 autocorrelation and the
//! stationary mean/variance identities of the INAR(1) family.

use crate::error::{Error, Result};
use crate::estimation::{warn_if_out_of_domain, FitResult, Method};
use crate::innovations::Family;
use crate::process::CountSeries;

/// Sample mean and the divisor-`T` autocovariances at lags 0 and 1.
fn mean_gamma0_gamma1(series: &CountSeries) -> (f64, f64, f64) {
    let x = series.values();
    let t = x.len() as f64;
    let mean = x.iter().map(|&v| v as f64).sum::<f64>() / t;
    let gamma0 = x.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / t;
    let gamma1 = x
        .windows(2)
        .map(|w| (w[0] as f64 - mean) * (w[1] as f64 - mean))
        .sum::<f64>()
        / t;
    (mean, gamma0, gamma1)
}

/// Yule-Walker estimate of the thinning parameter: the lag-1 sample
/// autocorrelation
///
/// ```text
/// alpha = sum_{t=1}^{T-1} (X_t - mean)(X_{t+1} - mean)
///       / sum_{t=1}^{T}   (X_t - mean)^2
/// ```
///
/// Errors on a constant series (zero variance).
pub fn yw_alpha(series: &CountSeries) -> Result<f64> {
    let (_, gamma0, gamma1) = mean_gamma0_gamma1(series);
    if gamma0 == 0.0 {
        return Err(Error::degenerate(
            "Yule-Walker is undefined on a constant series".to_string(),
        ));
    }
    Ok(gamma1 / gamma0)
}

/// Yule-Walker fit of the Poisson INAR(1): `alpha` from the lag-1 sample
/// autocorrelation, then `mu = (1 - alpha) mean` from the stationary mean.
pub fn yw_fit_poisson(series: &CountSeries) -> Result<FitResult> {
    let alpha = yw_alpha(series)?;
    let (mean, _, _) = mean_gamma0_gamma1(series);
    let mut warnings = Vec::new();
    warn_if_out_of_domain(&mut warnings, "alpha", alpha, (0.0..1.0).contains(&alpha));
    let mu = (1.0 - alpha) * mean;
    warn_if_out_of_domain(&mut warnings, "mu", mu, mu > 0.0);
    Ok(FitResult::moment_fit(Method::Yw, Family::Poisson, alpha, mu, None, warnings))
}

/// Yule-Walker fit of the double-Poisson INAR(1):
///
/// ```text
/// mu  = (1 - alpha) mean
/// phi = mean / [gamma0 (1 + alpha) - mean alpha]
/// ```
///
/// from the stationary identities `E(X) = mu/(1-alpha)` and
/// `V(X) = mu (1 + alpha phi) / (phi (1 - alpha^2))`.
pub fn yw_fit_dp(series: &CountSeries) -> Result<FitResult> {
    let alpha = yw_alpha(series)?;
    let (mean, gamma0, _) = mean_gamma0_gamma1(series);
    let mut warnings = Vec::new();
    warn_if_out_of_domain(&mut warnings, "alpha", alpha, (0.0..1.0).contains(&alpha));

    let mu = (1.0 - alpha) * mean;
    warn_if_out_of_domain(&mut warnings, "mu", mu, mu > 0.0);

    let denom = gamma0 * (1.0 + alpha) - mean * alpha;
    if denom == 0.0 {
        return Err(Error::undefined(
            "YW dispersion step: implied innovation variance is zero".to_string(),
        ));
    }
    let phi = mean / denom;
    warn_if_out_of_domain(&mut warnings, "phi", phi, phi > 0.0);
    Ok(FitResult::moment_fit(Method::Yw, Family::DoublePoisson, alpha, mu, Some(phi), warnings))
}

/// Yule-Walker fit of the generalized-Poisson INAR(1).
///
/// With the sample dispersion index `FI = gamma0 / mean`, the stationary
/// identity `FI_X = (1 + alpha (1-phi)^2) / ((1+alpha)(1-phi)^2)` solves to
///
/// ```text
/// D   = alpha FI - alpha + FI        (must be positive)
/// phi = 1 - 1 / sqrt(D)
/// mu  = (1 - alpha)(1 - phi) mean
/// ```
///
/// Errors: all-zero series (dispersion index undefined), non-positive `D`
/// (negative radicand).
pub fn yw_fit_gp(series: &CountSeries) -> Result<FitResult> {
    let alpha = yw_alpha(series)?;
    let (mean, gamma0, _) = mean_gamma0_gamma1(series);
    if mean == 0.0 {
        return Err(Error::degenerate(
            "the sample dispersion index is undefined on an all-zero series".to_string(),
        ));
    }
    let fi = gamma0 / mean;
    let d = alpha * fi - alpha + fi;
    if d <= 0.0 {
        return Err(Error::undefined(format!(
            "YW dispersion step: alpha*FI - alpha + FI = {d} is not positive; \
             no real dispersion solves the moment identities"
        )));
    }
    let mut warnings = Vec::new();
    warn_if_out_of_domain(&mut warnings, "alpha", alpha, (0.0..1.0).contains(&alpha));
    let phi = 1.0 - 1.0 / d.sqrt();
    warn_if_out_of_domain(&mut warnings, "phi", phi, phi.abs() < 1.0);
    let mu = (1.0 - alpha) * (1.0 - phi) * mean;
    warn_if_out_of_domain(&mut warnings, "mu", mu, mu > 0.0);
    Ok(FitResult::moment_fit(Method::Yw, Family::GenPoisson, alpha, mu, Some(phi), warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innovations::InnovationSpec;
    use crate::process::{simulate, Inar1Model};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn series(values: &[u64]) -> CountSeries {
        CountSeries::new(values.to_vec()).unwrap()
    }

    #[test]
    fn alpha_is_the_standard_lag1_autocorrelation() {
        // Independent transcription of the same ratio, computed differently
        // (explicit loops over deviations rather than windows).
        let values = [3_u64, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8];
        let s = series(&values);
        let t = values.len();
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / t as f64;
        let mut num = 0.0;
        for i in 0..t - 1 {
            num += (values[i] as f64 - mean) * (values[i + 1] as f64 - mean);
        }
        let mut den = 0.0;
        for &v in &values {
            den += (v as f64 - mean).powi(2);
        }
        assert!((yw_alpha(&s).unwrap() - num / den).abs() < 1e-14);
    }

    #[test]
    fn constant_series_is_degenerate() {
        assert!(yw_alpha(&series(&[3, 3, 3, 3])).is_err());
        assert!(yw_fit_dp(&series(&[5, 5, 5])).is_err());
        assert!(yw_fit_gp(&series(&[5, 5, 5])).is_err());
    }

    #[test]
    fn dp_hand_computed_small_series() {
        // [1, 2, 3]: mean 2, gamma0 = 2/3, alpha = 0 (the lag-1 products
        // vanish), so mu = 2 and phi = 2 / (2/3) = 3.
        let fit = yw_fit_dp(&series(&[1, 2, 3])).unwrap();
        assert!(fit.alpha.abs() < 1e-14);
        assert!((fit.mu - 2.0).abs() < 1e-14);
        assert!((fit.phi.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gp_equidispersed_uncorrelated_series_gives_zero_phi() {
        // [3,1,0,1,0,1]: mean 1, gamma0 = 1 (FI = 1), lag-1 products cancel
        // (alpha = 0) -> D = 1, phi = 0, mu = mean.
        let fit = yw_fit_gp(&series(&[3, 1, 0, 1, 0, 1])).unwrap();
        assert!(fit.alpha.abs() < 1e-14, "alpha {}", fit.alpha);
        assert!(fit.phi.unwrap().abs() < 1e-14, "phi {:?}", fit.phi);
        assert!((fit.mu - 1.0).abs() < 1e-14, "mu {}", fit.mu);
        assert!(fit.warnings.is_empty());
    }

    #[test]
    fn gp_negative_radicand_is_an_error() {
        // Strongly underdispersed and positively autocorrelated:
        // FI(1 + alpha) < alpha has no real dispersion solution.
        let r = yw_fit_gp(&series(&[1, 1, 1, 1, 2, 2, 2, 2]));
        assert!(matches!(r, Err(Error::EstimatorUndefined(_))), "{r:?}");
    }

    #[test]
    fn dp_fit_recovers_simulated_parameters_roughly() {
        let model =
            Inar1Model::new(0.3, InnovationSpec::double_poisson(5.0, 0.5).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let s = simulate(&model, 4000, 0, &mut rng).unwrap();
        let fit = yw_fit_dp(&s).unwrap();
        assert!((fit.alpha - 0.3).abs() < 0.05);
        assert!((fit.mu - 5.0).abs() < 0.4);
        assert!((fit.phi.unwrap() - 0.5).abs() < 0.08);
    }

    #[test]
    fn gp_fit_recovers_simulated_parameters_roughly() {
        let model =
            Inar1Model::new(0.3, InnovationSpec::gen_poisson(1.0, 0.5).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(555);
        let s = simulate(&model, 5000, 0, &mut rng).unwrap();
        let fit = yw_fit_gp(&s).unwrap();
        assert!((fit.alpha - 0.3).abs() < 0.05, "alpha {}", fit.alpha);
        assert!((fit.mu - 1.0).abs() < 0.15, "mu {}", fit.mu);
        assert!((fit.phi.unwrap() - 0.5).abs() < 0.06, "phi {:?}", fit.phi);
    }
}
