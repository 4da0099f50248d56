//! Conditional least squares: minimize `sum_t (X_t - alpha X_{t-1} - mu_eps)^2`
//! over the transitions of the series.

use crate::error::{Error, Result};
use crate::estimation::{warn_if_out_of_domain, FitResult, Method};
use crate::innovations::Family;
use crate::process::CountSeries;

/// Raw CLS estimates of the thinning parameter and the innovation mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ClsEstimate {
    pub alpha: f64,
    /// Estimated innovation *mean* (for two-parameter families this is
    /// `mu_eps`, not necessarily the location parameter itself).
    pub mu: f64,
    pub warnings: Vec<String>,
}

/// Sums over the `T - 1` transitions used by every CLS quantity.
struct TransitionSums {
    n: f64,        // number of transitions
    s_cur: f64,    // sum of X_t,     t = 2..T
    s_prev: f64,   // sum of X_{t-1}
    s_cross: f64,  // sum of X_t X_{t-1}
    s_prev_sq: f64 // sum of X_{t-1}^2
}

fn transition_sums(series: &CountSeries) -> TransitionSums {
    let x = series.values();
    let mut s = TransitionSums { n: (x.len() - 1) as f64, s_cur: 0.0, s_prev: 0.0, s_cross: 0.0, s_prev_sq: 0.0 };
    for w in x.windows(2) {
        let (prev, cur) = (w[0] as f64, w[1] as f64);
        s.s_cur += cur;
        s.s_prev += prev;
        s.s_cross += cur * prev;
        s.s_prev_sq += prev * prev;
    }
    s
}

/// Closed-form CLS estimates
///
/// ```text
/// alpha = [n sum(X_t X_{t-1}) - sum(X_t) sum(X_{t-1})]
///       / [n sum(X_{t-1}^2) - (sum X_{t-1})^2]
/// mu    = [sum(X_t) - alpha sum(X_{t-1})] / n
/// ```
///
/// over the `n = T - 1` transitions. Out-of-domain values are returned raw
/// with a warning; a constant predictor (zero denominator) is an error.
pub fn cls_alpha_mu(series: &CountSeries) -> Result<ClsEstimate> {
    let s = transition_sums(series);
    let denom = s.n * s.s_prev_sq - s.s_prev * s.s_prev;
    if denom == 0.0 {
        return Err(Error::degenerate(
            "CLS is undefined when the lagged series is constant".to_string(),
        ));
    }
    let alpha = (s.n * s.s_cross - s.s_cur * s.s_prev) / denom;
    let mu = (s.s_cur - alpha * s.s_prev) / s.n;
    let mut warnings = Vec::new();
    warn_if_out_of_domain(&mut warnings, "alpha", alpha, (0.0..1.0).contains(&alpha));
    warn_if_out_of_domain(&mut warnings, "mu", mu, mu > 0.0);
    Ok(ClsEstimate { alpha, mu, warnings })
}

/// CLS fit of the Poisson INAR(1): the closed-form `(alpha, mu)` pair, with
/// no dispersion step.
pub fn cls_fit_poisson(series: &CountSeries) -> Result<FitResult> {
    let est = cls_alpha_mu(series)?;
    Ok(FitResult::moment_fit(
        Method::Cls,
        Family::Poisson,
        est.alpha,
        est.mu,
        None,
        est.warnings,
    ))
}

/// Two-step CLS fit of the double-Poisson INAR(1): `(alpha, mu)` from
/// [`cls_alpha_mu`], then the dispersion from the residual second moment,
///
/// ```text
/// phi = [sum X_t - alpha sum X_{t-1}]
///     / sum [ (X_t - alpha X_{t-1} - mu)^2 - alpha (1-alpha) X_{t-1} ]
/// ```
///
/// i.e. the estimated innovation mean over the estimated innovation variance.
pub fn cls_fit_dp(series: &CountSeries) -> Result<FitResult> {
    let est = cls_alpha_mu(series)?;
    let (alpha, mu) = (est.alpha, est.mu);
    let mut warnings = est.warnings;

    let x = series.values();
    let mut resid_var_sum = 0.0;
    for w in x.windows(2) {
        let (prev, cur) = (w[0] as f64, w[1] as f64);
        let resid = cur - alpha * prev - mu;
        resid_var_sum += resid * resid - alpha * (1.0 - alpha) * prev;
    }
    let numer = mu * (x.len() - 1) as f64;
    if resid_var_sum == 0.0 {
        return Err(Error::undefined(
            "CLS dispersion step: estimated innovation variance is zero".to_string(),
        ));
    }
    let phi = numer / resid_var_sum;
    warn_if_out_of_domain(&mut warnings, "phi", phi, phi > 0.0);
    Ok(FitResult::moment_fit(Method::Cls, Family::DoublePoisson, alpha, mu, Some(phi), warnings))
}

/// CLS fit of the generalized-Poisson INAR(1).
///
/// `alpha` comes from [`cls_alpha_mu`]; given a location value `mu` (supplied
/// by the caller, or the Yule-Walker estimate when `mu_known` is `None`) the
/// dispersion solves the innovation-mean identity `mu_eps = mu / (1 - phi)`:
///
/// ```text
/// phi = 1 - mu (T-1) / [sum X_t - alpha sum X_{t-1}]
/// ```
pub fn cls_fit_gp(series: &CountSeries, mu_known: Option<f64>) -> Result<FitResult> {
    let est = cls_alpha_mu(series)?;
    let alpha = est.alpha;
    let mut warnings = est.warnings;

    let mu = match mu_known {
        Some(v) => {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("known mu must be positive, got {v}")));
            }
            v
        }
        None => {
            let yw = crate::estimation::yw_fit_gp(series)?;
            warnings.extend(yw.warnings.iter().map(|w| format!("from the YW location step: {w}")));
            yw.mu
        }
    };

    let s = transition_sums(series);
    let eps_mean_total = s.s_cur - alpha * s.s_prev;
    if eps_mean_total == 0.0 {
        return Err(Error::undefined(
            "CLS dispersion step: estimated innovation mean is zero".to_string(),
        ));
    }
    let phi = 1.0 - mu * s.n / eps_mean_total;
    warn_if_out_of_domain(&mut warnings, "phi", phi, phi.abs() < 1.0);
    Ok(FitResult::moment_fit(Method::Cls, Family::GenPoisson, alpha, mu, Some(phi), warnings))
}
