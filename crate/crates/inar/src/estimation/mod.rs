//! Parameter estimation for INAR(1) models: Yule-Walker (YW), conditional
//! least squares (CLS) and conditional maximum likelihood (CML), plus the
//! asymptotic covariance matrices of the CLS estimators.
//!
//! The moment estimators never clamp: estimates outside the parameter domain
//! are returned as computed, with a warning describing the violation. Errors
//! are reserved for samples on which an estimator is undefined (constant
//! series, zero denominators, negative radicands).

mod asymptotic;
mod cls;
mod cml;
mod yw;

pub use asymptotic::{asymptotic_cov_dp, asymptotic_cov_gp, AsymptoticCov};
pub use cls::{cls_alpha_mu, cls_fit_dp, cls_fit_gp, cls_fit_poisson, ClsEstimate};
pub use cml::{cml_fit, cml_fit_with, conditional_loglik, CmlInit, CmlOptions};
pub use yw::{yw_alpha, yw_fit_dp, yw_fit_gp, yw_fit_poisson};

use serde::{Deserialize, Serialize};

use crate::innovations::Family;

/// Estimation method labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Yw,
    Cls,
    Cml,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Yw => "YW",
            Method::Cls => "CLS",
            Method::Cml => "CML",
        })
    }
}

/// A fitted INAR(1) model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub method: Method,
    pub family: Family,
    pub alpha: f64,
    pub mu: f64,
    /// Dispersion estimate; `None` for the Poisson family.
    pub phi: Option<f64>,
    /// Standard errors aligned with [`Family::param_names`]; only likelihood
    /// fits carry them, and only when the observed information is invertible.
    pub std_errors: Option<Vec<f64>>,
    /// Maximized conditional log-likelihood (likelihood fits only).
    pub loglik: Option<f64>,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    /// `false` when an iterative fit stopped at its evaluation cap.
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl FitResult {
    /// Result shell for a closed-form moment fit (no likelihood quantities).
    pub(crate) fn moment_fit(
        method: Method,
        family: Family,
        alpha: f64,
        mu: f64,
        phi: Option<f64>,
        warnings: Vec<String>,
    ) -> Self {
        FitResult {
            method,
            family,
            alpha,
            mu,
            phi,
            std_errors: None,
            loglik: None,
            aic: None,
            bic: None,
            converged: true,
            warnings,
        }
    }

    /// Estimates in `param_names` order.
    pub fn estimates(&self) -> Vec<f64> {
        match self.phi {
            Some(phi) => vec![self.alpha, self.mu, phi],
            None => vec![self.alpha, self.mu],
        }
    }
}

/// Push a warning when a raw estimate violates its domain.
pub(crate) fn warn_if_out_of_domain(
    warnings: &mut Vec<String>,
    name: &str,
    value: f64,
    ok: bool,
) {
    if !ok {
        warnings.push(format!("estimate {name} = {value} lies outside the parameter domain"));
    }
}
