//! Conditional maximum likelihood.
//!
//! The conditional likelihood of an INAR(1) path is the product of one-step
//! transition probabilities, so maximising it requires many evaluations of the
//! binomial-thinning convolution. Two things keep that affordable: repeated
//! `(from, to)` pairs are grouped and weighted by multiplicity, and the
//! innovation log-pmf table is built once per objective evaluation and shared
//! across all pairs.
//!
//! Optimisation runs over transformed coordinates (logit for `alpha`, log for
//! `mu`, log / atanh for the dispersion parameter) so the simplex can roam
//! freely; standard errors are computed afterwards from a central-difference
//! Hessian of the log-likelihood in the *original* coordinates.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::estimation::{warn_if_out_of_domain, FitResult, Method};
use crate::innovations::{Family, InnovationSpec, NormalizationMode};
use crate::optimize::{central_hessian, invert_small, nelder_mead, NelderMeadOptions};
use crate::process::{transition_log_prob_with_table, CountSeries};

/// Explicit starting point for the optimiser.
#[derive(Debug, Clone, Copy)]
pub struct CmlInit {
    pub alpha: f64,
    pub mu: f64,
    /// Ignored for Poisson fits.
    pub phi: Option<f64>,
}

/// Tuning knobs for [`cml_fit_with`].
#[derive(Debug, Clone)]
pub struct CmlOptions {
    /// Normalization used for double-Poisson likelihood evaluations.
    pub mode: NormalizationMode,
    /// Starting point; defaults to moment estimates clamped into the domain.
    pub init: Option<CmlInit>,
    /// Hold the thinning parameter fixed at this value instead of estimating it.
    pub pin_alpha: Option<f64>,
    pub nm: NelderMeadOptions,
}

impl Default for CmlOptions {
    fn default() -> Self {
        CmlOptions {
            mode: NormalizationMode::Approximate,
            init: None,
            pin_alpha: None,
            nm: NelderMeadOptions::default(),
        }
    }
}

/// Distinct transitions of a series with their multiplicities.
fn transition_pairs(series: &CountSeries) -> Vec<(u64, u64, f64)> {
    let x = series.values();
    let mut counts: HashMap<(u64, u64), u32> = HashMap::new();
    for w in x.windows(2) {
        *counts.entry((w[0], w[1])).or_insert(0) += 1;
    }
    let mut pairs: Vec<(u64, u64, f64)> = counts
        .into_iter()
        .map(|((from, to), n)| (from, to, f64::from(n)))
        .collect();
    pairs.sort_unstable_by_key(|&(from, to, _)| (from, to));
    pairs
}

fn loglik_from_pairs(alpha: f64, eps_log_pmf: &[f64], pairs: &[(u64, u64, f64)]) -> f64 {
    pairs
        .iter()
        .map(|&(from, to, w)| w * transition_log_prob_with_table(alpha, eps_log_pmf, from, to))
        .sum()
}

/// Log-likelihood of the observed transitions under `model`, conditional on
/// the first observation. `-inf` is a legitimate value (an impossible
/// transition under a truncated innovation law); errors are reserved for
/// invalid inputs such as a degenerate normalizer.
pub fn conditional_loglik(series: &CountSeries, model: &crate::process::Inar1Model) -> Result<f64> {
    let table = model
        .innovations()
        .log_pmf_table(series.max(), model.mode())?;
    Ok(loglik_from_pairs(model.alpha(), &table, &transition_pairs(series)))
}

fn make_spec(family: Family, mu: f64, phi: f64) -> Result<InnovationSpec> {
    match family {
        Family::Poisson => InnovationSpec::poisson(mu),
        Family::DoublePoisson => InnovationSpec::double_poisson(mu, phi),
        Family::GenPoisson => InnovationSpec::gen_poisson(mu, phi),
    }
}

/// Moment-based starting values, clamped into the interior of the domain.
fn default_start(series: &CountSeries, family: Family) -> (CmlInit, Vec<String>) {
    let mut warnings = Vec::new();
    let x = series.values();
    let mean = x.iter().map(|&v| v as f64).sum::<f64>() / x.len() as f64;

    let raw = match family {
        Family::Poisson => super::yw::yw_alpha(series).map(|alpha| CmlInit {
            alpha,
            mu: (1.0 - alpha) * mean,
            phi: None,
        }),
        Family::DoublePoisson => super::yw::yw_fit_dp(series)
            .or_else(|_| super::cls::cls_fit_dp(series))
            .map(|fit| CmlInit {
                alpha: fit.alpha,
                mu: fit.mu,
                phi: fit.phi,
            }),
        Family::GenPoisson => super::yw::yw_fit_gp(series)
            .or_else(|_| super::cls::cls_fit_gp(series, None))
            .map(|fit| CmlInit {
                alpha: fit.alpha,
                mu: fit.mu,
                phi: fit.phi,
            }),
    };
    let raw = raw.unwrap_or(CmlInit {
        alpha: 0.2,
        mu: 0.8 * mean,
        phi: None,
    });

    let alpha = if raw.alpha.is_finite() {
        raw.alpha.clamp(1e-3, 1.0 - 1e-3)
    } else {
        0.2
    };
    let mu = if raw.mu.is_finite() && raw.mu > 0.0 {
        raw.mu
    } else {
        mean.max(0.1)
    };
    let phi = match family {
        Family::Poisson => None,
        Family::DoublePoisson => Some(match raw.phi {
            Some(p) if p.is_finite() && p > 0.0 => p.clamp(1e-3, 1e3),
            _ => 1.0,
        }),
        Family::GenPoisson => Some(match raw.phi {
            Some(p) if p.is_finite() => p.clamp(-0.99, 0.99),
            _ => 0.0,
        }),
    };
    if alpha != raw.alpha || mu != raw.mu || phi != raw.phi {
        warnings.push(
            "moment starting values fell outside the parameter domain and were adjusted"
                .to_string(),
        );
    }
    (CmlInit { alpha, mu, phi }, warnings)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn expit(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Maximum-likelihood fit with default options (approximate double-Poisson
/// normalization, moment-based start, all parameters free).
pub fn cml_fit(series: &CountSeries, family: Family) -> Result<FitResult> {
    cml_fit_with(series, family, &CmlOptions::default())
}

/// Maximum-likelihood fit with explicit options.
pub fn cml_fit_with(series: &CountSeries, family: Family, opts: &CmlOptions) -> Result<FitResult> {
    if let Some(a) = opts.pin_alpha {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::invalid(format!(
                "pinned alpha must lie in [0, 1), got {a}"
            )));
        }
    }
    opts.mode.validate()?;

    let pairs = transition_pairs(series);
    let max_y = series.max();
    let mode = opts.mode;
    let pin = opts.pin_alpha;

    let (start, mut warnings) = match opts.init {
        Some(init) => (init, Vec::new()),
        None => default_start(series, family),
    };

    // Optimisation coordinates: [logit(alpha)?, ln(mu), g(phi)?] where the
    // alpha slot is dropped when pinned and g is ln (double Poisson, phi > 0)
    // or atanh (generalized Poisson, |phi| < 1).
    let has_phi = family != Family::Poisson;
    let mut z0 = Vec::new();
    if pin.is_none() {
        z0.push(logit(start.alpha.clamp(1e-6, 1.0 - 1e-6)));
    }
    z0.push(start.mu.max(1e-12).ln());
    if has_phi {
        let p = start.phi.unwrap_or(if family == Family::DoublePoisson {
            1.0
        } else {
            0.0
        });
        z0.push(match family {
            Family::DoublePoisson => p.max(1e-12).ln(),
            Family::GenPoisson => p.clamp(-1.0 + 1e-9, 1.0 - 1e-9).atanh(),
            Family::Poisson => unreachable!(),
        });
    }

    let decode = |z: &[f64]| -> Option<(f64, f64, Option<f64>)> {
        let mut it = z.iter().copied();
        let alpha = match pin {
            Some(a) => a,
            None => {
                let a = expit(it.next()?);
                if !(a > 0.0 && a < 1.0) {
                    return None;
                }
                a
            }
        };
        let mu = it.next()?.exp();
        if !(mu.is_finite() && mu > 0.0) {
            return None;
        }
        let phi = if has_phi {
            let g = it.next()?;
            let p = match family {
                Family::DoublePoisson => g.exp(),
                Family::GenPoisson => g.tanh(),
                Family::Poisson => unreachable!(),
            };
            let ok = match family {
                Family::DoublePoisson => p.is_finite() && p > 0.0,
                Family::GenPoisson => p.abs() < 1.0,
                Family::Poisson => unreachable!(),
            };
            if !ok {
                return None;
            }
            Some(p)
        } else {
            None
        };
        Some((alpha, mu, phi))
    };

    let neg_loglik = |z: &[f64]| -> f64 {
        let Some((alpha, mu, phi)) = decode(z) else {
            return f64::INFINITY;
        };
        let Ok(spec) = make_spec(family, mu, phi.unwrap_or(0.0)) else {
            return f64::INFINITY;
        };
        let Ok(table) = spec.log_pmf_table(max_y, mode) else {
            return f64::INFINITY;
        };
        -loglik_from_pairs(alpha, &table, &pairs)
    };

    if !neg_loglik(&z0).is_finite() {
        return Err(Error::numerical(
            "conditional log-likelihood is not finite at the starting values",
        ));
    }

    let nm = nelder_mead(&neg_loglik, &z0, &opts.nm);
    let converged = nm.converged;
    if !converged {
        warnings.push(format!(
            "optimizer stopped at the evaluation cap ({} evaluations) before meeting \
             the tolerance",
            nm.evals
        ));
    }
    let (alpha, mu, phi) = decode(&nm.x).ok_or_else(|| {
        Error::numerical("optimizer returned a point outside the parameter domain")
    })?;
    let loglik = -nm.fx;

    // Standard errors: invert the negative Hessian of the log-likelihood in
    // original coordinates at the optimum. Free parameters only; a pinned
    // alpha reports NaN in its slot.
    let mut theta = Vec::new();
    if pin.is_none() {
        theta.push(alpha);
    }
    theta.push(mu);
    if let Some(p) = phi {
        theta.push(p);
    }
    let free = theta.len();
    let neg_loglik_orig = |t: &[f64]| -> f64 {
        let mut it = t.iter().copied();
        let a = match pin {
            Some(a) => a,
            None => it.next().unwrap(),
        };
        let m = it.next().unwrap();
        let p = if has_phi { it.next().unwrap() } else { 0.0 };
        if !(0.0..1.0).contains(&a) || !(m > 0.0) {
            return f64::NAN;
        }
        let Ok(spec) = make_spec(family, m, p) else {
            return f64::NAN;
        };
        let Ok(table) = spec.log_pmf_table(max_y, mode) else {
            return f64::NAN;
        };
        -loglik_from_pairs(a, &table, &pairs)
    };
    let steps: Vec<f64> = theta.iter().map(|t| 1e-4 * t.abs().max(0.01)).collect();
    let hess = central_hessian(&neg_loglik_orig, &theta, &steps);
    let cov = invert_small(&hess);
    let free_se: Option<Vec<f64>> = cov.and_then(|c| {
        let se: Vec<f64> = (0..free).map(|i| c[i][i].sqrt()).collect();
        if se.iter().all(|s| s.is_finite() && *s > 0.0) {
            Some(se)
        } else {
            None
        }
    });
    if free_se.is_none() {
        warnings.push(
            "standard errors unavailable: observed information matrix is not positive \
             definite at the estimate"
            .to_string(),
        );
    }
    let std_errors = free_se.map(|se| {
        let mut it = se.into_iter();
        let mut full = Vec::with_capacity(family.param_count());
        full.push(if pin.is_none() {
            it.next().unwrap()
        } else {
            f64::NAN
        });
        full.push(it.next().unwrap());
        if has_phi {
            full.push(it.next().unwrap());
        }
        full
    });

    warn_if_out_of_domain(&mut warnings, "alpha", alpha, (0.0..1.0).contains(&alpha));
    if family == Family::GenPoisson {
        let p = phi.unwrap();
        warn_if_out_of_domain(&mut warnings, "phi", p, p.abs() < 1.0);
    }

    let n = (series.len() - 1) as f64;
    let k = free as f64;
    let aic = -2.0 * loglik + 2.0 * k;
    let bic = -2.0 * loglik + k * n.ln();

    Ok(FitResult {
        method: Method::Cml,
        family,
        alpha,
        mu,
        phi,
        std_errors,
        loglik: Some(loglik),
        aic: Some(aic),
        bic: Some(bic),
        converged,
        warnings,
    })
}
