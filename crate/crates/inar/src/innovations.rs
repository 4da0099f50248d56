//! Innovation distributions for INAR(1) models: Poisson, double Poisson and
//! generalized Poisson.
//!
//! The double Poisson mass function is
//!
//! ```text
//! f(y) = Z(mu, phi) * sqrt(phi) * exp(-phi*mu) * [exp(-y) y^y / y!] * (e*mu/y)^(phi*y)
//! ```
//!
//! with `0^0 = 1` at `y = 0`, an approximate mean `mu` and variance `mu/phi`.
//! The normalizing constant is only available through the classical
//! reciprocal approximation `1/Z = 1 + (1-phi)/(12 mu phi) * (1 + 1/(mu phi))`,
//! so every double-Poisson computation carries a [`NormalizationMode`]:
//! either that closed form ([`NormalizationMode::Approximate`]) or a numeric
//! renormalization over a certified support cutoff
//! ([`NormalizationMode::ExactSum`]).
//!
//! The generalized Poisson mass function is
//!
//! ```text
//! f(y) = mu * (mu + y*phi)^(y-1) * exp(-(mu + y*phi)) / y!
//! ```
//!
//! with mean `mu/(1-phi)` and variance `mu/(1-phi)^3`. For `phi < 0` the
//! support is truncated at the first `y` with `mu + y*phi <= 0`; the mass
//! function is *not* renormalized there (the missing or excess mass is
//! surfaced as a diagnostic), while the sampler draws from the conditional
//! law on the truncated support.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_factorial;

/// Model family labels shared across estimation and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Poisson,
    DoublePoisson,
    GenPoisson,
}

impl Family {
    /// Number of free parameters (alpha included).
    pub fn param_count(self) -> usize {
        match self {
            Family::Poisson => 2,
            Family::DoublePoisson | Family::GenPoisson => 3,
        }
    }

    /// Names of the parameters in reporting order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Poisson => &["alpha", "mu"],
            Family::DoublePoisson | Family::GenPoisson => &["alpha", "mu", "phi"],
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Family::Poisson => "poisson",
            Family::DoublePoisson => "double-poisson",
            Family::GenPoisson => "gen-poisson",
        };
        f.write_str(name)
    }
}

/// Poisson innovation parameters: rate `mu > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams {
    mu: f64,
}

impl PoissonParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::invalid(format!("Poisson mu must be positive and finite, got {mu}")));
        }
        Ok(PoissonParams { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn log_pmf(&self, y: u64) -> f64 {
        y as f64 * self.mu.ln() - self.mu - ln_factorial(y)
    }
}

/// Double Poisson innovation parameters: location `mu > 0` and dispersion
/// `phi > 0` (`phi = 1` is Poisson, `phi < 1` overdispersed, `phi > 1`
/// underdispersed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublePoissonParams {
    mu: f64,
    phi: f64,
}

impl DoublePoissonParams {
    pub fn new(mu: f64, phi: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::invalid(format!(
                "double Poisson mu must be positive and finite, got {mu}"
            )));
        }
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::invalid(format!(
                "double Poisson phi must be positive and finite, got {phi}"
            )));
        }
        Ok(DoublePoissonParams { mu, phi })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Log of the mass-function kernel including the sqrt(phi) e^(-phi mu)
    /// prefactor but *excluding* the normalizing constant.
    fn log_kernel(&self, y: u64) -> f64 {
        let (mu, phi) = (self.mu, self.phi);
        let base = 0.5 * phi.ln() - phi * mu;
        if y == 0 {
            return base; // 0^0 = 1 convention: both y-dependent factors are 1
        }
        let yf = y as f64;
        base - yf + yf * yf.ln() - ln_factorial(y) + phi * yf * (1.0 + mu.ln() - yf.ln())
    }
}

/// Generalized Poisson innovation parameters: `mu > 0`, `|phi| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenPoissonParams {
    mu: f64,
    phi: f64,
}

impl GenPoissonParams {
    pub fn new(mu: f64, phi: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::invalid(format!(
                "generalized Poisson mu must be positive and finite, got {mu}"
            )));
        }
        if !(phi.is_finite() && phi.abs() < 1.0) {
            return Err(Error::invalid(format!(
                "generalized Poisson phi must satisfy |phi| < 1, got {phi}"
            )));
        }
        Ok(GenPoissonParams { mu, phi })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// First index outside the support when `phi < 0`: the smallest `y`
    /// with `mu + y*phi <= 0`. `None` for `phi >= 0` (full support).
    pub fn truncation_index(&self) -> Option<u64> {
        if self.phi >= 0.0 {
            return None;
        }
        let m = (-self.mu / self.phi).ceil();
        // If -mu/phi is an exact integer the mass at that index is already 0.
        Some(m as u64)
    }

    /// `1 - sum of f(y)` over the truncated support for `phi < 0`
    /// (0 for `phi >= 0`). The mass function is not renormalized, so this is
    /// the diagnostic amount of probability lost to the truncation; strongly
    /// negative `phi` with small `mu` can make the truncated kernel carry
    /// *excess* mass, in which case the value is negative.
    pub fn mass_deficiency(&self) -> f64 {
        match self.truncation_index() {
            None => 0.0,
            Some(m) => {
                let total: f64 = (0..m).map(|y| self.log_pmf(y).exp()).sum();
                1.0 - total
            }
        }
    }

    pub fn log_pmf(&self, y: u64) -> f64 {
        let (mu, phi) = (self.mu, self.phi);
        if y == 0 {
            return -mu;
        }
        let yf = y as f64;
        let lambda = mu + yf * phi;
        if lambda <= 0.0 {
            return f64::NEG_INFINITY; // truncated support for phi < 0
        }
        mu.ln() + (yf - 1.0) * lambda.ln() - lambda - ln_factorial(y)
    }
}

/// How double-Poisson probabilities are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    /// Closed-form reciprocal approximation of the normalizing constant
    /// (the classical choice; total mass is only approximately 1).
    Approximate,
    /// Numeric renormalization: sum the kernel over a support cutoff chosen
    /// so the certified tail remainder is below `tail_tolerance`.
    ExactSum { tail_tolerance: f64 },
}

impl NormalizationMode {
    /// Admissible tolerances are in (0, 1e-6].
    pub fn exact_sum(tail_tolerance: f64) -> Result<Self> {
        if !(tail_tolerance.is_finite() && tail_tolerance > 0.0 && tail_tolerance <= 1e-6) {
            return Err(Error::invalid(format!(
                "ExactSum tail tolerance must lie in (0, 1e-6], got {tail_tolerance}"
            )));
        }
        Ok(NormalizationMode::ExactSum { tail_tolerance })
    }

    /// ExactSum at the tightest standard tolerance.
    pub fn exact_sum_default() -> Self {
        NormalizationMode::ExactSum { tail_tolerance: 1e-9 }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            NormalizationMode::Approximate => Ok(()),
            NormalizationMode::ExactSum { tail_tolerance } => {
                NormalizationMode::exact_sum(tail_tolerance).map(|_| ())
            }
        }
    }
}

impl Default for NormalizationMode {
    fn default() -> Self {
        NormalizationMode::Approximate
    }
}

/// Normalizing constant `Z(mu, phi)` of the double Poisson distribution from
/// the reciprocal approximation `1/Z = 1 + (1-phi)/(12 mu phi) (1 + 1/(mu phi))`.
///
/// Errors if the approximated reciprocal is non-positive (the approximation
/// breaks down, e.g. tiny `mu` with large `phi`).
pub fn dp_normalizer(params: &DoublePoissonParams) -> Result<f64> {
    let (mu, phi) = (params.mu(), params.phi());
    let recip = 1.0 + (1.0 - phi) / (12.0 * mu * phi) * (1.0 + 1.0 / (mu * phi));
    if !(recip.is_finite() && recip > 0.0) {
        return Err(Error::numerical(format!(
            "double Poisson normalizer approximation is non-positive at mu={mu}, phi={phi} \
             (reciprocal {recip}); use exact-sum normalization instead"
        )));
    }
    Ok(1.0 / recip)
}

/// Hard cap on certified-summation support scans.
const SUM_MAX_TERMS: u64 = 2_000_000;

/// Sum `exp(log_term(y))` for `y = 0, 1, ...` until the remaining tail is
/// certifiably below `tol` relative to the running sum.
///
/// Certification: once `y > decay_from` and the terms are decreasing, the
/// empirical ratio `r = t_y / t_{y-1} < 1` bounds the tail by the geometric
/// remainder `t_y * r / (1 - r)` — valid whenever the true term ratios are
/// non-increasing past the mode, which holds for all kernels in this crate.
/// Returns the sum and the last index included.
pub(crate) fn certified_sum<F: Fn(u64) -> f64>(
    log_term: F,
    decay_from: u64,
    tol: f64,
) -> Result<(f64, u64)> {
    let mut sum = 0.0_f64;
    let mut prev = f64::NAN;
    for y in 0..SUM_MAX_TERMS {
        let t = log_term(y).exp();
        sum += t;
        if y > decay_from {
            if t == 0.0 {
                // Exactly-zero terms past the decay point: truncated support
                // or underflow; either way the remaining tail is negligible.
                return Ok((sum, y));
            }
            if prev.is_finite() && prev > 0.0 && t < prev {
                let r = t / prev;
                let tail_bound = t * r / (1.0 - r);
                if tail_bound < tol * sum.max(f64::MIN_POSITIVE) {
                    return Ok((sum, y));
                }
            }
        }
        prev = t;
    }
    Err(Error::numerical(format!(
        "support summation did not reach tail tolerance {tol} within {SUM_MAX_TERMS} terms"
    )))
}

/// A place past the mode of `y^k f(y)`, used as the earliest index at which
/// certified summation may stop.
fn decay_hint(mean: f64, sd: f64, weight_power: u32) -> u64 {
    (mean + (2.0 + weight_power as f64) * (sd + 1.0) + 10.0).ceil() as u64
}

fn dp_decay_hint(params: &DoublePoissonParams, weight_power: u32) -> u64 {
    let sd = (params.mu() / params.phi()).sqrt();
    decay_hint(params.mu(), sd, weight_power)
}

/// Log of the exact-sum normalization constant `S = sum_y kernel(y)`.
fn dp_log_exact_norm(params: &DoublePoissonParams, tol: f64) -> Result<f64> {
    // The kernel values are well scaled (Z is near 1), so summing in linear
    // space is safe.
    let (sum, _) = certified_sum(|y| params.log_kernel(y), dp_decay_hint(params, 0), tol)?;
    Ok(sum.ln())
}

/// Double Poisson log-probability of `y` under the given normalization mode.
pub fn dp_log_pmf(params: &DoublePoissonParams, y: u64, mode: NormalizationMode) -> Result<f64> {
    mode.validate()?;
    match mode {
        NormalizationMode::Approximate => Ok(dp_normalizer(params)?.ln() + params.log_kernel(y)),
        NormalizationMode::ExactSum { tail_tolerance } => {
            Ok(params.log_kernel(y) - dp_log_exact_norm(params, tail_tolerance)?)
        }
    }
}

/// Double Poisson probability of `y`.
pub fn dp_pmf(params: &DoublePoissonParams, y: u64, mode: NormalizationMode) -> Result<f64> {
    dp_log_pmf(params, y, mode).map(f64::exp)
}

/// Mean and variance of the double Poisson distribution.
///
/// `Approximate` returns the classical closed forms `(mu, mu/phi)`; `ExactSum`
/// computes both numerically from the renormalized mass function.
pub fn dp_moments(params: &DoublePoissonParams, mode: NormalizationMode) -> Result<(f64, f64)> {
    mode.validate()?;
    match mode {
        NormalizationMode::Approximate => Ok((params.mu(), params.mu() / params.phi())),
        NormalizationMode::ExactSum { tail_tolerance } => {
            let norm = dp_log_exact_norm(params, tail_tolerance)?;
            let log_pmf = |y: u64| params.log_kernel(y) - norm;
            let mean = weighted_moment(log_pmf, dp_decay_hint(params, 1), tail_tolerance, 1)?;
            let second = weighted_moment(log_pmf, dp_decay_hint(params, 2), tail_tolerance, 2)?;
            Ok((mean, second - mean * mean))
        }
    }
}

/// `sum_y y^k exp(log_pmf(y))` with certified truncation.
fn weighted_moment<F: Fn(u64) -> f64>(
    log_pmf: F,
    decay_from: u64,
    tol: f64,
    k: u32,
) -> Result<f64> {
    let (m, _) = certified_sum(
        |y| {
            if y == 0 {
                f64::NEG_INFINITY // y^k = 0 for k >= 1
            } else {
                log_pmf(y) + k as f64 * (y as f64).ln()
            }
        },
        decay_from,
        tol,
    )?;
    Ok(m)
}

/// Generalized Poisson log-probability of `y`.
pub fn gp_log_pmf(params: &GenPoissonParams, y: u64) -> f64 {
    params.log_pmf(y)
}

/// Generalized Poisson probability of `y`.
pub fn gp_pmf(params: &GenPoissonParams, y: u64) -> f64 {
    params.log_pmf(y).exp()
}

/// Mean, variance and third noncentral moment of the generalized Poisson
/// distribution:
///
/// ```text
/// E(Y)   = mu / (1-phi)
/// V(Y)   = mu / (1-phi)^3
/// E(Y^3) = mu / (1-phi)^5 * [mu^2 (1-phi)^2 + 3 mu (1-phi) - 2(1-phi) + 3]
/// ```
///
/// (equivalently from the cumulants k1 = mu/(1-phi), k2 = mu/(1-phi)^3,
/// k3 = mu(1+2 phi)/(1-phi)^5). For `phi < 0` these are the untruncated
/// closed forms; see [`GenPoissonParams::mass_deficiency`] for how much the
/// truncation distorts them.
pub fn gp_moments(params: &GenPoissonParams) -> (f64, f64, f64) {
    let (mu, phi) = (params.mu(), params.phi());
    let q = 1.0 - phi;
    let mean = mu / q;
    let var = mu / (q * q * q);
    let third = mu / q.powi(5) * (mu * mu * q * q + 3.0 * mu * q - 2.0 * q + 3.0);
    (mean, var, third)
}

/// Numeric slack above s = 1 so central differences of the pgf at 1 stay in
/// the admissible range.
const PGF_S_SLACK: f64 = 1e-3;
const PGF_TOL: f64 = 1e-14;
const PGF_MAX_ITER: u64 = 1_000_000;

/// Probability generating function `E(s^Y)` of the generalized Poisson
/// distribution for `0 <= s <= 1 + 1e-3` and `0 <= phi < 1`.
///
/// `P(s) = exp(mu (u - 1))` where `u` is the smaller root of
/// `u = s exp(phi (u - 1))`, found by fixed-point iteration from `u = 0`
/// (monotone convergence; tolerance 1e-14, at most 1e6 iterations).
pub fn gp_pgf(params: &GenPoissonParams, s: f64) -> Result<f64> {
    let (mu, phi) = (params.mu(), params.phi());
    if phi < 0.0 {
        return Err(Error::domain(format!(
            "the generating-function fixed point is only defined for 0 <= phi < 1, got phi={phi}"
        )));
    }
    if !(s.is_finite() && (0.0..=1.0 + PGF_S_SLACK).contains(&s)) {
        return Err(Error::domain(format!(
            "pgf argument must lie in [0, 1 + {PGF_S_SLACK}], got {s}"
        )));
    }
    if phi == 0.0 {
        return Ok((mu * (s - 1.0)).exp());
    }
    let mut u = 0.0_f64;
    for _ in 0..PGF_MAX_ITER {
        let next = s * (phi * (u - 1.0)).exp();
        if (next - u).abs() < PGF_TOL {
            return Ok((mu * (next - 1.0)).exp());
        }
        u = next;
    }
    Err(Error::numerical(format!(
        "pgf fixed point did not converge at s={s}, phi={phi}"
    )))
}

/// An innovation distribution together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnovationSpec {
    Poisson(PoissonParams),
    DoublePoisson(DoublePoissonParams),
    GenPoisson(GenPoissonParams),
}

impl InnovationSpec {
    pub fn poisson(mu: f64) -> Result<Self> {
        Ok(InnovationSpec::Poisson(PoissonParams::new(mu)?))
    }

    pub fn double_poisson(mu: f64, phi: f64) -> Result<Self> {
        Ok(InnovationSpec::DoublePoisson(DoublePoissonParams::new(mu, phi)?))
    }

    pub fn gen_poisson(mu: f64, phi: f64) -> Result<Self> {
        Ok(InnovationSpec::GenPoisson(GenPoissonParams::new(mu, phi)?))
    }

    pub fn family(&self) -> Family {
        match self {
            InnovationSpec::Poisson(_) => Family::Poisson,
            InnovationSpec::DoublePoisson(_) => Family::DoublePoisson,
            InnovationSpec::GenPoisson(_) => Family::GenPoisson,
        }
    }

    pub fn mu(&self) -> f64 {
        match self {
            InnovationSpec::Poisson(p) => p.mu(),
            InnovationSpec::DoublePoisson(p) => p.mu(),
            InnovationSpec::GenPoisson(p) => p.mu(),
        }
    }

    /// Dispersion parameter, when the family has one.
    pub fn phi(&self) -> Option<f64> {
        match self {
            InnovationSpec::Poisson(_) => None,
            InnovationSpec::DoublePoisson(p) => Some(p.phi()),
            InnovationSpec::GenPoisson(p) => Some(p.phi()),
        }
    }

    /// Log-probability of `y`. The mode only matters for the double Poisson
    /// family; note that `ExactSum` recomputes its normalization on every
    /// call — use [`InnovationSpec::log_pmf_table`] in loops.
    pub fn log_pmf(&self, y: u64, mode: NormalizationMode) -> Result<f64> {
        match self {
            InnovationSpec::Poisson(p) => Ok(p.log_pmf(y)),
            InnovationSpec::DoublePoisson(p) => dp_log_pmf(p, y, mode),
            InnovationSpec::GenPoisson(p) => Ok(p.log_pmf(y)),
        }
    }

    pub fn pmf(&self, y: u64, mode: NormalizationMode) -> Result<f64> {
        self.log_pmf(y, mode).map(f64::exp)
    }

    /// Log-probabilities for `y = 0..=max_y` in one pass (normalization
    /// computed once).
    pub fn log_pmf_table(&self, max_y: u64, mode: NormalizationMode) -> Result<Vec<f64>> {
        mode.validate()?;
        let n = max_y as usize + 1;
        match self {
            InnovationSpec::Poisson(p) => Ok((0..=max_y).map(|y| p.log_pmf(y)).collect()),
            InnovationSpec::GenPoisson(p) => Ok((0..=max_y).map(|y| p.log_pmf(y)).collect()),
            InnovationSpec::DoublePoisson(p) => {
                let log_norm = match mode {
                    NormalizationMode::Approximate => dp_normalizer(p)?.ln(),
                    NormalizationMode::ExactSum { tail_tolerance } => {
                        -dp_log_exact_norm(p, tail_tolerance)?
                    }
                };
                let mut out = Vec::with_capacity(n);
                out.extend((0..=max_y).map(|y| log_norm + p.log_kernel(y)));
                Ok(out)
            }
        }
    }

    /// Mean and variance under the given normalization mode.
    pub fn moments(&self, mode: NormalizationMode) -> Result<(f64, f64)> {
        match self {
            InnovationSpec::Poisson(p) => Ok((p.mu(), p.mu())),
            InnovationSpec::DoublePoisson(p) => dp_moments(p, mode),
            InnovationSpec::GenPoisson(p) => {
                let (m, v, _) = gp_moments(p);
                Ok((m, v))
            }
        }
    }

    /// Third noncentral moment `E(Y^3)`.
    ///
    /// Closed form for the generalized Poisson; numeric summation of the
    /// (renormalized) mass function for Poisson and double Poisson.
    pub fn third_noncentral_moment(&self, mode: NormalizationMode) -> Result<f64> {
        mode.validate()?;
        match self {
            InnovationSpec::GenPoisson(p) => Ok(gp_moments(p).2),
            InnovationSpec::Poisson(p) => {
                let mu = p.mu();
                let hint = decay_hint(mu, mu.sqrt(), 3);
                weighted_moment(|y| p.log_pmf(y), hint, 1e-12, 3)
            }
            InnovationSpec::DoublePoisson(p) => {
                let tol = match mode {
                    NormalizationMode::ExactSum { tail_tolerance } => tail_tolerance,
                    NormalizationMode::Approximate => 1e-12,
                };
                let norm = dp_log_exact_norm(p, tol)?;
                weighted_moment(|y| p.log_kernel(y) - norm, dp_decay_hint(p, 3), tol, 3)
            }
        }
    }
}

/// Fisher index of dispersion (variance over mean) implied by the family's
/// closed-form moments: 1 for Poisson, `1/phi` for double Poisson,
/// `1/(1-phi)^2` for generalized Poisson.
pub fn innovation_fisher_index(spec: &InnovationSpec) -> f64 {
    match spec {
        InnovationSpec::Poisson(_) => 1.0,
        InnovationSpec::DoublePoisson(p) => 1.0 / p.phi(),
        InnovationSpec::GenPoisson(p) => {
            let q = 1.0 - p.phi();
            1.0 / (q * q)
        }
    }
}

/// Inverse-CDF sampler over a precomputed cumulative table.
///
/// The table is built eagerly at construction (support scanned until the
/// certified tail remainder is below 1e-12, or, for a truncated generalized
/// Poisson, until the support ends) and never mutated afterwards, so a single
/// sampler can be shared across threads. Draws use one uniform variate and a
/// binary search; `u * total` implicitly renormalizes, which for the double
/// Poisson realizes exact-sum normalization and for a truncated generalized
/// Poisson draws from the conditional law on the retained support.
#[derive(Debug, Clone)]
pub struct InnovationSampler {
    cumulative: Vec<f64>,
    total: f64,
    /// Probability mass not represented in the table. See [`Self::mass_deficiency`].
    deficiency: f64,
}

const SAMPLER_TAIL: f64 = 1e-12;

impl InnovationSampler {
    pub fn new(spec: &InnovationSpec) -> Result<Self> {
        let log_term: Box<dyn Fn(u64) -> f64> = match spec {
            InnovationSpec::Poisson(p) => {
                let p = *p;
                Box::new(move |y| p.log_pmf(y))
            }
            InnovationSpec::GenPoisson(p) => {
                let p = *p;
                Box::new(move |y| p.log_pmf(y))
            }
            // Unnormalized kernel: dividing by the table total below *is* the
            // exact-sum normalization.
            InnovationSpec::DoublePoisson(p) => {
                let p = *p;
                Box::new(move |y| p.log_kernel(y))
            }
        };
        let (mean_guess, sd_guess) = match spec {
            InnovationSpec::Poisson(p) => (p.mu(), p.mu().sqrt()),
            InnovationSpec::DoublePoisson(p) => (p.mu(), (p.mu() / p.phi()).sqrt()),
            InnovationSpec::GenPoisson(p) => {
                let (m, v, _) = gp_moments(p);
                (m, v.sqrt())
            }
        };
        let hint = decay_hint(mean_guess, sd_guess, 0);
        let mut cumulative = Vec::with_capacity(hint as usize + 16);
        let mut sum = 0.0_f64;
        let mut prev = f64::NAN;
        let mut tail_bound = 0.0_f64;
        for y in 0..SUM_MAX_TERMS {
            let t = log_term(y).exp();
            sum += t;
            cumulative.push(sum);
            if y > hint {
                if t == 0.0 {
                    break; // end of truncated support (or deep underflow)
                }
                if prev.is_finite() && prev > 0.0 && t < prev {
                    let r = t / prev;
                    tail_bound = t * r / (1.0 - r);
                    if tail_bound < SAMPLER_TAIL * sum {
                        break;
                    }
                }
            }
            prev = t;
        }
        // Drop trailing zero-increment entries (truncated supports).
        while cumulative.len() >= 2 && cumulative[cumulative.len() - 1] == cumulative[cumulative.len() - 2]
        {
            cumulative.pop();
        }
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::numerical(
                "innovation sampler table has non-positive total mass".to_string(),
            ));
        }
        if cumulative.len() as u64 >= SUM_MAX_TERMS {
            return Err(Error::numerical(
                "innovation sampler table did not reach its tail tolerance".to_string(),
            ));
        }
        // For families whose terms are genuine probabilities the uncovered
        // mass is 1 - total; for the double Poisson the table is the
        // normalization itself, so only the certified tail remainder is lost.
        let deficiency = match spec {
            InnovationSpec::DoublePoisson(_) => tail_bound / sum,
            _ => 1.0 - sum,
        };
        Ok(InnovationSampler { cumulative, total: sum, deficiency })
    }

    /// Draw one innovation.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let target = rng.random::<f64>() * self.total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        // A target beyond the last entry (possible only through the tail
        // remainder) clamps to the largest tabulated value.
        idx.min(self.cumulative.len() - 1) as u64
    }

    /// Probability mass not covered by the table: the truncation diagnostic
    /// for a generalized Poisson with `phi < 0` (negative when the truncated
    /// kernel carries excess mass), otherwise at most the 1e-12 tail target.
    pub fn mass_deficiency(&self) -> f64 {
        self.deficiency
    }

    /// Number of support points in the table.
    pub fn support_len(&self) -> usize {
        self.cumulative.len()
    }
}

thread_local! {
    static SAMPLER_CACHE: RefCell<HashMap<(Family, u64, u64), Rc<InnovationSampler>>> =
        RefCell::new(HashMap::new());
}

/// Draw one innovation from `spec`, building (and caching per thread) the
/// sampler table on first use for each parameter combination.
///
/// Loops should construct an [`InnovationSampler`] once and reuse it; this
/// convenience wrapper exists for one-off draws.
pub fn sample_innovation<R: Rng + ?Sized>(spec: &InnovationSpec, rng: &mut R) -> Result<u64> {
    let key = (
        spec.family(),
        spec.mu().to_bits(),
        spec.phi().unwrap_or(0.0).to_bits(),
    );
    let sampler = SAMPLER_CACHE.with(|cache| -> Result<Rc<InnovationSampler>> {
        let mut cache = cache.borrow_mut();
        if let Some(s) = cache.get(&key) {
            return Ok(Rc::clone(s));
        }
        let s = Rc::new(InnovationSampler::new(spec)?);
        cache.insert(key, Rc::clone(&s));
        Ok(s)
    })?;
    Ok(sampler.sample(rng))
}

/// Log-probabilities of the distribution restricted to `0..=max_y`,
/// exponentiated and summed — test helper shared by the kernel assertions.
#[cfg(test)]
pub(crate) fn pmf_mass_up_to(spec: &InnovationSpec, max_y: u64, mode: NormalizationMode) -> f64 {
    (0..=max_y)
        .map(|y| spec.log_pmf(y, mode).unwrap().exp())
        .sum()
}
