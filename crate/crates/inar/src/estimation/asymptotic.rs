//! Asymptotic covariance of the two-parameter CLS estimators.
//!
//! Both results come from the standard least-squares limit theory for
//! conditionally specified time series: with `V = E[∂g ∂g']` and
//! `W = E[v(X) ∂g ∂g']`, where `g` is the conditional mean and `v` the
//! conditional variance, `sqrt(T) (θ̂ - θ)` is asymptotically normal with
//! covariance `V⁻¹ W V⁻¹`.
//!
//! For the double-Poisson parametrisation `(alpha, mu)` the sandwich reduces
//! to closed-form entries in the stationary moments; for the generalized
//! Poisson parametrisation `(alpha, phi)` the matrices are assembled and
//! inverted numerically.

use crate::error::{Error, Result};
use crate::innovations::InnovationSpec;
use crate::optimize::{invert_small, mat_mul};
use crate::process::{stationary_moments, stationary_third_moment, Inar1Model};

/// Asymptotic covariance matrix of `sqrt(T) (θ̂ - θ)` with named rows.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticCov {
    /// Parameter names, in row order.
    pub labels: [&'static str; 2],
    pub matrix: [[f64; 2]; 2],
}

/// Central third moment of the stationary distribution, `E[(X - μ_X)³]`.
fn central_third(model: &Inar1Model) -> Result<f64> {
    let st = stationary_moments(model);
    let m3 = stationary_third_moment(model)?;
    Ok(m3 - 3.0 * st.mean * st.variance - st.mean.powi(3))
}

/// Asymptotic covariance of the CLS estimator of `(alpha, mu)` in the
/// double-Poisson model.
pub fn asymptotic_cov_dp(alpha: f64, mu: f64, phi: f64) -> Result<AsymptoticCov> {
    let model = Inar1Model::new(alpha, InnovationSpec::double_poisson(mu, phi)?)?;
    let gamma = central_third(&model)?;

    let a = alpha;
    let q = 1.0 + a * phi;
    let s00 = gamma * a * (1.0 - a).powi(3) * (1.0 + a).powi(2) * phi * phi
        / (mu * mu * q * q)
        + 1.0
        - a * a;
    let s01 = a * (1.0 - a) - mu * (1.0 + a)
        - gamma * a * (1.0 - a * a).powi(2) * phi * phi / (mu * q * q);
    let s11 = gamma * a * (1.0 - a) * (1.0 + a).powi(2) * phi * phi / (q * q)
        + mu * mu * (1.0 + a) / (1.0 - a)
        + mu / phi
        - a * mu;

    Ok(AsymptoticCov {
        labels: ["alpha", "mu"],
        matrix: [[s00, s01], [s01, s11]],
    })
}

/// Asymptotic covariance of the CLS estimator of `(alpha, phi)` in the
/// generalized-Poisson model with `mu` treated as known.
pub fn asymptotic_cov_gp(alpha: f64, mu: f64, phi: f64) -> Result<AsymptoticCov> {
    let model = Inar1Model::new(alpha, InnovationSpec::gen_poisson(mu, phi)?)?;
    let st = stationary_moments(&model);
    let (eps_mean, eps_var) = model.innovations().moments(model.mode())?;

    let m1 = st.mean;
    let m2 = st.variance + m1 * m1;
    let m3 = stationary_third_moment(&model)?;
    // Derivative of the conditional mean with respect to phi.
    let c = mu / (1.0 - phi).powi(2);
    let a = alpha;
    let ev = a * (1.0 - a);

    let v = vec![vec![m2, c * m1], vec![c * m1, c * c]];
    let w = vec![
        vec![ev * m3 + eps_var * m2, c * (ev * m2 + eps_var * m1)],
        vec![
            c * (ev * m2 + eps_var * m1),
            c * c * (a * eps_mean + eps_var),
        ],
    ];
    let v_inv = invert_small(&v).ok_or_else(|| {
        Error::numerical("design matrix V is singular; cannot form the sandwich covariance")
    })?;
    let sigma = mat_mul(&mat_mul(&v_inv, &w), &v_inv);

    Ok(AsymptoticCov {
        labels: ["alpha", "phi"],
        matrix: [[sigma[0][0], sigma[0][1]], [sigma[1][0], sigma[1][1]]],
    })
}
