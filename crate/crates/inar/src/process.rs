//! The INAR(1) process: binomial thinning, simulation, the exact transition
//! kernel and stationary moments.
//!
//! The model is `X_t = alpha ∘ X_{t-1} + eps_t`, where `alpha ∘ X` is binomial
//! thinning (a sum of X independent Bernoulli(alpha) indicators) and the
//! innovations `eps_t` are iid from one of the families in
//! [`crate::innovations`]. For `alpha` in `[0, 1)` the process is stationary
//! and ergodic with
//!
//! ```text
//! E(X)    = mu_eps / (1 - alpha)
//! V(X)    = (alpha mu_eps + sigma2_eps) / (1 - alpha^2)
//! FI_X    = (FI_eps + alpha) / (1 + alpha)
//! corr(X_t, X_{t-h}) = alpha^h
//! ```

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::innovations::{Family, InnovationSampler, InnovationSpec, NormalizationMode};
use crate::special::{ln_choose, log_sum_exp};

/// An observed (or simulated) count series with at least two observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSeries {
    values: Vec<u64>,
}

impl CountSeries {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::degenerate(format!(
                "a count series needs at least 2 observations, got {}",
                values.len()
            )));
        }
        Ok(CountSeries { values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor guarantees at least two observations
    }

    pub fn into_values(self) -> Vec<u64> {
        self.values
    }

    /// Largest observed count.
    pub fn max(&self) -> u64 {
        *self.values.iter().max().expect("series is non-empty")
    }
}

/// A fully specified INAR(1) model: thinning probability, innovation family
/// and the double-Poisson normalization mode used by its likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct Inar1Model {
    alpha: f64,
    innovations: InnovationSpec,
    mode: NormalizationMode,
}

impl Inar1Model {
    /// Model with the default (closed-form) normalization mode.
    pub fn new(alpha: f64, innovations: InnovationSpec) -> Result<Self> {
        Self::with_mode(alpha, innovations, NormalizationMode::default())
    }

    pub fn with_mode(
        alpha: f64,
        innovations: InnovationSpec,
        mode: NormalizationMode,
    ) -> Result<Self> {
        if !(alpha.is_finite() && (0.0..1.0).contains(&alpha)) {
            return Err(Error::invalid(format!(
                "thinning parameter alpha must lie in [0, 1), got {alpha}"
            )));
        }
        mode.validate()?;
        // Surface degenerate normalizations (e.g. a non-positive approximate
        // double-Poisson constant) at construction rather than at every use.
        innovations.log_pmf(0, mode)?;
        Ok(Inar1Model { alpha, innovations, mode })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn innovations(&self) -> &InnovationSpec {
        &self.innovations
    }

    pub fn mode(&self) -> NormalizationMode {
        self.mode
    }

    pub fn family(&self) -> Family {
        self.innovations.family()
    }
}

/// Binomial thinning `alpha ∘ x`: the number of survivors among `x`
/// independent Bernoulli(alpha) trials.
///
/// Requires `0 <= alpha <= 1` (checked; `alpha = 1` keeps everything).
pub fn binomial_thinning<R: Rng + ?Sized>(alpha: f64, x: u64, rng: &mut R) -> u64 {
    assert!(
        alpha.is_finite() && (0.0..=1.0).contains(&alpha),
        "thinning requires alpha in [0, 1], got {alpha}"
    );
    if alpha == 0.0 || x == 0 {
        return 0;
    }
    if alpha == 1.0 {
        return x;
    }
    (0..x).filter(|_| rng.random::<f64>() < alpha).count() as u64
}

/// Simulate a series of `length` observations from `model`.
///
/// The chain starts at `X_1` drawn from the innovation distribution itself;
/// `burn_in` transitions are then applied and discarded before recording
/// starts, so `burn_in = 0` reproduces the innovation-start protocol exactly
/// and a few hundred steps give an approximately stationary start.
pub fn simulate<R: Rng + ?Sized>(
    model: &Inar1Model,
    length: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<CountSeries> {
    let sampler = InnovationSampler::new(model.innovations())?;
    Ok(simulate_with_sampler(model.alpha(), &sampler, length, burn_in, rng))
}

/// Simulation core reusing a prebuilt innovation sampler (the hot path for
/// Monte Carlo studies). Panics if `length < 2`.
pub fn simulate_with_sampler<R: Rng + ?Sized>(
    alpha: f64,
    sampler: &InnovationSampler,
    length: usize,
    burn_in: usize,
    rng: &mut R,
) -> CountSeries {
    assert!(length >= 2, "a count series needs at least 2 observations");
    let mut x = sampler.sample(rng);
    for _ in 0..burn_in {
        x = binomial_thinning(alpha, x, rng) + sampler.sample(rng);
    }
    let mut values = Vec::with_capacity(length);
    values.push(x);
    for _ in 1..length {
        x = binomial_thinning(alpha, x, rng) + sampler.sample(rng);
        values.push(x);
    }
    CountSeries { values }
}

/// Log of the one-step transition probability
/// `Pr(X_t = to | X_{t-1} = from)`:
///
/// ```text
/// p(k | l) = sum_{i=0}^{min(k,l)} C(l, i) alpha^i (1-alpha)^(l-i) * f_eps(k - i)
/// ```
///
/// evaluated in log space with a log-sum-exp over the binomial convolution.
pub fn transition_log_prob(model: &Inar1Model, from: u64, to: u64) -> Result<f64> {
    let alpha = model.alpha();
    if alpha == 0.0 || from == 0 {
        return model.innovations().log_pmf(to, model.mode());
    }
    let eps_table = model.innovations().log_pmf_table(to, model.mode())?;
    Ok(transition_log_prob_with_table(alpha, &eps_table, from, to))
}

/// Kernel evaluation against a precomputed innovation log-pmf table covering
/// `0..=to` — shared by [`transition_log_prob`] and the likelihood code.
pub(crate) fn transition_log_prob_with_table(
    alpha: f64,
    eps_log_pmf: &[f64],
    from: u64,
    to: u64,
) -> f64 {
    debug_assert!(eps_log_pmf.len() as u64 > to);
    if alpha == 0.0 || from == 0 {
        return eps_log_pmf[to as usize];
    }
    let ln_a = alpha.ln();
    let ln_b = (1.0 - alpha).ln();
    let m = from.min(to) as usize;
    // The convolution length is the smaller of the two counts; a stack buffer
    // covers every realistic series and keeps the likelihood loop allocation-free.
    let mut stack = [0.0_f64; 128];
    let mut heap: Vec<f64>;
    let terms: &mut [f64] = if m < stack.len() {
        &mut stack[..=m]
    } else {
        heap = vec![0.0; m + 1];
        &mut heap
    };
    for (i, slot) in terms.iter_mut().enumerate() {
        let i = i as u64;
        *slot = ln_choose(from, i) + i as f64 * ln_a + (from - i) as f64 * ln_b
            + eps_log_pmf[(to - i) as usize];
    }
    log_sum_exp(terms)
}

/// One-step transition probability (see [`transition_log_prob`]).
pub fn transition_prob(model: &Inar1Model, from: u64, to: u64) -> Result<f64> {
    transition_log_prob(model, from, to).map(f64::exp)
}

/// Conditional mean and variance of `X_t` given `X_{t-1} = x`:
///
/// ```text
/// E(X_t | x) = alpha x + mu_eps
/// V(X_t | x) = alpha (1-alpha) x + sigma2_eps
/// ```
///
/// Innovation moments follow the model's normalization mode, so exact-sum
/// models agree with their transition kernel to full precision.
pub fn conditional_moments(model: &Inar1Model, x_prev: u64) -> Result<(f64, f64)> {
    let (mu_eps, var_eps) = model.innovations().moments(model.mode())?;
    let (alpha, x) = (model.alpha(), x_prev as f64);
    Ok((alpha * x + mu_eps, alpha * (1.0 - alpha) * x + var_eps))
}

/// Stationary mean, variance, dispersion index and lag-1 autocorrelation of
/// an INAR(1) model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryMoments {
    pub mean: f64,
    pub variance: f64,
    pub fisher_index: f64,
    /// Lag-1 autocorrelation, equal to alpha.
    pub acf_lag1: f64,
}

/// Stationary moments from the closed-form innovation moments
/// (`mu_X = mu_eps/(1-alpha)`, `sigma2_X = (alpha mu_eps + sigma2_eps)/(1-alpha^2)`).
pub fn stationary_moments(model: &Inar1Model) -> StationaryMoments {
    let (mu_eps, var_eps) = model
        .innovations()
        .moments(NormalizationMode::Approximate)
        .expect("closed-form innovation moments are total");
    let alpha = model.alpha();
    let mean = mu_eps / (1.0 - alpha);
    let variance = (alpha * mu_eps + var_eps) / (1.0 - alpha * alpha);
    StationaryMoments { mean, variance, fisher_index: variance / mean, acf_lag1: alpha }
}

/// Stationary third noncentral moment `E(X^3)` via the fixed-point relation
///
/// ```text
/// m3 (1 - a^3) = 3 a^2 (1-a) m2 + a (1-a)(1-2a) m1
///              + 3 mu_eps [a^2 m2 + a (1-a) m1] + 3 a m1 m2_eps + m3_eps
/// ```
///
/// (from the binomial-thinning identity
/// `E[(a∘X)^3 | X] = a^3 X^3 + 3a^2(1-a) X^2 + a(1-a)(1-2a) X` and the
/// independence of the innovation), where `m1, m2` are the stationary mean
/// and second noncentral moment and `m2_eps, m3_eps` the innovation's.
pub fn stationary_third_moment(model: &Inar1Model) -> Result<f64> {
    let a = model.alpha();
    let (mu_eps, var_eps) = model.innovations().moments(model.mode())?;
    let m2_eps = var_eps + mu_eps * mu_eps;
    let m3_eps = model.innovations().third_noncentral_moment(model.mode())?;
    let st = stationary_moments(model);
    let m1 = st.mean;
    let m2 = st.variance + st.mean * st.mean;
    let numer = 3.0 * a * a * (1.0 - a) * m2
        + a * (1.0 - a) * (1.0 - 2.0 * a) * m1
        + 3.0 * mu_eps * (a * a * m2 + a * (1.0 - a) * m1)
        + 3.0 * a * m1 * m2_eps
        + m3_eps;
    Ok(numer / (1.0 - a * a * a))
}

/// Stationary Fisher indexes of an INAR(1) family over a grid of dispersion
/// and thinning parameters (`values[i][j]` belongs to `phis[i]`, `alphas[j]`;
/// the index does not depend on `mu`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionTable {
    pub family: Family,
    pub alphas: Vec<f64>,
    pub phis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Fisher index grid for the double or generalized Poisson INAR(1):
///
/// ```text
/// double Poisson:      FI_X = (1 + alpha phi) / (phi (1 + alpha))
/// generalized Poisson: FI_X = (1 + alpha (1-phi)^2) / ((1 + alpha)(1-phi)^2)
/// ```
pub fn dispersion_table(family: Family, alphas: &[f64], phis: &[f64]) -> Result<DispersionTable> {
    if family == Family::Poisson {
        return Err(Error::domain(
            "the dispersion table is defined for the two-parameter families only".to_string(),
        ));
    }
    for &a in alphas {
        if !(a.is_finite() && (0.0..1.0).contains(&a)) {
            return Err(Error::invalid(format!("alpha grid value out of [0, 1): {a}")));
        }
    }
    for &phi in phis {
        let ok = match family {
            Family::DoublePoisson => phi.is_finite() && phi > 0.0,
            Family::GenPoisson => phi.is_finite() && phi.abs() < 1.0,
            Family::Poisson => unreachable!(),
        };
        if !ok {
            return Err(Error::invalid(format!("phi grid value out of domain: {phi}")));
        }
    }
    let values = phis
        .iter()
        .map(|&phi| {
            alphas
                .iter()
                .map(|&a| match family {
                    Family::DoublePoisson => (1.0 + a * phi) / (phi * (1.0 + a)),
                    Family::GenPoisson => {
                        let q2 = (1.0 - phi) * (1.0 - phi);
                        (1.0 + a * q2) / ((1.0 + a) * q2)
                    }
                    Family::Poisson => unreachable!(),
                })
                .collect()
        })
        .collect();
    Ok(DispersionTable {
        family,
        alphas: alphas.to_vec(),
        phis: phis.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dp_model(alpha: f64, mu: f64, phi: f64) -> Inar1Model {
        Inar1Model::new(alpha, InnovationSpec::double_poisson(mu, phi).unwrap()).unwrap()
    }

    fn gp_model(alpha: f64, mu: f64, phi: f64) -> Inar1Model {
        Inar1Model::new(alpha, InnovationSpec::gen_poisson(mu, phi).unwrap()).unwrap()
    }

    fn poisson_model(alpha: f64, mu: f64) -> Inar1Model {
        Inar1Model::new(alpha, InnovationSpec::poisson(mu).unwrap()).unwrap()
    }

    #[test]
    fn count_series_needs_two_observations() {
        assert!(CountSeries::new(vec![]).is_err());
        assert!(CountSeries::new(vec![3]).is_err());
        let s = CountSeries::new(vec![3, 1, 4]).unwrap();
        assert_eq!(s.values(), &[3, 1, 4]);
        assert_eq!(s.len(), 3);
        assert_eq!(s.max(), 4);
    }

    #[test]
    fn model_validates_alpha_and_normalization() {
        let spec = InnovationSpec::poisson(2.0).unwrap();
        assert!(Inar1Model::new(1.0, spec).is_err());
        assert!(Inar1Model::new(-0.1, spec).is_err());
        assert!(Inar1Model::new(0.999, spec).is_ok());
        // Degenerate approximate normalizer surfaces at construction.
        let bad = InnovationSpec::double_poisson(0.01, 2.0).unwrap();
        assert!(Inar1Model::new(0.3, bad).is_err());
        assert!(Inar1Model::with_mode(0.3, bad, NormalizationMode::exact_sum(1e-9).unwrap()).is_ok());
    }

    #[test]
    fn thinning_edge_cases_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(binomial_thinning(0.4, 0, &mut rng), 0);
        assert_eq!(binomial_thinning(0.0, 10, &mut rng), 0);
        assert_eq!(binomial_thinning(1.0, 10, &mut rng), 10);
        for _ in 0..100 {
            assert!(binomial_thinning(0.5, 7, &mut rng) <= 7);
        }
        // E(0.3 ∘ 20) = 6; 4 binomial standard errors over 20k replicates.
        let n = 20_000;
        let total: u64 = (0..n).map(|_| binomial_thinning(0.3, 20, &mut rng)).sum();
        let mean = total as f64 / n as f64;
        let se = (20.0 * 0.3 * 0.7 / n as f64).sqrt();
        assert!((mean - 6.0).abs() < 4.0 * se, "thinning mean {mean}");
    }

    #[test]
    fn simulate_alpha_zero_is_iid() {
        let model = poisson_model(0.0, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = simulate(&model, 50_000, 0, &mut rng).unwrap();
        let mean = s.values().iter().sum::<u64>() as f64 / s.len() as f64;
        assert!((mean - 3.0).abs() < 4.0 * (3.0_f64 / 50_000.0).sqrt());
        // Lag-1 sample autocorrelation of an iid stream is ~ N(0, 1/T).
        let d: Vec<f64> = s.values().iter().map(|&v| v as f64 - mean).collect();
        let acf1 = d.windows(2).map(|w| w[0] * w[1]).sum::<f64>()
            / d.iter().map(|v| v * v).sum::<f64>();
        assert!(acf1.abs() < 4.0 / (50_000.0_f64).sqrt(), "acf1 {acf1}");
    }

    #[test]
    fn simulate_is_reproducible_and_respects_length() {
        let model = dp_model(0.3, 5.0, 0.5);
        let mut rng1 = ChaCha8Rng::seed_from_u64(99);
        let mut rng2 = ChaCha8Rng::seed_from_u64(99);
        let s1 = simulate(&model, 500, 100, &mut rng1).unwrap();
        let s2 = simulate(&model, 500, 100, &mut rng2).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), 500);
    }

    #[test]
    fn simulated_moments_match_stationary_values() {
        // INARDP(0.3, 5, 0.5): mean 50/7 = 7.142857, FI (1+0.15)/(0.5*1.3) = 1.769231.
        let model = dp_model(0.3, 5.0, 0.5);
        let st = stationary_moments(&model);
        assert!((st.mean - 50.0 / 7.0).abs() < 1e-12);
        assert!((st.fisher_index - 1.769_230_769_230_769).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let s = simulate(&model, 50_000, 1000, &mut rng).unwrap();
        let t = s.len() as f64;
        let mean = s.values().iter().sum::<u64>() as f64 / t;
        let var = s.values().iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / t;
        // SE(mean) for an AR(1)-correlated series: sqrt(v (1+a)/((1-a) T)).
        let se_mean = (st.variance * 1.3 / 0.7 / t).sqrt();
        assert!((mean - st.mean).abs() < 4.0 * se_mean, "mean {mean} vs {}", st.mean);
        assert!((var / mean - st.fisher_index).abs() < 0.08, "FI {}", var / mean);
    }

    #[test]
    fn sample_acf_decays_like_powers_of_alpha() {
        let model = gp_model(0.5, 1.0, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = simulate(&model, 200_000, 500, &mut rng).unwrap();
        let mean = s.values().iter().sum::<u64>() as f64 / s.len() as f64;
        let d: Vec<f64> = s.values().iter().map(|&v| v as f64 - mean).collect();
        let denom: f64 = d.iter().map(|v| v * v).sum();
        for h in 1..=3 {
            let num: f64 = d[..d.len() - h].iter().zip(&d[h..]).map(|(a, b)| a * b).sum();
            let acf = num / denom;
            assert!(
                (acf - 0.5_f64.powi(h as i32)).abs() < 0.02,
                "acf({h}) = {acf}, expected {}",
                0.5_f64.powi(h as i32)
            );
        }
    }

    #[test]
    fn kernel_reduces_to_innovation_pmf() {
        let model = gp_model(0.0, 2.0, 0.4);
        for k in 0..=20 {
            let lhs = transition_prob(&model, 9, k).unwrap();
            let rhs = model.innovations().pmf(k, model.mode()).unwrap();
            assert!((lhs - rhs).abs() < 1e-15);
        }
        let model = dp_model(0.4, 2.0, 0.7);
        for k in 0..=20 {
            let lhs = transition_prob(&model, 0, k).unwrap();
            let rhs = model.innovations().pmf(k, model.mode()).unwrap();
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_rows_sum_to_one() {
        let exact = NormalizationMode::exact_sum(1e-11).unwrap();
        let models = [
            Inar1Model::with_mode(0.3, InnovationSpec::double_poisson(5.0, 0.5).unwrap(), exact)
                .unwrap(),
            Inar1Model::with_mode(0.6, InnovationSpec::double_poisson(2.0, 1.5).unwrap(), exact)
                .unwrap(),
            gp_model(0.5, 1.0, 0.5),
            gp_model(0.25, 2.0, -0.3),
            poisson_model(0.7, 4.0),
        ];
        for model in &models {
            for l in [0_u64, 1, 5, 12, 30] {
                let mut sum = 0.0;
                for k in 0..=(l + 220) {
                    sum += transition_prob(model, l, k).unwrap();
                }
                let tolerance = if model.family() == Family::GenPoisson
                    && model.innovations().phi().unwrap() < 0.0
                {
                    // Truncated innovations lose their deficiency mass.
                    0.05
                } else {
                    1e-8
                };
                assert!(
                    (sum - 1.0).abs() < tolerance,
                    "row {l} of {:?} sums to {sum}",
                    model.family()
                );
            }
        }
    }

    #[test]
    fn kernel_mean_matches_conditional_moments() {
        let exact = NormalizationMode::exact_sum(1e-11).unwrap();
        let models = [
            Inar1Model::with_mode(0.3, InnovationSpec::double_poisson(5.0, 0.5).unwrap(), exact)
                .unwrap(),
            gp_model(0.5, 1.0, 0.5),
            poisson_model(0.4, 2.0),
        ];
        for model in &models {
            for l in [0_u64, 3, 10] {
                let (mean, var) = conditional_moments(model, l).unwrap();
                let (mut m1, mut m2) = (0.0, 0.0);
                for k in 0..=(l + 260) {
                    let p = transition_prob(model, l, k).unwrap();
                    m1 += k as f64 * p;
                    m2 += (k as f64) * (k as f64) * p;
                }
                assert!((m1 - mean).abs() < 1e-8, "kernel mean {m1} vs {mean} at l={l}");
                assert!(
                    (m2 - m1 * m1 - var).abs() < 1e-7,
                    "kernel variance {} vs {var} at l={l}",
                    m2 - m1 * m1
                );
            }
        }
    }

    #[test]
    fn conditional_moments_reference_values() {
        // Double Poisson mu=5, phi=0.5, alpha=0.3, x=10: (3 + 5, 2.1 + 10).
        let (mean, var) = conditional_moments(&dp_model(0.3, 5.0, 0.5), 10).unwrap();
        assert!((mean - 8.0).abs() < 1e-12);
        assert!((var - 12.1).abs() < 1e-12);
        // Generalized Poisson mu=1, phi=0.5, alpha=0.5, x=4: (2 + 2, 1 + 8).
        let (mean, var) = conditional_moments(&gp_model(0.5, 1.0, 0.5), 4).unwrap();
        assert!((mean - 4.0).abs() < 1e-12);
        assert!((var - 9.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_fisher_index_identity() {
        // FI_X = (FI_eps + alpha) / (1 + alpha) across families.
        use crate::innovations::innovation_fisher_index;
        let models = [
            dp_model(0.3, 5.0, 0.3),
            dp_model(0.7, 2.0, 1.5),
            gp_model(0.5, 1.0, 0.5),
            gp_model(0.3, 2.0, -0.5),
            poisson_model(0.6, 3.0),
        ];
        for model in &models {
            let st = stationary_moments(model);
            let fi_eps = innovation_fisher_index(model.innovations());
            let expected = (fi_eps + model.alpha()) / (1.0 + model.alpha());
            assert!((st.fisher_index - expected).abs() < 1e-12);
        }
        // Reference cells: INARDP(0.3, phi=0.3) and INARGP(0.5, phi=0.5).
        assert!((stationary_moments(&dp_model(0.3, 5.0, 0.3)).fisher_index - 2.794_871_794_871_795).abs() < 1e-10);
        assert!((stationary_moments(&gp_model(0.5, 1.0, 0.5)).fisher_index - 3.0).abs() < 1e-12);
        assert!((stationary_moments(&gp_model(0.5, 7.0, 0.5)).fisher_index - 3.0).abs() < 1e-12);
        assert!((stationary_moments(&poisson_model(0.4, 2.0)).fisher_index - 1.0).abs() < 1e-12);
    }

    #[test]
    fn third_moment_alpha_zero_is_innovation_third_moment() {
        let model = gp_model(0.0, 1.0, 0.5);
        let m3 = stationary_third_moment(&model).unwrap();
        assert!((m3 - 120.0).abs() < 1e-10);
    }

    #[test]
    fn third_moment_matches_poisson_marginal_oracle() {
        // A Poisson INAR(1) with alpha=0.5, mu=2 has Poisson(4) marginal:
        // E(X^3) = lambda^3 + 3 lambda^2 + lambda = 116.
        let model = poisson_model(0.5, 2.0);
        let m3 = stationary_third_moment(&model).unwrap();
        assert!((m3 - 116.0).abs() < 1e-6, "m3 = {m3}");
    }

    #[test]
    fn dispersion_table_reference_cells() {
        let alphas = [0.3, 0.5, 0.7];
        let dp = dispersion_table(Family::DoublePoisson, &alphas, &[0.5, 1.3]).unwrap();
        assert!((dp.values[0][0] - 1.7692).abs() < 5e-5);
        assert!((dp.values[0][1] - 1.6667).abs() < 5e-5);
        assert!((dp.values[0][2] - 1.5882).abs() < 5e-5);
        assert!((dp.values[1][0] - 0.8225).abs() < 5e-5);

        let gp = dispersion_table(Family::GenPoisson, &alphas, &[-0.7, 0.5, 0.7]).unwrap();
        assert!((gp.values[0][0] - 0.4969).abs() < 5e-5);
        assert!((gp.values[1][1] - 3.0).abs() < 1e-12);
        assert!((gp.values[2][0] - 8.7778).abs() < 5e-5);

        assert!(dispersion_table(Family::Poisson, &alphas, &[0.5]).is_err());
        assert!(dispersion_table(Family::DoublePoisson, &[1.0], &[0.5]).is_err());
        assert!(dispersion_table(Family::DoublePoisson, &alphas, &[0.0]).is_err());
        assert!(dispersion_table(Family::GenPoisson, &alphas, &[1.0]).is_err());
    }
}
